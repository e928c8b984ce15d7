"""Independent oracles shared by unit and acceptance tests.

These deliberately re-derive expected results from first principles
(concrete execution, brute force enumeration) rather than reusing the
library's own machinery, so a bug can't hide on both sides of an
assertion.
"""

from __future__ import annotations

import itertools
import random

from pathinv.frontend.ast_nodes import (
    Assert,
    Assign,
    Assume,
    Binary,
    Havoc,
    IntLit,
    Nondet,
    Unary,
    Var,
)
from pathinv.interp import eval_expr, eval_pred


# --- witnessed evaluation of strongest postconditions ------------------------


def witness_assignment(stmts, init_env, inputs):
    """Execute a straight-line segment, recording the value of every
    skolem name (`x$k`, `nd$k`) the sp transformer would introduce.

    Returns (full_assignment, accepted): with the witnessed skolems the
    sp predicate must evaluate to exactly `accepted` — equalities pin all
    intermediate values once the pre state and inputs are fixed.
    """
    env = dict(init_env)
    skolems = {}
    feed = iter(inputs)
    counter = itertools.count()
    accepted = True

    def value_of(e):
        # mirrors the transformer's traversal order for nondet() naming
        if isinstance(e, Nondet):
            name = f"nd${next(counter)}"
            skolems[name] = next(feed)
            return skolems[name]
        if isinstance(e, Unary):
            v = value_of(e.operand)
            return -v if e.op == "neg" else (not v)
        if isinstance(e, Binary):
            lv, rv = value_of(e.left), value_of(e.right)
            return eval_expr(Binary(e.op, IntLit(lv), IntLit(rv)), {})
        return eval_expr(e, env)

    for s in stmts:
        if isinstance(s, Assign):
            v = value_of(s.value)
            skolems[f"{s.target}${next(counter)}"] = env[s.target]
            env[s.target] = v
        elif isinstance(s, Havoc):
            skolems[f"{s.target}${next(counter)}"] = env[s.target]
            env[s.target] = next(feed)
        elif isinstance(s, Assume):
            if not eval_pred(s.cond, env):
                accepted = False  # keep executing: values stay pinned
        elif isinstance(s, Assert):
            pass
    return {**skolems, **env}, accepted


# --- random straight-line segments -------------------------------------------


def random_linear_expr(rng: random.Random, names, depth=0):
    pick = rng.randrange(6 if depth < 2 else 2)
    if pick == 0:
        return IntLit(rng.randint(-3, 3))
    if pick == 1:
        return Var(rng.choice(names))
    if pick == 2:
        return Binary("+", random_linear_expr(rng, names, depth + 1),
                      random_linear_expr(rng, names, depth + 1))
    if pick == 3:
        return Binary("-", random_linear_expr(rng, names, depth + 1),
                      random_linear_expr(rng, names, depth + 1))
    if pick == 4:
        return Binary("*", IntLit(rng.randint(-2, 3)),
                      random_linear_expr(rng, names, depth + 1))
    return Unary("neg", random_linear_expr(rng, names, depth + 1))


def random_atom(rng: random.Random, names):
    op = rng.choice(["==", "!=", "<", "<=", ">", ">="])
    return Binary(op, random_linear_expr(rng, names),
                  random_linear_expr(rng, names))


def random_segment(rng: random.Random, names, max_len=5, allow_inputs=True):
    stmts = []
    for _ in range(rng.randint(1, max_len)):
        kind = rng.randrange(10)
        if kind < 6:
            value = random_linear_expr(rng, names)
            if allow_inputs and rng.randrange(8) == 0:
                value = Binary("+", value, Nondet())
            stmts.append(Assign(rng.choice(names), value))
        elif kind < 8:
            stmts.append(Assume(random_atom(rng, names)))
        elif allow_inputs and kind == 8:
            stmts.append(Havoc(rng.choice(names)))
        else:
            stmts.append(Assert(random_atom(rng, names)))
    return tuple(stmts)


def count_inputs(stmts):
    n = 0
    for s in stmts:
        if isinstance(s, Havoc):
            n += 1
        elif isinstance(s, Assign):
            stack = [s.value]
            while stack:
                e = stack.pop()
                if isinstance(e, Nondet):
                    n += 1
                elif isinstance(e, Unary):
                    stack.append(e.operand)
                elif isinstance(e, Binary):
                    stack += [e.left, e.right]
    return n


# --- bounded whole-program soundness oracle ----------------------------------


def bounded_soundness_violations(program, invariants, values, step_cap=10_000,
                                 nondet_values=(0, 1, -1, 2)):
    """Check inferred invariants against bounded concrete execution.

    Runs the program from every initial state in values^#vars that meets
    the precondition; the invariant of each loop must hold at every visit
    to its head, and every postcondition must hold at normal exit.
    Returns a list of violation descriptions (empty = sound).
    """
    violations = []
    decls = list(program.decls)
    pre = program.precondition
    for combo in itertools.product(values, repeat=len(decls)):
        env = dict(zip(decls, combo))
        if pre is not None and not eval_pred(pre, env):
            continue
        from pathinv.interp import run_program
        res = run_program(program.body, env,
                          nondet_values=itertools.cycle(nondet_values),
                          step_cap=step_cap)
        if res.rejected or res.exhausted:
            continue
        for lid, inv in invariants.items():
            for state in res.head_states.get(lid, ()):
                if not eval_pred(inv, state):
                    violations.append((dict(env), "invariant", lid, state))
        for q in program.postconditions:
            if not eval_pred(q, res.env):
                violations.append((dict(env), "post", None, dict(res.env)))
    return violations


# --- region decomposition oracle ---------------------------------------------


def region_census(program):
    """Brute-force census of control regions straight off the AST:
    one top-level region, one per loop, two per branch (the independent
    check for path enumeration's union semantics)."""
    from pathinv.frontend.ast_nodes import If, While, walk_stmts

    loops = 0
    branches = 0
    for s in walk_stmts(program.body):
        if isinstance(s, While):
            loops += 1
        elif isinstance(s, If):
            branches += 1
    return {"segments": 1 + loops + 2 * branches,
            "loops": loops, "branches": branches}


def expected_segments(program):
    """Region segments derived straight from the AST by brute-force DFS,
    bypassing the CFG entirely. Each segment is keyed by
    (region key, assumed-guard strings, backbone stmt reprs, depth, pos)."""
    from pathinv.frontend.ast_nodes import If, While
    from pathinv.frontend.printer import expr_to_str
    from pathinv.logic import negate_expr

    out = set()

    def walk(body, key, depth, assumed, pos):
        backbone = tuple(repr(s) for s in body if not isinstance(s, (If, While)))
        out.add((key, tuple(expr_to_str(a) for a in assumed), backbone, depth, pos))
        for s in body:
            if isinstance(s, While):
                walk(s.body, ("loop", s.loop_id), depth + 1,
                     assumed + (s.cond,), s.pos.line)
            elif isinstance(s, If):
                walk(s.then, ("arm", True, s.pos.line), depth + 1,
                     assumed + (s.cond,), s.pos.line)
                walk(s.orelse, ("arm", False, s.pos.line), depth + 1,
                     assumed + (negate_expr(s.cond),), s.pos.line)

    walk(program.body, ("top",), 0, (), 0)
    return out


def segment_key(seg):
    """Key a PathSegment the same way expected_segments keys regions."""
    from pathinv.frontend.printer import expr_to_str
    from pathinv.paths import BranchArm, Loop, TopLevel

    r = seg.region
    if isinstance(r, TopLevel):
        key = ("top",)
    elif isinstance(r, Loop):
        key = ("loop", r.loop_id)
    else:
        assert isinstance(r, BranchArm)
        key = ("arm", r.polarity, seg.pos)
    return (key, tuple(expr_to_str(a) for a in seg.assumed),
            tuple(repr(s) for s in seg.stmts), seg.depth, seg.pos)


def backbone_stmts(body):
    """Straight-line statements of one region, compounds excluded."""
    from pathinv.frontend.ast_nodes import If, While

    return tuple(s for s in body if not isinstance(s, (If, While)))
