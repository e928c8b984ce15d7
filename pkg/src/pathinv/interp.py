"""Concrete interpreter for MiniC.

Used as the ground-truth oracle: bounded whole-program execution for
soundness checks, straight-line execution for counterexample replay, and
predicate evaluation for candidate filtering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PathinvError
from .frontend.ast_nodes import (
    Assert,
    Assign,
    Assume,
    Binary,
    Expr,
    Havoc,
    If,
    IntLit,
    Nondet,
    Unary,
    Var,
    While,
)


class EvalError(PathinvError):
    pass


def eval_expr(e: Expr, env: dict, nondet=None):
    """Evaluate an expression in env. `nondet` supplies values for nondet()."""
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Var):
        if e.name not in env:
            raise EvalError(f"unbound variable {e.name}")
        return env[e.name]
    if isinstance(e, Nondet):
        if nondet is None:
            raise EvalError("nondet() has no value source here")
        return nondet()
    if isinstance(e, Unary):
        v = eval_expr(e.operand, env, nondet)
        return -v if e.op == "neg" else not v
    if isinstance(e, Binary):
        if e.op == "and":
            return bool(eval_expr(e.left, env, nondet)) and bool(eval_expr(e.right, env, nondet))
        if e.op == "or":
            return bool(eval_expr(e.left, env, nondet)) or bool(eval_expr(e.right, env, nondet))
        a = eval_expr(e.left, env, nondet)
        b = eval_expr(e.right, env, nondet)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "==":
            return a == b
        if e.op == "!=":
            return a != b
        if e.op == "<":
            return a < b
        if e.op == "<=":
            return a <= b
        if e.op == ">":
            return a > b
        if e.op == ">=":
            return a >= b
    raise EvalError(f"cannot evaluate {e!r}")


def eval_pred(e: Expr, env: dict) -> bool:
    return bool(eval_expr(e, env))


@dataclass
class RunResult:
    """Outcome of one bounded whole-program run."""
    env: dict
    head_states: dict = field(default_factory=dict)  # loop_id -> list of env snapshots
    assert_failures: list = field(default_factory=list)  # (Assert, env snapshot)
    rejected: bool = False   # an assume was violated
    exhausted: bool = False  # step cap hit
    steps: int = 0


def _feed_from(values):
    it = iter(values)

    def feed():
        try:
            return next(it)
        except StopIteration:
            raise EvalError("nondet feed exhausted")
    return feed


def exec_straight_line(stmts, env: dict, havoc_values=()):
    """Execute straight-line stmts (no If/While).

    Returns (env', ok) where ok is False if an assume failed. Havoc targets
    and embedded nondet() consume `havoc_values` in order. Asserts are not
    checked here (they are proof obligations, not runtime traps).
    """
    env = dict(env)
    feed = _feed_from(havoc_values)
    for s in stmts:
        if isinstance(s, Assign):
            env[s.target] = eval_expr(s.value, env, feed)
        elif isinstance(s, Havoc):
            env[s.target] = feed()
        elif isinstance(s, Assume):
            if not eval_pred(s.cond, env):
                return env, False
        elif isinstance(s, Assert):
            pass
        else:
            raise EvalError(f"compound statement in straight-line execution: {s!r}")
    return env, True


def run_program(program_body, init_env: dict, nondet_values=(), step_cap: int = 10_000,
                record_heads: bool = True) -> RunResult:
    """Bounded execution of a full statement list from a concrete state."""
    res = RunResult(env=dict(init_env))
    feed = _feed_from(nondet_values)

    def run(stmts) -> bool:
        for s in stmts:
            res.steps += 1
            if res.steps > step_cap:
                res.exhausted = True
                return False
            if isinstance(s, Assign):
                res.env[s.target] = eval_expr(s.value, res.env, feed)
            elif isinstance(s, Havoc):
                res.env[s.target] = feed()
            elif isinstance(s, Assume):
                if not eval_pred(s.cond, res.env):
                    res.rejected = True
                    return False
            elif isinstance(s, Assert):
                if not eval_pred(s.cond, res.env):
                    res.assert_failures.append((s, dict(res.env)))
            elif isinstance(s, If):
                branch = s.then if eval_pred(s.cond, res.env) else s.orelse
                if not run(branch):
                    return False
            elif isinstance(s, While):
                while True:
                    if record_heads:
                        res.head_states.setdefault(s.loop_id, []).append(dict(res.env))
                    res.steps += 1
                    if res.steps > step_cap:
                        res.exhausted = True
                        return False
                    if not eval_pred(s.cond, res.env):
                        break
                    if not run(s.body):
                        return False
            else:
                raise EvalError(f"cannot execute {s!r}")
        return True

    run(program_body)
    return res
