"""Hoare while-rule checks, counterexample replay, problem construction."""

import stat

import pytest

from pathinv.errors import MissingSummaryError
from pathinv.frontend.ast_nodes import Assume, Havoc, loops_of
from pathinv.frontend.parser import parse_expr_text, parse_program
from pathinv.hoare import (
    INCONCLUSIVE,
    INIT_FAIL,
    PRESERVE_FAIL,
    TERM_FAIL,
    VALID,
    build_loopless_obligations,
    build_problem,
    check_invariant,
    check_termination_cond,
    expand_body_paths,
)
from pathinv.interp import eval_pred
from pathinv.logic import P_TRUE, pred
from pathinv.smt import Solver, SolverConfig

from conftest import CORPUS, load


def P(text):
    return pred(parse_expr_text(text))


def problem(name, loop_id=0, summaries=None, **kw):
    p, _ = load(CORPUS / f"{name}.mc")
    summaries = {k: P(v) for k, v in (summaries or {}).items()}
    return p, build_problem(p, loop_id, summaries, **kw)


# --- the three checks ---------------------------------------------------------


def test_gold_invariant_valid(solver):
    p, hp = problem("count_up")
    v = check_invariant(hp, pred(p.gold_invariant(0)), solver)
    assert v.is_valid and v.counterexample is None


def test_init_failure_replayable(solver):
    p, hp = problem("count_up")
    v = check_invariant(hp, P("x < n"), solver)  # fails when n == 0
    assert v.status == INIT_FAIL
    ce = v.counterexample
    assert ce.kind == "init"
    # the state genuinely reaches the loop head but falsifies I
    assert eval_pred(parse_expr_text("n >= 0"), ce.state)
    assert not eval_pred(parse_expr_text("x < n"), {**ce.state, "x": 0})


def test_preserve_failure_replayable(solver):
    p, hp = problem("count_up")
    v = check_invariant(hp, P("x <= n && x != 1"), solver)
    assert v.status == PRESERVE_FAIL
    ce = v.counterexample
    inv = parse_expr_text("x <= n && x != 1")
    assert eval_pred(inv, ce.state)                    # I held before
    assert eval_pred(parse_expr_text("x < n"), ce.state)  # guard held
    assert not eval_pred(inv, ce.post_state)           # one iteration broke it
    assert ce.post_state["x"] == ce.state["x"] + 1     # concrete replay


def test_term_failure_replayable(solver):
    p, hp = problem("count_up")
    v = check_invariant(hp, P("x <= n + 1"), solver)  # too weak for x == n
    assert v.status == TERM_FAIL
    ce = v.counterexample
    assert ce.kind == "term"
    assert not eval_pred(parse_expr_text("x == n"), ce.post_state)


def test_check_order_init_wins(solver):
    # false is inductive and implies everything except initialization
    p, hp = problem("count_up")
    v = check_invariant(hp, P("x == 1 && x == 2"), solver)
    assert v.status == INIT_FAIL


def test_check_termination_cond(solver):
    v = check_termination_cond(P("x <= n"), P("x < n"), P("x == n"), solver)
    assert v.is_valid
    v = check_termination_cond(P("x <= n"), P("x < n"), P("x == n + 1"), solver)
    assert v.status == TERM_FAIL


def test_inconclusive_on_unknown_solver(tmp_path):
    exe = tmp_path / "unknown-solver"
    exe.write_text("#!/bin/sh\ncat > /dev/null; echo unknown\n")
    exe.chmod(exe.stat().st_mode | stat.S_IXUSR)
    s = Solver(SolverConfig(str(exe)))
    p, hp = problem("count_up")
    v = check_invariant(hp, P("x <= n"), s)
    assert v.status == INCONCLUSIVE and "unknown" in v.reason


# --- body-path expansion --------------------------------------------------------


def test_expand_body_paths_branch_cross_product():
    p = parse_program("""
    int a, b;
    while (a < 4) {
      if (a > 0) { b = 1; } else { b = 2; }
      if (b > 1) { a = a + 1; } else { a = a + 2; }
    }
    """)
    paths = expand_body_paths(loops_of(p)[0].body, {})
    assert len(paths) == 4
    assumed = {tuple(map(str, bp.assumed)) for bp in paths}
    assert len(assumed) == 4
    assert all(len(bp.stmts) == 2 for bp in paths)


def test_expand_body_paths_inner_loop_needs_summary():
    p = parse_program(
        "int i, j; while (i < 2) { while (j < 2) { j = j + 1; } i = i + 1; }")
    body = loops_of(p)[0].body
    with pytest.raises(MissingSummaryError):
        expand_body_paths(body, {})
    paths = expand_body_paths(body, {1: P("j <= 2")})
    (bp,) = paths
    assert isinstance(bp.stmts[0], Havoc) and bp.stmts[0].target == "j"
    assert isinstance(bp.stmts[1], Assume)
    # inner summary conjoined with the negated inner guard
    assert eval_pred(bp.stmts[1].cond, {"j": 2})
    assert not eval_pred(bp.stmts[1].cond, {"j": 1})


# --- problem construction ---------------------------------------------------------


def test_build_problem_reaching_prefix(solver):
    p, hp = problem("count_up")
    # pre is the loop-head state: n >= 0 carried plus x == 0 from the prefix
    from pathinv.logic import implies
    assert solver.check(implies(hp.pre, P("x == 0 && n >= 0")).script).is_unsat
    assert str(hp.guard) == "x < n"
    assert len(hp.obligations) == 1 and hp.obligations[0].cut == 0


def test_build_problem_second_loop_uses_first_summary(solver):
    p, hp = problem("two_loops", loop_id=1, summaries={0: "x <= n"})
    from pathinv.logic import implies
    # loop 0's summary and exit condition reach loop 1's head
    assert solver.check(implies(hp.pre, P("x == n && y == 0")).script).is_unsat
    v = check_invariant(hp, pred(p.gold_invariant(1)), solver)
    assert v.is_valid


def test_build_problem_nested_loop_has_no_obligations():
    p, hp = problem("nested_loop", loop_id=1)
    assert hp.obligations == () and hp.suffix == ()
    # enclosing context is still visible: outer guard assumed on the way in
    assert "i" in hp.pre.free_vars


def test_build_problem_without_obligations():
    p, hp = problem("count_up", with_obligations=False)
    assert hp.trivially_post and hp.suffix == ()


def test_build_problem_branch_in_body_paths():
    p, hp = problem("havoc_input")
    assert len(hp.body_paths) == 2


def test_build_loopless_obligations(solver):
    from pathinv.logic import implies
    p = parse_program("""
    //@ post: y >= 1
    int x, y;
    if (x > 0) { y = x; } else { y = 1 - x; }
    assert(y >= 0);
    """)
    obs = build_loopless_obligations(p)
    # one assert and one post, per branch-resolved path
    assert len(obs) == 4
    for ante, ob in obs:
        assert solver.check(implies(ante, ob).script).is_unsat
