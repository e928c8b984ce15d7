"""Hierarchical summarization, the final whole-program pass, and reports."""

import json

import jsonschema
import pytest

from pathinv.candidates import GeneratorBudget, LlmConfig
from pathinv.cfg import build_cfg
from pathinv.errors import SummarizationFailed
from pathinv.frontend.parser import parse_expr_text, parse_program
from pathinv.logic import P_TRUE, implies, pred
from pathinv.paths import BranchArm, Loop, find_all_paths
from pathinv.summarize import (
    Summary,
    compute_invariant,
    _segment_summary,
    final_check,
    hierarch_summarize,
    make_context,
    run_pipeline,
)

from conftest import CORPUS, REPO, load


def P(text):
    return pred(parse_expr_text(text))


def paths_and_ctx(p, text=None):
    return find_all_paths(build_cfg(p)), make_context(p, text)


def summarize(p, solver, **kw):
    ps, ctx = paths_and_ctx(p)
    return hierarch_summarize(ps, ctx, solver=solver, **kw)


# --- segment summaries ----------------------------------------------------------


def test_compute_invariant_exact_sp():
    p = parse_program("int x; x = x + 1;")
    ps, _ = paths_and_ctx(p)
    inv = compute_invariant(ps.segments[0], P("x == 0"))
    assert str(inv) == "x$0 == 0 && x == x$0 + 1"


def test_segment_summary_keeps_only_skolem_free_conjuncts():
    p = parse_program("int x, n; assume(n >= 3); x = x + 1;")
    ps, _ = paths_and_ctx(p)
    inv = _segment_summary(ps.segments[0], P_TRUE)
    # x == x$0 + 1 mentions a skolem and is dropped; n >= 3 survives
    assert str(inv) == "n >= 3"


# --- traversal -------------------------------------------------------------------


def test_summarize_single_loop(solver):
    p, _ = load(CORPUS / "count_up.mc")
    ctx = summarize(p, solver)
    inv = ctx.loop_summaries()[0]
    assert solver.check(implies(inv, P("x <= n")).script).is_unsat
    # after the loop: invariant and negated guard travel in pre_cond
    assert solver.check(implies(ctx.pre_cond, P("x >= n")).script).is_unsat
    assert ctx.gaps == []
    summary = ctx.summaries[Loop(0)]
    assert summary.verdict.is_valid and summary.origin == "combinor"


def test_summarize_nested_loops_inner_first(solver):
    p, _ = load(CORPUS / "nested_loop.mc")
    ctx = summarize(p, solver)
    assert set(ctx.loop_summaries()) == {0, 1}
    inner = ctx.loop_summaries()[1]
    assert solver.check(implies(inner, P("j <= n")).script).is_unsat


def test_summarize_branch_arms_disjoined(solver):
    p, _ = load(CORPUS / "branch_before_loop.mc")
    ctx = summarize(p, solver)
    arms = [r for r in ctx.summaries if isinstance(r, BranchArm)]
    assert len(arms) == 2
    assert all(ctx.summaries[r].origin == "sp" for r in arms)
    # both arms set s; their disjunction reaches the accumulated context
    assert solver.check(implies(ctx.pre_cond, P("s >= 0 && s <= 1")).script).is_unsat


def test_summarize_exhausted_records_gap(solver):
    # max_rounds=0 disables generation, forcing the exhausted path
    p, _ = load(CORPUS / "count_up.mc")
    ctx = summarize(p, solver, budget=GeneratorBudget(max_rounds=0))
    assert ctx.gaps == [Loop(0)]
    assert ctx.loop_summaries()[0] == P_TRUE


def test_summarize_strict_raises(solver):
    p, _ = load(CORPUS / "count_up.mc")
    with pytest.raises(SummarizationFailed):
        summarize(p, solver, budget=GeneratorBudget(max_rounds=0), strict=True)


# --- final check -------------------------------------------------------------------


def test_final_check_valid(solver):
    p, _ = load(CORPUS / "count_up.mc")
    ctx = summarize(p, solver)
    report = final_check(p, ctx, solver=solver, program_name="count_up")
    assert report.status == "valid"
    (lr,) = report.loops
    assert lr.loop_id == 0 and lr.status == "valid"
    assert report.smt_queries > 0


def test_final_check_refines_weak_summary(solver):
    p, _ = load(CORPUS / "count_up.mc")
    ctx = make_context(p)  # no summarization: summary defaults to true
    report = final_check(p, ctx, solver=solver)
    assert report.status == "valid"
    (lr,) = report.loops
    assert lr.rounds > 0  # refinement actually ran
    assert solver.check(
        implies(P(lr.invariant), P("x <= n")).script).is_unsat


def test_final_check_failure_reports_counterexamples(solver):
    p, _ = load(CORPUS / "triple_step.mc")
    ctx = make_context(p)
    report = final_check(p, ctx, solver=solver,
                         budget=GeneratorBudget(max_candidates=20))
    assert report.status == "failed"
    (lr,) = report.loops
    assert lr.status in ("init_fail", "preserve_fail", "term_fail")
    assert lr.counterexamples
    ce = lr.counterexamples[0]
    assert ce["kind"] in ("init", "preserve", "term")
    assert all(isinstance(v, int) for v in ce["state"].values())


def test_final_check_loopless_programs(solver):
    valid = parse_program("//@ post: y == 1\nint y; y = 1;")
    failed = parse_program("//@ post: y == 2\nint y; y = 1;")
    silent = parse_program("int y; y = 1;")
    for p, want in ((valid, "valid"), (failed, "failed"), (silent, "no_obligations")):
        report = final_check(p, make_context(p), solver=solver)
        assert report.status == want
        assert report.loops == []


# --- full pipeline -------------------------------------------------------------------


def test_run_pipeline_report_matches_schema(solver):
    schema = json.loads((REPO / "docs" / "report.schema.json").read_text())
    p, text = load(CORPUS / "branch_in_loop.mc")
    ctx, report = run_pipeline(p, text, solver=solver, program_name="branch_in_loop")
    d = report.to_dict()
    jsonschema.validate(d, schema)
    assert d["totals"]["status"] == "valid"
    assert d["totals"]["smt_queries"] >= sum(l["smt_queries"] for l in d["loops"])


def test_run_pipeline_deterministic_modulo_time(fresh_solver, solver):
    p, text = load(CORPUS / "two_loops.mc")
    _, r1 = run_pipeline(p, text, solver=solver)
    _, r2 = run_pipeline(p, text, solver=fresh_solver)

    def strip(d):
        d = dict(d)
        d["totals"] = {k: (0 if k == "time_ms" else v)
                       for k, v in d["totals"].items()}
        d["loops"] = [{**l, "time_ms": 0} for l in d["loops"]]
        return d

    assert strip(r1.to_dict()) == strip(r2.to_dict())


def test_pipeline_hybrid_skips_model_when_not_needed(solver):
    # hybrid summarization infers without exit obligations (strongest
    # template conjunction) and the final check accepts it, so the
    # transcript is never consulted: a bogus endpoint must not be touched
    p, text = load(CORPUS / "count_up.mc")
    llm = LlmConfig(endpoint="mock:/nonexistent/transcripts.json")
    ctx, report = run_pipeline(p, text, gen_mode="hybrid", solver=solver, llm=llm)
    assert report.status == "valid"
