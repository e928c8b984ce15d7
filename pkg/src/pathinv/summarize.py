"""Hierarchical path summarization and the whole-program invariant pass.

Regions are processed innermost-first: each loop is replaced by a verified
invariant, each branch by the disjunction of its arms' exact postconditions,
and plain segments by their strongest postcondition. The accumulated
precondition travels through the traversal as generation context. A final
pass re-checks every loop summary against the full program (with real exit
obligations) and refines the ones that are too weak.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace as d_replace

from .cfg import build_cfg
from .errors import SummarizationFailed
from .frontend.ast_nodes import Program, While, walk_stmts
from .frontend.printer import expr_to_str, pretty_print
from .hoare import (
    HoareProblem,
    Verdict,
    build_problem,
    check_invariant,
)
from .candidates import (
    GeneratorBudget,
    InferResult,
    LlmConfig,
    PromptContext,
    infer_invariant,
    sample_head_states,
)
from .logic import (
    FreshNames,
    P_TRUE,
    Predicate,
    pred,
    pred_and,
    pred_not,
    pred_or,
    implies,
    strongest_post_traced,
)
from .paths import BranchArm, Loop, PathSegment, PathSet, TopLevel, find_all_paths
from .smt import Solver, discover_solver


@dataclass
class Context:
    """Mutable traversal state for one program's summarization."""
    program: Program
    program_text: str
    pre_cond: Predicate = P_TRUE
    loop_stack: list = field(default_factory=list)
    branch_stack: list = field(default_factory=list)
    summaries: dict = field(default_factory=dict)   # region -> Summary
    gaps: list = field(default_factory=list)        # regions left at `true`

    def loop_summaries(self) -> dict[int, Predicate]:
        return {r.loop_id: s.predicate for r, s in self.summaries.items()
                if isinstance(r, Loop)}


@dataclass(frozen=True)
class Summary:
    region: object
    predicate: Predicate
    verdict: Verdict | None    # Valid for loops; None for sp-derived regions
    origin: str                # combinor | llm | sp


def make_context(p: Program, program_text: str | None = None) -> Context:
    pre = pred(p.precondition) if p.precondition is not None else P_TRUE
    return Context(p, program_text if program_text is not None else pretty_print(p),
                   pre_cond=pre)


def compute_invariant(segment: PathSegment, pre: Predicate) -> Predicate:
    """Exact summary of a straight-line segment under its assumptions."""
    base = pred_and(pre, *(pred(a) for a in segment.assumed))
    return strongest_post_traced(base, segment.stmts, FreshNames()).predicate


def _skolem_free(p: Predicate, conjuncts) -> Predicate:
    kept = [c for c in conjuncts
            if all("$" not in v for v in pred(c).free_vars)]
    return pred_and(*(pred(c) for c in kept)) if kept else P_TRUE


def _segment_summary(segment: PathSegment, pre: Predicate) -> Predicate:
    """Skolem-free part of the segment's sp, suitable for accumulation."""
    base = pred_and(pre, *(pred(a) for a in segment.assumed))
    res = strongest_post_traced(base, segment.stmts, FreshNames())
    return _skolem_free(res.predicate, res.conjuncts)


def _prompt_ctx(hp: HoareProblem, ctx: Context, template: str) -> PromptContext:
    summaries = "\n".join(
        f"- loop {r.loop_id}: {s.predicate}" for r, s in ctx.summaries.items()
        if isinstance(r, Loop)) or "(none)"
    post = " && ".join(str(ob.formula) for ob in hp.obligations)
    return PromptContext(
        program=ctx.program_text,
        pre=str(hp.pre),
        guard=str(hp.guard),
        post=post,
        summaries=summaries,
        template=template,
    )


def hierarch_summarize(ps: PathSet, ctx: Context, gen_mode: str = "combinor",
                       budget: GeneratorBudget | None = None,
                       solver: Solver | None = None,
                       llm: LlmConfig | None = None,
                       strict: bool = False,
                       use_ce_filter: bool = True) -> Context:
    """Inner-first traversal of the ordered PathSet.

    Loops get inferred invariants (without exit obligations at this stage:
    those are settled by final_check once every loop has a summary);
    branch arms and plain segments get exact sp summaries.
    """
    budget = budget or GeneratorBudget()
    solver = solver or Solver(discover_solver())
    arm_cache: dict = {}

    for segment in ps.segments:
        region = segment.region
        if isinstance(region, Loop):
            ctx.loop_stack.append(region.loop_id)
            try:
                hp = build_problem(ctx.program, region.loop_id,
                                   ctx.loop_summaries(), with_obligations=False)
                hp = d_replace(hp, head_samples=sample_head_states(
                    ctx.program, region.loop_id))
                res = infer_invariant(
                    hp, gen_mode, budget, solver, llm,
                    _prompt_ctx(hp, ctx, "invariant") if gen_mode != "combinor" else None,
                    use_ce_filter=use_ce_filter)
                if res.found:
                    inv = res.candidate.formula
                    ctx.summaries[region] = Summary(region, inv, res.verdict,
                                                    res.candidate.origin)
                    ctx.pre_cond = pred_and(ctx.pre_cond, inv,
                                            pred_not(hp.guard))
                else:
                    if strict:
                        raise SummarizationFailed(region)
                    ctx.summaries[region] = Summary(region, P_TRUE, None, gen_mode)
                    ctx.gaps.append(region)
            finally:
                ctx.loop_stack.pop()
        elif isinstance(region, BranchArm):
            ctx.branch_stack.append(region.branch_id)
            try:
                arm_inv = _segment_summary(segment, ctx.pre_cond)
                ctx.summaries[region] = Summary(region, arm_inv, None, "sp")
                other = arm_cache.pop((region.branch_id, not region.polarity), None)
                if other is None:
                    arm_cache[(region.branch_id, region.polarity)] = arm_inv
                else:
                    true_inv, false_inv = (arm_inv, other) if region.polarity \
                        else (other, arm_inv)
                    ctx.pre_cond = pred_and(ctx.pre_cond,
                                            pred_or(true_inv, false_inv))
            finally:
                ctx.branch_stack.pop()
        else:  # TopLevel backbone
            ctx.pre_cond = pred_and(
                ctx.pre_cond,
                _segment_summary(d_replace(segment, assumed=()), P_TRUE))

    assert not ctx.loop_stack and not ctx.branch_stack
    return ctx


# --- final whole-program pass ----------------------------------------------


@dataclass
class LoopReport:
    loop_id: int
    invariant: str
    status: str
    rounds: int = 0
    smt_queries: int = 0
    time_ms: int = 0
    counterexamples: list = field(default_factory=list)
    origin: str = "combinor"


@dataclass
class Report:
    program: str
    loops: list[LoopReport] = field(default_factory=list)
    mode: str = "combinor"
    solver: str = "bundled"
    status: str = "valid"          # valid | failed | no_obligations
    smt_queries: int = 0
    time_ms: int = 0

    def to_dict(self) -> dict:
        return {
            "program": self.program,
            "loops": [{
                "loop_id": lr.loop_id,
                "invariant": lr.invariant,
                "status": lr.status,
                "rounds": lr.rounds,
                "smt_queries": lr.smt_queries,
                "time_ms": lr.time_ms,
                "counterexamples": lr.counterexamples,
                "origin": lr.origin,
            } for lr in self.loops],
            "mode": self.mode,
            "solver": self.solver,
            "totals": {
                "status": self.status,
                "smt_queries": self.smt_queries,
                "time_ms": self.time_ms,
            },
        }


def _render_ces(ces) -> list:
    out = []
    for ce in ces:
        out.append({
            "kind": ce.kind,
            "state": dict(sorted(ce.state.items())),
            "post_state": dict(sorted(ce.post_state.items())) if ce.post_state else None,
        })
    return out


def _check_loopless(p: Program, solver: Solver) -> str:
    """Zero-loop program: asserts and posts follow (or not) from exact sp."""
    from .hoare import build_loopless_obligations

    ok = True
    any_ob = False
    for antecedent, consequent in build_loopless_obligations(p):
        any_ob = True
        res = solver.check(implies(antecedent, consequent).script)
        if not res.is_unsat:
            ok = False
    if not any_ob:
        return "no_obligations"
    return "valid" if ok else "failed"


def final_check(p: Program, ctx: Context, gen_mode: str = "combinor",
                budget: GeneratorBudget | None = None,
                solver: Solver | None = None,
                llm: LlmConfig | None = None,
                program_name: str = "program",
                use_ce_filter: bool = True) -> Report:
    """Re-check each loop summary against the full program and refine the
    ones that fail; the Report carries the outcome per loop."""
    budget = budget or GeneratorBudget()
    solver = solver or Solver(discover_solver())
    t_start = time.monotonic()
    start_queries = solver.query_count
    report = Report(program_name, mode=gen_mode, solver=solver.config.name)

    loops = [s for s in walk_stmts(p.body) if isinstance(s, While)]
    if not loops:
        report.status = _check_loopless(p, solver)
        report.smt_queries = solver.query_count - start_queries
        report.time_ms = int((time.monotonic() - t_start) * 1000)
        return report

    summaries = ctx.loop_summaries()
    all_ok = True
    for w in loops:
        lid = w.loop_id
        t0 = time.monotonic()
        q0 = solver.query_count
        inv = summaries.get(lid, P_TRUE)
        origin = next((s.origin for r, s in ctx.summaries.items()
                       if isinstance(r, Loop) and r.loop_id == lid), gen_mode)
        lr = LoopReport(lid, str(inv), "valid", origin=origin)
        hp = build_problem(p, lid, summaries)
        hp = d_replace(hp, head_samples=sample_head_states(p, lid))
        v = check_invariant(hp, inv, solver)
        if not v.is_valid:
            if v.counterexample is not None:
                lr.counterexamples = _render_ces([v.counterexample])
            res = infer_invariant(
                hp, gen_mode, budget, solver, llm,
                _prompt_ctx(hp, ctx, "refine") if gen_mode != "combinor" else None,
                use_ce_filter=use_ce_filter)
            lr.rounds = res.rounds
            lr.counterexamples = _render_ces(res.ce_set)
            if res.found:
                inv = res.candidate.formula
                summaries[lid] = inv
                lr.invariant = str(inv)
                lr.origin = res.candidate.origin
            else:
                lr.status = v.status
                all_ok = False
        lr.smt_queries = solver.query_count - q0
        lr.time_ms = int((time.monotonic() - t0) * 1000)
        report.loops.append(lr)

    report.status = "valid" if all_ok else "failed"
    report.smt_queries = solver.query_count - start_queries
    report.time_ms = int((time.monotonic() - t_start) * 1000)
    return report


def run_pipeline(p: Program, program_text: str | None = None,
                 gen_mode: str = "combinor",
                 budget: GeneratorBudget | None = None,
                 solver: Solver | None = None,
                 llm: LlmConfig | None = None,
                 program_name: str = "program",
                 use_ce_filter: bool = True) -> tuple[Context, Report]:
    """Full path: CFG, path enumeration, summarization, final check."""
    solver = solver or Solver(discover_solver())
    q0 = solver.query_count
    t0 = time.monotonic()
    ps = find_all_paths(build_cfg(p))
    ctx = make_context(p, program_text)
    hierarch_summarize(ps, ctx, gen_mode, budget, solver, llm,
                       use_ce_filter=use_ce_filter)
    report = final_check(p, ctx, gen_mode, budget, solver, llm, program_name,
                         use_ce_filter=use_ce_filter)
    report.smt_queries = solver.query_count - q0
    report.time_ms = int((time.monotonic() - t0) * 1000)
    return ctx, report
