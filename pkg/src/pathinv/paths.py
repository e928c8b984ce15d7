"""Execution-path enumeration over the CFG.

Each control region (top level, loop body, branch arm) contributes one
straight-line backbone segment; compound statements inside a region
recurse into their own regions. Region-local path sets are unioned, not
crossed, so segment counts grow additively per region.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .cfg import Basic, Branch, Cfg, Entry, Exit, LoopHeader, branch_sub_cfgs, extract_loop_cfg
from .frontend.ast_nodes import Expr, Stmt
from .logic import negate_expr


@dataclass(frozen=True)
class TopLevel:
    pass


@dataclass(frozen=True)
class Loop:
    loop_id: int


@dataclass(frozen=True)
class BranchArm:
    branch_id: int  # node id in the originally built CFG
    polarity: bool


@dataclass(frozen=True)
class PathSegment:
    region: object
    assumed: tuple[Expr, ...]
    stmts: tuple[Stmt, ...]
    depth: int
    pos: int = 0  # source line of the introducing statement (0 = top level)


@dataclass(frozen=True)
class PathSet:
    segments: tuple[PathSegment, ...]
    context: tuple[Stmt, ...]


def _orig_id(g: Cfg, nid: int) -> int:
    return g.orig_ids.get(nid, nid) if g.orig_ids else nid


def _walk(g: Cfg, region, depth: int, assumed: tuple[Expr, ...], pos: int):
    """Collect this region's backbone plus nested segments."""
    backbone: list[Stmt] = []
    nested: list[PathSegment] = []
    node = g.node(g.entry)
    while True:
        kind = node.kind
        if isinstance(kind, Exit):
            break
        if isinstance(kind, Entry):
            node = g.node(node.successors[0])
        elif isinstance(kind, Basic):
            backbone.extend(kind.stmts)
            node = g.node(node.successors[0])
        elif isinstance(kind, LoopHeader):
            sub = extract_loop_cfg(g, node.id)
            nested.extend(_walk(
                sub, Loop(kind.loop_id), depth + 1,
                assumed + (kind.cond,), kind.pos.line,
            ))
            node = g.node(node.successors[1])  # resume past the loop
        elif isinstance(kind, Branch):
            true_cfg, false_cfg = branch_sub_cfgs(g, node.id)
            bid = _orig_id(g, node.id)
            nested.extend(_walk(
                true_cfg, BranchArm(bid, True), depth + 1,
                assumed + (kind.cond,), kind.pos.line,
            ))
            nested.extend(_walk(
                false_cfg, BranchArm(bid, False), depth + 1,
                assumed + (negate_expr(kind.cond),), kind.pos.line,
            ))
            node = g.node(g.branch_joins[node.id])  # resume at the join
        else:
            raise AssertionError(f"unexpected node kind {kind!r}")
    own = PathSegment(region, assumed, tuple(backbone), depth, pos)
    return [own] + nested


def find_all_paths(g: Cfg) -> PathSet:
    segments = _walk(g, TopLevel(), 0, (), 0)
    top = segments[0]
    ordered = order_by_priority(PathSet(tuple(segments), top.stmts))
    return ordered


def order_by_priority(ps: PathSet) -> PathSet:
    """Innermost regions first, earlier source positions first; stable."""
    ordered = sorted(ps.segments, key=lambda s: (-s.depth, s.pos))
    return replace(ps, segments=tuple(ordered))
