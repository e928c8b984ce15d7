"""CFG construction, region extraction, DOT output."""

import pytest

from pathinv.cfg import (
    Basic,
    Branch,
    Entry,
    Exit,
    LoopHeader,
    branch_sub_cfgs,
    build_cfg,
    extract_loop_cfg,
    to_dot,
)
from pathinv.errors import NotABranchError, NotALoopHeaderError
from pathinv.frontend.parser import parse_program


def kinds(g):
    return [type(n.kind).__name__ for n in g.nodes]


def test_straight_line_merges_into_one_basic():
    g = build_cfg(parse_program("int x; x = 0; x = x + 1; assume(x > 0);"))
    assert kinds(g) == ["Entry", "Basic", "Exit"]
    assert len(g.node(1).kind.stmts) == 3


def test_branch_shape_and_join():
    g = build_cfg(parse_program(
        "int x; if (x > 0) { x = 1; } else { x = 2; } x = x + 1;"))
    branch = next(n for n in g.nodes if isinstance(n.kind, Branch))
    assert len(branch.successors) == 2
    join = g.branch_joins[branch.id]
    # both arms rejoin
    t, f = branch.successors
    assert g.node(t).successors == (join,)
    assert g.node(f).successors == (join,)


def test_empty_else_arm_links_directly_to_join():
    g = build_cfg(parse_program("int x; if (x > 0) { x = 1; }"))
    branch = next(n for n in g.nodes if isinstance(n.kind, Branch))
    join = g.branch_joins[branch.id]
    assert branch.successors[1] == join


def test_loop_shape_back_edge_and_region():
    g = build_cfg(parse_program("int x; while (x < 3) { x = x + 1; } x = 0;"))
    header = next(n for n in g.nodes if isinstance(n.kind, LoopHeader))
    region = g.loop_regions[0]
    assert region.header == header.id
    # true successor enters the body, false successor falls through
    assert header.successors[0] == region.body_entry
    assert g.node(region.body_exit).successors == (header.id,)
    fall = g.node(header.successors[1])
    assert isinstance(fall.kind, Basic)


def test_empty_loop_body():
    g = build_cfg(parse_program("int x; while (x < 0) { }"))
    region = g.loop_regions[0]
    assert region.body_entry == region.body_exit
    assert g.node(region.body_exit).successors == (region.header,)


def test_extract_loop_cfg():
    g = build_cfg(parse_program(
        "int x, y; while (x < 3) { y = y + x; x = x + 1; }"))
    sub = extract_loop_cfg(g, g.loop_regions[0].header)
    assert isinstance(sub.node(sub.entry).kind, Entry)
    assert isinstance(sub.node(sub.exit).kind, Exit)
    basics = [n for n in sub.nodes if isinstance(n.kind, Basic)]
    assert len(basics) == 1 and len(basics[0].kind.stmts) == 2
    # the back edge target becomes the sub-CFG exit
    assert basics[0].successors == (sub.exit,)


def test_extract_loop_cfg_keeps_nested_regions():
    g = build_cfg(parse_program(
        "int i, j; while (i < 2) { j = 0; while (j < 2) { j = j + 1; } i = i + 1; }"))
    sub = extract_loop_cfg(g, g.loop_regions[0].header)
    assert 1 in sub.loop_regions and 0 not in sub.loop_regions
    inner = extract_loop_cfg(sub, sub.loop_regions[1].header)
    # orig_ids composes back to ids in the original graph
    basic = next(n for n in inner.nodes if isinstance(n.kind, Basic))
    assert isinstance(g.node(inner.orig_ids[basic.id]).kind, Basic)


def test_extract_requires_loop_header():
    g = build_cfg(parse_program("int x; x = 0;"))
    with pytest.raises(NotALoopHeaderError):
        extract_loop_cfg(g, g.entry)


def test_branch_sub_cfgs():
    g = build_cfg(parse_program(
        "int x; if (x > 0) { x = 1; x = x + 1; } else { }"))
    branch = next(n for n in g.nodes if isinstance(n.kind, Branch))
    t, f = branch_sub_cfgs(g, branch.id)
    t_basic = next(n for n in t.nodes if isinstance(n.kind, Basic))
    assert len(t_basic.kind.stmts) == 2
    # empty arm: entry straight to exit
    assert kinds(f) == ["Entry", "Exit"]
    assert f.node(f.entry).successors == (f.exit,)


def test_branch_sub_cfgs_requires_branch():
    g = build_cfg(parse_program("int x; while (x > 0) { x = x - 1; }"))
    header = g.loop_regions[0].header
    with pytest.raises(NotABranchError):
        branch_sub_cfgs(g, header)


def test_to_dot_deterministic_and_labelled():
    src = "int x; while (x < 2) { if (x > 0) { x = 2; } else { x = 1; } }"
    g = build_cfg(parse_program(src))
    dot = to_dot(g)
    assert dot == to_dot(build_cfg(parse_program(src)))
    assert dot.startswith("digraph cfg {")
    assert 'label="while[0] x < 2"' in dot
    assert 'label="if x > 0"' in dot
    assert '[label="true"]' in dot and '[label="false"]' in dot
