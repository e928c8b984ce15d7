"""Control-flow graph construction for structured MiniC programs.

Node kinds: Entry, Exit, Basic (merged straight-line run), Branch and
LoopHeader (two ordered successors: true then false). Branch arms always
rejoin at an explicit, possibly empty Basic join node so branch regions
have a recoverable cut point; a loop's back edge runs from its body exit
to the header.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import NotABranchError, NotALoopHeaderError
from .frontend.ast_nodes import Expr, If, Pos, Program, Stmt, While, NOPOS


@dataclass(frozen=True)
class Entry:
    pass


@dataclass(frozen=True)
class Exit:
    pass


@dataclass(frozen=True)
class Basic:
    stmts: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class Branch:
    cond: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class LoopHeader:
    cond: Expr
    loop_id: int
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class CfgNode:
    id: int
    kind: object
    successors: tuple[int, ...]


@dataclass(frozen=True)
class LoopRegion:
    header: int
    body_entry: int
    body_exit: int  # back-edge source


@dataclass(frozen=True)
class Cfg:
    nodes: tuple[CfgNode, ...]
    entry: int
    exit: int
    loop_regions: dict[int, LoopRegion]
    branch_joins: dict[int, int]
    orig_ids: dict[int, int] | None = None  # for extracted sub-CFGs

    def node(self, nid: int) -> CfgNode:
        return self.nodes[nid]


class _Builder:
    def __init__(self):
        self.nodes: list[dict] = []
        self.loop_regions: dict[int, LoopRegion] = {}
        self.branch_joins: dict[int, int] = {}

    def new(self, kind) -> int:
        self.nodes.append({"kind": kind, "succ": []})
        return len(self.nodes) - 1

    def link(self, a: int, b: int):
        self.nodes[a]["succ"].append(b)

    def seq(self, stmts, pred_id: int) -> int:
        """Build `stmts` after node pred_id; returns the last node id."""
        run: list[Stmt] = []
        cur = pred_id

        def flush():
            nonlocal cur
            if run:
                nid = self.new(Basic(tuple(run)))
                self.link(cur, nid)
                cur = nid
                run.clear()

        for s in stmts:
            if isinstance(s, If):
                flush()
                branch = self.new(Branch(s.cond, s.pos))
                self.link(cur, branch)
                join = self.new(Basic())
                for arm in (s.then, s.orelse):
                    if arm:
                        last = self.seq(arm, branch)
                        self.link(last, join)
                    else:
                        self.link(branch, join)
                self.branch_joins[branch] = join
                cur = join
            elif isinstance(s, While):
                flush()
                header = self.new(LoopHeader(s.cond, s.loop_id, s.pos))
                self.link(cur, header)
                if s.body:
                    # true successor first: seed it, then build the body
                    body_entry_mark = len(self.nodes)
                    body_exit = self.seq(s.body, header)
                    body_entry = body_entry_mark
                else:
                    body_entry = body_exit = self.new(Basic())
                    self.link(header, body_entry)
                self.link(body_exit, header)  # back edge
                self.loop_regions[s.loop_id] = LoopRegion(header, body_entry, body_exit)
                cur = header  # false successor appended by caller's next link
            else:
                run.append(s)
        flush()
        return cur


def build_cfg(p: Program) -> Cfg:
    b = _Builder()
    entry = b.new(Entry())
    last = b.seq(p.body, entry)
    exit_id = b.new(Exit())
    b.link(last, exit_id)
    nodes = tuple(
        CfgNode(i, n["kind"], tuple(n["succ"])) for i, n in enumerate(b.nodes)
    )
    return Cfg(nodes, entry, exit_id, b.loop_regions, b.branch_joins)


def _subgraph(g: Cfg, start: int, stop_at: set[int]) -> tuple[list[int], set[int]]:
    """Nodes reachable from start without passing through stop_at.

    Returns ids in discovery order plus the members of stop_at that were
    reached directly."""
    seen: list[int] = []
    hit: set[int] = set()
    stack = [start]
    while stack:
        nid = stack.pop()
        if nid in stop_at:
            hit.add(nid)
            continue
        if nid in seen:
            continue
        seen.append(nid)
        for s in reversed(g.node(nid).successors):
            stack.append(s)
    return seen, hit


def _rebuild(g: Cfg, members: list[int], entry_to: int, exits_to: set[int]) -> Cfg:
    """Package `members` as a standalone Cfg with fresh Entry/Exit."""
    id_map = {}
    new_nodes: list[CfgNode] = []

    def add(kind, succ=()):
        nid = len(new_nodes)
        new_nodes.append(CfgNode(nid, kind, tuple(succ)))
        return nid

    new_entry = add(Entry())
    for old in members:
        id_map[old] = add(g.node(old).kind)
    new_exit = add(Exit())

    def mapped(old_succ: int) -> int:
        if old_succ in exits_to:
            return new_exit
        return id_map[old_succ]

    patched = []
    for node in new_nodes:
        if node.id == new_entry:
            patched.append(replace(node, successors=(mapped(entry_to) if entry_to in exits_to or entry_to in id_map else new_exit,)))
        elif node.id == new_exit:
            patched.append(node)
        else:
            old = members[node.id - 1]
            succ = tuple(mapped(s) for s in g.node(old).successors)
            patched.append(replace(node, successors=succ))

    loop_regions = {
        lid: LoopRegion(id_map[r.header], id_map[r.body_entry], id_map[r.body_exit])
        for lid, r in g.loop_regions.items()
        if r.header in id_map
    }
    branch_joins = {
        id_map[br]: id_map[j] for br, j in g.branch_joins.items()
        if br in id_map and j in id_map
    }
    orig = {new: old for old, new in id_map.items()}
    if g.orig_ids:  # compose when extracting from an extracted CFG
        orig = {new: g.orig_ids.get(old, old) for new, old in orig.items()}
    return Cfg(tuple(patched), new_entry, new_exit, loop_regions, branch_joins, orig)


def extract_loop_cfg(g: Cfg, header: int) -> Cfg:
    """Loop body as a standalone Cfg; its Exit stands for the back-edge
    target (the original header)."""
    kind = g.node(header).kind
    if not isinstance(kind, LoopHeader):
        raise NotALoopHeaderError(f"node {header} is {type(kind).__name__}, not LoopHeader")
    body_entry = g.node(header).successors[0]
    members, _ = _subgraph(g, body_entry, {header})
    return _rebuild(g, members, body_entry, {header})


def branch_sub_cfgs(g: Cfg, branch: int) -> tuple[Cfg, Cfg]:
    """True-arm and false-arm subgraphs up to (excluding) the join node."""
    kind = g.node(branch).kind
    if not isinstance(kind, Branch):
        raise NotABranchError(f"node {branch} is {type(kind).__name__}, not Branch")
    join = g.branch_joins[branch]
    arms = []
    for succ in g.node(branch).successors:
        if succ == join:
            arms.append(_rebuild(g, [], join, {join}))
            continue
        members, _ = _subgraph(g, succ, {join})
        arms.append(_rebuild(g, members, succ, {join}))
    return arms[0], arms[1]


def to_dot(g: Cfg) -> str:
    """Graphviz DOT text; deterministic node order."""
    def label(node: CfgNode) -> str:
        k = node.kind
        if isinstance(k, Entry):
            return "entry"
        if isinstance(k, Exit):
            return "exit"
        if isinstance(k, Basic):
            from .frontend.printer import _stmt_lines
            body = "\\n".join(
                line.strip() for s in k.stmts for line in _stmt_lines(s, "")
            )
            return body or "(join)"
        from .frontend.printer import expr_to_str
        if isinstance(k, Branch):
            return f"if {expr_to_str(k.cond)}"
        return f"while[{k.loop_id}] {expr_to_str(k.cond)}"

    lines = ["digraph cfg {"]
    for node in g.nodes:
        lines.append(f'  n{node.id} [label="{label(node)}"];')
    for node in g.nodes:
        two_way = isinstance(node.kind, (Branch, LoopHeader))
        for idx, succ in enumerate(node.successors):
            attr = f' [label="{"true" if idx == 0 else "false"}"]' if two_way else ""
            lines.append(f"  n{node.id} -> n{succ}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
