"""Typed AST for the MiniC integer language.

Expressions and statements are immutable dataclasses. Source positions are
carried for diagnostics but excluded from structural equality so that
round-tripping through the pretty printer compares clean.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Pos:
    line: int = 0
    col: int = 0


NOPOS = Pos()


# --- expressions ---------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "neg" | "not"
    operand: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # + - * == != < <= > >= and or
    left: Expr
    right: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Nondet(Expr):
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


TRUE = Binary("==", IntLit(0), IntLit(0))
FALSE = Binary("==", IntLit(0), IntLit(1))

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("and", "or")


def is_true(e: Expr) -> bool:
    return e == TRUE


# --- statements ----------------------------------------------------------


@dataclass(frozen=True)
class Stmt:
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    target: str
    value: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: tuple[Stmt, ...]
    orelse: tuple[Stmt, ...]
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: tuple[Stmt, ...]
    loop_id: int
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Assume(Stmt):
    cond: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Assert(Stmt):
    cond: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Havoc(Stmt):
    target: str
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


STRAIGHT_LINE = (Assign, Assume, Assert, Havoc)


# --- program and annotations ---------------------------------------------


@dataclass(frozen=True)
class Annotation:
    kind: str  # "pre" | "post" | "gold_invariant"
    formula: Expr
    loop_id: int | None = None  # gold_invariant only
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    name: str
    decls: tuple[str, ...]
    body: tuple[Stmt, ...]
    annotations: tuple[Annotation, ...] = ()

    @property
    def precondition(self) -> Expr | None:
        for a in self.annotations:
            if a.kind == "pre":
                return a.formula
        return None

    @property
    def postconditions(self) -> tuple[Expr, ...]:
        return tuple(a.formula for a in self.annotations if a.kind == "post")

    def gold_invariant(self, loop_id: int) -> Expr | None:
        for a in self.annotations:
            if a.kind == "gold_invariant" and a.loop_id == loop_id:
                return a.formula
        return None


def walk_exprs(e: Expr):
    """Yield e and all sub-expressions."""
    yield e
    if isinstance(e, Unary):
        yield from walk_exprs(e.operand)
    elif isinstance(e, Binary):
        yield from walk_exprs(e.left)
        yield from walk_exprs(e.right)


def expr_vars(e: Expr) -> frozenset[str]:
    return frozenset(x.name for x in walk_exprs(e) if isinstance(x, Var))


def walk_stmts(stmts):
    """Yield every statement, recursing into compound bodies."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            yield from walk_stmts(s.orelse)
        elif isinstance(s, While):
            yield from walk_stmts(s.body)


def loops_of(p: Program) -> list[While]:
    return [s for s in walk_stmts(p.body) if isinstance(s, While)]


def modified_vars(stmts) -> frozenset[str]:
    """Variables written anywhere in a statement sequence."""
    out = set()
    for s in walk_stmts(stmts):
        if isinstance(s, (Assign, Havoc)):
            out.add(s.target)
    return frozenset(out)


def int_constants(stmts, annotations=()) -> frozenset[int]:
    """All integer literals appearing in statements and annotations."""
    out = set()

    def scan(e: Expr):
        for sub in walk_exprs(e):
            if isinstance(sub, IntLit):
                out.add(sub.value)

    for s in walk_stmts(stmts):
        if isinstance(s, Assign):
            scan(s.value)
        elif isinstance(s, (If, While, Assume, Assert)):
            scan(s.cond)
    for a in annotations:
        scan(a.formula)
    return frozenset(out)
