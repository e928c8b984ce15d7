"""Pretty printer: Program -> MiniC text that re-parses to the same AST."""

from __future__ import annotations

from .ast_nodes import (
    Annotation,
    Assert,
    Assign,
    Assume,
    Binary,
    Expr,
    Havoc,
    If,
    IntLit,
    Nondet,
    Program,
    Unary,
    Var,
    While,
)

_PREC = {
    "or": 1, "and": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4, "*": 5,
}
_SURFACE = {"and": "&&", "or": "||"}


def expr_to_str(e: Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(e, IntLit):
        return str(e.value) if e.value >= 0 else f"(-{-e.value})" if parent_prec >= 5 else f"-{-e.value}"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Nondet):
        return "nondet()"
    if isinstance(e, Unary):
        op = "!" if e.op == "not" else "-"
        return f"{op}{expr_to_str(e.operand, 6)}"
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        op = _SURFACE.get(e.op, e.op)
        left = expr_to_str(e.left, prec)
        right = expr_to_str(e.right, prec, right_side=True)
        s = f"{left} {op} {right}"
        # parenthesize when we bind looser than the parent, or equally on
        # the right of a left-associative operator
        if prec < parent_prec or (prec == parent_prec and right_side):
            return f"({s})"
        return s
    raise ValueError(f"cannot print {e!r}")


def _stmt_lines(s, indent: str) -> list[str]:
    if isinstance(s, Assign):
        return [f"{indent}{s.target} = {expr_to_str(s.value)};"]
    if isinstance(s, Havoc):
        return [f"{indent}{s.target} = nondet();"]
    if isinstance(s, Assume):
        return [f"{indent}assume({expr_to_str(s.cond)});"]
    if isinstance(s, Assert):
        return [f"{indent}assert({expr_to_str(s.cond)});"]
    if isinstance(s, While):
        lines = [f"{indent}while ({expr_to_str(s.cond)}) {{"]
        for t in s.body:
            lines += _stmt_lines(t, indent + "    ")
        lines.append(f"{indent}}}")
        return lines
    if isinstance(s, If):
        lines = [f"{indent}if ({expr_to_str(s.cond)}) {{"]
        for t in s.then:
            lines += _stmt_lines(t, indent + "    ")
        if s.orelse:
            lines.append(f"{indent}}} else {{")
            for t in s.orelse:
                lines += _stmt_lines(t, indent + "    ")
        lines.append(f"{indent}}}")
        return lines
    raise ValueError(f"cannot print {s!r}")


def _annot_line(a: Annotation) -> str:
    if a.kind == "gold_invariant":
        return f"//@ gold_invariant[{a.loop_id}]: {expr_to_str(a.formula)}"
    return f"//@ {a.kind}: {expr_to_str(a.formula)}"


def pretty_print(p: Program) -> str:
    lines = [_annot_line(a) for a in p.annotations]
    lines += [f"int {name};" for name in p.decls]
    for s in p.body:
        lines += _stmt_lines(s, "")
    return "\n".join(lines) + "\n"
