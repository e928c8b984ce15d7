"""Recursive-descent parser and type checker for MiniC.

Accepted input is either a bare statement list or an `int main() { ... }`
wrapper; both produce the same Program. Loop ids are assigned in source
order starting at 0. Annotation payloads are parsed with the same
expression grammar as the rest of the language.
"""

from __future__ import annotations

from ..errors import (
    NonlinearExprError,
    ParseError,
    TypeCheckError,
    UndeclaredVariableError,
)
from .ast_nodes import (
    Annotation,
    Assert,
    Assign,
    Assume,
    Binary,
    Expr,
    If,
    IntLit,
    Nondet,
    Pos,
    Program,
    Stmt,
    Unary,
    Var,
    While,
    walk_exprs,
)
from .lexer import Token, tokenize

_CMP = {"==", "!=", "<", "<=", ">", ">="}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.loop_counter = 0

    # --- token plumbing ---

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def _fail(self, expected: tuple[str, ...]):
        t = self.cur
        shown = t.value if t.kind != "EOF" else "end of input"
        raise ParseError(
            f"unexpected {shown!r}, expected one of {', '.join(expected)}",
            t.line, t.col, expected,
        )

    def advance(self) -> Token:
        t = self.cur
        self.i += 1
        return t

    def at_punct(self, *vals: str) -> bool:
        return self.cur.kind == "PUNCT" and self.cur.value in vals

    def at_kw(self, *words: str) -> bool:
        return self.cur.kind == "IDENT" and self.cur.value in words

    def expect_punct(self, val: str) -> Token:
        if not self.at_punct(val):
            self._fail((val,))
        return self.advance()

    def expect_ident(self) -> Token:
        if self.cur.kind != "IDENT":
            self._fail(("identifier",))
        return self.advance()

    # --- expressions (precedence climbing) ---

    def expr(self) -> Expr:
        return self.or_expr()

    def or_expr(self) -> Expr:
        e = self.and_expr()
        while self.at_punct("||"):
            pos = Pos(self.cur.line, self.cur.col)
            self.advance()
            e = Binary("or", e, self.and_expr(), pos)
        return e

    def and_expr(self) -> Expr:
        e = self.not_expr()
        while self.at_punct("&&"):
            pos = Pos(self.cur.line, self.cur.col)
            self.advance()
            e = Binary("and", e, self.not_expr(), pos)
        return e

    def not_expr(self) -> Expr:
        if self.at_punct("!"):
            t = self.advance()
            return Unary("not", self.not_expr(), Pos(t.line, t.col))
        return self.cmp_expr()

    def cmp_expr(self) -> Expr:
        e = self.add_expr()
        if self.at_punct(*_CMP):
            t = self.advance()
            e = Binary(t.value, e, self.add_expr(), Pos(t.line, t.col))
        return e

    def add_expr(self) -> Expr:
        e = self.mul_expr()
        while self.at_punct("+", "-"):
            t = self.advance()
            e = Binary(t.value, e, self.mul_expr(), Pos(t.line, t.col))
        return e

    def mul_expr(self) -> Expr:
        e = self.unary_expr()
        while self.at_punct("*"):
            t = self.advance()
            e = Binary("*", e, self.unary_expr(), Pos(t.line, t.col))
        return e

    def unary_expr(self) -> Expr:
        if self.at_punct("-"):
            t = self.advance()
            inner = self.unary_expr()
            if isinstance(inner, IntLit):  # fold so -2 stays a literal
                return IntLit(-inner.value, Pos(t.line, t.col))
            return Unary("neg", inner, Pos(t.line, t.col))
        return self.atom()

    def atom(self) -> Expr:
        t = self.cur
        pos = Pos(t.line, t.col)
        if t.kind == "INT":
            self.advance()
            return IntLit(t.value, pos)
        if self.at_punct("("):
            self.advance()
            e = self.expr()
            self.expect_punct(")")
            return e
        if self.at_kw("nondet"):
            self.advance()
            self.expect_punct("(")
            self.expect_punct(")")
            return Nondet(pos)
        if t.kind == "IDENT":
            self.advance()
            return Var(t.value, pos)
        self._fail(("integer", "identifier", "(", "nondet"))

    # --- statements ---

    def block(self) -> tuple[Stmt, ...]:
        self.expect_punct("{")
        stmts = []
        while not self.at_punct("}"):
            stmts.append(self.stmt())
        self.expect_punct("}")
        return tuple(stmts)

    def stmt(self) -> Stmt:
        t = self.cur
        pos = Pos(t.line, t.col)
        if self.at_kw("if"):
            self.advance()
            self.expect_punct("(")
            cond = self.expr()
            self.expect_punct(")")
            then = self.block()
            orelse: tuple[Stmt, ...] = ()
            if self.at_kw("else"):
                self.advance()
                orelse = self.block()
            return If(cond, then, orelse, pos)
        if self.at_kw("while"):
            loop_id = self.loop_counter
            self.loop_counter += 1
            self.advance()
            self.expect_punct("(")
            cond = self.expr()
            self.expect_punct(")")
            body = self.block()
            return While(cond, body, loop_id, pos)
        if self.at_kw("assume", "assert"):
            kw = self.advance().value
            self.expect_punct("(")
            cond = self.expr()
            self.expect_punct(")")
            self.expect_punct(";")
            return Assume(cond, pos) if kw == "assume" else Assert(cond, pos)
        if t.kind == "IDENT" and t.value not in ("int", "else", "return"):
            name = self.advance().value
            self.expect_punct("=")
            value = self.expr()
            self.expect_punct(";")
            return Assign(name, value, pos)
        self._fail(("statement",))

    # --- program ---

    def program(self) -> Program:
        annotations: list[Annotation] = []
        decls: list[str] = []
        body: list[Stmt] = []
        wrapped = False

        def take_annots():
            while self.cur.kind == "ANNOT":
                t = self.advance()
                kind, loop_id, text = t.value
                formula = parse_expr_text(text, line=t.line)
                annotations.append(Annotation(kind, formula, loop_id, Pos(t.line, t.col)))

        take_annots()
        if self.at_kw("int") and self.tokens[self.i + 1].kind == "IDENT" \
                and self.tokens[self.i + 1].value == "main":
            self.advance()
            self.advance()
            self.expect_punct("(")
            self.expect_punct(")")
            self.expect_punct("{")
            wrapped = True

        while True:
            take_annots()
            if self.cur.kind == "EOF":
                break
            if wrapped and self.at_punct("}"):
                self.advance()
                take_annots()
                if self.cur.kind != "EOF":
                    self._fail(("end of input",))
                break
            if self.at_kw("int"):
                self.advance()
                t = self.expect_ident()
                if t.value in decls:
                    raise TypeCheckError(f"duplicate declaration of {t.value}", t.line, t.col)
                decls.append(t.value)
                while self.at_punct(","):
                    self.advance()
                    t = self.expect_ident()
                    if t.value in decls:
                        raise TypeCheckError(f"duplicate declaration of {t.value}", t.line, t.col)
                    decls.append(t.value)
                self.expect_punct(";")
            elif self.at_kw("return"):
                self.advance()
                if not self.at_punct(";"):
                    self.expr()
                self.expect_punct(";")
            else:
                body.append(self.stmt())
        return Program("main", tuple(decls), tuple(body), tuple(annotations))


def parse(tokens: list[Token]) -> Program:
    """Parse and type-check a token stream into a Program."""
    p = _Parser(tokens).program()
    check_program(p)
    return p


def parse_program(source: str) -> Program:
    return parse(tokenize(source))


def parse_expr_text(text: str, line: int = 1) -> Expr:
    """Parse a standalone expression (annotation payloads, CLI flags)."""
    toks = tokenize(text)
    parser = _Parser(toks)
    e = parser.expr()
    if parser.cur.kind != "EOF":
        t = parser.cur
        raise ParseError(f"trailing input after expression: {t.value!r}",
                         line if t.line == 1 else t.line, t.col, ("end of expression",))
    return e


# --- type checking --------------------------------------------------------


def expr_type(e: Expr, declared: frozenset[str], allow_nondet: bool = False) -> str:
    """Return 'int' or 'bool'; raise on mismatch, nonlinearity, or undeclared vars."""
    if isinstance(e, IntLit):
        return "int"
    if isinstance(e, Nondet):
        if not allow_nondet:
            raise TypeCheckError("nondet() is only allowed in assignment right-hand sides",
                                 e.pos.line, e.pos.col)
        return "int"
    if isinstance(e, Var):
        if e.name not in declared:
            raise UndeclaredVariableError(f"undeclared variable {e.name}", e.pos.line, e.pos.col)
        return "int"
    if isinstance(e, Unary):
        t = expr_type(e.operand, declared, allow_nondet and e.op == "neg")
        want = "int" if e.op == "neg" else "bool"
        if t != want:
            raise TypeCheckError(f"operand of {e.op} must be {want}", e.pos.line, e.pos.col)
        return want
    if isinstance(e, Binary):
        if e.op in ("and", "or"):
            for side in (e.left, e.right):
                if expr_type(side, declared) != "bool":
                    raise TypeCheckError(f"operands of {e.op} must be boolean",
                                         e.pos.line, e.pos.col)
            return "bool"
        lt = expr_type(e.left, declared, allow_nondet)
        rt = expr_type(e.right, declared, allow_nondet)
        if lt != "int" or rt != "int":
            raise TypeCheckError(f"operands of {e.op} must be integers", e.pos.line, e.pos.col)
        if e.op == "*" and not (isinstance(e.left, IntLit) or isinstance(e.right, IntLit)):
            raise NonlinearExprError(
                "multiplication requires a literal operand (linear arithmetic only)",
                e.pos.line, e.pos.col)
        return "bool" if e.op in _CMP else "int"
    raise TypeCheckError(f"unknown expression {e!r}", 0, 0)


def check_bool(e: Expr, declared: frozenset[str], what: str):
    if expr_type(e, declared) != "bool":
        pos = getattr(e, "pos", None)
        raise TypeCheckError(f"{what} must be boolean",
                             pos.line if pos else 0, pos.col if pos else 0)


def _check_stmts(stmts, declared):
    for s in stmts:
        if isinstance(s, Assign):
            if s.target not in declared:
                raise UndeclaredVariableError(f"undeclared variable {s.target}",
                                              s.pos.line, s.pos.col)
            if expr_type(s.value, declared, allow_nondet=True) != "int":
                raise TypeCheckError("assigned value must be an integer", s.pos.line, s.pos.col)
        elif isinstance(s, If):
            check_bool(s.cond, declared, "if condition")
            _check_stmts(s.then, declared)
            _check_stmts(s.orelse, declared)
        elif isinstance(s, While):
            check_bool(s.cond, declared, "while condition")
            _check_stmts(s.body, declared)
        elif isinstance(s, (Assume, Assert)):
            check_bool(s.cond, declared, "assume/assert condition")


def check_program(p: Program):
    declared = frozenset(p.decls)
    _check_stmts(p.body, declared)
    loop_ids = set()
    from .ast_nodes import loops_of

    for w in loops_of(p):
        loop_ids.add(w.loop_id)
    pres = [a for a in p.annotations if a.kind == "pre"]
    if len(pres) > 1:
        a = pres[1]
        raise TypeCheckError("at most one //@ pre annotation allowed", a.pos.line, a.pos.col)
    for a in p.annotations:
        check_bool(a.formula, declared, f"//@ {a.kind} annotation")
        for sub in walk_exprs(a.formula):
            if isinstance(sub, Nondet):
                raise TypeCheckError("nondet() not allowed in annotations",
                                     a.pos.line, a.pos.col)
        if a.kind == "gold_invariant" and a.loop_id not in loop_ids:
            raise TypeCheckError(f"gold_invariant references unknown loop {a.loop_id}",
                                 a.pos.line, a.pos.col)
