"""Lexer, parser, printer, and type checker."""

import pytest

from pathinv.errors import (
    LexError,
    NonlinearExprError,
    ParseError,
    TypeCheckError,
    UndeclaredVariableError,
)
from pathinv.frontend.ast_nodes import (
    Assign,
    Binary,
    If,
    IntLit,
    Nondet,
    Unary,
    Var,
    While,
    loops_of,
)
from pathinv.frontend.lexer import tokenize
from pathinv.frontend.parser import parse_expr_text, parse_program
from pathinv.frontend.printer import expr_to_str, pretty_print


def test_tokenize_positions():
    toks = tokenize("x = 1;\ny = x + 2;")
    assert toks[0].kind == "IDENT" and toks[0].line == 1 and toks[0].col == 1
    y = next(t for t in toks if t.value == "y")
    assert y.line == 2 and y.col == 1


def test_tokenize_annotation():
    toks = tokenize("//@ pre: n >= 0\nx = 0;")
    assert toks[0].kind == "ANNOT"
    kind, loop_id, body = toks[0].value
    assert kind == "pre" and loop_id is None and body.strip() == "n >= 0"


def test_tokenize_gold_annotation_loop_id():
    toks = tokenize("//@ gold_invariant[2]: x <= n\n")
    kind, loop_id, _ = toks[0].value
    assert kind == "gold_invariant" and loop_id == 2


def test_plain_comment_ignored():
    toks = tokenize("// just a note\nx = 1;")
    assert toks[0].kind == "IDENT"


def test_lex_error_position():
    with pytest.raises(LexError) as exc:
        tokenize("x = @;")
    assert exc.value.col == 5


def test_parse_precedence():
    e = parse_expr_text("a + b * 2 == c && d < 0 || e > 1")
    # || binds loosest
    assert isinstance(e, Binary) and e.op == "or"
    assert e.left.op == "and"
    assert e.left.left.op == "=="
    assert e.left.left.left.op == "+"
    assert e.left.left.left.right.op == "*"


def test_unary_minus_literal_folds():
    e = parse_expr_text("-3")
    assert isinstance(e, IntLit) and e.value == -3
    e = parse_expr_text("-x")
    assert isinstance(e, Unary) and e.op == "neg"


def test_comparison_does_not_chain():
    with pytest.raises(ParseError):
        parse_expr_text("a < b < c")


def test_parse_program_shapes():
    src = """
    //@ pre: n >= 0
    int x, n;
    x = 0;
    while (x < n) { x = x + 1; }
    //@ post: x == n
    """
    p = parse_program(src)
    assert p.decls == ("x", "n")
    assert isinstance(p.body[0], Assign)
    assert isinstance(p.body[1], While)
    assert p.precondition is not None
    assert len(p.postconditions) == 1


def test_main_wrapper_accepted():
    src = "int main() { int x; x = 1; return 0; }"
    p = parse_program(src)
    assert p.decls == ("x",)
    assert len(p.body) == 1


def test_loop_ids_source_order():
    src = """
    int a, b;
    while (a < 1) { while (b < 1) { b = b + 1; } a = a + 1; }
    while (a < 2) { a = a + 1; }
    """
    p = parse_program(src)
    ids = [w.loop_id for w in loops_of(p)]
    assert ids == [0, 1, 2]


def test_nondet_only_in_assignment():
    parse_program("int x; x = nondet();")
    with pytest.raises(TypeCheckError):
        parse_program("int x; assume(nondet() > 0);")


def test_nonlinear_rejected():
    with pytest.raises(NonlinearExprError):
        parse_program("int x, y; x = x * y;")
    # literal factor stays linear
    parse_program("int x; x = 3 * x;")


def test_undeclared_variable():
    with pytest.raises(UndeclaredVariableError):
        parse_program("int x; x = y + 1;")


def test_duplicate_declaration():
    with pytest.raises(TypeCheckError):
        parse_program("int x; int x;")


def test_gold_invariant_unknown_loop():
    with pytest.raises(TypeCheckError):
        parse_program("//@ gold_invariant[1]: x > 0\nint x; while (x > 0) { x = x - 1; }")


def test_at_most_one_pre():
    with pytest.raises(TypeCheckError):
        parse_program("//@ pre: x > 0\n//@ pre: x > 1\nint x;")


def test_boolean_condition_required():
    with pytest.raises(TypeCheckError):
        parse_program("int x; if (x + 1) { x = 0; }")


def test_printer_roundtrip():
    src = """
    //@ pre: n >= 0
    int x, y, n;
    x = 0;
    while (x < n) {
      if (y >= 0) { y = y + 1; } else { y = y - 2 * x; }
      x = x + 1;
      assert(x <= n);
    }
    //@ post: x == n
    """
    p = parse_program(src)
    printed = pretty_print(p)
    p2 = parse_program(printed)
    assert p2.body == p.body
    assert p2.decls == p.decls
    assert pretty_print(p2) == printed


def test_expr_to_str_parenthesization():
    for text in ("(a + b) * 2", "a - (b - c)", "-(a + b)", "!(a < b || c < d)"):
        e = parse_expr_text(text)
        assert parse_expr_text(expr_to_str(e)) == e
