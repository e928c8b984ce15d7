from .ast_nodes import (
    Annotation,
    Assert,
    Assign,
    Assume,
    Binary,
    Expr,
    FALSE,
    Havoc,
    If,
    IntLit,
    Nondet,
    Pos,
    Program,
    Stmt,
    TRUE,
    Unary,
    Var,
    While,
    expr_vars,
    int_constants,
    loops_of,
    modified_vars,
    walk_exprs,
    walk_stmts,
)
from .lexer import Token, tokenize
from .parser import check_program, parse, parse_expr_text, parse_program
from .printer import expr_to_str, pretty_print

__all__ = [
    "Annotation", "Assert", "Assign", "Assume", "Binary", "Expr", "FALSE",
    "Havoc", "If", "IntLit", "Nondet", "Pos", "Program", "Stmt", "TRUE",
    "Token", "Unary", "Var", "While",
    "check_program", "expr_to_str", "expr_vars", "int_constants", "loops_of",
    "modified_vars", "parse", "parse_expr_text", "parse_program",
    "pretty_print", "tokenize", "walk_exprs", "walk_stmts",
]
