"""Tokenizer for MiniC source text.

Plain `//` comments are discarded; `//@` comment lines carry contract
annotations and are emitted as ANNOT tokens with their raw payload, which
the parser re-lexes with the ordinary expression grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = {"int", "while", "if", "else", "assume", "assert", "nondet", "main", "return"}

# longest-match first
_PUNCT = [
    "==", "!=", "<=", ">=", "&&", "||",
    "(", ")", "{", "}", ";", ",", "=", "<", ">", "+", "-", "*", "!",
]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")
_ANNOT_RE = re.compile(
    r"//@\s*(?P<kind>pre|post|gold_invariant)(?:\[(?P<loop>[0-9]+)\])?\s*:\s*(?P<body>.*?)\s*$"
)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT INT PUNCT ANNOT EOF
    value: object
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    lines = source.split("\n")
    for lineno, line in enumerate(lines, start=1):
        i = 0
        n = len(line)
        while i < n:
            ch = line[i]
            if ch in " \t\r":
                i += 1
                continue
            if line.startswith("//", i):
                if line.startswith("//@", i):
                    m = _ANNOT_RE.match(line, i)
                    if m is None:
                        raise LexError(
                            "malformed //@ annotation (expected pre:, post:, or gold_invariant[k]:)",
                            lineno, i + 1,
                        )
                    tokens.append(Token(
                        "ANNOT",
                        (m.group("kind"),
                         int(m.group("loop")) if m.group("loop") else None,
                         m.group("body")),
                        lineno, i + 1,
                    ))
                break  # rest of line is comment either way
            m = _IDENT_RE.match(line, i)
            if m:
                tokens.append(Token("IDENT", m.group(), lineno, i + 1))
                i = m.end()
                continue
            m = _INT_RE.match(line, i)
            if m:
                tokens.append(Token("INT", int(m.group()), lineno, i + 1))
                i = m.end()
                continue
            for p in _PUNCT:
                if line.startswith(p, i):
                    tokens.append(Token("PUNCT", p, lineno, i + 1))
                    i += len(p)
                    break
            else:
                raise LexError(f"illegal character {ch!r}", lineno, i + 1)
    last_line = len(lines)
    tokens.append(Token("EOF", None, last_line, len(lines[-1]) + 1))
    return tokens
