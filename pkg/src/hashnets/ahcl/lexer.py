"""Tokenizer for configuration files.

Keywords are reserved; identifiers are [A-Za-z_][A-Za-z0-9_]*.  Comments
run from // to end of line.  Every token carries a 1-based span.
"""

from __future__ import annotations

from dataclasses import dataclass

from hashnets.diagnostics import AhclSyntaxError, Span

KEYWORDS = frozenset(
    {
        "component",
        "unit",
        "repetitive",
        "ports",
        "protocol",
        "group",
        "any",
        "all",
        "in",
        "out",
        "stream",
        "sem",
        "connect",
        "synchronous",
        "buffered",
        "ready",
        "as",
        "collective",
        "skip",
        "seq",
        "par",
        "alt",
        "repeat",
        "until",
        "if",
        "else",
        "do",
        "signal",
        "wait",
        "or",
    }
)

PUNCT = {
    "->": "ARROW",
    "{": "LBRACE",
    "}": "RBRACE",
    "(": "LPAREN",
    ")": "RPAREN",
    "<": "LANGLE",
    ">": "RANGLE",
    ";": "SEMI",
    ",": "COMMA",
    ".": "DOT",
    "!": "BANG",
    "?": "QUERY",
    "&": "AMP",
    "|": "PIPE",
}


@dataclass(frozen=True)
class Token:
    kind: str  # keyword name, punct name, "IDENT", "INT", "EOF"
    text: str
    span: Span

    def __str__(self) -> str:
        return self.kind if self.kind in ("EOF",) else self.text


def tokenize(text: str, file: str | None = None) -> list:
    tokens = []
    line = 1
    col = 1
    i = 0
    n = len(text)

    def span(length: int) -> Span:
        return Span(line, col, line, col + length - 1)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(Token("ARROW", "->", span(2)))
            i += 2
            col += 2
            continue
        if ch in PUNCT:
            tokens.append(Token(PUNCT[ch], ch, span(1)))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            word = text[i:j]
            tokens.append(Token("INT", word, span(len(word))))
            col += len(word)
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, span(len(word))))
            col += len(word)
            i = j
            continue
        raise AhclSyntaxError(f"unexpected character {ch!r}", span(1), file=file)
    tokens.append(Token("EOF", "", Span(line, col, line, col)))
    return tokens
