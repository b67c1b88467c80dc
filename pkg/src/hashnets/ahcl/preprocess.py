"""Iterator expansion: a textual macro pass run before lexing.

    iterator i range [0, 3] {
        unit phil_[/i/] { ... }
        connect phil_[/i/].rf_put -> fork_[/(i+1) mod 4/].take buffered(1);
    }

The block body is replicated once per integer in the inclusive range with
every `[/ expr /]` splice evaluated under the current bindings.  Blocks
nest; inner iterators see outer variables.  Splice expressions support
integer literals, bound variables, + - *, `mod`, and parentheses.

Only integer ranges exist; anything fancier belongs in a real generator
script, not a configuration file.
"""

from __future__ import annotations

import re

from hashnets.diagnostics import AhclError


class PreprocessError(AhclError):
    pass


_SPLICE = re.compile(r"\[/(.*?)/\]", re.S)
_ITER_HEAD = re.compile(
    r"\biterator\s+([A-Za-z_]\w*)\s+range\s*\[\s*([^\],]+),\s*([^\]]+)\]\s*\{"
)


def _tokenize_expr(text: str) -> list:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(("int", int(text[i:j])))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            out.append(("op", "mod") if word == "mod" else ("var", word))
            i = j
        elif ch in "+-*()":
            out.append(("op", ch))
            i += 1
        else:
            raise PreprocessError(f"bad character {ch!r} in iterator expression {text!r}")
    return out


def eval_expr(text: str, env: dict) -> int:
    """Evaluate +,-,*,mod,parentheses over integers and bound variables."""
    tokens = _tokenize_expr(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else ("end", None)

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def atom() -> int:
        kind, val = take()
        if kind == "int":
            return val
        if kind == "var":
            if val not in env:
                raise PreprocessError(f"unbound iterator variable '{val}' in {text!r}")
            return env[val]
        if (kind, val) == ("op", "("):
            v = add()
            if take() != ("op", ")"):
                raise PreprocessError(f"missing ')' in {text!r}")
            return v
        if (kind, val) == ("op", "-"):
            return -atom()
        raise PreprocessError(f"bad iterator expression {text!r}")

    def mul() -> int:
        v = atom()
        while peek() in (("op", "*"), ("op", "mod")):
            _, op = take()
            rhs = atom()
            if op == "*":
                v = v * rhs
            else:
                if rhs == 0:
                    raise PreprocessError(f"mod by zero in {text!r}")
                v = v % rhs
        return v

    def add() -> int:
        v = mul()
        while peek() in (("op", "+"), ("op", "-")):
            _, op = take()
            v = v + mul() if op == "+" else v - mul()
        return v

    result = add()
    if pos != len(tokens):
        raise PreprocessError(f"trailing input in iterator expression {text!r}")
    return result


def _strip_comments(text: str) -> str:
    """Blank out // comments (keep newlines so spans stay honest)."""
    out = []
    for line in text.split("\n"):
        cut = line.find("//")
        out.append(line if cut < 0 else line[:cut])
    return "\n".join(out)


def _find_block_end(text: str, open_idx: int) -> int:
    """Index just past the '}' matching the '{' at open_idx."""
    depth = 0
    for i in range(open_idx, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    raise PreprocessError("unterminated iterator block")


def _substitute(text: str, env: dict) -> str:
    def repl(m: re.Match) -> str:
        return str(eval_expr(m.group(1), env))

    return _SPLICE.sub(repl, text)


def _expand(text: str, env: dict) -> str:
    m = _ITER_HEAD.search(text)
    if m is None:
        return _substitute(text, env)
    var = m.group(1)
    lo = eval_expr(m.group(2), env)
    hi = eval_expr(m.group(3), env)
    if hi < lo:
        raise PreprocessError(f"iterator '{var}': empty range [{lo}, {hi}]")
    open_idx = m.end() - 1
    end_idx = _find_block_end(text, open_idx)
    body = text[m.end() : end_idx - 1]
    head = _substitute(text[: m.start()], env)
    copies = []
    for value in range(lo, hi + 1):
        inner = dict(env)
        inner[var] = value
        copies.append(_expand(body, inner))
    tail = _expand(text[end_idx:], env)
    return head + "".join(copies) + tail


def expand_iterators(text: str) -> str:
    """Expand all iterator blocks; without any the text passes through
    byte for byte (comments included), so spans keep their meaning."""
    clean = _strip_comments(text)
    if _ITER_HEAD.search(clean) is None and _SPLICE.search(clean) is None:
        return text
    return _expand(clean, {})
