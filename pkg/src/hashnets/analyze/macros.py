"""Formula macros: named, parameterized shorthands expanded to core CTL text.

A formula file holds one item per line.  A line containing `::` defines a
macro, `name :: body` or `name[v1,...,vn] :: body`; any other non-blank
line is a formula to check.  `//` starts a comment.

Macro bodies reuse the configuration splice syntax: `[/expr/]` evaluates
integer arithmetic (`+ - *`, `mod`, parentheses) over bound variables and
may appear inside identifiers, so `phil_[/(f + 1) mod 5/]` names a
different macro per instantiation.  `forall v in [a,b]: f` and
`exists v in [a,b]: f` expand to finite conjunction and disjunction over
the rest of the enclosing group.  Built-in macros resolve channel, port,
and group identities against the net's translation record, so formulas
can say `sender_blocked[ch]` instead of naming internal places.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from hashnets.ahcl.preprocess import PreprocessError, eval_expr
from hashnets.analyze.ctl import parse_formula
from hashnets.petri.net import InterlacedNet


class MacroError(Exception):
    pass


class UnknownMacro(MacroError):
    pass


class ArityMismatch(MacroError):
    pass


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*")
_IDENT_CONT = re.compile(r"[A-Za-z0-9_.']+")
_DEF_HEAD = re.compile(
    r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[([^\]]*)\])?\s*$"
)
_QUANT_HEAD = re.compile(r"\s*([A-Za-z_]\w*)\s+in\s*\[([^\],]+),([^\]]+)\]\s*:")
# formula syntax that must pass through the expander untouched
_CTL_WORDS = frozenset(
    ["EX", "AX", "EF", "AF", "EG", "AG", "E", "A", "U", "true", "false", "not", "dead"]
)
_MAX_DEPTH = 64


@dataclass(frozen=True)
class MacroDef:
    name: str
    params: tuple
    body: str


@dataclass
class MacroLib:
    defs: dict = field(default_factory=dict)

    def define(self, name: str, params, body: str) -> None:
        if name in _BUILTINS:
            raise MacroError(f"'{name}' is a built-in macro")
        self.defs[name] = MacroDef(name, tuple(params), body.strip())

    def merge(self, other: "MacroLib") -> None:
        self.defs.update(other.defs)


def parse_macro_file(text: str):
    """(library, formulas): `name :: body` lines define, the rest check."""
    lib = MacroLib()
    formulas = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if "::" in line:
            head, body = line.split("::", 1)
            m = _DEF_HEAD.match(head)
            if m is None:
                raise MacroError(f"line {lineno}: bad macro head {head.strip()!r}")
            params = [p.strip() for p in m.group(2).split(",")] if m.group(2) else []
            if any(not p for p in params):
                raise MacroError(f"line {lineno}: empty macro parameter")
            lib.define(m.group(1), params, body)
        else:
            formulas.append(line)
    return lib, formulas


# -- built-in macros over the translation record

def _channel(net: InterlacedNet, cid: str) -> dict:
    chan = net.meta.get("channels", {}).get(cid)
    if chan is None:
        raise UnknownMacro(f"unknown channel {cid!r}")
    return chan


def _prepared(port: str) -> str:
    return f"port_prepared[{port}]"


def _sender_prepared(net, c):
    return _prepared(_channel(net, c)["sender"])


def _receiver_prepared(net, c):
    return _prepared(_channel(net, c)["receiver"])


def _rendezvous(net, c):
    chan = _channel(net, c)
    return f"({_prepared(chan['sender'])} & {_prepared(chan['receiver'])})"


def _buffer_full(net, c):
    if _channel(net, c)["mode"] != "buffered":
        raise MacroError(f"buffer_full[{c}]: channel is not buffered")
    return f"chan_buffer_free[{c}] = 0"


def _buffer_empty(net, c):
    if _channel(net, c)["mode"] != "buffered":
        raise MacroError(f"buffer_empty[{c}]: channel is not buffered")
    return f"chan_buffer_used[{c}] = 0"


def _sender_blocked(net, c):
    chan = _channel(net, c)
    s = _prepared(chan["sender"])
    if chan["mode"] == "synchronous":
        return f"({s} & !{_prepared(chan['receiver'])})"
    if chan["mode"] == "buffered":
        return f"({s} & chan_buffer_free[{c}] = 0)"
    raise MacroError(f"sender_blocked[{c}]: no sender wait state in {chan['mode']} mode")


def _receiver_blocked(net, c):
    chan = _channel(net, c)
    r = _prepared(chan["receiver"])
    if chan["mode"] == "synchronous":
        return f"({r} & !{_prepared(chan['sender'])})"
    if chan["mode"] == "buffered":
        return f"({r} & chan_buffer_used[{c}] = 0)"
    raise MacroError(f"receiver_blocked[{c}]: no receiver wait state in {chan['mode']} mode")


def _port_pair_prepared(net, p):
    for chan in net.meta.get("channels", {}).values():
        if chan["sender"] == p:
            return _prepared(chan["receiver"])
        if chan["receiver"] == p:
            return _prepared(chan["sender"])
    raise UnknownMacro(f"port_pair_prepared[{p}]: port is not connected")


def _group_prepared(net, g):
    ent = net.meta.get("entities", {}).get(g)
    if ent is None:
        raise UnknownMacro(f"unknown entity {g!r}")
    if ent["kind"] == "port":
        return _prepared(g)
    if ent["kind"] not in ("any", "all"):
        raise MacroError(f"group_prepared[{g}]: not a port group")
    join = " | " if ent["kind"] == "any" else " & "
    return "(" + join.join(_prepared(m) for m in ent["members"]) + ")"


_BUILTINS = {
    "sender_prepared": _sender_prepared,
    "receiver_prepared": _receiver_prepared,
    "rendezvous": _rendezvous,
    "buffer_full": _buffer_full,
    "buffer_empty": _buffer_empty,
    "sender_blocked": _sender_blocked,
    "receiver_blocked": _receiver_blocked,
    "port_pair_prepared": _port_pair_prepared,
    "group_prepared": _group_prepared,
}


# -- textual expansion

class _Expander:
    def __init__(self, lib: MacroLib, net: InterlacedNet | None):
        self.lib = lib
        self.net = net
        self.ids = None
        if net is not None:
            self.ids = set(net.places) | set(net.transitions)

    def expand(self, text: str, bindings: dict, stack=(), depth=0) -> str:
        if depth > _MAX_DEPTH:
            raise MacroError("macro expansion too deep")
        out, pos = self._region(text, 0, bindings, stack, depth)
        if pos != len(text):
            raise MacroError(f"unbalanced ')' or ']' at offset {pos} in {text!r}")
        return out

    def _region(self, text, pos, bindings, stack, depth, stop_comma=False):
        """Expand until an unbalanced ')' or ']', a stopping ',', or the end."""
        out = []
        n = len(text)
        while pos < n:
            ch = text[pos]
            if text.startswith("[/", pos):
                end = text.find("/]", pos + 2)
                if end < 0:
                    raise MacroError(f"unterminated splice in {text!r}")
                out.append(self._splice(text[pos + 2 : end], bindings))
                pos = end + 2
                continue
            if ch in ")]":
                break
            if ch == "," and stop_comma:
                break
            if ch == "(":
                inner, pos = self._region(text, pos + 1, bindings, stack, depth)
                if pos >= n or text[pos] != ")":
                    raise MacroError(f"missing ')' in {text!r}")
                out.append("(" + inner + ")")
                pos += 1
                continue
            if ch == "[":
                inner, pos = self._region(text, pos + 1, bindings, stack, depth)
                if pos >= n or text[pos] != "]":
                    raise MacroError(f"missing ']' in {text!r}")
                out.append("[" + inner + "]")
                pos += 1
                continue
            m = _IDENT.match(text, pos)
            if m is None:
                out.append(ch)
                pos += 1
                continue
            name = m.group(0)
            pos = m.end()
            if name in _CTL_WORDS:
                out.append(name)
                continue
            if name in ("forall", "exists"):
                joined, pos = self._quantifier(
                    name, text, pos, bindings, stack, depth, stop_comma
                )
                out.append(joined)
                continue
            # names may run through splices: phil_[/i/], poss_[/p mod 2/]
            while text.startswith("[/", pos):
                end = text.find("/]", pos + 2)
                if end < 0:
                    raise MacroError(f"unterminated splice in {text!r}")
                name += self._splice(text[pos + 2 : end], bindings)
                pos = end + 2
                tail = _IDENT_CONT.match(text, pos)
                if tail is not None:
                    name += tail.group(0)
                    pos = tail.end()
            if pos < n and text[pos] == "[" and not text.startswith("[/", pos):
                args, pos = self._args(text, pos + 1, bindings, stack, depth)
                out.append(self._call(name, args, stack, depth))
                continue
            if name in bindings:
                out.append(str(bindings[name]))
            elif name in self.lib.defs:
                out.append(self._call(name, [], stack, depth))
            elif name in _BUILTINS:
                raise ArityMismatch(f"{name} takes 1 argument, got 0")
            else:
                out.append(name)
        return "".join(out), pos

    def _splice(self, expr, bindings):
        word = expr.strip()
        if word in bindings:
            return str(bindings[word])
        ints = {k: v for k, v in bindings.items() if isinstance(v, int)}
        try:
            return str(eval_expr(expr, ints))
        except PreprocessError as exc:
            raise MacroError(str(exc)) from None

    def _args(self, text, pos, bindings, stack, depth):
        """Comma-separated expanded argument list; pos starts past '['."""
        args = []
        while True:
            piece, pos = self._region(text, pos, bindings, stack, depth, stop_comma=True)
            args.append(piece.strip())
            if pos >= len(text):
                raise MacroError(f"missing ']' in {text!r}")
            if text[pos] == "]":
                return args, pos + 1
            pos += 1  # consume ','

    def _quantifier(self, kind, text, pos, bindings, stack, depth, stop_comma):
        m = _QUANT_HEAD.match(text, pos)
        if m is None:
            raise MacroError(f"bad {kind} header near offset {pos}")
        var = m.group(1)
        ints = {k: v for k, v in bindings.items() if isinstance(v, int)}
        try:
            lo = eval_expr(self.expand(m.group(2), bindings, stack, depth + 1), ints)
            hi = eval_expr(self.expand(m.group(3), bindings, stack, depth + 1), ints)
        except PreprocessError as exc:
            raise MacroError(str(exc)) from None
        if hi < lo:
            raise MacroError(f"{kind} {var}: empty range [{lo}, {hi}]")
        body_start = m.end()
        copies = []
        end = body_start
        for value in range(lo, hi + 1):
            inner = dict(bindings)
            inner[var] = value
            piece, end = self._region(text, body_start, inner, stack, depth, stop_comma)
            copies.append("(" + piece + ")")
        join = " & " if kind == "forall" else " | "
        return "(" + join.join(copies) + ")", end

    def _call(self, name, args, stack, depth):
        d = self.lib.defs.get(name)
        if d is not None:
            if name in stack:
                chain = " -> ".join((*stack, name))
                raise MacroError(f"recursive macro: {chain}")
            if len(args) != len(d.params):
                raise ArityMismatch(
                    f"{name} takes {len(d.params)} argument(s), got {len(args)}"
                )
            bound = {}
            for p, a in zip(d.params, args):
                bound[p] = int(a) if re.fullmatch(r"-?\d+", a) else a
            out, pos = self._region(d.body, 0, bound, (*stack, name), depth + 1)
            if pos != len(d.body):
                raise MacroError(f"unbalanced ')' or ']' in macro {name!r}")
            return "(" + out + ")"
        if name in _BUILTINS:
            if self.net is None:
                raise MacroError(f"built-in {name!r} needs a translated net")
            if len(args) != 1:
                raise ArityMismatch(f"{name} takes 1 argument, got {len(args)}")
            return _BUILTINS[name](self.net, args[0])
        rebuilt = f"{name}[{','.join(args)}]"
        if self.ids is not None and rebuilt not in self.ids:
            raise UnknownMacro(f"{rebuilt!r} is neither a macro nor a net node")
        return rebuilt


def expand_text(
    text: str,
    lib: MacroLib | None = None,
    net: InterlacedNet | None = None,
    bindings: dict | None = None,
) -> str:
    """Core CTL text with all macros, splices, and quantifiers expanded."""
    return _Expander(lib or MacroLib(), net).expand(text, dict(bindings or {}))


def expand_macros(
    text: str,
    lib: MacroLib | None = None,
    net: InterlacedNet | None = None,
    bindings: dict | None = None,
):
    """Parsed core formula of the expansion of `text`."""
    return parse_formula(expand_text(text, lib, net, bindings))
