"""CTL model checking over bounded reachability graphs.

Path quantifiers range over maximal firing sequences: a path stops only at
a dead marking, so EG f holds at a dead f-state and AF f collapses to f
there.  On a truncated graph verdicts are three-valued: frontier states
(discovered but never expanded) have unknown successors, so every fixpoint
tracks a definite set and a possible set.  A `true` or `false` verdict is
definite regardless of where exploration stopped; `unknown` means the
state bound got in the way.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from hashnets.petri.reach import ReachGraph


class CtlError(Exception):
    pass


class ParseError(CtlError):
    pass


class TruncatedGraph(CtlError):
    pass


# -- formula tree

@dataclass(frozen=True)
class Atom:
    place: str
    op: str = ">="  # ">=" | "<=" | "="
    count: int = 1

    def __str__(self) -> str:
        if self.op == ">=" and self.count == 1:
            return self.place
        return f"{self.place} {self.op} {self.count}"


@dataclass(frozen=True)
class DeadTransition:
    """True in states where the transition is not enabled."""

    transition: str

    def __str__(self) -> str:
        return f"dead({self.transition})"


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not:
    sub: object

    def __str__(self) -> str:
        return f"!({self.sub})"


@dataclass(frozen=True)
class And:
    parts: tuple

    def __str__(self) -> str:
        return "(" + " & ".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class Or:
    parts: tuple

    def __str__(self) -> str:
        return "(" + " | ".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class Implies:
    left: object
    right: object

    def __str__(self) -> str:
        return f"({self.left} -> {self.right})"


def _unary(name):
    @dataclass(frozen=True)
    class Op:
        sub: object

        def __str__(self) -> str:
            return f"{name}({self.sub})"

    Op.__name__ = Op.__qualname__ = name
    return Op


def _binary(name):
    @dataclass(frozen=True)
    class Op:
        left: object
        right: object

        def __str__(self) -> str:
            return f"{name[0]}[({self.left}) U ({self.right})]"

    Op.__name__ = Op.__qualname__ = name
    return Op


EX = _unary("EX")
AX = _unary("AX")
EF = _unary("EF")
AF = _unary("AF")
EG = _unary("EG")
AG = _unary("AG")
EU = _binary("EU")
AU = _binary("AU")


# -- parser

_KEYWORDS = {
    "EX", "AX", "EF", "AF", "EG", "AG", "E", "A", "U",
    "true", "false", "not", "dead", "forall", "exists", "in",
}
_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<cmp>>=|<=|==|=)|(?P<int>\d+)"
    r"|(?P<ref>[A-Za-z_][A-Za-z0-9_.']*(?:\[[^\[\]]*\])?)"
    r"|(?P<punct>[()\[\]!&|,]))"
)


def _tokenize(text: str) -> list:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"bad character {text[pos]!r} at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "ref":
            head = val.split("[", 1)[0]
            if head in _KEYWORDS:
                out.append(("kw", head))
                if "[" in val:
                    # keyword brackets are structure, not part of a name
                    rest = val[len(head):]
                    out.append(("punct", "["))
                    tail = rest[1:-1]
                    if tail:
                        out.extend(_tokenize(tail))
                    out.append(("punct", "]"))
                continue
        out.append((kind, val))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", "")

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind, val=None):
        tok = self.take()
        if tok[0] != kind or (val is not None and tok[1] != val):
            raise ParseError(f"expected {val or kind}, got {tok[1]!r}")
        return tok

    def formula(self):
        left = self.disj()
        if self.peek() == ("arrow", "->"):
            self.take()
            return Implies(left, self.formula())
        return left

    def disj(self):
        parts = [self.conj()]
        while self.peek() == ("punct", "|"):
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.peek() == ("punct", "&"):
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        kind, val = self.peek()
        if (kind, val) == ("punct", "!") or (kind, val) == ("kw", "not"):
            self.take()
            return Not(self.unary())
        if kind == "kw":
            if val in ("EX", "AX", "EF", "AF", "EG", "AG"):
                self.take()
                op = {"EX": EX, "AX": AX, "EF": EF, "AF": AF, "EG": EG, "AG": AG}[val]
                return op(self.bracketed())
            if val in ("E", "A"):
                self.take()
                self.expect("punct", "[")
                left = self.formula()
                self.expect("kw", "U")
                right = self.formula()
                self.expect("punct", "]")
                return (EU if val == "E" else AU)(left, right)
            if val == "dead":
                self.take()
                self.expect("punct", "(")
                ref = self.expect("ref")
                self.expect("punct", ")")
                return DeadTransition(ref[1])
            if val == "true":
                self.take()
                return TRUE
            if val == "false":
                self.take()
                return FALSE
            if val in ("forall", "exists", "in"):
                raise ParseError(f"'{val}' is macro syntax; expand macros first")
        return self.primary()

    def bracketed(self):
        if self.peek() == ("punct", "["):
            self.take()
            inner = self.formula()
            self.expect("punct", "]")
            return inner
        return self.unary()

    def primary(self):
        kind, val = self.take()
        if (kind, val) == ("punct", "("):
            inner = self.formula()
            self.expect("punct", ")")
            return inner
        if kind == "ref":
            if self.peek()[0] == "cmp":
                op = self.take()[1]
                if op == "==":
                    op = "="
                count = int(self.expect("int")[1])
                return Atom(val, op, count)
            return Atom(val)
        raise ParseError(f"unexpected {val!r}")


def parse_formula(text: str):
    p = _Parser(_tokenize(text))
    f = p.formula()
    if p.peek()[0] != "end":
        raise ParseError(f"trailing input at {p.peek()[1]!r}")
    return f


# -- evaluation: 0 = false, 1 = unknown, 2 = true (Kleene)

_F, _U, _T = 0, 1, 2


class _Eval:
    def __init__(self, g: ReachGraph):
        self.g = g
        g._ensure_succ()
        self.n = g.n_states
        self.expanded = g.expanded
        self.memo: dict = {}
        self.p_index = {p: k for k, p in enumerate(g.place_ids)}
        self.t_index = {t: k for k, t in enumerate(g.transition_ids)}

    def succ_range(self, s):
        return range(self.g._succ_off[s], self.g._succ_off[s + 1])

    def values(self, f) -> bytearray:
        got = self.memo.get(f)
        if got is None:
            got = self.memo[f] = self._compute(f)
        return got

    def _compute(self, f) -> bytearray:
        g, n = self.g, self.n
        if isinstance(f, Const):
            return bytearray([_T if f.value else _F]) * n
        if isinstance(f, Atom):
            k = self.p_index.get(f.place)
            if k is None:
                raise CtlError(f"formula references unknown place {f.place!r}")
            out = bytearray(n)
            cmp = {">=": lambda v, c: v >= c, "<=": lambda v, c: v <= c,
                   "=": lambda v, c: v == c}[f.op]
            c = f.count
            for s in range(n):
                out[s] = _T if cmp(g.states[s][k], c) else _F
            return out
        if isinstance(f, DeadTransition):
            ti = self.t_index.get(f.transition)
            if ti is None:
                raise CtlError(f"formula references unknown transition {f.transition!r}")
            out = bytearray([_U]) * n
            et = g.edge_t
            for s in range(self.expanded):
                out[s] = _F if any(et[e] == ti for e in self.succ_range(s)) else _T
            return out
        if isinstance(f, Not):
            return bytearray(2 - v for v in self.values(f.sub))
        if isinstance(f, And):
            vals = [self.values(p) for p in f.parts]
            first, rest = vals[0], vals[1:]
            return bytearray(min(v, *(r[s] for r in rest)) for s, v in enumerate(first))
        if isinstance(f, Or):
            vals = [self.values(p) for p in f.parts]
            first, rest = vals[0], vals[1:]
            return bytearray(max(v, *(r[s] for r in rest)) for s, v in enumerate(first))
        if isinstance(f, Implies):
            return self.values(Or((Not(f.left), f.right)))
        if isinstance(f, EX):
            return self._ex(self.values(f.sub))
        if isinstance(f, AX):
            return self.values(Not(EX(Not(f.sub))))
        if isinstance(f, EF):
            return self.values(EU(TRUE, f.sub))
        if isinstance(f, AG):
            return self.values(Not(EU(TRUE, Not(f.sub))))
        if isinstance(f, AF):
            return self.values(Not(EG(Not(f.sub))))
        if isinstance(f, EU):
            return self._eu(self.values(f.left), self.values(f.right))
        if isinstance(f, EG):
            return self._eg(self.values(f.sub))
        if isinstance(f, AU):
            a, b = f.left, f.right
            return self.values(
                Not(Or((EU(Not(b), And((Not(a), Not(b)))), EG(Not(b)))))
            )
        raise CtlError(f"cannot evaluate {type(f).__name__}")

    def _ex(self, a: bytearray) -> bytearray:
        out = bytearray([_U]) * self.n
        dst = self.g.edge_dst
        for s in range(self.expanded):
            best = _F
            for e in self.succ_range(s):
                v = a[dst[e]]
                if v > best:
                    best = v
                    if best == _T:
                        break
            out[s] = best
        return out

    def _eu(self, va: bytearray, vb: bytearray) -> bytearray:
        g, n, expanded = self.g, self.n, self.expanded
        g._ensure_pred()
        src = g.edge_src
        # definite set: b holds, or a holds and some successor is definite
        sure = bytearray(n)
        work = []
        for s in range(n):
            if vb[s] == _T:
                sure[s] = 1
                work.append(s)
        while work:
            s = work.pop()
            for k in range(g._pred_off[s], g._pred_off[s + 1]):
                p = src[g._pred_eidx[k]]
                if not sure[p] and va[p] == _T:
                    sure[p] = 1
                    work.append(p)
        # possible set: optimistic about unknowns and unexpanded frontiers
        maybe = bytearray(n)
        work = []
        for s in range(n):
            if vb[s] >= _U or (s >= expanded and va[s] >= _U):
                maybe[s] = 1
                work.append(s)
        while work:
            s = work.pop()
            for k in range(g._pred_off[s], g._pred_off[s + 1]):
                p = src[g._pred_eidx[k]]
                if not maybe[p] and va[p] >= _U:
                    maybe[p] = 1
                    work.append(p)
        return bytearray(
            _T if sure[s] else (_U if maybe[s] else _F) for s in range(n)
        )

    def _eg(self, vf: bytearray) -> bytearray:
        g, n, expanded = self.g, self.n, self.expanded
        g._ensure_pred()
        src, dst = g.edge_src, g.edge_dst

        def gfp(member) -> bytearray:
            # keep s while it has a kept successor or needs none
            inside = bytearray(n)
            deg = [0] * n
            for s in range(n):
                if not member(s):
                    continue
                if s >= expanded or self.g._succ_off[s] == self.g._succ_off[s + 1]:
                    inside[s] = 2  # frontier or dead: self-sufficient
                    continue
                cnt = sum(1 for e in self.succ_range(s) if member(dst[e]))
                if cnt:
                    inside[s] = 1
                    deg[s] = cnt
            removal = [s for s in range(n) if member(s) and not inside[s]]
            while removal:
                s = removal.pop()
                for k in range(g._pred_off[s], g._pred_off[s + 1]):
                    p = src[g._pred_eidx[k]]
                    if inside[p] == 1:
                        deg[p] -= 1
                        if deg[p] == 0:
                            inside[p] = 0
                            removal.append(p)
            return inside

        sure = gfp(lambda s: vf[s] == _T and s < expanded)
        maybe = gfp(lambda s: vf[s] >= _U)
        return bytearray(
            _T if sure[s] else (_U if maybe[s] else _F) for s in range(n)
        )


# -- witness extraction

def _walk_eu(ev: _Eval, va, vb, veu) -> list:
    """Shortest-in-region path of transition ids from state 0 to a b-state."""
    g = ev.g
    if vb[0] == _T:
        return []
    g._ensure_pred()
    dist = {s: 0 for s in range(ev.n) if vb[s] == _T}
    frontier = list(dist)
    while frontier:
        nxt = []
        for s in frontier:
            for k in range(g._pred_off[s], g._pred_off[s + 1]):
                e = g._pred_eidx[k]
                p = g.edge_src[e]
                if p not in dist and veu[p] == _T and va[p] == _T:
                    dist[p] = dist[s] + 1
                    nxt.append(p)
        frontier = nxt
    path = []
    s = 0
    while vb[s] != _T:
        step = None
        for e in ev.succ_range(s):
            d = g.edge_dst[e]
            if d in dist and dist[d] < dist[s]:
                step = (e, d)
                break
        if step is None:  # unreachable if the fixpoint is sound
            return path
        path.append(g.transition_ids[g.edge_t[step[0]]])
        s = step[1]
    return path


def _walk_eg(ev: _Eval, veg) -> list:
    g = ev.g
    seen = set()
    path = []
    s = 0
    while s not in seen:
        seen.add(s)
        if s >= ev.expanded or g._succ_off[s] == g._succ_off[s + 1]:
            break
        step = None
        for e in ev.succ_range(s):
            if veg[g.edge_dst[e]] == _T:
                step = e
                break
        if step is None:
            break
        path.append(g.transition_ids[g.edge_t[step]])
        s = g.edge_dst[step]
    return path


def _witness(ev: _Eval, f, verdict: int):
    """Path for a true existential or a false universal top operator."""
    if verdict == _T:
        if isinstance(f, EX):
            va = ev.values(f.sub)
            for e in ev.succ_range(0):
                if va[ev.g.edge_dst[e]] == _T:
                    return [ev.g.transition_ids[ev.g.edge_t[e]]]
        if isinstance(f, EF):
            f = EU(TRUE, f.sub)
        if isinstance(f, EU):
            return _walk_eu(ev, ev.values(f.left), ev.values(f.right), ev.values(f))
        if isinstance(f, EG):
            return _walk_eg(ev, ev.values(f))
        return None
    if verdict != _F:
        return None
    if isinstance(f, AX):
        return _witness(ev, EX(Not(f.sub)), _T)
    if isinstance(f, AG):
        return _witness(ev, EF(Not(f.sub)), _T)
    if isinstance(f, AF):
        return _witness(ev, EG(Not(f.sub)), _T)
    if isinstance(f, AU):
        a, b = f.left, f.right
        until = EU(Not(b), And((Not(a), Not(b))))
        if ev.values(until)[0] == _T:
            return _witness(ev, until, _T)
        return _witness(ev, EG(Not(b)), _T)
    return None


@dataclass
class CheckResult:
    formula: object
    verdict: str  # "true" | "false" | "unknown"
    path: list | None
    truncated: bool

    def as_dict(self) -> dict:
        return {
            "formula": str(self.formula),
            "verdict": self.verdict,
            "path": self.path,
            "truncated": self.truncated,
        }


_VERDICT = {_F: "false", _U: "unknown", _T: "true"}


def check_ctl(g: ReachGraph, f, strict: bool = False) -> CheckResult:
    """Verdict of f at the initial marking, with a witness path when one exists.

    The path is a firing sequence from M0: a witness for a true existential
    top operator, a counterexample for a false universal one.
    """
    if strict and g.truncated:
        raise TruncatedGraph(
            f"graph truncated at {g.n_states} states; rerun with a higher bound"
        )
    if isinstance(f, str):
        f = parse_formula(f)
    if g.n_states == 0:
        raise CtlError("empty reachability graph")
    ev = _Eval(g)
    verdict = ev.values(f)[0]
    return CheckResult(f, _VERDICT[verdict], _witness(ev, f, verdict), g.truncated)
