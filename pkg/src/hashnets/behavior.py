"""Protocol behavior trees and stream semantics.

This module owns three things:

1. the action AST used inside unit protocols (sequence, interleaving,
   choice, the three repeat forms, conditionals, semaphore ops, port and
   collective activations);
2. stream value kinds (``Data`` and ``Eos(k)`` terminators), flattening of
   nested value trees, the legal successor relation between kinds, and
   three-valued evaluation of stream predicates;
3. ``enumerate_traces``: a small-step interpreter that enumerates the
   activation traces a protocol can produce.  Sequencing concatenates,
   interleaving shuffles, choice unions, semaphores follow the zero-initial
   counter discipline (a wait blocks until a matching signal; complete
   traces must end balanced).  The shuffle-closure operator is deliberately
   out of scope.

The interpreter is used as an independent oracle for the net translation:
the bounded terminal language of a translated single-unit net must equal
the oracle's complete-trace set.

A note on semaphore balance: the net's final-marking predicate only checks
the program-end place, so a protocol that terminates with a positive
semaphore counter still contributes to the net's terminal language, while
this oracle does not count it complete.  Protocols that leave semaphores
unbalanced are coordination bugs; keep test protocols balanced.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


class StreamError(Exception):
    pass


class DepthExceeded(StreamError):
    """A leaf of the value tree sits deeper than the nesting factor."""


class ScriptExhausted(StreamError):
    """A predicate consulted a port past the end of its kind script."""


class UnknownPort(StreamError):
    """A predicate referenced a port the evaluator knows nothing about."""


# ---------------------------------------------------------------------------
# Stream kinds


@dataclass(frozen=True, order=True)
class Kind:
    """A transmitted value kind: plain data or the end of a nesting level.

    ``level`` is None for data, otherwise the 0-based nesting level whose
    substream the marker terminates (0 = the whole stream).
    """

    level: int | None = None

    @property
    def is_data(self) -> bool:
        return self.level is None

    def __str__(self) -> str:
        return "DATA" if self.level is None else f"EOS{self.level}"

    def __repr__(self) -> str:
        return f"Kind({str(self)})"


DATA = Kind(None)


def Eos(level: int) -> Kind:
    if level < 0:
        raise ValueError(f"negative EOS level {level}")
    return Kind(level)


def kind_from_str(text: str) -> Kind:
    t = text.strip().upper()
    if t == "DATA":
        return DATA
    if t.startswith("EOS"):
        return Eos(int(t[3:]))
    raise ValueError(f"not a stream kind: {text!r}")


def kind_alphabet(n: int) -> tuple[Kind, ...]:
    """All kinds a port of nesting factor n can transmit."""
    if n <= 0:
        return ()
    return (DATA,) + tuple(Eos(k) for k in range(n))


def stream_flatten(tree: object, n: int) -> list[Kind]:
    """Flatten a nested value tree into its transmitted kind sequence.

    A substream at 0-based depth k (0 = the whole stream) is terminated by
    Eos(k); leaves sit exactly at depth n and emit Data; the whole stream
    therefore ends with Eos(0).  Substreams may be empty.  n = 0 means a
    plain non-stream value: the tree must be a single leaf.
    """
    if n < 0:
        raise ValueError("nesting factor must be >= 0")
    if n == 0:
        if isinstance(tree, (list, tuple)):
            raise DepthExceeded("nesting factor 0 admits only a single value")
        return [DATA]
    out: list[Kind] = []

    def walk(node: object, depth: int) -> None:
        if depth == n:
            if isinstance(node, (list, tuple)):
                raise DepthExceeded(f"list at depth {depth} exceeds nesting factor {n}")
            out.append(DATA)
            return
        if not isinstance(node, (list, tuple)):
            raise StreamError(f"leaf at depth {depth}, expected depth {n}")
        for child in node:
            walk(child, depth + 1)
        out.append(Eos(depth))

    walk(tree, 0)
    return out


def valid_successors(kind: Kind, n: int) -> frozenset[Kind]:
    """Kinds that may legally follow `kind` on a port of nesting factor n."""
    if n < 1:
        raise ValueError("successor relation needs a stream port (n >= 1)")
    if not kind.is_data and not 0 <= kind.level < n:
        raise ValueError(f"EOS level {kind.level} out of range for nesting factor {n}")
    if kind.is_data:
        return frozenset({DATA, Eos(n - 1)})
    k = kind.level
    if k == 0:
        return frozenset()
    return frozenset({DATA} | {Eos(j) for j in range(k - 1, n)})


# ---------------------------------------------------------------------------
# Stream predicates


class TriBool(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    FAIL = "fail"


@dataclass(frozen=True)
class Conjunction:
    """One disjunct: a conjunction of port variables, possibly bracketed.

    Bracketed conjunctions (written ``<a & b>``) demand agreement: if the
    member variables disagree the whole predicate evaluates to FAIL, by the
    identity not<a & ... & b> = not a & ... & not b.
    """

    ports: tuple[str, ...]
    bracketed: bool = False


@dataclass(frozen=True)
class StreamPredicate:
    """Disjunctive normal form over stream-port variables."""

    disjuncts: tuple[Conjunction, ...]

    def referenced_ports(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for c in self.disjuncts:
            for p in c.ports:
                seen.setdefault(p)
        return tuple(seen)


def evaluate_stream_predicate(
    pred: StreamPredicate,
    last: Mapping[str, Kind | None],
    d: int,
    *,
    missing_is_fail: bool = False,
) -> TriBool:
    """Three-valued predicate evaluation against last-transmitted kinds.

    A variable is true iff the port's last kind is Eos(i) with i <= d,
    where d is the loop depth of the predicate's site (0 = outermost).
    A port that never transmitted (last is None) valuates false, unless
    missing_is_fail is set, in which case the whole predicate FAILs.
    The predicate is TRUE when the DNF holds ignoring brackets, FAIL when
    it does not hold but some bracketed conjunction is mixed, else FALSE.
    """

    def var(port: str) -> bool | None:
        if port not in last:
            raise UnknownPort(f"predicate references unknown stream port '{port}'")
        kind = last[port]
        if kind is None:
            return None
        return (not kind.is_data) and kind.level <= d

    vals: dict[str, bool | None] = {p: var(p) for p in pred.referenced_ports()}
    if missing_is_fail and any(v is None for v in vals.values()):
        return TriBool.FAIL
    as_bool = {p: bool(v) for p, v in vals.items()}
    if any(all(as_bool[p] for p in c.ports) for c in pred.disjuncts):
        return TriBool.TRUE
    for c in pred.disjuncts:
        if c.bracketed and len({as_bool[p] for p in c.ports}) > 1:
            return TriBool.FAIL
    return TriBool.FALSE


# ---------------------------------------------------------------------------
# Action AST


class Action:
    __slots__ = ()


@dataclass(frozen=True)
class Skip(Action):
    pass


@dataclass(frozen=True)
class Seq(Action):
    actions: tuple[Action, ...]


@dataclass(frozen=True)
class Par(Action):
    actions: tuple[Action, ...]


@dataclass(frozen=True)
class Alt(Action):
    actions: tuple[Action, ...]


@dataclass(frozen=True)
class RepeatUntil(Action):
    body: Action
    predicate: StreamPredicate


@dataclass(frozen=True)
class RepeatCounter(Action):
    body: Action
    count: int


@dataclass(frozen=True)
class RepeatForever(Action):
    body: Action


@dataclass(frozen=True)
class If(Action):
    predicate: StreamPredicate
    then: Action
    orelse: Action


@dataclass(frozen=True)
class Signal(Action):
    sem: str


@dataclass(frozen=True)
class Wait(Action):
    sem: str


@dataclass(frozen=True)
class Activate(Action):
    """Activation of a port or port group; polarity '!' sends, '?' receives."""

    entity: str
    polarity: str  # "!" or "?"

    @property
    def symbol(self) -> str:
        return self.entity + self.polarity


@dataclass(frozen=True)
class Do(Action):
    """Engagement in a collective rendezvous; the symbol is the group id."""

    collective: str

    @property
    def symbol(self) -> str:
        return self.collective


def activations(action: Action) -> list[Action]:
    """All Activate/Do occurrences in evaluation order."""
    out: list[Action] = []

    def walk(a: Action) -> None:
        if isinstance(a, (Activate, Do)):
            out.append(a)
        elif isinstance(a, (Seq, Par, Alt)):
            for sub in a.actions:
                walk(sub)
        elif isinstance(a, (RepeatUntil, RepeatCounter, RepeatForever)):
            walk(a.body)
        elif isinstance(a, If):
            walk(a.then)
            walk(a.orelse)

    walk(action)
    return out


# ---------------------------------------------------------------------------
# Trace enumeration (the oracle)

_DONE = ("done",)
_FAILED = ("failed",)


def _term(a: Action, depth: int, groups: Mapping[str, tuple] | None = None) -> tuple:
    """Compile an Action into an immutable interpreter term.

    depth counts enclosing repeat-until loops; predicates capture the depth
    of their site so variable valuation can compare EOS levels against it.
    groups maps a group port id to ("any"|"all", member symbols); activating
    a group emits member symbols instead of its own.
    """
    if isinstance(a, Skip):
        return _DONE
    if isinstance(a, Seq):
        parts = tuple(_term(x, depth, groups) for x in a.actions)
        parts = tuple(p for p in parts if p != _DONE)
        if not parts:
            return _DONE
        return ("seq", parts) if len(parts) > 1 else parts[0]
    if isinstance(a, Par):
        parts = tuple(p for p in (_term(x, depth, groups) for x in a.actions) if p != _DONE)
        if not parts:
            return _DONE
        return ("par", parts) if len(parts) > 1 else parts[0]
    if isinstance(a, Alt):
        return ("alt", tuple(_term(x, depth, groups) for x in a.actions))
    if isinstance(a, RepeatUntil):
        body = _term(a.body, depth + 1, groups)
        return ("until", body, body, a.predicate, depth)
    if isinstance(a, RepeatCounter):
        if a.count < 1:
            raise ValueError("repeat counter must be >= 1")
        body = _term(a.body, depth, groups)
        return ("counter", body, body, a.count)
    if isinstance(a, RepeatForever):
        body = _term(a.body, depth, groups)
        return ("forever", body, body)
    if isinstance(a, If):
        return (
            "if",
            a.predicate,
            _term(a.then, depth, groups),
            _term(a.orelse, depth, groups),
            depth,
        )
    if isinstance(a, Signal):
        return ("sig", a.sem)
    if isinstance(a, Wait):
        return ("wait", a.sem)
    if isinstance(a, Activate):
        if groups and a.entity in groups:
            gkind, syms = groups[a.entity]
            return ("grp", gkind, a.entity, a.polarity, tuple(syms))
        return ("act", a.entity, a.polarity)
    if isinstance(a, Do):
        return ("act", a.collective, "")
    raise TypeError(f"not an Action: {a!r}")


@dataclass(frozen=True)
class TraceSet:
    complete: frozenset[tuple[str, ...]]
    prefixes: frozenset[tuple[str, ...]]

    def words(self) -> frozenset[tuple[str, ...]]:
        return self.complete | self.prefixes


class _Engine:
    """DFS over interpreter states, collecting bounded words."""

    def __init__(
        self,
        scripts: Mapping[str, Sequence[Kind]],
        nestings: Mapping[str, int],
        missing_is_fail: bool,
    ):
        self.scripts = scripts
        self.nestings = nestings
        self.missing_is_fail = missing_is_fail

    # port state: mapping port -> (activation count, last kind or None)

    def _activate(self, ports: tuple, entity: str) -> list[tuple]:
        """Successor port-state tuples after one activation of entity."""
        state = dict(ports)
        count, _last = state.get(entity, (0, None))
        n = self.nestings.get(entity, 0)
        if n == 0:
            state[entity] = (count + 1, None)
            return [tuple(sorted(state.items()))]
        if entity in self.scripts:
            script = self.scripts[entity]
            last = script[count] if count < len(script) else _EXHAUSTED
            state[entity] = (count + 1, last)
            return [tuple(sorted(state.items()))]
        outs = []
        for kind in kind_alphabet(n):
            s2 = dict(state)
            s2[entity] = (count + 1, kind)
            outs.append(tuple(sorted(s2.items())))
        return outs

    def _evaluate(self, pred: StreamPredicate, ports: tuple, d: int) -> TriBool:
        state = dict(ports)
        last: dict[str, Kind | None] = {}
        for p in pred.referenced_ports():
            if p not in self.nestings or self.nestings[p] == 0:
                raise UnknownPort(f"predicate references non-stream port '{p}'")
            count, kind = state.get(p, (0, None))
            if kind is _EXHAUSTED:
                raise ScriptExhausted(
                    f"predicate consulted port '{p}' past its script (activation {count})"
                )
            last[p] = kind
        return evaluate_stream_predicate(pred, last, d, missing_is_fail=self.missing_is_fail)

    def steps(self, term: tuple, sems: tuple, ports: tuple) -> list[tuple[str | None, tuple, tuple, tuple]]:
        """All one-step successors: (symbol, term', sems', ports')."""
        kind = term[0]
        if kind in ("done", "failed"):
            return []
        if kind == "seq":
            parts = term[1]
            out = []
            for sym, t2, s2, p2 in self.steps(parts[0], sems, ports):
                rest = parts[1:] if t2 == _DONE else (t2,) + parts[1:]
                if t2 == _FAILED:
                    nt = _FAILED
                elif not rest:
                    nt = _DONE
                elif len(rest) == 1:
                    nt = rest[0]
                else:
                    nt = ("seq", rest)
                out.append((sym, nt, s2, p2))
            return out
        if kind == "par":
            parts = term[1]
            out = []
            for i, part in enumerate(parts):
                for sym, t2, s2, p2 in self.steps(part, sems, ports):
                    if t2 == _FAILED:
                        nt = _FAILED
                    else:
                        rest = parts[:i] + ((t2,) if t2 != _DONE else ()) + parts[i + 1 :]
                        if not rest:
                            nt = _DONE
                        elif len(rest) == 1:
                            nt = rest[0]
                        else:
                            nt = ("par", rest)
                    out.append((sym, nt, s2, p2))
            return out
        if kind == "alt":
            return [(None, branch, sems, ports) for branch in term[1]]
        if kind == "until":
            cur, tmpl, pred, d = term[1], term[2], term[3], term[4]
            if cur != _DONE:
                out = []
                for sym, t2, s2, p2 in self.steps(cur, sems, ports):
                    nt = _FAILED if t2 == _FAILED else ("until", t2, tmpl, pred, d)
                    out.append((sym, nt, s2, p2))
                return out
            verdict = self._evaluate(pred, ports, d)
            if verdict is TriBool.TRUE:
                return [(None, _DONE, sems, ports)]
            if verdict is TriBool.FALSE:
                return [(None, ("until", tmpl, tmpl, pred, d), sems, ports)]
            return [(None, _FAILED, sems, ports)]
        if kind == "counter":
            cur, tmpl, k = term[1], term[2], term[3]
            if cur != _DONE:
                out = []
                for sym, t2, s2, p2 in self.steps(cur, sems, ports):
                    nt = _FAILED if t2 == _FAILED else ("counter", t2, tmpl, k)
                    out.append((sym, nt, s2, p2))
                return out
            if k > 1:
                return [(None, ("counter", tmpl, tmpl, k - 1), sems, ports)]
            return [(None, _DONE, sems, ports)]
        if kind == "forever":
            cur, tmpl = term[1], term[2]
            if cur != _DONE:
                out = []
                for sym, t2, s2, p2 in self.steps(cur, sems, ports):
                    nt = _FAILED if t2 == _FAILED else ("forever", t2, tmpl)
                    out.append((sym, nt, s2, p2))
                return out
            return [(None, ("forever", tmpl, tmpl), sems, ports)]
        if kind == "if":
            pred, then, orelse, d = term[1], term[2], term[3], term[4]
            verdict = self._evaluate(pred, ports, d)
            if verdict is TriBool.TRUE:
                return [(None, then, sems, ports)]
            if verdict is TriBool.FALSE:
                return [(None, orelse, sems, ports)]
            return [(None, _FAILED, sems, ports)]
        if kind == "sig":
            s = dict(sems)
            s[term[1]] = s.get(term[1], 0) + 1
            return [(None, _DONE, tuple(sorted(s.items())), ports)]
        if kind == "wait":
            s = dict(sems)
            if s.get(term[1], 0) <= 0:
                return []
            s[term[1]] -= 1
            return [(None, _DONE, tuple(sorted(s.items())), ports)]
        if kind == "act":
            entity, polarity = term[1], term[2]
            sym = entity + polarity
            return [(sym, _DONE, sems, p2) for p2 in self._activate(ports, entity)]
        # group activation: one kind per activation recorded under the group
        # id; output groups fix the kind before any member communicates,
        # input groups after the last member has.
        if kind == "grp":
            gkind, gid, pol, syms = term[1], term[2], term[3], term[4]
            if pol == "!":
                return [
                    (None, ("grpout", gkind, syms), sems, p2)
                    for p2 in self._activate(ports, gid)
                ]
            return self.steps(("grpin", gkind, gid, syms), sems, ports)
        if kind == "grpout":
            gkind, syms = term[1], term[2]
            if gkind == "any":
                return [(sym, _DONE, sems, ports) for sym in syms]
            out = []
            for i, sym in enumerate(syms):
                rest = syms[:i] + syms[i + 1 :]
                nt = ("grpout", gkind, rest) if rest else _DONE
                out.append((sym, nt, sems, ports))
            return out
        if kind == "grpin":
            gkind, gid, syms = term[1], term[2], term[3]
            if gkind == "any":
                return [(sym, ("grpinrec", gid), sems, ports) for sym in syms]
            out = []
            for i, sym in enumerate(syms):
                rest = syms[:i] + syms[i + 1 :]
                nt = ("grpin", gkind, gid, rest) if rest else ("grpinrec", gid)
                out.append((sym, nt, sems, ports))
            return out
        if kind == "grpinrec":
            return [(None, _DONE, sems, p2) for p2 in self._activate(ports, term[1])]
        raise AssertionError(f"unhandled term {term!r}")


class _Exhausted:
    def __repr__(self) -> str:
        return "<exhausted>"


_EXHAUSTED = _Exhausted()


def enumerate_traces(
    protocol,
    scripts: Mapping[str, Sequence[Kind | str]] | None = None,
    max_len: int = 8,
    *,
    nestings: Mapping[str, int] | None = None,
    semaphores: Iterable[str] = (),
    groups: Mapping[str, tuple] | None = None,
    missing_is_fail: bool = False,
) -> TraceSet:
    """Enumerate activation traces of a protocol up to max_len symbols.

    `protocol` is an Action or any object with .protocol / .semaphores /
    .stream_nestings().  `scripts` fixes the kind transmitted by each listed
    stream port at its k-th activation; ports not listed transmit a freely
    chosen kind at every activation.  `groups` maps group id to
    ("any"|"all", member symbols); derived from a Unit's port declarations
    when one is passed.  Returns complete traces (protocol finished with all
    semaphores balanced) and the proper prefixes of every run explored, cut
    off at max_len.
    """
    if hasattr(protocol, "protocol"):
        unit = protocol
        if nestings is None and hasattr(unit, "stream_nestings"):
            nestings = unit.stream_nestings()
        if not semaphores and hasattr(unit, "semaphores"):
            semaphores = [s.id if hasattr(s, "id") else s for s in unit.semaphores]
        if groups is None and hasattr(unit, "ports"):
            mark = {"in": "?", "out": "!"}
            groups = {
                p.id: (p.group.kind, tuple(m.id + mark[p.direction] for m in p.group.members))
                for p in unit.ports
                if getattr(p, "group", None) is not None
            }
        protocol = unit.protocol
    nestings = dict(nestings or {})
    norm_scripts: dict[str, tuple[Kind, ...]] = {}
    for port, seq in (scripts or {}).items():
        norm_scripts[port] = tuple(k if isinstance(k, Kind) else kind_from_str(k) for k in seq)

    engine = _Engine(norm_scripts, nestings, missing_is_fail)
    root = _term(protocol, 0, groups)
    sems0 = tuple(sorted((s, 0) for s in set(semaphores)))
    complete: set[tuple[str, ...]] = set()
    prefixes: set[tuple[str, ...]] = set()
    seen: set[tuple] = set()

    def balanced(sems: tuple) -> bool:
        return all(v == 0 for _s, v in sems)

    # silent steps allowed between two symbol emissions; a loop body with no
    # activation would otherwise spin forever without growing the word
    quiet_cap = 64 + 16 * len(repr(root))

    def dfs(term: tuple, sems: tuple, ports: tuple, word: tuple[str, ...], quiet: int) -> None:
        key = (term, sems, ports, word)
        if key in seen:
            return
        seen.add(key)
        if term == _DONE and balanced(sems):
            complete.add(word)
        else:
            prefixes.add(word)
        if quiet > quiet_cap:
            raise RuntimeError("protocol performs unbounded silent steps (loop without activations)")
        budget_left = len(word) < max_len
        for sym, t2, s2, p2 in engine.steps(term, sems, ports):
            if sym is None:
                dfs(t2, s2, p2, word, quiet + 1)
            elif budget_left:
                dfs(t2, s2, p2, word + (sym,), 0)

    dfs(root, sems0, (), (), 0)
    complete_frozen = frozenset(complete)
    return TraceSet(complete_frozen, frozenset(prefixes - complete_frozen))
