"""Interlaced labelled place/transition nets.

A net is a bipartite graph of places and transitions with weighted arcs, an
initial marking, and an optional final-marking predicate.  Nodes carry
qualifier sets (tuples of atoms); `union` composes slices componentwise and
`unfold` quotients nodes whose qualifier sets intersect, which is how
separately translated slices get identified into one flat net.

Transition labels: the empty string is the silent label; silent firings do
not contribute to net languages.  Reads of a place (predicate tests) are
encoded as take-and-return arc pairs since plain P/T nets have no read
arcs; between firings all invariant sums hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping


class NetError(Exception):
    pass


class LabelConflict(NetError):
    """The same transition id carries two different visible labels."""


class SortClash(NetError):
    """A place and a transition share a qualifier."""


class UnknownTransition(NetError):
    pass


class NotEnabled(NetError):
    pass


Qualifier = tuple
Marking = dict  # place id -> positive count; absent means 0


@dataclass(frozen=True)
class Place:
    id: str
    qualifiers: frozenset = frozenset()


@dataclass(frozen=True)
class Transition:
    id: str
    label: str = ""  # "" = silent
    qualifiers: frozenset = frozenset()


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    weight: int = 1


@dataclass(frozen=True)
class FinalPredicate:
    """Conjunction of per-place atoms; op is ">=" or "==" against count."""

    atoms: tuple  # of (place id, op, count)

    def satisfied(self, marking: Mapping[str, int]) -> bool:
        for place, op, count in self.atoms:
            have = marking.get(place, 0)
            if op == ">=":
                if have < count:
                    return False
            elif op == "==":
                if have != count:
                    return False
            else:
                raise ValueError(f"bad final-predicate op {op!r}")
        return True

    def conjoin(self, other: "FinalPredicate | None") -> "FinalPredicate":
        if other is None:
            return self
        return FinalPredicate(self.atoms + tuple(a for a in other.atoms if a not in self.atoms))


@dataclass(frozen=True)
class InterlacedNet:
    places: dict  # id -> Place
    transitions: dict  # id -> Transition
    arcs: frozenset  # of Arc
    m0: dict  # id -> count, sparse
    final: FinalPredicate | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        overlap = self.places.keys() & self.transitions.keys()
        if overlap:
            raise NetError(f"ids used as both place and transition: {sorted(overlap)[:3]}")
        for a in self.arcs:
            if a.weight < 1:
                raise NetError(f"arc {a.src}->{a.dst} has weight {a.weight}")
            p2t = a.src in self.places and a.dst in self.transitions
            t2p = a.src in self.transitions and a.dst in self.places
            if not (p2t or t2p):
                raise NetError(f"arc {a.src}->{a.dst} does not join a place and a transition")
        for p in self.m0:
            if p not in self.places:
                raise NetError(f"initial marking on unknown place {p}")

    # effective weights: parallel arcs between the same pair add up

    def pre(self, t: str) -> dict:
        """place id -> total input weight of transition t."""
        w: dict = {}
        for a in self.arcs:
            if a.dst == t:
                w[a.src] = w.get(a.src, 0) + a.weight
        return w

    def post(self, t: str) -> dict:
        w: dict = {}
        for a in self.arcs:
            if a.src == t:
                w[a.dst] = w.get(a.dst, 0) + a.weight
        return w

    def initial_marking(self) -> Marking:
        return dict(self.m0)

    def sorted_places(self) -> list:
        return sorted(self.places)

    def sorted_transitions(self) -> list:
        return sorted(self.transitions)


class NetBuilder:
    """Mutable accumulator for one slice; build() freezes it.

    Re-adding the same place id merges qualifiers and adds marking;
    re-adding a transition id merges qualifiers and must agree on the
    label (one side may be silent).  Duplicate identical arcs collapse.
    """

    def __init__(self):
        self._places: dict = {}
        self._place_quals: dict = {}
        self._marking: dict = {}
        self._transitions: dict = {}
        self._trans_quals: dict = {}
        self._arcs: set = set()
        self.final: FinalPredicate | None = None
        self.meta: dict = {}

    def place(self, pid: str, qualifiers: Iterable[Qualifier] = (), marking: int = 0) -> str:
        if pid in self._transitions:
            raise NetError(f"id {pid} already used for a transition")
        self._place_quals.setdefault(pid, set()).update(map(tuple, qualifiers))
        self._marking[pid] = self._marking.get(pid, 0) + marking
        self._places[pid] = True
        return pid

    def transition(self, tid: str, label: str = "", qualifiers: Iterable[Qualifier] = ()) -> str:
        if tid in self._places:
            raise NetError(f"id {tid} already used for a place")
        old = self._transitions.get(tid)
        if old is not None and old and label and old != label:
            raise LabelConflict(f"transition {tid}: label {old!r} vs {label!r}")
        self._transitions[tid] = label or (old or "")
        self._trans_quals.setdefault(tid, set()).update(map(tuple, qualifiers))
        return tid

    def arc(self, src: str, dst: str, weight: int = 1) -> None:
        self._arcs.add(Arc(src, dst, weight))

    def read_arc(self, place: str, t: str, weight: int = 1) -> None:
        """Predicate test: take-and-return pair."""
        self.arc(place, t, weight)
        self.arc(t, place, weight)

    def include(self, net: InterlacedNet) -> None:
        for p in net.places.values():
            self.place(p.id, p.qualifiers, net.m0.get(p.id, 0))
        for t in net.transitions.values():
            self.transition(t.id, t.label, t.qualifiers)
        for a in net.arcs:
            self.arc(a.src, a.dst, a.weight)
        if net.final is not None:
            self.final = net.final if self.final is None else net.final.conjoin(self.final)
        self.meta.update(net.meta)

    def build(self) -> InterlacedNet:
        places = {
            pid: Place(pid, frozenset(self._place_quals.get(pid, ())))
            for pid in self._places
        }
        transitions = {
            tid: Transition(tid, label, frozenset(self._trans_quals.get(tid, ())))
            for tid, label in self._transitions.items()
        }
        m0 = {p: c for p, c in self._marking.items() if c > 0}
        return InterlacedNet(places, transitions, frozenset(self._arcs), m0, self.final, dict(self.meta))


def empty_net() -> InterlacedNet:
    return InterlacedNet({}, {}, frozenset(), {})


def union(a: InterlacedNet, b: InterlacedNet) -> InterlacedNet:
    """Componentwise union; shared place markings add pointwise."""
    nb = NetBuilder()
    nb.include(a)
    nb.include(b)
    return nb.build()


def union_all(nets: Iterable[InterlacedNet]) -> InterlacedNet:
    nb = NetBuilder()
    for n in nets:
        nb.include(n)
    return nb.build()


def _merged_label(labels: Iterable[str]) -> str:
    """Visible labels of merged transitions: outputs first, then inputs."""
    uniq = sorted({l for l in labels if l})
    outs = [l for l in uniq if l.endswith("!")]
    ins = [l for l in uniq if l.endswith("?")]
    rest = [l for l in uniq if not l.endswith(("!", "?"))]
    return "".join(outs + ins + rest)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        if p != x:
            p = self.parent[x] = self.find(p)
        return p

    def join(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def unfold(net: InterlacedNet) -> InterlacedNet:
    """Quotient nodes whose qualifier sets intersect (same sort only).

    Merged node id is the lexicographic minimum of the class; qualifier
    sets union; markings of merged places sum; arc weights between merged
    endpoints sum over distinct pre-image arcs.
    """
    qual_owner: dict = {}  # qualifier -> (sort, representative id)
    uf = _UnionFind()
    for pid, p in net.places.items():
        uf.find(pid)
        for q in p.qualifiers:
            sort, owner = qual_owner.setdefault(q, ("P", pid))
            if sort != "P":
                raise SortClash(f"qualifier {q!r} used by place {pid} and transition {owner}")
            uf.join(owner, pid)
    for tid, t in net.transitions.items():
        uf.find(tid)
        for q in t.qualifiers:
            sort, owner = qual_owner.setdefault(q, ("T", tid))
            if sort != "T":
                raise SortClash(f"qualifier {q!r} used by transition {tid} and place {owner}")
            uf.join(owner, tid)

    rep = {x: uf.find(x) for x in list(uf.parent)}

    classes: dict = {}
    for x, r in rep.items():
        classes.setdefault(r, []).append(x)

    places: dict = {}
    m0: dict = {}
    for r, members in classes.items():
        if r not in net.places:
            continue
        quals = frozenset(q for m in members for q in net.places[m].qualifiers)
        places[r] = Place(r, quals)
        total = sum(net.m0.get(m, 0) for m in members)
        if total:
            m0[r] = total

    transitions: dict = {}
    for r, members in classes.items():
        if r not in net.transitions:
            continue
        quals = frozenset(q for m in members for q in net.transitions[m].qualifiers)
        transitions[r] = Transition(r, _merged_label(net.transitions[m].label for m in members), quals)

    arc_weight: dict = {}
    for a in net.arcs:
        key = (rep[a.src], rep[a.dst])
        arc_weight[key] = arc_weight.get(key, 0) + a.weight
    arcs = frozenset(Arc(s, d, w) for (s, d), w in arc_weight.items())

    final = net.final
    if final is not None:
        final = FinalPredicate(tuple((rep.get(p, p), op, c) for p, op, c in final.atoms))
    return InterlacedNet(places, transitions, arcs, m0, final, dict(net.meta))


# ---------------------------------------------------------------------------
# token game (reference implementation; the reach kernels re-implement it)


def enabled(net: InterlacedNet, marking: Mapping[str, int], t: str) -> bool:
    if t not in net.transitions:
        raise UnknownTransition(t)
    return all(marking.get(p, 0) >= w for p, w in net.pre(t).items())


def fire(net: InterlacedNet, marking: Mapping[str, int], t: str) -> Marking:
    if not enabled(net, marking, t):
        raise NotEnabled(t)
    out = dict(marking)
    for p, w in net.pre(t).items():
        out[p] = out.get(p, 0) - w
    for p, w in net.post(t).items():
        out[p] = out.get(p, 0) + w
    return {p: c for p, c in out.items() if c}


def enabled_transitions(net: InterlacedNet, marking: Mapping[str, int]) -> list:
    return [t for t in net.sorted_transitions() if enabled(net, marking, t)]
