"""Deadlock and invariant reports over a reachability graph."""

from __future__ import annotations

from dataclasses import dataclass, field

from hashnets.petri.net import FinalPredicate
from hashnets.petri.reach import ReachGraph


@dataclass
class DeadlockReport:
    """Dead non-final markings with shortest firing sequences reaching them.

    Only fully expanded states can be declared dead, so on a truncated
    graph an empty report means "none found within the bound", not "none".
    """

    dead: list = field(default_factory=list)  # state indices
    witnesses: list = field(default_factory=list)  # transition id sequences
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return not self.dead

    def as_dict(self) -> dict:
        return {
            "deadlocks": len(self.dead),
            "truncated": self.truncated,
            "witnesses": self.witnesses,
        }


def _final_test(g: ReachGraph, final):
    if final is None:
        final = g.net.final
    if final is None:
        return lambda i: False
    if isinstance(final, FinalPredicate):
        pred = final
        return lambda i: pred.satisfied(g.marking(i))
    if callable(final):
        return lambda i: final(g.marking(i))
    raise TypeError(f"final must be a FinalPredicate or a callable, got {type(final)!r}")


def find_deadlocks(g: ReachGraph, final=None, max_witnesses: int | None = None) -> DeadlockReport:
    """All reachable dead markings the final predicate does not excuse.

    `final` defaults to the net's own termination predicate.  Witnesses
    replay from the initial marking and are shortest by BFS depth.
    """
    is_final = _final_test(g, final)
    report = DeadlockReport(truncated=g.truncated)
    for s in g.dead_states():
        if is_final(s):
            continue
        report.dead.append(s)
        if max_witnesses is None or len(report.witnesses) < max_witnesses:
            path = g.path_to(s)
            report.witnesses.append([g.transition_ids[g.edge_t[e]] for e in path])
    return report


@dataclass
class InvariantEntry:
    places: list
    expected: int
    ok: bool
    state: int | None = None  # first violating state index
    actual: int | None = None

    def render(self) -> str:
        head = " + ".join(self.places)
        if self.ok:
            return f"ok: {head} = {self.expected}"
        return f"violated at state {self.state}: {head} = {self.actual}, expected {self.expected}"


@dataclass
class InvariantReport:
    entries: list = field(default_factory=list)
    states_checked: int = 0

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def render(self) -> str:
        lines = [e.render() for e in self.entries]
        lines.append(f"({self.states_checked} states checked)")
        return "\n".join(lines)


def check_place_invariants(g: ReachGraph, sums) -> InvariantReport:
    """Check each (places, expected) weighted sum over every discovered state.

    `sums` items are (place id list, expected total) pairs; the sum is the
    plain token count over the listed places.  Frontier states count too:
    a marking violates an invariant no matter whether it got expanded.
    """
    report = InvariantReport(states_checked=g.n_states)
    for places, expected in sums:
        idxs = [g.place_index(p) for p in places]
        entry = InvariantEntry(places=list(places), expected=expected, ok=True)
        for s in range(g.n_states):
            row = g.states[s]
            total = 0
            for k in idxs:
                total += row[k]
            if total != expected:
                entry.ok = False
                entry.state = s
                entry.actual = total
                break
        report.entries.append(entry)
    return report
