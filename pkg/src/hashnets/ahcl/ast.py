"""Component AST.

Frozen dataclasses; spans point into the (possibly iterator-expanded)
source text.  Spans and the `span` field never participate in equality so
round-trip tests can compare structures directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from hashnets.behavior import Action
from hashnets.diagnostics import Span


@dataclass(frozen=True)
class Group:
    kind: str  # "any" | "all"
    members: tuple  # of Port (each with group=None)


@dataclass(frozen=True)
class Port:
    id: str
    direction: str  # "in" | "out"
    stream: bool = False
    nesting: int = 0
    group: Group | None = None  # None = single port
    span: Span | None = field(default=None, compare=False)

    @property
    def is_group(self) -> bool:
        return self.group is not None

    @property
    def symbol(self) -> str:
        return self.id + ("!" if self.direction == "out" else "?")


@dataclass(frozen=True)
class Unit:
    id: str
    repetitive: bool
    ports: tuple  # of Port (singles and groups)
    semaphores: tuple  # of str
    protocol: Action
    span: Span | None = field(default=None, compare=False)

    def all_ports(self) -> Iterator[Port]:
        """Every port including group members; groups yielded before members."""
        for p in self.ports:
            yield p
            if p.group is not None:
                yield from p.group.members

    def port_by_id(self, pid: str) -> Port | None:
        for p in self.all_ports():
            if p.id == pid:
                return p
        return None

    def stream_nestings(self) -> dict:
        """Nesting factor per stream entity id (ports, groups, members)."""
        return {p.id: p.nesting for p in self.all_ports() if p.stream}


@dataclass(frozen=True)
class PortRef:
    unit: str | None  # None when the globally unique port id stands alone
    port: str
    span: Span | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.port if self.unit is None else f"{self.unit}.{self.port}"


@dataclass(frozen=True)
class Mode:
    kind: str  # "synchronous" | "buffered" | "ready"
    size: int | None = None  # buffered slot count; None when the source omits it

    def __str__(self) -> str:
        if self.kind != "buffered":
            return self.kind
        return "buffered" if self.size is None else f"buffered({self.size})"


SYNCHRONOUS = Mode("synchronous")
READY = Mode("ready")


def buffered(size: int | None = None) -> Mode:
    return Mode("buffered", size)


@dataclass(frozen=True)
class Channel:
    id: str
    sender: PortRef
    receiver: PortRef
    mode: Mode = SYNCHRONOUS
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Collective:
    """A shared rendezvous endpoint; members list (unit id, port id) pairs."""

    id: str
    members: tuple  # of (unit id, member port id)
    stream: bool = False
    nesting: int = 0
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Component:
    name: str
    units: tuple  # of Unit
    channels: tuple  # of Channel
    collectives: tuple  # of Collective
    span: Span | None = field(default=None, compare=False)

    def unit_by_id(self, uid: str) -> Unit | None:
        for u in self.units:
            if u.id == uid:
                return u
        return None

    def find_port(self, pid: str):
        """(unit, port, enclosing group port or None) for a global port id."""
        for u in self.units:
            for p in u.ports:
                if p.id == pid:
                    return u, p, None
                if p.group is not None:
                    for m in p.group.members:
                        if m.id == pid:
                            return u, m, p
        return None

    def resolve(self, ref: PortRef):
        """Resolve a channel endpoint; None when it does not exist."""
        hit = self.find_port(ref.port)
        if hit is None:
            return None
        unit, port, owner = hit
        if ref.unit is not None and ref.unit != unit.id:
            return None
        return unit, port, owner

    def collectives_of(self, uid: str) -> list:
        return [g for g in self.collectives if any(m[0] == uid for m in g.members)]

    def entity_nestings(self, unit: Unit) -> dict:
        """Stream entities visible to a unit's predicates and scripts."""
        out = unit.stream_nestings()
        for g in self.collectives_of(unit.id):
            if g.stream:
                out[g.id] = g.nesting
        return out
