"""Shared translation machinery: options, the entity model, node naming,
and predicate witness enumeration.

Node ids follow one convention throughout: ``family[arg,arg,...]`` where the
family tells what the node is for and the arguments pin it to a unit, an
occurrence serial, an entity, or a kind index.  Stream kinds are addressed by
flag index ``i`` in ``0..n`` for nesting factor ``n``: index ``i < n`` stands
for the end-of-stream marker of level ``i`` and index ``n`` stands for plain
data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from hashnets.ahcl.ast import Component, Unit
from hashnets.behavior import DATA, Eos, Kind, StreamPredicate
from hashnets.petri import NetBuilder


class TranslateError(Exception):
    """The configuration cannot be turned into a net."""


class UnboundPort(TranslateError):
    """An activation or predicate names an entity the unit cannot see."""


class UnboundSemaphore(TranslateError):
    """signal/wait names a semaphore the unit does not declare."""


class ArityMismatch(TranslateError):
    """Shared endpoints disagree on their nesting factor."""


@dataclass(frozen=True)
class TranslationOptions:
    """Switches selecting which net layers the translation emits."""

    with_stream_protocol: bool = True
    with_order_consistency: bool = False
    buffer_default: int = 1

    def __post_init__(self) -> None:
        if self.with_order_consistency and not self.with_stream_protocol:
            raise ValueError("order consistency requires the stream protocol")
        if self.buffer_default < 1:
            raise ValueError("buffer_default must be positive")


DEFAULT_OPTIONS = TranslationOptions()


def nid(family: str, *args: object) -> str:
    if not args:
        return family
    return f"{family}[{','.join(str(a) for a in args)}]"


def kind_for_index(index: int, nesting: int) -> Kind:
    """Stream kind encoded by flag index ``index`` at nesting ``nesting``."""
    return DATA if index == nesting else Eos(index)


def index_for_kind(kind: Kind, nesting: int) -> int:
    return nesting if kind.is_data else kind.level


def flag_place(entity: str, index: int) -> str:
    return nid("stream_port_flag", entity, index)


def flag_dual(entity: str, index: int) -> str:
    return nid("stream_port_flag_dual", entity, index)


def update_pending(entity: str) -> str:
    return nid("sp_update_pending", entity)


def prepared_dual(port_id: str) -> str:
    return nid("port_prepared_dual", port_id)


@dataclass(frozen=True)
class EntityInfo:
    """One activatable endpoint: a port, a port group, or a collective."""

    id: str
    kind: str  # "port" | "any" | "all" | "collective"
    direction: str  # "in" | "out"; "" for collectives
    stream: bool
    nesting: int
    members: tuple = ()  # group member port ids
    unit: str = ""  # owning unit id; "" for collectives
    member_units: tuple = ()  # collective participant unit ids

    @property
    def flag_count(self) -> int:
        return self.nesting + 1


def unit_entities(unit: Unit) -> dict:
    out: dict = {}
    for p in unit.ports:
        if p.is_group:
            out[p.id] = EntityInfo(
                p.id,
                p.group.kind,
                p.direction,
                p.stream,
                p.nesting,
                tuple(m.id for m in p.group.members),
                unit.id,
            )
        else:
            out[p.id] = EntityInfo(p.id, "port", p.direction, p.stream, p.nesting, (), unit.id)
    return out


def component_entities(component: Component) -> dict:
    """Activatable entities by id: unit ports, groups, and collectives."""
    out: dict = {}
    for u in component.units:
        out.update(unit_entities(u))
    for g in component.collectives:
        out[g.id] = EntityInfo(
            g.id,
            "collective",
            "",
            g.stream,
            g.nesting,
            tuple(p for _u, p in g.members),
            "",
            tuple(u for u, _p in g.members),
        )
    return out


def keyed(info: EntityInfo, opt: TranslationOptions) -> bool:
    """Whether communication transitions split into per-kind copies."""
    return info.stream and opt.with_stream_protocol


def comm_transitions(port, opt: TranslationOptions) -> tuple:
    """(transition id, label) pairs for one port's communication step."""
    family = "port_send" if port.direction == "out" else "port_recv"
    label = port.id + ("!" if port.direction == "out" else "?")
    if port.stream and opt.with_stream_protocol:
        return tuple((nid(family, port.id, i), label) for i in range(port.nesting + 1))
    return ((nid(family, port.id), label),)


def produce_prepared(b: NetBuilder, t: str, port_id: str, ready_senders) -> None:
    b.arc(t, b.place(nid("port_prepared", port_id)))
    if port_id in ready_senders:
        b.arc(b.place(prepared_dual(port_id)), t)


def consume_prepared(b: NetBuilder, t: str, port_id: str, ready_senders) -> None:
    b.arc(b.place(nid("port_prepared", port_id)), t)
    if port_id in ready_senders:
        b.arc(t, b.place(prepared_dual(port_id)))


def mark_prepared(b: NetBuilder, t: str, info: EntityInfo, ready_senders) -> None:
    """Arcs that make the entity ready to communicate, complement included."""
    if info.kind == "port":
        produce_prepared(b, t, info.id, ready_senders)
        return
    b.arc(t, b.place(nid("group_prepare", info.id)))
    for m in info.members:
        produce_prepared(b, t, m, ready_senders)


def swap_flag(b: NetBuilder, t: str, entity: str, j: int, i: int) -> None:
    """Arcs moving the entity's kind flag from j to i; pure read when equal."""
    if j == i:
        b.read_arc(b.place(flag_place(entity, i)), t)
        return
    b.arc(b.place(flag_place(entity, j)), t)
    b.arc(t, b.place(flag_dual(entity, j)))
    b.arc(b.place(flag_dual(entity, i)), t)
    b.arc(t, b.place(flag_place(entity, i)))


@dataclass
class Ctx:
    """Per-unit state threaded through the behavior translators."""

    builder: NetBuilder
    unit: Unit
    opt: TranslationOptions
    entities: Mapping
    nestings: Mapping
    ready_senders: frozenset = frozenset()
    serial: list = field(default_factory=lambda: [0])

    @property
    def uid(self) -> str:
        return self.unit.id

    def fresh(self) -> int:
        k = self.serial[0]
        self.serial[0] = k + 1
        return k


def _flag_sets(nestings: Mapping, entity: str, depth: int):
    """(true indices, false indices) of a predicate variable at loop depth."""
    n = nestings.get(entity, 0)
    if n < 1:
        raise UnboundPort(f"'{entity}' is not a stream entity visible here")
    true_set = tuple(i for i in range(n) if i <= depth)
    false_set = tuple(i for i in range(n + 1) if i == n or i > depth)
    return true_set, false_set


def _merge(parts: Iterable) -> dict | None:
    out: dict = {}
    for part in parts:
        for e, i in part.items():
            if out.get(e, i) != i:
                return None
            out[e] = i
    return out


def _freeze(assignments: Iterable) -> tuple:
    seen: dict = {}
    for a in assignments:
        if a is None:
            continue
        seen.setdefault(tuple(sorted(a.items())), None)
    return tuple(seen)


def true_witnesses(pred: StreamPredicate, nestings: Mapping, depth: int) -> tuple:
    """Flag pinnings certifying TRUE: some disjunct holds outright."""
    found = []
    for conj in pred.disjuncts:
        entities = tuple(dict.fromkeys(conj.ports))
        sets = [_flag_sets(nestings, e, depth)[0] for e in entities]
        for combo in itertools.product(*sets):
            found.append(dict(zip(entities, combo)))
    return _freeze(found)


def loop_witnesses(pred: StreamPredicate, nestings: Mapping, depth: int) -> tuple:
    """Flag pinnings certifying FALSE: every disjunct fails, no bracket mixed."""
    per_conj = []
    for conj in pred.disjuncts:
        entities = tuple(dict.fromkeys(conj.ports))
        choices = []
        if conj.bracketed:
            sets = [_flag_sets(nestings, e, depth)[1] for e in entities]
            for combo in itertools.product(*sets):
                choices.append(dict(zip(entities, combo)))
        else:
            for e in entities:
                for i in _flag_sets(nestings, e, depth)[1]:
                    choices.append({e: i})
        per_conj.append(choices)
    found = [_merge(parts) for parts in itertools.product(*per_conj)]
    return _freeze(found)


def fail_witnesses(pred: StreamPredicate, nestings: Mapping, depth: int) -> tuple:
    """Flag pinnings certifying FAIL: not TRUE, some bracket disagrees."""
    found = []
    for bi, br in enumerate(pred.disjuncts):
        if not br.bracketed:
            continue
        entities = tuple(dict.fromkeys(br.ports))
        if len(entities) < 2:
            continue
        tf = {e: _flag_sets(nestings, e, depth) for e in entities}
        others = []
        for cj, conj in enumerate(pred.disjuncts):
            if cj == bi:
                continue
            c_entities = tuple(dict.fromkeys(conj.ports))
            others.append(
                [{e: i} for e in c_entities for i in _flag_sets(nestings, e, depth)[1]]
            )
        for y in entities:
            for x in entities:
                if x == y:
                    continue
                for iy in tf[y][0]:
                    for ix in tf[x][1]:
                        for parts in itertools.product(*others):
                            found.append(_merge([{y: iy, x: ix}, *parts]))
    return _freeze(found)
