"""Component validation.

An empty report (no errors) means the configuration is translatable.
Warnings flag constructs that translate but usually indicate mistakes.
"""

from __future__ import annotations

from hashnets.ahcl.ast import Channel, Collective, Component, Port, Unit
from hashnets.behavior import (
    Activate,
    Alt,
    Do,
    If,
    Par,
    RepeatCounter,
    RepeatForever,
    RepeatUntil,
    Seq,
    Signal,
    Skip,
    StreamPredicate,
    Wait,
)
from hashnets.diagnostics import Span, ValidationReport


def _walk(action):
    yield action
    if isinstance(action, (Seq, Par, Alt)):
        for a in action.actions:
            yield from _walk(a)
    elif isinstance(action, (RepeatUntil, RepeatCounter, RepeatForever)):
        yield from _walk(action.body)
    elif isinstance(action, If):
        yield from _walk(action.then)
        yield from _walk(action.orelse)


def _has_activation(action) -> bool:
    return any(isinstance(a, (Activate, Do)) for a in _walk(action))


def validate_configuration(component: Component, file: str = "<input>") -> ValidationReport:
    report = ValidationReport()

    def err(message: str, span: Span | None) -> None:
        report.add("error", message, span or Span(), file)

    def warn(message: str, span: Span | None) -> None:
        report.add("warning", message, span or Span(), file)

    for unit in component.units:
        _check_unit(component, unit, err, warn)
    connected: dict = {}
    for chan in component.channels:
        _check_channel(component, chan, err)
        for ref in (chan.sender, chan.receiver):
            prev = connected.setdefault(ref.port, chan.id)
            if prev != chan.id:
                err(
                    f"channel '{chan.id}': port '{ref.port}' already connected "
                    f"by channel '{prev}'",
                    chan.span,
                )
    for coll in component.collectives:
        _check_collective(component, coll, err)
    return report


def _check_unit(component: Component, unit: Unit, err, warn) -> None:
    for p in unit.ports:
        _check_port(p, err)

    singles = {p.id for p in unit.ports if not p.is_group}
    groups = {p.id: p for p in unit.ports if p.is_group}
    members = {m.id: g for g in unit.ports if g.is_group for m in g.group.members}
    own_collectives = {g.id for g in component.collectives_of(unit.id)}
    stream_entities = component.entity_nestings(unit)
    sems = set(unit.semaphores)
    direction = {p.id: p.direction for p in unit.all_ports()}

    for action in _walk(unit.protocol):
        if isinstance(action, Activate):
            name = action.entity
            if name in members:
                err(
                    f"port '{name}' is a member of group '{members[name].id}'; "
                    "groups are activated as a whole",
                    unit.span,
                )
            elif name not in singles and name not in groups:
                err(f"unit '{unit.id}' activates unknown port '{name}'", unit.span)
            else:
                want = "out" if action.polarity == "!" else "in"
                if direction[name] != want:
                    err(
                        f"port '{name}' is declared '{direction[name]}' but activated "
                        f"with '{action.polarity}'",
                        unit.span,
                    )
        elif isinstance(action, Do):
            if action.collective not in own_collectives:
                err(
                    f"unit '{unit.id}' does '{action.collective}' but is not a member "
                    "of such a collective",
                    unit.span,
                )
        elif isinstance(action, (Signal, Wait)):
            if action.sem not in sems:
                err(f"unit '{unit.id}' uses undeclared semaphore '{action.sem}'", unit.span)
        elif isinstance(action, RepeatCounter):
            if action.count < 1:
                err("repeat count must be at least 1", unit.span)
            if not _has_activation(action.body):
                warn("loop body performs no activation", unit.span)
        elif isinstance(action, (RepeatUntil, RepeatForever)):
            if not _has_activation(action.body):
                warn("loop body performs no activation", unit.span)
        if isinstance(action, (RepeatUntil, If)):
            _check_predicate(action.predicate, unit, stream_entities, members, err)


def _check_port(port: Port, err) -> None:
    if port.stream and port.nesting < 1:
        err(f"stream port '{port.id}' needs a nesting factor of at least 1", port.span)
    if not port.stream and port.nesting != 0:
        err(f"non-stream port '{port.id}' must have nesting factor 0", port.span)
    if port.group is not None:
        if len(port.group.members) == 0:
            err(f"group '{port.id}' has no members", port.span)
        for m in port.group.members:
            if m.group is not None:
                err(f"group '{port.id}' nests group '{m.id}'", port.span)
            _check_port(m, err)


def _check_predicate(pred: StreamPredicate, unit: Unit, stream_entities, members, err) -> None:
    for name in pred.referenced_ports():
        if name in members:
            err(
                f"predicate references group member '{name}'; kind flags belong "
                f"to the whole group '{members[name].id}'",
                unit.span,
            )
        elif name not in stream_entities:
            err(
                f"predicate references '{name}', which is not a stream port, "
                f"stream group, or stream collective of unit '{unit.id}'",
                unit.span,
            )


def _check_channel(component: Component, chan: Channel, err) -> None:
    ends = []
    for ref, role in ((chan.sender, "sender"), (chan.receiver, "receiver")):
        hit = component.resolve(ref)
        if hit is None:
            err(f"channel '{chan.id}': {role} '{ref}' does not name a port", chan.span)
            continue
        unit, port, owner = hit
        if port.is_group:
            err(
                f"channel '{chan.id}': {role} '{ref}' is a group; connect its members",
                chan.span,
            )
            continue
        ends.append((role, unit, port, owner))
    if len(ends) != 2:
        return
    (_, _su, sp, _sg), (_, _ru, rp, _rg) = ends
    if sp.direction != "out" or rp.direction != "in":
        err(
            f"channel '{chan.id}': endpoints must run output -> input "
            f"(got {sp.direction} -> {rp.direction})",
            chan.span,
        )
    if sp.nesting != rp.nesting:
        err(
            f"channel '{chan.id}': nesting factors differ "
            f"({sp.id}: {sp.nesting}, {rp.id}: {rp.nesting}); only streams of the "
            "same nesting may be connected",
            chan.span,
        )
    if chan.mode.kind == "buffered" and chan.mode.size is not None and chan.mode.size < 1:
        err(f"channel '{chan.id}': buffered size must be at least 1", chan.span)


def _check_collective(component: Component, coll: Collective, err) -> None:
    if coll.stream and coll.nesting < 1:
        err(f"stream collective '{coll.id}' needs nesting factor >= 1", coll.span)
    if not coll.stream and coll.nesting != 0:
        err(f"non-stream collective '{coll.id}' must have nesting factor 0", coll.span)
    seen_units = set()
    for uid, _pid in coll.members:
        if component.unit_by_id(uid) is None:
            err(f"collective '{coll.id}': unknown unit '{uid}'", coll.span)
            continue
        if uid in seen_units:
            err(f"collective '{coll.id}': unit '{uid}' appears twice", coll.span)
        seen_units.add(uid)
