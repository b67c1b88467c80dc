"""Canonical pretty-printer; parse(print(x)) reproduces x."""

from __future__ import annotations

from hashnets.ahcl.ast import Channel, Collective, Component, Port, Unit
from hashnets.behavior import (
    Activate,
    Alt,
    Conjunction,
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


def _stream_suffix(stream: bool, nesting: int) -> str:
    return f" stream({nesting})" if stream else ""


def _print_port(port: Port, indent: str) -> str:
    if port.group is None:
        return f"{indent}{port.direction} {port.id}{_stream_suffix(port.stream, port.nesting)};"
    members = ", ".join(m.id for m in port.group.members)
    return (
        f"{indent}{port.direction} group {port.id} {port.group.kind}"
        f"{_stream_suffix(port.stream, port.nesting)} {{ {members} }};"
    )


def print_predicate(pred: StreamPredicate) -> str:
    parts = []
    for c in pred.disjuncts:
        body = " & ".join(c.ports)
        parts.append(f"<{body}>" if c.bracketed else body)
    return " or ".join(parts)


def _repeat_body(body) -> str:
    # a bare repeat inside a repeat would capture the outer until clause
    if isinstance(body, (RepeatUntil, RepeatCounter, RepeatForever)):
        return f"({print_behavior(body)})"
    return print_behavior(body)


def print_behavior(action, indent: str = "") -> str:
    if isinstance(action, Skip):
        return "skip"
    if isinstance(action, (Seq, Par, Alt)):
        kw = {Seq: "seq", Par: "par", Alt: "alt"}[type(action)]
        inner = "; ".join(print_behavior(a) for a in action.actions)
        return f"{kw} {{ {inner} }}" if inner else f"{kw} {{ }}"
    if isinstance(action, RepeatUntil):
        return f"repeat {_repeat_body(action.body)} until {print_predicate(action.predicate)}"
    if isinstance(action, RepeatCounter):
        return f"repeat {action.count} {_repeat_body(action.body)}"
    if isinstance(action, RepeatForever):
        return f"repeat {_repeat_body(action.body)}"
    if isinstance(action, If):
        text = f"if {print_predicate(action.predicate)} {{ {print_behavior(action.then)} }}"
        if not isinstance(action.orelse, Skip):
            text += f" else {{ {print_behavior(action.orelse)} }}"
        return text
    if isinstance(action, Signal):
        return f"signal {action.sem}"
    if isinstance(action, Wait):
        return f"wait {action.sem}"
    if isinstance(action, Activate):
        return action.entity + action.polarity
    if isinstance(action, Do):
        return f"do {action.collective}"
    raise TypeError(f"not an action: {action!r}")


def _print_unit(unit: Unit) -> str:
    rep = " repetitive" if unit.repetitive else ""
    lines = [f"  unit {unit.id}{rep} {{"]
    if unit.ports:
        lines.append("    ports {")
        for p in unit.ports:
            lines.append(_print_port(p, "      "))
        lines.append("    }")
    if unit.semaphores:
        lines.append(f"    sem {', '.join(unit.semaphores)};")
    lines.append(f"    protocol {{ {print_behavior(unit.protocol)} }}")
    lines.append("  }")
    return "\n".join(lines)


def _print_channel(chan: Channel) -> str:
    mode = str(chan.mode)
    return f"  connect {chan.sender} -> {chan.receiver} {mode} as {chan.id};"


def _print_collective(coll: Collective) -> str:
    members = ", ".join(f"{u}.{p}" for u, p in coll.members)
    return (
        f"  collective {coll.id}{_stream_suffix(coll.stream, coll.nesting)} "
        f"{{ {members} }}"
    )


def print_configuration(component: Component) -> str:
    lines = [f"component {component.name} {{"]
    for u in component.units:
        lines.append(_print_unit(u))
    for c in component.channels:
        lines.append(_print_channel(c))
    for g in component.collectives:
        lines.append(_print_collective(g))
    lines.append("}")
    return "\n".join(lines) + "\n"
