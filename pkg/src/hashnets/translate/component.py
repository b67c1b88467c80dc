"""Whole-configuration translation: unit slices, channel and collective
layers, the optional stream layer, and the program-end detector.

The program ends when every non-repetitive unit has finished and every
repetitive unit has been drained: its restart permission is withdrawn once
the rest of the program is done.  program_end therefore implies no unit
can restart, though a drained unit may still complete its current round.
"""

from __future__ import annotations

from hashnets.ahcl.ast import Component
from hashnets.ahcl.validate import validate_configuration
from hashnets.petri import FinalPredicate, InterlacedNet, NetBuilder, unfold

from hashnets.translate.base import (
    DEFAULT_OPTIONS,
    TranslateError,
    TranslationOptions,
    component_entities,
    nid,
)
from hashnets.translate.links import channel_into, collective_into
from hashnets.translate.streams import streams_into
from hashnets.translate.units import unit_into


def ready_sender_ports(component: Component) -> frozenset:
    """Sender ports of ready channels; their prepared place needs a complement."""
    out = set()
    for chan in component.channels:
        if chan.mode.kind != "ready":
            continue
        hit = component.resolve(chan.sender)
        if hit is not None:
            out.add(hit[1].id)
    return frozenset(out)


def _end_glue(b: NetBuilder, component: Component) -> None:
    pending = b.place("program_end_pending", marking=1)
    ready = b.place("program_end_ready")
    end = b.place("program_end")
    t_nonrep = b.transition("processes_nonrep_join")
    b.arc(pending, t_nonrep)
    b.arc(t_nonrep, ready)
    t_all = b.transition("processes_all_join")
    b.arc(ready, t_all)
    b.arc(t_all, end)
    for u in component.units:
        finished = b.place(nid("process_finished", u.id))
        if not u.repetitive:
            b.read_arc(finished, t_nonrep)
            continue
        drain = b.transition(nid("process_drain", u.id))
        drained = b.place(nid("process_drained", u.id))
        b.read_arc(ready, drain)
        b.arc(b.place(nid("process_restart_enabled", u.id)), drain)
        b.arc(drain, drained)
        b.arc(drained, t_all)


def _meta(component: Component, opt: TranslationOptions, entities) -> dict:
    channels = {}
    for chan in component.channels:
        hit_s = component.resolve(chan.sender)
        hit_r = component.resolve(chan.receiver)
        size = None
        if chan.mode.kind == "buffered":
            size = chan.mode.size if chan.mode.size is not None else opt.buffer_default
        channels[chan.id] = {
            "sender": hit_s[1].id if hit_s else str(chan.sender),
            "receiver": hit_r[1].id if hit_r else str(chan.receiver),
            "mode": chan.mode.kind,
            "size": size,
            "stream": bool(hit_s and hit_s[1].stream),
            "nesting": hit_s[1].nesting if hit_s else 0,
        }
    return {
        "component": component.name,
        "options": {
            "with_stream_protocol": opt.with_stream_protocol,
            "with_order_consistency": opt.with_order_consistency,
            "buffer_default": opt.buffer_default,
        },
        "units": {
            u.id: {
                "repetitive": u.repetitive,
                "semaphores": list(u.semaphores),
                "entities": sorted(e.id for e in entities.values() if e.unit == u.id),
            }
            for u in component.units
        },
        "entities": {
            e.id: {
                "kind": e.kind,
                "direction": e.direction,
                "stream": e.stream,
                "nesting": e.nesting,
                "members": list(e.members),
                "unit": e.unit,
                "member_units": list(e.member_units),
            }
            for e in entities.values()
        },
        "channels": channels,
        "collectives": {
            g.id: {"members": [[u, p] for u, p in g.members]} for g in component.collectives
        },
    }


def translate_component(component: Component, opt: TranslationOptions | None = None) -> InterlacedNet:
    """Interlaced net of the whole configuration, quotiented once at the end."""
    opt = opt or DEFAULT_OPTIONS
    report = validate_configuration(component)
    if not report.ok():
        raise TranslateError("configuration does not validate:\n" + report.render())
    entities = component_entities(component)
    ready_senders = ready_sender_ports(component)
    b = NetBuilder()
    for u in component.units:
        unit_into(b, u, opt, entities, component.entity_nestings(u), ready_senders)
    for chan in component.channels:
        channel_into(b, chan, component, opt, ready_senders)
    for coll in component.collectives:
        collective_into(b, coll, component, opt)
    if opt.with_stream_protocol:
        streams_into(b, component, entities, opt, ready_senders)
    _end_glue(b, component)
    b.final = FinalPredicate((("program_end", ">=", 1),))
    b.meta = _meta(component, opt, entities)
    return unfold(b.build())
