"""Per-unit net slices: the ports layer, behavior fragments, and the
process skeleton with its optional restart loop.

Every behavior fragment is translated against two prescribed handle places
``(start, stop)``.  Fragments that perform nothing (``skip``, empty blocks)
identify their handles through a shared qualifier so the final quotient
collapses them instead of leaving silent stuffing transitions behind.
"""

from __future__ import annotations

from dataclasses import dataclass

from hashnets.ahcl.ast import Unit
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
    Wait,
)
from hashnets.petri import FinalPredicate, InterlacedNet, NetBuilder, unfold

from hashnets.translate.base import (
    Ctx,
    DEFAULT_OPTIONS,
    EntityInfo,
    TranslationOptions,
    UnboundPort,
    UnboundSemaphore,
    comm_transitions,
    component_entities,
    consume_prepared,
    fail_witnesses,
    flag_place,
    keyed,
    loop_witnesses,
    mark_prepared,
    nid,
    true_witnesses,
    unit_entities,
    update_pending,
)


@dataclass(frozen=True)
class Slice:
    """Entry and exit place handles of one translated fragment."""

    start: str
    stop: str


@dataclass
class SliceSet:
    """Named slices contributed by one unit; net set on standalone use."""

    unit: str
    behavior: Slice | None
    ports: dict
    net: InterlacedNet | None = None


def ports_into(b: NetBuilder, unit: Unit, opt: TranslationOptions, ready_senders) -> dict:
    """Preparation, communication, and completion nodes for every port."""
    slices: dict = {}
    for p in unit.ports:
        if not p.is_group:
            prep = b.place(nid("port_prepared", p.id))
            done = b.place(nid("port_complete", p.id))
            for tid, label in comm_transitions(p, opt):
                t = b.transition(tid, label)
                consume_prepared(b, t, p.id, ready_senders)
                b.arc(t, done)
            slices[p.id] = Slice(prep, done)
            continue
        gp = b.place(nid("group_prepare", p.id))
        gc = b.place(nid("group_complete", p.id))
        members = tuple(m.id for m in p.group.members)
        # input stream groups complete through the flag-recording joins
        deferred = p.stream and opt.with_stream_protocol and p.direction == "in"
        for m in p.group.members:
            prep = b.place(nid("port_prepared", m.id))
            if p.group.kind == "any" and not deferred:
                # the first member to fire wins and completes the group
                for tid, label in comm_transitions(m, opt):
                    t = b.transition(tid, label)
                    b.arc(gp, t)
                    for other in members:
                        consume_prepared(b, t, other, ready_senders)
                    b.arc(t, gc)
                slices[m.id] = Slice(prep, gc)
                continue
            done = b.place(nid("port_complete", m.id))
            for tid, label in comm_transitions(m, opt):
                t = b.transition(tid, label)
                if p.group.kind == "any":
                    # the first member to fire wins the whole activation
                    b.arc(gp, t)
                    for other in members:
                        consume_prepared(b, t, other, ready_senders)
                else:
                    consume_prepared(b, t, m.id, ready_senders)
                b.arc(t, done)
            slices[m.id] = Slice(prep, done)
        if not deferred and p.group.kind == "all":
            j = b.transition(nid("group_join", p.id))
            b.arc(gp, j)
            for m2 in members:
                b.arc(nid("port_complete", m2), j)
            b.arc(j, gc)
        slices[p.id] = Slice(gp, gc)
    return slices


def _ident(ctx: Ctx, a: str, b: str) -> None:
    if a == b:
        return
    q = ("ident", ctx.uid, ctx.fresh())
    ctx.builder.place(a, qualifiers=(q,))
    ctx.builder.place(b, qualifiers=(q,))


def _mid(ctx: Ctx) -> str:
    return ctx.builder.place(nid("p", ctx.uid, ctx.fresh()))


def _fail_place(ctx: Ctx) -> str:
    return ctx.builder.place(nid("protocol_fail", ctx.uid))


def _entity(ctx: Ctx, name: str) -> EntityInfo:
    info = ctx.entities.get(name)
    if info is None:
        raise UnboundPort(f"unit '{ctx.uid}' activates unknown entity '{name}'")
    return info


def _activate(ctx: Ctx, info: EntityInfo, start: str, stop: str) -> None:
    b = ctx.builder
    k = ctx.fresh()
    ts = b.transition(nid("activate_start", ctx.uid, k, info.id))
    on = b.place(nid("activate_on", ctx.uid, k, info.id))
    tp = b.transition(nid("activate_stop", ctx.uid, k, info.id))
    b.arc(start, ts)
    b.arc(ts, on)
    b.arc(on, tp)
    b.arc(tp, stop)
    if info.kind == "collective":
        b.arc(ts, b.place(nid("col_member_ready", info.id, ctx.uid)))
        b.arc(b.place(nid("col_member_done", info.id, ctx.uid)), tp)
        return
    if info.direction == "out" and keyed(info, ctx.opt):
        # the stream layer prepares the ports once the flag is updated
        b.arc(ts, b.place(update_pending(info.id)))
    else:
        mark_prepared(b, ts, info, ctx.ready_senders)
    if info.kind == "port":
        if info.direction == "in" and keyed(info, ctx.opt):
            b.arc(b.place(nid("port_flagged", info.id)), tp)
        else:
            b.arc(b.place(nid("port_complete", info.id)), tp)
    else:
        b.arc(b.place(nid("group_complete", info.id)), tp)


def _witness_arcs(ctx: Ctx, t: str, witness) -> None:
    b = ctx.builder
    for entity, index in witness:
        b.read_arc(b.place(flag_place(entity, index)), t)


def action_into(ctx: Ctx, action, start: str, stop: str, depth: int = 0) -> None:
    b = ctx.builder
    if isinstance(action, Skip):
        _ident(ctx, start, stop)
        return
    if isinstance(action, Seq):
        parts = action.actions
        if not parts:
            _ident(ctx, start, stop)
            return
        cur = start
        for part in parts[:-1]:
            nxt = _mid(ctx)
            action_into(ctx, part, cur, nxt, depth)
            cur = nxt
        action_into(ctx, parts[-1], cur, stop, depth)
        return
    if isinstance(action, Par):
        if not action.actions:
            _ident(ctx, start, stop)
            return
        k = ctx.fresh()
        fork = b.transition(nid("par_fork", ctx.uid, k))
        join = b.transition(nid("par_join", ctx.uid, k))
        b.arc(start, fork)
        b.arc(join, stop)
        for part in action.actions:
            bs, be = _mid(ctx), _mid(ctx)
            b.arc(fork, bs)
            b.arc(be, join)
            action_into(ctx, part, bs, be, depth)
        return
    if isinstance(action, Alt):
        k = ctx.fresh()
        for i, part in enumerate(action.actions):
            sel = b.transition(nid("alt_select_branch", ctx.uid, k, i))
            bs = _mid(ctx)
            b.arc(start, sel)
            b.arc(sel, bs)
            action_into(ctx, part, bs, stop, depth)
        return
    if isinstance(action, RepeatUntil):
        k = ctx.fresh()
        check = b.place(nid("ru_checking_conditions", ctx.uid, k))
        action_into(ctx, action.body, start, check, depth + 1)
        if not ctx.opt.with_stream_protocol:
            # without flags the exit condition degenerates to a free choice
            t = b.transition(nid("ru_terminate", ctx.uid, k))
            b.arc(check, t)
            b.arc(t, stop)
            t = b.transition(nid("ru_loop", ctx.uid, k))
            b.arc(check, t)
            b.arc(t, start)
            return
        for w_i, w in enumerate(true_witnesses(action.predicate, ctx.nestings, depth)):
            t = b.transition(nid("ru_terminate", ctx.uid, k, w_i))
            b.arc(check, t)
            b.arc(t, stop)
            _witness_arcs(ctx, t, w)
        for w_i, w in enumerate(loop_witnesses(action.predicate, ctx.nestings, depth)):
            t = b.transition(nid("ru_loop", ctx.uid, k, w_i))
            b.arc(check, t)
            b.arc(t, start)
            _witness_arcs(ctx, t, w)
        for w_i, w in enumerate(fail_witnesses(action.predicate, ctx.nestings, depth)):
            t = b.transition(nid("ru_fail", ctx.uid, k, w_i))
            b.arc(check, t)
            b.arc(t, _fail_place(ctx))
            _witness_arcs(ctx, t, w)
        return
    if isinstance(action, RepeatCounter):
        if action.count < 1:
            raise ValueError("repeat count must be positive")
        k = ctx.fresh()
        remaining = b.place(nid("rc_remaining", ctx.uid, k))
        performed = b.place(nid("rc_performed", ctx.uid, k))
        ready = b.place(nid("rc_ready", ctx.uid, k))
        enter = b.transition(nid("rc_enter", ctx.uid, k))
        b.arc(start, enter)
        b.arc(enter, remaining, action.count)
        b.arc(enter, ready)
        bs, be = _mid(ctx), _mid(ctx)
        step = b.transition(nid("rc_iter", ctx.uid, k))
        b.arc(ready, step)
        b.arc(remaining, step)
        b.arc(step, bs)
        action_into(ctx, action.body, bs, be, depth)
        nxt = b.transition(nid("rc_next", ctx.uid, k))
        b.arc(be, nxt)
        b.arc(nxt, performed)
        b.arc(nxt, ready)
        leave = b.transition(nid("rc_exit", ctx.uid, k))
        b.arc(performed, leave, action.count)
        b.arc(ready, leave)
        b.arc(leave, stop)
        return
    if isinstance(action, RepeatForever):
        action_into(ctx, action.body, start, start, depth)
        return
    if isinstance(action, If):
        k = ctx.fresh()
        then_s, else_s = _mid(ctx), _mid(ctx)
        if not ctx.opt.with_stream_protocol:
            t = b.transition(nid("if_then", ctx.uid, k))
            b.arc(start, t)
            b.arc(t, then_s)
            t = b.transition(nid("if_else", ctx.uid, k))
            b.arc(start, t)
            b.arc(t, else_s)
        else:
            for w_i, w in enumerate(true_witnesses(action.predicate, ctx.nestings, depth)):
                t = b.transition(nid("if_then", ctx.uid, k, w_i))
                b.arc(start, t)
                b.arc(t, then_s)
                _witness_arcs(ctx, t, w)
            for w_i, w in enumerate(loop_witnesses(action.predicate, ctx.nestings, depth)):
                t = b.transition(nid("if_else", ctx.uid, k, w_i))
                b.arc(start, t)
                b.arc(t, else_s)
                _witness_arcs(ctx, t, w)
            for w_i, w in enumerate(fail_witnesses(action.predicate, ctx.nestings, depth)):
                t = b.transition(nid("if_fail", ctx.uid, k, w_i))
                b.arc(start, t)
                b.arc(t, _fail_place(ctx))
                _witness_arcs(ctx, t, w)
        action_into(ctx, action.then, then_s, stop, depth)
        action_into(ctx, action.orelse, else_s, stop, depth)
        return
    if isinstance(action, (Signal, Wait)):
        if action.sem not in ctx.unit.semaphores:
            raise UnboundSemaphore(f"unit '{ctx.uid}' uses undeclared semaphore '{action.sem}'")
        sem = b.place(nid("sem_counter", ctx.uid, action.sem))
        t = b.transition(nid("sem_signal" if isinstance(action, Signal) else "sem_wait", ctx.uid, ctx.fresh()))
        b.arc(start, t)
        b.arc(t, stop)
        if isinstance(action, Signal):
            b.arc(t, sem)
        else:
            b.arc(sem, t)
        return
    if isinstance(action, Activate):
        info = _entity(ctx, action.entity)
        if info.kind == "collective" or info.unit != ctx.uid:
            raise UnboundPort(f"unit '{ctx.uid}' cannot activate '{action.entity}'")
        want = "out" if action.polarity == "!" else "in"
        if info.direction != want:
            raise UnboundPort(f"'{action.entity}' is not an {want}-port of unit '{ctx.uid}'")
        _activate(ctx, info, start, stop)
        return
    if isinstance(action, Do):
        info = _entity(ctx, action.collective)
        if info.kind != "collective" or ctx.uid not in info.member_units:
            raise UnboundPort(f"unit '{ctx.uid}' is not a member of '{action.collective}'")
        _activate(ctx, info, start, stop)
        return
    raise TypeError(f"unknown behavior node {type(action).__name__}")


def unit_into(
    b: NetBuilder,
    unit: Unit,
    opt: TranslationOptions,
    entities,
    nestings,
    ready_senders,
) -> SliceSet:
    """Process skeleton, ports, and protocol of one unit."""
    started = b.place(nid("process_started", unit.id), marking=1)
    finished = b.place(nid("process_finished", unit.id))
    for s in unit.semaphores:
        b.place(nid("sem_counter", unit.id, s))
    ports = ports_into(b, unit, opt, ready_senders)
    ctx = Ctx(b, unit, opt, entities, nestings, frozenset(ready_senders))
    action_into(ctx, unit.protocol, started, finished, 0)
    if unit.repetitive:
        enabled = b.place(nid("process_restart_enabled", unit.id), marking=1)
        t = b.transition(nid("process_restart", unit.id))
        b.arc(finished, t)
        b.read_arc(enabled, t)
        b.arc(t, started)
    return SliceSet(unit=unit.id, behavior=Slice(started, finished), ports=ports)


def translate_ports(unit: Unit, opt: TranslationOptions | None = None) -> SliceSet:
    """Standalone ports layer of one unit, mainly for inspection."""
    opt = opt or DEFAULT_OPTIONS
    b = NetBuilder()
    ports = ports_into(b, unit, opt, frozenset())
    return SliceSet(unit=unit.id, behavior=None, ports=ports, net=unfold(b.build()))


def translate_action(action, ctx: Ctx, start: str | None = None, stop: str | None = None, depth: int = 0) -> Slice:
    """Translate one behavior fragment into ctx's builder; returns handles."""
    if start is None:
        start = _mid(ctx)
    if stop is None:
        stop = _mid(ctx)
    action_into(ctx, action, start, stop, depth)
    return Slice(start, stop)


def translate_unit(unit: Unit, opt: TranslationOptions | None = None, component=None) -> SliceSet:
    """Standalone net of one unit against a free environment.

    Unconnected ports fire freely; collectives of the enclosing component,
    when given, rendezvous with this unit alone.
    """
    opt = opt or DEFAULT_OPTIONS
    b = NetBuilder()
    if component is not None:
        entities = component_entities(component)
        nestings = component.entity_nestings(unit)
    else:
        entities = unit_entities(unit)
        nestings = unit.stream_nestings()
    out = unit_into(b, unit, opt, entities, nestings, frozenset())
    if component is not None:
        from hashnets.translate.links import collective_into

        for coll in component.collectives_of(unit.id):
            collective_into(b, coll, component, opt, only_units={unit.id})
    if opt.with_stream_protocol:
        from hashnets.translate.streams import unit_streams_into

        unit_streams_into(b, unit, entities, opt, frozenset())
    b.final = FinalPredicate(((nid("process_finished", unit.id), ">=", 1),))
    out.net = unfold(b.build())
    return out
