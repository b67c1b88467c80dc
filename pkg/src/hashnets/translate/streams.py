"""Stream synchronization layer.

Every stream entity of nesting n keeps n+1 one-hot kind flags with
complement places; index i < n stands for the end-of-stream marker of level
i, index n for plain data.  Senders fix their flag before their ports become
ready, so each communication copy can pin the kind it carries.  Receivers
record evidence of the kind they saw and fold it into their own flag when
the activation completes.  Flag moves are single transitions, so the one-hot
and complement invariants hold in every reachable marking.
"""

from __future__ import annotations

from hashnets.ahcl.ast import Component, Unit
from hashnets.petri import NetBuilder

from hashnets.translate.base import (
    DEFAULT_OPTIONS,
    EntityInfo,
    TranslationOptions,
    flag_dual,
    flag_place,
    mark_prepared,
    nid,
    swap_flag,
    update_pending,
)


def entity_flags_into(b: NetBuilder, info: EntityInfo) -> None:
    """Kind flags with their complements; data (index n) marked initially."""
    n = info.nesting
    for i in range(n + 1):
        b.place(flag_place(info.id, i), marking=1 if i == n else 0)
        b.place(flag_dual(info.id, i), marking=0 if i == n else 1)


def _legal_after(i: int, n: int) -> set:
    """Kind indices allowed to follow an emission of index i."""
    if i == n:
        return {n, n - 1}
    if i == 0:
        return set()
    return {n} | set(range(i - 1, n))


def _order_walker(b: NetBuilder, info: EntityInfo, ready_senders) -> None:
    e, n = info.id, info.nesting
    for level in range(n + 1):
        b.place(nid("sp_flag_open", e, level), marking=1)
        b.place(nid("sp_flag_open_dual", e, level))
    cleaned = b.place(nid("sp_cleaned_flag", e))
    for i in range(n + 1):
        legal = _legal_after(i, n)
        for level in range(n + 1):
            walker = b.place(nid("sp_cleaning_flag", e, i, level))
            nxt = cleaned if level == n else b.place(nid("sp_cleaning_flag", e, i, level + 1))
            open_p = nid("sp_flag_open", e, level)
            dual_p = nid("sp_flag_open_dual", e, level)
            if level in legal:
                t = b.transition(nid("sp_reopen", e, i, level))
                b.arc(walker, t)
                b.arc(dual_p, t)
                b.arc(t, open_p)
                b.arc(t, nxt)
                t = b.transition(nid("sp_keep_open", e, i, level))
                b.arc(walker, t)
                b.read_arc(open_p, t)
                b.arc(t, nxt)
            else:
                t = b.transition(nid("sp_clean", e, i, level))
                b.arc(walker, t)
                b.arc(open_p, t)
                b.arc(t, dual_p)
                b.arc(t, nxt)
                t = b.transition(nid("sp_keep_cleaned", e, i, level))
                b.arc(walker, t)
                b.read_arc(dual_p, t)
                b.arc(t, nxt)
    commit = b.transition(nid("sp_commit", e))
    b.arc(cleaned, commit)
    mark_prepared(b, commit, info, ready_senders)
    fail = b.transition(nid("sp_set_fail", e))
    b.arc(b.place(update_pending(e)), fail)
    for level in range(n + 1):
        b.read_arc(nid("sp_flag_open_dual", e, level), fail)
    b.arc(fail, b.place(nid("sp_order_fail", e)))


def _output_entity(b: NetBuilder, info: EntityInfo, opt: TranslationOptions, ready_senders) -> None:
    e, n = info.id, info.nesting
    pending = b.place(update_pending(e))
    for j in range(n + 1):
        for i in range(n + 1):
            t = b.transition(nid("sp_set_flag", e, j, i))
            b.arc(pending, t)
            swap_flag(b, t, e, j, i)
            if opt.with_order_consistency:
                b.read_arc(b.place(nid("sp_flag_open", e, i)), t)
                b.arc(t, b.place(nid("sp_cleaning_flag", e, i, 0)))
            else:
                mark_prepared(b, t, info, ready_senders)
    # each communication copy carries exactly the flagged kind
    for p in info.members if info.kind != "port" else (e,):
        for i in range(n + 1):
            b.read_arc(flag_place(e, i), b.transition(nid("port_send", p, i)))
    if opt.with_order_consistency:
        _order_walker(b, info, ready_senders)


def _input_entity(b: NetBuilder, info: EntityInfo) -> None:
    e, n = info.id, info.nesting
    if info.kind == "port":
        for i in range(n + 1):
            b.arc(b.transition(nid("port_recv", e, i)), b.place(nid("port_evidence", e, i)))
        flagged = b.place(nid("port_flagged", e))
        for j in range(n + 1):
            for i in range(n + 1):
                t = b.transition(nid("sp_set_flag", e, j, i))
                b.arc(b.place(nid("port_evidence", e, i)), t)
                b.arc(b.place(nid("port_complete", e)), t)
                swap_flag(b, t, e, j, i)
                b.arc(t, flagged)
        return
    if info.kind == "all":
        # one join per flag move; all members must have seen the same kind
        for m in info.members:
            for i in range(n + 1):
                b.arc(b.transition(nid("port_recv", m, i)), b.place(nid("port_evidence", m, i)))
        for j in range(n + 1):
            for i in range(n + 1):
                t = b.transition(nid("sp_set_flag", e, j, i))
                for m in info.members:
                    b.arc(b.place(nid("port_evidence", m, i)), t)
                    b.arc(b.place(nid("port_complete", m)), t)
                b.arc(b.place(nid("group_prepare", e)), t)
                swap_flag(b, t, e, j, i)
                b.arc(t, b.place(nid("group_complete", e)))
        return
    # any-group: the winning member copies its kind onto the group flag
    for m in info.members:
        activated = b.place(nid("any_group_port_activated", m))
        for i in range(n + 1):
            recv = b.transition(nid("port_recv", m, i))
            b.arc(recv, b.place(nid("port_evidence", m, i)))
            b.arc(recv, activated)
        for j in range(n + 1):
            for i in range(n + 1):
                t = b.transition(nid("any_group_copy_flag", m, j, i))
                b.arc(activated, t)
                b.arc(b.place(nid("port_evidence", m, i)), t)
                swap_flag(b, t, e, j, i)
                b.arc(t, b.place(nid("any_group_copied_flag", m, i)))
        for i in range(n + 1):
            t = b.transition(nid("any_group_join", m, i))
            b.arc(b.place(nid("any_group_copied_flag", m, i)), t)
            b.arc(b.place(nid("port_complete", m)), t)
            b.arc(t, b.place(nid("group_complete", e)))


def _buffered_stream(b: NetBuilder, chan, s_port, r_port, opt: TranslationOptions) -> None:
    """FIFO slot pipeline: kinds queue in order, reads drain slot 0."""
    c = chan.id
    n = s_port.nesting
    size = chan.mode.size if chan.mode.size is not None else opt.buffer_default
    unlocked = b.place(nid("buf_slots_unlocked", c), marking=1)
    locked = b.place(nid("buf_slots_locked", c))
    for k in range(size):
        b.place(nid("buf_slot_empty", c, k), marking=1)
        b.place(nid("buf_slot_occupied", c, k))
        for i in range(n + 1):
            b.place(nid("buf_slot_flag", c, k, i))
    for i in range(n + 1):
        pending = b.place(nid("buf_write_pending", c, i))
        ts = b.transition(nid("port_send", s_port.id, i))
        b.arc(unlocked, ts)
        b.arc(ts, locked)
        b.arc(ts, pending)
        for k in range(size):
            t = b.transition(nid("buf_slot_select", c, k, i))
            b.arc(pending, t)
            b.arc(nid("buf_slot_empty", c, k), t)
            b.arc(locked, t)
            if k > 0:
                b.read_arc(nid("buf_slot_occupied", c, k - 1), t)
            b.arc(t, nid("buf_slot_flag", c, k, i))
            b.arc(t, nid("buf_slot_occupied", c, k))
            b.arc(t, unlocked)
        tr = b.transition(nid("port_recv", r_port.id, i))
        b.arc(nid("buf_slot_flag", c, 0, i), tr)
        b.arc(nid("buf_slot_occupied", c, 0), tr)
        b.arc(unlocked, tr)
        b.arc(tr, nid("buf_slot_empty", c, 0))
        if size > 1:
            b.arc(tr, b.place(nid("buf_slots_shifting", c, 1)))
        else:
            b.arc(tr, unlocked)
    for k in range(1, size):
        shifting = b.place(nid("buf_slots_shifting", c, k))
        nxt = nid("buf_slots_shifting", c, k + 1) if k < size - 1 else unlocked
        if k < size - 1:
            b.place(nxt)
        for i in range(n + 1):
            t = b.transition(nid("buf_shift_move", c, k, i))
            b.arc(shifting, t)
            b.arc(nid("buf_slot_flag", c, k, i), t)
            b.arc(nid("buf_slot_occupied", c, k), t)
            b.arc(nid("buf_slot_empty", c, k - 1), t)
            b.arc(t, nid("buf_slot_flag", c, k - 1, i))
            b.arc(t, nid("buf_slot_occupied", c, k - 1))
            b.arc(t, nid("buf_slot_empty", c, k))
            b.arc(t, nxt)
        # a hole means every later slot is empty too: stop early
        t = b.transition(nid("buf_shift_skip", c, k))
        b.arc(shifting, t)
        b.read_arc(nid("buf_slot_empty", c, k), t)
        b.arc(t, unlocked)


def streams_into(
    b: NetBuilder,
    component: Component,
    entities,
    opt: TranslationOptions,
    ready_senders=frozenset(),
) -> None:
    for info in entities.values():
        if not info.stream:
            continue
        entity_flags_into(b, info)
        if info.kind == "collective":
            continue
        if info.direction == "out":
            _output_entity(b, info, opt, ready_senders)
        else:
            _input_entity(b, info)
    for chan in component.channels:
        if chan.mode.kind != "buffered":
            continue
        hit_s = component.resolve(chan.sender)
        hit_r = component.resolve(chan.receiver)
        if hit_s is None or hit_r is None:
            continue
        _su, s_port, _so = hit_s
        _ru, r_port, _ro = hit_r
        if s_port.stream:
            _buffered_stream(b, chan, s_port, r_port, opt)


def unit_streams_into(
    b: NetBuilder,
    unit: Unit,
    entities,
    opt: TranslationOptions,
    ready_senders=frozenset(),
) -> None:
    """Stream layer of one unit in isolation: its entities, no channels."""
    for info in entities.values():
        if not info.stream:
            continue
        if info.kind == "collective":
            if unit.id in info.member_units:
                entity_flags_into(b, info)
            continue
        if info.unit != unit.id:
            continue
        entity_flags_into(b, info)
        if info.direction == "out":
            _output_entity(b, info, opt, ready_senders)
        else:
            _input_entity(b, info)


def attach_stream_protocol(
    builder: NetBuilder,
    component: Component,
    opt: TranslationOptions | None = None,
    ready_senders=frozenset(),
) -> NetBuilder:
    """Add the stream layer for every stream entity of the configuration."""
    opt = opt or DEFAULT_OPTIONS
    from hashnets.translate.base import component_entities

    streams_into(builder, component, component_entities(component), opt, ready_senders)
    return builder
