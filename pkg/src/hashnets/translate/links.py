"""Channel and collective layers joining independently translated units.

Synchronous and ready channels merge the two communication transitions of
their endpoints by tagging both with one shared qualifier; the quotient then
fuses them into a single rendezvous.  Channel-level bookkeeping arcs always
attach to the sender copy only, because the quotient sums parallel arcs from
distinct pre-images.
"""

from __future__ import annotations

from hashnets.ahcl.ast import Channel, Collective, Component
from hashnets.petri import NetBuilder

from hashnets.translate.base import (
    ArityMismatch,
    DEFAULT_OPTIONS,
    TranslationOptions,
    UnboundPort,
    flag_dual,
    flag_place,
    nid,
    prepared_dual,
    swap_flag,
)


def _comm_id(port, index=None) -> str:
    family = "port_send" if port.direction == "out" else "port_recv"
    return nid(family, port.id) if index is None else nid(family, port.id, index)


def _resolve(component: Component, ref, chan_id: str):
    hit = component.resolve(ref)
    if hit is None:
        raise UnboundPort(f"channel '{chan_id}': '{ref}' does not name a port")
    return hit


def channel_into(
    b: NetBuilder,
    chan: Channel,
    component: Component,
    opt: TranslationOptions,
    ready_senders=frozenset(),
) -> None:
    _su, s_port, _so = _resolve(component, chan.sender, chan.id)
    _ru, r_port, _ro = _resolve(component, chan.receiver, chan.id)
    if s_port.nesting != r_port.nesting or s_port.stream != r_port.stream:
        raise ArityMismatch(
            f"channel '{chan.id}': endpoint shapes differ "
            f"({s_port.id} vs {r_port.id})"
        )
    per_kind = s_port.stream and opt.with_stream_protocol
    indices = tuple(range(s_port.nesting + 1)) if per_kind else (None,)

    if chan.mode.kind == "buffered":
        size = chan.mode.size if chan.mode.size is not None else opt.buffer_default
        free = b.place(nid("chan_buffer_free", chan.id), marking=size)
        used = b.place(nid("chan_buffer_used", chan.id))
        for i in indices:
            ts = b.transition(_comm_id(s_port, i))
            tr = b.transition(_comm_id(r_port, i))
            b.arc(free, ts)
            b.arc(ts, used)
            b.arc(used, tr)
            b.arc(tr, free)
        return

    for i in indices:
        q = ("chan", chan.id, "xfer") if i is None else ("chan", chan.id, "xfer", i)
        b.transition(_comm_id(s_port, i), qualifiers=(q,))
        b.transition(_comm_id(r_port, i), qualifiers=(q,))
    if chan.mode.kind == "ready":
        gate = b.place(nid("chan_ready_is_open", chan.id), marking=1)
        b.place(prepared_dual(s_port.id), marking=1)
        for i in indices:
            b.read_arc(gate, _comm_id(s_port, i))
        bad = b.transition(nid("chan_ready_misuse", chan.id))
        b.read_arc(b.place(nid("port_prepared", r_port.id)), bad)
        b.read_arc(prepared_dual(s_port.id), bad)
        b.arc(gate, bad)
        b.arc(bad, b.place(nid("chan_ready_misused", chan.id)))


def collective_into(
    b: NetBuilder,
    coll: Collective,
    component: Component,
    opt: TranslationOptions,
    only_units=None,
) -> None:
    """The shared rendezvous; only_units restricts it for standalone units."""
    for _uid, pid in coll.members:
        hit = component.find_port(pid)
        if hit is not None:
            _u, port, _g = hit
            if port.stream != coll.stream or port.nesting != coll.nesting:
                raise ArityMismatch(
                    f"collective '{coll.id}': member '{pid}' collides with a "
                    "port of different shape"
                )
    units = tuple(u for u, _p in coll.members)
    if only_units is not None:
        units = tuple(u for u in units if u in only_units)
    ready = {u: b.place(nid("col_member_ready", coll.id, u)) for u in units}
    done = {u: b.place(nid("col_member_done", coll.id, u)) for u in units}
    per_kind = coll.stream and opt.with_stream_protocol
    if not per_kind:
        t = b.transition(nid("col_sync", coll.id), label=coll.id)
        for u in units:
            b.arc(ready[u], t)
            b.arc(t, done[u])
        return
    for j in range(coll.nesting + 1):
        for i in range(coll.nesting + 1):
            t = b.transition(nid("col_sync", coll.id, j, i), label=coll.id)
            for u in units:
                b.arc(ready[u], t)
                b.arc(t, done[u])
            swap_flag(b, t, coll.id, j, i)


def translate_channel(
    chan: Channel,
    component: Component,
    builder: NetBuilder | None = None,
    opt: TranslationOptions | None = None,
    ready_senders=frozenset(),
) -> NetBuilder:
    """Contribute one channel's layer; composed by the component translator."""
    b = builder if builder is not None else NetBuilder()
    channel_into(b, chan, component, opt or DEFAULT_OPTIONS, ready_senders)
    return b


def translate_collective(
    coll: Collective,
    component: Component,
    builder: NetBuilder | None = None,
    opt: TranslationOptions | None = None,
) -> NetBuilder:
    """Contribute one collective's rendezvous layer."""
    b = builder if builder is not None else NetBuilder()
    collective_into(b, coll, component, opt or DEFAULT_OPTIONS)
    return b
