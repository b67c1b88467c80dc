"""Reachability graph construction.

Compiles a net into CSR weight arrays, picks the fastest available kernel
(compiled extension, else the pure-Python twin), and runs a deterministic
FIFO BFS.  With workers > 1 the frontier of each BFS level is expanded in
a thread pool and merged in discovery order, which yields the same graph
node for node as the sequential run; tests rely on that.

State bytes hold one place count per byte, so any marking above 255 on a
single place aborts with MarkingOverflow rather than wrapping.
"""

from __future__ import annotations

import os
import time
from array import array
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

from hashnets.petri._kernel_py import Kernel as PyKernel, MarkingOverflow
from hashnets.petri.net import InterlacedNet, NetError

try:  # pragma: no cover - depends on build environment
    from hashnets.petri._kernel import Kernel as CKernel

    DEFAULT_KERNEL = "c"
except ImportError:  # pragma: no cover
    CKernel = None
    DEFAULT_KERNEL = "python"

ENV_MAX_STATES = "HASHNETS_MAX_STATES"


def default_max_states() -> int:
    raw = os.environ.get(ENV_MAX_STATES)
    if raw:
        try:
            v = int(raw)
            if v >= 1:
                return v
        except ValueError:
            pass
    return 1_000_000


@dataclass
class Limits:
    max_states: int = field(default_factory=default_max_states)
    max_depth: int | None = None


def make_kernel(net: InterlacedNet, impl: str | None = None):
    """Compile the net into a kernel instance plus the id/index maps."""
    place_ids = net.sorted_places()
    transition_ids = net.sorted_transitions()
    p_index = {p: i for i, p in enumerate(place_ids)}

    pre_off = array("i", [0])
    pre_idx = array("i")
    pre_w = array("i")
    post_off = array("i", [0])
    post_idx = array("i")
    post_w = array("i")
    for t in transition_ids:
        for p, w in sorted(net.pre(t).items()):
            if w > 255:
                raise MarkingOverflow(f"arc weight {w} into {t} exceeds byte range")
            pre_idx.append(p_index[p])
            pre_w.append(w)
        pre_off.append(len(pre_idx))
        for p, w in sorted(net.post(t).items()):
            if w > 255:
                raise MarkingOverflow(f"arc weight {w} out of {t} exceeds byte range")
            post_idx.append(p_index[p])
            post_w.append(w)
        post_off.append(len(post_idx))

    chosen = impl or DEFAULT_KERNEL
    if chosen == "c":
        if CKernel is None:
            raise NetError("compiled kernel requested but not built")
        cls = CKernel
    elif chosen == "python":
        cls = PyKernel
    else:
        raise ValueError(f"unknown kernel impl {chosen!r}")
    kernel = cls(len(place_ids), pre_off, pre_idx, pre_w, post_off, post_idx, post_w)

    m0 = bytearray(len(place_ids))
    for p, c in net.m0.items():
        if c > 255:
            raise MarkingOverflow(f"initial marking {c} on {p} exceeds byte range")
        m0[p_index[p]] = c
    return kernel, place_ids, transition_ids, bytes(m0), chosen


@dataclass
class ReachGraph:
    net: InterlacedNet
    place_ids: list
    transition_ids: list
    states: list  # of bytes
    edge_src: array
    edge_t: array
    edge_dst: array
    expanded: int
    depth_reached: int
    truncated: bool
    peak_frontier: int
    elapsed: float
    kernel_impl: str
    workers: int
    _succ_off: array | None = None
    _pred_off: array | None = None
    _pred_eidx: array | None = None

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_edges(self) -> int:
        return len(self.edge_src)

    def marking(self, i: int) -> dict:
        s = self.states[i]
        return {self.place_ids[k]: s[k] for k in range(len(s)) if s[k]}

    def place_index(self, place_id: str) -> int:
        try:
            return self.place_ids.index(place_id)
        except ValueError:
            raise NetError(f"unknown place {place_id!r}") from None

    # edges are appended grouped by source in BFS order, so the successor
    # CSR needs offsets only
    def _ensure_succ(self) -> None:
        if self._succ_off is not None:
            return
        off = array("i", bytes(4 * (self.n_states + 1)))
        for s in self.edge_src:
            off[s + 1] += 1
        for i in range(1, len(off)):
            off[i] += off[i - 1]
        self._succ_off = off

    def successors(self, i: int) -> list:
        """(edge index, transition index, destination state index)."""
        self._ensure_succ()
        lo, hi = self._succ_off[i], self._succ_off[i + 1]
        return [(e, self.edge_t[e], self.edge_dst[e]) for e in range(lo, hi)]

    def out_degree(self, i: int) -> int:
        self._ensure_succ()
        return self._succ_off[i + 1] - self._succ_off[i]

    def _ensure_pred(self) -> None:
        if self._pred_off is not None:
            return
        off = array("i", bytes(4 * (self.n_states + 1)))
        for d in self.edge_dst:
            off[d + 1] += 1
        for i in range(1, len(off)):
            off[i] += off[i - 1]
        eidx = array("i", bytes(4 * self.n_edges))
        cursor = array("i", off[:-1])
        for e, d in enumerate(self.edge_dst):
            eidx[cursor[d]] = e
            cursor[d] += 1
        self._pred_off = off
        self._pred_eidx = eidx

    def predecessors(self, i: int) -> list:
        """(edge index, transition index, source state index)."""
        self._ensure_pred()
        lo, hi = self._pred_off[i], self._pred_off[i + 1]
        out = []
        for k in range(lo, hi):
            e = self._pred_eidx[k]
            out.append((e, self.edge_t[e], self.edge_src[e]))
        return out

    def dead_states(self) -> list:
        """Fully expanded states with no enabled transition."""
        self._ensure_succ()
        return [
            i
            for i in range(self.expanded)
            if self._succ_off[i + 1] == self._succ_off[i]
        ]

    def final_state_indices(self) -> list:
        if self.net.final is None:
            return []
        p_index = {p: k for k, p in enumerate(self.place_ids)}
        atoms = []
        for place, op, count in self.net.final.atoms:
            if place not in p_index:
                raise NetError(f"final predicate references unknown place {place!r}")
            atoms.append((p_index[place], op, count))
        out = []
        for i, s in enumerate(self.states):
            ok = True
            for k, op, count in atoms:
                v = s[k]
                if (op == ">=" and v < count) or (op == "==" and v != count):
                    ok = False
                    break
            if ok:
                out.append(i)
        return out

    def path_to(self, target: int) -> list:
        """Edge indices of a shortest root-to-target path (BFS tree walk)."""
        self._ensure_pred()
        # BFS discovery order guarantees every state has a predecessor with
        # a smaller index, so walking minimal-source predecessors terminates
        path = []
        cur = target
        while cur != 0:
            best = min(self.predecessors(cur), key=lambda x: x[2])
            path.append(best[0])
            cur = best[2]
        path.reverse()
        return path

    def stats(self) -> dict:
        return {
            "states": self.n_states,
            "edges": self.n_edges,
            "expanded": self.expanded,
            "depth": self.depth_reached,
            "truncated": self.truncated,
            "peak_frontier": self.peak_frontier,
            "elapsed_s": round(self.elapsed, 6),
            "kernel": self.kernel_impl,
            "workers": self.workers,
        }


def _explore_parallel(kernel, m0: bytes, max_states: int, max_depth: int, workers: int):
    """Level-synchronized BFS; must replicate kernel.explore exactly."""
    states = [m0]
    index = {m0: 0}
    edge_src = array("i")
    edge_t = array("i")
    edge_dst = array("i")
    pos = 0
    depth = 0
    depth_reached = 0
    peak = 1
    truncated = False
    capped = False
    level = [0]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while level:
            if 0 <= max_depth <= depth:
                depth_reached = depth
                break
            succ_lists = list(pool.map(kernel.succ, [states[i] for i in level], chunksize=16))
            level_start = len(states)
            for li, i in enumerate(level):
                for t, ns in succ_lists[li]:
                    j = index.get(ns)
                    if j is None:
                        if len(states) >= max_states:
                            capped = True
                            break
                        j = len(states)
                        index[ns] = j
                        states.append(ns)
                    edge_src.append(i)
                    edge_t.append(t)
                    edge_dst.append(j)
                if capped:
                    break
                pos += 1
                frontier = len(states) - pos
                if frontier > peak:
                    peak = frontier
            depth_reached = depth
            if capped:
                break
            level = list(range(level_start, len(states)))
            if level:
                depth += 1
    expanded = pos
    if capped:
        truncated = True
    elif pos < len(states):
        truncated = any(kernel.has_enabled(states[i]) for i in range(pos, len(states)))
    return states, edge_src, edge_t, edge_dst, expanded, depth_reached, truncated, peak


def reachability_graph(
    net: InterlacedNet,
    limits: Limits | None = None,
    *,
    workers: int = 1,
    kernel_impl: str | None = None,
) -> ReachGraph:
    limits = limits or Limits()
    if limits.max_states < 1:
        raise ValueError("max_states must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    kernel, place_ids, transition_ids, m0, chosen = make_kernel(net, kernel_impl)
    max_depth = -1 if limits.max_depth is None else limits.max_depth
    t0 = time.perf_counter()
    if workers == 1:
        result = kernel.explore(m0, limits.max_states, max_depth)
    else:
        result = _explore_parallel(kernel, m0, limits.max_states, max_depth, workers)
    states, es, et, ed, expanded, depth_reached, truncated, peak = result
    elapsed = time.perf_counter() - t0
    return ReachGraph(
        net=net,
        place_ids=place_ids,
        transition_ids=transition_ids,
        states=states,
        edge_src=es,
        edge_t=et,
        edge_dst=ed,
        expanded=expanded,
        depth_reached=depth_reached,
        truncated=truncated,
        peak_frontier=peak,
        elapsed=elapsed,
        kernel_impl=chosen,
        workers=workers,
    )
