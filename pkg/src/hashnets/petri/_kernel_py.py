"""Pure-Python reachability kernel.

Twin of the compiled kernel in _kernel.pyx: same constructor signature,
same results bit for bit.  Selected at import time by hashnets.petri.reach
when the compiled extension is unavailable.

States are fixed-length byte strings, one byte per place; a marking
exceeding 255 on any place is an error (raise, never wrap).  Transition
input/output weights arrive as CSR arrays over sorted place/transition
indices.
"""

from __future__ import annotations

from array import array

IMPL = "python"


class MarkingOverflow(Exception):
    """A place would exceed 255 tokens; byte-packed states cannot hold it."""


class Kernel:
    def __init__(self, n_places, pre_off, pre_idx, pre_w, post_off, post_idx, post_w):
        self.n_places = n_places
        self.pre_off = pre_off
        self.pre_idx = pre_idx
        self.pre_w = pre_w
        self.post_off = post_off
        self.post_idx = post_idx
        self.post_w = post_w
        self.n_trans = len(pre_off) - 1

    def enabled(self, state: bytes, t: int) -> bool:
        pre_idx, pre_w = self.pre_idx, self.pre_w
        for k in range(self.pre_off[t], self.pre_off[t + 1]):
            if state[pre_idx[k]] < pre_w[k]:
                return False
        return True

    def _fire(self, state: bytes, t: int) -> bytes:
        buf = bytearray(state)
        for k in range(self.pre_off[t], self.pre_off[t + 1]):
            buf[self.pre_idx[k]] -= self.pre_w[k]
        for k in range(self.post_off[t], self.post_off[t + 1]):
            p = self.post_idx[k]
            v = buf[p] + self.post_w[k]
            if v > 255:
                raise MarkingOverflow(f"place index {p} would hold {v} tokens (max 255)")
            buf[p] = v
        return bytes(buf)

    def succ(self, state: bytes) -> list:
        """(transition index, successor state) in transition-index order."""
        out = []
        for t in range(self.n_trans):
            if self.enabled(state, t):
                out.append((t, self._fire(state, t)))
        return out

    def has_enabled(self, state: bytes) -> bool:
        return any(self.enabled(state, t) for t in range(self.n_trans))

    def explore(self, m0: bytes, max_states: int, max_depth: int):
        """Deterministic FIFO BFS.

        max_depth < 0 means unbounded.  Returns (states, edge_src, edge_t,
        edge_dst, expanded, depth_reached, truncated, peak_frontier) where
        `expanded` is the count of states whose successor sets are complete
        (a prefix of `states`, since discovery order is BFS order).
        """
        states = [m0]
        index = {m0: 0}
        edge_src = array("i")
        edge_t = array("i")
        edge_dst = array("i")
        pos = 0
        depth = 0
        level_last = 0
        peak = 1
        truncated = False
        capped = False
        while pos < len(states):
            if pos > level_last:
                depth += 1
                level_last = len(states) - 1
            if 0 <= max_depth <= depth:
                break
            state = states[pos]
            for t, ns in self.succ(state):
                j = index.get(ns)
                if j is None:
                    if len(states) >= max_states:
                        capped = True
                        break
                    j = len(states)
                    index[ns] = j
                    states.append(ns)
                edge_src.append(pos)
                edge_t.append(t)
                edge_dst.append(j)
            if capped:
                break
            pos += 1
            frontier = len(states) - pos
            if frontier > peak:
                peak = frontier
        expanded = pos
        depth_reached = depth
        if capped:
            truncated = True
        elif pos < len(states):
            truncated = any(self.has_enabled(states[i]) for i in range(pos, len(states)))
        return states, edge_src, edge_t, edge_dst, expanded, depth_reached, truncated, peak
