# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled reachability kernel.

Same contract as hashnets.petri._kernel_py (the pure-Python twin): byte
string states, CSR transition weights, deterministic FIFO BFS.  Results
must match the twin bit for bit; tests compare them directly.
"""

from array import array

from cpython.bytes cimport PyBytes_AS_STRING, PyBytes_FromStringAndSize

from hashnets.petri._kernel_py import MarkingOverflow

IMPL = "c"


cdef class Kernel:
    cdef public int n_places, n_trans
    cdef int[::1] pre_off, pre_idx, pre_w, post_off, post_idx, post_w
    cdef bytearray _scratch

    def __init__(self, n_places, pre_off, pre_idx, pre_w, post_off, post_idx, post_w):
        self.n_places = n_places
        self.pre_off = pre_off
        self.pre_idx = pre_idx
        self.pre_w = pre_w
        self.post_off = post_off
        self.post_idx = post_idx
        self.post_w = post_w
        self.n_trans = len(pre_off) - 1
        self._scratch = bytearray(n_places)

    cdef inline bint _enabled(self, const unsigned char* s, int t) nogil:
        cdef int k
        for k in range(self.pre_off[t], self.pre_off[t + 1]):
            if s[self.pre_idx[k]] < <unsigned char> self.pre_w[k]:
                return False
        return True

    cdef int _fire_into(self, const unsigned char* s, int t, unsigned char* buf) except -1:
        cdef int k, p, v
        for k in range(self.n_places):
            buf[k] = s[k]
        for k in range(self.pre_off[t], self.pre_off[t + 1]):
            buf[self.pre_idx[k]] -= <unsigned char> self.pre_w[k]
        for k in range(self.post_off[t], self.post_off[t + 1]):
            p = self.post_idx[k]
            v = buf[p] + self.post_w[k]
            if v > 255:
                raise MarkingOverflow(
                    "place index %d would hold %d tokens (max 255)" % (p, v)
                )
            buf[p] = <unsigned char> v
        return 0

    def enabled(self, bytes state, int t):
        return self._enabled(<const unsigned char*> PyBytes_AS_STRING(state), t)

    def succ(self, bytes state):
        """(transition index, successor state) in transition-index order."""
        cdef const unsigned char* s = <const unsigned char*> PyBytes_AS_STRING(state)
        cdef int t
        cdef unsigned char[::1] bv = self._scratch
        out = []
        for t in range(self.n_trans):
            if self._enabled(s, t):
                self._fire_into(s, t, &bv[0])
                out.append((t, PyBytes_FromStringAndSize(<char*> &bv[0], self.n_places)))
        return out

    def has_enabled(self, bytes state):
        cdef const unsigned char* s = <const unsigned char*> PyBytes_AS_STRING(state)
        cdef int t
        for t in range(self.n_trans):
            if self._enabled(s, t):
                return True
        return False

    def explore(self, bytes m0, long max_states, long max_depth):
        """Deterministic FIFO BFS; see the twin for the result contract."""
        states = [m0]
        index = {m0: 0}
        edge_src = array("i")
        edge_t = array("i")
        edge_dst = array("i")
        es_append = edge_src.append
        et_append = edge_t.append
        ed_append = edge_dst.append
        cdef long pos = 0, depth = 0, level_last = 0, peak = 1, frontier
        cdef long n_states = 1
        cdef bint truncated = False, capped = False
        cdef int t
        cdef const unsigned char* s
        cdef unsigned char[::1] bv = self._scratch
        cdef bytes state, ns
        while pos < n_states:
            if pos > level_last:
                depth += 1
                level_last = n_states - 1
            if 0 <= max_depth <= depth:
                break
            state = <bytes> states[pos]
            s = <const unsigned char*> PyBytes_AS_STRING(state)
            for t in range(self.n_trans):
                if not self._enabled(s, t):
                    continue
                self._fire_into(s, t, &bv[0])
                ns = PyBytes_FromStringAndSize(<char*> &bv[0], self.n_places)
                j = index.get(ns)
                if j is None:
                    if n_states >= max_states:
                        capped = True
                        break
                    j = n_states
                    index[ns] = j
                    states.append(ns)
                    n_states += 1
                es_append(pos)
                et_append(t)
                ed_append(j)
            if capped:
                break
            pos += 1
            frontier = n_states - pos
            if frontier > peak:
                peak = frontier
        expanded = pos
        depth_reached = depth
        if capped:
            truncated = True
        elif pos < n_states:
            truncated = any(self.has_enabled(states[i]) for i in range(pos, n_states))
        return states, edge_src, edge_t, edge_dst, expanded, depth_reached, truncated, peak
