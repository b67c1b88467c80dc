"""Token game, slice composition, reachability, and net languages.

The naive reachability oracle below works on plain dict markings straight
off the arc set and shares no code with the kernels; graphs are compared
against it node for node.
"""

import random
from collections import deque

import pytest

from _netgen import random_net
from hashnets.petri import (
    FinalPredicate,
    InterlacedNet,
    LabelConflict,
    Limits,
    NetBuilder,
    NoFinalMarking,
    NotEnabled,
    Place,
    SortClash,
    Transition,
    UnknownTransition,
    enabled,
    fire,
    net_language,
    net_to_dot,
    reach_to_dot,
    reachability_graph,
    terminal_language,
    unfold,
    union,
)
from hashnets.petri.net import Arc, empty_net
from hashnets.petri.reach import CKernel, make_kernel
from hashnets.petri._kernel_py import MarkingOverflow


# ---------------------------------------------------------------------------
# independent oracle


def naive_succ(net, marking):
    out = []
    for tid in sorted(net.transitions):
        need = {}
        for a in net.arcs:
            if a.dst == tid:
                need[a.src] = need.get(a.src, 0) + a.weight
        if all(marking.get(p, 0) >= w for p, w in need.items()):
            m2 = dict(marking)
            for a in net.arcs:
                if a.dst == tid:
                    m2[a.src] = m2.get(a.src, 0) - a.weight
            for a in net.arcs:
                if a.src == tid:
                    m2[a.dst] = m2.get(a.dst, 0) + a.weight
            out.append((tid, {p: c for p, c in m2.items() if c}))
    return out


def naive_reach(net, cap):
    """BFS over dict markings: (markings in discovery order, edge triples)."""
    root = {p: c for p, c in net.m0.items()}
    key = lambda m: tuple(sorted(m.items()))
    order = [root]
    index = {key(root): 0}
    edges = []
    pos = 0
    while pos < len(order):
        for tid, m2 in naive_succ(net, order[pos]):
            k = key(m2)
            if k not in index:
                if len(order) >= cap:
                    return order, edges, True
                index[k] = len(order)
                order.append(m2)
            edges.append((pos, tid, index[k]))
        pos += 1
    return order, edges, False


def chain_net():
    nb = NetBuilder()
    nb.place("p", marking=1)
    nb.place("q")
    nb.transition("t", label="a!")
    nb.arc("p", "t")
    nb.arc("t", "q")
    nb.final = FinalPredicate((("q", ">=", 1),))
    return nb.build()


# ---------------------------------------------------------------------------
# union


def test_union_identity():
    a = chain_net()
    u = union(a, empty_net())
    assert set(u.places) == set(a.places)
    assert set(u.transitions) == set(a.transitions)
    assert u.arcs == a.arcs
    assert u.m0 == a.m0


def test_union_precedes_quotient():
    # same qualifier on two differently named places: still two places
    a = NetBuilder()
    a.place("x1", qualifiers=[("q", 1)])
    b = NetBuilder()
    b.place("x2", qualifiers=[("q", 1)])
    u = union(a.build(), b.build())
    assert len(u.places) == 2


def test_union_shared_place_markings_add():
    a = NetBuilder()
    a.place("x", marking=1)
    b = NetBuilder()
    b.place("x", marking=2)
    assert union(a.build(), b.build()).m0 == {"x": 3}


def test_union_node_counts_add():
    a = chain_net()
    b_builder = NetBuilder()
    b_builder.place("r", marking=1)
    b_builder.transition("u", label="b!")
    b_builder.arc("r", "u")
    b = b_builder.build()
    u = union(a, b)
    assert len(u.places) == len(a.places) + len(b.places)
    assert len(u.transitions) == len(a.transitions) + len(b.transitions)


def test_union_label_conflict():
    a = NetBuilder()
    a.transition("t", label="a!")
    b = NetBuilder()
    b.transition("t", label="b!")
    with pytest.raises(LabelConflict):
        union(a.build(), b.build())


def test_union_silent_label_yields_to_visible():
    a = NetBuilder()
    a.transition("t")
    b = NetBuilder()
    b.transition("t", label="a!")
    assert union(a.build(), b.build()).transitions["t"].label == "a!"


def test_union_commutative_associative():
    rng = random.Random(7)
    nets = []
    for i in range(3):
        nb = NetBuilder()
        nb.place(f"s{i}", marking=1)
        nb.transition(f"w{i}", label=f"v{i}!")
        nb.arc(f"s{i}", f"w{i}")
        nets.append(nb.build())
    a, b, c = nets
    ab_c = union(union(a, b), c)
    a_bc = union(a, union(b, c))
    ba = union(b, a)
    ab = union(a, b)
    assert set(ab_c.places) == set(a_bc.places)
    assert ab_c.arcs == a_bc.arcs
    assert set(ab.places) == set(ba.places) and ab.m0 == ba.m0


# ---------------------------------------------------------------------------
# unfold


def test_unfold_single_slice_is_itself():
    a = chain_net()
    u = unfold(a)
    assert set(u.places) == set(a.places)
    assert set(u.transitions) == set(a.transitions)
    assert u.arcs == a.arcs


def test_unfold_merges_shared_qualifier_places():
    a = NetBuilder()
    a.place("x1", qualifiers=[("chan", "c", "free")], marking=1)
    b = NetBuilder()
    b.place("x2", qualifiers=[("chan", "c", "free")], marking=1)
    u = unfold(union(a.build(), b.build()))
    assert len(u.places) == 1
    merged = next(iter(u.places))
    assert merged == "x1"  # lexicographic minimum of the class
    assert u.m0 == {"x1": 2}  # markings of merged places sum


def test_unfold_merges_transitions_and_concatenates_labels():
    a = NetBuilder()
    a.place("s", marking=1)
    a.transition("recv_r", label="r?", qualifiers=[("chan", "c", "xfer")])
    a.arc("s", "recv_r")
    b = NetBuilder()
    b.place("u", marking=1)
    b.transition("send_s", label="s!", qualifiers=[("chan", "c", "xfer")])
    b.arc("u", "send_s")
    u = unfold(union(a.build(), b.build()))
    assert len(u.transitions) == 1
    t = u.transitions["recv_r"]
    assert t.label == "s!r?"  # outputs first, then inputs
    # both input arcs survive on the merged transition
    assert {(a_.src, a_.dst) for a_ in u.arcs} == {("s", "recv_r"), ("u", "recv_r")}


def test_unfold_transitive_closure():
    nb = NetBuilder()
    nb.place("a", qualifiers=[("q", 1)])
    nb.place("b", qualifiers=[("q", 1), ("q", 2)])
    nb.place("c", qualifiers=[("q", 2)])
    u = unfold(nb.build())
    assert len(u.places) == 1


def test_unfold_sums_parallel_arc_weights():
    nb = NetBuilder()
    nb.place("p1", qualifiers=[("m",)], marking=1)
    nb.place("p2", qualifiers=[("m",)], marking=1)
    nb.transition("t")
    nb.arc("p1", "t", 1)
    nb.arc("p2", "t", 2)
    u = unfold(nb.build())
    arcs = list(u.arcs)
    assert len(arcs) == 1 and arcs[0].weight == 3


def test_unfold_sort_clash():
    nb = NetBuilder()
    nb.place("p", qualifiers=[("shared",)])
    nb.transition("t", qualifiers=[("shared",)])
    with pytest.raises(SortClash):
        unfold(nb.build())


def test_unfold_idempotent_random():
    rng = random.Random(11)
    for _ in range(25):
        net = random_net(rng)
        # sprinkle qualifiers to force some merges
        nb = NetBuilder()
        nb.include(net)
        for i, p in enumerate(sorted(net.places)):
            if rng.random() < 0.5:
                nb.place(p, qualifiers=[("grp", i % 2)])
        once = unfold(nb.build())
        twice = unfold(once)
        assert set(once.places) == set(twice.places)
        assert set(once.transitions) == set(twice.transitions)
        assert once.arcs == twice.arcs
        assert once.m0 == twice.m0


# ---------------------------------------------------------------------------
# token game


def test_enabled_basic():
    net = chain_net()
    assert enabled(net, {"p": 1}, "t") is True
    nb = NetBuilder()
    nb.place("p", marking=2)
    nb.transition("t")
    nb.arc("p", "t", 3)
    assert enabled(nb.build(), {"p": 2}, "t") is False


def test_enabled_unknown_transition():
    with pytest.raises(UnknownTransition):
        enabled(chain_net(), {}, "zz")


def test_fire_moves_token():
    net = chain_net()
    assert fire(net, {"p": 1}, "t") == {"q": 1}


def test_fire_self_loop_conserves():
    nb = NetBuilder()
    nb.place("p", marking=1)
    nb.transition("t")
    nb.arc("p", "t")
    nb.arc("t", "p")
    assert fire(nb.build(), {"p": 1}, "t") == {"p": 1}


def test_fire_weighted():
    nb = NetBuilder()
    nb.place("p", marking=5)
    nb.place("q")
    nb.transition("t")
    nb.arc("p", "t", 2)
    nb.arc("t", "q", 3)
    assert fire(nb.build(), {"p": 5}, "t") == {"p": 3, "q": 3}


def test_fire_not_enabled():
    with pytest.raises(NotEnabled):
        fire(chain_net(), {"q": 1}, "t")


# ---------------------------------------------------------------------------
# reachability


def test_reach_two_states():
    g = reachability_graph(chain_net())
    assert g.n_states == 2 and g.n_edges == 1
    assert not g.truncated
    assert g.marking(0) == {"p": 1} and g.marking(1) == {"q": 1}


def test_reach_matches_naive_oracle():
    rng = random.Random(23)
    for _ in range(30):
        net = random_net(rng)
        g = reachability_graph(net, Limits(max_states=120))
        markings, edges, _trunc = naive_reach(net, 120)
        assert [g.marking(i) for i in range(g.n_states)] == markings
        t_ids = g.transition_ids
        got = [
            (g.edge_src[e], t_ids[g.edge_t[e]], g.edge_dst[e])
            for e in range(g.n_edges)
        ]
        assert got == edges


def test_reach_kernels_and_workers_agree():
    rng = random.Random(31)
    for _ in range(10):
        net = random_net(rng)
        runs = [
            reachability_graph(net, Limits(max_states=120), kernel_impl="python"),
            reachability_graph(net, Limits(max_states=120), workers=4, kernel_impl="python"),
        ]
        if CKernel is not None:
            runs.append(reachability_graph(net, Limits(max_states=120), kernel_impl="c"))
            runs.append(reachability_graph(net, Limits(max_states=120), workers=3, kernel_impl="c"))
        base = runs[0]
        for other in runs[1:]:
            assert other.states == base.states
            assert list(other.edge_src) == list(base.edge_src)
            assert list(other.edge_t) == list(base.edge_t)
            assert list(other.edge_dst) == list(base.edge_dst)
            assert other.expanded == base.expanded
            assert other.truncated == base.truncated


def test_reach_truncation_flag():
    # one-place generator grows forever; cap cuts it
    nb = NetBuilder()
    nb.place("p", marking=1)
    nb.place("c")
    nb.transition("t")
    nb.arc("p", "t")
    nb.arc("t", "p")
    nb.arc("t", "c")
    g = reachability_graph(nb.build(), Limits(max_states=10))
    assert g.truncated and g.n_states == 10
    g2 = reachability_graph(nb.build(), Limits(max_states=10), workers=2)
    assert g2.states == g.states and g2.expanded == g.expanded


def test_reach_depth_limit():
    nb = NetBuilder()
    nb.place("p", marking=1)
    nb.place("c")
    nb.transition("t")
    nb.arc("p", "t")
    nb.arc("t", "p")
    nb.arc("t", "c")
    g = reachability_graph(nb.build(), Limits(max_depth=3))
    assert g.depth_reached == 3 and g.truncated
    assert g.n_states == 4  # c grows by one per level


def test_reach_overflow_detected():
    nb = NetBuilder()
    nb.place("p", marking=1)
    nb.place("c")
    nb.transition("t")
    nb.arc("p", "t")
    nb.arc("t", "p")
    nb.arc("t", "c", 2)
    with pytest.raises(MarkingOverflow):
        reachability_graph(nb.build(), Limits(max_states=100_000))


def test_reach_dead_states_and_path():
    net = chain_net()
    g = reachability_graph(net)
    assert g.dead_states() == [1]
    assert g.final_state_indices() == [1]
    path = g.path_to(1)
    assert len(path) == 1 and g.transition_ids[g.edge_t[path[0]]] == "t"


# ---------------------------------------------------------------------------
# languages


def seq_ab_net():
    nb = NetBuilder()
    nb.place("s0", marking=1)
    nb.place("s1")
    nb.place("s2")
    nb.transition("t1", label="a!")
    nb.transition("t2", label="b?")
    nb.arc("s0", "t1")
    nb.arc("t1", "s1")
    nb.arc("s1", "t2")
    nb.arc("t2", "s2")
    nb.final = FinalPredicate((("s2", ">=", 1),))
    return nb.build()


def test_terminal_language_chain():
    r = terminal_language(seq_ab_net(), 8)
    assert r.words == {("a!", "b?")}
    assert not r.truncated


def test_terminal_language_skip_net():
    nb = NetBuilder()
    nb.place("only", marking=1)
    nb.final = FinalPredicate((("only", ">=", 1),))
    r = terminal_language(nb.build(), 8)
    assert r.words == {()}


def test_terminal_language_requires_final():
    nb = NetBuilder()
    nb.place("p", marking=1)
    with pytest.raises(NoFinalMarking):
        terminal_language(nb.build(), 4)


def test_net_language_prefix_closed():
    r = net_language(seq_ab_net(), 8)
    assert r.words == {(), ("a!",), ("a!", "b?")}
    rng = random.Random(5)
    for _ in range(10):
        net = random_net(rng)
        words = net_language(net, 4, limits=Limits(max_states=120)).words
        for w in words:
            assert all(w[:k] in words for k in range(len(w)))


def test_language_erases_silent_labels():
    nb = NetBuilder()
    nb.place("s0", marking=1)
    nb.place("s1")
    nb.place("s2")
    nb.transition("t1")  # silent
    nb.transition("t2", label="b?")
    nb.arc("s0", "t1")
    nb.arc("t1", "s1")
    nb.arc("s1", "t2")
    nb.arc("t2", "s2")
    nb.final = FinalPredicate((("s2", ">=", 1),))
    assert terminal_language(nb.build(), 8).words == {("b?",)}


def test_language_maxlen_bound():
    nb = NetBuilder()
    nb.place("p", marking=1)
    nb.transition("t", label="a!")
    nb.arc("p", "t")
    nb.arc("t", "p")
    nb.final = FinalPredicate((("p", ">=", 1),))
    r = terminal_language(nb.build(), 3)
    assert r.words == {(), ("a!",), ("a!", "a!"), ("a!", "a!", "a!")}


# ---------------------------------------------------------------------------
# conservation property (firing rule arithmetic)


def test_firing_conservation_random():
    rng = random.Random(41)
    for _ in range(40):
        net = random_net(rng)
        g = reachability_graph(net, Limits(max_states=60))
        # sample a few edges and re-check the arithmetic from the arc set
        n = min(g.n_edges, 20)
        for e in range(n):
            src = g.marking(g.edge_src[e])
            dst = g.marking(g.edge_dst[e])
            tid = g.transition_ids[g.edge_t[e]]
            pre = net.pre(tid)
            post = net.post(tid)
            for p in set(src) | set(dst) | set(pre) | set(post):
                assert dst.get(p, 0) - src.get(p, 0) == post.get(p, 0) - pre.get(p, 0)


# ---------------------------------------------------------------------------
# dot


def test_dot_outputs():
    net = seq_ab_net()
    d = net_to_dot(net)
    assert d.startswith("digraph") and '"t1"' in d and "ellipse" in d
    g = reachability_graph(net)
    rd = reach_to_dot(g)
    assert "s0 -> s1" in rd and "doublecircle" in rd
    assert net_to_dot(net) == net_to_dot(net)
