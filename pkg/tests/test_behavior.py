"""Stream semantics and the trace oracle.

Expected kind sequences were derived by hand from the flattening rule
(substream at 0-based depth k ends with EOS k, leaves sit at depth n)
before the implementation was written, then frozen here.
"""

import pytest
from hypothesis import given, strategies as st

from hashnets.behavior import (
    DATA,
    Activate,
    Alt,
    Conjunction,
    DepthExceeded,
    Do,
    Eos,
    If,
    Kind,
    Par,
    RepeatCounter,
    RepeatForever,
    RepeatUntil,
    ScriptExhausted,
    Seq,
    Signal,
    Skip,
    StreamError,
    StreamPredicate,
    TriBool,
    UnknownPort,
    Wait,
    activations,
    enumerate_traces,
    evaluate_stream_predicate,
    kind_alphabet,
    kind_from_str,
    stream_flatten,
    valid_successors,
)


def K(*names):
    return [kind_from_str(n) for n in names]


# ---------------------------------------------------------------------------
# flattening


def test_flatten_plain_value():
    assert stream_flatten(7, 0) == [DATA]


def test_flatten_empty_stream():
    assert stream_flatten([], 1) == [Eos(0)]


def test_flatten_simple_stream():
    assert stream_flatten([1, 2, 3], 1) == K("DATA", "DATA", "DATA", "EOS0")


def test_flatten_nested_two():
    assert stream_flatten([[1], [], [2, 3]], 2) == K(
        "DATA", "EOS1", "EOS1", "DATA", "DATA", "EOS1", "EOS0"
    )


def test_flatten_depth_four():
    # hand-derived: 28 kinds, one per value/terminator in traversal order
    tree = [
        [[[1], [5, 6]], [[2, 3]]],
        [],
        [[[4, 5, 7], [8, 9]], [[6], [7, 9]]],
    ]
    assert stream_flatten(tree, 4) == K(
        "DATA", "EOS3", "DATA", "DATA", "EOS3", "EOS2",
        "DATA", "DATA", "EOS3", "EOS2", "EOS1",
        "EOS1",
        "DATA", "DATA", "DATA", "EOS3", "DATA", "DATA", "EOS3", "EOS2",
        "DATA", "EOS3", "DATA", "DATA", "EOS3", "EOS2", "EOS1",
        "EOS0",
    )


def test_flatten_rejects_deep_leaf():
    with pytest.raises(DepthExceeded):
        stream_flatten([[1]], 1)
    with pytest.raises(DepthExceeded):
        stream_flatten([5], 0)


def test_flatten_rejects_shallow_leaf():
    with pytest.raises(StreamError):
        stream_flatten([1, [2]], 2)


def _trees(depth):
    if depth == 0:
        return st.integers(0, 9)
    return st.lists(_trees(depth - 1), max_size=4)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), _trees(n))))
def test_flatten_respects_successor_relation(case):
    n, tree = case
    seq = stream_flatten(tree, n)
    assert seq[-1] == Eos(0)
    assert all(b in valid_successors(a, n) for a, b in zip(seq, seq[1:]))


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), _trees(n))))
def test_flatten_counts_leaves(case):
    n, tree = case

    def leaves(node):
        if not isinstance(node, list):
            return 1
        return sum(leaves(c) for c in node)

    assert stream_flatten(tree, n).count(DATA) == leaves(tree)


# ---------------------------------------------------------------------------
# successors


def test_successors_n3_table():
    assert valid_successors(DATA, 3) == {DATA, Eos(2)}
    assert valid_successors(Eos(2), 3) == {DATA, Eos(1), Eos(2)}
    assert valid_successors(Eos(1), 3) == {DATA, Eos(0), Eos(1), Eos(2)}
    assert valid_successors(Eos(0), 3) == frozenset()


def test_successors_n1():
    assert valid_successors(DATA, 1) == {DATA, Eos(0)}
    assert valid_successors(Eos(0), 1) == frozenset()


def test_successors_rejects_bad_level():
    with pytest.raises(ValueError):
        valid_successors(Eos(3), 3)
    with pytest.raises(ValueError):
        valid_successors(DATA, 0)


def test_kind_alphabet():
    assert kind_alphabet(0) == ()
    assert kind_alphabet(2) == (DATA, Eos(0), Eos(1))
    assert kind_from_str("eos2") == Eos(2)
    assert str(Eos(2)) == "EOS2"
    assert str(DATA) == "DATA"


# ---------------------------------------------------------------------------
# predicates


def P(*conjs):
    return StreamPredicate(tuple(conjs))


def test_predicate_variable_depth_rule():
    # variable true iff last kind is EOS i with i <= loop depth
    p = P(Conjunction(("a",)))
    assert evaluate_stream_predicate(p, {"a": Eos(0)}, 0) is TriBool.TRUE
    assert evaluate_stream_predicate(p, {"a": Eos(1)}, 0) is TriBool.FALSE
    assert evaluate_stream_predicate(p, {"a": Eos(1)}, 1) is TriBool.TRUE
    assert evaluate_stream_predicate(p, {"a": DATA}, 3) is TriBool.FALSE


def test_predicate_never_activated_defaults_false():
    p = P(Conjunction(("a",)))
    assert evaluate_stream_predicate(p, {"a": None}, 0) is TriBool.FALSE
    assert (
        evaluate_stream_predicate(p, {"a": None}, 0, missing_is_fail=True)
        is TriBool.FAIL
    )


def test_predicate_unknown_port():
    with pytest.raises(UnknownPort):
        evaluate_stream_predicate(P(Conjunction(("zz",))), {"a": DATA}, 0)


def test_predicate_bracketed_mixed_fails():
    p = P(Conjunction(("a", "b"), bracketed=True))
    vals = {"a": Eos(0), "b": DATA}
    assert evaluate_stream_predicate(p, vals, 0) is TriBool.FAIL
    # same disagreement without brackets is plain false
    q = P(Conjunction(("a", "b")))
    assert evaluate_stream_predicate(q, vals, 0) is TriBool.FALSE
    # agreement on both sides
    assert (
        evaluate_stream_predicate(p, {"a": Eos(0), "b": Eos(0)}, 0) is TriBool.TRUE
    )
    assert evaluate_stream_predicate(p, {"a": DATA, "b": DATA}, 0) is TriBool.FALSE


def test_predicate_true_wins_over_fail():
    p = P(Conjunction(("a", "b"), bracketed=True), Conjunction(("c",)))
    vals = {"a": Eos(0), "b": DATA, "c": Eos(0)}
    assert evaluate_stream_predicate(p, vals, 0) is TriBool.TRUE


# ---------------------------------------------------------------------------
# trace oracle


def A(name):
    return Activate(name, "!")


def R(name):
    return Activate(name, "?")


def test_traces_sequence():
    t = enumerate_traces(Seq((A("a"), R("b"))), max_len=4)
    assert t.complete == {("a!", "b?")}
    assert t.prefixes == {(), ("a!",)}


def test_traces_interleaving():
    t = enumerate_traces(Par((A("a"), A("b"))), max_len=4)
    assert t.complete == {("a!", "b!"), ("b!", "a!")}
    assert t.prefixes == {(), ("a!",), ("b!",)}


def test_traces_semaphore_orders_par():
    proto = Par((Seq((Wait("s"), A("a"))), Seq((A("b"), Signal("s")))))
    t = enumerate_traces(proto, max_len=4, semaphores=["s"])
    assert t.complete == {("b!", "a!")}
    assert t.prefixes == {(), ("b!",)}


def test_traces_choice():
    t = enumerate_traces(Alt((A("a"), A("b"))), max_len=4)
    assert t.complete == {("a!",), ("b!",)}
    assert t.prefixes == {()}


def test_traces_skip_and_do():
    t = enumerate_traces(Seq((Skip(), Do("sync"), Skip())), max_len=4)
    assert t.complete == {("sync",)}


def test_traces_counter():
    t = enumerate_traces(RepeatCounter(A("a"), 3), max_len=6)
    assert t.complete == {("a!", "a!", "a!")}


def test_traces_forever_has_no_complete():
    t = enumerate_traces(RepeatForever(A("a")), max_len=3)
    assert t.complete == frozenset()
    assert t.prefixes == {(), ("a!",), ("a!", "a!"), ("a!", "a!", "a!")}


def test_traces_until_scripted():
    proto = RepeatUntil(A("a"), P(Conjunction(("a",))))
    t = enumerate_traces(
        proto, scripts={"a": ["DATA", "DATA", "EOS0"]}, max_len=8, nestings={"a": 1}
    )
    assert t.complete == {("a!", "a!", "a!")}


def test_traces_until_free_kinds():
    proto = RepeatUntil(A("a"), P(Conjunction(("a",))))
    t = enumerate_traces(proto, max_len=3, nestings={"a": 1})
    # every activation may transmit EOS0 and stop, or DATA and loop
    assert t.complete == {("a!",), ("a!", "a!"), ("a!", "a!", "a!")}


def test_traces_until_nested_depth():
    # inner loop exits on EOS1 or EOS0, outer only on EOS0
    inner = RepeatUntil(A("a"), P(Conjunction(("a",))))
    proto = RepeatUntil(inner, P(Conjunction(("a",))))
    t = enumerate_traces(
        proto, scripts={"a": ["DATA", "EOS1", "EOS0"]}, max_len=8, nestings={"a": 2}
    )
    assert t.complete == {("a!", "a!", "a!")}


def test_traces_script_exhausted():
    proto = RepeatUntil(A("a"), P(Conjunction(("a",))))
    with pytest.raises(ScriptExhausted):
        enumerate_traces(proto, scripts={"a": ["DATA"]}, max_len=8, nestings={"a": 1})


def test_traces_if_branches():
    proto = Seq((A("a"), If(P(Conjunction(("a",))), A("t"), A("e"))))
    taken = enumerate_traces(
        proto, scripts={"a": ["EOS0"]}, max_len=4, nestings={"a": 1}
    )
    assert taken.complete == {("a!", "t!")}
    skipped = enumerate_traces(
        proto, scripts={"a": ["DATA"]}, max_len=4, nestings={"a": 1}
    )
    assert skipped.complete == {("a!", "e!")}


def test_traces_until_fail_aborts_run():
    # bracketed pair disagrees: the run fails, word stays a prefix
    pred = P(Conjunction(("a", "b"), bracketed=True))
    proto = RepeatUntil(Seq((A("a"), A("b"))), pred)
    t = enumerate_traces(
        proto,
        scripts={"a": ["EOS0"], "b": ["DATA"]},
        max_len=6,
        nestings={"a": 1, "b": 1},
    )
    assert t.complete == frozenset()
    assert ("a!", "b!") in t.prefixes


def test_traces_unbalanced_semaphore_not_complete():
    t = enumerate_traces(Seq((Signal("s"), A("a"))), max_len=4, semaphores=["s"])
    assert t.complete == frozenset()
    assert ("a!",) in t.prefixes


def test_traces_wait_without_signal_blocks():
    t = enumerate_traces(Seq((A("a"), Wait("s"))), max_len=4, semaphores=["s"])
    assert t.complete == frozenset()
    assert t.prefixes == {(), ("a!",)}


def test_traces_silent_divergence_detected():
    with pytest.raises(RuntimeError):
        enumerate_traces(RepeatForever(Signal("s")), max_len=2, semaphores=["s"])


def test_activations_order():
    proto = Seq((A("a"), Par((R("b"), Do("g"))), A("c")))
    assert [x.symbol for x in activations(proto)] == ["a!", "b?", "g", "c!"]


@given(st.lists(st.sampled_from(["sig", "wait"]), min_size=0, max_size=6).map(tuple))
def test_semaphore_discipline(ops):
    # a wait can only consume a prior signal; a complete run ends balanced
    body = tuple(Signal("s") if o == "sig" else Wait("s") for o in ops) + (A("x"),)
    t = enumerate_traces(Seq(body), max_len=2, semaphores=["s"])
    running = 0
    safe = True
    for o in ops:
        running += 1 if o == "sig" else -1
        if running < 0:
            safe = False
            break
    if safe and running == 0:
        assert t.complete == {("x!",)}
    else:
        # either blocks at the first overdrawn wait or ends unbalanced
        assert t.complete == frozenset()


def test_traces_any_group_emits_one_member():
    groups = {"g": ("any", ("m1!", "m2!"))}
    t = enumerate_traces(A("g"), groups=groups)
    assert t.complete == {("m1!",), ("m2!",)}


def test_traces_all_group_emits_every_member():
    groups = {"g": ("all", ("m1?", "m2?", "m3?"))}
    t = enumerate_traces(Activate("g", "?"), groups=groups)
    assert t.complete == {
        ("m1?", "m2?", "m3?"),
        ("m1?", "m3?", "m2?"),
        ("m2?", "m1?", "m3?"),
        ("m2?", "m3?", "m1?"),
        ("m3?", "m1?", "m2?"),
        ("m3?", "m2?", "m1?"),
    }


def test_traces_group_kind_is_shared_per_activation():
    # scripted: first activation EOS0 exits the loop after one pass
    groups = {"g": ("all", ("m1!", "m2!"))}
    proto = RepeatUntil(A("g"), P(Conjunction(("g",))))
    t = enumerate_traces(proto, {"g": ["EOS0"]}, nestings={"g": 1}, groups=groups)
    assert t.complete == {("m1!", "m2!"), ("m2!", "m1!")}


def test_traces_input_group_records_after_last_member():
    # free kinds; loop exits only when the activation carried EOS0
    groups = {"g": ("any", ("m1?",))}
    proto = RepeatUntil(Activate("g", "?"), P(Conjunction(("g",))))
    t = enumerate_traces(proto, nestings={"g": 1}, max_len=3, groups=groups)
    assert ("m1?",) in t.complete
    assert ("m1?", "m1?", "m1?") in t.complete


def test_traces_unit_derives_groups():
    from hashnets.ahcl import parse_configuration

    comp = parse_configuration(
        "component C { unit u { ports { out group g any { w1, w2 }; } protocol { g! } } }"
    )
    t = enumerate_traces(comp.units[0])
    assert t.complete == {("w1!",), ("w2!",)}
