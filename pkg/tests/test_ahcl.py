"""Parser, preprocessor, validator, and printer round-trips."""

import pytest
from hypothesis import given, strategies as st

from hashnets.ahcl import parse_configuration, print_configuration, validate_configuration
from hashnets.ahcl.ast import Mode
from hashnets.ahcl.preprocess import PreprocessError, eval_expr, expand_iterators
from hashnets.ahcl.printer import print_behavior
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
from hashnets.diagnostics import AhclSyntaxError, DuplicateIdentifier


def parse(src):
    return parse_configuration(src)


# ---------------------------------------------------------------------------
# parsing


def test_parse_empty_component():
    comp = parse("component Empty { }")
    assert comp.name == "Empty"
    assert comp.units == () and comp.channels == () and comp.collectives == ()


def test_parse_dangling_arrow():
    with pytest.raises(AhclSyntaxError) as exc:
        parse("component X { connect a.p -> }")
    assert exc.value.span.line == 1


def test_parse_error_carries_expected_set():
    with pytest.raises(AhclSyntaxError) as exc:
        parse("component X { unit u { } }")
    assert "protocol" in str(exc.value) or "ports" in str(exc.value)


def test_parse_unit_and_ports():
    comp = parse(
        """
        component C {
          unit worker repetitive {
            ports {
              in jobs stream(2);
              out results, errors;
              in group feed any stream(1) { feed_a, feed_b };
            }
            sem guard, done;
            protocol { seq { jobs?; results!; signal guard; wait done } }
          }
        }
        """
    )
    u = comp.units[0]
    assert u.repetitive
    assert [p.id for p in u.ports] == ["jobs", "results", "errors", "feed"]
    jobs = u.port_by_id("jobs")
    assert jobs.stream and jobs.nesting == 2 and jobs.direction == "in"
    feed = u.port_by_id("feed")
    assert feed.is_group and feed.group.kind == "any"
    assert [m.id for m in feed.group.members] == ["feed_a", "feed_b"]
    assert all(m.stream and m.nesting == 1 and m.direction == "in" for m in feed.group.members)
    assert u.semaphores == ("guard", "done")
    assert u.stream_nestings() == {"jobs": 2, "feed": 1, "feed_a": 1, "feed_b": 1}


def test_parse_repeat_forms():
    comp = parse(
        """
        component C {
          unit u {
            ports { out a stream(1); }
            protocol { seq { repeat a! until <a>; repeat 3 a!; repeat a! } }
          }
        }
        """
    )
    seq = comp.units[0].protocol
    assert isinstance(seq.actions[0], RepeatUntil)
    assert seq.actions[0].predicate == StreamPredicate((Conjunction(("a",), True),))
    assert seq.actions[1] == RepeatCounter(Activate("a", "!"), 3)
    assert seq.actions[2] == RepeatForever(Activate("a", "!"))


def test_parse_counted_repeat_rejects_until():
    with pytest.raises(AhclSyntaxError):
        parse(
            "component C { unit u { ports { out a stream(1); } "
            "protocol { repeat 2 a! until a } } }"
        )


def test_parse_predicate_forms():
    comp = parse(
        """
        component C {
          unit u {
            ports { out a stream(1), b stream(1), c stream(1); }
            protocol { repeat par { a!; b!; c! } until a & b or <b & c> or c }
          }
        }
        """
    )
    pred = comp.units[0].protocol.predicate
    assert pred == StreamPredicate(
        (
            Conjunction(("a", "b"), False),
            Conjunction(("b", "c"), True),
            Conjunction(("c",), False),
        )
    )


def test_parse_channel_modes():
    comp = parse(
        """
        component C {
          unit s { ports { out a, b, c, d; } protocol { seq { a!; b!; c!; d! } } }
          unit r { ports { in w, x, y, z; } protocol { seq { w?; x?; y?; z? } } }
          connect s.a -> r.w;
          connect b -> x synchronous;
          connect c -> y buffered as buf;
          connect d -> z buffered(4);
          }
        """
    )
    modes = [(c.id, c.mode) for c in comp.channels]
    assert modes == [
        ("ch0", Mode("synchronous")),
        ("ch1", Mode("synchronous")),
        ("buf", Mode("buffered", None)),
        ("ch2", Mode("buffered", 4)),
    ]


def test_parse_collective():
    comp = parse(
        """
        component C {
          unit a { protocol { do sync_all } }
          unit b { protocol { do sync_all } }
          collective sync_all stream(1) { a.ca, b.cb }
        }
        """
    )
    g = comp.collectives[0]
    assert g.id == "sync_all" and g.stream and g.nesting == 1
    assert g.members == (("a", "ca"), ("b", "cb"))
    assert validate_configuration(comp).ok()


def test_duplicate_port_ids():
    with pytest.raises(DuplicateIdentifier):
        parse(
            "component C { unit u { ports { out a; } protocol { a! } } "
            "unit v { ports { out a; } protocol { a! } } }"
        )


def test_duplicate_unit_ids():
    with pytest.raises(DuplicateIdentifier):
        parse(
            "component C { unit u { protocol { skip } } unit u { protocol { skip } } }"
        )


def test_duplicate_channel_names():
    with pytest.raises(DuplicateIdentifier):
        parse(
            """
            component C {
              unit s { ports { out a, b; } protocol { seq { a!; b! } } }
              unit r { ports { in x, y; } protocol { seq { x?; y? } } }
              connect a -> x as link;
              connect b -> y as link;
            }
            """
        )


# ---------------------------------------------------------------------------
# preprocessor


def test_eval_expr():
    assert eval_expr("2 + 3 * 4", {}) == 14
    assert eval_expr("(2 + 3) * 4", {}) == 20
    assert eval_expr("(i + 1) mod 5", {"i": 4}) == 0
    assert eval_expr("-i + 7", {"i": 3}) == 4
    with pytest.raises(PreprocessError):
        eval_expr("j + 1", {"i": 0})
    with pytest.raises(PreprocessError):
        eval_expr("1 mod 0", {})


def test_iterator_expansion_nested():
    out = expand_iterators(
        "iterator i range [0, 1] { iterator j range [0, 1] { cell_[/i/]_[/j/]; } }"
    )
    assert out.split() == ["cell_0_0;", "cell_0_1;", "cell_1_0;", "cell_1_1;"]


def test_iterator_empty_range():
    with pytest.raises(PreprocessError):
        expand_iterators("iterator i range [3, 1] { x_[/i/]; }")


def test_iterator_plain_text_passthrough():
    src = "component C { } // untouched"
    assert expand_iterators(src) == src


def test_iterator_comment_stripped_inside_expansion():
    out = expand_iterators("iterator i range [0, 0] { a_[/i/]; } // tail [/i/]")
    assert "a_0;" in out and "[/i/]" not in out


# ---------------------------------------------------------------------------
# validator


def _validate(src):
    return validate_configuration(parse_configuration(src))


def test_validate_channel_direction():
    rep = _validate(
        """
        component C {
          unit a { ports { in p; } protocol { p? } }
          unit b { ports { in q; } protocol { q? } }
          connect a.p -> b.q;
        }
        """
    )
    assert any("output -> input" in d.message for d in rep.errors)


def test_validate_nesting_mismatch():
    rep = _validate(
        """
        component C {
          unit a { ports { out p stream(1); } protocol { repeat p! until p } }
          unit b { ports { in q stream(2); } protocol { repeat q? until q } }
          connect a.p -> b.q;
        }
        """
    )
    assert any("nesting factors differ" in d.message for d in rep.errors)


def test_validate_unknown_endpoint():
    rep = _validate(
        """
        component C {
          unit a { ports { out p; } protocol { p! } }
          connect a.p -> a.zz;
        }
        """
    )
    assert any("does not name a port" in d.message for d in rep.errors)


def test_validate_group_endpoint_rejected():
    rep = _validate(
        """
        component C {
          unit a { ports { out group g any { m1, m2 }; } protocol { g! } }
          unit b { ports { in q; } protocol { q? } }
          connect a.g -> b.q;
        }
        """
    )
    assert any("is a group" in d.message for d in rep.errors)


def test_validate_member_activation_rejected():
    rep = _validate(
        """
        component C {
          unit a { ports { out group g any { m1, m2 }; } protocol { m1! } }
        }
        """
    )
    assert any("activated as a whole" in d.message for d in rep.errors)


def test_validate_unknown_port_activation():
    rep = _validate("component C { unit a { protocol { zz! } } }")
    assert any("unknown port" in d.message for d in rep.errors)


def test_validate_polarity():
    rep = _validate("component C { unit a { ports { in p; } protocol { p! } } }")
    assert any("declared 'in'" in d.message for d in rep.errors)


def test_validate_undeclared_semaphore():
    rep = _validate("component C { unit a { protocol { signal s } } }")
    assert any("undeclared semaphore" in d.message for d in rep.errors)


def test_validate_predicate_non_stream():
    rep = _validate(
        "component C { unit a { ports { out p; } protocol { repeat p! until p } } }"
    )
    assert any("not a stream port" in d.message for d in rep.errors)


def test_validate_predicate_group_member():
    rep = _validate(
        """
        component C {
          unit a {
            ports { out group g any stream(1) { m1, m2 }; }
            protocol { repeat g! until m1 }
          }
        }
        """
    )
    assert any("member" in d.message for d in rep.errors)


def test_validate_stream_zero():
    rep = _validate(
        "component C { unit a { ports { out p stream(0); } protocol { p! } } }"
    )
    assert any("nesting factor of at least 1" in d.message for d in rep.errors)


def test_validate_buffered_zero():
    rep = _validate(
        """
        component C {
          unit a { ports { out p; } protocol { p! } }
          unit b { ports { in q; } protocol { q? } }
          connect a.p -> b.q buffered(0);
        }
        """
    )
    assert any("buffered size" in d.message for d in rep.errors)


def test_validate_port_connected_twice():
    rep = _validate(
        """
        component C {
          unit a { ports { out p; } protocol { p! } }
          unit b { ports { in q; in r; } protocol { seq { q?; r? } } }
          connect a.p -> b.q;
          connect a.p -> b.r;
        }
        """
    )
    assert any("already connected" in d.message for d in rep.errors)


def test_validate_do_without_membership():
    rep = _validate(
        """
        component C {
          unit a { protocol { do g } }
          unit b { protocol { do g } }
          unit c { protocol { skip } }
          collective g { b.pb, c.pc }
        }
        """
    )
    assert any("not a member" in d.message for d in rep.errors)


def test_validate_collective_duplicate_unit():
    rep = _validate(
        """
        component C {
          unit a { protocol { do g } }
          collective g { a.p1, a.p2 }
        }
        """
    )
    assert any("appears twice" in d.message for d in rep.errors)


def test_validate_loop_without_activation_warns():
    rep = _validate(
        "component C { unit a { sem s; protocol { repeat 3 signal s } } }"
    )
    assert rep.ok()  # warning only
    assert any("no activation" in d.message for d in rep.warnings)


def test_validate_clean_fixture():
    rep = _validate(
        """
        component ring {
          iterator i range [0, 2] {
            unit cell_[/i/] repetitive {
              ports { out tx_[/i/]; in rx_[/i/]; }
              protocol { seq { rx_[/i/]?; tx_[/i/]! } }
            }
            connect cell_[/i/].tx_[/i/] -> cell_[/(i+1) mod 3/].rx_[/(i+1) mod 3/] buffered(1);
          }
        }
        """
    )
    assert rep.ok() and not rep.diagnostics


# ---------------------------------------------------------------------------
# round-trip


def test_round_trip_fixture():
    src = """
    component C {
      unit s { ports { out a stream(2), b; } sem m; protocol { seq { a!; signal m; wait m; b! } } }
      unit r { ports { in x stream(2), y; in group g all { g1, g2 }; } protocol { par { x?; y?; g? } } }
      connect s.a -> r.x buffered(2);
      connect s.b -> r.y ready as direct;
      collective sync { s.cs, r.cr }
    }
    """
    comp = parse_configuration(src)
    assert parse_configuration(print_configuration(comp)) == comp


_env_entities = ["pa", "pb", "pc"]


def _actions(depth):
    leaf = st.one_of(
        st.just(Skip()),
        st.sampled_from([Activate("pa", "!"), Activate("pb", "!"), Activate("pc", "!")]),
        st.sampled_from([Signal("s0"), Wait("s0")]),
        st.just(Do("gsync")),
    )
    if depth == 0:
        return leaf
    sub = _actions(depth - 1)
    preds = st.builds(
        StreamPredicate,
        st.lists(
            st.builds(
                Conjunction,
                st.lists(st.sampled_from(_env_entities), min_size=1, max_size=3).map(tuple),
                st.booleans(),
            ),
            min_size=1,
            max_size=3,
        ).map(tuple),
    )
    return st.one_of(
        leaf,
        st.builds(Seq, st.lists(sub, min_size=0, max_size=3).map(tuple)),
        st.builds(Par, st.lists(sub, min_size=1, max_size=3).map(tuple)),
        st.builds(Alt, st.lists(sub, min_size=1, max_size=3).map(tuple)),
        st.builds(RepeatUntil, sub, preds),
        st.builds(RepeatCounter, sub, st.integers(1, 5)),
        st.builds(RepeatForever, sub),
        st.builds(If, preds, sub, sub),
    )


@given(_actions(3))
def test_round_trip_random_protocols(action):
    src = (
        "component C { unit u { ports { out pa stream(1), pb stream(1), pc stream(1); } "
        f"sem s0; protocol {{ {print_behavior(action)} }} }} "
        "unit v { protocol { do gsync } } collective gsync { u.cu, v.cv } }"
    )
    comp = parse_configuration(src)
    assert comp.units[0].protocol == action
    assert parse_configuration(print_configuration(comp)) == comp
