"""Command-line front door: parse, translate, explore, and check configurations.

Exit codes: 0 when the requested artifact or verdict was produced (a false
formula or a found deadlock is still a computed answer), 1 for diagnosed
input problems (syntax, validation, unknown names), 2 for internal errors.
Output is deterministic for fixed inputs and flags; timing and kernel
fields stay out of reports for that reason.
"""

from __future__ import annotations

import functools
import json
import sys

import click

from hashnets.ahcl import parse_configuration
from hashnets.ahcl.printer import print_configuration
from hashnets.ahcl.validate import validate_configuration
from hashnets.analyze import (
    CtlError,
    MacroError,
    check_ctl,
    expand_macros,
    find_deadlocks,
    parse_macro_file,
)
from hashnets.behavior import StreamError, enumerate_traces
from hashnets.diagnostics import AhclError
from hashnets.interop_cli.pnml import PnmlError, export_pnml
from hashnets.petri.dot import net_to_dot
from hashnets.petri.lang import terminal_language
from hashnets.petri.net import NetError
from hashnets.petri.reach import Limits, reachability_graph
from hashnets.translate import TranslateError, TranslationOptions, translate_component

_DIAGNOSED = (
    AhclError,
    TranslateError,
    NetError,
    CtlError,
    MacroError,
    PnmlError,
    StreamError,
    OSError,
    ValueError,
)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _DIAGNOSED as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except Exception as exc:  # pragma: no cover - last resort
            click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_configuration(fh.read(), file=path)


def _options(streams: bool, order_consistency: bool, buffer_default: int) -> TranslationOptions:
    return TranslationOptions(
        with_stream_protocol=streams,
        with_order_consistency=order_consistency,
        buffer_default=buffer_default,
    )


def _limits(max_states: int | None, max_depth: int | None) -> Limits:
    limits = Limits()
    if max_states is not None:
        limits.max_states = max_states
    limits.max_depth = max_depth
    return limits


def _translate_opts(fn):
    fn = click.option(
        "--buffer-default",
        type=click.IntRange(min=1),
        default=1,
        show_default=True,
        help="slot count for buffered channels that omit a size",
    )(fn)
    fn = click.option(
        "--order-consistency",
        is_flag=True,
        help="enforce order-of-kind consistency (needs the stream protocol)",
    )(fn)
    fn = click.option(
        "--streams/--no-streams",
        "streams",
        default=True,
        show_default=True,
        help="interlace the stream synchronization protocol",
    )(fn)
    return fn


def _explore_opts(fn):
    fn = click.option(
        "--max-depth", type=click.IntRange(min=1), default=None, help="BFS depth cap"
    )(fn)
    fn = click.option(
        "--max-states",
        type=click.IntRange(min=1),
        default=None,
        help="state cap (default $HASHNETS_MAX_STATES, else 1000000)",
    )(fn)
    return fn


def _graph_stats(g) -> dict:
    return {
        "states": g.n_states,
        "edges": g.n_edges,
        "expanded": g.expanded,
        "depth": g.depth_reached,
        "truncated": g.truncated,
        "peak_frontier": g.peak_frontier,
    }


@click.group()
@click.version_option(package_name="hashnets", prog_name="hashnets")
def main() -> None:
    """Compile coordination configurations to Petri nets and analyse them."""


@main.command("parse")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@_guarded
def cmd_parse(file: str) -> None:
    """Parse FILE, print the normalized configuration, report diagnostics."""
    component = _load(file)
    report = validate_configuration(component, file=file)
    click.echo(print_configuration(component), nl=False)
    if report.diagnostics:
        click.echo(report.render(), err=True)
    if not report.ok():
        sys.exit(1)


@main.command("translate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "-o",
    "--output",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="target file, .pnml or .dot; PNML on stdout when omitted",
)
@_translate_opts
@_guarded
def cmd_translate(file, output, streams, order_consistency, buffer_default) -> None:
    """Translate FILE into a flat labelled net."""
    net = translate_component(_load(file), _options(streams, order_consistency, buffer_default))
    if output is None:
        click.echo(export_pnml(net), nl=False)
        return
    if output.endswith(".pnml"):
        text = export_pnml(net)
    elif output.endswith(".dot"):
        text = net_to_dot(net, title=net.meta.get("component", "net"))
    else:
        raise click.UsageError("output must end in .pnml or .dot")
    with open(output, "w", encoding="utf-8") as fh:
        fh.write(text)
    click.echo(f"wrote {output}: {len(net.places)} places, {len(net.transitions)} transitions")


@main.command("reach")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@_translate_opts
@_explore_opts
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="machine-readable report")
@_guarded
def cmd_reach(file, streams, order_consistency, buffer_default, max_states, max_depth, workers, as_json) -> None:
    """Explore the reachability graph of FILE and report its size."""
    net = translate_component(_load(file), _options(streams, order_consistency, buffer_default))
    g = reachability_graph(net, _limits(max_states, max_depth), workers=workers)
    stats = _graph_stats(g)
    if as_json:
        click.echo(json.dumps({"schema": 1, **stats}, indent=2))
    else:
        for key, value in stats.items():
            click.echo(f"{key}: {value}")


@main.command("deadlocks")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@_translate_opts
@_explore_opts
@click.option("--max-witnesses", type=click.IntRange(min=0), default=5, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="machine-readable report")
@_guarded
def cmd_deadlocks(file, streams, order_consistency, buffer_default, max_states, max_depth, max_witnesses, as_json) -> None:
    """Search FILE's state space for dead non-final markings."""
    net = translate_component(_load(file), _options(streams, order_consistency, buffer_default))
    g = reachability_graph(net, _limits(max_states, max_depth))
    report = find_deadlocks(g, max_witnesses=max_witnesses)
    if as_json:
        click.echo(json.dumps({"schema": 1, **report.as_dict()}, indent=2))
        return
    suffix = " (graph truncated: absence not proven)" if report.truncated else ""
    click.echo(f"deadlocks: {len(report.dead)}{suffix}")
    for k, witness in enumerate(report.witnesses, start=1):
        click.echo(f"witness {k}: " + " -> ".join(witness))


@main.command("check")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--formulas",
    "formulas_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="formula file: `name :: body` defines a macro, other lines are checked",
)
@_translate_opts
@_explore_opts
@click.option("--strict", is_flag=True, help="refuse three-valued answers on truncated graphs")
@click.option("--json", "as_json", is_flag=True, help="machine-readable report")
@_guarded
def cmd_check(file, formulas_path, streams, order_consistency, buffer_default, max_states, max_depth, strict, as_json) -> None:
    """Model-check the formulas in --formulas against FILE's state space."""
    net = translate_component(_load(file), _options(streams, order_consistency, buffer_default))
    with open(formulas_path, encoding="utf-8") as fh:
        lib, formulas = parse_macro_file(fh.read())
    if not formulas:
        raise click.UsageError(f"{formulas_path} defines macros but checks nothing")
    g = reachability_graph(net, _limits(max_states, max_depth))
    results = []
    for text in formulas:
        outcome = check_ctl(g, expand_macros(text, lib, net), strict=strict)
        results.append(
            {
                "formula": text,
                "verdict": outcome.verdict,
                "path": outcome.path,
                "truncated": outcome.truncated,
            }
        )
    if as_json:
        click.echo(json.dumps({"schema": 1, "results": results}, indent=2))
        return
    for row in results:
        click.echo(f"{row['verdict']:<8} {row['formula']}")
        if row["path"]:
            click.echo("  path: " + " -> ".join(row["path"]))


def _compact(word: tuple) -> str:
    """Display form of a trace: marks dropped, symbols run together."""
    if not word:
        return "ε"
    return "".join(sym.rstrip("!?") for sym in word)


@main.command("lang")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-len", type=click.IntRange(min=0), default=8, show_default=True)
@click.option(
    "--oracle",
    is_flag=True,
    help="compare against the protocol trace oracle (single-unit configurations)",
)
@_translate_opts
@_explore_opts
@_guarded
def cmd_lang(file, max_len, oracle, streams, order_consistency, buffer_default, max_states, max_depth) -> None:
    """Bounded terminal language of FILE's translated net."""
    component = _load(file)
    net = translate_component(component, _options(streams, order_consistency, buffer_default))
    result = terminal_language(net, max_len, limits=_limits(max_states, max_depth))
    if result.truncated:
        click.echo("warning: graph truncated, language may be incomplete", err=True)
    if not oracle:
        for word in result.joined():
            click.echo(word)
        return
    if len(component.units) != 1:
        raise click.UsageError("--oracle needs a single-unit configuration")
    expected = enumerate_traces(component.units[0], max_len=max_len).complete
    if result.words == expected:
        click.echo("EQUAL {" + ", ".join(sorted(_compact(w) for w in expected)) + "}")
    else:
        net_only = sorted(_compact(w) for w in result.words - expected)
        oracle_only = sorted(_compact(w) for w in expected - result.words)
        click.echo(
            "DIFFER net_only={%s} oracle_only={%s}"
            % (", ".join(net_only), ", ".join(oracle_only))
        )


if __name__ == "__main__":
    main()
