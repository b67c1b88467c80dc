"""DOT rendering of nets and reachability graphs.

Output is deterministic (nodes sorted by id) so renders diff cleanly.
"""

from __future__ import annotations

from hashnets.petri.net import InterlacedNet
from hashnets.petri.reach import ReachGraph


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def net_to_dot(net: InterlacedNet, title: str = "net") -> str:
    lines = [f"digraph {_q(title)} {{", "  rankdir=LR;"]
    for pid in net.sorted_places():
        tokens = net.m0.get(pid, 0)
        label = pid if not tokens else f"{pid}\\n●{tokens}"
        lines.append(f"  {_q(pid)} [shape=ellipse label={_q(label)}];")
    for tid in net.sorted_transitions():
        t = net.transitions[tid]
        label = t.label or "λ"
        lines.append(
            f"  {_q(tid)} [shape=box style=filled fillcolor=lightgray label={_q(label)}];"
        )
    for a in sorted(net.arcs, key=lambda a: (a.src, a.dst)):
        w = f" [label={_q(str(a.weight))}]" if a.weight != 1 else ""
        lines.append(f"  {_q(a.src)} -> {_q(a.dst)}{w};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def reach_to_dot(graph: ReachGraph, max_nodes: int = 500, title: str = "reach") -> str:
    n = min(graph.n_states, max_nodes)
    lines = [f"digraph {_q(title)} {{"]
    finals = set(graph.final_state_indices())
    for i in range(n):
        shape = "doublecircle" if i in finals else "circle"
        lines.append(f"  s{i} [shape={shape} label={_q('s' + str(i))}];")
    for e in range(graph.n_edges):
        src, dst = graph.edge_src[e], graph.edge_dst[e]
        if src >= n or dst >= n:
            continue
        t = graph.transition_ids[graph.edge_t[e]]
        label = graph.net.transitions[t].label or "λ"
        lines.append(f"  s{src} -> s{dst} [label={_q(label)}];")
    if graph.n_states > n:
        lines.append(f"  more [shape=plaintext label={_q(f'... {graph.n_states - n} more states')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
