"""Net languages over transition labels.

Words are tuples of visible labels along firing sequences; silent
transitions contribute nothing.  The terminal language keeps only words
of sequences that reach a final marking; the net language is the prefix
closure over all reachable sequences.  Both are computed on the (possibly
truncated) reachability graph; truncation is passed through on the result
so callers can qualify the answer.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from hashnets.petri.net import InterlacedNet, NetError
from hashnets.petri.reach import Limits, ReachGraph, reachability_graph


class NoFinalMarking(NetError):
    """terminal_language needs a net with a final-marking predicate."""


@dataclass(frozen=True)
class LanguageResult:
    words: frozenset  # of tuple of labels
    truncated: bool

    def joined(self) -> list:
        """Words as space-joined strings, sorted, ε for the empty word."""
        return sorted("ε" if not w else " ".join(w) for w in self.words)


def _word_walk(graph: ReachGraph, maxlen: int, collect_all: bool, finals: set) -> frozenset:
    labels = [graph.net.transitions[t].label for t in graph.transition_ids]
    words = set()
    start = (0, ())
    seen = {start}
    queue = deque([start])
    while queue:
        node, word = queue.popleft()
        if collect_all or node in finals:
            words.add(word)
        for _e, t, dst in graph.successors(node):
            label = labels[t]
            nw = word if not label else word + (label,)
            if len(nw) > maxlen:
                continue
            key = (dst, nw)
            if key not in seen:
                seen.add(key)
                queue.append(key)
    return frozenset(words)


def terminal_language(
    net: InterlacedNet,
    maxlen: int,
    *,
    graph: ReachGraph | None = None,
    limits: Limits | None = None,
) -> LanguageResult:
    if net.final is None:
        raise NoFinalMarking("net has no final-marking predicate")
    if graph is None:
        graph = reachability_graph(net, limits)
    finals = set(graph.final_state_indices())
    return LanguageResult(_word_walk(graph, maxlen, False, finals), graph.truncated)


def net_language(
    net: InterlacedNet,
    maxlen: int,
    *,
    graph: ReachGraph | None = None,
    limits: Limits | None = None,
) -> LanguageResult:
    if graph is None:
        graph = reachability_graph(net, limits)
    return LanguageResult(_word_walk(graph, maxlen, True, set()), graph.truncated)
