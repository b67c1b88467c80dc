"""Interlaced labelled place/transition nets and their analysis primitives."""

from hashnets.petri.net import (
    Arc,
    FinalPredicate,
    InterlacedNet,
    LabelConflict,
    NetBuilder,
    NetError,
    NotEnabled,
    Place,
    SortClash,
    Transition,
    UnknownTransition,
    enabled,
    enabled_transitions,
    fire,
    union,
    unfold,
)
from hashnets.petri.reach import ReachGraph, Limits, reachability_graph
from hashnets.petri.lang import LanguageResult, NoFinalMarking, net_language, terminal_language
from hashnets.petri.dot import net_to_dot, reach_to_dot

__all__ = [
    "Arc",
    "FinalPredicate",
    "InterlacedNet",
    "LabelConflict",
    "LanguageResult",
    "Limits",
    "NetBuilder",
    "NetError",
    "NoFinalMarking",
    "NotEnabled",
    "Place",
    "ReachGraph",
    "SortClash",
    "Transition",
    "UnknownTransition",
    "enabled",
    "enabled_transitions",
    "fire",
    "net_language",
    "net_to_dot",
    "reach_to_dot",
    "reachability_graph",
    "terminal_language",
    "unfold",
    "union",
]
