"""Translation of validated configurations into interlaced nets."""

from hashnets.translate.base import (
    ArityMismatch,
    DEFAULT_OPTIONS,
    EntityInfo,
    Ctx,
    TranslateError,
    TranslationOptions,
    UnboundPort,
    UnboundSemaphore,
    component_entities,
    fail_witnesses,
    flag_dual,
    flag_place,
    index_for_kind,
    kind_for_index,
    loop_witnesses,
    nid,
    true_witnesses,
    unit_entities,
)
from hashnets.translate.component import ready_sender_ports, translate_component
from hashnets.translate.links import translate_channel, translate_collective
from hashnets.translate.streams import attach_stream_protocol
from hashnets.translate.units import (
    Slice,
    SliceSet,
    translate_action,
    translate_ports,
    translate_unit,
)

__all__ = [
    "ArityMismatch",
    "Ctx",
    "DEFAULT_OPTIONS",
    "EntityInfo",
    "Slice",
    "SliceSet",
    "TranslateError",
    "TranslationOptions",
    "UnboundPort",
    "UnboundSemaphore",
    "attach_stream_protocol",
    "component_entities",
    "fail_witnesses",
    "flag_dual",
    "flag_place",
    "index_for_kind",
    "kind_for_index",
    "loop_witnesses",
    "nid",
    "ready_sender_ports",
    "translate_action",
    "translate_channel",
    "translate_collective",
    "translate_component",
    "translate_ports",
    "translate_unit",
    "true_witnesses",
    "unit_entities",
]
