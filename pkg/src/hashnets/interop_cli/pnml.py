"""PNML export and import for flat place/transition nets.

The exported document follows the ISO P/T-net grammar
(`http://www.pnml.org/version-2009/grammar/ptnet`).  Net node ids are free
text on our side but XML NCNames in PNML, so export sanitizes them and
keeps the original id (and, for transitions, the visible label) in a
`toolspecific` element; import prefers those and so restores the node ids
byte for byte.  Imports of foreign documents fall back to the XML id and
the `name` text.  Element order is fixed, so equal nets export to equal
bytes.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from hashnets.petri.net import InterlacedNet, NetBuilder

PNML_NS = "http://www.pnml.org/version-2009/grammar/pnml"
PTNET_TYPE = "http://www.pnml.org/version-2009/grammar/ptnet"
TOOL_NAME = "hashnets"


class PnmlError(Exception):
    pass


class InvalidId(PnmlError):
    pass


class PnmlParseError(PnmlError):
    pass


class UnsupportedNetType(PnmlError):
    pass


_NCNAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*\Z")
_BAD_CHAR = re.compile(r"[^A-Za-z0-9_.-]")


def _ncname_map(ids) -> dict:
    """Deterministic injective map from node ids to NCNames."""
    out: dict = {}
    taken: set = set()
    for raw in ids:
        base = _BAD_CHAR.sub("_", raw) or "n"
        if not re.match(r"[A-Za-z_]", base):
            base = "n_" + base
        cand = base
        k = 2
        while cand in taken:
            cand = f"{base}_{k}"
            k += 1
        if _NCNAME.match(cand) is None:
            raise InvalidId(f"cannot sanitize id {raw!r}")
        taken.add(cand)
        out[raw] = cand
    return out


def _text_child(parent: ET.Element, tag: str, text: str) -> None:
    holder = ET.SubElement(parent, tag)
    ET.SubElement(holder, "text").text = text


def _toolspecific(parent: ET.Element, original: str, label: str | None = None) -> None:
    tool = ET.SubElement(parent, "toolspecific", tool=TOOL_NAME, version="1")
    ET.SubElement(tool, "originalId").text = original
    if label:
        ET.SubElement(tool, "label").text = label


def export_pnml(net: InterlacedNet, net_id: str = "net1") -> str:
    """PNML text for an unfolded net; silent labels export as empty names."""
    node_ids = _ncname_map(net.sorted_places() + net.sorted_transitions())
    root = ET.Element("pnml", xmlns=PNML_NS)
    net_el = ET.SubElement(root, "net", id=net_id, type=PTNET_TYPE)
    page = ET.SubElement(net_el, "page", id="page1")
    for pid in net.sorted_places():
        el = ET.SubElement(page, "place", id=node_ids[pid])
        _text_child(el, "name", pid)
        tokens = net.m0.get(pid, 0)
        if tokens:
            _text_child(el, "initialMarking", str(tokens))
        _toolspecific(el, pid)
    for tid in net.sorted_transitions():
        label = net.transitions[tid].label
        el = ET.SubElement(page, "transition", id=node_ids[tid])
        _text_child(el, "name", label)
        _toolspecific(el, tid, label)
    weights: dict = {}
    for a in net.arcs:
        key = (a.src, a.dst)
        weights[key] = weights.get(key, 0) + a.weight
    for n, (src, dst) in enumerate(sorted(weights)):
        el = ET.SubElement(
            page, "arc", id=f"a{n}", source=node_ids[src], target=node_ids[dst]
        )
        if weights[(src, dst)] != 1:
            _text_child(el, "inscription", str(weights[(src, dst)]))
    tree = ET.ElementTree(root)
    ET.indent(tree, space="  ")
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _find_text(el: ET.Element, tag: str) -> str | None:
    for child in el:
        if _local(child.tag) == tag:
            for sub in child:
                if _local(sub.tag) == "text":
                    return sub.text or ""
            return child.text or ""
    return None


def _tool_info(el: ET.Element) -> tuple[str | None, str | None]:
    for child in el:
        if _local(child.tag) == "toolspecific" and child.get("tool") == TOOL_NAME:
            original = label = None
            for sub in child:
                if _local(sub.tag) == "originalId":
                    original = sub.text or ""
                elif _local(sub.tag) == "label":
                    label = sub.text or ""
            return original, label
    return None, None


def _walk(el: ET.Element, want: str):
    """All `want` elements under el, descending through nested pages."""
    for child in el:
        tag = _local(child.tag)
        if tag == want:
            yield child
        elif tag == "page":
            yield from _walk(child, want)


def import_pnml(text: str) -> InterlacedNet:
    """Net from PNML text; foreign ids kept as-is, ours restored exactly."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise PnmlParseError(f"malformed PNML: {exc}") from None
    if _local(root.tag) != "pnml":
        raise PnmlParseError(f"root element is <{_local(root.tag)}>, expected <pnml>")
    nets = [el for el in root if _local(el.tag) == "net"]
    if not nets:
        raise PnmlParseError("document contains no <net>")
    net_el = nets[0]
    net_type = net_el.get("type", "")
    if net_type and "ptnet" not in net_type:
        raise UnsupportedNetType(f"unsupported net type {net_type!r}")

    b = NetBuilder()
    restored: dict = {}
    for el in _walk(net_el, "place"):
        xml_id = el.get("id")
        if not xml_id:
            raise PnmlParseError("place without id")
        original, _ = _tool_info(el)
        pid = original if original is not None else xml_id
        restored[xml_id] = pid
        tokens = _find_text(el, "initialMarking")
        b.place(pid, marking=int(tokens) if tokens else 0)
    for el in _walk(net_el, "transition"):
        xml_id = el.get("id")
        if not xml_id:
            raise PnmlParseError("transition without id")
        original, label = _tool_info(el)
        tid = original if original is not None else xml_id
        if label is None:
            label = _find_text(el, "name") or ""
        restored[xml_id] = tid
        b.transition(tid, label=label)
    for el in _walk(net_el, "arc"):
        src, dst = el.get("source"), el.get("target")
        if src not in restored or dst not in restored:
            raise PnmlParseError(f"arc {el.get('id')!r} references unknown node")
        raw = _find_text(el, "inscription")
        b.arc(restored[src], restored[dst], int(raw) if raw else 1)
    return b.build()
