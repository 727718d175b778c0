"""Streaming parser for OSM XML node dumps.

Parsing is expat-based and incremental: memory use is bounded by the
largest single node, not by corpus size. Ways, relations, bounds and edit
metadata are skipped. Node ids must be strictly ascending, as they are in
dumps; this makes duplicate-id detection exact without keeping the id set
in memory, and out-of-order ids are rejected as a corrupt extract.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator
from xml.parsers import expat

from .errors import OsmXmlError

_CHUNK_SIZE = 1 << 16


@dataclass(frozen=True, slots=True)
class Tag:
    key: str
    value: str


@dataclass(frozen=True, slots=True)
class OsmNode:
    id: int
    lat: float
    lon: float
    tags: tuple[Tag, ...]  # document order, keys unique

    def tag_dict(self) -> dict[str, str]:
        return {t.key: t.value for t in self.tags}


class _NodeAssembler:
    """expat handlers collecting complete nodes into ``out``."""

    def __init__(self, out: list[OsmNode]):
        self.out = out
        self._last_id = 0
        self._attrs: dict[str, str] | None = None
        self._tags: list[Tag] | None = None

    def start(self, name: str, attrs: dict[str, str]) -> None:
        if name == "node":
            self._attrs = attrs
            self._tags = []
        elif name == "tag" and self._tags is not None:
            key = attrs.get("k", "").strip()
            value = attrs.get("v", "").strip()
            self._tags.append(Tag(key, value))
        elif name in ("way", "relation"):
            # nodes never nest inside ways/relations; drop any open state
            self._attrs = None
            self._tags = None

    def end(self, name: str) -> None:
        if name != "node" or self._attrs is None:
            return
        attrs, tags = self._attrs, self._tags or []
        self._attrs = None
        self._tags = None
        self.out.append(self._build(attrs, tags))

    def _build(self, attrs: dict[str, str], tags: list[Tag]) -> OsmNode:
        raw_id = attrs.get("id")
        if raw_id is None:
            raise OsmXmlError("node element is missing the id attribute")
        try:
            node_id = int(raw_id)
        except ValueError:
            raise OsmXmlError(f"node id {raw_id!r} is not an integer") from None
        if node_id <= 0:
            raise OsmXmlError(f"node id {node_id} is not positive")

        def coord(name: str, low: float, high: float) -> float:
            raw = attrs.get(name)
            if raw is None:
                raise OsmXmlError(f"node {node_id} is missing the {name} attribute")
            try:
                value = float(raw)
            except ValueError:
                raise OsmXmlError(f"node {node_id}: {name}={raw!r} is not a number") from None
            if not (low <= value <= high):
                raise OsmXmlError(
                    f"node {node_id}: {name}={raw} outside [{low}, {high}]")
            return value

        lat = coord("lat", -90.0, 90.0)
        lon = coord("lon", -180.0, 180.0)
        seen_keys: set[str] = set()
        for tag in tags:
            if not tag.key or not tag.value:
                raise OsmXmlError(f"node {node_id}: empty tag key or value")
            if tag.key in seen_keys:
                raise OsmXmlError(f"node {node_id}: duplicate tag key {tag.key!r}")
            seen_keys.add(tag.key)
        if node_id == self._last_id:
            raise OsmXmlError(f"duplicate node id {node_id}")
        if node_id < self._last_id:
            raise OsmXmlError(
                f"node id {node_id} after {self._last_id}: "
                "ids must ascend (corrupt or unsorted extract)")
        self._last_id = node_id
        return OsmNode(node_id, lat, lon, tuple(tags))


def parse_osm_xml(source: str | Path | IO[bytes]) -> Iterator[OsmNode]:
    """Yield every ``<node>`` of an OSM XML dump in document order.

    ``source`` is a path or a binary file object. Raises
    :class:`OsmXmlError` on malformed XML (with byte offset) or invalid
    node data (naming the node id).
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as handle:
            yield from _parse_stream(handle)
    else:
        yield from _parse_stream(source)


def _parse_stream(handle: IO[bytes]) -> Iterator[OsmNode]:
    parser = expat.ParserCreate()
    out: list[OsmNode] = []
    assembler = _NodeAssembler(out)
    parser.StartElementHandler = assembler.start
    parser.EndElementHandler = assembler.end
    parser.buffer_text = True
    while True:
        chunk = handle.read(_CHUNK_SIZE)
        try:
            parser.Parse(chunk, not chunk)
        except expat.ExpatError as exc:
            raise OsmXmlError(
                f"malformed XML at byte {parser.ErrorByteIndex}: "
                f"{expat.errors.messages[exc.code]}") from None
        if out:
            yield from out
            out.clear()
        if not chunk:
            return


def filter_tagged(nodes: Iterable[OsmNode]) -> Iterator[OsmNode]:
    """Keep only nodes carrying at least one tag, in input order."""
    return (node for node in nodes if node.tags)
