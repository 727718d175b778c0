"""Map OSM nodes to typed entities and serialize the knowledge graph.

Each entity gets its class assertions, a label from the ``name`` tag,
property literals, a geometry node (``sf:Point`` with a WKT literal,
longitude first), and a link back to the source OSM node. Output is
byte-deterministic; the build streams straight to disk since node ids
arrive in ascending order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator

from . import ttl
from .alignment import load_alignments, attach_equivalences
from .errors import PipelineError
from .ontology import Ontology, build_ontology, load_map_features, serialize_ontology
from .osm_corpus import OsmNode, parse_osm_xml


@dataclass(frozen=True)
class Entity:
    wkg_id: int
    types: tuple[str, ...]  # class local names, sorted
    properties: tuple[tuple[str, str], ...]  # (property local name, value), sorted
    label: str | None
    point: tuple[float, float]  # (lon, lat)


@dataclass(frozen=True)
class BuildReport:
    nodes_read: int
    nodes_tagged: int
    entities_emitted: int
    triples_emitted: int
    tags_dropped: int

    def to_text(self) -> str:
        return "".join(f"{k}\t{v}\n" for k, v in asdict(self).items())

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def node_to_entity(node: OsmNode, onto: Ontology) -> Entity | None:
    """Resolve a node's tags against the ontology.

    Tags resolve, in order, to a subclass, a top-level class, or a
    property; anything else is dropped. The ``name`` tag becomes the
    label. Nodes whose tags yield no class are not entities.
    """
    types: set[str] = set()
    properties: dict[str, str] = {}
    label: str | None = None
    for tag in sorted(node.tags, key=lambda t: t.key):
        if tag.key == "name":
            label = tag.value
            continue
        cls = onto.class_for_tag(tag.key, tag.value)
        if cls is not None:
            types.add(cls.local_name)
            continue
        prop = onto.property_for(tag.key)
        if prop is not None:
            properties.setdefault(prop.local_name, tag.value)
    if not types:
        return None
    return Entity(
        wkg_id=node.id,
        types=tuple(sorted(types)),
        properties=tuple(sorted(properties.items())),
        label=label,
        point=(node.lon, node.lat),
    )


def entity_to_triples(entity: Entity) -> list[ttl.Triple]:
    """Emit the entity's triples plus its geometry node, in fixed order."""
    if not entity.types:
        raise PipelineError(f"entity {entity.wkg_id} has no type assertions")
    subject = f"wkg:{entity.wkg_id}"
    geo_subject = f"wkg:geo{entity.wkg_id}"
    triples = [ttl.Triple(subject, "rdf:type", f"wkgs:{t}") for t in entity.types]
    if entity.label is not None:
        triples.append(ttl.Triple(subject, "rdfs:label", ttl.Literal(entity.label)))
    for name, value in entity.properties:
        triples.append(ttl.Triple(subject, f"wkgs:{name}", ttl.Literal(value)))
    triples.append(ttl.Triple(subject, "wkgs:spatialObject", geo_subject))
    triples.append(ttl.Triple(subject, "wkgs:osmLink", f"osmn:{entity.wkg_id}"))
    lon, lat = entity.point
    triples.append(ttl.Triple(geo_subject, "rdf:type", "sf:Point"))
    triples.append(ttl.Triple(geo_subject, "geo:asWKT",
                              ttl.Literal(f"Point({lon!r} {lat!r})", "geo:wktLiteral")))
    return triples


def serialize_kg(triples: Iterable[ttl.Triple],
                 prefixes: dict[str, str] | None = None) -> str:
    """Serialize KG triples: prefix block, then subjects by ascending id,
    each entity before its geometry node."""
    return ttl.serialize_triples(triples, prefixes)


def _entity_blocks(triples: list[ttl.Triple]) -> str:
    groups: dict[str, list[ttl.Triple]] = {}
    for t in triples:
        groups.setdefault(t.subject, []).append(t)
    return "".join("\n" + ttl.format_subject_block(s, g, ttl.PREFIXES)
                   for s, g in groups.items())


def build_kg(nodes: Iterable[OsmNode], onto: Ontology,
             kg_out: str | Path) -> BuildReport:
    """Stream nodes through the ontology into a Turtle file.

    The output is byte-identical to ``serialize_kg`` over the full triple
    list. A partially written file is removed on failure.
    """
    kg_out = Path(kg_out)
    nodes_read = nodes_tagged = entities = triple_count = dropped = 0
    try:
        with open(kg_out, "w", encoding="utf-8") as out:
            out.write(ttl.format_prefix_block(ttl.PREFIXES))
            for node in nodes:
                nodes_read += 1
                if not node.tags:
                    continue
                nodes_tagged += 1
                entity = node_to_entity(node, onto)
                if entity is None:
                    dropped += len(node.tags)
                    continue
                used = (len(entity.types) + len(entity.properties)
                        + (1 if entity.label is not None else 0))
                dropped += len(node.tags) - used
                triples = entity_to_triples(entity)
                triple_count += len(triples)
                entities += 1
                out.write(_entity_blocks(triples))
    except BaseException:
        kg_out.unlink(missing_ok=True)
        raise
    return BuildReport(nodes_read, nodes_tagged, entities, triple_count, dropped)


def run_pipeline(osm_input: str | Path | IO[bytes],
                 features_tsv: str | Path,
                 alignments_tsv: str | Path,
                 kg_out: str | Path,
                 ontology_out: str | Path | None = None) -> BuildReport:
    """Full build: ontology from the map-features table, equivalence links
    from the alignment table, then nodes -> entities -> Turtle."""
    entries = load_map_features(features_tsv)
    onto = build_ontology(entries)
    onto = attach_equivalences(onto, load_alignments(alignments_tsv))
    wrote_ontology = False
    try:
        if ontology_out is not None:
            Path(ontology_out).write_text(serialize_ontology(onto), encoding="utf-8")
            wrote_ontology = True
        return build_kg(parse_osm_xml(osm_input), onto, kg_out)
    except BaseException:
        if wrote_ontology:
            Path(ontology_out).unlink(missing_ok=True)
        raise
