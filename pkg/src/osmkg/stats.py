"""Exact statistics over emitted knowledge-graph documents.

Entity and property figures come from the KG document; class hierarchy
and equivalence-link figures come from the ontology document. Entities
are subjects with at least one rdf:type in the schema namespace;
geometry nodes (typed sf:Point) never count.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from . import ttl
from .ontology import PROPERTY_CLASS, ROOT_CLASS


@dataclass(frozen=True)
class KgStats:
    total_triples: int
    total_entities: int
    top_level_classes: int
    subclasses: int
    unique_properties: int
    links_wikidata: int
    links_dbpedia: int

    def to_text(self) -> str:
        return "".join(f"{k}\t{v}\n" for k, v in asdict(self).items())

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def compute_stats(kg_document: str, ontology_document: str) -> KgStats:
    wkgs = ttl.PREFIXES["wkgs"]
    skip_predicates = {wkgs + "spatialObject", wkgs + "osmLink"}

    kg = ttl.parse_turtle(kg_document)
    entity_subjects: set[str] = set()
    used_properties: set[str] = set()
    for s, p, o in kg.triples:
        if p == ttl.RDF_TYPE and isinstance(o, str) and o.startswith(wkgs):
            entity_subjects.add(s)
        elif p.startswith(wkgs) and p not in skip_predicates:
            used_properties.add(p)

    onto = ttl.parse_turtle(ontology_document)
    rdfs_sub = ttl.PREFIXES["rdfs"] + "subClassOf"
    owl_equiv = ttl.PREFIXES["owl"] + "equivalentClass"
    top_level = 0
    subclass = 0
    links_wd = 0
    links_dbo = 0
    for s, p, o in onto.triples:
        if p == rdfs_sub and isinstance(o, str):
            if o == wkgs + ROOT_CLASS:
                top_level += 1
            else:
                subclass += 1
        elif p == owl_equiv and isinstance(o, str):
            if o.startswith(ttl.PREFIXES["wd"]):
                links_wd += 1
            elif o.startswith(ttl.PREFIXES["dbo"]):
                links_dbo += 1

    return KgStats(
        total_triples=len(kg.triples),
        total_entities=len(entity_subjects),
        top_level_classes=top_level,
        subclasses=subclass,
        unique_properties=len(used_properties),
        links_wikidata=links_wd,
        links_dbpedia=links_dbo,
    )


def class_counts(kg_document: str) -> dict[str, int]:
    """Entities per class local name; multi-typed entities count once per class."""
    wkgs = ttl.PREFIXES["wkgs"]
    seen: set[tuple[str, str]] = set()
    counts: dict[str, int] = {}
    for s, p, o in ttl.parse_turtle(kg_document).triples:
        if p == ttl.RDF_TYPE and isinstance(o, str) and o.startswith(wkgs):
            local = o[len(wkgs):]
            if local in (ROOT_CLASS, PROPERTY_CLASS):
                continue
            if (s, local) not in seen:
                seen.add((s, local))
                counts[local] = counts.get(local, 0) + 1
    return dict(sorted(counts.items()))
