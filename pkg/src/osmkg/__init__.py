"""osmkg: OpenStreetMap nodes -> geographic knowledge graph.

Pipeline stages: stream OSM XML node dumps, induce a class/property
ontology from a map-features table, attach Wikidata/DBpedia equivalence
links, emit deterministic Turtle, and query the result in memory
(nearest-k, radius, seeded sampling, statistics).
"""

__version__ = "0.1.0"

__all__ = [
    "alignment",
    "cli",
    "errors",
    "geo_query",
    "kg_builder",
    "ontology",
    "osm_corpus",
    "stats",
    "ttl",
]
