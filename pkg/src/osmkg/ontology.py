"""Ontology induction from an OSM map-features table.

Keys categorized as features become top-level classes, their categorical
values become subclasses, and documented non-feature keys become
properties. Naming follows OWL conventions (UpperCamelCase classes,
lowerCamelCase properties); subclass names that would collide across keys
are disambiguated with the key as a prefix (BuildingSchool, AmenitySchool).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from . import ttl
from .errors import OntologyError

ROOT_CLASS = "WKGObject"
PROPERTY_CLASS = "WKGProperty"

FEATURE_CATEGORY = "feature"
PROPERTY_CATEGORIES = frozenset({"additional-attribute", "attribute", "additional-property"})
VALID_CATEGORIES = PROPERTY_CATEGORIES | {FEATURE_CATEGORY}

USER_DEFINED = "user defined"

_SEPARATORS = re.compile(r"[_:\-\s]+")
# Extra split before every capital keeps the conversions idempotent on
# already camel-cased names; all-lowercase OSM tokens are unaffected.
_CAMEL_BOUNDARY = re.compile(r"(?=[A-Z])")
_NON_ALNUM = re.compile(r"[^A-Za-z0-9]+")

_CLASS_NAME_RE = re.compile(r"^[A-Z][A-Za-z0-9]*$")
_PROPERTY_NAME_RE = re.compile(r"^[a-z][A-Za-z0-9]*$")

_BOOLEAN_VALUES = frozenset({"yes", "no", "true", "false"})
_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)$")


def _words(token: str) -> list[str]:
    words: list[str] = []
    for segment in _SEPARATORS.split(token):
        for word in _CAMEL_BOUNDARY.split(segment):
            word = _NON_ALNUM.sub("", word)
            if word:
                words.append(word)
    return words


def to_upper_camel(token: str) -> str:
    """Convert a key or value to an UpperCamelCase identifier."""
    words = _words(token)
    if not words:
        raise OntologyError(f"token {token!r} has no identifier characters")
    return "".join(w[:1].upper() + w[1:].lower() for w in words)


def to_lower_camel(token: str) -> str:
    """Convert a key to a lowerCamelCase identifier."""
    name = to_upper_camel(token)
    return name[:1].lower() + name[1:]


def is_categorical(value: str) -> bool:
    """True when the value denotes a kind of thing rather than a
    boolean/numeric/free-form annotation."""
    lowered = value.strip().lower()
    if lowered in _BOOLEAN_VALUES or lowered == USER_DEFINED:
        return False
    if _NUMBER_RE.match(value.strip()):
        return False
    return True


@dataclass(frozen=True)
class MapFeatureEntry:
    key: str
    value: str  # empty = key-level row (carries the key's wiki page)
    category: str
    wiki_url: str | None = None


@dataclass(frozen=True)
class OntologyClass:
    local_name: str
    parent: str | None = None  # local name of a top-level class; None = top level
    source_key: str | None = None
    source_value: str | None = None
    equivalents: frozenset[tuple[str, str]] = field(default_factory=frozenset)
    wiki_url: str | None = None


@dataclass(frozen=True)
class OntologyProperty:
    local_name: str
    source_key: str | None = None
    wiki_url: str | None = None


class Ontology:
    """Immutable class/property tables with tag-resolution lookups.

    Lookups go through the naming scheme (camel-cased keys and values,
    key-prefixed names for disambiguated subclasses), so an ontology
    reloaded from its Turtle serialization resolves tags identically to a
    freshly built one.
    """

    def __init__(self, classes: Iterable[OntologyClass],
                 properties: Iterable[OntologyProperty]):
        self.classes: dict[str, OntologyClass] = {}
        for cls in sorted(classes, key=lambda c: c.local_name):
            if not _CLASS_NAME_RE.match(cls.local_name):
                raise OntologyError(f"invalid class name {cls.local_name!r}")
            if cls.local_name in self.classes:
                raise OntologyError(f"duplicate class name {cls.local_name!r}")
            self.classes[cls.local_name] = cls
        self.properties: dict[str, OntologyProperty] = {}
        for prop in sorted(properties, key=lambda p: p.local_name):
            if not _PROPERTY_NAME_RE.match(prop.local_name):
                raise OntologyError(f"invalid property name {prop.local_name!r}")
            if prop.local_name in self.properties:
                raise OntologyError(f"duplicate property name {prop.local_name!r}")
            self.properties[prop.local_name] = prop
        for cls in self.classes.values():
            if cls.parent is None:
                continue
            parent = self.classes.get(cls.parent)
            if parent is None or parent.parent is not None:
                raise OntologyError(
                    f"subclass {cls.local_name!r} has no top-level parent {cls.parent!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ontology):
            return NotImplemented
        return self.classes == other.classes and self.properties == other.properties

    def top_level(self) -> list[OntologyClass]:
        return [c for c in self.classes.values() if c.parent is None]

    def subclasses(self) -> list[OntologyClass]:
        return [c for c in self.classes.values() if c.parent is not None]

    def top_level_class(self, key: str) -> OntologyClass | None:
        cls = self.classes.get(to_upper_camel(key))
        if cls is not None and cls.parent is None:
            return cls
        return None

    def subclass_for(self, key: str, value: str) -> OntologyClass | None:
        if not value or not is_categorical(value):
            return None
        top = to_upper_camel(key)
        for candidate in (to_upper_camel(value), top + to_upper_camel(value)):
            cls = self.classes.get(candidate)
            if cls is not None and cls.parent == top:
                return cls
        return None

    def class_for_tag(self, key: str, value: str) -> OntologyClass | None:
        """Resolve one tag to a class: subclass for a known categorical
        value, the key's top-level class for non-categorical values."""
        sub = self.subclass_for(key, value)
        if sub is not None:
            return sub
        if not is_categorical(value):
            return self.top_level_class(key)
        return None

    def property_for(self, key: str) -> OntologyProperty | None:
        return self.properties.get(to_lower_camel(key))


def load_map_features(path: str | Path) -> list[MapFeatureEntry]:
    """Read a map-features TSV (columns: key, value, category, wiki_url)."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = [(i + 1, line) for i, line in enumerate(lines)
            if line.strip() and not line.startswith("#")]
    if not rows:
        raise OntologyError(f"{path}: empty map-features file")
    header = rows[0][1].rstrip("\n").split("\t")
    if header != ["key", "value", "category", "wiki_url"]:
        raise OntologyError(f"{path}: expected header 'key value category wiki_url'")
    entries: list[MapFeatureEntry] = []
    seen: set[tuple[str, str]] = set()
    for lineno, line in rows[1:]:
        cells = line.split("\t")
        if len(cells) != 4:
            raise OntologyError(f"{path}:{lineno}: expected 4 tab-separated cells")
        key, value, category, wiki_url = (c.strip() for c in cells)
        if not key:
            raise OntologyError(f"{path}:{lineno}: empty key")
        if category not in VALID_CATEGORIES:
            raise OntologyError(f"{path}:{lineno}: unknown category {category!r}")
        if (key, value) in seen:
            raise OntologyError(f"{path}:{lineno}: duplicate entry ({key!r}, {value!r})")
        seen.add((key, value))
        entries.append(MapFeatureEntry(key, value, category, wiki_url or None))
    return entries


def build_ontology(entries: Iterable[MapFeatureEntry]) -> Ontology:
    """Derive the class hierarchy and property set from map-feature entries.

    Deterministic and insensitive to entry order: all grouping and naming
    runs over sorted views of the input.
    """
    entries = sorted(set(entries), key=lambda e: (e.key, e.value, e.category))
    seen_pairs: set[tuple[str, str]] = set()
    for e in entries:
        if (e.key, e.value) in seen_pairs:
            raise OntologyError(f"duplicate entry ({e.key!r}, {e.value!r})")
        seen_pairs.add((e.key, e.value))

    feature_keys = {e.key for e in entries if e.category == FEATURE_CATEGORY}
    property_rows = [e for e in entries if e.category in PROPERTY_CATEGORIES]
    overlap = feature_keys & {e.key for e in property_rows}
    if overlap:
        raise OntologyError(
            "keys categorized both as feature and as property: "
            + ", ".join(sorted(overlap)))

    properties: list[OntologyProperty] = []
    by_prop_key: dict[str, list[MapFeatureEntry]] = {}
    for e in property_rows:
        by_prop_key.setdefault(e.key, []).append(e)
    for key in sorted(by_prop_key):
        urls = sorted({e.wiki_url for e in by_prop_key[key] if e.wiki_url})
        if not urls:
            continue  # undocumented keys yield no property
        properties.append(OntologyProperty(to_lower_camel(key), key, urls[0]))

    top_level: dict[str, OntologyClass] = {}
    for key in sorted(feature_keys):
        name = to_upper_camel(key)
        key_row_url = next((e.wiki_url for e in entries
                            if e.key == key and e.value == ""
                            and e.category == FEATURE_CATEGORY), None)
        top_level[name] = OntologyClass(name, None, key, None, frozenset(), key_row_url)

    sub_rows = [e for e in entries
                if e.category == FEATURE_CATEGORY and e.value and is_categorical(e.value)]
    by_value_name: dict[str, list[MapFeatureEntry]] = {}
    for e in sub_rows:
        by_value_name.setdefault(to_upper_camel(e.value), []).append(e)

    subclasses: list[OntologyClass] = []
    for value_name in sorted(by_value_name):
        group = by_value_name[value_name]
        colliding = len({e.key for e in group}) > 1
        for e in group:
            parent = to_upper_camel(e.key)
            name = parent + value_name if colliding else value_name
            subclasses.append(OntologyClass(name, parent, e.key, e.value,
                                            frozenset(), e.wiki_url))

    names = [c.local_name for c in subclasses] + list(top_level)
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise OntologyError("class name collision survives disambiguation: "
                            + ", ".join(duplicates))
    return Ontology(list(top_level.values()) + subclasses, properties)


def serialize_ontology(onto: Ontology,
                       prefixes: dict[str, str] | None = None) -> str:
    """Emit the ontology as Turtle, ordered by local name."""
    prefixes = ttl.PREFIXES if prefixes is None else prefixes
    triples: list[ttl.Triple] = [
        ttl.Triple(f"wkgs:{ROOT_CLASS}", "rdf:type", "owl:Class"),
    ]
    for name in sorted(onto.classes):
        cls = onto.classes[name]
        parent = cls.parent if cls.parent is not None else ROOT_CLASS
        triples.append(ttl.Triple(f"wkgs:{name}", "rdfs:subClassOf", f"wkgs:{parent}"))
        if cls.wiki_url:
            triples.append(ttl.Triple(f"wkgs:{name}", "dcterms:source", f"<{cls.wiki_url}>"))
        for target, class_id in sorted(cls.equivalents):
            prefix = "wd" if target == "wikidata" else "dbo"
            triples.append(ttl.Triple(f"wkgs:{name}", "owl:equivalentClass",
                                      f"{prefix}:{class_id}"))
    for name in sorted(onto.properties):
        prop = onto.properties[name]
        triples.append(ttl.Triple(f"wkgs:{name}", "rdf:type", f"wkgs:{PROPERTY_CLASS}"))
        if prop.wiki_url:
            triples.append(ttl.Triple(f"wkgs:{name}", "dcterms:source", f"<{prop.wiki_url}>"))
    order = [f"wkgs:{ROOT_CLASS}"]
    order += [f"wkgs:{n}" for n in sorted(onto.classes)]
    order += [f"wkgs:{n}" for n in sorted(onto.properties)]
    return ttl.format_document(triples, prefixes, subject_order=order)


def ontology_from_turtle(text: str) -> Ontology:
    """Rebuild a queryable ontology from its Turtle serialization.

    Source keys and values are not recoverable from the document; tag
    resolution relies on the naming scheme alone.
    """
    doc = ttl.parse_turtle(text)
    wkgs = ttl.PREFIXES["wkgs"]
    rdfs_sub = ttl.PREFIXES["rdfs"] + "subClassOf"
    owl_equiv = ttl.PREFIXES["owl"] + "equivalentClass"
    dct_source = ttl.PREFIXES["dcterms"] + "source"

    parents: dict[str, str] = {}
    sources: dict[str, str] = {}
    equivalents: dict[str, set[tuple[str, str]]] = {}
    property_names: list[str] = []
    for s, p, o in doc.triples:
        subject = ttl.in_namespace(s, "wkgs")
        if subject is None:
            continue
        if p == rdfs_sub and isinstance(o, str):
            parent = ttl.in_namespace(o, "wkgs")
            if parent is None:
                raise OntologyError(f"non-wkgs parent class for {subject!r}")
            parents[subject] = parent
        elif p == ttl.RDF_TYPE and o == wkgs + PROPERTY_CLASS:
            property_names.append(subject)
        elif p == dct_source and isinstance(o, str):
            sources[subject] = o
        elif p == owl_equiv and isinstance(o, str):
            wd_id = ttl.in_namespace(o, "wd")
            dbo_id = ttl.in_namespace(o, "dbo")
            if wd_id is not None:
                equivalents.setdefault(subject, set()).add(("wikidata", wd_id))
            elif dbo_id is not None:
                equivalents.setdefault(subject, set()).add(("dbpedia", dbo_id))
            else:
                raise OntologyError(f"equivalence target outside wd/dbo: {o!r}")

    classes = []
    for name, parent in parents.items():
        classes.append(OntologyClass(
            local_name=name,
            parent=None if parent == ROOT_CLASS else parent,
            equivalents=frozenset(equivalents.get(name, ())),
            wiki_url=sources.get(name),
        ))
    props = [OntologyProperty(n, None, sources.get(n)) for n in property_names]
    return Ontology(classes, props)


def with_equivalents(onto: Ontology,
                     additions: dict[str, set[tuple[str, str]]]) -> Ontology:
    """Return a copy of the ontology with equivalences merged in."""
    classes = []
    for name, cls in onto.classes.items():
        extra = additions.get(name)
        if extra:
            cls = replace(cls, equivalents=cls.equivalents | frozenset(extra))
        classes.append(cls)
    return Ontology(classes, onto.properties.values())
