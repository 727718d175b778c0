"""Curated tag-to-class alignment table and equivalence attachment.

The table is the manually verified output of an upstream class-alignment
model; this module only loads it and links ontology classes to the
external classes via owl:equivalentClass.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import AlignmentError
from .ontology import Ontology, with_equivalents

TARGET_GRAPHS = ("wikidata", "dbpedia")


@dataclass(frozen=True)
class AlignmentMapping:
    osm_key: str
    osm_value: str
    target_graph: str
    class_id: str
    label: str | None = None


def load_alignments(path: str | Path) -> list[AlignmentMapping]:
    """Read an alignment TSV (columns: key, value, target, class_id, label)."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = [(i + 1, line) for i, line in enumerate(lines)
            if line.strip() and not line.startswith("#")]
    if not rows:
        raise AlignmentError(f"{path}: empty alignment file")
    header = rows[0][1].split("\t")
    if header != ["key", "value", "target", "class_id", "label"]:
        raise AlignmentError(f"{path}: expected header 'key value target class_id label'")
    mappings: list[AlignmentMapping] = []
    seen: set[tuple[str, str, str]] = set()
    for lineno, line in rows[1:]:
        cells = line.split("\t")
        if len(cells) != 5:
            raise AlignmentError(f"{path}:{lineno}: expected 5 tab-separated cells")
        key, value, target, class_id, label = (c.strip() for c in cells)
        if target not in TARGET_GRAPHS:
            raise AlignmentError(f"{path}:{lineno}: unknown target graph {target!r}")
        if not key or not value or not class_id:
            raise AlignmentError(f"{path}:{lineno}: key, value and class_id are required")
        triple = (key, value, target)
        if triple in seen:
            raise AlignmentError(
                f"{path}:{lineno}: duplicate mapping ({key}={value}, {target})")
        seen.add(triple)
        mappings.append(AlignmentMapping(key, value, target, class_id, label or None))
    return mappings


def attach_equivalences(onto: Ontology,
                        mappings: Iterable[AlignmentMapping]) -> Ontology:
    """Attach each mapping's external class to the ontology class its tag
    resolves to. Fails listing every unresolvable mapping so curation
    mistakes surface in one pass."""
    additions: dict[str, set[tuple[str, str]]] = {}
    unmatched: list[AlignmentMapping] = []
    ordered = sorted(set(mappings),
                     key=lambda m: (m.osm_key, m.osm_value, m.target_graph, m.class_id))
    for m in ordered:
        cls = onto.class_for_tag(m.osm_key, m.osm_value)
        if cls is None:
            unmatched.append(m)
            continue
        additions.setdefault(cls.local_name, set()).add((m.target_graph, m.class_id))
    if unmatched:
        detail = "; ".join(f"{m.osm_key}={m.osm_value} -> {m.target_graph}:{m.class_id}"
                           for m in unmatched)
        raise AlignmentError(f"unresolvable alignment mappings: {detail}")
    return with_equivalents(onto, additions)
