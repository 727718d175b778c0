"""In-memory query store over an emitted knowledge graph.

Loads the KG and ontology Turtle documents into class, label and spatial
indexes and answers the supported query shapes: nearest-k by class,
radius search, seeded uniform sampling through external equivalence
classes, and label lookup. The store is immutable after load; the grid
index is a pruning device only and never changes results.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import ttl
from ._kernels import EARTH_RADIUS_M, haversine_arrays, within_arrays
from .errors import QueryError, StoreError
from .ontology import ROOT_CLASS, ontology_from_turtle

DEFAULT_CELL_DEG = 0.05
# Grid path only pays off for classes above this size; below it a full
# vectorized scan is at least as fast.
_SCAN_THRESHOLD = 256

_WKT_POINT_RE = re.compile(
    r"^Point\(\s*([+-]?[\d.eE+-]+)\s+([+-]?[\d.eE+-]+)\s*\)$")


@dataclass(frozen=True)
class SpatialPoint:
    lon: float
    lat: float

    def __post_init__(self):
        if not (-180.0 <= self.lon <= 180.0):
            raise QueryError(f"longitude {self.lon} outside [-180, 180]")
        if not (-90.0 <= self.lat <= 90.0):
            raise QueryError(f"latitude {self.lat} outside [-90, 90]")


@dataclass(frozen=True)
class StoreEntity:
    id: int
    label: str | None
    types: frozenset[str]
    lon: float
    lat: float
    osm_link: str


class SampleRow(NamedTuple):
    wkg_id: int
    type_name: str
    osm_link: str
    label: str


def haversine_m(a: SpatialPoint | tuple[float, float],
                b: SpatialPoint | tuple[float, float]) -> float:
    """Great-circle distance in metres on a sphere of radius 6,371,000 m."""
    lon0, lat0 = (a.lon, a.lat) if isinstance(a, SpatialPoint) else a
    lon1, lat1 = (b.lon, b.lat) if isinstance(b, SpatialPoint) else b
    return float(haversine_arrays(lon0, lat0,
                                  np.array([lon1], dtype=np.float64),
                                  np.array([lat1], dtype=np.float64))[0])


def _normalize_class(spec: str) -> str:
    """Accept a local name, wkgs: CURIE, or full schema IRI."""
    if spec.startswith("http"):
        local = ttl.in_namespace(spec, "wkgs")
        if local is None:
            raise QueryError(f"class IRI outside the wkgs namespace: {spec!r}")
        return local
    if spec.startswith("wkgs:"):
        return spec[len("wkgs:"):]
    if ":" in spec:
        raise QueryError(f"unsupported class prefix in {spec!r}")
    return spec


def _normalize_external(spec: str) -> str:
    """Normalize an external class reference to a wd:/dbo: CURIE."""
    if spec.startswith("http"):
        for prefix in ("wd", "dbo"):
            local = ttl.in_namespace(spec, prefix)
            if local is not None:
                return f"{prefix}:{local}"
        raise QueryError(f"external class IRI outside wd/dbo: {spec!r}")
    if spec.startswith(("wd:", "dbo:")):
        return spec
    if re.match(r"^Q\d+$", spec):
        return f"wd:{spec}"
    return f"dbo:{spec}"


class QueryStore:
    """Immutable entity table plus class/label/grid indexes."""

    def __init__(self, entities: list[StoreEntity], declared_classes: set[str],
                 equivalences: dict[str, set[str]],
                 cell_deg: float = DEFAULT_CELL_DEG):
        self._entities = sorted(entities, key=lambda e: e.id)
        self._by_id = {e.id: i for i, e in enumerate(self._entities)}
        if len(self._by_id) != len(self._entities):
            raise StoreError("duplicate entity ids in knowledge graph")
        self._lons = np.array([e.lon for e in self._entities], dtype=np.float64)
        self._lats = np.array([e.lat for e in self._entities], dtype=np.float64)
        self._cell_deg = cell_deg
        self._n_lon = max(1, round(360.0 / cell_deg))
        self._n_lat = max(1, round(180.0 / cell_deg))
        # upper bound on the distance from a cell's center to any point in
        # it: meridian leg + parallel leg of half a cell each
        self._cell_radius_m = EARTH_RADIUS_M * math.radians(cell_deg)

        self._cx = np.minimum((np.floor((self._lons + 180.0) / cell_deg)).astype(np.int64)
                              % self._n_lon, self._n_lon - 1)
        self._cy = np.clip((np.floor((self._lats + 90.0) / cell_deg)).astype(np.int64),
                           0, self._n_lat - 1)

        self._class_index: dict[str, np.ndarray] = {}
        by_class: dict[str, list[int]] = {}
        for i, e in enumerate(self._entities):
            for t in e.types:
                by_class.setdefault(t, []).append(i)
        for name, positions in by_class.items():
            self._class_index[name] = np.array(positions, dtype=np.intp)

        self._label_index: dict[str, list[int]] = {}
        for i, e in enumerate(self._entities):
            if e.label is not None:
                self._label_index.setdefault(e.label, []).append(i)

        self._grid: dict[tuple[int, int], list[int]] = {}
        for i in range(len(self._entities)):
            self._grid.setdefault((int(self._cx[i]), int(self._cy[i])), []).append(i)

        self._declared_classes = set(declared_classes) | set(by_class)
        self._equivalences = equivalences

    # -- basic access ------------------------------------------------------

    def __len__(self) -> int:
        return len(self._entities)

    def entities(self) -> list[StoreEntity]:
        return list(self._entities)

    def entity(self, wkg_id: int) -> StoreEntity:
        try:
            return self._entities[self._by_id[wkg_id]]
        except KeyError:
            raise QueryError(f"unknown entity id {wkg_id}") from None

    def entity_by_label(self, label: str) -> StoreEntity:
        """The unique entity carrying this exact label."""
        return self._entities[self._resolve_label(label)]

    def class_members(self, class_spec: str) -> list[StoreEntity]:
        name = self._check_class(class_spec)
        positions = self._class_index.get(name)
        if positions is None:
            return []
        return [self._entities[i] for i in positions]

    def _check_class(self, class_spec: str) -> str:
        name = _normalize_class(class_spec)
        if name not in self._declared_classes:
            raise QueryError(f"unknown class {class_spec!r}")
        return name

    def _resolve_label(self, label: str) -> int:
        positions = self._label_index.get(label)
        if not positions:
            raise QueryError(f"unknown label {label!r}")
        if len(positions) > 1:
            ids = ", ".join(str(self._entities[i].id) for i in positions)
            raise QueryError(f"ambiguous label {label!r}: candidate ids {ids}")
        return positions[0]

    # -- spatial helpers -----------------------------------------------------

    def _circle_cell_ranges(self, lon: float, lat: float, radius_m: float):
        """(cy_lo, cy_hi, cx_range) of grid cells intersecting the circle.

        Uses the exact bounding box of a spherical cap (longitude half-span
        asin(sin c / cos lat) when the cap excludes the poles) plus a
        one-cell margin.
        """
        c = radius_m / EARTH_RADIUS_M
        dlat = math.degrees(c)
        lat_lo = max(lat - dlat, -90.0)
        lat_hi = min(lat + dlat, 90.0)
        cy_lo = max(int(math.floor((lat_lo + 90.0) / self._cell_deg)) - 1, 0)
        cy_hi = min(int(math.floor((lat_hi + 90.0) / self._cell_deg)) + 1,
                    self._n_lat - 1)
        pole_in_cap = lat_hi >= 90.0 or lat_lo <= -90.0
        if pole_in_cap or c >= math.pi / 2:
            return cy_lo, cy_hi, range(self._n_lon)
        ratio = min(1.0, math.sin(c) / math.cos(math.radians(lat)))
        dlon = math.degrees(math.asin(ratio))
        if dlon * 2 >= 360.0 - 2 * self._cell_deg:
            return cy_lo, cy_hi, range(self._n_lon)
        cx_lo = int(math.floor((lon - dlon + 180.0) / self._cell_deg)) - 1
        cx_hi = int(math.floor((lon + dlon + 180.0) / self._cell_deg)) + 1
        return cy_lo, cy_hi, range(cx_lo, min(cx_hi + 1, cx_lo + self._n_lon))

    def _grid_candidates(self, cy_lo: int, cy_hi: int, cx_range,
                         mask: np.ndarray) -> list[int]:
        found: list[int] = []
        for cy in range(cy_lo, cy_hi + 1):
            for cx in cx_range:
                for i in self._grid.get((cx % self._n_lon, cy), ()):
                    if mask[i]:
                        found.append(i)
        return found

    # -- queries -------------------------------------------------------------

    def nearest_k(self, anchor: str | SpatialPoint | tuple[float, float],
                  class_spec: str, k: int) -> list[tuple[StoreEntity, float]]:
        """The k closest class members, ascending by (distance, id).

        A label anchor resolves to exactly one entity, which is excluded
        from its own result list.
        """
        name = self._check_class(class_spec)
        if k < 0:
            raise QueryError(f"k must be >= 0, got {k}")
        point, exclude = self._resolve_anchor(anchor)
        positions = self._candidate_positions(name, exclude)
        if k == 0 or positions.size == 0:
            return []
        if positions.size <= _SCAN_THRESHOLD:
            chosen = self._select_nearest(positions, point, k)
        else:
            chosen = self._nearest_grid(positions, point, k)
        return [(self._entities[i], d) for i, d in chosen]

    def _resolve_anchor(self, anchor):
        if isinstance(anchor, str):
            pos = self._resolve_label(anchor)
            entity = self._entities[pos]
            return SpatialPoint(entity.lon, entity.lat), pos
        if isinstance(anchor, tuple):
            anchor = SpatialPoint(*anchor)
        return anchor, None

    def _candidate_positions(self, name: str, exclude: int | None) -> np.ndarray:
        positions = self._class_index.get(name)
        if positions is None:
            return np.empty(0, dtype=np.intp)
        if exclude is not None:
            positions = positions[positions != exclude]
        return positions

    def _select_nearest(self, positions: np.ndarray, point: SpatialPoint,
                        k: int) -> list[tuple[int, float]]:
        distances = haversine_arrays(point.lon, point.lat,
                                     self._lons[positions], self._lats[positions])
        order = np.lexsort((positions, distances))[:k]
        return [(int(positions[i]), float(distances[i])) for i in order]

    def _nearest_grid(self, positions: np.ndarray, point: SpatialPoint,
                      k: int) -> list[tuple[int, float]]:
        """Exact k nearest via occupied cells ranked by a distance lower
        bound (cell-center distance minus the cell radius)."""
        keys = self._cx[positions] * self._n_lat + self._cy[positions]
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
        starts = np.concatenate(([0], np.flatnonzero(np.diff(sorted_keys)) + 1))
        uniq = sorted_keys[starts]
        center_lon = -180.0 + ((uniq // self._n_lat) + 0.5) * self._cell_deg
        center_lat = -90.0 + ((uniq % self._n_lat) + 0.5) * self._cell_deg
        bound = haversine_arrays(point.lon, point.lat,
                                 center_lon.astype(np.float64),
                                 center_lat.astype(np.float64))
        bound = np.maximum(bound - self._cell_radius_m, 0.0)
        cell_rank = np.argsort(bound, kind="stable")
        ends = np.concatenate((starts[1:], [len(order)]))

        collected: list[np.ndarray] = []
        count = 0
        cutoff = math.inf
        for ci in cell_rank:
            if count >= k and bound[ci] > cutoff:
                break
            members = positions[order[starts[ci]:ends[ci]]]
            collected.append(members)
            count += members.size
            if count >= k and math.isinf(cutoff):
                gathered = np.concatenate(collected)
                d = haversine_arrays(point.lon, point.lat,
                                     self._lons[gathered], self._lats[gathered])
                cutoff = float(np.partition(d, k - 1)[k - 1])
        return self._select_nearest(np.concatenate(collected), point, k)

    def within_radius(self, center: SpatialPoint | tuple[float, float],
                      radius_m: float, class_spec: str) -> list[StoreEntity]:
        """Class members with haversine distance <= radius, sorted by id."""
        name = self._check_class(class_spec)
        if radius_m < 0:
            raise QueryError(f"radius must be >= 0, got {radius_m}")
        if isinstance(center, tuple):
            center = SpatialPoint(*center)
        positions = self._class_index.get(name)
        if positions is None or positions.size == 0:
            return []
        if positions.size > _SCAN_THRESHOLD:
            cy_lo, cy_hi, cx_range = self._circle_cell_ranges(
                center.lon, center.lat, radius_m)
            n_cells = (cy_hi - cy_lo + 1) * len(cx_range)
            if n_cells <= 4 * positions.size:
                mask = np.zeros(len(self._entities), dtype=bool)
                mask[positions] = True
                found = self._grid_candidates(cy_lo, cy_hi, cx_range, mask)
                positions = np.array(sorted(set(found)), dtype=np.intp)
                if positions.size == 0:
                    return []
        hit = within_arrays(center.lon, center.lat,
                            self._lons[positions], self._lats[positions],
                            float(radius_m))
        return [self._entities[int(i)] for i in positions[hit]]

    def sample_entities(self, external_class_id: str, n: int,
                        seed: int) -> list[SampleRow]:
        """Uniform sample without replacement of entities typed with any
        class equivalent to the external class; deterministic per seed."""
        if n < 0:
            raise QueryError(f"sample size must be >= 0, got {n}")
        curie = _normalize_external(external_class_id)
        classes = self._equivalences.get(curie)
        if not classes:
            raise QueryError(f"unknown external class {external_class_id!r}")
        population: list[int] = sorted({
            int(i) for name in classes for i in self._class_index.get(name, ())})
        rng = random.Random(seed)
        chosen = rng.sample(population, min(n, len(population)))
        rows = []
        for i in chosen:
            e = self._entities[i]
            type_name = min(t for t in e.types if t in classes)
            rows.append(SampleRow(e.id, type_name, e.osm_link, e.label or ""))
        return rows


def load_store(kg_document: str, ontology_document: str,
               cell_deg: float = DEFAULT_CELL_DEG) -> QueryStore:
    """Build a :class:`QueryStore` from emitted Turtle documents."""
    onto = ontology_from_turtle(ontology_document)
    declared = set(onto.classes) | {ROOT_CLASS}
    equivalences: dict[str, set[str]] = {}
    for cls in onto.classes.values():
        for target, class_id in cls.equivalents:
            prefix = "wd" if target == "wikidata" else "dbo"
            equivalences.setdefault(f"{prefix}:{class_id}", set()).add(cls.local_name)

    doc = ttl.parse_turtle(kg_document)
    wkgs = ttl.PREFIXES["wkgs"]
    rdfs_label = ttl.PREFIXES["rdfs"] + "label"
    geo_aswkt = ttl.PREFIXES["geo"] + "asWKT"
    sf_point = ttl.PREFIXES["sf"] + "Point"

    types: dict[str, set[str]] = {}
    labels: dict[str, str] = {}
    spatial: dict[str, str] = {}
    osm_links: dict[str, str] = {}
    wkt: dict[str, str] = {}
    point_typed: set[str] = set()
    for s, p, o in doc.triples:
        if p == ttl.RDF_TYPE:
            if isinstance(o, str) and o.startswith(wkgs):
                types.setdefault(s, set()).add(o[len(wkgs):])
            elif o == sf_point:
                point_typed.add(s)
        elif p == rdfs_label and isinstance(o, ttl.Literal):
            labels[s] = o.text
        elif p == wkgs + "spatialObject" and isinstance(o, str):
            spatial[s] = o
        elif p == wkgs + "osmLink" and isinstance(o, str):
            osm_links[s] = o
        elif p == geo_aswkt and isinstance(o, ttl.Literal):
            wkt[s] = o.text

    entities: list[StoreEntity] = []
    for subject, type_set in sorted(types.items()):
        local = ttl.in_namespace(subject, "wkg")
        if local is None or not local.isdigit():
            raise StoreError(f"typed subject outside the wkg id space: {subject!r}")
        geo_ref = spatial.get(subject)
        if geo_ref is None:
            raise StoreError(f"entity wkg:{local} has no spatialObject")
        if geo_ref not in point_typed or geo_ref not in wkt:
            raise StoreError(f"entity wkg:{local}: dangling spatialObject {geo_ref!r}")
        m = _WKT_POINT_RE.match(wkt[geo_ref])
        if m is None:
            raise StoreError(f"entity wkg:{local}: malformed WKT {wkt[geo_ref]!r}")
        lon, lat = float(m.group(1)), float(m.group(2))
        if not (-180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0):
            raise StoreError(f"entity wkg:{local}: coordinates out of range")
        entities.append(StoreEntity(
            id=int(local),
            label=labels.get(subject),
            types=frozenset(type_set),
            lon=lon,
            lat=lat,
            osm_link=osm_links.get(subject, ""),
        ))
    return QueryStore(entities, declared, equivalences, cell_deg)
