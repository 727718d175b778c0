"""Command-line front end: build, query, sample, stats, validate."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ttl
from .errors import Error

# geo_query (numba-backed) is imported lazily inside the query/sample
# handlers so the build path stays lightweight.


def _require_file(path: str | Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise Error(f"file not found: {path}")
    return path


def _read(path: str | Path) -> str:
    return _require_file(path).read_text(encoding="utf-8")


def _parse_point(text: str):
    try:
        lon_s, lat_s = text.split(",")
        return float(lon_s), float(lat_s)
    except ValueError:
        raise Error(f"expected --point LON,LAT, got {text!r}") from None


def _print_kv(pairs, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(dict(pairs)))
    else:
        for key, value in pairs:
            print(f"{key}\t{value}")


def cmd_build_ontology(args) -> int:
    from .alignment import attach_equivalences, load_alignments
    from .ontology import build_ontology, load_map_features, serialize_ontology

    entries = load_map_features(_require_file(args.features))
    onto = build_ontology(entries)
    onto = attach_equivalences(onto, load_alignments(_require_file(args.alignments)))
    Path(args.out).write_text(serialize_ontology(onto), encoding="utf-8")
    pairs = [
        ("top_level_classes", len(onto.top_level())),
        ("subclasses", len(onto.subclasses())),
        ("properties", len(onto.properties)),
        ("equivalences", sum(len(c.equivalents) for c in onto.classes.values())),
        ("out", str(args.out)),
    ]
    _print_kv(pairs, args.format)
    return 0


def cmd_build_kg(args) -> int:
    from .kg_builder import build_kg, run_pipeline
    from .ontology import ontology_from_turtle
    from .osm_corpus import parse_osm_xml

    osm = _require_file(args.osm)
    if args.ontology:
        onto = ontology_from_turtle(_read(args.ontology))
        report = build_kg(parse_osm_xml(osm), onto, args.out)
    else:
        if not (args.features and args.alignments):
            raise Error("build-kg needs --ontology or both --features and --alignments")
        report = run_pipeline(osm, _require_file(args.features),
                              _require_file(args.alignments), args.out,
                              ontology_out=args.ontology_out)
    if args.format == "json":
        print(report.to_json())
    else:
        print(report.to_text(), end="")
    return 0


def cmd_stats(args) -> int:
    from .stats import class_counts, compute_stats

    kg_text = _read(args.kg)
    result = compute_stats(kg_text, _read(args.ontology))
    if args.format == "json":
        payload = json.loads(result.to_json())
        if args.per_class:
            payload["class_counts"] = class_counts(kg_text)
        print(json.dumps(payload))
    else:
        print(result.to_text(), end="")
        if args.per_class:
            for name, count in class_counts(kg_text).items():
                print(f"class:{name}\t{count}")
    return 0


def _load_store(args):
    from .geo_query import load_store

    return load_store(_read(args.kg), _read(args.ontology))


def _query_rows(results) -> list[dict]:
    rows = []
    for entity, distance in results:
        rows.append({
            "id": entity.id,
            "name": entity.label or f"wkg:{entity.id}",
            "distance_m": round(distance, 3),
            "lon": entity.lon,
            "lat": entity.lat,
            "classes": sorted(entity.types),
        })
    return rows


def _print_query(rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(rows))
        return
    if fmt == "geojson":
        features = [{
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [r["lon"], r["lat"]]},
            "properties": {"id": r["id"], "name": r["name"],
                           "class": r["classes"][0] if r["classes"] else None,
                           "distance_m": r["distance_m"]},
        } for r in rows]
        print(json.dumps({"type": "FeatureCollection", "features": features}))
        return
    width = max([len("name")] + [len(r["name"]) for r in rows])
    print(f"{'name'.ljust(width)}  distance_m")
    for r in rows:
        print(f"{r['name'].ljust(width)}  {r['distance_m']:.3f}")


def cmd_query(args) -> int:
    from .geo_query import haversine_m

    store = _load_store(args)
    if (args.label is None) == (args.point is None):
        raise Error("give exactly one of --label or --point")
    anchor = args.label if args.label is not None else _parse_point(args.point)
    if args.mode == "nearest":
        results = store.nearest_k(anchor, args.klass, args.k)
    else:
        if args.radius_m is None:
            raise Error("query radius needs --radius-m")
        if args.label is not None:
            e = store.entity_by_label(args.label)
            center = (e.lon, e.lat)
        else:
            center = _parse_point(args.point)
        members = store.within_radius(center, args.radius_m, args.klass)
        results = sorted(((m, haversine_m(center, (m.lon, m.lat))) for m in members),
                         key=lambda pair: (pair[1], pair[0].id))
    _print_query(_query_rows(results), args.format)
    return 0


def cmd_sample(args) -> int:
    store = _load_store(args)
    rows = store.sample_entities(args.klass, args.n, args.seed)
    if args.format == "json":
        print(json.dumps([{"id": r.wkg_id, "type": r.type_name,
                           "osmid": r.osm_link, "name": r.label} for r in rows]))
    else:
        print("id\ttype\tosmid\tname")
        for r in rows:
            print(f"wkg:{r.wkg_id}\twkgs:{r.type_name}\t{r.osm_link}\t{r.label}")
    return 0


def cmd_validate(args) -> int:
    text = _read(args.path)
    doc = ttl.parse_turtle(text)
    problems = _check_kg_shape(doc, _read(args.ontology) if args.ontology else None)
    wkgs = ttl.PREFIXES["wkgs"]
    entity_count = len({s for s, p, o in doc.triples
                        if p == ttl.RDF_TYPE and isinstance(o, str)
                        and o.startswith(wkgs)})
    pairs = [("file", str(args.path)), ("triples", len(doc.triples)),
             ("entities", entity_count), ("ok", "true" if not problems else "false")]
    _print_kv(pairs, args.format)
    for problem in problems:
        print(f"invalid: {problem}", file=sys.stderr)
    return 0 if not problems else 1


def _check_kg_shape(doc: ttl.ParsedDocument, ontology_text: str | None) -> list[str]:
    import re as _re

    wkgs = ttl.PREFIXES["wkgs"]
    geo_aswkt = ttl.PREFIXES["geo"] + "asWKT"
    sf_point = ttl.PREFIXES["sf"] + "Point"
    problems: list[str] = []
    typed: dict[str, set[str]] = {}
    spatial: dict[str, list[str]] = {}
    point_typed: set[str] = set()
    wkt: dict[str, str] = {}
    predicates: set[str] = set()
    for s, p, o in doc.triples:
        predicates.add(p)
        if p == ttl.RDF_TYPE and isinstance(o, str):
            if o.startswith(wkgs):
                typed.setdefault(s, set()).add(o[len(wkgs):])
            elif o == sf_point:
                point_typed.add(s)
        elif p == wkgs + "spatialObject" and isinstance(o, str):
            spatial.setdefault(s, []).append(o)
        elif p == geo_aswkt and isinstance(o, ttl.Literal):
            wkt[s] = o.text
    wkt_re = _re.compile(r"^Point\(\s*(\S+)\s+(\S+)\s*\)$")
    referenced: dict[str, int] = {}
    for subject in sorted(typed):
        refs = spatial.get(subject, [])
        if len(refs) != 1:
            problems.append(f"{subject}: expected exactly one spatialObject, got {len(refs)}")
            continue
        geo_ref = refs[0]
        referenced[geo_ref] = referenced.get(geo_ref, 0) + 1
        if geo_ref not in point_typed:
            problems.append(f"{subject}: geometry {geo_ref} is not typed sf:Point")
        text = wkt.get(geo_ref)
        if text is None:
            problems.append(f"{subject}: geometry {geo_ref} has no asWKT literal")
            continue
        m = wkt_re.match(text)
        if m is None:
            problems.append(f"{geo_ref}: malformed WKT {text!r}")
            continue
        try:
            lon, lat = float(m.group(1)), float(m.group(2))
        except ValueError:
            problems.append(f"{geo_ref}: non-numeric WKT coordinates {text!r}")
            continue
        if not (-180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0):
            problems.append(f"{geo_ref}: WKT coordinates out of range (longitude first)")
    for geo_ref, count in referenced.items():
        if count > 1:
            problems.append(f"{geo_ref}: geometry shared by {count} entities")
    if ontology_text is not None:
        from .ontology import ontology_from_turtle

        onto = ontology_from_turtle(ontology_text)
        builtin = {wkgs + "spatialObject", wkgs + "osmLink"}
        for subject, names in sorted(typed.items()):
            for name in sorted(names - set(onto.classes)):
                problems.append(f"{subject}: type {name} not declared in the ontology")
        for p in sorted(predicates):
            if p.startswith(wkgs) and p not in builtin:
                if p[len(wkgs):] not in onto.properties:
                    problems.append(f"predicate {p} not declared in the ontology")
    return problems


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osmkg",
        description="Build and query a geographic knowledge graph from OSM node dumps.")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = {"choices": ("text", "json"), "default": "text"}

    p = sub.add_parser("build-ontology", help="map-features + alignments -> ontology.ttl")
    p.add_argument("--features", required=True)
    p.add_argument("--alignments", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_build_ontology)

    p = sub.add_parser("build-kg", help="OSM XML -> kg.ttl")
    p.add_argument("--osm", required=True)
    p.add_argument("--ontology", help="previously built ontology Turtle file")
    p.add_argument("--features")
    p.add_argument("--alignments")
    p.add_argument("--ontology-out", help="also write the ontology here")
    p.add_argument("--out", required=True)
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_build_kg)

    p = sub.add_parser("stats", help="knowledge-graph statistics")
    p.add_argument("--kg", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--per-class", action="store_true")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("query", help="spatial queries")
    p.add_argument("mode", choices=("nearest", "radius"))
    p.add_argument("--kg", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--label")
    p.add_argument("--point", help="LON,LAT anchor")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--radius-m", type=float)
    p.add_argument("--format", choices=("text", "json", "geojson"), default="text")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("sample", help="seeded uniform sample via an external class")
    p.add_argument("--kg", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--class", dest="klass", required=True,
                   help="external class id (Q..., wd:..., dbo:... or DBpedia name)")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("validate", help="reparse a Turtle file and check invariants")
    p.add_argument("path")
    p.add_argument("--ontology")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
