"""Synthetic OSM XML generators for tests (ascending node ids)."""

import random
from xml.sax.saxutils import quoteattr

# Tag pools drawn from the repo's map-features fixture. A node is an
# entity exactly when it gets at least one class-bearing tag; the
# generators track that themselves so expected counts never touch
# package code.
CLASS_TAGS = [
    ("natural", "peak"), ("natural", "tree"), ("natural", "water"),
    ("amenity", "restaurant"), ("amenity", "bicycle_rental"),
    ("railway", "station"), ("historic", "monument"),
    ("man_made", "mineshaft"), ("tourism", "hotel"),
    ("building", "yes"), ("place", "village"), ("leisure", "park"),
]
PROPERTY_KEYS = ["ele", "opening_hours", "phone", "website", "wheelchair",
                 "operator", "note"]  # last two are not ontology properties
NAMES = ["Alpha", "Beta", "Gamma \"quoted\"", "Delta\\Backslash", "Épsilon",
         "Zeta\tTab", "Ета", "Theta's", "north & south", "<bracketed>"]


def node_xml(node_id, lat, lon, tags):
    parts = [f'  <node id="{node_id}" lat="{lat!r}" lon="{lon!r}"']
    if not tags:
        return parts[0] + "/>\n"
    parts.append(">\n")
    for key, value in tags:
        parts.append(f"    <tag k={quoteattr(key)} v={quoteattr(value)}/>\n")
    parts.append("  </node>\n")
    return "".join(parts)


def write_osm(path, nodes):
    """nodes: iterable of (id, lat, lon, [(k, v), ...])."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('<?xml version="1.0" encoding="UTF-8"?>\n<osm version="0.6">\n')
        for node_id, lat, lon, tags in nodes:
            fh.write(node_xml(node_id, lat, lon, tags))
        fh.write("</osm>\n")


def random_nodes(rng: random.Random, count: int, untagged_fraction=0.4,
                 lat_range=(-85.0, 85.0), lon_range=(-179.0, 179.0)):
    """Return (nodes, expected) with generator-side bookkeeping."""
    nodes = []
    expected = {"nodes": count, "tagged": 0, "entities": 0}
    node_id = 0
    for _ in range(count):
        node_id += rng.randint(1, 50)
        lat = round(rng.uniform(*lat_range), 7)
        lon = round(rng.uniform(*lon_range), 7)
        tags = []
        if rng.random() >= untagged_fraction:
            has_class = rng.random() < 0.7
            if has_class:
                tags.append(rng.choice(CLASS_TAGS))
            for key in rng.sample(PROPERTY_KEYS, rng.randint(0, 2)):
                tags.append((key, str(rng.randint(1, 999))))
            if rng.random() < 0.5:
                tags.append(("name", rng.choice(NAMES) + f" {node_id}"))
            if not tags:
                tags.append(("note", "empty"))
            expected["tagged"] += 1
            if has_class:
                expected["entities"] += 1
        nodes.append((node_id, lat, lon, tags))
    return nodes, expected


def write_big_osm(path, count, seed=20240601):
    """Stream a large corpus to disk; returns generator-side expected counts."""
    rng = random.Random(seed)
    expected = {"nodes": count, "tagged": 0, "entities": 0}
    node_id = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('<?xml version="1.0" encoding="UTF-8"?>\n<osm version="0.6">\n')
        for _ in range(count):
            node_id += rng.randint(1, 9)
            lat = round(rng.uniform(-85.0, 85.0), 7)
            lon = round(rng.uniform(-179.0, 179.0), 7)
            tags = []
            roll = rng.random()
            if roll >= 0.4:
                if roll < 0.8:  # class-bearing
                    tags.append(rng.choice(CLASS_TAGS))
                    expected["entities"] += 1
                else:
                    tags.append(("note", "placeholder"))
                if roll > 0.6:
                    tags.append(("ele", str(rng.randint(0, 4000))))
                expected["tagged"] += 1
            fh.write(node_xml(node_id, lat, lon, tags))
        fh.write("</osm>\n")
    return expected
