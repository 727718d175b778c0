import io
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

import gen_kg
import turtle_oracle
from oracles import canonical_from_oracle

from osmkg.errors import OsmXmlError
from osmkg.kg_builder import (
    Entity,
    build_kg,
    entity_to_triples,
    node_to_entity,
    run_pipeline,
    serialize_kg,
)
from osmkg.osm_corpus import OsmNode, Tag, parse_osm_xml


def make_node(node_id, tags, lat=47.0, lon=10.0):
    return OsmNode(node_id, lat, lon, tuple(Tag(k, v) for k, v in tags))


class TestNodeToEntity:
    def test_zugspitze_mapping(self, ontology):
        node = make_node(27384190, [("name", "Zugspitze"), ("natural", "peak"),
                                    ("summit:cross", "yes"), ("ele", "2962")],
                         lat=47.4210641, lon=10.9853074)
        entity = node_to_entity(node, ontology)
        assert entity == Entity(
            wkg_id=27384190,
            types=("Peak",),
            properties=(("ele", "2962"), ("summitCross", "yes")),
            label="Zugspitze",
            point=(10.9853074, 47.4210641),
        )

    def test_building_yes_types_top_level(self, ontology):
        entity = node_to_entity(make_node(1, [("building", "yes")]), ontology)
        assert entity.types == ("Building",)
        assert entity.label is None and entity.properties == ()

    def test_no_class_bearing_tag_gives_nothing(self, ontology):
        assert node_to_entity(make_node(1, [("note", "fixme")]), ontology) is None
        assert node_to_entity(make_node(2, [("name", "x"), ("ele", "5")]), ontology) is None

    def test_multiple_class_tags_assert_all_types(self, ontology):
        entity = node_to_entity(
            make_node(3, [("building", "yes"), ("amenity", "restaurant")]), ontology)
        assert entity.types == ("Building", "Restaurant")

    def test_unmapped_tags_dropped_silently(self, ontology):
        entity = node_to_entity(
            make_node(4, [("natural", "peak"), ("operator", "club"), ("fixme", "y")]),
            ontology)
        assert entity.types == ("Peak",)
        assert entity.properties == ()


class TestEntityToTriples:
    def test_minimal_entity_has_exactly_five_triples(self):
        entity = Entity(5, ("Peak",), (), None, (10.0, 47.0))
        triples = entity_to_triples(entity)
        assert len(triples) == 5
        assert [t.predicate for t in triples] == [
            "rdf:type", "wkgs:spatialObject", "wkgs:osmLink", "rdf:type", "geo:asWKT"]

    def test_wkt_is_longitude_first(self):
        entity = Entity(5, ("Peak",), (), None, (10.5, 47.25))
        wkt = entity_to_triples(entity)[-1].obj
        assert wkt.text == "Point(10.5 47.25)"
        assert wkt.datatype == "geo:wktLiteral"

    def test_triple_count_formula_on_random_entities(self):
        rng = random.Random(11)
        for entity in gen_kg.random_entities(rng, 50):
            expected = (len(entity.types) + len(entity.properties)
                        + (1 if entity.label is not None else 0) + 4)
            assert len(entity_to_triples(entity)) == expected


class TestSerializeKg:
    def test_round_trip_small(self):
        rng = random.Random(23)
        entities = gen_kg.random_entities(rng, 40)
        triples = [t for e in entities for t in entity_to_triples(e)]
        doc = serialize_kg(triples)
        got = canonical_from_oracle(turtle_oracle.parse(doc))
        expected = Counter(t for e in entities
                           for t in gen_kg.expected_canonical_triples(e))
        assert got == expected

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31))
    def test_round_trip_property(self, seed):
        entities = gen_kg.random_entities(random.Random(seed), 8)
        triples = [t for e in entities for t in entity_to_triples(e)]
        doc = serialize_kg(triples)
        got = canonical_from_oracle(turtle_oracle.parse(doc))
        expected = Counter(t for e in entities
                           for t in gen_kg.expected_canonical_triples(e))
        assert got == expected

    def test_byte_determinism_under_triple_reordering(self):
        entities = gen_kg.random_entities(random.Random(5), 20)
        triples = [t for e in entities for t in entity_to_triples(e)]
        shuffled = triples[:]
        random.Random(9).shuffle(shuffled)
        assert serialize_kg(triples) == serialize_kg(shuffled)

    def test_subjects_ordered_by_id_entity_before_geometry(self):
        entities = gen_kg.random_entities(random.Random(3), 10)
        triples = [t for e in entities for t in entity_to_triples(e)]
        doc = serialize_kg(triples)
        subject_lines = [line.split(" ", 1)[0] for line in doc.splitlines()
                         if line.startswith("wkg:")]
        expected = []
        for e in sorted(entities, key=lambda e: e.wkg_id):
            expected += [f"wkg:{e.wkg_id}", f"wkg:geo{e.wkg_id}"]
        assert subject_lines == expected


class TestBuildKg:
    def test_streamed_file_equals_materialized_serialization(self, tmp_path, ontology,
                                                             data_dir):
        out = tmp_path / "kg.ttl"
        report = build_kg(parse_osm_xml(data_dir / "berlin.osm"), ontology, out)
        entities = [node_to_entity(n, ontology)
                    for n in parse_osm_xml(data_dir / "berlin.osm") if n.tags]
        triples = [t for e in entities if e is not None for t in entity_to_triples(e)]
        assert out.read_text(encoding="utf-8") == serialize_kg(triples)
        assert report.triples_emitted == len(triples)

    def test_berlin_report_counts(self, berlin_build):
        _, _, report = berlin_build
        assert report.nodes_read == 9
        assert report.nodes_tagged == 8
        assert report.entities_emitted == 7
        assert report.tags_dropped == 1  # the note=fixme node
        assert (report.entities_emitted <= report.nodes_tagged <= report.nodes_read)

    def test_every_type_and_predicate_declared(self, berlin_build):
        kg_path, onto_path, _ = berlin_build
        kg = turtle_oracle.parse(kg_path.read_text(encoding="utf-8"))
        onto = turtle_oracle.parse(onto_path.read_text(encoding="utf-8"))
        declared_classes = {t[0] for t in onto
                            if t[1] == gen_kg.RDFS_LABEL.replace("label", "subClassOf")}
        declared_props = {t[0] for t in onto
                          if t[2] == ("iri", gen_kg.WKGS + "WKGProperty")}
        sf_point = gen_kg.SF + "Point"
        for s, p, o in kg:
            if p == gen_kg.RDF_TYPE and o[1] != sf_point:
                assert o[1] in declared_classes
            if p.startswith(gen_kg.WKGS):
                if p in (gen_kg.WKGS + "spatialObject", gen_kg.WKGS + "osmLink"):
                    continue
                assert p in declared_props

    def test_exactly_one_geometry_per_entity(self, berlin_build):
        kg_path, _, report = berlin_build
        kg = turtle_oracle.parse(kg_path.read_text(encoding="utf-8"))
        spatial = [t for t in kg if t[1] == gen_kg.WKGS + "spatialObject"]
        assert len(spatial) == report.entities_emitted
        assert len({t[2] for t in spatial}) == len(spatial)
        for s, p, (kind, geo_iri) in spatial:
            assert geo_iri == s.replace(gen_kg.WKG, gen_kg.WKG + "geo")

    def test_partial_output_removed_on_parse_failure(self, tmp_path, ontology):
        bad = io.BytesIO(
            b'<?xml version="1.0"?><osm>'
            b'<node id="1" lat="0" lon="0"><tag k="natural" v="peak"/></node>'
            b'<node id="2" lat="999" lon="0"/></osm>')
        out = tmp_path / "kg.ttl"
        with pytest.raises(OsmXmlError):
            build_kg(parse_osm_xml(bad), ontology, out)
        assert not out.exists()


class TestRunPipeline:
    def test_two_poi_fixture(self, tmp_path, data_dir, features_path, alignments_path):
        kg_out = tmp_path / "kg.ttl"
        onto_out = tmp_path / "ontology.ttl"
        report = run_pipeline(data_dir / "two_pois.osm", features_path,
                              alignments_path, kg_out, onto_out)
        assert report.entities_emitted == 2
        # independent triple-count oracle: sum over entities of
        # |types| + |properties| + [label] + 4
        assert report.triples_emitted == (1 + 2 + 1 + 4) + (1 + 9 + 1 + 4)
        assert kg_out.exists() and onto_out.exists()

    def test_zero_tagged_input(self, tmp_path, features_path, alignments_path):
        osm = tmp_path / "plain.osm"
        osm.write_text('<?xml version="1.0"?><osm>'
                       '<node id="1" lat="0" lon="0"/></osm>')
        kg_out = tmp_path / "kg.ttl"
        report = run_pipeline(osm, features_path, alignments_path, kg_out)
        assert report.entities_emitted == 0
        text = kg_out.read_text(encoding="utf-8")
        assert turtle_oracle.parse(text) == []
        assert text.startswith("@prefix")

    def test_identical_inputs_identical_bytes(self, tmp_path, data_dir,
                                              features_path, alignments_path):
        out_a = tmp_path / "a.ttl"
        out_b = tmp_path / "b.ttl"
        run_pipeline(data_dir / "berlin.osm", features_path, alignments_path, out_a)
        run_pipeline(data_dir / "berlin.osm", features_path, alignments_path, out_b)
        assert out_a.read_bytes() == out_b.read_bytes()
