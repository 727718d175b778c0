import pytest

import turtle_oracle
from oracles import expand_curie

from osmkg.alignment import AlignmentMapping, attach_equivalences, load_alignments
from osmkg.errors import AlignmentError
from osmkg.ontology import build_ontology, load_map_features, serialize_ontology


def test_fixture_rows_load(alignments_path):
    mappings = load_alignments(alignments_path)
    assert len(mappings) == 16
    peak = next(m for m in mappings if m.osm_value == "peak")
    assert peak == AlignmentMapping("natural", "peak", "wikidata", "Q8502", "mountain")
    assert {m.target_graph for m in mappings} == {"wikidata", "dbpedia"}


def test_header_only_file_gives_empty_set(tmp_path):
    path = tmp_path / "empty.tsv"
    path.write_text("key\tvalue\ttarget\tclass_id\tlabel\n")
    assert load_alignments(path) == []


def test_duplicate_mapping_reports_row(tmp_path):
    path = tmp_path / "dup.tsv"
    path.write_text("key\tvalue\ttarget\tclass_id\tlabel\n"
                    "natural\tpeak\twikidata\tQ8502\tmountain\n"
                    "natural\tpeak\twikidata\tQ999\tother\n")
    with pytest.raises(AlignmentError, match="3"):
        load_alignments(path)


def test_unknown_target_graph_rejected(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("key\tvalue\ttarget\tclass_id\tlabel\n"
                    "natural\tpeak\tyago\tQ8502\tmountain\n")
    with pytest.raises(AlignmentError, match="yago"):
        load_alignments(path)


def test_attach_adds_exactly_the_given_equivalences(features_path, alignments_path):
    onto = build_ontology(load_map_features(features_path))
    assert all(not c.equivalents for c in onto.classes.values())
    linked = attach_equivalences(onto, load_alignments(alignments_path))
    assert linked.classes["Peak"].equivalents == frozenset({("wikidata", "Q8502")})
    assert linked.classes["AmenitySchool"].equivalents == frozenset({("dbpedia", "School")})
    total = sum(len(c.equivalents) for c in linked.classes.values())
    assert total == 16
    # everything else unchanged
    assert set(linked.classes) == set(onto.classes)
    assert linked.properties == onto.properties


def test_attach_empty_set_is_identity(ontology):
    assert attach_equivalences(ontology, []) == ontology


def test_attach_is_idempotent(features_path, alignments_path):
    onto = build_ontology(load_map_features(features_path))
    mappings = load_alignments(alignments_path)
    once = attach_equivalences(onto, mappings)
    twice = attach_equivalences(once, mappings)
    assert once == twice


def test_unresolvable_mappings_all_reported(ontology):
    bad = [AlignmentMapping("natural", "gorge", "wikidata", "Q1", None),
           AlignmentMapping("nosuchkey", "x", "dbpedia", "Thing", None)]
    with pytest.raises(AlignmentError) as err:
        attach_equivalences(ontology, bad)
    message = str(err.value)
    assert "natural=gorge" in message and "nosuchkey=x" in message


def test_equivalence_triples_count_via_independent_parser(ontology_ttl):
    triples = turtle_oracle.parse(ontology_ttl)
    equiv = expand_curie("owl:equivalentClass")
    links = [t for t in triples if t[1] == equiv]
    assert len(links) == 16
    subjects = {t[0] for t in links}
    declared = {t[0] for t in triples if t[1] == expand_curie("rdfs:subClassOf")}
    assert subjects <= declared


def test_multiple_targets_per_class_allowed(features_path):
    onto = build_ontology(load_map_features(features_path))
    linked = attach_equivalences(onto, [
        AlignmentMapping("natural", "peak", "wikidata", "Q8502", None),
        AlignmentMapping("natural", "peak", "wikidata", "Q000", None),
    ])
    assert linked.classes["Peak"].equivalents == frozenset(
        {("wikidata", "Q8502"), ("wikidata", "Q000")})
