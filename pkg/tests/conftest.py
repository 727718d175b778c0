import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
REPO_ROOT = TESTS_DIR.parent
DATA_DIR = REPO_ROOT / "data"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def features_path() -> Path:
    return DATA_DIR / "map_features.tsv"


@pytest.fixture(scope="session")
def alignments_path() -> Path:
    return DATA_DIR / "alignments.tsv"


@pytest.fixture(scope="session")
def ontology(features_path, alignments_path):
    from osmkg.alignment import attach_equivalences, load_alignments
    from osmkg.ontology import build_ontology, load_map_features

    onto = build_ontology(load_map_features(features_path))
    return attach_equivalences(onto, load_alignments(alignments_path))


@pytest.fixture(scope="session")
def ontology_ttl(ontology) -> str:
    from osmkg.ontology import serialize_ontology

    return serialize_ontology(ontology)


@pytest.fixture(scope="session")
def berlin_build(tmp_path_factory, features_path, alignments_path):
    """(kg_path, ontology_path, report) for the Berlin fixture."""
    from osmkg.kg_builder import run_pipeline

    out = tmp_path_factory.mktemp("berlin")
    kg_path = out / "kg.ttl"
    onto_path = out / "ontology.ttl"
    report = run_pipeline(DATA_DIR / "berlin.osm", features_path, alignments_path,
                          kg_path, onto_path)
    return kg_path, onto_path, report


@pytest.fixture(scope="session")
def berlin_store(berlin_build):
    from osmkg.geo_query import load_store

    kg_path, onto_path, _ = berlin_build
    return load_store(kg_path.read_text(encoding="utf-8"),
                      onto_path.read_text(encoding="utf-8"))
