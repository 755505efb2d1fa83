import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from confound_quant.dsl import parse_dag

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def pytest_addoption(parser):
    parser.addoption(
        "--regen-golden",
        action="store_true",
        default=False,
        help="rewrite the golden CLI output files instead of checking them",
    )


@pytest.fixture(scope="session")
def artwork_dag():
    return parse_dag((FIXTURES / "artist_artwork.dag").read_text())


@pytest.fixture(scope="session")
def latent_artwork_dag():
    return parse_dag((FIXTURES / "artist_artwork_latent.dag").read_text())


@pytest.fixture(scope="session")
def pair_dag():
    return parse_dag((FIXTURES / "confounded_pair.dag").read_text())


@pytest.fixture(scope="session")
def pair_model_text():
    return (FIXTURES / "confounded_pair.model").read_text()


@pytest.fixture(scope="session")
def sample_records_path():
    return FIXTURES / "sample.jsonl"
