import pytest

from feature_extractor import load_manifest, train_and_extract

from imagetree import build_tree


@pytest.fixture(scope="session")
def toy_manifest(tmp_path_factory):
    return build_tree(tmp_path_factory.mktemp("toy"))


@pytest.fixture(scope="session")
def extraction(toy_manifest):
    """One full run on the toy manifest, shared across tests."""
    out, log = train_and_extract(load_manifest(toy_manifest), pretrained=False)
    return out, log
