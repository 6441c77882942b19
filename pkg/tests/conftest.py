import pytest

from kgchat.kg import Graph
from kgchat.nlu.segmentation import RuleTables
from kgchat.nlu.suite import NluSuite
from kgchat.pipeline import DEFAULT_DATA_DIR, Engine
from kgchat.templates import (
    PatternIndex,
    StructureRegistry,
    generate_da_patterns,
    load_da_lexicon,
)

DATA_DIR = DEFAULT_DATA_DIR


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture()
def graph(tmp_path):
    return Graph.load(DATA_DIR, store_dir=tmp_path)


@pytest.fixture(scope="session")
def structures():
    return StructureRegistry.load(DATA_DIR / "structures.json")


@pytest.fixture(scope="session")
def rules():
    return RuleTables.load(DATA_DIR)


@pytest.fixture()
def index(graph, structures):
    patterns = generate_da_patterns(graph, structures)
    return PatternIndex(patterns, load_da_lexicon(DATA_DIR / "da_lexicon.txt"))


@pytest.fixture()
def suite(graph, index, rules):
    return NluSuite(graph, index, rules)


@pytest.fixture()
def engine(tmp_path):
    return Engine(store_dir=tmp_path)
