from pathlib import Path

import pytest

from ndmall.sequent import desequentialize, parse_proof
from ndmall.structure import parse_structure

CORPUS = Path(__file__).parent / "corpus"
PROOF_FILES = sorted((CORPUS / "proofs").glob("*.proof"))
NONNET_FILES = sorted((CORPUS / "nonnets").glob("*.net"))
NET_FILES = sorted((CORPUS / "nets").glob("*.net"))
MACHINE_FILES = sorted((CORPUS / "machines").glob("*.tm"))


def load_proof(path):
    return parse_proof(Path(path).read_text())


def load_structure(path):
    return parse_structure(Path(path).read_text())


def corpus_nets():
    """(name, structure) for every desequentialized proof and every stored net."""
    out = [(p.stem, desequentialize(load_proof(p))) for p in PROOF_FILES]
    out += [(p.stem, load_structure(p)) for p in NET_FILES]
    return out


def corpus_structures():
    return corpus_nets() + [(p.stem, load_structure(p)) for p in NONNET_FILES]


@pytest.fixture
def corpus():
    return CORPUS
