import pathlib

import pytest

from pathinv.frontend.parser import parse_program
from pathinv.smt import Solver, discover_solver

REPO = pathlib.Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"
LLM_CORPUS = CORPUS / "llm"
TRANSCRIPTS = LLM_CORPUS / "transcripts.json"


def corpus_files():
    return sorted(CORPUS.glob("*.mc"))


def llm_corpus_files():
    return sorted(LLM_CORPUS.glob("*.mc"))


def load(path):
    text = path.read_text()
    return parse_program(text), text


@pytest.fixture(scope="session")
def solver():
    return Solver(discover_solver())


@pytest.fixture()
def fresh_solver():
    return Solver(discover_solver())
