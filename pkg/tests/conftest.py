from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from apirec.corpus import Corpus, Declaration, Project, load_snippets, parse_facts

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def tiny_facts_path() -> Path:
    return FIXTURES / "tiny.facts"


@pytest.fixture(scope="session")
def tiny_snippets_path() -> Path:
    return FIXTURES / "tiny.snippets"


@pytest.fixture(scope="session")
def tiny_corpus(tiny_facts_path: Path, tiny_snippets_path: Path) -> Corpus:
    with tiny_facts_path.open("rb") as fp:
        corpus = parse_facts(fp)
    with tiny_snippets_path.open("rb") as fp:
        return corpus.with_snippets(load_snippets(fp))


def build_toy_corpus() -> Corpus:
    """Three projects, four declarations and four invocations each: the
    worked example where pa's fourth declaration knows i3 and i4 and the
    engine must score i1 and i2.

    pa: d1={i1,i4} d2={i3,i4} d3={i3,i4} da={i3,i4}   (all four invoke i4)
    p1: d1={i1,i2,i4} d2={i1,i3,i4} d3={i3,i4} d4={i3,i4}
    p2: d1={i2,i4} d2={i3,i4} d3={i3,i4} d4={i4}
    """

    def decl(name: str, *invs: str) -> Declaration:
        return Declaration(name=name, invocations=invs)

    pa = Project(
        id="pa",
        declarations=(
            decl("d1", "i1", "i4"),
            decl("d2", "i3", "i4"),
            decl("d3", "i3", "i4"),
            decl("da", "i3", "i4"),
        ),
    )
    p1 = Project(
        id="p1",
        declarations=(
            decl("d1", "i1", "i2", "i4"),
            decl("d2", "i1", "i3", "i4"),
            decl("d3", "i3", "i4"),
            decl("d4", "i3", "i4"),
        ),
    )
    p2 = Project(
        id="p2",
        declarations=(
            decl("d1", "i2", "i4"),
            decl("d2", "i3", "i4"),
            decl("d3", "i3", "i4"),
            decl("d4", "i4"),
        ),
    )
    return Corpus.build([pa, p1, p2])


@pytest.fixture()
def toy_corpus() -> Corpus:
    return build_toy_corpus()
