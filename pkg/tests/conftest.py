from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import BruteShift, rep_words  # noqa: E402

from gammalg.shift_kernel import SubshiftSpec, compile_spec  # noqa: E402

DATA = Path(__file__).parent / "data"

CORPUS = ["full2", "golden_mean", "even", "forbidden10"]


def spec_of(name: str) -> SubshiftSpec:
    return SubshiftSpec.from_dict(json.loads((DATA / f"{name}.json").read_text()))


def aut_of(name: str):
    return compile_spec(spec_of(name))


class Shift:
    """A corpus shift with its compiled automaton and brute-force oracle."""

    def __init__(self, name: str):
        self.name = name
        self.spec = spec_of(name)
        self.aut = compile_spec(self.spec)
        self.brute = BruteShift(self.spec)
        self.reps = rep_words(self.aut)

    def __repr__(self):
        return f"Shift({self.name})"


_cache: dict[str, Shift] = {}


def shift(name: str) -> Shift:
    if name not in _cache:
        _cache[name] = Shift(name)
    return _cache[name]


@pytest.fixture(params=CORPUS)
def corpus(request) -> Shift:
    return shift(request.param)


@pytest.fixture
def full2() -> Shift:
    return shift("full2")


@pytest.fixture
def golden() -> Shift:
    return shift("golden_mean")


@pytest.fixture
def even() -> Shift:
    return shift("even")


@pytest.fixture
def f10() -> Shift:
    return shift("forbidden10")
