from __future__ import annotations

import time
from contextlib import contextmanager

import pytest

from descent_kit.corpus import Options, load_corpus, run_check
from descent_kit.fields import FieldAutomorphism, FieldTower


@pytest.fixture(scope="session")
def corpus():
    return {f.id: f for f in load_corpus()}


@pytest.fixture(scope="session")
def Q():
    return FieldTower("Q")


@pytest.fixture(scope="session")
def Qi():
    return FieldTower("Q", (), [("i", "i^2 + 1")], name="Q(i)")


@pytest.fixture(scope="session")
def Qz():
    return FieldTower("Q", (), [("w", "w^2 + w + 1")], name="Q(zeta3)")


@pytest.fixture(scope="session")
def conj(Qi):
    return FieldAutomorphism(Qi, {"i": -Qi.gen("i")})


@pytest.fixture(scope="session")
def zconj(Qz):
    w = Qz.gen("w")
    return FieldAutomorphism(Qz, {"w": w * w})


@pytest.fixture
def check():
    """Run one declared check and return its report."""

    def run(fx, name, **opts):
        return run_check(fx, name, Options(**opts))

    return run


@contextmanager
def within(seconds: float):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.2f}s, limit {seconds}s"


@pytest.fixture
def budget():
    return within
