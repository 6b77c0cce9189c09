import numpy as np
import pytest

from kbmspec.rep_core import (
    Complementary,
    DiscreteAntiHolomorphic,
    DiscreteHolomorphic,
    Principal,
    make_representation,
)


def principal(s):
    return make_representation(Principal(s))


def complementary(s):
    return make_representation(Complementary(s))


def holo(n):
    return make_representation(DiscreteHolomorphic(n))


def antiholo(n):
    return make_representation(DiscreteAntiHolomorphic(n))


def rep_with_casimir(lam):
    """Representation with the given Casimir among the values used in tests."""
    if lam >= 1:
        return principal(np.sqrt(lam - 1))
    if lam > 0:
        return complementary(np.sqrt(1 - lam))
    n = int(round((1 + np.sqrt(1 - lam)) / 2))
    return holo(n)


def random_unit(rng, n, count=None):
    shape = (n,) if count is None else (n, count)
    u = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return u / np.linalg.norm(u, axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {name}: {detail}")
