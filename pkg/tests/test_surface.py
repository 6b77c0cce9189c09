import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kbmspec.errors import HypothesisViolation, InvalidInputError
from kbmspec.surface import (
    NonDecayingBoundWarning,
    SectionCoefficients,
    SurfaceData,
    build_registry,
    discrete_multiplicity,
    equilibrium_distance_bound,
    equilibrium_expansion,
    gamma_threshold,
    sample_surface,
    tail_norm,
)


def multiplicities(reg):
    out = {}
    for e in reg.entries:
        if e.rep.is_discrete:
            out[(type(e.rep.kind).__name__, e.rep.kind.n)] = e.multiplicity
    return out


def test_genus2_registry():
    reg = build_registry(SurfaceData(2, [(0.0, 1)]), 10.0, 3)
    m = multiplicities(reg)
    for chir in ("DiscreteHolomorphic", "DiscreteAntiHolomorphic"):
        assert [m[(chir, n)] for n in (1, 2, 3)] == [2, 3, 5]
    trivial = [e for e in reg.entries if e.rep.is_trivial]
    assert len(trivial) == 1 and trivial[0].multiplicity == 1
    assert len(reg.entries) == 7


@pytest.mark.parametrize("genus", [2, 3, 5])
@pytest.mark.parametrize("n_max", [1, 4, 6])
def test_multiplicity_formulas(genus, n_max):
    reg = build_registry(SurfaceData(genus, [(0.0, 1)]), 1.0, n_max)
    m = multiplicities(reg)
    assert m[("DiscreteHolomorphic", 1)] == genus
    for n in range(2, n_max + 1):
        assert m[("DiscreteHolomorphic", n)] == (2 * n - 1) * (genus - 1)
        assert m[("DiscreteAntiHolomorphic", n)] == m[("DiscreteHolomorphic", n)]
        assert discrete_multiplicity(genus, n) == (2 * n - 1) * (genus - 1)


def test_genus3_values():
    m = multiplicities(build_registry(SurfaceData(3, [(0.0, 1)]), 1.0, 3))
    assert [m[("DiscreteHolomorphic", n)] for n in (1, 2, 3)] == [3, 6, 10]


def test_complementary_entry():
    reg = build_registry(SurfaceData(2, [(0.0, 1), (0.2, 1)]), 1.0, 0)
    (e,) = [e for e in reg.entries if e.rep.is_continuous]
    assert e.rep.kind.s == pytest.approx(math.sqrt(0.2)) and e.multiplicity == 1
    assert e.rep.casimir == pytest.approx(0.8)


def test_eta_max_zero():
    reg = build_registry(sample_surface(), 0.0, 2)
    assert all(not e.rep.is_continuous for e in reg.entries)


def test_continuous_multiplicities_follow_input():
    surf = sample_surface()
    reg = build_registry(surf, 100.0, 0)
    got = [(e.eta, e.multiplicity) for e in reg.entries if e.rep.is_continuous]
    assert got == [tuple(p) for p in surf.laplace_spectrum[1:]]
    for e in reg.entries:
        if e.rep.is_continuous:
            assert e.rep.casimir == pytest.approx(4 * e.eta)


@pytest.mark.parametrize("spectrum", [[(0.2, 1)], [(0.0, 1), (0.5, 1), (0.3, 1)], [(0.0, 2)], []])
def test_bad_spectrum(spectrum):
    with pytest.raises(InvalidInputError):
        SurfaceData(2, spectrum)


def test_bad_genus():
    with pytest.raises(InvalidInputError):
        SurfaceData(1, [(0.0, 1)])


def test_surface_json_round_trip(tmp_path):
    surf = sample_surface()
    p = tmp_path / "s.json"
    import json
    p.write_text(json.dumps(surf.to_dict()))
    again = SurfaceData.load(p)
    assert again.genus == surf.genus and list(again.laplace_spectrum) == list(surf.laplace_spectrum)
    assert surf.spectral_gap == 0.2


def random_section(reg, rng, C, kspan=3):
    items = {}
    for e, ent in enumerate(reg.entries):
        for c in range(ent.multiplicity):
            if ent.rep.is_trivial:
                ks = [0]
            elif ent.rep.is_continuous:
                ks = range(-kspan, kspan + 1)
            elif ent.rep.kmin is not None:
                ks = range(ent.rep.kmin, ent.rep.kmin + kspan)
            else:
                ks = range(ent.rep.kmax - kspan + 1, ent.rep.kmax + 1)
            for k in ks:
                items[(e, c, k)] = complex(rng.normal(), rng.normal())
    f = SectionCoefficients(items)
    scale = 0.99 * C / f.sobolev_norm(reg)
    return SectionCoefficients({k: v * scale for k, v in f.items()})


def test_parseval_and_blocks(rng):
    reg = build_registry(sample_surface(), 10.0, 2)
    f = random_section(reg, rng, 1.0)
    blocks = f.blocks()
    total = sum(abs(v) ** 2 for b in blocks.values() for v in b.values())
    assert f.norm() ** 2 == pytest.approx(total, rel=1e-14)
    assert len(blocks) == sum(e.multiplicity for e in reg.entries)


def test_section_validation():
    reg = build_registry(sample_surface(), 10.0, 2)
    with pytest.raises(InvalidInputError):
        SectionCoefficients({(0, 1, 0): 1.0}).validate(reg)
    disc = next(i for i, e in enumerate(reg.entries) if e.rep.is_discrete)
    with pytest.raises(InvalidInputError):
        SectionCoefficients({(disc, 0, 0): 1.0}).validate(reg)
    with pytest.raises(InvalidInputError):
        SectionCoefficients({(99, 0, 0): 1.0}).validate(reg)


def test_section_json_round_trip():
    f = SectionCoefficients({(1, 0, -2): 0.5 - 1j, (0, 0, 0): 2.0})
    assert dict(SectionCoefficients.from_json(f.to_json())) == dict(f)
    with pytest.raises(InvalidInputError):
        SectionCoefficients.from_json([{"entry": 0}])


def test_trivial_only_section():
    reg = build_registry(sample_surface(), 10.0, 2)
    f = SectionCoefficients({(0, 0, 0): 0.7})
    r = equilibrium_expansion(reg, f, 40.0, 1.0, 0.1, 1.0)
    assert dict(r.approximation) == dict(f)
    assert r.actual_residual == 0.0


def test_residual_bound_arithmetic():
    reg = build_registry(SurfaceData(2, [(0.0, 1), (0.25, 1)]), 10.0, 1)
    f = SectionCoefficients({(0, 0, 0): 1.0})
    r = equilibrium_expansion(reg, f, 40.0, 1.0, 0.1, 1.0)
    assert r.residual_bound == pytest.approx(0.1 + 8 / 1600 * math.exp(-400), rel=1e-15)


def test_single_principal_entry():
    from kbmspec.perturbation import kbm_eigenvalue
    reg = build_registry(SurfaceData(2, [(0.0, 1), (0.25, 1)]), 10.0, 0)
    f = SectionCoefficients({(1, 0, 0): 0.5})
    r = equilibrium_expansion(reg, f, 100.0, 1.0, 0.5, 1.0)
    lam = r.eigenvalues[1]
    assert lam == pytest.approx(0.25, abs=0.01)
    assert lam == pytest.approx(kbm_eigenvalue(reg[1].rep, 100.0), abs=1e-10)
    assert r.approximation[(1, 0, 0)] == pytest.approx(0.5 * math.exp(-lam), abs=1e-3)
    assert r.actual_residual <= r.residual_bound


@settings(max_examples=6, deadline=None)
@given(seed=st.integers(0, 2 ** 31), fac=st.sampled_from([1.1, 2.0]), t=st.sampled_from([0.5, 1.0, 4.0]))
def test_equilibrium_residual_property(seed, fac, t):
    reg = build_registry(sample_surface(), 10.0, 3)
    C, eps = 1.0, 0.5
    f = random_section(reg, np.random.default_rng(seed), C)
    r = equilibrium_expansion(reg, f, fac * gamma_threshold(C, eps), t, eps, C)
    assert r.actual_residual <= r.residual_bound


def test_tail_is_small(rng):
    reg = build_registry(sample_surface(), 10.0, 2)
    C, eps = 1.0, 0.2
    f = random_section(reg, rng, C)
    assert tail_norm(reg, f, C / eps) <= eps


def test_equilibrium_hypotheses(rng):
    reg = build_registry(sample_surface(), 10.0, 1)
    f = random_section(reg, rng, 1.0)
    with pytest.raises(HypothesisViolation):
        equilibrium_expansion(reg, f, 10.0, 1.0, 0.5, 1.0)
    with pytest.raises(HypothesisViolation):
        equilibrium_expansion(reg, f, 100.0, 1.0, 0.5, 0.5)


def test_distance_bound_example():
    surf = SurfaceData(2, [(0.0, 1), (0.25, 1)])
    b = equilibrium_distance_bound(surf, 1.0, 0.1, 8.0, 1e6, 10.0, 1.0, 1.0)
    assert b == pytest.approx(0.1 + 10 * math.exp(-1.25), abs=1e-12)
    assert b == pytest.approx(2.965, abs=1e-3)
    late = equilibrium_distance_bound(surf, 1.0, 0.1, 8.0, 1e6, 1e4, 1.0, 1.0)
    assert late == pytest.approx(0.1, abs=1e-12)


def test_distance_bound_warns_and_rejects():
    surf = SurfaceData(2, [(0.0, 1), (0.25, 1)])
    with pytest.warns(NonDecayingBoundWarning):
        equilibrium_distance_bound(surf, 1.0, 0.1, 2.0, 1e6, 10.0, 1.0, 1.0)
    with pytest.raises(HypothesisViolation):
        equilibrium_distance_bound(surf, 1.0, 0.1, 8.0, 100.0, 10.0, 1.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        equilibrium_distance_bound(surf, 1.0, 0.1, 8.0, 1e6, 10.0, 1.0, 1.0)
