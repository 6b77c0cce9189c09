"""Decomposition of L^2 of the unit tangent bundle and the equilibrium expansion.

The Laplace spectrum of the surface is input data.  Each positive
eigenvalue ``eta`` contributes a principal/complementary series with
Casimir ``4 eta`` and the eigenvalue's multiplicity; discrete series
``n`` occur ``g`` times for ``n = 1`` and ``(2n - 1)(g - 1)`` times for
``n >= 2``, each chirality; the trivial representation occurs once.

On a copy of a representation, ``exp(-t P_gamma)`` acts as
``exp(-(t gamma^2 / 2) T(x))`` with ``x = -2/gamma`` since
``P_gamma = -gamma X + (gamma^2/2) Delta_S = (gamma^2/2) T(-2/gamma)``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import HypothesisViolation, InvalidInputError
from .perturbation import rep_for_eta
from .rep_core import (
    DiscreteAntiHolomorphic,
    DiscreteHolomorphic,
    RepresentationModel,
    TruncationWindow,
    Trivial,
    default_window,
    make_representation,
    sobolev_weight,
)
from .semigroup import propagator_matrix
from .spectral import choose_truncation, low_eigenvalue, riesz_projection

DISCRETE_N_MAX = 8
SQRT32 = math.sqrt(32.0)


class NonDecayingBoundWarning(UserWarning):
    """``B <= 1/eta_1``: the equilibrium bound does not decay in t."""


@dataclass(frozen=True)
class SurfaceData:
    genus: int
    laplace_spectrum: tuple[tuple[float, int], ...]

    def __post_init__(self):
        if isinstance(self.genus, bool) or int(self.genus) != self.genus or self.genus < 2:
            raise InvalidInputError(f"genus must be an integer >= 2, got {self.genus!r}")
        spec = tuple((float(e), int(m)) for e, m in self.laplace_spectrum)
        object.__setattr__(self, "laplace_spectrum", spec)
        if not spec or spec[0] != (0.0, 1):
            raise InvalidInputError("Laplace spectrum must start with (0, 1)")
        for (e0, _), (e1, _) in zip(spec, spec[1:]):
            if not e1 > e0:
                raise InvalidInputError(f"Laplace eigenvalues must be strictly increasing ({e0} then {e1})")
        for e, m in spec:
            if m < 1 or e < 0 or not math.isfinite(e):
                raise InvalidInputError(f"bad spectrum entry ({e}, {m})")

    @property
    def spectral_gap(self) -> float:
        if len(self.laplace_spectrum) < 2:
            raise InvalidInputError("spectrum has no nonzero eigenvalue")
        return self.laplace_spectrum[1][0]

    @classmethod
    def from_dict(cls, data: Mapping) -> "SurfaceData":
        try:
            return cls(data["genus"], tuple(tuple(p) for p in data["laplace_spectrum"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInputError):
                raise
            raise InvalidInputError(f"malformed surface description: {exc}") from None

    @classmethod
    def load(cls, path) -> "SurfaceData":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read surface file {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"genus": self.genus, "laplace_spectrum": [[e, m] for e, m in self.laplace_spectrum]}


def sample_surface() -> SurfaceData:
    """Bundled synthetic genus-2 spectrum (not a computed surface spectrum)."""
    text = resources.files("kbmspec").joinpath("data/synthetic_genus2.json").read_text()
    return SurfaceData.from_dict(json.loads(text))


@dataclass(frozen=True)
class RegistryEntry:
    rep: RepresentationModel
    multiplicity: int
    eta: float | None = None

    @property
    def label(self) -> str:
        return self.rep.label


@dataclass(frozen=True)
class DecompositionRegistry:
    entries: tuple[RegistryEntry, ...]
    eta_max: float
    discrete_n_max: int
    genus: int

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> RegistryEntry:
        return self.entries[i]

    def index_of(self, kind) -> int:
        for i, e in enumerate(self.entries):
            if e.rep.kind == kind:
                return i
        raise KeyError(kind)


def discrete_multiplicity(genus: int, n: int) -> int:
    return genus if n == 1 else (2 * n - 1) * (genus - 1)


def build_registry(surface: SurfaceData, eta_max: float, discrete_n_max: int = DISCRETE_N_MAX) -> DecompositionRegistry:
    """Representations occurring in L^2(SM) up to the given cutoffs.

    Order: trivial, then principal/complementary by increasing ``eta``, then
    discrete series by ``n`` (holomorphic before anti-holomorphic).
    """
    if eta_max < 0 or discrete_n_max < 0:
        raise InvalidInputError("cutoffs must be non-negative")
    entries = [RegistryEntry(make_representation(Trivial()), 1, 0.0)]
    for eta, mult in surface.laplace_spectrum[1:]:
        if eta <= eta_max:
            entries.append(RegistryEntry(rep_for_eta(eta), mult, eta))
    for n in range(1, discrete_n_max + 1):
        m = discrete_multiplicity(surface.genus, n)
        entries.append(RegistryEntry(make_representation(DiscreteHolomorphic(n)), m))
        entries.append(RegistryEntry(make_representation(DiscreteAntiHolomorphic(n)), m))
    return DecompositionRegistry(tuple(entries), float(eta_max), int(discrete_n_max), surface.genus)


# --------------------------------------------------------------------------
# sections
# --------------------------------------------------------------------------


class SectionCoefficients(Mapping):
    """Finitely supported amplitudes keyed by ``(entry, copy, k)``."""

    def __init__(self, data: Mapping | Iterable = ()):
        items = data.items() if isinstance(data, Mapping) else data
        self._data = {(int(e), int(c), int(k)): complex(v) for (e, c, k), v in items}

    def __getitem__(self, key):
        return self._data[key]

    def __iter__(self):
        return iter(sorted(self._data))

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        return f"SectionCoefficients({len(self)} terms)"

    def validate(self, registry: DecompositionRegistry) -> None:
        for e, c, k in self._data:
            if not 0 <= e < len(registry):
                raise InvalidInputError(f"entry index {e} outside registry of size {len(registry)}")
            entry = registry[e]
            if not 0 <= c < entry.multiplicity:
                raise InvalidInputError(f"copy {c} outside multiplicity {entry.multiplicity} of entry {e}")
            if not entry.rep.contains(k):
                raise InvalidInputError(f"K-type {k} not in {entry.label}")

    def blocks(self) -> dict[tuple[int, int], dict[int, complex]]:
        out: dict[tuple[int, int], dict[int, complex]] = {}
        for (e, c, k), v in sorted(self._data.items()):
            out.setdefault((e, c), {})[k] = v
        return out

    def norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self._data.values()))

    def sobolev_norm(self, registry: DecompositionRegistry, alpha: float = 2.0) -> float:
        """Root of the sum of squared per-block Sobolev norms."""
        total = 0.0
        for (e, c, k), v in self._data.items():
            total += abs(v) ** 2 * float(sobolev_weight(registry[e].rep, [k])[0]) ** alpha
        return math.sqrt(total)

    @classmethod
    def from_json(cls, records) -> "SectionCoefficients":
        try:
            return cls(((r["entry"], r["copy"], r["k"]), complex(r["re"], r["im"])) for r in records)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed section record: {exc}") from None

    @classmethod
    def load(cls, path) -> "SectionCoefficients":
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read section file {path}: {exc}") from None

    def to_json(self) -> list[dict]:
        return [{"entry": e, "copy": c, "k": k, "re": v.real, "im": v.imag}
                for (e, c, k), v in sorted(self._data.items())]


def tail_norm(registry: DecompositionRegistry, f: SectionCoefficients, cutoff: float) -> float:
    """``||f_eta||`` summed over the entries with ``eta > cutoff``."""
    sq = sum(abs(v) ** 2 for (e, _, _), v in f.items()
             if registry[e].eta is not None and registry[e].eta > cutoff)
    return math.sqrt(sq)


# --------------------------------------------------------------------------
# equilibrium expansion
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionResult:
    approximation: SectionCoefficients
    residual_bound: float
    actual_residual: float
    eigenvalues: dict[int, float]
    block_residuals: dict[tuple[int, int], float]


def gamma_threshold(C: float, epsilon: float) -> float:
    """``max(4 sqrt(4C/eps + 6), 4 sqrt(32))``."""
    return max(4.0 * math.sqrt(4.0 * C / epsilon + 6.0), 4.0 * SQRT32)


def _block_window(entry: RegistryEntry, ks, x: float) -> TruncationWindow:
    rep = entry.rep
    if rep.is_trivial:
        return TruncationWindow(0, 0)
    base = choose_truncation(rep, x, 1e-12) if x else default_window(rep, 33)
    reach = max(abs(k) for k in ks)
    size = base.size
    while True:
        win = default_window(rep, size)
        if all(k in win for k in ks) and (not rep.is_continuous or win.kmax >= reach + 8):
            return win
        size = 2 * size + 1


def equilibrium_expansion(registry: DecompositionRegistry, f: SectionCoefficients,
                          gamma: float, t: float, epsilon: float, C: float) -> ExpansionResult:
    """Finite spectral approximation of ``exp(-t P_gamma) f`` with residuals.

    Entries with ``eta <= C/epsilon`` contribute
    ``exp(-t lambda_eta(gamma)) P_eta(x) f_eta``, the trivial entry
    contributes ``f_0``; discrete and higher entries contribute nothing.
    ``actual_residual`` propagates every block and measures the difference.
    """
    if not (epsilon > 0 and C > 0 and t > 0):
        raise InvalidInputError("epsilon, C and t must be positive")
    f.validate(registry)
    thr = gamma_threshold(C, epsilon)
    if not gamma > thr:
        raise HypothesisViolation(f"gamma = {gamma:.6g} must exceed {thr:.6g}", gamma, thr)
    sob = f.sobolev_norm(registry, 2.0)
    if sob > C:
        raise HypothesisViolation(f"Sobolev norm of f ({sob:.6g}) exceeds C = {C:.6g}", sob, C)

    x = -2.0 / gamma
    tau = t * gamma * gamma / 2.0
    cutoff = C / epsilon
    approx: dict[tuple[int, int, int], complex] = {}
    residuals: dict[tuple[int, int], float] = {}
    eigenvalues: dict[int, float] = {}

    by_entry: dict[int, dict[int, dict[int, complex]]] = {}
    for (e, c), coeffs in f.blocks().items():
        by_entry.setdefault(e, {})[c] = coeffs

    for e, copies in by_entry.items():
        entry = registry[e]
        rep = entry.rep
        if rep.is_trivial:
            for c, coeffs in copies.items():
                for k, v in coeffs.items():
                    approx[(e, c, k)] = v
                residuals[(e, c)] = 0.0
            eigenvalues[e] = 0.0
            continue
        support = {k for coeffs in copies.values() for k in coeffs}
        win = _block_window(entry, support, x)
        prop = propagator_matrix(rep, x, tau, win)
        term = None
        if entry.eta is not None and entry.eta <= cutoff:
            mu = low_eigenvalue(rep, x, win)
            eigenvalues[e] = 0.5 * gamma * gamma * mu
            term = math.exp(-tau * mu) * riesz_projection(rep, x, window=win).matrix
        # copies are identical blocks: same operators, independent vectors
        for c, coeffs in copies.items():
            u = np.zeros(win.size, dtype=complex)
            for k, v in coeffs.items():
                u[win.index(k)] = v
            evolved = prop @ u
            if term is not None:
                a = term @ u
                for k, v in zip(win, a):
                    approx[(e, c, k)] = complex(v)
                evolved = evolved - a
            residuals[(e, c)] = float(np.linalg.norm(evolved))

    actual = math.sqrt(sum(r * r for r in residuals.values()))
    bound = epsilon + 8.0 / (gamma * gamma * t) * math.exp(-gamma * gamma * t / 4.0) * f.norm()
    return ExpansionResult(SectionCoefficients(approx), bound, actual, eigenvalues, residuals)


def equilibrium_distance_bound(surface: SurfaceData, C: float, epsilon: float, B: float,
                               gamma: float, t: float, C0: float, f_norm: float) -> float:
    """``eps + C0 C/eps e^{-t(eta_1 - 1/B)} ||f|| + 8/(gamma^2 t) e^{-gamma^2 t/4} ||f||``.

    ``C0`` is the user-supplied counting constant.  Warns with
    :class:`NonDecayingBoundWarning` when ``eta_1 <= 1/B``.
    """
    if not (C > 0 and epsilon > 0 and t > 0 and f_norm >= 0 and C0 >= 0):
        raise InvalidInputError("C, epsilon, t must be positive; C0, f_norm non-negative")
    if B < 1:
        raise InvalidInputError(f"B must be >= 1, got {B}")
    thr = max(4.0 * B * (4.0 * C / epsilon + 6.0) ** 1.5, 4.0 * SQRT32)
    if not gamma > thr:
        raise HypothesisViolation(f"gamma = {gamma:.6g} must exceed {thr:.6g}", gamma, thr)
    eta1 = surface.spectral_gap
    rate = eta1 - 1.0 / B
    if rate <= 0:
        warnings.warn(f"eta_1 - 1/B = {rate:.6g} <= 0: bound does not decay in t",
                      NonDecayingBoundWarning, stacklevel=2)
    return (epsilon + C0 * C / epsilon * math.exp(-t * rate) * f_norm
            + 8.0 / (gamma * gamma * t) * math.exp(-gamma * gamma * t / 4.0) * f_norm)
