"""Analytic perturbation of the eigenvalue at 0 of ``T(x) = -Xi^2 + x H``.

For principal/complementary series ``0`` is a simple eigenvalue of
``T(0)`` with eigenvector ``phi_0``.  The isolated eigenvalue ``mu(x)`` is
holomorphic on ``|x| < r = (lam + 6)^(-1/2)`` and stays inside the circle
``|z| = 1/2``, so Cauchy's inequality bounds its Taylor remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisViolation, InvalidInputError, NumericalError
from .rep_core import (
    Complementary,
    Principal,
    RepresentationModel,
    Symbol,
    TruncationWindow,
    assemble_operator,
    default_window,
    make_representation,
)
from .spectral import choose_truncation, low_eigenvalue

MAX_TAYLOR_ORDER = 6
DISCRETE_RADIUS = 1.0 / math.sqrt(32.0)
CONTOUR_RADIUS = 0.5


@dataclass(frozen=True)
class PerturbationSeries:
    coefficients: np.ndarray
    radius: float
    rho: float
    rep: RepresentationModel = field(repr=False)
    window: TruncationWindow

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: float, order: int | None = None) -> float:
        """Partial sum ``sum_{n <= order} x^n mu^(n)``."""
        order = self.order if order is None else order
        c = self.coefficients[: order + 1]
        return float(np.polynomial.polynomial.polyval(x, c))


@dataclass(frozen=True)
class SpectralCurve:
    gamma_grid: np.ndarray
    values: np.ndarray
    bound: np.ndarray
    eta: float

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.values - self.eta)

    @property
    def within_bound(self) -> np.ndarray:
        return self.deviation <= self.bound


def convergence_radius(rep: RepresentationModel) -> float:
    """Certified radius: ``(lam + 6)^(-1/2)``, or ``1/sqrt(32)`` for discrete series."""
    if rep.is_trivial:
        raise InvalidInputError("the trivial representation has no perturbation radius")
    if rep.is_discrete:
        return DISCRETE_RADIUS
    return 1.0 / math.sqrt(rep.casimir + 6.0)


def rep_for_eta(eta: float) -> RepresentationModel:
    """Representation whose Casimir is ``4 eta`` (``eta > 0``)."""
    eta = float(eta)
    if not eta > 0:
        raise InvalidInputError(f"Laplace eigenvalue must be positive, got {eta}")
    lam = 4.0 * eta
    if lam >= 1.0:
        return make_representation(Principal(math.sqrt(lam - 1.0)))
    return make_representation(Complementary(math.sqrt(1.0 - lam)))


def taylor_coefficients(rep: RepresentationModel, order: int,
                        window: TruncationWindow | None = None,
                        rho: float = CONTOUR_RADIUS) -> PerturbationSeries:
    """Taylor coefficients of ``mu(x)`` from the Rayleigh-Schrodinger recursion.

    With ``T^(0) = -Xi^2``, ``T^(1) = H`` and no higher terms,

        mu^(k)  = <T^(k) phi0, phi0> + sum_{n=1}^{k-1} <(T^(n) - mu^(n)) phi^(k-n), phi0>
        T^(0) phi^(l) = -sum_{n=1}^{l} (T^(n) - mu^(n)) phi^(l-n)

    Each ``phi^(l)`` is taken orthogonal to ``phi0``.
    """
    if not rep.is_continuous:
        raise InvalidInputError(f"perturbation series needs a principal/complementary series, not {rep.label}")
    if int(order) != order or not 1 <= order <= MAX_TAYLOR_ORDER:
        raise InvalidInputError(f"order must be an integer in [1, {MAX_TAYLOR_ORDER}], got {order}")
    order = int(order)
    if window is None:
        window = default_window(rep, 65)
    if not (window.kmin <= -order and window.kmax >= order):
        raise InvalidInputError(f"window [{window.kmin}, {window.kmax}] too small for order {order}")

    h = assemble_operator(rep, Symbol.H, window)
    t0 = assemble_operator(rep, Symbol.XI2, window).diag
    i0 = window.index(0)
    off = np.ones(window.size, dtype=bool)
    off[i0] = False

    def t_n(n, v):
        # T^(1) = H, T^(n) = 0 for n >= 2
        return h.matvec(v) if n == 1 else np.zeros_like(v)

    phi = [np.zeros(window.size)]
    phi[0][i0] = 1.0
    mu = [0.0]
    for k in range(1, order + 1):
        m = t_n(k, phi[0])[i0]
        for n in range(1, k):
            m += (t_n(n, phi[k - n]) - mu[n] * phi[k - n])[i0]
        mu.append(float(m))
        rhs = np.zeros(window.size)
        for n in range(1, k + 1):
            rhs -= t_n(n, phi[k - n]) - mu[n] * phi[k - n]
        # solvability: rhs has no phi0 component
        if abs(rhs[i0]) > 1e-12 * max(1.0, np.abs(rhs).max()):
            raise NumericalError(
                f"order {k}: right-hand side not orthogonal to the kernel ({rhs[i0]:.3g})",
                {"order": k, "kernel_component": float(rhs[i0])},
            )
        nxt = np.zeros(window.size)
        nxt[off] = rhs[off] / t0[off]
        phi.append(nxt)

    return PerturbationSeries(np.array(mu), convergence_radius(rep), float(rho), rep, window)


def taylor_error_bound(series: PerturbationSeries, x: float, N: int) -> float:
    """Cauchy remainder ``rho |x|^(N+1) / (r^N (r - |x|))``."""
    r = series.radius
    ax = abs(x)
    if ax >= r:
        raise HypothesisViolation(f"|x| = {ax:.6g} must be below the radius {r:.6g}", ax, r)
    if not 0 <= N <= series.order:
        raise InvalidInputError(f"N must be in [0, {series.order}], got {N}")
    return series.rho * ax ** (N + 1) / (r ** N * (r - ax))


def eigenvalue_threshold(eta: float) -> float:
    """``2 sqrt(4 eta + 6)``; the rate ``gamma`` must exceed it."""
    return 2.0 * math.sqrt(4.0 * eta + 6.0)


def eigenvalue_error_bound(eta: float, gamma: float) -> float:
    """``(8 eta + 12) / (gamma ((4 eta + 6)^(-1/2) - 2/gamma))``."""
    if not eta > 0:
        raise InvalidInputError(f"eta must be positive, got {eta}")
    thr = eigenvalue_threshold(eta)
    if not gamma > thr:
        raise HypothesisViolation(f"gamma = {gamma:.6g} must exceed 2 sqrt(4 eta + 6) = {thr:.6g}", gamma, thr)
    return (8.0 * eta + 12.0) / (gamma * ((4.0 * eta + 6.0) ** -0.5 - 2.0 / gamma))


def kbm_eigenvalue(rep: RepresentationModel, gamma: float, tol: float = 1e-12,
                   window: TruncationWindow | None = None) -> float:
    """``lambda(gamma) = (gamma^2 / 2) mu(2 / gamma)``.

    The sign of ``x`` is immaterial: ``T(-x)`` is the transpose of ``T(x)``.
    """
    x = 2.0 / gamma
    if window is None:
        window = choose_truncation(rep, x, tol)
    return 0.5 * gamma * gamma * low_eigenvalue(rep, x, window)


def trajectory(rep_or_eta, gamma_grid, tol: float = 1e-12) -> SpectralCurve:
    """Eigenvalue of the rescaled generator converging to ``eta`` as gamma grows."""
    if isinstance(rep_or_eta, RepresentationModel):
        rep = rep_or_eta
        if not rep.is_continuous:
            raise InvalidInputError(f"trajectory needs a principal/complementary series, not {rep.label}")
        eta = rep.casimir / 4.0
    else:
        eta = float(rep_or_eta)
        rep = rep_for_eta(eta)
    grid = np.asarray(gamma_grid, dtype=float)
    thr = eigenvalue_threshold(eta)
    bad = grid[~(grid > thr)]
    if bad.size:
        raise HypothesisViolation(f"gamma = {bad[0]:.6g} must exceed 2 sqrt(4 eta + 6) = {thr:.6g}", float(bad[0]), thr)
    values = np.empty_like(grid)
    for i, g in enumerate(grid):
        try:
            values[i] = kbm_eigenvalue(rep, g, tol)
        except NumericalError as exc:
            exc.diagnostics.setdefault("gamma", float(g))
            raise
    bound = np.array([eigenvalue_error_bound(eta, g) for g in grid])
    return SpectralCurve(grid, values, bound, eta)
