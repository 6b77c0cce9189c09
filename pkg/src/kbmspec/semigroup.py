"""Propagation by ``exp(-t T(x))`` and its decay estimates.

Two independent routes:

* :func:`propagate` -- scaling-and-squaring matrix exponential.
* :func:`propagate_contour` -- the inverse-Laplace representation

      e^{-tT} u = e^{-mu t} P u + (1/t) (1/2 pi i) \\int_{1/2 - i oo}^{1/2 + i oo} e^{-z t} R(z)^2 u dz

  where the residue term is present only for principal/complementary series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import HypothesisViolation, InvalidInputError, QuadratureError
from .perturbation import DISCRETE_RADIUS, convergence_radius
from .rep_core import RepresentationModel, Symbol, TruncationWindow, assemble_operator, default_window
from .spectral import generator, low_eigenvalue, riesz_projection
from .tridiag import solve_tridiagonal

LINE = 0.5
_CHUNK = 4096


@dataclass(frozen=True)
class PropagatorResult:
    output: np.ndarray
    method: str
    halflength: float | None = None
    nodes: int | None = None
    defect: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def _as_vector(u, window: TruncationWindow) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape[0] != window.size:
        raise InvalidInputError(f"vector of length {u.shape[0]} does not match window size {window.size}")
    return u


def propagator_matrix(rep: RepresentationModel, x: float, t: float,
                      window: TruncationWindow | None = None) -> np.ndarray:
    """``exp(-t T(x))`` on the window."""
    if t < 0:
        raise InvalidInputError(f"t must be >= 0, got {t}")
    g = generator(rep, x, window)
    return scipy.linalg.expm(-t * g.dense())


def propagate(rep: RepresentationModel, x: float, t: float, u,
              window: TruncationWindow | None = None) -> np.ndarray:
    """``exp(-t T(x)) u``; ``u`` may also be a block of column vectors."""
    if window is None:
        window = default_window(rep, 129)
    u = _as_vector(u, window)
    return propagator_matrix(rep, x, t, window) @ u


def _check_contour_hypothesis(rep: RepresentationModel, x: float) -> None:
    if rep.is_trivial:
        raise InvalidInputError("no contour representation on the trivial representation")
    lim = convergence_radius(rep) / 2 if rep.is_continuous else DISCRETE_RADIUS / 2
    if abs(x) > lim:
        raise HypothesisViolation(f"|x| = {abs(x):.6g} exceeds the admissible {lim:.6g}", abs(x), lim)


def line_tail_bound(x: float, h_norm: float, t: float, L: float, u_norm: float = 1.0) -> float:
    """Bound on the neglected part ``|s| > L`` of the line integral.

    The integrand is ``e^{-zt} (R(z)^2 - R_0(z)^2) u`` with ``z = 1/2 + i s``.
    The numerical range of ``T(x)`` lies in ``|Im| <= a = |x| ||H||``, so
    ``||R|| <= 1/(|s| - a)``, and ``R - R_0 = -x R H R_0`` gives
    ``||R^2 - R_0^2|| <= 2 a / (|s| - a)^3``.
    """
    a = abs(x) * h_norm
    if L <= a:
        return math.inf
    return a * math.exp(-LINE * t) * u_norm / (math.pi * t * (L - a) ** 2)


def _line_sum(g, t, u, s):
    """``sum_j e^{-z_j t} (R(z_j)^2 - R_0(z_j)^2) u`` at ``z_j = 1/2 + i s_j``."""
    total = np.zeros(u.shape, dtype=complex)
    for lo in range(0, s.size, _CHUNK):
        z = LINE + 1j * s[lo:lo + _CHUNK]
        d = g.diag[None, :] - z[:, None]
        r1 = solve_tridiagonal(g.lower, d, g.upper, u[None, :])
        r2 = solve_tridiagonal(g.lower, d, g.upper, r1)
        # R_0: resolvent of the diagonal part of T(x)
        r0 = u[None, :] / d ** 2
        total += np.exp(-z * t) @ (r2 - r0)
    return total


def propagate_contour(rep: RepresentationModel, x: float, t: float, u,
                      window: TruncationWindow | None = None,
                      L: float = 200.0, M: int = 4096, tol: float = 1e-7,
                      max_L: float = 2.0 ** 20, max_nodes: int = 2 ** 22,
                      full_output: bool = False):
    """``exp(-t T(x)) u`` from the vertical-line inverse-Laplace formula.

    The unperturbed part ``R_0(z)^2 u`` (``R_0`` = resolvent of the diagonal)
    integrates in closed form to ``sum_{k^2 > 1/2} e^{-k^2 t} u_k``, so only
    the difference ``R^2 - R_0^2`` is integrated numerically; it decays like
    ``|s|^-3``.  ``L`` is doubled until :func:`line_tail_bound` is below
    ``tol/2``; the trapezoidal node count is doubled from ``M`` until the
    sum changes by less than ``tol/2``.
    """
    if not t > 0:
        raise InvalidInputError(f"t must be > 0, got {t}")
    _check_contour_hypothesis(rep, x)
    if window is None:
        window = default_window(rep, 65)
    u = _as_vector(u, window)
    unorm = float(np.linalg.norm(u))
    g = generator(rep, x, window)
    h = assemble_operator(rep, Symbol.H, window)
    h_norm = float(np.abs(h.lower).max(initial=0.0) + np.abs(h.upper).max(initial=0.0))

    L = float(L)
    while line_tail_bound(x, h_norm, t, L, unorm) > tol / 2:
        if L >= max_L:
            raise QuadratureError(
                f"line-integral tail bound above {tol / 2:.3g} at L = {L:g}",
                {"L": L, "tail": line_tail_bound(x, h_norm, t, L, unorm)},
            )
        L *= 2
    tail = line_tail_bound(x, h_norm, t, L, unorm)

    # trapezoid on [-L, L] with M intervals; refinement re-uses old nodes
    M = int(M)
    s = np.linspace(-L, L, M + 1)
    raw = _line_sum(g, t, u, s)
    # halve the two end nodes
    ends = _line_sum(g, t, u, s[[0, -1]])
    raw = raw - 0.5 * ends
    step = 2 * L / M
    integral = step * raw
    delta = math.inf
    while True:
        if 2 * M > max_nodes:
            break
        mid = -L + step * (np.arange(M) + 0.5)
        raw = raw + _line_sum(g, t, u, mid)
        M *= 2
        step /= 2
        new = step * raw
        delta = float(np.linalg.norm(new - integral))
        integral = new
        if delta < tol / 2:
            break
    if not delta < tol / 2:
        raise QuadratureError(
            f"line quadrature not converged at {M} nodes (change {delta:.3g}, tail {tail:.3g})",
            {"L": L, "nodes": M, "delta": delta, "tail": tail},
        )

    k2 = window.ks.astype(float) ** 2
    # (1/t)(1/2 pi i) \int ... dz with dz = i ds
    out = integral / (2 * math.pi * t)
    out = out + np.where(k2 > LINE, np.exp(-k2 * t), 0.0) * u
    residue = None
    if rep.is_continuous:
        mu = low_eigenvalue(rep, x, window)
        proj = riesz_projection(rep, x, window=window)
        residue = math.exp(-mu * t) * proj.apply(u)
        out = out + residue
    if full_output:
        return PropagatorResult(out, "contour", L, M, delta + tail,
                                {"tail_bound": tail, "quadrature_delta": delta})
    return out


def decay_bound(rep: RepresentationModel, t: float, u_norm: float = 1.0) -> float:
    """Right-hand side of the decay estimate.

    ``(4/t) e^{-t/2}`` for principal/complementary series and
    ``2 / (t (n^2 - 1/2)) e^{-t/2}`` for discrete series ``n``.
    """
    if rep.is_discrete:
        n = rep.kind.n
        return 2.0 / (t * (n * n - 0.5)) * math.exp(-t / 2) * u_norm
    return 4.0 / t * math.exp(-t / 2) * u_norm


def decay_defect(rep: RepresentationModel, x: float, t: float, u,
                 window: TruncationWindow | None = None) -> tuple[float, float]:
    """``(defect, bound)`` for the decay estimate of ``exp(-t T(x)) u``.

    Principal/complementary: ``defect = ||e^{-tT}u - e^{-mu t} P u||``.
    Discrete: ``defect = ||e^{-tT} u||``.
    """
    if not t > 0:
        raise InvalidInputError(f"t must be > 0, got {t}")
    _check_contour_hypothesis(rep, x)
    if window is None:
        window = default_window(rep, 129)
    u = _as_vector(u, window)
    unorm = np.linalg.norm(u, axis=0)
    out = propagate(rep, x, t, u, window)
    if rep.is_continuous:
        mu = low_eigenvalue(rep, x, window)
        proj = riesz_projection(rep, x, window=window)
        out = out - math.exp(-mu * t) * (proj.matrix @ u)
    defect = np.linalg.norm(out, axis=0)
    bound = decay_bound(rep, t, 1.0) * unorm
    if np.ndim(defect) == 0:
        return float(defect), float(bound)
    return defect, bound
