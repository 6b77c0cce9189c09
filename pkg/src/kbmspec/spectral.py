"""Spectra, resolvent norms and Riesz projectors of truncated generators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    EigenSolverError,
    InvalidInputError,
    QuadratureError,
    SingularityError,
    SpectralSeparationError,
    TruncationError,
)
from .rep_core import (
    OperatorMatrix,
    RepresentationModel,
    Symbol,
    TruncationWindow,
    assemble_operator,
    default_window,
)
from .tridiag import solve_tridiagonal

# resolvent singularity standoff
SINGULAR_STANDOFF = 1e-8
# minimum eigenvalue distance from a Riesz contour
CONTOUR_STANDOFF = 1e-3
TRUNCATION_SCHEDULE = (33, 65, 129, 257, 513)
DEFAULT_WINDOW_SIZE = 129
HALF_PLANE = 0.5


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    window: TruncationWindow
    residual_bound: float
    eigenvectors: np.ndarray | None = None

    def count_in_half_plane(self, bound: float = HALF_PLANE) -> int:
        return int(np.count_nonzero(self.eigenvalues.real <= bound))


@dataclass(frozen=True)
class RieszProjector:
    matrix: np.ndarray
    center: complex
    radius: float
    nodes: int
    idempotency_defect: float
    rank_estimate: int
    quadrature_delta: float

    @property
    def contour(self) -> tuple[complex, float, int]:
        return (self.center, self.radius, self.nodes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def apply(self, u) -> np.ndarray:
        return self.matrix @ np.asarray(u)


def generator(rep: RepresentationModel, x: float, window: TruncationWindow | None = None) -> OperatorMatrix:
    """Truncation of ``T(x) = -Xi^2 + x H``."""
    if window is None:
        window = default_window(rep, DEFAULT_WINDOW_SIZE)
    return assemble_operator(rep, Symbol.generator(x), window)


def _sort_key(vals: np.ndarray) -> np.ndarray:
    return np.lexsort((vals.imag, vals.real))


def eigen_spectrum(matrix: OperatorMatrix, vectors: bool = False) -> SpectrumResult:
    """All eigenvalues of a truncated operator, ascending by real part.

    Dense non-symmetric LAPACK solve with balancing.  ``residual_bound`` is
    ``max ||A v - lam v|| / ||v||`` over the returned pairs.
    """
    a = matrix.dense()
    try:
        w, v = scipy.linalg.eig(a, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolverError(f"eigensolver failed: {exc}", {"size": matrix.size}) from exc
    if not np.all(np.isfinite(w)):
        raise EigenSolverError("eigensolver returned non-finite eigenvalues", {"size": matrix.size})
    order = _sort_key(w)
    w = w[order]
    v = v[:, order]
    res = np.linalg.norm(a @ v - v * w, axis=0) / np.linalg.norm(v, axis=0)
    return SpectrumResult(w, matrix.window, float(res.max(initial=0.0)), v if vectors else None)


def _min_singular(a: np.ndarray) -> float:
    return float(scipy.linalg.svdvals(a)[-1])


def resolvent_norm(rep: RepresentationModel, zeta: complex, x: float,
                   window: TruncationWindow | None = None,
                   spectrum: SpectrumResult | None = None) -> float:
    """``||(T(x) - zeta)^{-1}||`` on the truncation, as ``1 / sigma_min``."""
    g = generator(rep, x, window)
    if spectrum is None:
        spectrum = eigen_spectrum(g)
    dist = float(np.min(np.abs(spectrum.eigenvalues - zeta)))
    if dist < SINGULAR_STANDOFF:
        raise SingularityError(
            f"zeta={zeta} is within {dist:.3g} of the truncated spectrum",
            {"zeta": zeta, "distance": dist},
        )
    return 1.0 / _min_singular(g.shifted(zeta).dense())


def resolvent_closed_form(rep: RepresentationModel, zeta: complex, window: TruncationWindow) -> float:
    """``sup_k |k^2 - zeta|^{-1}`` over the window K-types (unperturbed)."""
    ks = window.ks.astype(float)
    return float(np.max(1.0 / np.abs(ks * ks - zeta)))


def h_resolvent_norm(rep: RepresentationModel, zeta: complex, window: TruncationWindow) -> float:
    """``||H R(zeta, 0)||`` on the truncation."""
    h = assemble_operator(rep, Symbol.H, window).dense()
    ks = window.ks.astype(float)
    return float(np.linalg.norm(h / (ks * ks - zeta)[None, :], 2))


def _circle_resolvent_sum(g: OperatorMatrix, center: complex, radius: float, nodes: int,
                          offset: float = 0.0) -> np.ndarray:
    """``sum_j R(z_j) (z_j - c)`` over ``nodes`` equispaced circle points,
    angles shifted by ``offset`` (in units of the node spacing)."""
    n = g.size
    theta = 2 * np.pi * (np.arange(nodes) + offset) / nodes
    dz = radius * np.exp(1j * theta)
    z = center + dz
    eye = np.eye(n, dtype=complex)[None]
    total = np.zeros((n, n), dtype=complex)
    for lo in range(0, nodes, 256):
        zz = z[lo:lo + 256]
        inv = solve_tridiagonal(g.lower, g.diag[None, :] - zz[:, None], g.upper, eye)
        total += np.tensordot(dz[lo:lo + 256], inv, axes=(0, 0))
    return total


def riesz_projection(rep: RepresentationModel, x: float,
                     contour: tuple[complex, float, int] = (0.0, 0.5, 32),
                     window: TruncationWindow | None = None,
                     tol: float = 1e-10, max_nodes: int = 512,
                     defect_tol: float = 1e-8,
                     standoff: float = CONTOUR_STANDOFF) -> RieszProjector:
    """``P = -(1/2 pi i) \\oint R(z, x) dz`` by the trapezoidal rule on a circle.

    Nodes are doubled from ``contour[2]`` until the Frobenius change of the
    projector is below ``tol``.  With ``z = c + r e^{i theta}`` the rule reads
    ``P ~ -(1/M) sum_j R(z_j) (z_j - c)``.
    """
    center, radius, nodes = complex(contour[0]), float(contour[1]), int(contour[2])
    if radius <= 0 or nodes < 4:
        raise InvalidInputError(f"bad contour (center={center}, radius={radius}, nodes={nodes})")
    g = generator(rep, x, window)
    spec = eigen_spectrum(g)
    gap = np.abs(np.abs(spec.eigenvalues - center) - radius)
    if gap.min() < standoff:
        raise SpectralSeparationError(
            f"eigenvalue within {gap.min():.3g} of the contour |z - {center}| = {radius}",
            {"distance": float(gap.min()), "eigenvalue": complex(spec.eigenvalues[np.argmin(gap)])},
        )

    total = _circle_resolvent_sum(g, center, radius, nodes)
    proj = -total / nodes
    delta = math.inf
    while True:
        if nodes * 2 > max_nodes:
            break
        # doubling re-uses the old nodes: add the interleaved ones
        total = total + _circle_resolvent_sum(g, center, radius, nodes, offset=0.5)
        nodes *= 2
        new = -total / nodes
        delta = float(np.linalg.norm(new - proj))
        proj = new
        if delta < tol:
            break
    if not delta < tol:
        raise QuadratureError(
            f"Riesz quadrature did not converge by {nodes} nodes (last change {delta:.3g})",
            {"nodes": nodes, "delta": delta},
        )

    defect = float(np.linalg.norm(proj @ proj - proj, 2))
    if defect > defect_tol:
        raise QuadratureError(
            f"projector idempotency defect {defect:.3g} exceeds {defect_tol:.3g}",
            {"nodes": nodes, "defect": defect},
        )
    rank = int(np.count_nonzero(scipy.linalg.svdvals(proj) > 0.5))
    return RieszProjector(proj, center, radius, nodes, defect, rank, delta)


def low_eigenvalue(rep: RepresentationModel, x: float, window: TruncationWindow | None = None) -> float:
    """The unique eigenvalue of ``T(x)`` with real part <= 1/2.

    Only principal and complementary series have one; the half-plane count
    is checked and a count other than one raises SpectralSeparationError.
    """
    if not rep.is_continuous:
        raise InvalidInputError(f"low eigenvalue is defined for principal/complementary series, not {rep.label}")
    spec = eigen_spectrum(generator(rep, x, window))
    inside = spec.eigenvalues[spec.eigenvalues.real <= HALF_PLANE]
    if inside.size != 1:
        raise SpectralSeparationError(
            f"{inside.size} eigenvalues with Re <= 1/2 at x={x} for {rep.label}",
            {"x": x, "count": int(inside.size), "eigenvalues": inside.tolist()},
        )
    mu = inside[0]
    if abs(mu.imag) > 1e-9 * max(1.0, abs(mu)) or abs(mu) > HALF_PLANE:
        raise SpectralSeparationError(
            f"isolated eigenvalue {mu} is not a real point of the disc |z| <= 1/2",
            {"x": x, "eigenvalue": complex(mu)},
        )
    return float(mu.real)


def _lowest(rep, x, window):
    if rep.is_continuous:
        return low_eigenvalue(rep, x, window)
    return complex(eigen_spectrum(generator(rep, x, window)).eigenvalues[0])


def choose_truncation(rep: RepresentationModel, x: float, tol: float,
                      schedule=TRUNCATION_SCHEDULE) -> TruncationWindow:
    """Smallest window from ``schedule`` at which the lowest eigenvalue is stable.

    Returns the larger of the first two consecutive windows whose lowest
    eigenvalues differ by less than ``tol``.  At ``x = 0`` the generator is
    diagonal and the smallest window is already exact.
    """
    if not tol > 0:
        raise InvalidInputError(f"tolerance must be positive, got {tol}")
    if rep.is_trivial:
        return TruncationWindow(0, 0)
    if x == 0:
        return default_window(rep, schedule[0])
    deltas = []
    prev = _lowest(rep, x, default_window(rep, schedule[0]))
    for size in schedule[1:]:
        win = default_window(rep, size)
        cur = _lowest(rep, x, win)
        deltas.append(abs(cur - prev))
        if deltas[-1] < tol:
            return win
        prev = cur
    raise TruncationError(
        f"lowest eigenvalue not stable to {tol:g} up to window size {schedule[-1]}",
        {"deltas": deltas, "schedule": list(schedule)},
    )


def track_eigenvalue(rep: RepresentationModel, xs, window: TruncationWindow | None = None,
                     seed: complex = 0.0) -> np.ndarray:
    """Follow one eigenvalue along a parameter grid by nearest-neighbour matching.

    ``xs`` should start at (or near) the point where ``seed`` is an eigenvalue.
    For continuous series the half-plane count is checked at every point so
    the tracked branch cannot silently swap with another.
    """
    out = []
    prev = complex(seed)
    for x in xs:
        spec = eigen_spectrum(generator(rep, x, window))
        if rep.is_continuous and spec.count_in_half_plane() != 1:
            raise SpectralSeparationError(f"half-plane count != 1 at x={x}", {"x": x})
        cur = spec.eigenvalues[np.argmin(np.abs(spec.eigenvalues - prev))]
        out.append(cur)
        prev = cur
    return np.array(out)
