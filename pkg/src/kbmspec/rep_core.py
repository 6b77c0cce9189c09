"""Irreducible unitary representations of PSL(2, R) in the K-type basis.

A representation is fixed by its Casimir value ``lam`` and its K-type set.
With the normalised K-type vectors ``phi_k`` (``Xi phi_k = i k phi_k``) the
raising operator acts as ``X+ phi_k = c_k phi_{k+1}`` with

    c_k = 1/2 * sqrt((2k + 1)^2 + lam - 1),

and ``X- = -X+^*`` forces ``X- phi_{k+1} = -c_k phi_k``.  From
``X+- = -H -+ i B`` one gets ``H = -(X+ + X-)/2`` and ``B = (i/2)(X+ - X-)``,
so ``H`` is real antisymmetric and ``B`` purely imaginary symmetric.

Matrices are stored as three diagonals.  Rows and columns are labelled by
the K-type itself, offset by ``window.kmin``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "Principal",
    "Complementary",
    "DiscreteHolomorphic",
    "DiscreteAntiHolomorphic",
    "Trivial",
    "SeriesKind",
    "RepresentationModel",
    "TruncationWindow",
    "Symbol",
    "OperatorMatrix",
    "make_representation",
    "coupling",
    "default_window",
    "assemble_operator",
    "sobolev_weight",
    "sobolev_norm",
    "parse_representation",
]


# --------------------------------------------------------------------------
# series kinds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Principal:
    s: float

    @property
    def label(self) -> str:
        return f"principal(s={self.s:.17g})"


@dataclass(frozen=True)
class Complementary:
    s: float

    @property
    def label(self) -> str:
        return f"complementary(s={self.s:.17g})"


@dataclass(frozen=True)
class DiscreteHolomorphic:
    n: int

    @property
    def label(self) -> str:
        return f"holomorphic(n={self.n})"


@dataclass(frozen=True)
class DiscreteAntiHolomorphic:
    n: int

    @property
    def label(self) -> str:
        return f"antiholomorphic(n={self.n})"


@dataclass(frozen=True)
class Trivial:
    @property
    def label(self) -> str:
        return "trivial"


SeriesKind = Union[Principal, Complementary, DiscreteHolomorphic, DiscreteAntiHolomorphic, Trivial]
_DISCRETE = (DiscreteHolomorphic, DiscreteAntiHolomorphic)


@dataclass(frozen=True)
class RepresentationModel:
    """An irreducible unitary representation given by Casimir and K-types.

    ``lam_minus_one`` stores ``lam - 1`` in the form that keeps the ladder
    radicand exact: ``s**2``, ``-s**2`` or the integer ``-(2n-1)**2``.
    ``kmin``/``kmax`` are ``None`` where the K-type set is unbounded.
    """

    kind: SeriesKind
    casimir: float
    lam_minus_one: float
    kmin: int | None
    kmax: int | None

    @property
    def is_discrete(self) -> bool:
        return isinstance(self.kind, _DISCRETE)

    @property
    def is_trivial(self) -> bool:
        return isinstance(self.kind, Trivial)

    @property
    def is_continuous(self) -> bool:
        """Principal or complementary series (K-types all of Z)."""
        return isinstance(self.kind, (Principal, Complementary))

    @property
    def lowest_ktype(self) -> int:
        """Smallest |k| in the K-type set."""
        if self.is_discrete:
            return self.kind.n
        return 0

    def contains(self, k: int) -> bool:
        if self.kmin is not None and k < self.kmin:
            return False
        if self.kmax is not None and k > self.kmax:
            return False
        return True

    def coupling(self, k: int) -> float:
        return coupling(self, k)

    @property
    def label(self) -> str:
        return self.kind.label


def make_representation(kind: SeriesKind) -> RepresentationModel:
    """Build the model for one series member, validating its parameter."""
    if isinstance(kind, Principal):
        s = float(kind.s)
        if not (math.isfinite(s) and s >= 0.0):
            raise InvalidInputError(f"principal series needs s >= 0, got {kind.s!r}")
        return RepresentationModel(kind, 1.0 + s * s, s * s, None, None)
    if isinstance(kind, Complementary):
        s = float(kind.s)
        if not (0.0 < s < 1.0):
            raise InvalidInputError(f"complementary series needs 0 < s < 1, got {kind.s!r}")
        return RepresentationModel(kind, 1.0 - s * s, -s * s, None, None)
    if isinstance(kind, _DISCRETE):
        n = kind.n
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise InvalidInputError(f"discrete series needs integer n >= 1, got {n!r}")
        n = int(n)
        m = -((2 * n - 1) ** 2)
        lam = 1 + m
        if isinstance(kind, DiscreteHolomorphic):
            return RepresentationModel(kind, float(lam), m, n, None)
        return RepresentationModel(kind, float(lam), m, None, -n)
    if isinstance(kind, Trivial):
        return RepresentationModel(kind, 0.0, -1.0, 0, 0)
    raise InvalidInputError(f"unknown series kind {kind!r}")


def parse_representation(text: str) -> RepresentationModel:
    """Parse ``principal:S``, ``complementary:S``, ``holomorphic:N``,
    ``antiholomorphic:N`` or ``trivial``."""
    name, _, arg = text.strip().partition(":")
    name = name.lower()
    try:
        if name in ("principal", "p"):
            return make_representation(Principal(float(arg)))
        if name in ("complementary", "c"):
            return make_representation(Complementary(float(arg)))
        if name in ("holomorphic", "discrete", "d+"):
            return make_representation(DiscreteHolomorphic(int(arg)))
        if name in ("antiholomorphic", "d-"):
            return make_representation(DiscreteAntiHolomorphic(int(arg)))
        if name == "trivial":
            return make_representation(Trivial())
    except ValueError as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"cannot parse representation {text!r}: {exc}") from None
    raise InvalidInputError(f"unknown representation {text!r}")


def _radicand(rep: RepresentationModel, k):
    return (2 * k + 1) ** 2 + rep.lam_minus_one


def coupling(rep: RepresentationModel, k: int) -> float:
    """Ladder coefficient ``c_k = |<X+ phi_k, phi_{k+1}>|``.

    Defined when ``k`` and ``k+1`` are both K-types, and at the single
    edge transition of a discrete series, where it is exactly 0.
    """
    if rep.is_trivial:
        raise InvalidInputError("trivial representation has no ladder transitions")
    k = int(k)
    inside = rep.contains(k) and rep.contains(k + 1)
    edge = rep.contains(k) != rep.contains(k + 1)
    if not (inside or (edge and rep.is_discrete)):
        raise InvalidInputError(f"transition {k} -> {k + 1} is outside the K-type set of {rep.label}")
    rad = _radicand(rep, k)
    if edge:
        # integer arithmetic: exactly zero
        assert rad == 0, rad
        return 0.0
    return 0.5 * math.sqrt(rad)


# --------------------------------------------------------------------------
# truncation windows
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationWindow:
    kmin: int
    kmax: int

    def __post_init__(self):
        if self.kmax < self.kmin:
            raise InvalidInputError(f"empty window [{self.kmin}, {self.kmax}]")

    @property
    def size(self) -> int:
        return self.kmax - self.kmin + 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.kmin, self.kmax + 1)

    def index(self, k: int) -> int:
        if not (self.kmin <= k <= self.kmax):
            raise InvalidInputError(f"K-type {k} outside window [{self.kmin}, {self.kmax}]")
        return k - self.kmin

    def __contains__(self, k) -> bool:
        return self.kmin <= k <= self.kmax

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.kmin, self.kmax + 1))

    @classmethod
    def symmetric(cls, size: int) -> "TruncationWindow":
        if size < 1 or size % 2 == 0:
            raise InvalidInputError(f"symmetric window needs an odd size, got {size}")
        h = (size - 1) // 2
        return cls(-h, h)


def default_window(rep: RepresentationModel, size: int) -> TruncationWindow:
    """Window of ``size`` K-types starting at the bottom of the K-type set.

    Symmetric around 0 for principal/complementary (``size`` rounded up to
    odd), ``[n, n+size-1]`` for holomorphic, mirrored for anti-holomorphic.
    """
    if rep.is_trivial:
        return TruncationWindow(0, 0)
    if rep.is_continuous:
        return TruncationWindow.symmetric(size + (1 - size % 2))
    n = rep.kind.n
    if isinstance(rep.kind, DiscreteHolomorphic):
        return TruncationWindow(n, n + size - 1)
    return TruncationWindow(-n - size + 1, -n)


def _check_window(rep: RepresentationModel, window: TruncationWindow) -> None:
    if not (rep.contains(window.kmin) and rep.contains(window.kmax)):
        raise InvalidInputError(
            f"window [{window.kmin}, {window.kmax}] is not inside the K-type set of {rep.label}"
        )


def _window_couplings(rep: RepresentationModel, window: TruncationWindow) -> np.ndarray:
    """``c_k`` for the ``N-1`` transitions ``k -> k+1`` inside the window."""
    ks = np.arange(window.kmin, window.kmax, dtype=float)
    rad = (2.0 * ks + 1.0) ** 2 + rep.lam_minus_one
    # discrete edges sit outside any valid window, so rad > 0 here
    return 0.5 * np.sqrt(rad)


# --------------------------------------------------------------------------
# operator matrices
# --------------------------------------------------------------------------

SYMBOLS = ("Xi", "Xi2", "H", "B", "Casimir", "Generator", "SobolevWeight")


@dataclass(frozen=True)
class Symbol:
    """Which enveloping-algebra element a matrix represents.

    ``Xi2`` is the positive fibre Laplacian ``-Xi^2`` (diagonal ``k^2``).
    ``Generator`` carries ``x``; ``SobolevWeight`` carries the exponent.
    """

    name: str
    param: float | None = None

    def __post_init__(self):
        if self.name not in SYMBOLS:
            raise InvalidInputError(f"unknown symbol {self.name!r}; choose from {SYMBOLS}")
        if self.name in ("Generator", "SobolevWeight") and self.param is None:
            raise InvalidInputError(f"symbol {self.name} needs a parameter")

    @classmethod
    def generator(cls, x: float) -> "Symbol":
        return cls("Generator", float(x))

    @classmethod
    def sobolev(cls, alpha: float) -> "Symbol":
        return cls("SobolevWeight", float(alpha))


Symbol.XI = Symbol("Xi")
Symbol.XI2 = Symbol("Xi2")
Symbol.H = Symbol("H")
Symbol.B = Symbol("B")
Symbol.CASIMIR = Symbol("Casimir")


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Tridiagonal truncation of an operator on a K-type window."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    window: TruncationWindow
    symbol: Symbol
    rep: RepresentationModel | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.window.size

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.diag) or np.iscomplexobj(self.lower) or np.iscomplexobj(self.upper))

    def dense(self) -> np.ndarray:
        n = self.size
        a = np.zeros((n, n), dtype=np.result_type(self.lower, self.diag, self.upper))
        a[np.arange(n), np.arange(n)] = self.diag
        if n > 1:
            a[np.arange(1, n), np.arange(n - 1)] = self.lower
            a[np.arange(n - 1), np.arange(1, n)] = self.upper
        return a

    def matvec(self, v: np.ndarray) -> np.ndarray:
        from .tridiag import tridiag_matvec

        return tridiag_matvec(self.lower, self.diag, self.upper, np.asarray(v))

    def entry(self, krow: int, kcol: int) -> complex:
        i, j = self.window.index(krow), self.window.index(kcol)
        if i == j:
            return self.diag[i]
        if i == j + 1:
            return self.lower[j]
        if j == i + 1:
            return self.upper[i]
        return 0.0

    def transpose(self) -> "OperatorMatrix":
        return OperatorMatrix(self.upper, self.diag, self.lower, self.window, self.symbol, self.rep)

    def shifted(self, z: complex) -> "OperatorMatrix":
        """``self - z I``."""
        return OperatorMatrix(self.lower, self.diag - z, self.upper, self.window, self.symbol, self.rep)

    def to_triplets(self) -> str:
        """Row/column/value text dump, one nonzero per line, rows and columns
        labelled by K-type, values as ``re,im``."""
        lines = []
        for i, k in enumerate(self.window):
            for j, val in ((i - 1, self.lower[i - 1] if i > 0 else 0),
                           (i, self.diag[i]),
                           (i + 1, self.upper[i] if i < self.size - 1 else 0)):
                if 0 <= j < self.size and val != 0:
                    v = complex(val)
                    lines.append(f"{k} {self.window.kmin + j} {v.real:.17g},{v.imag:.17g}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_triplets(cls, text: str, window: TruncationWindow, symbol: Symbol) -> "OperatorMatrix":
        n = window.size
        lower = np.zeros(max(n - 1, 0), dtype=complex)
        diag = np.zeros(n, dtype=complex)
        upper = np.zeros(max(n - 1, 0), dtype=complex)
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                kr, kc, val = line.split()
                re_, im_ = val.split(",")
                i, j, v = window.index(int(kr)), window.index(int(kc)), complex(float(re_), float(im_))
            except ValueError as exc:
                raise InvalidInputError(f"triplet line {lineno}: {exc}") from None
            if i == j:
                diag[i] = v
            elif i == j + 1:
                lower[j] = v
            elif j == i + 1:
                upper[i] = v
            else:
                raise InvalidInputError(f"triplet line {lineno} lies outside the tridiagonal band")
        return cls(lower, diag, upper, window, symbol)


def sobolev_weight(rep: RepresentationModel, ks) -> np.ndarray:
    """Diagonal of ``I - H^2 - B^2 - Xi^2``, i.e. ``1 + lam/4 + 2k^2``.

    Uses ``-H^2 - B^2 = lam/4 - Xi^2`` (Casimir identity).
    """
    ks = np.asarray(ks, dtype=float)
    return 1.0 + rep.casimir / 4.0 + 2.0 * ks * ks


def assemble_operator(rep: RepresentationModel, symbol: Symbol | str, window: TruncationWindow) -> OperatorMatrix:
    """Assemble the truncation of ``symbol`` on ``window``."""
    if isinstance(symbol, str):
        symbol = Symbol(symbol)
    _check_window(rep, window)
    n = window.size
    ks = window.ks.astype(float)
    zeros = np.zeros(max(n - 1, 0))

    if rep.is_trivial:
        z = np.zeros(1)
        if symbol.name == "SobolevWeight":
            return OperatorMatrix(zeros, np.ones(1), zeros, window, symbol, rep)
        return OperatorMatrix(zeros, z, zeros, window, symbol, rep)

    c = _window_couplings(rep, window)
    name = symbol.name
    if name == "Xi":
        m = OperatorMatrix(zeros.astype(complex), 1j * ks, zeros.astype(complex), window, symbol, rep)
    elif name == "Xi2":
        m = OperatorMatrix(zeros, ks * ks, zeros, window, symbol, rep)
    elif name == "H":
        m = OperatorMatrix(-0.5 * c, np.zeros(n), 0.5 * c, window, symbol, rep)
    elif name == "B":
        m = OperatorMatrix(0.5j * c, np.zeros(n, dtype=complex), 0.5j * c, window, symbol, rep)
    elif name == "Generator":
        x = float(symbol.param)
        m = OperatorMatrix(-0.5 * x * c, ks * ks, 0.5 * x * c, window, symbol, rep)
    elif name == "SobolevWeight":
        m = OperatorMatrix(zeros, sobolev_weight(rep, ks) ** symbol.param, zeros, window, symbol, rep)
    elif name == "Casimir":
        # 4 Xi^2 - 2(X+X- + X-X+) is diagonal on the truncation with entries
        # -4k^2 + 2(c_{k-1}^2 + c_k^2), dropping neighbours outside the window.
        # Summing the integer parts of the radicands first keeps it exact.
        ki = window.ks.astype(np.int64)
        below = np.arange(n) > 0
        above = np.arange(n) < n - 1
        whole = -8 * ki * ki + below * (2 * ki - 1) ** 2 + above * (2 * ki + 1) ** 2
        diag = whole / 2.0 + (below.astype(float) + above) * (rep.lam_minus_one / 2.0)
        m = OperatorMatrix(zeros, diag, zeros, window, symbol, rep)
    else:  # pragma: no cover - guarded by Symbol
        raise InvalidInputError(name)
    return m


def sobolev_norm(rep: RepresentationModel, coeffs, alpha: float, window: TruncationWindow) -> float:
    """Order-``alpha`` Sobolev norm ``<W^alpha u, u>^(1/2)`` of a window vector."""
    if alpha < 0:
        raise InvalidInputError(f"Sobolev order must be >= 0, got {alpha}")
    a = np.asarray(coeffs)
    if a.shape != (window.size,):
        raise InvalidInputError(f"coefficient vector has shape {a.shape}, window needs ({window.size},)")
    _check_window(rep, window)
    w = sobolev_weight(rep, window.ks) ** alpha
    return float(np.sqrt(np.sum(np.abs(a) ** 2 * w)))
