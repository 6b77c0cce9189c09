"""Batched tridiagonal solves.

The contour quadratures need thousands of shifted solves ``(G - z_j) y = b``
with the same off-diagonals and only the main diagonal changing.  The Thomas
recursion below is vectorised over the leading (batch) axis so a whole block
of quadrature nodes is solved with ``N`` numpy operations.

No pivoting is done.  Callers pass ``check=True`` to get the residual of the
batch; when it is poor the batch is redone with a dense LU solve.
"""

from __future__ import annotations

import numpy as np


def tridiag_matvec(lower, diag, upper, v):
    """Apply the tridiagonal matrix to ``v``.

    ``diag`` has shape ``(..., N)``, ``lower``/``upper`` broadcast against
    ``(..., N-1)``; ``v`` is ``(..., N)`` or ``(..., N, K)``.
    """
    vec = v.ndim == diag.ndim
    if vec:
        v = v[..., None]
    d = diag[..., :, None]
    out = d * v
    if v.shape[-2] > 1:
        out[..., 1:, :] += lower[..., :, None] * v[..., :-1, :]
        out[..., :-1, :] += upper[..., :, None] * v[..., 1:, :]
    return out[..., 0] if vec else out


def _thomas(lower, diag, upper, rhs):
    n = diag.shape[-1]
    batch = np.broadcast_shapes(diag.shape[:-1], rhs.shape[:-2])
    dtype = np.result_type(lower, diag, upper, rhs, np.complex128)
    lower = np.broadcast_to(lower, batch + (n - 1,))
    upper = np.broadcast_to(upper, batch + (n - 1,))
    diag = np.broadcast_to(diag, batch + (n,))
    rhs = np.broadcast_to(rhs, batch + rhs.shape[-2:])

    cp = np.empty(batch + (max(n - 1, 0),), dtype=dtype)
    dp = np.empty(batch + rhs.shape[-2:], dtype=dtype)
    piv = diag[..., 0]
    min_piv = np.abs(piv)
    if n > 1:
        cp[..., 0] = upper[..., 0] / piv
    dp[..., 0, :] = rhs[..., 0, :] / piv[..., None]
    for i in range(1, n):
        piv = diag[..., i] - lower[..., i - 1] * cp[..., i - 1]
        min_piv = np.minimum(min_piv, np.abs(piv))
        if i < n - 1:
            cp[..., i] = upper[..., i] / piv
        dp[..., i, :] = (rhs[..., i, :] - lower[..., i - 1, None] * dp[..., i - 1, :]) / piv[..., None]
    for i in range(n - 2, -1, -1):
        dp[..., i, :] -= cp[..., i, None] * dp[..., i + 1, :]
    return dp, min_piv


def solve_tridiagonal(lower, diag, upper, rhs, check: bool = True, rtol: float = 1e-10):
    """Solve a batch of tridiagonal systems.

    Parameters
    ----------
    lower, upper : array_like, shape (..., N-1)
        Sub- and super-diagonal, broadcast over the batch.
    diag : array_like, shape (..., N)
    rhs : array_like, shape (..., N) or (..., N, K)
        Treated as a stack of column blocks when it has more axes than
        ``diag``; pass ``np.eye(N)[None]`` to invert a batch.
    check : bool
        Verify the relative residual and redo bad batch members densely.

    Returns
    -------
    ndarray with the shape of the broadcast ``rhs``.
    """
    lower = np.asarray(lower)
    diag = np.asarray(diag)
    upper = np.asarray(upper)
    rhs = np.asarray(rhs)
    # a right-hand side with more axes than ``diag`` is a stack of columns
    vec = rhs.ndim <= diag.ndim
    if vec:
        rhs = rhs[..., None]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        sol, min_piv = _thomas(lower, diag, upper, rhs)

    if check:
        res = tridiag_matvec(lower, diag, upper, sol) - rhs
        scale = (np.abs(diag).max(axis=-1) + np.abs(lower).max(initial=0.0) + np.abs(upper).max(initial=0.0))
        scale = np.broadcast_to(scale, res.shape[:-2])
        num = np.linalg.norm(res, axis=(-2, -1))
        den = scale * np.linalg.norm(sol, axis=(-2, -1)) + np.linalg.norm(np.broadcast_to(rhs, res.shape), axis=(-2, -1))
        bad = ~np.isfinite(num) | (num > rtol * den)
        if np.any(bad):
            sol = _dense_redo(lower, diag, upper, rhs, sol, bad)
    return sol[..., 0] if vec else sol


def _dense_redo(lower, diag, upper, rhs, sol, bad):
    n = diag.shape[-1]
    batch = sol.shape[:-2]
    diag_b = np.broadcast_to(diag, batch + (n,))
    low_b = np.broadcast_to(lower, batch + (n - 1,))
    up_b = np.broadcast_to(upper, batch + (n - 1,))
    rhs_b = np.broadcast_to(rhs, batch + rhs.shape[-2:])
    sol = np.array(sol)
    bad = np.broadcast_to(bad, batch)
    for idx in np.ndindex(batch):
        if not bad[idx]:
            continue
        a = np.diag(diag_b[idx]).astype(np.complex128)
        if n > 1:
            a += np.diag(low_b[idx], -1) + np.diag(up_b[idx], 1)
        sol[idx] = np.linalg.solve(a, rhs_b[idx])
    return sol
