"""Pfaffians of real skew-symmetric matrices and 2x2-block assembly.

The workhorse is Parlett-Reid elimination with partial pivoting, which
tridiagonalizes A by a congruence A -> M A M^T built from Gauss vectors.
Each congruence multiplies the Pfaffian by det(M), so tracking the pivots
and row swaps gives Pf(A) in O(n^3).  A cofactor-expansion version is kept
for cross-checks on small matrices.
"""

from __future__ import annotations

import numpy as np

SKEW_TOL = 1e-9
PIVOT_FLOOR = 1e-300


class SkewMatrix:
    """Dense real skew-symmetric matrix of even dimension.

    Construction checks |A + A^T| against `tol` and then stores the exact
    skew part (A - A^T)/2 with a hard-zeroed diagonal, so downstream code
    can rely on entries(i,j) == -entries(j,i) to the last bit.
    """

    def __init__(self, entries, tol: float = SKEW_TOL):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"square matrix required, got shape {a.shape}")
        if a.shape[0] % 2 != 0:
            raise ValueError(f"even dimension required, got {a.shape[0]}")
        resid = np.max(np.abs(a + a.T)) if a.size else 0.0
        scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
        if resid > tol * scale:
            raise ValueError(f"matrix is not skew-symmetric: residual {resid:.3e}")
        m = 0.5 * (a - a.T)
        np.fill_diagonal(m, 0.0)
        self.mat = m
        self.dim = a.shape[0]

    def __repr__(self) -> str:
        return f"SkewMatrix(dim={self.dim})"


def pfaffian(m) -> float:
    """Pfaffian via Parlett-Reid elimination with partial pivoting."""
    a = m.mat.copy() if isinstance(m, SkewMatrix) else SkewMatrix(m).mat.copy()
    n = a.shape[0]
    if n == 0:
        return 1.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        col = np.abs(a[k + 1 :, k])
        kp = k + 1 + int(np.argmax(col))
        if abs(a[kp, k]) < PIVOT_FLOOR:
            # the whole column is (numerically) zero: singular, Pf = 0
            return 0.0
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2 :] / a[k, k + 1]
            v = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, v) - np.outer(v, tau)
    return pf


def pfaffian_expand(m) -> float:
    """Cofactor expansion along the first row; oracle for dim <= 8."""
    a = m.mat if isinstance(m, SkewMatrix) else SkewMatrix(m).mat
    n = a.shape[0]
    if n > 8:
        raise ValueError("expansion oracle capped at dim 8")

    def rec(b: np.ndarray) -> float:
        d = b.shape[0]
        if d == 0:
            return 1.0
        if d == 2:
            return float(b[0, 1])
        total = 0.0
        for j in range(1, d):
            if b[0, j] == 0.0:
                continue
            keep = [i for i in range(d) if i not in (0, j)]
            minor = b[np.ix_(keep, keep)]
            total += (-1.0) ** (j - 1) * b[0, j] * rec(minor)
        return total

    return rec(a)


def assemble(blocks: dict, n: int, tol: float = SKEW_TOL) -> SkewMatrix:
    """Tile 2x2 blocks into the 2n x 2n skew matrix Pf operates on.

    `blocks[(i, j)]` holds the 2x2 block for point pair (i, j), 0-based,
    required for all i <= j.  The (j, i) block is the negated transpose;
    when a caller supplies one anyway it is checked against that rule.
    """
    a = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(i, n):
            try:
                b = np.asarray(blocks[(i, j)], dtype=float)
            except KeyError:
                raise ValueError(f"missing block ({i}, {j})") from None
            if b.shape != (2, 2):
                raise ValueError(f"block ({i}, {j}) has shape {b.shape}")
            a[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = b
            if i != j:
                a[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] = -b.T
            if i != j and (j, i) in blocks:
                given = np.asarray(blocks[(j, i)], dtype=float)
                resid = float(np.max(np.abs(given + b.T)))
                if resid > tol * max(1.0, float(np.max(np.abs(b)))):
                    raise ValueError(
                        f"block ({j}, {i}) breaks skew symmetry: residual {resid:.3e}"
                    )
    return SkewMatrix(a, tol=tol)
