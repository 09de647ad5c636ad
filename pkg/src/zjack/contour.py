"""Trapezoid quadrature on circles for contour integrals.

For a function analytic in an annulus around the contour, the N-point
trapezoid rule on a circle converges geometrically in N, so node doubling
with a two-refinement agreement test is both cheap and sharp.  All
integrals are normalized as (1/2 pi i) * loop integral, which on the circle
|w| = r reduces to the plain average of f(w_j) * w_j over the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .special import ConvergenceError

MAX_NODES = 2**18
MAX_NODES_2D = 2**12
POLE_GUARD = 0.05
_BLOCK_ROWS = 256


@dataclass(frozen=True)
class ContourSpec:
    """Circle |w| = radius, an initial node count, and a stop tolerance."""

    radius: float
    nodes: int = 64
    tol: float = 1e-12

    def __post_init__(self):
        if not (self.radius > 0.0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        n = self.nodes
        if n < 4 or (n & (n - 1)) != 0:
            raise ValueError(f"nodes must be a power of two >= 4, got {n}")
        if not (0.0 < self.tol < 1.0):
            raise ValueError(f"tol out of range: {self.tol}")


def nodes_on_circle(radius: float, n: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    return radius * np.exp(1j * theta)


def circle_integral(f, spec: ContourSpec) -> complex:
    """(1/2 pi i) * integral of f over the circle, f vectorized over nodes."""
    n = spec.nodes
    prev = None
    delta = float("nan")
    while n <= MAX_NODES:
        w = nodes_on_circle(spec.radius, n)
        val = complex(np.mean(f(w) * w))
        if prev is not None:
            delta = abs(val - prev)
            if delta <= spec.tol * max(1.0, abs(val)):
                return val
        prev = val
        n *= 2
    raise ConvergenceError(
        f"circle integral did not settle: radius={spec.radius}, "
        f"nodes={n // 2}, last delta={delta}"
    )


def double_circle_integral(f, spec1: ContourSpec, spec2: ContourSpec) -> complex:
    """(1/2 pi i)^2 * double integral over two circles.

    f(w1, w2) must broadcast over a meshgrid; w1 varies along axis 0.
    Both node counts are doubled together until two refinements agree.
    """
    n1, n2 = spec1.nodes, spec2.nodes
    tol = min(spec1.tol, spec2.tol)
    prev = None
    delta = float("nan")
    while n1 <= MAX_NODES_2D and n2 <= MAX_NODES_2D:
        w1 = nodes_on_circle(spec1.radius, n1)
        w2 = nodes_on_circle(spec2.radius, n2)[None, :]
        # Row blocks keep peak memory at O(_BLOCK_ROWS * n2) regardless of n1.
        acc = 0.0 + 0.0j
        for lo in range(0, n1, _BLOCK_ROWS):
            blk = w1[lo : lo + _BLOCK_ROWS, None]
            acc += complex(np.sum(f(blk, w2) * blk * w2))
        val = acc / (n1 * n2)
        if prev is not None:
            delta = abs(val - prev)
            if delta <= tol * max(1.0, abs(val)):
                return val
        prev = val
        n1 *= 2
        n2 *= 2
    raise ConvergenceError(
        f"double circle integral did not settle: radii=({spec1.radius}, "
        f"{spec2.radius}), nodes=({n1 // 2}, {n2 // 2}), last delta={delta}"
    )


def radius_outside_unit(xi: float) -> float:
    """Default radius for contours pinned to 1 < |w| < 1/sqrt(xi)."""
    _check_xi(xi)
    hi = 1.0 / np.sqrt(xi)
    r = 0.5 * (1.0 + hi)
    eps = 1e-3 * (hi - 1.0)
    return float(min(max(r, 1.0 + eps), hi - eps))


def radius_inside_unit(xi: float) -> float:
    """Default radius for contours pinned to sqrt(xi) < |w| < 1."""
    _check_xi(xi)
    lo = np.sqrt(xi)
    r = 0.5 * (lo + 1.0)
    eps = 1e-3 * (1.0 - lo)
    return float(min(max(r, lo + eps), 1.0 - eps))


def radius_free(xi: float) -> float:
    """Radius for contours only constrained to sqrt(xi) < |w| < 1/sqrt(xi).

    r = 1 equalizes the two geometric convergence ratios at sqrt(xi).
    """
    _check_xi(xi)
    return 1.0


def nodes_for_degree(degree: int, base: int = 64) -> int:
    """Power-of-2 node count that resolves w^degree without aliasing.

    A trapezoid rule with N nodes folds the monomial w^m onto w^(m mod N);
    when the integrand carries a high-degree monomial factor, successive
    doublings can alias the same large Fourier coefficient onto w^0 and
    fake convergence.  Starting above twice the degree prevents that.
    """
    need = max(base, 2 * abs(int(degree)) + base)
    n = base
    while n < need:
        n *= 2
    return n


def spec_for_degree(
    degree: int, radius: float, tol: float = 1e-12, two_dim: bool = False
) -> ContourSpec:
    """ContourSpec sized for an integrand carrying the monomial w^degree."""
    nodes = nodes_for_degree(degree)
    if two_dim:
        nodes = min(nodes, MAX_NODES_2D)
    return ContourSpec(radius=radius, nodes=nodes, tol=tol)


def guard_pair(r1: float, r2: float, xi: float) -> tuple[float, float]:
    """Nudge r1 away from the torus r1*r2 = 1 where 1/(w1 w2 - 1) blows up.

    The adjustment never moves a radius across |w| = 1 or outside the
    annulus (sqrt(xi), 1/sqrt(xi)), so domain constraints are preserved.
    """
    _check_xi(xi)
    if abs(r1 * r2 - 1.0) >= POLE_GUARD:
        return r1, r2
    lo, hi = np.sqrt(xi), 1.0 / np.sqrt(xi)
    for bump in (1.0 + 1.5 * POLE_GUARD, 1.0 / (1.0 + 1.5 * POLE_GUARD)):
        cand = r1 * bump
        same_side = (cand > 1.0) == (r1 > 1.0)
        if same_side and lo < cand < hi and abs(cand * r2 - 1.0) >= POLE_GUARD:
            return float(cand), r2
    raise ValueError(
        f"cannot separate contour radii ({r1}, {r2}) from the r1*r2=1 pole"
    )


def _check_xi(xi: float) -> None:
    if not (0.0 < xi < 1.0):
        raise ValueError(f"xi must lie in (0,1), got {xi}")
