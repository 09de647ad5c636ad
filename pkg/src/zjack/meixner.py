"""Discrete symplectic ensemble with the Meixner weight.

N particles on the nonnegative integers, repelling through the quartic
factor d^2 (d^2 - 1) in the pairwise differences d, each carrying the
one-body weight (beta)_x xi^x / x!.  Correlation functions are Pfaffians
of a 2x2 matrix kernel whose single scalar ingredient is computed here
along two independent routes:

* operator route: compose the explicit lattice operators E, K, D
  (S = EK + KE - EKDKE) as dense matrices on a truncated lattice;
* contour route: parity-split double loop integrals with Gauss
  hypergeometric factors.

The ensemble is the image of the half-integer matrix-kernel process at
z = 2N, z' = 2N + beta - 2 under the staircase bijection implemented in
``zmeasure_bijection``; the cross checks against :mod:`zjack.theta2` live
in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from .contour import (
    circle_integral,
    double_circle_integral,
    radius_inside_unit,
    radius_outside_unit,
    spec_for_degree,
)
from .partitions import YoungDiagram
from .pfaffian import assemble, pfaffian
from .special import ConvergenceError, ratio_2f1_nodes
from .theta1 import as_real

__all__ = [
    "MeixnerParams",
    "LatticeConfig",
    "meixner_weight",
    "meixner_poly",
    "meixner_norm_sq",
    "meixner_fn",
    "k2n",
    "d_plus_kernel",
    "d_minus_kernel",
    "e_apply",
    "s2n_operator",
    "s2n_contour",
    "s2n_antisym_contour",
    "kdk_contour",
    "ensemble_prob",
    "ensemble_tail",
    "meixner_correlation",
    "zmeasure_bijection",
    "weight_tail",
    "clear_caches",
    "LATTICE_CUTOFF",
]

LATTICE_CUTOFF = 400  # operator compositions truncate the lattice here
QUERY_MAX = 300       # queries keep this margin below the truncation edge
E_TERM_CAP = 5000     # upward E sums give up past this many terms
_E_CONSECUTIVE = 3
_CACHE = 1 << 16


@dataclass(frozen=True)
class MeixnerParams:
    """Particle count N, weight shape beta > 0, and mixing ratio xi in (0,1)."""

    N: int
    beta: float
    xi: float

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(
                f"N must be a positive integer, got {self.N!r}"
            )
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "xi", float(self.xi))
        if not (self.beta > 0.0):
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not (0.0 < self.xi < 1.0):
            raise ValueError(f"xi must lie in (0,1), got {self.xi}")

    @property
    def z(self) -> float:
        """First continuation parameter of the matching z-measure."""
        return 2.0 * self.N

    @property
    def zp(self) -> float:
        """Second continuation parameter: 2N + beta - 2."""
        return 2.0 * self.N + self.beta - 2.0


@dataclass(frozen=True)
class LatticeConfig:
    """A point configuration: strictly increasing nonnegative integers."""

    points: Tuple[int, ...]

    def __post_init__(self):
        pts = tuple(int(u) for u in self.points)
        object.__setattr__(self, "points", pts)
        if any(u < 0 for u in pts):
            raise ValueError(f"points must be nonnegative, got {pts}")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError(f"points must be strictly increasing, got {pts}")

    def __len__(self) -> int:
        return len(self.points)


def _check_lattice_point(u: int) -> int:
    if not isinstance(u, (int, np.integer)) or u < 0:
        raise ValueError(f"lattice points are nonnegative integers, got {u!r}")
    return int(u)


# ---------------------------------------------------------------------------
# weight and orthonormal functions


def meixner_weight(x: int, beta: float, xi: float) -> float:
    """One-body weight (beta)_x xi^x / x! at the lattice point x."""
    x = _check_lattice_point(x)
    if not (beta > 0.0):
        raise ValueError(f"beta must be positive, got {beta}")
    if not (0.0 < xi < 1.0):
        raise ValueError(f"xi must lie in (0,1), got {xi}")
    return math.exp(
        math.lgamma(beta + x) - math.lgamma(beta) - math.lgamma(x + 1.0)
        + x * math.log(xi)
    )


def _weight_vector(beta: float, xi: float, top: int) -> np.ndarray:
    w = np.empty(top + 1)
    w[0] = 1.0
    for u in range(top):
        w[u + 1] = w[u] * xi * (beta + u) / (u + 1.0)
    return w


def weight_tail(beta: float, xi: float, cutoff: int) -> float:
    """Upper bound on the weight mass beyond the cutoff.

    Past the cutoff the term ratio xi (beta + u) / (u + 1) is decreasing,
    so the mass is dominated by a geometric series started at cutoff + 1.
    """
    w = meixner_weight(cutoff + 1, beta, xi)
    q = xi * (beta + cutoff + 1.0) / (cutoff + 2.0)
    if q >= 1.0:
        raise ValueError(f"cutoff {cutoff} too small for a geometric bound")
    return w / (1.0 - q)


def meixner_poly(n: int, x: int, beta: float, xi: float) -> float:
    """Degree-n Meixner polynomial at x, hypergeometric normalization.

    M_0 = 1, and in general M_n(x) is the terminating Gauss series
    F(-n, -x; beta; 1 - 1/xi).  The three-term recurrence is marched in
    the degree at fixed x; marching along the lattice instead would ride
    the parasitic xi^{-x} solution and blow up within a few dozen steps.
    """
    if n < 0:
        raise ValueError(f"degree must be nonnegative, got {n}")
    x = _check_lattice_point(x)
    prev = 1.0
    if n == 0:
        return prev
    cur = 1.0 + x * (xi - 1.0) / (beta * xi)
    for k in range(1, n):
        prev, cur = cur, (
            ((xi - 1.0) * x + k + (k + beta) * xi) * cur - k * prev
        ) / (xi * (k + beta))
    return cur


def meixner_norm_sq(n: int, beta: float, xi: float) -> float:
    """Squared weighted norm of M_n: n! / ((beta)_n xi^n) * (1-xi)^{-beta}."""
    if n < 0:
        raise ValueError(f"degree must be nonnegative, got {n}")
    return math.exp(
        math.lgamma(n + 1.0)
        - (math.lgamma(beta + n) - math.lgamma(beta))
        - n * math.log(xi)
        - beta * math.log1p(-xi)
    )


def meixner_fn(n: int, x: int, beta: float, xi: float) -> float:
    """Orthonormalized function: (-1)^n M_n(x) sqrt(weight(x)) / ||M_n||."""
    sign = -1.0 if n % 2 else 1.0
    return (
        sign
        * meixner_poly(n, x, beta, xi)
        * math.sqrt(meixner_weight(x, beta, xi) / meixner_norm_sq(n, beta, xi))
    )


@lru_cache(maxsize=64)
def _mfun_matrix(mp: MeixnerParams, top: int) -> np.ndarray:
    """Rows k = 0..2N-1 of the orthonormal functions on 0..top.

    Marches the three-term recurrence in the degree, vectorized over the
    lattice (the degree direction is the numerically stable one).
    """
    beta, xi = mp.beta, mp.xi
    kmax = 2 * mp.N
    xs = np.arange(top + 1, dtype=float)
    polys = np.empty((kmax, top + 1))
    polys[0] = 1.0
    if kmax >= 2:
        polys[1] = 1.0 + xs * (xi - 1.0) / (beta * xi)
    for k in range(1, kmax - 1):
        polys[k + 1] = (
            ((xi - 1.0) * xs + k + (k + beta) * xi) * polys[k]
            - k * polys[k - 1]
        ) / (xi * (k + beta))
    w = _weight_vector(beta, xi, top)
    ks = np.arange(kmax)
    norms = np.array([meixner_norm_sq(int(k), beta, xi) for k in ks])
    signs = np.where(ks % 2 == 0, 1.0, -1.0)
    return signs[:, None] * polys * np.sqrt(w[None, :] / norms[:, None])


def _top_for(u: int) -> int:
    """Cache-friendly lattice size covering the query point u."""
    if u < LATTICE_CUTOFF:
        return LATTICE_CUTOFF
    return ((u // 100) + 1) * 100


def k2n(x: int, y: int, mp: MeixnerParams) -> float:
    """Projection kernel onto the span of the first 2N functions."""
    x = _check_lattice_point(x)
    y = _check_lattice_point(y)
    m = _mfun_matrix(mp, _top_for(max(x, y)))
    return float(m[:, x] @ m[:, y])


# ---------------------------------------------------------------------------
# lattice operators


def d_plus_kernel(x: int, y: int, mp: MeixnerParams) -> float:
    """Up-shift kernel: (1/sqrt(xi)) sqrt((1+x)/(beta+x)) at y = x + 1."""
    x = _check_lattice_point(x)
    y = _check_lattice_point(y)
    if y != x + 1:
        return 0.0
    return math.sqrt((1.0 + x) / (mp.beta + x)) / math.sqrt(mp.xi)


def d_minus_kernel(x: int, y: int, mp: MeixnerParams) -> float:
    """Down-shift kernel: (1/sqrt(xi)) sqrt(x/(beta+x-1)) at y = x - 1."""
    x = _check_lattice_point(x)
    y = _check_lattice_point(y)
    if x == 0 or y != x - 1:
        return 0.0
    return math.sqrt(x / (mp.beta + x - 1.0)) / math.sqrt(mp.xi)


def _up_ratio(beta: float, x: int, l: int) -> float:
    """Squared-weight step for the upward ladder at even x, from l-1 to l."""
    return (
        (beta + x + 2.0 * l)
        * (x + 2.0 * l)
        / ((1.0 + x + 2.0 * l) * (beta + x + 2.0 * l - 1.0))
    )


def _down_ratio(beta: float, x: int, l: int) -> float:
    """Squared-weight step for the downward ladder at odd x, from l-1 to l."""
    num = (1.0 - beta - x + 2.0 * l) * (1.0 - x + 2.0 * (l - 1))
    den = (2.0 * l - x) * (2.0 - beta - x + 2.0 * (l - 1))
    if den == 0.0:
        raise ArithmeticError(f"vanishing ladder denominator at x={x}, l={l}")
    return num / den


def e_apply(f: Callable[[int], float], x: int, mp: MeixnerParams,
            tol: float = 1e-14) -> float:
    """Apply the summation operator E to the lattice function f at x.

    Odd x gives a finite downward sum whose last term sits at 0; even x an
    infinite upward sum, truncated after a few consecutive terms fall below
    tol times the largest one seen.
    """
    x = _check_lattice_point(x)
    beta = mp.beta
    sq = math.sqrt(mp.xi)
    if x % 2 == 1:
        total = 0.0
        wsq = (beta + x - 1.0) / x
        for l in range((x + 1) // 2):
            total += math.sqrt(wsq) * f(x - 2 * l - 1)
            if 2 * (l + 1) < x + 1:
                wsq *= _down_ratio(beta, x, l + 1)
                if wsq < 0.0:
                    raise ArithmeticError(
                        f"negative ladder weight {wsq} at x={x}, l={l + 1}"
                    )
        return sq * total
    total = 0.0
    max_term = 0.0
    small = 0
    wsq = (beta + x) / (1.0 + x)
    for l in range(E_TERM_CAP):
        term = math.sqrt(wsq) * f(x + 2 * l + 1)
        total += term
        max_term = max(max_term, abs(term))
        if abs(term) <= tol * max(max_term, 1e-300):
            small += 1
            if small >= _E_CONSECUTIVE and l >= _E_CONSECUTIVE:
                return -sq * total
        else:
            small = 0
        wsq *= _up_ratio(beta, x, l + 1)
    raise ConvergenceError(f"upward E sum did not settle within {E_TERM_CAP} terms")


@lru_cache(maxsize=16)
def _operator_matrices(mp: MeixnerParams, top: int):
    """Dense E, K, D = D+ - D- on the truncated lattice 0..top.

    E is exactly antisymmetric inside the truncation window (the upward
    and downward ladder weights coincide entry by entry); rows near the
    top edge lose their upward tails, which matters only through factors
    that are themselves weight-suppressed there.
    """
    beta, xi = mp.beta, mp.xi
    size = top + 1
    sq = math.sqrt(xi)
    e = np.zeros((size, size))
    for u in range(size):
        if u % 2 == 0:
            wsq = (beta + u) / (1.0 + u)
            l = 0
            while u + 2 * l + 1 <= top:
                e[u, u + 2 * l + 1] = -sq * math.sqrt(wsq)
                l += 1
                wsq *= _up_ratio(beta, u, l)
        else:
            wsq = (beta + u - 1.0) / u
            for l in range((u + 1) // 2):
                e[u, u - 2 * l - 1] = sq * math.sqrt(wsq)
                if 2 * (l + 1) < u + 1:
                    wsq *= _down_ratio(beta, u, l + 1)
    mf = _mfun_matrix(mp, top)
    k = mf.T @ mf
    d = np.zeros((size, size))
    for u in range(size - 1):
        d[u, u + 1] = d_plus_kernel(u, u + 1, mp)
    for u in range(1, size):
        d[u, u - 1] = -d_minus_kernel(u, u - 1, mp)
    return e, k, d


@lru_cache(maxsize=16)
def _s2n_matrix(mp: MeixnerParams, top: int) -> np.ndarray:
    e, k, d = _operator_matrices(mp, top)
    ek = e @ k
    ke = k @ e
    return ek + ke - ek @ d @ ke


def s2n_operator(x: int, y: int, mp: MeixnerParams) -> float:
    """Kernel of S = EK + KE - EKDKE by dense lattice composition."""
    x = _check_lattice_point(x)
    y = _check_lattice_point(y)
    if max(x, y) > QUERY_MAX:
        raise ValueError(
            f"operator route keeps points at most {QUERY_MAX} "
            f"(lattice truncated at {LATTICE_CUTOFF})"
        )
    return float(_s2n_matrix(mp, LATTICE_CUTOFF)[x, y])


# ---------------------------------------------------------------------------
# contour route


def _env_x(w: np.ndarray, mp: MeixnerParams) -> np.ndarray:
    """(1 - sqrt(xi) w)^{-(2N+beta-1)} (1 - sqrt(xi)/w)^{2N}."""
    sq = math.sqrt(mp.xi)
    nn = 2.0 * mp.N
    return np.exp(
        -(nn + mp.beta - 1.0) * np.log1p(-sq * w) + nn * np.log1p(-sq / w)
    )


def _env_y(w: np.ndarray, mp: MeixnerParams) -> np.ndarray:
    """(1 - sqrt(xi) w)^{-2N} (1 - sqrt(xi)/w)^{2N+beta-1}."""
    sq = math.sqrt(mp.xi)
    nn = 2.0 * mp.N
    return np.exp(
        -nn * np.log1p(-sq * w) + (nn + mp.beta - 1.0) * np.log1p(-sq / w)
    )


def _fx_nodes(x: int, mp: MeixnerParams, w: np.ndarray) -> np.ndarray:
    """x-side hypergeometric factor; the odd case subtracts its l=0 term."""
    if x % 2 == 0:
        return ratio_2f1_nodes((x + 2.0) / 2.0, (x + mp.beta + 1.0) / 2.0, w ** -2)
    return ratio_2f1_nodes(-(mp.beta + x - 1.0) / 2.0, -x / 2.0, w ** 2) - 1.0


def _fy_nodes(y: int, mp: MeixnerParams, w: np.ndarray) -> np.ndarray:
    """y-side factor; even case subtracts l=0, odd case terminates."""
    if y % 2 == 0:
        return ratio_2f1_nodes((y + mp.beta) / 2.0, (y + 1.0) / 2.0, w ** -2) - 1.0
    return ratio_2f1_nodes((1.0 - y) / 2.0, (2.0 - mp.beta - y) / 2.0, w ** 2)


def _gamma_dress(x: int, y: int, beta: float) -> float:
    """sqrt(Gamma(x+1) Gamma(y+beta) / (Gamma(x+beta) Gamma(y+1)))."""
    return math.exp(
        0.5
        * (
            math.lgamma(x + 1.0)
            + math.lgamma(y + beta)
            - math.lgamma(x + beta)
            - math.lgamma(y + 1.0)
        )
    )


@lru_cache(maxsize=_CACHE)
def _s2n_contour_cached(x: int, y: int, mp: MeixnerParams) -> float:
    beta, xi = mp.beta, mp.xi
    nn = 2 * mp.N
    px = x - nn + 2  # denominator power of the first variable
    py = y - nn + 1
    sx = -1.0 if x % 2 == 0 else 1.0
    rel = -1.0 if y % 2 == 0 else 1.0
    if x % 2 == 0:
        # both circles outside: the w1*w2 = 1 pole stays on the inner side
        r1 = radius_outside_unit(xi)
        r2 = radius_outside_unit(xi)
    else:
        # the odd-x series converges only for |w1| < 1, but the pole must
        # stay on the same side as in the even case (r1 r2 > 1), so the
        # second circle compensates by moving further out
        r1 = radius_inside_unit(xi)
        r2 = 0.5 * (1.0 / r1 + 1.0 / math.sqrt(xi))

    def coupled(w1, w2):
        return (
            _env_x(w1, mp)
            * _env_y(w2, mp)
            / (w1 * w2 - 1.0)
            * _fx_nodes(x, mp, w1)
            * w1 ** (-px)
            * w2 ** (-py)
        )

    i1 = double_circle_integral(
        coupled,
        spec_for_degree(px, r1, two_dim=True),
        spec_for_degree(py, r2, two_dim=True),
    )
    jx = circle_integral(
        lambda w: _env_x(w, mp) * _fx_nodes(x, mp, w) * w ** (-px),
        spec_for_degree(px, r1),
    )
    # the factorized y integral has no pole coupling, so its circle only
    # needs to accommodate the series: outside for even y, inside for odd
    ry = radius_outside_unit(xi) if y % 2 == 0 else radius_inside_unit(xi)
    jy = circle_integral(
        lambda w: _env_y(w, mp) * _fy_nodes(y, mp, w) * w ** (-py),
        spec_for_degree(py, ry),
    )
    val = math.sqrt(xi) * _gamma_dress(x, y, beta) * sx * (i1 + rel * jx * jy)
    return as_real(val, f"s2n_contour({x}, {y})")


def s2n_contour(x: int, y: int, mp: MeixnerParams) -> float:
    """Kernel of S by the parity-split double loop integrals."""
    return _s2n_contour_cached(
        _check_lattice_point(x), _check_lattice_point(y), mp
    )


@lru_cache(maxsize=_CACHE)
def _kdk_contour_cached(x: int, y: int, mp: MeixnerParams) -> float:
    beta, xi = mp.beta, mp.xi
    nn = 2 * mp.N
    g = _gamma_dress(x, y, beta)
    r = radius_outside_unit(xi)

    def first(w1, w2):
        return (
            _env_y(w1, mp)
            * _env_x(w2, mp)
            / (w1 * w2 - 1.0)
            * w1 ** (-(x - nn + 2))
            * w2 ** (-(y - nn + 1))
        )

    def second(w1, w2):
        return (
            _env_x(w1, mp)
            * _env_y(w2, mp)
            / (w1 * w2 - 1.0)
            * w1 ** (-(x - nn + 1))
            * w2 ** (-(y - nn + 2))
        )

    ia = double_circle_integral(
        first,
        spec_for_degree(x - nn + 2, r, two_dim=True),
        spec_for_degree(y - nn + 1, r, two_dim=True),
    )
    ib = double_circle_integral(
        second,
        spec_for_degree(x - nn + 1, r, two_dim=True),
        spec_for_degree(y - nn + 2, r, two_dim=True),
    )
    return as_real((ia / g - g * ib) / math.sqrt(xi), f"kdk_contour({x}, {y})")


def kdk_contour(x: int, y: int, mp: MeixnerParams) -> float:
    """Kernel of K D K by its closed two-loop form.

    Both circles sit outside the unit circle; the two summands swap the
    envelope roles and the power shift between the variables, which makes
    the antisymmetry visible term against term.
    """
    return _kdk_contour_cached(
        _check_lattice_point(x), _check_lattice_point(y), mp
    )


def _first_slot_nodes(x: int, mp: MeixnerParams, w: np.ndarray) -> np.ndarray:
    """Generating function of the E rows against the weighted power basis.

    Summing E(x, .) sqrt(Gamma(. + beta) / Gamma(. + 1)) w^{-.} in closed
    form: the square roots of consecutive ladder weights collapse to a
    rational term ratio, leaving a Gauss series (infinite upward for even
    x, a Laurent polynomial downward for odd x).
    """
    beta = mp.beta
    sq = math.sqrt(mp.xi)
    gx = math.exp(0.5 * (math.lgamma(x + beta) - math.lgamma(x + 1.0)))
    if x % 2 == 0:
        head = -sq * gx * (x + beta) / (x + 1.0)
        series = ratio_2f1_nodes((x + beta + 2.0) / 2.0, (x + 3.0) / 2.0, w ** -2)
        return head * series * w ** (-(x + 1))
    series = ratio_2f1_nodes(-(x - 1.0) / 2.0, -(x + beta - 2.0) / 2.0, w ** 2)
    return sq * gx * series * w ** (-(x - 1))


def _second_slot_nodes(y: int, mp: MeixnerParams, w: np.ndarray) -> np.ndarray:
    """Generating function of the E columns against the inverse-weighted basis.

    Same collapse for E(., y) sqrt(Gamma(. + 1) / Gamma(. + beta)) w^{-.}.
    The odd-y sum runs over finitely many ladder rows, so the series is
    truncated at the ladder edge by hand; the untruncated Gauss series
    would keep going and describes a different function.
    """
    beta = mp.beta
    sq = math.sqrt(mp.xi)
    gy = math.exp(0.5 * (math.lgamma(y + beta) - math.lgamma(y + 1.0)))
    if y % 2 == 0:
        series = ratio_2f1_nodes((y + 2.0) / 2.0, (y + beta + 1.0) / 2.0, w ** -2)
        return sq / gy * series * w ** (-(y + 1))
    head = -sq * (beta + y - 1.0) / (y * gy)
    alpha = -(beta + y - 3.0) / 2.0
    gamma = -(y - 2.0) / 2.0
    total = np.ones_like(np.asarray(w, dtype=complex))
    coef = 1.0
    pw = np.ones_like(total)
    for l in range(1, (y - 1) // 2 + 1):
        coef *= (alpha + l - 1.0) / (gamma + l - 1.0)
        pw = pw * w * w
        total = total + coef * pw
    return head * total * w ** (-(y - 1))


@lru_cache(maxsize=_CACHE)
def _s2n_onesided(x: int, y: int, mp: MeixnerParams) -> complex:
    """One-sided kernel whose antisymmetrization recovers S.

    S splits as (KE - EtE) minus its transpose, where t is the one-sided
    half of the K D K kernel.  Both pieces are double loop integrals with
    the E sums folded into the slot factors; everything converges with
    both circles outside the unit circle.
    """
    nn = 2 * mp.N
    xi = mp.xi
    r = radius_outside_unit(xi)
    gx = math.exp(0.5 * (math.lgamma(x + mp.beta) - math.lgamma(x + 1.0)))

    def ke_part(w1, w2):
        return (
            _env_x(w1, mp)
            * _env_y(w2, mp)
            / (w1 * w2 - 1.0)
            * _first_slot_nodes(y, mp, w2)
            * w1 ** (-(x - nn + 1))
            * w2 ** (nn - 1)
        )

    def ete_part(w1, w2):
        return (
            _env_y(w1, mp)
            * _env_x(w2, mp)
            / (w1 * w2 - 1.0)
            * _first_slot_nodes(x, mp, w1)
            * _second_slot_nodes(y, mp, w2)
            * w1 ** (nn - 2)
            * w2 ** (nn - 1)
        )

    ke = double_circle_integral(
        ke_part,
        spec_for_degree(x - nn + 1, r, two_dim=True),
        spec_for_degree(max(abs(y - nn + 2), nn), r, two_dim=True),
    )
    ete = double_circle_integral(
        ete_part,
        spec_for_degree(max(abs(x - nn + 2), nn), r, two_dim=True),
        spec_for_degree(max(abs(y - nn + 2), nn), r, two_dim=True),
    )
    return -ke / gx - ete / math.sqrt(xi)


def s2n_antisym_contour(x: int, y: int, mp: MeixnerParams) -> float:
    """S as the difference of the one-sided kernel at swapped arguments."""
    x = _check_lattice_point(x)
    y = _check_lattice_point(y)
    val = _s2n_onesided(x, y, mp) - _s2n_onesided(y, x, mp)
    return as_real(val, f"s2n_antisym_contour({x}, {y})")


# ---------------------------------------------------------------------------
# ensemble probabilities and correlations


def _interaction(config: Sequence[int]) -> float:
    v = 1.0
    for a, b in combinations(config, 2):
        d2 = float(b - a) ** 2
        v *= d2 * (d2 - 1.0)
    return v


def _unnormalized(config: Sequence[int], w: np.ndarray) -> float:
    v = _interaction(config)
    for u in config:
        v *= w[u]
    return v


@lru_cache(maxsize=32)
def _partition_function(mp: MeixnerParams, x_max: int) -> float:
    n = mp.N
    if n > 3:
        raise ValueError(f"configuration enumeration is capped at 3 particles, got {n}")
    w = _weight_vector(mp.beta, mp.xi, x_max)
    return sum(
        _unnormalized(config, w) for config in combinations(range(x_max + 1), n)
    )


def ensemble_tail(mp: MeixnerParams, x_max: int) -> float:
    """Relative bound on the probability mass of configurations past x_max.

    A configuration whose largest point is m contributes at most
    weight(m) m^{2n(n-1)} (interaction) times m^{n-1}/(n-1)! (choices)
    times the peak one-body weight per remaining particle; the sum over
    m > x_max converges geometrically and is evaluated directly.
    """
    n, beta, xi = mp.N, mp.beta, mp.xi
    w_all = _weight_vector(beta, xi, x_max)
    w_peak = float(np.max(w_all))
    fixed = w_peak ** (n - 1) / math.gamma(n)
    power = 2 * n * (n - 1) + (n - 1)
    total = 0.0
    w = meixner_weight(x_max + 1, beta, xi)
    m = x_max + 1
    while True:
        term = w * float(m) ** power * fixed
        total += term
        if term <= 1e-18 * max(total, 1e-300) or m > x_max + 100_000:
            break
        w *= xi * (beta + m) / (m + 1.0)
        m += 1
    return total / _partition_function(mp, x_max)


def ensemble_prob(c: LatticeConfig, mp: MeixnerParams, x_max: int) -> float:
    """Probability of the exact configuration c under the N-point ensemble.

    The normalization is enumerated over all configurations within x_max;
    ensemble_tail reports what that truncation leaves out.
    """
    if not isinstance(c, LatticeConfig):
        c = LatticeConfig(points=tuple(c))
    if len(c) != mp.N:
        raise ValueError(
            f"configuration has {len(c)} points, ensemble wants {mp.N}"
        )
    if c.points and c.points[-1] > x_max:
        raise ValueError(f"points exceed x_max={x_max}: {c.points}")
    w = _weight_vector(mp.beta, mp.xi, x_max)
    return _unnormalized(c.points, w) / _partition_function(mp, x_max)


def _corr_block(s: np.ndarray, x: int, y: int, mp: MeixnerParams) -> np.ndarray:
    dp_x = d_plus_kernel(x, x + 1, mp)
    dm_y = d_minus_kernel(y + 1, y, mp)
    return np.array(
        [
            [s[x, y], -s[x, y + 1] * dm_y],
            [-dp_x * s[x + 1, y], dp_x * s[x + 1, y + 1] * dm_y],
        ]
    )


def meixner_correlation(points: Sequence[int], mp: MeixnerParams) -> float:
    """Correlation rho_n: Pfaffian of the assembled 2n x 2n block matrix."""
    pts = [_check_lattice_point(u) for u in points]
    if len(set(pts)) != len(pts):
        raise ValueError(f"points must be distinct, got {pts}")
    if not pts:
        raise ValueError("need at least one point")
    if max(pts) + 1 > QUERY_MAX:
        raise ValueError(f"points must stay at most {QUERY_MAX - 1}")
    s = _s2n_matrix(mp, LATTICE_CUTOFF)
    n = len(pts)
    blocks: Dict[Tuple[int, int], np.ndarray] = {}
    for i in range(n):
        for j in range(i, n):
            blocks[(i, j)] = _corr_block(s, pts[i], pts[j], mp)
    return pfaffian(assemble(blocks, n))


def zmeasure_bijection(lam: YoungDiagram, mp: MeixnerParams) -> LatticeConfig:
    """Particle positions of a diagram with at most N rows.

    Row i of the diagram lands at row length - 2i + 2N; rows beyond the
    diagram contribute the bare staircase, and the result is re-read in
    increasing order.
    """
    n = mp.N
    if lam.length > n:
        raise ValueError(
            f"diagram has {lam.length} rows; the ensemble tracks {n} particles"
        )
    pts = tuple(lam.row(i) - 2 * i + 2 * n for i in range(n, 0, -1))
    return LatticeConfig(points=pts)


def clear_caches() -> None:
    """Drop all memoized lattice matrices and contour values."""
    _mfun_matrix.cache_clear()
    _operator_matrices.cache_clear()
    _s2n_matrix.cache_clear()
    _s2n_contour_cached.cache_clear()
    _kdk_contour_cached.cache_clear()
    _s2n_onesided.cache_clear()
    _partition_function.cache_clear()
