"""Pfaffian correlation kernel on the half-integer lattice at theta = 2.

Everything here is built on top of the theta = 1 kernel K and its
eigenfunctions psi_a.  A one-sided summation operator E turns K into the
off-diagonal entry S of a 2x2 matrix kernel whose Pfaffian minors give the
correlation functions.  Three independent routes to S are provided:

* ``s_entry``       - E applied to the series form of K (the workhorse),
* ``s_antisym_contour`` - a double contour integral, manifestly antisymmetric,
* ``s_via_iab``     - a decomposition into a double integral I plus a product
                      of single integrals A and B.

They must agree to high precision; the test suite holds them to 1e-8.
A separate short-cut kernel exists for the degenerate parameter family
zp = z - 1 (``degenerate_kernel``), where all square-root normalizers drop
out and S collapses to one elementary double integral.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from .contour import (
    ContourSpec,
    circle_integral,
    double_circle_integral,
    guard_pair,
    radius_inside_unit,
    radius_outside_unit,
    spec_for_degree,
)
from .partitions import HalfInt, ZParams
from .pfaffian import SkewMatrix, assemble, pfaffian
from .special import ConvergenceError, log_gamma, ratio_2f1_nodes
from .theta1 import as_real, k_series, psi_series, require_real_pair

E_TOL = 1e-12          # relative truncation threshold for the E sums
E_CONSECUTIVE = 3      # stop after this many consecutive negligible terms
E_CAP = 100_000        # hard cap on summation length
_CACHE = 1 << 16

__all__ = [
    "KernelBlock",
    "CorrelationQuery",
    "e_transform_k",
    "e_transform_psi",
    "s_entry",
    "s_plain",
    "kernel_block",
    "correlation",
    "rho1",
    "s_antisym_contour",
    "e_k_contour",
    "e_psi_contour",
    "iab_functions",
    "s_via_iab",
    "degenerate_s",
    "degenerate_kernel",
    "degenerate_correlation",
    "clear_caches",
]


# ---------------------------------------------------------------------------
# containers


@dataclass(frozen=True)
class KernelBlock:
    """The four scalar entries of the 2x2 matrix kernel at one point pair.

    ``as_matrix`` applies the sign convention of the Pfaffian formula:
    rows/columns are ordered (S, SD-) x (S, D+S), and the off-diagonal
    entries enter with a minus sign.
    """

    s: float
    sd_minus: float
    d_plus_s: float
    d_plus_s_d_minus: float

    def as_matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.s, -self.sd_minus],
                [-self.d_plus_s, self.d_plus_s_d_minus],
            ]
        )


@dataclass(frozen=True)
class CorrelationQuery:
    """A request for rho_n at a tuple of distinct lattice points."""

    points: Tuple[HalfInt, ...]
    params: ZParams

    def __post_init__(self) -> None:
        if len(self.points) == 0:
            raise ValueError("need at least one point")
        if len(set(self.points)) != len(self.points):
            raise ValueError("points must be distinct")
        _require_theta2(self.params)


def _require_theta2(p: ZParams) -> None:
    if p.theta != 2:
        raise ValueError(f"matrix kernel requires theta=2, got {p.theta}")


def _feed(p: ZParams) -> ZParams:
    """Parameters forwarded to the theta=1 building blocks."""
    return ZParams(z=p.z, zp=p.zp, xi=p.xi, theta=1)


# ---------------------------------------------------------------------------
# the E sums


def _sqrt_weight_sum(
    term: Callable[[int], float],
    num: Tuple[complex, complex],
    den: Tuple[complex, complex],
    lmin: int,
    tol: float = E_TOL,
) -> float:
    """sum_{l >= lmin} w_l * term(l) with squared weights built recursively.

    w_l^2 = prod_{j=0}^{l-1} (num1 + 2j)(num2 + 2j) / ((den1 + 2j)(den2 + 2j)),
    an empty product for l = 0.  The radicand is checked to stay nonnegative;
    an exact zero factor terminates the sum (every later weight vanishes too).
    Truncation: E_CONSECUTIVE consecutive terms below tol * max|term|.
    """
    n1, n2 = num
    d1, d2 = den
    wsq = 1.0
    for j in range(lmin):
        step = (n1 + 2 * j) * (n2 + 2 * j) / ((d1 + 2 * j) * (d2 + 2 * j))
        wsq *= as_real(step, "E weight update")
        if wsq == 0.0:
            return 0.0
    if wsq < 0.0:
        raise ArithmeticError(f"negative E weight {wsq} at l={lmin}")

    total = 0.0
    max_term = 0.0
    small = 0
    l = lmin
    while l < lmin + E_CAP:
        t = math.sqrt(wsq) * term(l)
        total += t
        max_term = max(max_term, abs(t))
        if abs(t) <= tol * max(max_term, 1e-300):
            small += 1
            if small >= E_CONSECUTIVE and l >= lmin + E_CONSECUTIVE:
                return total
        else:
            small = 0
        step = (n1 + 2 * l) * (n2 + 2 * l) / ((d1 + 2 * l) * (d2 + 2 * l))
        wsq *= as_real(step, "E weight update")
        if wsq == 0.0:
            return total
        if wsq < 0.0:
            raise ArithmeticError(f"negative E weight {wsq} at l={l + 1}")
        l += 1
    raise ConvergenceError(f"E sum did not settle within {E_CAP} terms")


@lru_cache(maxsize=_CACHE)
def _e_k_cached(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    z, zp = p.z, p.zp
    q = _feed(p)
    xv = x.value
    if x.parity == "even":
        return -_sqrt_weight_sum(
            lambda l: k_series(HalfInt(x.k + 2 * l + 1), y, q),
            (xv + z + 1.5, xv + zp + 1.5),
            (xv + z + 2.5, xv + zp + 2.5),
            lmin=0,
        )
    return _sqrt_weight_sum(
        lambda l: k_series(HalfInt(x.k - 2 * l + 1), y, q),
        (-xv - z - 0.5, -xv - zp - 0.5),
        (-xv - z + 0.5, -xv - zp + 0.5),
        lmin=1,
    )


def e_transform_k(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    """(EK)(x; y): the one-sided summation operator acting on K in x."""
    _require_theta2(p)
    require_real_pair(p)
    return _e_k_cached(x, y, p)


def _sign_index(sign: float) -> HalfInt:
    if sign == 0.5:
        return HalfInt(0)
    if sign == -0.5:
        return HalfInt(-1)
    raise ValueError(f"sign must be +0.5 or -0.5, got {sign}")


@lru_cache(maxsize=_CACHE)
def _e_psi_cached(a: HalfInt, x: HalfInt, p: ZParams) -> float:
    z, zp = p.z, p.zp
    q = _feed(p)
    xv = x.value
    if x.parity == "even":
        return -_sqrt_weight_sum(
            lambda l: psi_series(a, HalfInt(x.k + 2 * l + 1), q),
            (xv + z + 1.5, xv + zp + 1.5),
            (xv + z + 2.5, xv + zp + 2.5),
            lmin=0,
        )
    return _sqrt_weight_sum(
        lambda l: psi_series(a, HalfInt(x.k - 2 * l + 1), q),
        (-xv - z - 0.5, -xv - zp - 0.5),
        (-xv - z + 0.5, -xv - zp + 0.5),
        lmin=1,
    )


def e_transform_psi(sign: float, x: HalfInt, p: ZParams) -> float:
    """(E psi_{sign})(x) for sign = +1/2 or -1/2."""
    _require_theta2(p)
    require_real_pair(p)
    return _e_psi_cached(_sign_index(sign), x, p)


# ---------------------------------------------------------------------------
# S and the matrix kernel


@lru_cache(maxsize=_CACHE)
def _s_entry_cached(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    if p.admissible():
        return _s_entry_series(x, y, p)
    # At continuation parameters (integer z, or mismatched intervals as in
    # the degenerate family) the series weights lose positivity and the
    # per-term square roots acquire phases.  The double contour form keeps
    # every branch choice inside complex log-gammas, so use it instead.
    val = _stilde_cached(x, y, p) - _stilde_cached(y, x, p)
    return as_real(val, f"s_entry({x}, {y}) [contour]", tol=1e-9)


def _s_entry_series(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    z, zp = p.z, p.zp
    yv = y.value
    rad = as_real((z + yv + 0.5) * (zp + yv + 0.5), f"S radicand at y={y}")
    if rad < 0.0:
        raise ArithmeticError(
            f"negative radicand (z+y+1/2)(zp+y+1/2)={rad} at y={y}; "
            "S is not defined this deep for these parameters"
        )
    zz = as_real(z * zp, "z*zp")
    if zz < 0.0:
        raise ArithmeticError(f"negative product z*zp={zz}")
    val = math.sqrt(rad) * _e_k_cached(x, y, p)
    val += (
        math.sqrt(zz)
        * _e_psi_cached(HalfInt(-1), x, p)
        * _e_psi_cached(HalfInt(0), y, p)
    )
    return val


def s_entry(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    """The scalar S(x, y) whose Pfaffian minors give the correlations."""
    _require_theta2(p)
    return _s_entry_cached(x, y, p)


def s_plain(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    """S conjugated by sqrt(x+z+1/2): the gauge without lattice weights.

    Related to ``s_entry`` by S(x,y) = sqrt((x+z+1/2)(y+z+1/2)) * s_plain(x,y)
    when z is real; the conjugation has determinant one inside each 2x2
    block, so both gauges produce identical correlation functions.
    """
    _require_theta2(p)
    z = p.z
    fac = as_real((x.value + z + 0.5) * (y.value + z + 0.5), "plain-gauge factor")
    if fac <= 0.0:
        raise ArithmeticError(f"plain gauge undefined at ({x}, {y}): factor {fac}")
    return _s_entry_cached(x, y, p) / math.sqrt(fac)


def _norm_factor(u: HalfInt, p: ZParams) -> float:
    z, zp = p.z, p.zp
    rad = as_real((z + u.value + 1.5) * (zp + u.value + 1.5), f"norm at {u}")
    if rad <= 0.0:
        raise ArithmeticError(f"nonpositive normalizer radicand {rad} at {u}")
    return math.sqrt(rad)


def kernel_block(x: HalfInt, y: HalfInt, p: ZParams) -> KernelBlock:
    """All four entries of the matrix kernel at the point pair (x, y)."""
    _require_theta2(p)
    nx = _norm_factor(x, p)
    ny = _norm_factor(y, p)
    x1 = HalfInt(x.k + 1)
    y1 = HalfInt(y.k + 1)
    return KernelBlock(
        s=_s_entry_cached(x, y, p),
        sd_minus=_s_entry_cached(x, y1, p) / ny,
        d_plus_s=_s_entry_cached(x1, y, p) / nx,
        d_plus_s_d_minus=_s_entry_cached(x1, y1, p) / (nx * ny),
    )


def _assemble_blocks(
    points: Sequence[HalfInt],
    block_of: Callable[[HalfInt, HalfInt], KernelBlock],
) -> SkewMatrix:
    n = len(points)
    blocks: Dict[Tuple[int, int], np.ndarray] = {}
    for i in range(n):
        for j in range(i, n):
            blocks[(i, j)] = block_of(points[i], points[j]).as_matrix()
    return assemble(blocks, n)


def correlation(query: CorrelationQuery) -> float:
    """rho_n(points) as the Pfaffian of the assembled 2n x 2n skew matrix."""
    p = query.params
    mat = _assemble_blocks(query.points, lambda a, b: kernel_block(a, b, p))
    return pfaffian(mat)


def rho1(x: HalfInt, p: ZParams) -> float:
    """Single-point density; equals -SD-(x, x) by antisymmetry of S."""
    _require_theta2(p)
    return -_s_entry_cached(x, HalfInt(x.k + 1), p) / _norm_factor(x, p)


# ---------------------------------------------------------------------------
# contour route: the antisymmetric double integral for S


def _phi_hat(w1: np.ndarray, w2: np.ndarray, p: ZParams) -> np.ndarray:
    """Branch factor common to every double-contour representation."""
    z, zp, sq = p.z, p.zp, math.sqrt(p.xi)
    return np.exp(
        -zp * np.log1p(-sq * w1)
        + z * np.log1p(-sq / w1)
        - z * np.log1p(-sq * w2)
        + zp * np.log1p(-sq / w2)
    )


def _lg(v: complex) -> complex:
    return log_gamma(v)


@lru_cache(maxsize=_CACHE)
def _e_k_contour_val(x: HalfInt, y: HalfInt, p: ZParams) -> complex:
    z, zp, xi = p.z, p.zp, p.xi
    xv, yv = x.value, y.value
    log_pref = 0.5 * (
        _lg(xv + z + 1.5)
        + _lg(yv + zp + 0.5)
        - _lg(xv + zp + 1.5)
        - _lg(yv + z + 0.5)
    )
    if x.parity == "even":
        pref = -cmath.exp(log_pref)
        r1, r2 = guard_pair(radius_outside_unit(xi), radius_outside_unit(xi), xi)
    else:
        # the resummed ladder converges for |w1| < 1 here, and the w2 circle
        # widens past 1/r1 to keep the w1*w2 = 1 pole on its inner side
        pref = cmath.exp(log_pref)
        r1 = radius_inside_unit(xi)
        r2 = 0.5 * (1.0 / r1 + 1.0 / math.sqrt(xi))

    def f(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
        if x.parity == "even":
            fx = ratio_2f1_nodes((xv + z + 1.5) / 2, (xv + zp + 2.5) / 2, w1 ** -2)
        else:
            fx = (
                ratio_2f1_nodes(-(xv + zp + 0.5) / 2, -(xv + z - 0.5) / 2, w1 ** 2)
                - 1.0
            )
        return (
            _phi_hat(w1, w2, p)
            / (w1 * w2 - 1.0)
            * fx
            * w1 ** (-(x.k + 2))
            * w2 ** (-(y.k + 1))
        )

    return pref * double_circle_integral(
        f,
        spec_for_degree(x.k + 2, r1, two_dim=True),
        spec_for_degree(y.k + 1, r2, two_dim=True),
    )


def e_k_contour(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    """(EK)(x; y) as a double contour integral, either parity of x."""
    _require_theta2(p)
    return as_real(_e_k_contour_val(x, y, p), f"e_k_contour({x}, {y})", tol=1e-9)


@lru_cache(maxsize=_CACHE)
def _e_psi_contour_val(a: HalfInt, x: HalfInt, p: ZParams) -> complex:
    z, zp, xi = p.z, p.zp, p.xi
    av, xv = a.value, x.value
    sq = math.sqrt(xi)
    log_pref = (
        0.5 * (_lg(xv + z + 1.5) - _lg(xv + zp + 1.5))
        + 0.5 * (_lg(zp - av + 0.5) - _lg(z - av + 0.5))
        + ((zp - z + 1) / 2) * math.log1p(-xi)
    )
    pref = cmath.exp(log_pref)
    if x.parity == "even":
        pref = -pref
        r = radius_outside_unit(xi)
    else:
        r = radius_inside_unit(xi)
    e1 = -zp + av - 0.5
    e2 = z - av - 0.5
    n = x.k + a.k + 3  # exponent of 1/w: x + a + 2

    def f(w: np.ndarray) -> np.ndarray:
        if x.parity == "even":
            fx = ratio_2f1_nodes((xv + z + 1.5) / 2, (xv + zp + 2.5) / 2, w ** -2)
        else:
            fx = (
                ratio_2f1_nodes(-(xv + zp + 0.5) / 2, -(xv + z - 0.5) / 2, w ** 2)
                - 1.0
            )
        return (
            np.exp(e1 * np.log1p(-sq * w) + e2 * np.log1p(-sq / w))
            * fx
            * w ** (-n)
        )

    return pref * circle_integral(f, spec_for_degree(n, r))


def e_psi_contour(sign: float, x: HalfInt, p: ZParams) -> float:
    """(E psi_{sign})(x) as a single contour integral, either parity of x."""
    _require_theta2(p)
    a = _sign_index(sign)
    return as_real(_e_psi_contour_val(a, x, p), f"e_psi_contour({sign}, {x})", tol=1e-9)


@lru_cache(maxsize=_CACHE)
def _stilde_cached(x: HalfInt, y: HalfInt, p: ZParams) -> complex:
    """Half of the contour-evaluated S entry, before antisymmetrization.

    The square roots go through cmath so the value continues to parameter
    pairs where individual radicands pick up phases; the final
    antisymmetrized combination is what has to come out real.
    """
    z, zp = p.z, p.zp
    yv = y.value
    rad = cmath.sqrt((z + yv + 0.5) * (zp + yv + 0.5))
    sep = cmath.sqrt(z * zp)
    val = rad * _e_k_contour_val(x, y, p) + sep * _e_psi_contour_val(
        HalfInt(-1), x, p
    ) * _e_psi_contour_val(HalfInt(0), y, p)
    return 0.5 * val


def s_antisym_contour(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    """S(x, y) as a difference of two contour-integral halves.

    Manifestly antisymmetric under x <-> y; used as an independent check on
    the series route.  Contour radii sit on either side of the unit circle
    according to the parity of each argument.
    """
    _require_theta2(p)
    val = _stilde_cached(x, y, p) - _stilde_cached(y, x, p)
    return as_real(val, f"s_antisym_contour({x}, {y})", tol=1e-9)


# ---------------------------------------------------------------------------
# the I / A / B decomposition


def _iab_phase(x: HalfInt, y: HalfInt, p: ZParams) -> complex:
    z, zp = p.z, p.zp
    return cmath.exp(
        0.5
        * (
            _lg(x.value + zp - 0.5)
            + _lg(y.value + z - 0.5)
            - _lg(x.value + z - 0.5)
            - _lg(y.value + zp - 0.5)
        )
    )


@lru_cache(maxsize=_CACHE)
def _i_series(x: HalfInt, y: HalfInt, p: ZParams) -> complex:
    require_real_pair(p)
    z, zp = p.z, p.zp
    q = _feed(p)
    xv = x.value
    y1 = HalfInt(y.k - 1)
    pref = _iab_phase(x, y, p)
    if x.parity == "even":
        body = -_sqrt_weight_sum(
            lambda l: k_series(HalfInt(x.k + 2 * l - 1), y1, q),
            (xv + z - 0.5, xv + zp - 0.5),
            (xv + z + 0.5, xv + zp + 0.5),
            lmin=0,
        )
    else:
        body = _sqrt_weight_sum(
            lambda l: k_series(HalfInt(x.k - 2 * l - 1), y1, q),
            (-xv - z + 1.5, -xv - zp + 1.5),
            (-xv - z + 2.5, -xv - zp + 2.5),
            lmin=1,
        )
    return pref * body


@lru_cache(maxsize=_CACHE)
def _i_contour(x: HalfInt, y: HalfInt, p: ZParams) -> complex:
    z, zp, xi = p.z, p.zp, p.xi
    xv = x.value
    if x.parity == "even":
        sign = -1.0
        r1, r2 = guard_pair(radius_outside_unit(xi), radius_outside_unit(xi), xi)
    else:
        # w1 runs inside the unit circle here, so the w2 circle must widen
        # past 1/r1: the w1*w2 = 1 pole has to stay on the inner side of the
        # w2 contour for every parity combination
        sign = 1.0
        r1 = radius_inside_unit(xi)
        r2 = 0.5 * (1.0 / r1 + 1.0 / math.sqrt(xi))

    def f(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
        if x.parity == "even":
            fx = ratio_2f1_nodes((xv + z - 0.5) / 2, (xv + zp + 0.5) / 2, w1 ** -2)
        else:
            fx = (
                ratio_2f1_nodes(-(xv + zp - 1.5) / 2, -(xv + z - 2.5) / 2, w1 ** 2)
                - 1.0
            )
        return (
            _phi_hat(w1, w2, p)
            / (w1 * w2 - 1.0)
            * fx
            * w1 ** (-x.k)
            * w2 ** (-y.k)
        )

    return sign * double_circle_integral(
        f,
        spec_for_degree(x.k, r1, two_dim=True),
        spec_for_degree(y.k, r2, two_dim=True),
    )


def _a_pref(x: HalfInt, p: ZParams) -> complex:
    z, zp, xi = p.z, p.zp, p.xi
    return cmath.exp(
        ((z - zp - 1) / 2) * math.log1p(-xi)
        + 0.5
        * (
            _lg(z + 1)
            + _lg(x.value + zp - 0.5)
            - _lg(zp + 1)
            - _lg(x.value + z - 0.5)
        )
    )


@lru_cache(maxsize=_CACHE)
def _a_series(x: HalfInt, p: ZParams) -> complex:
    require_real_pair(p)
    z, zp = p.z, p.zp
    q = _feed(p)
    xv = x.value
    am = HalfInt(-1)  # index -1/2
    if x.parity == "even":
        body = -_sqrt_weight_sum(
            lambda l: psi_series(am, HalfInt(x.k + 2 * l - 1), q),
            (z + xv - 0.5, zp + xv - 0.5),
            (z + xv + 0.5, zp + xv + 0.5),
            lmin=0,
        )
    else:
        body = _sqrt_weight_sum(
            lambda l: psi_series(am, HalfInt(x.k - 2 * l - 1), q),
            (-xv - z + 1.5, -xv - zp + 1.5),
            (-xv - z + 2.5, -xv - zp + 2.5),
            lmin=1,
        )
    return _a_pref(x, p) * body


@lru_cache(maxsize=_CACHE)
def _a_contour(x: HalfInt, p: ZParams) -> complex:
    z, zp, xi = p.z, p.zp, p.xi
    xv = x.value
    sq = math.sqrt(xi)
    if x.parity == "even":
        r = radius_outside_unit(xi)
        sign = -1.0
    else:
        r = radius_inside_unit(xi)
        sign = 1.0

    def f(w: np.ndarray) -> np.ndarray:
        if x.parity == "even":
            fx = ratio_2f1_nodes((xv + z - 0.5) / 2, (xv + zp + 0.5) / 2, w ** -2)
        else:
            fx = (
                ratio_2f1_nodes(-(xv + zp - 1.5) / 2, -(xv + z - 2.5) / 2, w ** 2)
                - 1.0
            )
        return (
            np.exp((-zp - 1) * np.log1p(-sq * w) + z * np.log1p(-sq / w))
            * fx
            * w ** (-x.k)
        )

    return sign * circle_integral(f, spec_for_degree(x.k, r))


def _b_pref(y: HalfInt, p: ZParams) -> complex:
    z, zp, xi = p.z, p.zp, p.xi
    yv = y.value
    zz = as_real(z * zp, "z*zp")
    if zz < 0.0:
        raise ArithmeticError(f"negative product z*zp={zz}")
    denom = as_real((yv + z - 0.5) * (yv + zp - 0.5), f"B denominator at y={y}")
    if denom <= 0.0:
        raise ArithmeticError(f"B prefactor undefined at y={y}: radicand {denom}")
    return (
        math.sqrt(zz)
        / math.sqrt(denom)
        * cmath.exp(
            ((zp - z + 1) / 2) * math.log1p(-xi)
            + 0.5
            * (
                _lg(zp + 1)
                + _lg(yv + z - 0.5)
                - _lg(z + 1)
                - _lg(yv + zp - 0.5)
            )
        )
    )


@lru_cache(maxsize=_CACHE)
def _b_series(y: HalfInt, p: ZParams) -> complex:
    require_real_pair(p)
    z, zp = p.z, p.zp
    q = _feed(p)
    yv = y.value
    ap = HalfInt(0)  # index +1/2
    # one formula for both parities: the upward ladder continues analytically
    # across odd y, where a terminating downward variant exists only at
    # nonnegative integer z and disagrees elsewhere
    body = -_sqrt_weight_sum(
        lambda l: psi_series(ap, HalfInt(y.k + 2 * l), q),
        (yv + z + 0.5, yv + zp + 0.5),
        (yv + z + 1.5, yv + zp + 1.5),
        lmin=0,
    )
    return _b_pref(y, p) * body


@lru_cache(maxsize=_CACHE)
def _b_contour(y: HalfInt, p: ZParams) -> complex:
    z, zp, xi = p.z, p.zp, p.xi
    yv = y.value
    sq = math.sqrt(xi)
    # same ladder as _b_series, resummed under the integral; valid at both
    # parities with the contour outside the unit circle
    r = radius_outside_unit(xi)

    def f(w: np.ndarray) -> np.ndarray:
        fy = ratio_2f1_nodes((yv + zp + 0.5) / 2, (yv + z - 0.5) / 2, w ** -2)
        bracket = 1.0 - (1.0 - sq / w) * fy
        return (
            np.exp(-z * np.log1p(-sq * w) + zp * np.log1p(-sq / w))
            * bracket
            * w ** (-y.k)
        )

    return circle_integral(f, spec_for_degree(y.k, r))


def iab_functions(kind: str, *args) -> complex:
    """Contour values of the three pieces of the S decomposition.

    ``iab_functions("I", x, y, p)`` is a double integral; ``("A", x, p)`` and
    ``("B", y, p)`` are single integrals.  Values carry a common unimodular
    phase that cancels in ``s_via_iab``; use ``*_series`` counterparts (same
    call via kind "I_series" etc.) for cross-checks.
    """
    table = {
        "I": _i_contour,
        "A": _a_contour,
        "B": _b_contour,
        "I_series": _i_series,
        "A_series": _a_series,
        "B_series": _b_series,
    }
    if kind not in table:
        raise ValueError(f"unknown kind {kind!r}; expected one of {sorted(table)}")
    return table[kind](*args)


def s_via_iab(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    """S(x, y) reassembled from the I, A, B decomposition.

    Uses the series forms of I, A, B where admissibility keeps their
    square-root weights real (cheap and accurate); outside the admissible
    set, where the ladder weights change sign term by term, it switches to
    the contour forms, which continue smoothly.
    """
    _require_theta2(p)
    z, zp = p.z, p.zp
    xv, yv = x.value, y.value
    x2 = HalfInt(x.k + 2)
    y1 = HalfInt(y.k + 1)
    outer = cmath.exp(
        0.5
        * (
            _lg(xv + z + 0.5)
            + _lg(yv + zp + 1.5)
            - _lg(yv + z + 0.5)
            - _lg(xv + zp + 1.5)
        )
    )
    if p.admissible():
        bracket = _i_series(x2, y1, p) + _a_series(x2, p) * _b_series(y1, p)
    else:
        bracket = _i_contour(x2, y1, p) + _a_contour(x2, p) * _b_contour(y1, p)
    plain = outer * bracket
    # gauge factor sqrt(x+z+1/2) sqrt(y+z+1/2): complex off the real z axis;
    # its phase cancels against the phases carried by I, A, B
    gauge = cmath.sqrt(xv + z + 0.5) * cmath.sqrt(yv + z + 0.5)
    return as_real(gauge * plain, f"s_via_iab({x}, {y})", tol=1e-9)


# ---------------------------------------------------------------------------
# degenerate family zp = z - 1


@lru_cache(maxsize=_CACHE)
def _degenerate_s_cached(x: HalfInt, y: HalfInt, z: complex, xi: float) -> float:
    # the two-variable weight collapses to equal exponent pairs here: the
    # zp = z - 1 shift is absorbed by the rational factor, and only the
    # all-z weight keeps the integrand antisymmetric under the simultaneous
    # exchange (w1, x) <-> (w2, y)
    p = ZParams(z=z, zp=z, xi=xi, theta=2)
    r = radius_outside_unit(xi)
    r1, r2 = guard_pair(r, r, xi)

    def f(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
        return (
            _phi_hat(w1, w2, p)
            / (w1 * w2 - 1.0)
            * (w2 - w1)
            / ((w2 ** 2 - 1.0) * (w1 ** 2 - 1.0))
            * w1 ** (-x.k)
            * w2 ** (-y.k)
        )

    val = -double_circle_integral(
        f,
        spec_for_degree(x.k, r1, two_dim=True),
        spec_for_degree(y.k, r2, two_dim=True),
    )
    return as_real(val, f"degenerate_s({x}, {y})", tol=1e-9)


def degenerate_s(x: HalfInt, y: HalfInt, z: complex, xi: float) -> float:
    """S(x, y) for the degenerate family zp = z - 1: one double integral.

    Both contours lie outside the unit circle regardless of parity, and no
    square-root normalizers appear.
    """
    return _degenerate_s_cached(x, y, z, xi)


def degenerate_kernel(x: HalfInt, y: HalfInt, z: complex, xi: float) -> KernelBlock:
    """Matrix kernel of the degenerate family; entries are plain S shifts."""
    x1 = HalfInt(x.k + 1)
    y1 = HalfInt(y.k + 1)
    return KernelBlock(
        s=_degenerate_s_cached(x, y, z, xi),
        sd_minus=_degenerate_s_cached(x, y1, z, xi),
        d_plus_s=_degenerate_s_cached(x1, y, z, xi),
        d_plus_s_d_minus=_degenerate_s_cached(x1, y1, z, xi),
    )


def degenerate_correlation(
    points: Sequence[HalfInt], z: complex, xi: float
) -> float:
    """rho_n for the degenerate family, via the short-cut kernel."""
    pts = tuple(points)
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    mat = _assemble_blocks(pts, lambda a, b: degenerate_kernel(a, b, z, xi))
    return pfaffian(mat)


def clear_caches() -> None:
    for fn in (
        _e_k_cached,
        _e_psi_cached,
        _e_k_contour_val,
        _e_psi_contour_val,
        _s_entry_cached,
        _stilde_cached,
        _i_series,
        _i_contour,
        _a_series,
        _a_contour,
        _b_series,
        _b_contour,
        _degenerate_s_cached,
    ):
        fn.cache_clear()
