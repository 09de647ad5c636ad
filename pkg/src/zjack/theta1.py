"""Scalar building blocks on the lattice Z + 1/2: the hypergeometric basis
functions psi_a, the projection kernel K built from them, dual contour
representations of both, and the second-order difference operator they
diagonalize.

Every value here is assembled in log space before the single final exp,
because the gamma factors individually overflow long before the products
do.  Functions returning reals assert that the imaginary residue of the
complex assembly is negligible first.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from .contour import (
    ContourSpec,
    circle_integral,
    double_circle_integral,
    guard_pair,
    nodes_for_degree,
    radius_free,
    radius_outside_unit,
    spec_for_degree,
)
from .partitions import HalfInt, ZParams
from .special import gauss_2f1, gauss_2f1_amp, log_gamma, pochhammer

IMAG_TOL = 1e-12
K_SERIES_CUTOFF = 200
_CACHE = 1 << 18


def require_admissible(p: ZParams) -> None:
    if not p.admissible():
        raise ValueError(
            f"parameters z={p.z}, z'={p.zp} are not admissible "
            "(need a non-real conjugate pair or two reals in one (m, m+1))"
        )


def require_real_pair(p: ZParams) -> None:
    """Evaluation gate: conjugate pair, or both parameters real.

    Admissible parameters always pass.  Real pairs outside the admissible
    set (integer z, or z and z' in different unit intervals) are accepted
    too: every formula below continues to them, with lazy guards raising
    at any point where a radicand actually turns negative.  Genuinely
    unrelated complex z, z' would make the kernel complex-valued, so they
    are rejected up front.
    """
    z, zp = p.z, p.zp
    if abs(z.imag) <= 1e-12 and abs(zp.imag) <= 1e-12:
        return
    if abs(zp - z.conjugate()) <= 1e-9 * max(1.0, abs(z)):
        return
    raise ValueError(
        f"parameters z={p.z}, z'={p.zp} give a complex-valued kernel "
        "(need z' = conj(z) or both real)"
    )


def as_real(val: complex, what: str, tol: float = IMAG_TOL) -> float:
    scale = max(1.0, abs(val))
    if abs(val.imag) > tol * scale:
        raise ArithmeticError(f"{what}: imaginary residue {val.imag:.3e} too large")
    return val.real


# -- psi functions -------------------------------------------------------


def psi_series(a: HalfInt, x: HalfInt, p: ZParams) -> float:
    """The basis function with index a evaluated at lattice point x.

    Up to gamma and power prefactors this is a Gauss 2F1 at argument xi;
    the variant used here keeps the series argument inside (0,1) so plain
    term summation converges for every lattice point.
    """
    require_real_pair(p)
    return _psi_series_cached(a, x, p)


# lose at most ~1.7 digits to series cancellation before switching to the
# contour evaluation, whose r=1 integrand is O(1) and cancellation-free
AMP_SWITCH = 50.0


@lru_cache(maxsize=_CACHE)
def _psi_series_cached(a: HalfInt, x: HalfInt, p: ZParams) -> float:
    z, zp, xi = p.z, p.zp, p.xi
    av, xv = a.value, x.value
    for q in (z - av + 0.5, zp - av + 0.5):
        qc = complex(q)
        if qc.imag == 0.0 and qc.real <= 0.0 and qc.real == round(qc.real):
            # gamma pole in the normalizing factor: this basis function is
            # identically zero (the kernel has finite rank at such parameters)
            return 0.0
    # 2F1 parameters after a Pfaff transform of the xi/(xi-1) form
    pa = -z + av + 0.5
    pb = xv + zp + 0.5
    c = x.k + a.k + 2  # x + a + 1, an exact integer
    log_half = 0.5 * (
        log_gamma(xv + z + 0.5).real
        + log_gamma(xv + zp + 0.5).real
        - log_gamma(z - av + 0.5).real
        - log_gamma(zp - av + 0.5).real
    )
    log_pow = 0.5 * (xv + av) * math.log(xi) + ((zp - z + 1.0) / 2.0) * math.log1p(-xi)
    if c >= 1:
        f, amp = gauss_2f1_amp(pa, pb, c, xi)
        if amp > AMP_SWITCH:
            return _psi_contour_eval(a, x, p, radius_free(xi))
        val = cmath.exp(log_half + log_pow - math.lgamma(c)) * f
    else:
        # 1/Gamma(c) kills the first 1-c terms of the series; what survives
        # is an ordinary 2F1 with all parameters shifted by m+1 = 1-c.
        # The Pochhammer prefactors go through log space: they can run to
        # hundreds of factors at far-negative x and would overflow directly.
        m = -c
        f, amp = gauss_2f1_amp(pa + m + 1, pb + m + 1, m + 2, xi)
        if amp > AMP_SWITCH:
            return _psi_contour_eval(a, x, p, radius_free(xi))
        log_shift = (m + 1) * math.log(xi) - math.lgamma(m + 2)
        for j in range(m + 1):
            f1, f2 = pa + j, pb + j
            if f1 == 0 or f2 == 0:
                return 0.0
            log_shift += cmath.log(f1) + cmath.log(f2)
        val = cmath.exp(log_half + log_pow + log_shift) * f
    return as_real(val, f"psi(a={a}, x={x})")


def psi_contour(a: HalfInt, x: HalfInt, p: ZParams, radius: float | None = None) -> float:
    """Same function as psi_series, as a single loop integral around 0.

    Any radius in (sqrt(xi), 1/sqrt(xi)) works; r = 1 balances the decay
    toward both branch points and is the default.
    """
    require_real_pair(p)
    sq = math.sqrt(p.xi)
    r = radius_free(p.xi) if radius is None else radius
    if not (sq < r < 1.0 / sq):
        raise ValueError(f"radius {r} outside the annulus ({sq}, {1.0 / sq})")
    return _psi_contour_eval(a, x, p, r)


def _psi_contour_eval(a: HalfInt, x: HalfInt, p: ZParams, r: float) -> float:
    z, zp, xi = p.z, p.zp, p.xi
    av, xv = a.value, x.value
    sq = math.sqrt(xi)
    e1 = -zp + av - 0.5
    e2 = z - av - 0.5
    n = -(x.k + a.k + 2)  # exponent of w, an exact integer

    def f(w):
        return (
            np.exp(e1 * np.log1p(-sq * w) + e2 * np.log1p(-sq / w))
            * w ** n
        )

    # Quadrature roundoff grows with distance from |w| = 1, where the two
    # branch-factor moduli stop cancelling; loosen the stop rule off-circle.
    tol = 1e-13 if r == 1.0 else 1e-12
    integral = circle_integral(
        f, ContourSpec(radius=r, tol=tol, nodes=nodes_for_degree(n))
    )
    log_pref = (
        0.5
        * (
            log_gamma(xv + z + 0.5).real
            + log_gamma(xv + zp + 0.5).real
            - log_gamma(z - av + 0.5).real
            - log_gamma(zp - av + 0.5).real
        )
        + log_gamma(zp - av + 0.5)
        - log_gamma(xv + zp + 0.5)
        + ((zp - z + 1.0) / 2.0) * math.log1p(-xi)
    )
    return as_real(
        cmath.exp(log_pref) * integral,
        f"psi_contour(a={a}, x={x})",
        tol=1e-12 if r == 1.0 else 1e-11,
    )


# -- the projection kernel ----------------------------------------------


def k_series(
    x: HalfInt,
    y: HalfInt,
    p: ZParams,
    cutoff: int = K_SERIES_CUTOFF,
    return_tail: bool = False,
):
    """K(x,y) = sum over a = 1/2, 3/2, ... of psi_a(x) psi_a(y).

    Terms decay at least geometrically (one factor of sqrt(xi) per step
    from each psi), so the magnitude of the last term is a usable tail
    indicator, returned when asked for.
    """
    require_real_pair(p)
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    val, last = _k_series_cached(x, y, p, cutoff)
    return (val, last) if return_tail else val


@lru_cache(maxsize=_CACHE)
def _k_series_cached(x: HalfInt, y: HalfInt, p: ZParams, cutoff: int):
    total = 0.0
    last = 0.0
    for j in range(cutoff):
        a = HalfInt(j)
        term = _psi_series_cached(a, x, p) * _psi_series_cached(a, y, p)
        total += term
        last = abs(term)
    return total, last


def k_contour(
    x: HalfInt,
    y: HalfInt,
    p: ZParams,
    radii: tuple[float, float] | None = None,
) -> float:
    """K(x,y) as a double loop integral with a gamma-ratio prefactor.

    Contour constraints: each radius inside (sqrt(xi), 1/sqrt(xi)) and
    r1*r2 > 1, which directs the expansion of 1/(w1 w2 - 1) the way the
    psi-sum converges.
    """
    require_real_pair(p)
    if radii is None:
        return _k_contour_cached(x, y, p)
    return _k_contour_any(x, y, p, radii)


@lru_cache(maxsize=_CACHE)
def _k_contour_cached(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    r = radius_outside_unit(p.xi)
    return _k_contour_any(x, y, p, (r, r))


def _k_contour_any(x: HalfInt, y: HalfInt, p: ZParams, radii) -> float:
    z, zp, xi = p.z, p.zp, p.xi
    r1, r2 = guard_pair(radii[0], radii[1], xi)
    if r1 * r2 <= 1.0:
        raise ValueError(f"need r1*r2 > 1, got {r1}*{r2}")
    xv, yv = x.value, y.value
    integral = double_circle_integral(
        _khat_integrand(x, y, p),
        spec_for_degree(x.k + 1, r1, two_dim=True),
        spec_for_degree(y.k + 1, r2, two_dim=True),
    )
    log_pref = (
        0.5
        * (
            log_gamma(xv + z + 0.5).real
            + log_gamma(xv + zp + 0.5).real
            + log_gamma(yv + z + 0.5).real
            + log_gamma(yv + zp + 0.5).real
        )
        - log_gamma(xv + zp + 0.5)
        - log_gamma(yv + z + 0.5)
    )
    return as_real(cmath.exp(log_pref) * integral, f"k_contour({x}, {y})")


def _khat_integrand(x: HalfInt, y: HalfInt, p: ZParams):
    z, zp, xi = p.z, p.zp, p.xi
    sq = math.sqrt(xi)
    n1 = -(x.k + 1)  # -x - 1/2 as an exact integer
    n2 = -(y.k + 1)

    def f(w1, w2):
        phi = np.exp(
            -zp * np.log1p(-sq * w1)
            + z * np.log1p(-sq / w1)
            - z * np.log1p(-sq * w2)
            + zp * np.log1p(-sq / w2)
        )
        return phi / (w1 * w2 - 1.0) * w1 ** n1 * w2 ** n2

    return f


# -- bare (hat) variants without gamma prefactors ------------------------
#
# The same integrals stripped of all gamma-ratio dressing.  These stay
# meaningful for real parameter pairs far outside the admissible set
# (where half the square roots above would go imaginary), which is what
# the analytic-continuation route of the theta=2 kernel needs.


def khat_contour(
    x: HalfInt,
    y: HalfInt,
    p: ZParams,
    radii: tuple[float, float] | None = None,
) -> float:
    if radii is None:
        return _khat_contour_cached(x, y, p)
    return _khat_contour_any(x, y, p, radii)


@lru_cache(maxsize=_CACHE)
def _khat_contour_cached(x: HalfInt, y: HalfInt, p: ZParams) -> float:
    r = radius_outside_unit(p.xi)
    return _khat_contour_any(x, y, p, (r, r))


def _khat_contour_any(x: HalfInt, y: HalfInt, p: ZParams, radii) -> float:
    r1, r2 = guard_pair(radii[0], radii[1], p.xi)
    if r1 * r2 <= 1.0:
        raise ValueError(f"need r1*r2 > 1, got {r1}*{r2}")
    integral = double_circle_integral(
        _khat_integrand(x, y, p),
        spec_for_degree(x.k + 1, r1, two_dim=True),
        spec_for_degree(y.k + 1, r2, two_dim=True),
    )
    return as_real(integral, f"khat_contour({x}, {y})")


@lru_cache(maxsize=_CACHE)
def psihat_plus_contour(x: HalfInt, p: ZParams, radius: float | None = None) -> float:
    """Bare companion of psi at index +1/2: single loop, no prefactors."""
    z, zp, xi = p.z, p.zp, p.xi
    sq = math.sqrt(xi)
    r = radius_free(xi) if radius is None else radius
    n = -(x.k + 2)  # -x - 3/2

    def f(w):
        return np.exp(-z * np.log1p(-sq * w) + (zp - 1.0) * np.log1p(-sq / w)) * w ** n

    spec = ContourSpec(radius=r, nodes=nodes_for_degree(n))
    return as_real(circle_integral(f, spec), f"psihat_plus({x})")


@lru_cache(maxsize=_CACHE)
def psihat_minus_contour(x: HalfInt, p: ZParams, radius: float | None = None) -> float:
    """Bare companion of psi at index -1/2."""
    z, zp, xi = p.z, p.zp, p.xi
    sq = math.sqrt(xi)
    r = radius_free(xi) if radius is None else radius
    n = -(x.k + 1)  # -x - 1/2

    def f(w):
        return np.exp(-(zp + 1.0) * np.log1p(-sq * w) + z * np.log1p(-sq / w)) * w ** n

    spec = ContourSpec(radius=r, nodes=nodes_for_degree(n))
    return as_real(circle_integral(f, spec), f"psihat_minus({x})")


# -- the difference operator ---------------------------------------------


def _coeff(x_shifted: float, p: ZParams) -> float:
    """sqrt(xi (z + s)(z' + s)) for the half-integer shift s = x +- 1/2."""
    rad = (p.z + x_shifted) * (p.zp + x_shifted)
    rr = as_real(rad, f"difference-op radicand at {x_shifted}")
    if rr < 0:
        raise ArithmeticError(f"negative radicand {rr} at shift {x_shifted}")
    return math.sqrt(p.xi * rr)


def difference_op_apply(f, x: HalfInt, p: ZParams) -> float:
    """Apply the three-point difference operator to f at x:

        sqrt(xi (z+x+1/2)(z'+x+1/2)) f(x+1)
      + sqrt(xi (z+x-1/2)(z'+x-1/2)) f(x-1)
      - (x + xi (z+z'+x)) f(x).

    The down-shift coefficient uses the radicand at x - 1/2; that choice
    (rather than repeating x + 1/2) is what makes the operator symmetric
    and is confirmed by the eigenrelation D psi_a = a (1-xi) psi_a.

    f may be a callable on HalfInt or a mapping keyed by HalfInt.
    """
    require_real_pair(p)
    get = f if callable(f) else lambda pt: _lookup(f, pt)
    xv = x.value
    c_up = _coeff(xv + 0.5, p)
    c_dn = _coeff(xv - 0.5, p)
    diag = xv + p.xi * as_real(p.z + p.zp + xv, "difference-op diagonal")
    return c_up * get(x + 1) + c_dn * get(x - 1) - diag * get(x)


def _lookup(mapping, pt: HalfInt):
    try:
        return mapping[pt]
    except KeyError:
        raise ValueError(f"difference operator needs f at {pt}") from None


def clear_caches() -> None:
    """Drop all memoized kernel values (mainly for test isolation)."""
    _psi_series_cached.cache_clear()
    _k_series_cached.cache_clear()
    _k_contour_cached.cache_clear()
    _khat_contour_cached.cache_clear()
    psihat_plus_contour.cache_clear()
    psihat_minus_contour.cache_clear()
