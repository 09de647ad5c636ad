"""Scalar special functions used by the kernel builders.

Everything here is plain double precision.  The Gauss hypergeometric
evaluator only supports the argument families the kernels actually need
(unit disk, and the negative-axis points reachable by a Pfaff transform);
it is not a general-purpose 2F1.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import loggamma as _loggamma

SERIES_TOL = 1e-15
SERIES_CAP = 10**6
# stop once this many consecutive terms are individually negligible
CONSECUTIVE_SMALL = 3


class ConvergenceError(ArithmeticError):
    """A series or quadrature failed to reach the requested tolerance."""


def log_gamma(w):
    """Principal branch of log Gamma, complex arguments allowed.

    Raises ValueError at the poles (nonpositive integers).
    """
    w = complex(w)
    if w.imag == 0.0 and w.real <= 0.0 and w.real == int(w.real):
        raise ValueError(f"log_gamma pole at {w.real}")
    out = _loggamma(w)
    if w.imag == 0.0:
        return out  # may still be complex: negative real axis
    return out


def gamma_sign(u: float) -> int:
    """Sign of Gamma(u) for real non-pole u."""
    if u > 0:
        return 1
    if u == int(u):
        raise ValueError(f"gamma pole at {u}")
    # Gamma alternates sign between consecutive negative integers
    return -1 if (int(math.floor(-u)) % 2 == 0) else 1


def pochhammer(x, n: int):
    """Rising factorial (x)_n = x (x+1) ... (x+n-1), n a nonnegative integer."""
    if n < 0 or n != int(n):
        raise ValueError("pochhammer needs an integer n >= 0")
    out = 1.0 if not isinstance(x, complex) else (1.0 + 0.0j)
    for j in range(int(n)):
        out *= x + j
    return out


def pochhammer_k(x, n: int, k):
    """k-step rising factorial (x)_{n,k} = x (x+k) (x+2k) ... (x+(n-1)k)."""
    if n < 0 or n != int(n):
        raise ValueError("pochhammer_k needs an integer n >= 0")
    out = 1.0 if not isinstance(x, complex) else (1.0 + 0.0j)
    for j in range(int(n)):
        out *= x + j * k
    return out


def _is_nonpositive_int(v) -> bool:
    v = complex(v)
    return v.imag == 0.0 and v.real <= 0.0 and v.real == round(v.real)


def _series_2f1(a, b, c, w, tol):
    """Taylor series of 2F1 at 0.  Caller guarantees |w| < 1 or termination.

    Returns (value, largest |term|).  The ratio of the two measures how
    much cancellation the sum suffered: the result carries a relative
    rounding error of roughly eps * max_term / |value|.
    """
    a = complex(a)
    b = complex(b)
    c = complex(c)
    w = complex(w)
    term = 1.0 + 0.0j
    running = 1.0 + 0.0j
    max_term = 1.0
    # terms are also collected and recombined with fsum at the end, so that
    # alternating series with interior growth (common at far-negative
    # lattice points) lose only the per-term rounding, not the
    # summation-order error
    re_parts = [1.0]
    im_parts = [0.0]
    small = 0
    done = False
    for n in range(SERIES_CAP):
        if term == 0.0:
            done = True  # terminated exactly (a or b hit a nonpositive integer)
            break
        denom = (c + n) * (n + 1)
        if denom == 0.0:
            raise ValueError(
                f"2F1 pole: c={c} hit a nonpositive integer before termination"
            )
        term *= (a + n) * (b + n) / denom * w
        re_parts.append(term.real)
        im_parts.append(term.imag)
        running += term
        max_term = max(max_term, abs(term))
        if abs(term) < tol * max(1e-300, abs(running)):
            small += 1
            if small >= CONSECUTIVE_SMALL:
                done = True
                break
        else:
            small = 0
    if not done and not (abs(w) < 1 and small > 0):
        raise ConvergenceError(
            f"2F1 series did not settle: a={a} b={b} c={c} w={w}"
        )
    return complex(math.fsum(re_parts), math.fsum(im_parts)), max_term


def gauss_2f1_amp(a, b, c, w, tol: float = SERIES_TOL):
    """F(a, b; c; w) together with its cancellation amplification.

    Returns (value, amp) with amp = max |series term| / |value|, so the
    value's relative rounding error is about eps * amp.  Same argument
    support as gauss_2f1.
    """
    a = complex(a)
    b = complex(b)
    c = complex(c)
    w = complex(w)
    if w == 0.0:
        return 1.0 + 0.0j, 1.0
    terminating = _is_nonpositive_int(a) or _is_nonpositive_int(b)
    if _is_nonpositive_int(c) and not terminating:
        raise ValueError(f"2F1 undefined at nonpositive integer c={c}")
    if terminating:
        # finite sum; make sure the terminating parameter sits in slot a
        if not _is_nonpositive_int(a):
            a, b = b, a
        if _is_nonpositive_int(c) and c.real > a.real:
            raise ValueError(f"2F1 pole at c={c} before termination at a={a}")
        nmax = int(-a.real)
        term = 1.0 + 0.0j
        total = 1.0 + 0.0j
        max_term = 1.0
        for n in range(nmax):
            term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * w
            total += term
            max_term = max(max_term, abs(term))
        return total, max_term / max(1e-300, abs(total))
    if abs(w) < 1.0 and w.real >= 0.0:
        val, max_term = _series_2f1(a, b, c, w, tol)
        return val, max_term / max(1e-300, abs(val))
    if w.real < 0.0:
        # Pfaff: pulls xi/(xi-1) with xi in (0,1) back to xi
        v = w / (w - 1.0)
        if abs(v) >= 1.0:
            raise ValueError(f"2F1 argument {w} outside the supported region")
        val, max_term = _series_2f1(a, c - b, c, v, tol)
        return (1.0 - w) ** (-a) * val, max_term / max(1e-300, abs(val))
    raise ValueError(f"2F1 argument {w} outside the supported region")


def gauss_2f1(a, b, c, w, tol: float = SERIES_TOL):
    """Gauss hypergeometric F(a, b; c; w).

    Supported arguments: terminating cases (a or b a nonpositive integer,
    any w), |w| < 1 directly, and points with Re w < 0 via the Pfaff
    transform F(a,b;c;w) = (1-w)^(-a) F(a, c-b; c; w/(w-1)), which maps the
    negative real axis into (0, 1).  Anything else raises.
    """
    return gauss_2f1_amp(a, b, c, w, tol)[0]


def gauss_2f1_regularized(a, b, c, w, tol: float = SERIES_TOL):
    """F(a, b; c; w) / Gamma(c), continued through nonpositive integer c.

    For c = -m the first m+1 series terms drop out and

        reg2F1 = (a)_{m+1} (b)_{m+1} / (m+1)! * w^{m+1}
                 * F(a+m+1, b+m+1; m+2; w).
    """
    c = complex(c)
    if not _is_nonpositive_int(c):
        return gauss_2f1(a, b, c, w, tol) * cmath.exp(-log_gamma(c))
    m = int(-c.real)
    pref = pochhammer(complex(a), m + 1) * pochhammer(complex(b), m + 1)
    pref *= complex(w) ** (m + 1) / math.factorial(m + 1)
    return pref * gauss_2f1(
        complex(a) + m + 1, complex(b) + m + 1, m + 2, w, tol
    )


def contiguous_c_check(a, b, c, w, tol: float = SERIES_TOL):
    """Scaled residual of a contiguous relation linking c-1, c, c+1:

        (c-a)(c-b) F(a,b;c+1;w) + c(c-1) F(a,b;c-1;w)
            - c(2c-a-b-1) F(a,b;c;w) = ab F(a+1,b+1;c+1;w)

    A healthy evaluator returns roundoff (~1e-14).  Used as a self-test
    hook for parameter regions where no closed form is handy.
    """
    a = complex(a)
    b = complex(b)
    c = complex(c)
    w = complex(w)
    t1 = (c - a) * (c - b) * gauss_2f1(a, b, c + 1, w, tol)
    t2 = c * (c - 1) * gauss_2f1(a, b, c - 1, w, tol)
    t3 = -c * (2 * c - a - b - 1) * gauss_2f1(a, b, c, w, tol)
    rhs = a * b * gauss_2f1(a + 1, b + 1, c + 1, w, tol)
    scale = max(abs(t1), abs(t2), abs(t3), abs(rhs), 1e-300)
    return abs(t1 + t2 + t3 - rhs) / scale


def ratio_2f1_nodes(alpha, gamma, v: np.ndarray, tol: float = 1e-16):
    """F(alpha, 1; gamma; v) evaluated on an array of points.

    The coefficient ratio is (alpha+l)/(gamma+l), so this is a plain power
    series; v is expected to live on a circle with |v| bounded away from 1
    (quadrature nodes), which keeps the truncation uniform.  Terminating
    alpha (nonpositive integer) is handled by exact truncation.
    """
    alpha = complex(alpha)
    gamma = complex(gamma)
    v = np.asarray(v, dtype=complex)
    vmax = float(np.max(np.abs(v))) if v.size else 0.0
    out = np.ones_like(v)
    if vmax == 0.0:
        return out
    nterms = None
    if _is_nonpositive_int(alpha):
        nterms = int(-alpha.real)
    elif vmax >= 1.0:
        raise ValueError(f"ratio series needs |v|<1, got max |v| = {vmax}")
    pw = np.ones_like(v)
    coef = 1.0 + 0.0j
    l = 0
    while True:
        if nterms is not None and l >= nterms:
            break
        g = gamma + l
        if g == 0.0:
            raise ValueError(f"ratio series pole: gamma={gamma} at l={l}")
        coef *= (alpha + l) / g
        l += 1
        pw = pw * v
        out = out + coef * pw
        if nterms is None:
            tail = abs(coef) * vmax**l / (1.0 - vmax)
            if tail < tol:
                break
            if l > 10**5:
                raise ConvergenceError(
                    f"ratio series stalled: alpha={alpha} gamma={gamma} "
                    f"|v|={vmax}"
                )
    return out


def sqrt_pos_gamma_pair(u1, u2) -> float:
    """sqrt(Gamma(u1) Gamma(u2)) for a pair whose product is positive.

    The pair is either complex-conjugate (product = |Gamma|^2) or two reals
    whose Gammas share a sign.  Computed as exp of the real part of the
    log-gamma sum; the sign condition is asserted for real pairs.
    """
    u1 = complex(u1)
    u2 = complex(u2)
    if u1.imag == 0.0 and u2.imag == 0.0:
        if gamma_sign(u1.real) * gamma_sign(u2.real) < 0:
            raise ValueError(
                f"Gamma({u1.real}) Gamma({u2.real}) is negative; "
                "no real square root"
            )
    lg = log_gamma(u1) + log_gamma(u2)
    return math.exp(0.5 * lg.real)


def sqrt_pos(v) -> float:
    """Square root of a nominally positive real given as complex.

    Accepts a tiny imaginary part (roundoff from conjugate products) and
    refuses genuinely negative or complex input.
    """
    v = complex(v)
    tol = 1e-9 * (1.0 + abs(v))
    if abs(v.imag) > tol or v.real < -tol:
        raise ValueError(f"expected a positive real, got {v}")
    return math.sqrt(max(v.real, 0.0))
