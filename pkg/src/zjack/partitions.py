"""Young diagrams, z-measures with Jack parameter theta, and the embedding
of diagrams into the shifted lattice Z + 1/2.

Measure values are assembled in log space (complex logs summed once, then a
single exp) so that diagrams up to the size cap never overflow a double even
though the hook products and Pochhammer factors individually can.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from functools import total_ordering

DIAGRAM_CAP = 60

_INT_TOL = 1e-9
_CONJ_TOL = 1e-12


@total_ordering
@dataclass(frozen=True)
class HalfInt:
    """A point of Z + 1/2, stored exactly as the integer k with value k + 1/2.

    Parity talk ("even"/"odd") always refers to the parity of x - 1/2 = k,
    which is the quantity the kernel formulas branch on.
    """

    k: int

    def __post_init__(self):
        if not isinstance(self.k, int):
            raise TypeError(f"HalfInt wants an int, got {type(self.k).__name__}")

    @property
    def value(self) -> float:
        return self.k + 0.5

    @property
    def parity(self) -> str:
        return "even" if self.k % 2 == 0 else "odd"

    def __float__(self) -> float:
        return self.k + 0.5

    def __add__(self, n: int) -> "HalfInt":
        return HalfInt(self.k + int(n))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, HalfInt):
            return self.k - other.k
        return HalfInt(self.k - int(other))

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.k - 1)

    def __lt__(self, other: "HalfInt") -> bool:
        return self.k < other.k

    def __str__(self) -> str:
        return f"{2 * self.k + 1}/2"

    @classmethod
    def from_value(cls, v: float) -> "HalfInt":
        two = 2.0 * v
        r = round(two)
        if abs(two - r) > 1e-9 or r % 2 == 0:
            raise ValueError(f"{v} is not a half-odd-integer")
        return cls((int(r) - 1) // 2)

    @classmethod
    def parse(cls, text: str) -> "HalfInt":
        """Accept 'p/2' with odd p, or 'k+1/2' / 'k-1/2' with integer k."""
        s = text.strip().replace(" ", "")
        m = re.fullmatch(r"([+-]?\d+)/2", s)
        if m:
            p = int(m.group(1))
            if p % 2 == 0:
                raise ValueError(f"{text!r}: numerator must be odd")
            return cls((p - 1) // 2)
        m = re.fullmatch(r"([+-]?\d+)([+-])1/2", s)
        if m:
            k, sign = int(m.group(1)), m.group(2)
            return cls(k) if sign == "+" else cls(k - 1)
        raise ValueError(f"cannot parse half-integer from {text!r}")


@dataclass(frozen=True)
class YoungDiagram:
    """Integer partition as a weakly decreasing tuple of positive parts."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        if any(p <= 0 for p in parts):
            raise ValueError(f"parts must be positive: {self.parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"parts must be weakly decreasing: {self.parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def row(self, i: int) -> int:
        """Row length lambda_i with 1-based i, zero past the last row."""
        return self.parts[i - 1] if 1 <= i <= len(self.parts) else 0

    def conjugate(self) -> "YoungDiagram":
        if not self.parts:
            return YoungDiagram(())
        cols = tuple(
            sum(1 for p in self.parts if p >= j) for j in range(1, self.parts[0] + 1)
        )
        return YoungDiagram(cols)

    def cells(self):
        """All boxes (i, j), 1-based, row by row."""
        for i, p in enumerate(self.parts, start=1):
            for j in range(1, p + 1):
                yield i, j

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class ZParams:
    """Parameter bundle (z, z', xi, theta); t = z z' / theta."""

    z: complex
    zp: complex
    xi: float
    theta: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "zp", complex(self.zp))
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "theta", float(self.theta))
        if not (0.0 < self.xi < 1.0):
            raise ValueError(f"xi must lie in (0,1), got {self.xi}")
        if not (self.theta > 0.0):
            raise ValueError(f"theta must be positive, got {self.theta}")

    @property
    def t(self) -> complex:
        return self.z * self.zp / self.theta

    def swapped(self) -> "ZParams":
        return ZParams(self.zp, self.z, self.xi, self.theta)

    def admissible(self) -> bool:
        """Non-real conjugate pair, or two reals in one open interval (m, m+1).

        This is the condition under which the square-root radicands
        (z + x + 1/2)(z' + x + 1/2) appearing throughout the kernel
        formulas are strictly positive for every x in Z + 1/2.
        """
        z, zp = self.z, self.zp
        if abs(z.imag) > _INT_TOL:
            return abs(zp - z.conjugate()) < _CONJ_TOL
        if abs(zp.imag) > _INT_TOL:
            return False
        a, b = z.real, zp.real
        if _near_int(a) or _near_int(b):
            return False
        return math.floor(a) == math.floor(b)

    def series(self) -> str | None:
        """Which positivity regime (z, z') sits in, if any.

        Returns "principal", "complementary", or "degenerate"; None means the
        measure is not guaranteed to be a probability measure.  In the second
        degenerate family the two sub-cases are mirror images under
        z <-> z', so both are tested with the mirrored inequality.
        """
        z, zp, th = self.z, self.zp, self.theta
        if abs(z.imag) > _INT_TOL:
            if abs(zp - z.conjugate()) < _CONJ_TOL:
                return "principal"
            return None
        if abs(zp.imag) > _INT_TOL:
            return None
        a, b = z.real, zp.real
        # real pair: complementary if an open gap of Z + theta*Z holds both
        if (
            not _near_lattice(a, th)
            and not _near_lattice(b, th)
            and not _lattice_point_between(a, b, th)
        ):
            return "complementary"
        # degenerate family 1: z = m*theta (m >= 1), partner above (m-1)*theta
        for u, v in ((a, b), (b, a)):
            m = _as_int(u / th)
            if m is not None and m >= 1 and v > (m - 1) * th + _INT_TOL:
                return "degenerate"
        # degenerate family 2: z = -m (m >= 0), partner below -m + 1
        for u, v in ((a, b), (b, a)):
            m = _as_int(-u)
            if m is not None and m >= 0 and v < -m + 1 - _INT_TOL:
                return "degenerate"
        return None


def _near_int(v: float) -> bool:
    return abs(v - round(v)) < _INT_TOL


def _as_int(v: float) -> int | None:
    r = round(v)
    return int(r) if abs(v - r) < _INT_TOL else None


def _near_lattice(v: float, theta: float) -> bool:
    """Is v within tolerance of some a + b*theta, a, b integers?"""
    bmax = int(math.ceil((abs(v) + 1.0) / theta)) + 2
    for b in range(-bmax, bmax + 1):
        if _near_int(v - b * theta):
            return True
    return False


def _lattice_point_between(a: float, b: float, theta: float) -> bool:
    lo, hi = min(a, b), max(a, b)
    bmax = int(math.ceil((abs(lo) + abs(hi) + 1.0) / theta)) + 2
    for k in range(-bmax, bmax + 1):
        # integers in the open interval (lo - k*theta, hi - k*theta)?
        if math.floor(hi - k * theta - _INT_TOL) >= math.ceil(lo - k * theta + _INT_TOL):
            return True
    return False


# -- hook products and Pochhammer symbols --------------------------------


def hook_products(lam: YoungDiagram, theta: float) -> tuple[float, float]:
    """(H, H'): products over boxes of (arm + leg*theta + 1) and (+ theta)."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    lamc = lam.conjugate()
    h = hp = 1.0
    for i, j in lam.cells():
        base = (lam.row(i) - j) + (lamc.row(j) - i) * theta
        h *= base + 1.0
        hp *= base + theta
    return h, hp


def log_hook_products(lam: YoungDiagram, theta: float) -> tuple[float, float]:
    lamc = lam.conjugate()
    lh = lhp = 0.0
    for i, j in lam.cells():
        base = (lam.row(i) - j) + (lamc.row(j) - i) * theta
        lh += math.log(base + 1.0)
        lhp += math.log(base + theta)
    return lh, lhp


def gen_pochhammer(z: complex, lam: YoungDiagram, theta: float) -> complex:
    """Row-wise Pochhammer product: prod_i (z - (i-1)theta)_{lambda_i}."""
    out = complex(1.0)
    for i, p in enumerate(lam.parts):
        base = z - i * theta
        for j in range(p):
            out *= base + j
    return out


def _log_gen_pochhammer(z: complex, lam: YoungDiagram, theta: float) -> complex | None:
    """Sum of logs of the factors of gen_pochhammer; None if any factor is 0."""
    total = 0.0 + 0.0j
    for i, p in enumerate(lam.parts):
        base = z - i * theta
        for j in range(p):
            f = base + j
            if f == 0:
                return None
            total += cmath.log(f)
    return total


def _log_pochhammer_t(t: complex, n: int) -> complex | None:
    total = 0.0 + 0.0j
    for j in range(n):
        f = t + j
        if f == 0:
            return None
        total += cmath.log(f)
    return total


# -- the measures --------------------------------------------------------


def zmeasure_n(lam: YoungDiagram, p: ZParams) -> complex:
    """Weight of lam under the fixed-size measure on diagrams of |lam| boxes:

        n! (z)_{lam,theta} (z')_{lam,theta} / ((t)_n H(lam) H'(lam)).
    """
    n = lam.size
    lt = _log_pochhammer_t(p.t, n)
    if lt is None:
        raise ValueError(f"normalization (t)_n vanishes at t={p.t}, n={n}")
    lz = _log_gen_pochhammer(p.z, lam, p.theta)
    lzp = _log_gen_pochhammer(p.zp, lam, p.theta)
    if lz is None or lzp is None:
        return 0.0 + 0.0j
    lh, lhp = log_hook_products(lam, p.theta)
    return cmath.exp(math.lgamma(n + 1) + lz + lzp - lt - lh - lhp)


def zmeasure_mixed(lam: YoungDiagram, p: ZParams) -> complex:
    """Weight of lam under the xi-mixture over all diagram sizes:

        (1 - xi)^t xi^{|lam|} (z)_{lam,theta} (z')_{lam,theta} / (H H').
    """
    lz = _log_gen_pochhammer(p.z, lam, p.theta)
    lzp = _log_gen_pochhammer(p.zp, lam, p.theta)
    if lz is None or lzp is None:
        return 0.0 + 0.0j
    lh, lhp = log_hook_products(lam, p.theta)
    log_pref = p.t * math.log1p(-p.xi) + lam.size * math.log(p.xi)
    return cmath.exp(log_pref + lz + lzp - lh - lhp)


def transpose_symmetry_check(lam: YoungDiagram, p: ZParams, rtol: float = 1e-12) -> bool:
    """Fixed-size weight of lam at (z, z', theta) vs weight of the transpose
    at (-z/theta, -z'/theta, 1/theta)."""
    th = p.theta
    mirror = ZParams(-p.z / th, -p.zp / th, p.xi, 1.0 / th)
    a = zmeasure_n(lam, p)
    b = zmeasure_n(lam.conjugate(), mirror)
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def plancherel_ratio(lam: YoungDiagram, z_magnitude: float, theta: float) -> float:
    """Fixed-size weight at z = z' = R divided by its R -> infinity limit
    n! theta^n / (H H').  Tends to 1 as R grows."""
    n = lam.size
    if n < 1:
        return 1.0
    r = float(z_magnitude)
    lz = _log_gen_pochhammer(r, lam, theta)
    lt = _log_pochhammer_t(r * r / theta, n)
    if lz is None or lt is None:
        raise ValueError("plancherel_ratio hit a vanishing factor")
    val = cmath.exp(2.0 * lz - lt - n * math.log(theta))
    return val.real


# -- enumeration and the lattice embedding -------------------------------


def enumerate_diagrams(n: int, cap: int = DIAGRAM_CAP) -> list[YoungDiagram]:
    """All partitions of n in reverse-lexicographic order, (n) first."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > cap:
        raise ValueError(f"n={n} exceeds the enumeration cap {cap}")
    out: list[YoungDiagram] = []
    stack: list[int] = []

    def rec(remaining: int, largest: int):
        if remaining == 0:
            out.append(YoungDiagram(tuple(stack)))
            return
        for part in range(min(remaining, largest), 0, -1):
            stack.append(part)
            rec(remaining - part, part)
            stack.pop()

    rec(n, n if n else 1)
    if n == 0:
        return [YoungDiagram(())]
    return out


def embed_d2(lam: YoungDiagram, count: int) -> list[HalfInt]:
    """First `count` points lambda_i - 2i + 1/2 of the theta=2 embedding."""
    if count < lam.length:
        raise ValueError(f"count={count} is below the diagram length {lam.length}")
    return [HalfInt(lam.row(i) - 2 * i) for i in range(1, count + 1)]


def d2_contains(x: HalfInt, lam: YoungDiagram) -> bool:
    """Membership of x in the full (infinite) embedded point set."""
    ell = lam.length
    for i in range(1, ell + 1):
        if lam.row(i) - 2 * i == x.k:
            return True
    return x.k % 2 == 0 and x.k <= -2 * (ell + 1)
