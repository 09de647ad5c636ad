"""Brute-force ground truth, independent of the kernel machinery.

Correlation values come from summing the mixed measure over Young diagrams
directly, ensemble probabilities from enumerating particle configurations,
and samples from exact inverse-CDF draws.  Every truncated quantity travels
with a rigorous tail bound so comparison tolerances never have to be
guessed.  Nothing in this module touches a contour or a hypergeometric
series; agreement with :mod:`zjack.theta2` and :mod:`zjack.meixner` is
therefore evidence, not bookkeeping.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .meixner import MeixnerParams, ensemble_prob, ensemble_tail
from .partitions import (
    DIAGRAM_CAP,
    HalfInt,
    YoungDiagram,
    ZParams,
    d2_contains,
    enumerate_diagrams,
    zmeasure_mixed,
    zmeasure_n,
)

__all__ = [
    "LAYER_CAP",
    "tail_bound",
    "corr_oracle",
    "sample_diagram",
    "sample_many",
    "meixner_oracle",
    "oracle_report",
    "clear_caches",
]

LAYER_CAP = 40       # the sampler never draws a diagram larger than this
_REL_STOP = 1e-18    # relative term size that ends a tail summation


# ---------------------------------------------------------------------------
# the size-layer decomposition

# Mixing the fixed-size measures with weights proportional to
# (t)_n xi^n / n! splits the total mass into layers indexed by the diagram
# size n.  Everything below leans on that decomposition: the tail bound sums
# the layer masses past a cutoff, and the sampler first picks a layer, then
# a diagram inside it.


def _series_params(p: ZParams) -> Tuple[float, float]:
    """Validated (t, xi) for a parameter point whose layer masses form a
    positive series.  Raises ValueError otherwise."""
    t = complex(p.t)
    if abs(t.imag) > 1e-12 * max(1.0, abs(t)):
        raise ValueError(f"not a positive series: t = zz'/theta = {t} is not real")
    if t.real < 0.0:
        raise ValueError(f"not a positive series: t = zz'/theta = {t.real} < 0")
    xi = float(p.xi)
    if not (0.0 < xi < 1.0):
        raise ValueError(f"xi must lie in (0,1), got {xi}")
    return t.real, xi


def _layer_mass(t: float, xi: float, n: int) -> float:
    """(1-xi)^t (t)_n xi^n / n!, the total mass of the size-n layer."""
    if t == 0.0:
        # All mass sits on the empty diagram.
        return 1.0 if n == 0 else 0.0
    return math.exp(
        t * math.log1p(-xi)
        + math.lgamma(t + n)
        - math.lgamma(t)
        + n * math.log(xi)
        - math.lgamma(n + 1.0)
    )


def tail_bound(p: ZParams, cutoff: int) -> float:
    """Mass of all diagrams with more than `cutoff` boxes.

    The layer masses are summed term by term, with the consecutive ratio
    xi (t + n) / (n + 1), until they fall below 1e-18 of the running total.
    The result decreases monotonically in the cutoff and is an exact error
    envelope for any truncated summation over diagram sizes.
    """
    if cutoff < 0:
        raise ValueError(f"cutoff must be nonnegative, got {cutoff}")
    t, xi = _series_params(p)
    if t == 0.0:
        return 0.0
    n = cutoff + 1
    term = _layer_mass(t, xi, n)
    total = term
    while term > _REL_STOP * total:
        term *= xi * (t + n) / (n + 1.0)
        n += 1
        total += term
    return total


# ---------------------------------------------------------------------------
# correlations by direct summation


def corr_oracle(
    points: Sequence[HalfInt],
    p: ZParams,
    cutoff: int,
    tol: float | None = None,
) -> Tuple[float, float]:
    """Probability that the embedded point set contains all the `points`.

    Sums the mixed measure over every diagram of at most `cutoff` boxes
    whose embedding contains the points, and returns (value, tail) with
    tail = tail_bound(p, cutoff).  Passing `tol` turns an insufficient
    cutoff into an error instead of a silently loose answer.
    """
    pts = tuple(points)
    if not pts:
        raise ValueError("need at least one point")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    for pt in pts:
        if not isinstance(pt, HalfInt):
            raise TypeError(f"points must be HalfInt, got {type(pt).__name__}")
    if cutoff > DIAGRAM_CAP:
        raise ValueError(f"cutoff {cutoff} exceeds the enumeration cap {DIAGRAM_CAP}")
    tail = tail_bound(p, cutoff)
    if tol is not None and tail > tol:
        raise ValueError(
            f"cutoff {cutoff} too small: tail {tail:.3e} exceeds tolerance {tol:.3e}"
        )
    value = 0.0
    for n in range(cutoff + 1):
        for lam in enumerate_diagrams(n):
            if all(d2_contains(pt, lam) for pt in pts):
                value += zmeasure_mixed(lam, p).real
    return value, tail


# ---------------------------------------------------------------------------
# exact sampling

# Two inverse-CDF draws per diagram: one for the size layer, one for the
# diagram inside the layer.  Both tables are cached per parameter point,
# and the in-layer weights are the fixed-size probabilities themselves,
# so the draw is exact up to the size cap.

_layer_tables: Dict[tuple, np.ndarray] = {}
_diagram_tables: Dict[tuple, Tuple[List[YoungDiagram], np.ndarray]] = {}


def _params_key(p: ZParams) -> tuple:
    return (complex(p.z), complex(p.zp), float(p.xi), float(p.theta))


def _layer_cdf(p: ZParams) -> np.ndarray:
    key = _params_key(p)
    got = _layer_tables.get(key)
    if got is None:
        t, xi = _series_params(p)
        got = np.cumsum([_layer_mass(t, xi, n) for n in range(LAYER_CAP + 1)])
        _layer_tables[key] = got
    return got


def _diagram_cdf(p: ZParams, n: int) -> Tuple[List[YoungDiagram], np.ndarray]:
    key = _params_key(p) + (n,)
    got = _diagram_tables.get(key)
    if got is None:
        diagrams = enumerate_diagrams(n)
        w = np.array([zmeasure_n(lam, p).real for lam in diagrams])
        if np.any(w < -1e-9):
            raise ValueError(
                "the fixed-size measure is signed at these parameters; "
                "sampling needs an admissible series"
            )
        w = np.clip(w, 0.0, None)
        got = (diagrams, np.cumsum(w) / w.sum())
        _diagram_tables[key] = got
    return got


def _draw(p: ZParams, rng: np.random.Generator) -> YoungDiagram:
    cum = _layer_cdf(p)
    n = int(np.searchsorted(cum, rng.random(), side="right"))
    if n > LAYER_CAP:
        raise ValueError(f"draw fell past the size cap {LAYER_CAP} and is rejected")
    diagrams, dcum = _diagram_cdf(p, n)
    i = int(np.searchsorted(dcum, rng.random(), side="right"))
    return diagrams[min(i, len(diagrams) - 1)]


def sample_diagram(p: ZParams, seed) -> YoungDiagram:
    """One diagram under the mixed measure, deterministic for a given seed."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return _draw(p, rng)


def sample_many(p: ZParams, count: int, seed) -> List[YoungDiagram]:
    """Independent draws off one root seed.

    Each draw runs on its own spawned child stream, so draw i is the same
    for every `count` >= i+1 and batches can be grown without replaying.
    """
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    root = np.random.SeedSequence(seed)
    out = []
    for child in root.spawn(count):
        out.append(_draw(p, np.random.default_rng(child)))
    return out


# ---------------------------------------------------------------------------
# ensemble correlations by enumeration


def meixner_oracle(
    points: Sequence[int],
    mp: MeixnerParams,
    x_max: int,
    tol: float | None = None,
) -> Tuple[float, float]:
    """Probability that the N-point ensemble contains all the `points`.

    Enumerates every configuration within [0, x_max] containing the points
    and adds up their probabilities; the tail reports the mass the window
    cuts off.  More points than particles gives exactly zero.
    """
    pts = tuple(int(u) for u in points)
    if not pts:
        raise ValueError("need at least one point")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    if min(pts) < 0:
        raise ValueError(f"lattice points are nonnegative, got {min(pts)}")
    if max(pts) > x_max:
        raise ValueError(f"points exceed x_max={x_max}: {pts}")
    tail = ensemble_tail(mp, x_max)
    if tol is not None and tail > tol:
        raise ValueError(
            f"x_max {x_max} too small: tail {tail:.3e} exceeds tolerance {tol:.3e}"
        )
    if len(pts) > mp.N:
        return 0.0, tail
    fixed = set(pts)
    rest = [u for u in range(x_max + 1) if u not in fixed]
    value = 0.0
    for combo in combinations(rest, mp.N - len(pts)):
        config = tuple(sorted(pts + combo))
        value += ensemble_prob(config, mp, x_max)
    return value, tail


# ---------------------------------------------------------------------------
# reporting


def oracle_report(
    points: Sequence,
    value: float,
    tail: float,
    cutoff: int,
    params,
    seed=None,
) -> dict:
    """JSON-ready record of one oracle evaluation, stable key order."""
    if isinstance(params, ZParams):
        pd = {
            "z": [complex(params.z).real, complex(params.z).imag],
            "zp": [complex(params.zp).real, complex(params.zp).imag],
            "xi": float(params.xi),
            "theta": float(params.theta),
        }
    elif isinstance(params, MeixnerParams):
        pd = {"N": params.N, "beta": float(params.beta), "xi": float(params.xi)}
    else:
        raise TypeError(f"unsupported params type {type(params).__name__}")
    rep = {
        "points": [str(pt) for pt in points],
        "value": value,
        "tail": tail,
        "cutoff": cutoff,
        "params": pd,
    }
    if seed is not None:
        rep["seed"] = seed
    return rep


def clear_caches() -> None:
    _layer_tables.clear()
    _diagram_tables.clear()
