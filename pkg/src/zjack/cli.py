"""Command line front end: kernel grids, correlations, sampling, ensembles.

Four subcommands (`kernel`, `corr`, `sample`, `meixner`) expose the library
over CSV and JSON.  Output is deterministic: fixed key and column order,
every float printed as 17-significant-digit scientific notation, and a
recorded seed wherever randomness is involved, so two runs with the same
flags produce identical bytes.

Exit codes: 0 on success, 2 for invalid parameters or usage, 3 when a
quadrature fails to converge or a cross-check exceeds its tolerance.
"""

from __future__ import annotations

import argparse
import math
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Sequence, Tuple

from . import meixner, oracle, theta2
from .meixner import MeixnerParams
from .partitions import HalfInt, ZParams
from .special import ConvergenceError

__all__ = ["main"]

CONFIG_ENV = "ZJACK_CONFIG"
CONFIG_FILE = "zjack.conf"

# Baked-in defaults; a config file may override them, flags beat both.
DEFAULTS: Dict[str, object] = {
    "tol": 1e-8,            # cross-route comparison tolerance
    "oracle_cutoff": 30,    # diagram-size cutoff for oracle summation
    "ensemble_window": 60,  # lattice window for ensemble enumeration
    "threads": 1,           # worker cap for grid evaluation
}

_INT_KEYS = {"oracle_cutoff", "ensemble_window", "threads"}


class UsageError(Exception):
    """Anything that should stop the run with exit code 2."""


# ---------------------------------------------------------------------------
# parsing helpers


def parse_complex(text: str) -> complex:
    """Complex parameter in `a+bi` or `a+bj` notation, plain reals allowed."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise UsageError(f"cannot parse complex number from {text!r}")


def parse_half(text: str) -> HalfInt:
    try:
        return HalfInt.parse(text)
    except ValueError as e:
        raise UsageError(str(e))


def parse_half_points(text: str) -> Tuple[HalfInt, ...]:
    return tuple(parse_half(tok) for tok in text.split(","))


def parse_half_range(text: str) -> List[HalfInt]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise UsageError(f"range must look like lo:hi, got {text!r}")
    a, b = parse_half(lo), parse_half(hi)
    if b.k < a.k:
        raise UsageError(f"empty range {text!r}")
    return [HalfInt(k) for k in range(a.k, b.k + 1)]


def parse_int_points(text: str) -> Tuple[int, ...]:
    out = []
    for tok in text.split(","):
        s = tok.strip()
        if not s.isdigit():
            raise UsageError(f"lattice points are nonnegative integers, got {tok!r}")
        out.append(int(s))
    return tuple(out)


def parse_int_range(text: str) -> List[int]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise UsageError(f"range must look like lo:hi, got {text!r}")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise UsageError(f"range bounds must be integers, got {text!r}")
    if a < 0 or b < a:
        raise UsageError(f"bad lattice range {text!r}")
    return list(range(a, b + 1))


def build_zparams(args) -> ZParams:
    z = parse_complex(args.z)
    zp = parse_complex(args.zp) if args.zp is not None else z.conjugate()
    try:
        return ZParams(z=z, zp=zp, xi=args.xi)
    except ValueError as e:
        raise UsageError(str(e))


# ---------------------------------------------------------------------------
# configuration


def load_config_file(path: str) -> Dict[str, object]:
    out: Dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, val = key.strip(), val.strip()
            if key not in DEFAULTS:
                known = ", ".join(sorted(DEFAULTS))
                raise UsageError(f"{path}:{lineno}: unknown key {key!r} (known: {known})")
            try:
                out[key] = int(val) if key in _INT_KEYS else float(val)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value {val!r} for {key}")
    return out


def effective_config(args) -> Dict[str, object]:
    cfg = dict(DEFAULTS)
    path = args.config or os.environ.get(CONFIG_ENV)
    if path is None and os.path.exists(CONFIG_FILE):
        path = CONFIG_FILE
    if path is not None:
        if not os.path.exists(path):
            raise UsageError(f"config file not found: {path}")
        cfg.update(load_config_file(path))
    # flags override the file; they are present only on some subcommands
    for flag, key in (
        ("tol", "tol"),
        ("cutoff", "oracle_cutoff"),
        ("x_max", "ensemble_window"),
        ("threads", "threads"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            cfg[key] = v
    if cfg["threads"] < 1:
        raise UsageError(f"threads must be at least 1, got {cfg['threads']}")
    return cfg


def show_config(cfg: Dict[str, object], out) -> None:
    for key in sorted(cfg):
        out.write(f"{key} = {_scalar_str(cfg[key])}\n")


# ---------------------------------------------------------------------------
# deterministic rendering


def _scalar_str(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return "null"
        return format(v, ".16e")
    if isinstance(v, int):
        return str(v)
    if v is None:
        return "null"
    return json.dumps(v, ensure_ascii=False)


def render_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [
            f'{"  " * (indent + 1)}{json.dumps(k)}: {render_json(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_scalar_str(v) for v in obj) + "]"
        rows = [f'{"  " * (indent + 1)}{render_json(v, indent + 1)}' for v in obj]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    return _scalar_str(obj)


def emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def csv_line(fields: Sequence[str]) -> str:
    return ",".join(fields) + "\n"


# ---------------------------------------------------------------------------
# kernel command


def _norm_factor(u: HalfInt, p: ZParams) -> float:
    v = complex((p.z + u.value + 1.5) * (p.zp + u.value + 1.5))
    if abs(v.imag) > 1e-9 * max(1.0, abs(v)) or v.real <= 0.0:
        raise ArithmeticError(f"nonpositive block normalizer at {u}: {v}")
    return math.sqrt(v.real)


def _block_entries(rep: str, x: HalfInt, y: HalfInt, p: ZParams) -> Tuple[float, ...]:
    """The four matrix-kernel entries at (x, y) along the chosen route."""
    if rep == "series":
        b = theta2.kernel_block(x, y, p)
        return (b.s, b.sd_minus, b.d_plus_s, b.d_plus_s_d_minus)
    if rep == "degenerate":
        b = theta2.degenerate_kernel(x, y, p.z, p.xi)
        return (b.s, b.sd_minus, b.d_plus_s, b.d_plus_s_d_minus)
    s: Callable[[HalfInt, HalfInt, ZParams], float]
    s = theta2.s_antisym_contour if rep == "contour" else theta2.s_via_iab
    nx, ny = _norm_factor(x, p), _norm_factor(y, p)
    x1, y1 = HalfInt(x.k + 1), HalfInt(y.k + 1)
    return (
        s(x, y, p),
        s(x, y1, p) / ny,
        s(x1, y, p) / nx,
        s(x1, y1, p) / (nx * ny),
    )


def cmd_kernel(args, cfg) -> int:
    p = build_zparams(args)
    rep = args.representation
    if rep == "degenerate":
        if args.zp is not None and abs(p.zp - (p.z - 1.0)) > 1e-12:
            raise UsageError(
                f"degenerate family needs z' = z - 1, got z={p.z}, z'={p.zp}"
            )
    elif not p.admissible():
        raise UsageError(
            "parameters not admissible: the radicand (z+x+1/2)(z'+x+1/2) must stay "
            "positive on the half-integer lattice, which needs a non-real conjugate "
            f"pair or two reals inside one open integer interval; got z={p.z}, z'={p.zp}"
        )
    grid = parse_half_range(args.range)
    cells = [(x, y) for x in grid for y in grid]

    def work(cell):
        x, y = cell
        try:
            entries = _block_entries(rep, x, y, p)
            return entries, "ok"
        except ConvergenceError as e:
            return (math.nan,) * 4, f"failed: {e}"

    if cfg["threads"] > 1:
        with ThreadPoolExecutor(max_workers=cfg["threads"]) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]

    lines = [csv_line(["x", "y", "s", "sd_minus", "d_plus_s", "d_plus_s_d_minus", "status"])]
    failed = False
    for (x, y), (entries, status) in zip(cells, results):
        failed = failed or status != "ok"
        lines.append(
            csv_line([str(x), str(y), *(_scalar_str(v) for v in entries), status])
        )
    emit("".join(lines), args.out)
    if failed:
        sys.stderr.write("kernel: some cells failed to converge (see status column)\n")
        return 3
    return 0


# ---------------------------------------------------------------------------
# correlation command


def cmd_correlation(args, cfg) -> int:
    p = build_zparams(args)
    method = "both" if args.both else args.method
    points = parse_half_points(args.points)
    if len(set(points)) != len(points):
        raise UsageError(f"points must be distinct, got {args.points!r}")
    cutoff = int(cfg["oracle_cutoff"])
    tol = float(cfg["tol"])

    report: Dict[str, object] = {
        "points": [str(pt) for pt in points],
        "method": method,
    }
    pf_val = oracle_val = tail = None
    if method in ("pfaffian", "both"):
        query = theta2.CorrelationQuery(points=points, params=p)
        pf_val = theta2.correlation(query)
        report["pfaffian"] = pf_val
    if method in ("oracle", "both"):
        oracle_val, tail = oracle.corr_oracle(points, p, cutoff)
        report["oracle"] = oracle_val
        report["tail"] = tail
        report["cutoff"] = cutoff
    bad = None
    if method == "both":
        diff = abs(pf_val - oracle_val)
        report["diff"] = diff
        report["tol"] = tol
        if diff > max(tol, tail):
            bad = f"corr: |pfaffian - oracle| = {diff:.3e} exceeds max(tol, tail)\n"
    report["params"] = _zparams_dict(p)
    emit(render_json(report) + "\n", args.out)
    if bad is not None:
        sys.stderr.write(bad)
        return 3
    return 0


def _zparams_dict(p: ZParams) -> Dict[str, object]:
    return {
        "z": [p.z.real, p.z.imag],
        "zp": [p.zp.real, p.zp.imag],
        "xi": p.xi,
        "theta": p.theta,
    }


# ---------------------------------------------------------------------------
# sample command


def cmd_sample(args, cfg) -> int:
    p = build_zparams(args)
    if args.count < 0:
        raise UsageError(f"count must be nonnegative, got {args.count}")
    diagrams = oracle.sample_many(p, args.count, args.seed)
    lines = [csv_line(["index", "seed", "size", "parts"])]
    for i, lam in enumerate(diagrams):
        parts = " ".join(str(part) for part in lam.parts)
        lines.append(csv_line([str(i), str(args.seed), str(lam.size), parts]))
    emit("".join(lines), args.out)
    return 0


# ---------------------------------------------------------------------------
# meixner command


def _meixner_corr_contour(pts: Sequence[int], mp: MeixnerParams) -> float:
    import numpy as np

    from .meixner import d_minus_kernel, d_plus_kernel, s2n_antisym_contour
    from .pfaffian import assemble, pfaffian

    def blk(x: int, y: int):
        dpx = d_plus_kernel(x, x + 1, mp)
        dmy = d_minus_kernel(y + 1, y, mp)
        return np.array(
            [
                [s2n_antisym_contour(x, y, mp), -s2n_antisym_contour(x, y + 1, mp) * dmy],
                [
                    -dpx * s2n_antisym_contour(x + 1, y, mp),
                    dpx * s2n_antisym_contour(x + 1, y + 1, mp) * dmy,
                ],
            ]
        )

    n = len(pts)
    blocks = {(i, j): blk(pts[i], pts[j]) for i in range(n) for j in range(i, n)}
    return pfaffian(assemble(blocks, n))


def _bridge_deviation(mp: MeixnerParams, size: int = 6) -> float:
    """Worst disagreement between the lattice kernel and its half-integer
    image sqrt(xi) * s_plain at z = 2N, z' = 2N + beta - 2, on a size x size
    corner of the lattice."""
    p = ZParams(z=2 * mp.N, zp=2 * mp.N + mp.beta - 2.0, xi=mp.xi)
    shift = 2 * mp.N
    root = math.sqrt(mp.xi)
    worst = 0.0
    for x in range(size):
        for y in range(size):
            a = meixner.s2n_operator(x, y, mp)
            b = root * theta2.s_plain(HalfInt(x - shift), HalfInt(y - shift), p)
            worst = max(worst, abs(a - b))
    return worst


def cmd_meixner(args, cfg) -> int:
    try:
        mp = MeixnerParams(N=args.n_particles, beta=args.beta, xi=args.xi)
    except ValueError as e:
        raise UsageError(str(e))
    tol = float(cfg["tol"])
    x_max = int(cfg["ensemble_window"])

    if args.points is None and args.grid is None:
        if not args.check_bridge:
            raise UsageError("need --points, --grid, or --check-bridge")
        dev = _bridge_deviation(mp)
        report = {
            "mode": "bridge",
            "bridge_max_deviation": dev,
            "tol": tol,
            "params": {"N": mp.N, "beta": mp.beta, "xi": mp.xi},
        }
        emit(render_json(report) + "\n", args.out)
        if dev > tol:
            sys.stderr.write(f"meixner: bridge deviation {dev:.3e} exceeds tol\n")
            return 3
        return 0

    if args.grid is not None:
        if args.mode == "ensemble":
            raise UsageError("ensemble mode wants --points, not --grid")
        grid = parse_int_range(args.grid)
        cells = [(x, y) for x in grid for y in grid]

        def work(cell):
            x, y = cell
            a = meixner.s2n_operator(x, y, mp)
            try:
                b = meixner.s2n_contour(x, y, mp)
                return a, b, abs(a - b), "ok"
            except ConvergenceError as e:
                return a, math.nan, math.nan, f"failed: {e}"

        if cfg["threads"] > 1:
            with ThreadPoolExecutor(max_workers=cfg["threads"]) as pool:
                results = list(pool.map(work, cells))
        else:
            results = [work(c) for c in cells]
        lines = [csv_line(["x", "y", "operator", "contour", "diff", "status"])]
        worst = 0.0
        failed = False
        for (x, y), (a, b, d, status) in zip(cells, results):
            failed = failed or status != "ok"
            if status == "ok":
                worst = max(worst, d)
            lines.append(
                csv_line([str(x), str(y), _scalar_str(a), _scalar_str(b), _scalar_str(d), status])
            )
        emit("".join(lines), args.out)
        if failed:
            sys.stderr.write("meixner: some cells failed to converge\n")
            return 3
        if worst > tol:
            sys.stderr.write(f"meixner: operator vs contour diff {worst:.3e} exceeds tol\n")
            return 3
        return 0

    pts = parse_int_points(args.points)
    if len(set(pts)) != len(pts):
        raise UsageError(f"points must be distinct, got {args.points!r}")
    report = {
        "points": list(pts),
        "mode": args.mode,
    }
    tail = None
    if args.mode == "operator":
        value = meixner.meixner_correlation(pts, mp)
        cross_mode = "contour"
        cross = _meixner_corr_contour(pts, mp)
    elif args.mode == "contour":
        value = _meixner_corr_contour(pts, mp)
        cross_mode = "operator"
        cross = meixner.meixner_correlation(pts, mp)
    else:
        value, tail = oracle.meixner_oracle(pts, mp, x_max)
        cross_mode = "operator"
        cross = meixner.meixner_correlation(pts, mp)
    diff = abs(value - cross)
    report["value"] = value
    report["cross_mode"] = cross_mode
    report["cross_value"] = cross
    report["diff"] = diff
    if tail is not None:
        report["tail"] = tail
        report["x_max"] = x_max
    report["tol"] = tol
    if args.check_bridge:
        report["bridge_max_deviation"] = _bridge_deviation(mp)
    report["params"] = {"N": mp.N, "beta": mp.beta, "xi": mp.xi}
    emit(render_json(report) + "\n", args.out)
    threshold = max(tol, tail) if tail is not None else tol
    bad = diff > threshold
    if args.check_bridge and report["bridge_max_deviation"] > tol:
        bad = True
    if bad:
        sys.stderr.write(f"meixner: cross-mode diff {diff:.3e} exceeds tolerance\n")
        return 3
    return 0


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="zjack",
        description="Pfaffian point process toolkit: kernels, correlations, sampling.",
    )
    top.add_argument("--config", help=f"config file (default: ${CONFIG_ENV} or ./{CONFIG_FILE})")
    top.add_argument(
        "--show-config",
        action="store_true",
        help="print the effective configuration and exit",
    )
    sub = top.add_subparsers(dest="command")

    def add_zflags(sp):
        sp.add_argument("--z", required=True, help="parameter z, e.g. 1.5+0.5i")
        sp.add_argument("--zp", help="parameter z' (default: conjugate of z)")
        sp.add_argument("--xi", type=float, required=True, help="mixing parameter in (0,1)")

    def add_common(sp):
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--threads", type=int, help="cap on grid workers")

    k = sub.add_parser("kernel", help="matrix-kernel entries on a grid")
    add_zflags(k)
    k.add_argument("--range", required=True, help="half-integer grid lo:hi, e.g. -9/2:9/2")
    k.add_argument(
        "--representation",
        choices=["series", "contour", "iab", "degenerate"],
        default="series",
    )
    add_common(k)
    k.set_defaults(fn=cmd_kernel)

    c = sub.add_parser("corr", help="correlation function at chosen points")
    add_zflags(c)
    c.add_argument("--points", required=True, help="comma list of half-integers, e.g. -3/2,1/2")
    c.add_argument("--method", choices=["pfaffian", "oracle", "both"], default="pfaffian")
    c.add_argument("--both", action="store_true", help="shorthand for --method both")
    c.add_argument("--cutoff", type=int, help="oracle diagram-size cutoff")
    c.add_argument("--tol", type=float, help="comparison tolerance")
    add_common(c)
    c.set_defaults(fn=cmd_correlation)

    s = sub.add_parser("sample", help="draw diagrams from the mixed measure")
    add_zflags(s)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    add_common(s)
    s.set_defaults(fn=cmd_sample)

    m = sub.add_parser("meixner", help="lattice ensemble kernels and correlations")
    m.add_argument("--n-particles", type=int, required=True, help="particle count N")
    m.add_argument("--beta", type=float, required=True)
    m.add_argument("--xi", type=float, required=True)
    m.add_argument("--points", help="comma list of lattice points, e.g. 0,2,5")
    m.add_argument("--grid", help="lattice grid lo:hi for kernel tables")
    m.add_argument("--mode", choices=["operator", "contour", "ensemble"], default="operator")
    m.add_argument("--x-max", type=int, help="enumeration window for ensemble mode")
    m.add_argument("--tol", type=float, help="comparison tolerance")
    m.add_argument(
        "--check-bridge",
        action="store_true",
        help="report the worst deviation from the half-integer kernel image",
    )
    add_common(m)
    m.set_defaults(fn=cmd_meixner)
    return top


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        if args.show_config:
            show_config(cfg, sys.stdout)
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        return args.fn(args, cfg)
    except UsageError as e:
        sys.stderr.write(f"zjack: {e}\n")
        return 2
    except (ValueError, TypeError, ArithmeticError) as e:
        sys.stderr.write(f"zjack: {e}\n")
        return 2
    except ConvergenceError as e:
        sys.stderr.write(f"zjack: quadrature did not converge: {e}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
