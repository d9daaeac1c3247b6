"""Command-line front end: ``bfree <verb> --config run.json [--out DIR]``.

Exit codes: 0 success, 1 selfcheck failure, 2 configuration error,
3 budget or overflow, 4 cache mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any

import numpy as np

from . import kernels
from . import dynamics as dyn
from .config import RunConfig, canonical_json, load_config
from .entropy import entropy_estimate, entropy_formula
from .errors import BFreeError, BudgetExceeded, CacheMismatch, ConfigParse, SizeOverflow
from .geometry import Box
from .ring_algebra import factor_rational_prime
from .selfcheck import run_selfcheck
from .sieve_measure import (
    MeasureValue,
    Window,
    all_cylinders,
    density,
    mirsky_cylinder,
    pattern_matches,
    sieve_window,
    synthetic_window,
)
from .wincache import atomic_write, load_window, save_window

VERBS = ("density", "cylinder", "entropy", "sieve", "scan", "fibers", "factor", "selfcheck")

# exact rationals of long truncated products run to tens of thousands of digits
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_BUDGET, EXIT_CACHE = 0, 1, 2, 3, 4


# --------------------------------------------------------------------------
# rendering


def decimal_str(x: Fraction, digits: int) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def exact(x, digits: int) -> dict:
    x = Fraction(x)
    return {"num": str(x.numerator), "den": str(x.denominator), "decimal": decimal_str(x, digits)}


def measure(mv: MeasureValue, digits: int) -> dict:
    return {
        "value": exact(mv.value, digits),
        "halfwidth": exact(mv.halfwidth, digits),
        "lo": exact(mv.lo, digits),
        "hi": exact(mv.hi, digits),
    }


def box_json(box: Box) -> dict:
    out = {"lo": list(box.lo), "shape": list(box.shape), "points": box.size}
    if box.radius is not None:
        out["radius"] = box.radius
    return out


def csv_text(header: list[str], rows: list[list]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode()


# --------------------------------------------------------------------------
# windows and caching


def get_window(cfg: RunConfig, cache_dir: str | None = None, threads: int = 1) -> tuple[Window, str]:
    """The sieve window of the config, through the cache when one is given.
    The second value says where it came from: none, stored, hit or loaded."""
    if cfg.box is None:
        raise ConfigParse("field 'box' is required for this command")
    h = cfg.window_hash
    if cfg.window_cache:
        w = load_window(cfg.window_cache, h)
        return Window(w.box, w.bits, cfg.family, w.L), "loaded"
    path = None
    if cache_dir:
        path = os.path.join(cache_dir, h.hex()[:32] + ".bfwin")
        if os.path.exists(path):
            w = load_window(path, h)
            return Window(w.box, w.bits, cfg.family, w.L), "hit"
    partition = int(cfg.section("sieve").get("partition", threads))
    w = sieve_window(cfg.family, cfg.box, cfg.L, partition=partition, threads=threads)
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        save_window(path, w, h)
        return w, "stored"
    return w, "none"


# --------------------------------------------------------------------------
# verbs; each returns (results, csv) with csv = None or (header, rows)


def cmd_density(cfg: RunConfig, ctx: dict):
    p = cfg.precision
    mv = density(cfg.family, cfg.L, cfg.s)
    res = {
        "L": cfg.L,
        "max_norm": cfg.family.ideals[cfg.L - 1].norm if cfg.L else None,
        "density": measure(mv, p),
    }
    if cfg.box is not None:
        w, ctx["cache_status"] = get_window(cfg, ctx["cache"], ctx["threads"])
        res["empirical"] = {"box": box_json(w.box), "frequency": exact(w.density(), p)}
    return res, None


def cmd_cylinder(cfg: RunConfig, ctx: dict):
    p = cfg.precision
    shape = cfg.section("cylinder").get("_shape")
    if shape is None:
        raise ConfigParse("field 'cylinder.shape' is required")
    w, ctx["cache_status"] = get_window(cfg, ctx["cache"], ctx["threads"])
    rows, table, worst = [], [], Fraction(0)
    for code, pat in enumerate(all_cylinders(shape)):
        mv = mirsky_cylinder(pat, cfg.family, cfg.L)
        hits, total = pattern_matches(w, pat)
        if total == 0:
            raise ConfigParse("the cylinder shape does not fit inside the box")
        emp = Fraction(hits, total)
        dev = abs(emp - mv.value)
        worst = max(worst, dev)
        table.append(
            {"code": code, "ones": [list(a) for a in sorted(pat.ones)], "mirsky": measure(mv, p),
             "empirical": exact(emp, p), "deviation": exact(dev, p)}
        )
        rows.append([code, mv.value.numerator, mv.value.denominator, hits, total, decimal_str(dev, p)])
    res = {"box": box_json(w.box), "cylinders": table, "max_deviation": exact(worst, p)}
    return res, (["code", "mirsky_num", "mirsky_den", "hits", "positions", "deviation"], rows)


def cmd_entropy(cfg: RunConfig, ctx: dict):
    p = cfg.precision
    sec = cfg.section("entropy")
    formula = entropy_formula(cfg.family, cfg.L, cfg.s)
    boxes = sec.get("_boxes") or ([cfg.box] if cfg.box is not None else [])
    tol = sec.get("_tolerance")
    out, rows = [], []
    for box in boxes:
        est = entropy_estimate(
            cfg.family, cfg.L, cfg.s, box, method=sec.get("method", "auto"),
            term_budget=sec.get("term_budget", 2**24),
        )
        item = {
            "box": box_json(box),
            "count": str(est.count.count),
            "method": est.count.method,
            "effective_L": est.count.effective_L,
            "estimate_lo": exact(est.lo, p),
            "estimate_hi": exact(est.hi, p),
        }
        if tol is not None:
            dist = max(abs(est.hi - formula.lo), abs(formula.hi - est.lo))
            item["within_tolerance"] = dist <= tol
        out.append(item)
        rows.append([box.size, est.count.method, est.count.effective_L, decimal_str(est.lo, p), decimal_str(est.hi, p)])
    res = {"L": cfg.L, "s": list(cfg.s) if cfg.s else None, "formula": measure(formula, p), "estimates": out}
    if tol is not None:
        res["tolerance"] = exact(tol, p)
    return res, (["points", "method", "effective_L", "estimate_lo", "estimate_hi"], rows)


def cmd_sieve(cfg: RunConfig, ctx: dict):
    w, ctx["cache_status"] = get_window(cfg, ctx["cache"], ctx["threads"])
    ones = int(w.bits.sum())
    return {
        "box": box_json(w.box),
        "L": cfg.L,
        "ones": ones,
        "density": exact(Fraction(ones, w.box.size), cfg.precision),
        "window_hash": cfg.window_hash.hex(),
    }, None


def cmd_scan(cfg: RunConfig, ctx: dict):
    w, ctx["cache_status"] = get_window(cfg, ctx["cache"], ctx["threads"])
    extents = cfg.section("scan").get("_extents", [(1,) * cfg.order.degree])
    out, rows = [], []
    for ext in extents:
        sc = dyn.zero_window_scan(w, extent=ext)
        out.append(
            {"extent": list(ext), "count": sc.count, "first": sc.positions[:20].tolist(),
             "max_gaps": list(sc.max_gaps)}
        )
        rows.extend([list(ext), *pos] for pos in sc.positions.tolist())
    rows = [[" ".join(map(str, r[0]))] + r[1:] for r in rows]
    header = ["extent"] + [f"x{t}" for t in range(cfg.order.degree)]
    return {"box": box_json(w.box), "scans": out}, (header, rows)


def _fiber_json(rep: dyn.FiberReport) -> list[dict]:
    return [
        {"members": sorted(list(c) for c in m), "untested": u, "complete": c}
        for m, u, c in zip(rep.members, rep.untested, rep.complete)
    ]


def cmd_fibers(cfg: RunConfig, ctx: dict):
    kind = cfg.section("fibers").get("window", "eta")
    if cfg.box is None:
        raise ConfigParse("field 'box' is required for this command")
    if kind == "eta":
        w, ctx["cache_status"] = get_window(cfg, ctx["cache"], ctx["threads"])
    elif kind == "zero":
        w = synthetic_window(cfg.box)
    elif kind == "delta":
        w = synthetic_window(cfg.box).with_bit((0,) * cfg.order.degree, 1)
    elif isinstance(kind, dict) and "group_point" in kind:
        vals = kind["group_point"]
        if not isinstance(vals, list) or len(vals) != cfg.L:
            raise ConfigParse(f"field 'fibers.window.group_point': expected {cfg.L} residues")
        g = dyn.GroupPoint.of(cfg.family, vals)
        w = dyn.phi_window(g, cfg.box)
        kind = {"group_point": [list(r) for r in g.key()]}
    else:
        raise ConfigParse("field 'fibers.window': expected eta, zero, delta or {group_point: [...]}")
    theta = dyn.theta_window(w, cfg.family, cfg.L)
    joining = dyn.joining_fiber(w, cfg.family, cfg.L)
    try:
        dominated: Any = dyn.check_phi_theta(w, cfg.family, cfg.L)
    except BFreeError:
        dominated = "inconclusive"
    return {
        "box": box_json(cfg.box),
        "window": kind,
        "theta": _fiber_json(theta),
        "joining_fiber": _fiber_json(joining),
        "phi_theta_dominates": dominated,
    }, None


def cmd_factor(cfg: RunConfig, ctx: dict):
    primes = cfg.section("factor").get("_primes") or []
    out, rows = [], []
    for pr in primes:
        try:
            facs = factor_rational_prime(pr, cfg.order, cfg.raw.get("assume_maximal"))
        except BFreeError as exc:
            out.append({"p": pr, "error": f"{type(exc).__name__}: {exc}"})
            continue
        items = [{"basis": [list(r) for r in P.basis], "e": e, "f": f, "norm": P.norm} for P, e, f in facs]
        out.append({"p": pr, "primes": items})
        rows.extend([pr, it["e"], it["f"], it["norm"]] for it in items)
    return {"discriminant": str(cfg.order.discriminant()), "factorizations": out}, (["p", "e", "f", "norm"], rows)


def cmd_selfcheck(cfg: RunConfig, ctx: dict):
    trials = int(cfg.section("selfcheck").get("trials", 100))
    checks = run_selfcheck(cfg.seed, trials)
    return {"checks": checks, "passed": all(c["passed"] for c in checks)}, None


COMMANDS = {
    "density": cmd_density,
    "cylinder": cmd_cylinder,
    "entropy": cmd_entropy,
    "sieve": cmd_sieve,
    "scan": cmd_scan,
    "fibers": cmd_fibers,
    "factor": cmd_factor,
    "selfcheck": cmd_selfcheck,
}


def run_command(
    cfg: RunConfig,
    command: str,
    out_dir: str | None = None,
    cache_dir: str | None = None,
    threads: int = 1,
) -> dict:
    """Run one verb and return the report; with ``out_dir`` also write
    <command>.json (and <command>.csv for tabular verbs) atomically."""
    if command not in COMMANDS:
        raise ConfigParse(f"unknown command {command!r}")
    t0 = time.perf_counter()
    ctx = {"cache": cache_dir, "threads": threads, "cache_status": None}
    results, table = COMMANDS[command](cfg, ctx)
    report = {
        "command": command,
        "config": cfg.raw,
        "config_hash": cfg.config_hash.hex(),
        "seed": cfg.seed,
        "results": results,
        # run metadata, excluded from determinism comparisons
        "timing": {
            "seconds": round(time.perf_counter() - t0, 6),
            "backend": kernels.BACKEND,
            "window_cache": ctx["cache_status"],
        },
    }
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        atomic_write(os.path.join(out_dir, f"{command}.json"), render_json(report))
        if table is not None:
            atomic_write(os.path.join(out_dir, f"{command}.csv"), csv_text(*table))
    return report


def render_json(report: dict) -> bytes:
    return (json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n").encode()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def deterministic_part(report: dict) -> bytes:
    """The report without its timing block, canonically encoded."""
    return canonical_json({k: v for k, v in report.items() if k != "timing"})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bfree", description="B-free sets in number fields: densities, entropy, dynamics.")
    ap.add_argument("command", choices=VERBS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=None, help="directory for <command>.json / .csv; stdout when omitted")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--cache", default=None, help="directory of cached sieve windows")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed (0 .. 2^64-1)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigParse("--threads must be positive")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigParse("--seed must fit in 64 unsigned bits")
        cfg = load_config(args.config, args.seed)
        report = run_command(cfg, args.command, args.out, args.cache, args.threads)
    except CacheMismatch as exc:
        print(f"bfree: cache mismatch: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (BudgetExceeded, SizeOverflow, OverflowError) as exc:
        print(f"bfree: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except BFreeError as exc:
        print(f"bfree: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.out:
        sys.stdout.write(render_json(report).decode())
    if args.command == "selfcheck" and not report["results"]["passed"]:
        return EXIT_CHECK
    return EXIT_OK
