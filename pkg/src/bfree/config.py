"""Run configuration: JSON parsing, validation and hashing.

Schema (keys not listed are rejected)::

    {
      "polynomial": [1, 0, 1] | "x^2 + 1",   coefficients lowest degree first
      "assume_maximal": true | false | null,
      "wide": false,
      "family": {"kind": "prime_power", "k": 2, "norm_bound": 10000}
              | {"kind": "explicit", "generators": [4, 9] or [[1, 1], [[2], [1, 1]]]},
      "truncation": 12 | {"L": 12} | {"norm_cutoff": 10000},
      "s": 1 | [2, 1, ...],
      "box": 1000 | {"radius": 1000} | {"lo": [0], "shape": [1000001]},
      "precision": 15,
      "seed": 0,
      "window_cache": "path/to/file.bfwin",
      "cylinder": {"shape": [0, 1, 2]},
      "entropy": {"boxes": [...], "method": "auto", "term_budget": 16777216, "tolerance": "1/20"},
      "sieve": {"partition": 1},
      "scan": {"extents": [1, 2, 3]},
      "fibers": {"window": "eta" | "zero" | "delta" | {"group_point": [...]}},
      "factor": {"primes": [2, 3, 5]} | {"prime_bound": 50},
      "selfcheck": {"trials": 100}
    }

An explicit generator entry is an integer n (the ideal (n)), the power-basis
coordinates of one element, or a list of such coordinate lists. Numbers are
integers; ratios are strings such as "1/20".
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import BFreeError, ConfigParse
from .geometry import Box, folner_box, segment_box
from .ring_algebra import BFamily, ExplicitSpec, FieldOrder, PrimePowerSpec, build_bfamily, make_order

TOP_KEYS = {
    "polynomial", "assume_maximal", "wide", "family", "truncation", "s", "box", "precision",
    "seed", "window_cache", "cylinder", "entropy", "sieve", "scan", "fibers", "factor", "selfcheck",
}
# fields that determine a sieve window, and hence its cache identity
WINDOW_KEYS = ("polynomial", "assume_maximal", "family", "truncation", "box")


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode()


def digest(obj: Any) -> bytes:
    return hashlib.sha256(canonical_json(obj)).digest()


def _int(v, where: str, lo: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigParse(f"field {where!r}: expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigParse(f"field {where!r}: must be at least {lo}")
    return v


def _ratio(v, where: str) -> Fraction:
    if isinstance(v, int) and not isinstance(v, bool):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigParse(f"field {where!r}: expected an integer or a ratio string like '1/20', got {v!r}")


def _dict(v, where: str) -> dict:
    if not isinstance(v, dict):
        raise ConfigParse(f"field {where!r}: expected an object")
    return v


def _polynomial(v) -> list[int]:
    if isinstance(v, list):
        return [_int(c, f"polynomial[{i}]") for i, c in enumerate(v)]
    if isinstance(v, str):
        import sympy

        try:
            x = sympy.Symbol("x")
            poly = sympy.Poly(sympy.sympify(v, locals={"x": x}), x)
            coeffs = [int(c) for c in reversed(poly.all_coeffs())]
        except (sympy.SympifyError, TypeError, ValueError, sympy.PolynomialError) as exc:
            raise ConfigParse(f"field 'polynomial': cannot parse {v!r} as an integer polynomial in x ({exc})")
        if any(sympy.Rational(c) != c for c in poly.all_coeffs()):
            raise ConfigParse("field 'polynomial': coefficients must be integers")
        return coeffs
    raise ConfigParse("field 'polynomial': expected a coefficient list or a string in x")


def parse_box(v, d: int, where: str = "box") -> Box:
    if isinstance(v, int) and not isinstance(v, bool):
        return folner_box(d, _int(v, where, 0))
    v = _dict(v, where)
    if "radius" in v:
        return folner_box(d, _int(v["radius"], f"{where}.radius", 0))
    try:
        lo, shape = v["lo"], v["shape"]
    except KeyError as exc:
        raise ConfigParse(f"field {where!r}: needs 'radius' or both 'lo' and 'shape'") from exc
    lo = [lo] * d if isinstance(lo, int) else lo
    shape = [shape] * d if isinstance(shape, int) else shape
    lo = [_int(x, f"{where}.lo") for x in lo]
    shape = [_int(x, f"{where}.shape", 1) for x in shape]
    try:
        return segment_box(d, lo, shape)
    except ValueError as exc:
        raise ConfigParse(f"field {where!r}: {exc}") from exc


def _points(v, d: int, where: str) -> list[tuple[int, ...]]:
    if not isinstance(v, list) or not v:
        raise ConfigParse(f"field {where!r}: expected a nonempty list of points")
    out = []
    for i, p in enumerate(v):
        p = [p] if isinstance(p, int) and not isinstance(p, bool) else p
        if not isinstance(p, list) or len(p) != d:
            raise ConfigParse(f"field {where}[{i}]: expected {d} integer coordinates")
        out.append(tuple(_int(x, f"{where}[{i}]") for x in p))
    return out


@dataclass
class RunConfig:
    raw: dict
    order: FieldOrder
    family: BFamily
    L: int
    s: tuple[int, ...] | None
    box: Box | None
    precision: int = 15
    seed: int = 0
    window_cache: str | None = None
    params: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> bytes:
        return digest(self.raw)

    @property
    def window_hash(self) -> bytes:
        return digest({k: self.raw.get(k) for k in WINDOW_KEYS})

    def section(self, name: str) -> dict:
        return self.params.get(name, {})


def _element(order: FieldOrder, v, where: str):
    coords = [_int(x, where) for x in v]
    if len(coords) > order.degree:
        raise ConfigParse(f"field {where!r}: more than {order.degree} coordinates")
    try:
        return order.element(coords)
    except (BFreeError, OverflowError) as exc:
        raise ConfigParse(f"field {where!r}: {exc}") from exc


def _family(order: FieldOrder, v, assume_maximal) -> BFamily:
    v = _dict(v, "family")
    kind = v.get("kind")
    if kind == "prime_power":
        spec = PrimePowerSpec(_int(v.get("k"), "family.k", 2), _int(v.get("norm_bound"), "family.norm_bound", 1))
    elif kind == "explicit":
        gens = v.get("generators")
        if not isinstance(gens, list) or not gens:
            raise ConfigParse("field 'family.generators': expected a nonempty list")
        # an entry is an integer, one element's coordinates, or a list of such elements
        parsed = []
        for i, g in enumerate(gens):
            where = f"family.generators[{i}]"
            if not isinstance(g, list):
                parsed.append((_int(g, where),))
            elif g and all(isinstance(x, list) for x in g):
                parsed.append(tuple(_element(order, x, where) for x in g))
            else:
                parsed.append((_element(order, g, where),))
        spec = ExplicitSpec(tuple(parsed))
    else:
        raise ConfigParse("field 'family.kind': expected 'prime_power' or 'explicit'")
    try:
        return build_bfamily(order, spec, assume_maximal=assume_maximal)
    except (BFreeError, ValueError) as exc:
        raise ConfigParse(f"field 'family': {type(exc).__name__}: {exc}") from exc


def parse_config(raw: dict, seed: int | None = None) -> RunConfig:
    raw = copy.deepcopy(_dict(raw, "<root>"))
    unknown = sorted(set(raw) - TOP_KEYS)
    if unknown:
        raise ConfigParse(f"unknown field(s): {', '.join(unknown)}")
    if "polynomial" not in raw or "family" not in raw:
        raise ConfigParse("fields 'polynomial' and 'family' are required")
    coeffs = _polynomial(raw["polynomial"])
    am = raw.get("assume_maximal")
    if am is not None and not isinstance(am, bool):
        raise ConfigParse("field 'assume_maximal': expected true, false or null")
    wide = raw.get("wide", False)
    if not isinstance(wide, bool):
        raise ConfigParse("field 'wide': expected a boolean")
    try:
        order = make_order(coeffs, wide=wide, maximal=bool(am))
    except (BFreeError, ValueError) as exc:
        raise ConfigParse(f"field 'polynomial': {type(exc).__name__}: {exc}") from exc
    family = _family(order, raw["family"], am)
    d = order.degree

    L = len(family)
    t = raw.get("truncation")
    if t is not None:
        if isinstance(t, int) and not isinstance(t, bool):
            t = {"L": t}
        t = _dict(t, "truncation")
        if "L" in t:
            L = _int(t["L"], "truncation.L", 1)
            if L > len(family):
                raise ConfigParse(f"field 'truncation.L': family has only {len(family)} ideals")
        elif "norm_cutoff" in t:
            L = family.truncation_for_norm(_int(t["norm_cutoff"], "truncation.norm_cutoff", 1))
        else:
            raise ConfigParse("field 'truncation': expected 'L' or 'norm_cutoff'")

    s = raw.get("s")
    if s is not None:
        if isinstance(s, int) and not isinstance(s, bool):
            s = [s] * L
        if not isinstance(s, list):
            raise ConfigParse("field 's': expected an integer or a list")
        s = tuple(_int(x, f"s[{i}]", 1) for i, x in enumerate(s))
        if len(s) < L:
            raise ConfigParse(f"field 's': needs {L} entries, got {len(s)}")
        s = s[:L]
        for i, (x, b) in enumerate(zip(s, family.ideals)):
            if x > b.norm:
                raise ConfigParse(f"field s[{i}]: {x} exceeds the norm {b.norm}")

    box = parse_box(raw["box"], d) if "box" in raw else None
    precision = _int(raw.get("precision", 15), "precision", 1)
    seed_v = _int(raw.get("seed", 0), "seed", 0) if seed is None else seed
    wc = raw.get("window_cache")
    if wc is not None and not isinstance(wc, str):
        raise ConfigParse("field 'window_cache': expected a path string")
    params = {k: dict(_dict(raw[k], k)) for k in ("cylinder", "entropy", "sieve", "scan", "fibers", "factor", "selfcheck") if k in raw}
    cfg = RunConfig(raw, order, family, L, s, box, precision, seed_v, wc, params)
    _check_sections(cfg)
    return cfg


def _check_sections(cfg: RunConfig) -> None:
    d = cfg.order.degree
    if "cylinder" in cfg.params:
        cfg.params["cylinder"]["_shape"] = _points(cfg.params["cylinder"].get("shape"), d, "cylinder.shape")
    if "entropy" in cfg.params:
        e = cfg.params["entropy"]
        boxes = e.get("boxes", [])
        if not isinstance(boxes, list):
            raise ConfigParse("field 'entropy.boxes': expected a list")
        e["_boxes"] = [parse_box(b, d, f"entropy.boxes[{i}]") for i, b in enumerate(boxes)]
        if e.get("method", "auto") not in ("auto", "inclusion_exclusion", "brute_force"):
            raise ConfigParse("field 'entropy.method': expected auto, inclusion_exclusion or brute_force")
        if "term_budget" in e:
            _int(e["term_budget"], "entropy.term_budget", 1)
        if "tolerance" in e:
            e["_tolerance"] = _ratio(e["tolerance"], "entropy.tolerance")
    if "scan" in cfg.params:
        ext = cfg.params["scan"].get("extents", [1])
        if not isinstance(ext, list) or not ext:
            raise ConfigParse("field 'scan.extents': expected a nonempty list")
        cfg.params["scan"]["_extents"] = [
            (_int(x, "scan.extents", 1),) * d if not isinstance(x, list) else tuple(_int(y, "scan.extents", 1) for y in x)
            for x in ext
        ]
    if "sieve" in cfg.params and "partition" in cfg.params["sieve"]:
        _int(cfg.params["sieve"]["partition"], "sieve.partition", 1)
    if "factor" in cfg.params:
        f = cfg.params["factor"]
        if "primes" in f:
            f["_primes"] = [_int(p, "factor.primes", 2) for p in f["primes"]]
        else:
            from sympy import primerange

            f["_primes"] = list(primerange(2, _int(f.get("prime_bound", 30), "factor.prime_bound", 2) + 1))
    if "selfcheck" in cfg.params and "trials" in cfg.params["selfcheck"]:
        _int(cfg.params["selfcheck"]["trials"], "selfcheck.trials", 1)


def load_config(path: str, seed: int | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParse(f"{path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return parse_config(raw, seed)
    except ConfigParse as exc:
        raise ConfigParse(f"{path}: {exc}") from exc
