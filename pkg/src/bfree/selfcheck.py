"""Quick invariant suite behind the ``selfcheck`` command."""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import dynamics as dyn
from .entropy import count_admissible, is_admissible
from .geometry import folner_box, segment_box
from .ring_algebra import family_from_ideals, make_order, principal_ideal
from .sieve_measure import Pattern, empirical_frequency, mirsky_cylinder, sieve_window, synthetic_window


def _z_family(*gens):
    Z = make_order([0, 1])
    return family_from_ideals([principal_ideal(Z.element(g)) for g in gens])


def check_counting_engines(rng, trials) -> str | None:
    for gens in [(2,), (4,), (4, 9), (9, 25), (2, 9, 25)]:
        fam = _z_family(*gens)
        for n in (3, 6, 10):
            box = segment_box(1, int(rng.integers(-20, 20)), n)
            a = count_admissible(box, fam, method="inclusion_exclusion").count
            b = count_admissible(box, fam, method="brute_force").count
            if a != b:
                return f"{gens} on {box}: {a} != {b}"
    return None


def check_equivariance(rng, trials) -> str | None:
    fam = _z_family(4, 9)
    box = folner_box(1, 40)
    for _ in range(trials):
        g = dyn.GroupPoint.random(fam, None, rng)
        a = int(rng.integers(-2, 3))
        lhs = dyn.shift_window(dyn.phi_window(g, box), (a,))
        rhs = dyn.phi_window(g.rotate((a,)), box)
        u, v, _ = dyn.common_part(lhs, rhs)
        if not np.array_equal(u, v):
            return f"g={g.key()} a={a}"
    return None


def check_recovery(rng, trials) -> str | None:
    fam = _z_family(4, 9)
    box = folner_box(1, dyn.recovery_radius(fam))
    for _ in range(trials):
        g = dyn.GroupPoint.random(fam, None, rng)
        rep = dyn.theta_window(dyn.phi_window(g, box), fam)
        if rep.point(fam).key() != g.key():
            return f"g={g.key()}"
    return None


def check_phi_theta(rng, trials) -> str | None:
    fam = _z_family(4, 9)
    w = sieve_window(fam, folner_box(1, 500))
    if not dyn.check_phi_theta(w, fam):
        return "eta window"
    rep = dyn.theta_window(w, fam)
    if rep.members != (frozenset({(0,)}), frozenset({(0,)})):
        return f"theta(eta) = {rep.members}"
    return None


def check_fibers(rng, trials) -> str | None:
    fam = _z_family(4, 9)
    box = folner_box(1, 30)
    zero = dyn.joining_fiber(synthetic_window(box), fam)
    if [len(m) for m in zero.members] != [4, 9]:
        return "all-zero window"
    delta = dyn.joining_fiber(synthetic_window(box).with_bit((0,), 1), fam)
    if any((0,) in m for m in delta.members):
        return "delta window"
    return None


def check_cylinders(rng, trials) -> str | None:
    fam = _z_family(4, 9)
    # the shape {0, 1} has 36 * 50 interior positions: whole periods
    w = sieve_window(fam, segment_box(1, 0, 36 * 50 + 1))
    for a in range(2):
        for b in range(2):
            pat = Pattern.of([p for p, v in zip((0, 1), (a, b)) if v], [p for p, v in zip((0, 1), (a, b)) if not v])
            if empirical_frequency(w, pat) != mirsky_cylinder(pat, fam).value:
                return f"cylinder {(a, b)}"
    return None


def check_observed_admissible(rng, trials) -> str | None:
    fam = _z_family(4, 9)
    w = sieve_window(fam, segment_box(1, 0, 2000))
    bits = w.bits
    for _ in range(trials):
        start = int(rng.integers(0, len(bits) - 12))
        A = [start + k for k in range(12) if bits[start + k]]
        if not is_admissible(A, fam):
            return f"pattern at {start}"
    return None


CHECKS: dict[str, Callable] = {
    "counting_engines_agree": check_counting_engines,
    "equivariance": check_equivariance,
    "theta_phi_recovery": check_recovery,
    "phi_theta_dominates": check_phi_theta,
    "joining_fibers": check_fibers,
    "periodic_cylinders_exact": check_cylinders,
    "observed_patterns_admissible": check_observed_admissible,
}


def run_selfcheck(seed: int = 0, trials: int = 100) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS.items():
        try:
            problem = fn(rng, trials)
        except Exception as exc:  # a crash is a failed check, reported as such
            problem = f"{type(exc).__name__}: {exc}"
        out.append({"check": name, "passed": problem is None, "detail": problem or ""})
    return out
