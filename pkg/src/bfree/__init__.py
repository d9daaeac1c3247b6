"""B-free elements of orders in number fields: ideal arithmetic, sieving,
Mirsky measures, entropy of the associated subshifts and the coding map."""
from .errors import *  # noqa: F401,F403
from .ring_algebra import (
    BFamily,
    ExplicitSpec,
    FieldOrder,
    IdealLattice,
    PrimePowerSpec,
    RingElement,
    build_bfamily,
    crt,
    factor_rational_prime,
    family_from_ideals,
    is_bfree,
    make_order,
    principal_ideal,
)
from .geometry import Box, folner_box, segment_box
from .sieve_measure import MeasureValue, Pattern, Window, density, empirical_frequency, mirsky_cylinder, sieve_window
from .entropy import count_admissible, entropy_estimate, entropy_formula, is_admissible
from .dynamics import GroupPoint, check_phi_theta, joining_fiber, phi_window, theta_window, zero_window_scan

__version__ = "0.1.0"
