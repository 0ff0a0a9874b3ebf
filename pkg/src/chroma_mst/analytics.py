"""Moments of critical cells in a Poisson-Delaunay mosaic and derived constants.

Throughout, x = rho * pi * r0**2 for intensity rho and radius cutoff r0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "lower_incomplete_gamma",
    "MomentFormula",
    "MOMENTS",
    "expected_moment",
    "eta_moment",
    "boundary_bounds",
    "theorem31_pipeline",
    "cl_bounds",
    "analytic_table",
]

_SUPPORTED_K = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
_SQRT_PI = math.sqrt(math.pi)


def _check_k(k: float) -> float:
    k = float(k)
    if k not in _SUPPORTED_K:
        raise ValueError(f"unsupported order k = {k}; expected one of {_SUPPORTED_K}")
    return k


def _series(k: float, x: float) -> float:
    # x^k e^-x sum_n x^n / (k (k+1) ... (k+n))
    term = 1.0 / k
    total = term
    j = k
    while True:
        j += 1.0
        term *= x / j
        total += term
        if term < total * 1e-17:
            break
    return math.exp(k * math.log(x) - x) * total


def _upper(k: float, x: float) -> float:
    """Upper incomplete gamma by upward recurrence from k = 1/2 or k = 1."""
    if k == int(k):
        g, j = math.exp(-x), 1.0
    else:
        g, j = _SQRT_PI * math.erfc(math.sqrt(x)), 0.5
    while j < k:
        g = j * g + math.exp(j * math.log(x) - x)
        j += 1.0
    return g


def lower_incomplete_gamma(k: float, x: float, method: str = "series") -> float:
    """gamma(k, x) = integral of t^(k-1) e^(-t) over [0, x], for half-integer k <= 3.

    ``method="quad"`` integrates numerically instead (used as a cross-check).
    """
    k = _check_k(k)
    if x < 0 or math.isnan(x):
        raise ValueError("x must be non-negative")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.gamma(k)
    if method == "quad":
        from scipy.integrate import quad

        val, _ = quad(lambda t: t ** (k - 1.0) * math.exp(-t), 0.0, x, epsabs=0.0, epsrel=1e-12, limit=200)
        return val
    if method != "series":
        raise ValueError(f"unknown method {method!r}")
    if x < k + 8.0:
        return _series(k, x)
    return math.gamma(k) - _upper(k, x)


@dataclass(frozen=True)
class MomentFormula:
    """Expected count (power 0), total radius (1) or total squared radius (2)."""

    ell: int
    k: int
    power: int
    intensity: float
    d: int = 2

    def __post_init__(self) -> None:
        if self.d != 2:
            raise ValueError("only the plane is supported")
        if (self.ell, self.k) not in ((1, 1), (2, 2)):
            raise ValueError(f"interval type ({self.ell}, {self.k}) is not supported")
        if self.power not in (0, 1, 2):
            raise ValueError("power must be 0, 1 or 2")
        if not self.intensity > 0:
            raise ValueError("intensity must be positive")

    @property
    def C(self) -> float:
        return 2.0 if self.k == 1 else 1.0

    @property
    def order(self) -> float:
        """Order of the incomplete gamma function in the formula."""
        return self.k + self.power / 2.0

    @property
    def coefficient(self) -> float:
        n = self.intensity
        return self.C * n ** (1.0 - self.power / 2.0) / (math.gamma(self.k) * math.pi ** (self.power / 2.0))

    def x(self, r0: float) -> float:
        return math.inf if math.isinf(r0) else self.intensity * math.pi * r0 * r0


MOMENTS = {
    "N1": (1, 1, 0),
    "F1": (1, 1, 1),
    "S1": (1, 1, 2),
    "N2": (2, 2, 0),
    "F2": (2, 2, 1),
    "S2": (2, 2, 2),
}


def _formula(name_or_f, intensity: float | None) -> MomentFormula:
    if isinstance(name_or_f, MomentFormula):
        return name_or_f
    ell, k, p = MOMENTS[name_or_f]
    return MomentFormula(ell, k, p, 1.0 if intensity is None else intensity)


def expected_moment(f: MomentFormula | str, r0: float = math.inf, intensity: float | None = None) -> float:
    """Expected N, F or S of critical cells with radius at most r0, per unit area."""
    f = _formula(f, intensity)
    return f.coefficient * lower_incomplete_gamma(f.order, f.x(r0))


def eta_moment(f: MomentFormula | str, eta: float, r0: float = math.inf, intensity: float | None = None) -> float:
    """Moment over cells whose circle is empty with probability eta rather than 1."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    f = _formula(f, intensity)
    if eta == 1:
        return expected_moment(f, r0)
    a = f.order
    return f.coefficient * eta ** (-a) * lower_incomplete_gamma(a, eta * f.x(r0))


def boundary_bounds(n: float) -> dict[str, float]:
    """Upper bounds for cells whose circles cross the boundary of the unit square."""
    if not n > 0:
        raise ValueError("n must be positive")
    s = math.sqrt(n)
    return {
        "N1": 8.0 * s,
        "F1": 16.0 / math.pi,
        "N2": 6.0 * s,
        "F2": 16.0 / math.pi,
        "N1_half": math.sqrt(512.0 * n),
        "F1_half": 64.0 / math.pi,
        "N2_half": math.sqrt(1152.0 * n),
        "F2_half": 128.0 / math.pi,
    }


def theorem31_pipeline(method: str = "series") -> dict[str, float]:
    """Lower bound for the EMST constant from the surplus of critical edges.

    At x = 1 the expected number of critical edges exceeds that of critical
    triangles by n; the difference of their total radii, doubled, bounds the
    EMST length from below.  The back-of-envelope cutoff x = ln 2 gives the
    coefficient of the edge radii alone.
    """
    g = lambda k, x: lower_incomplete_gamma(k, x, method=method)  # noqa: E731
    x = 1.0
    count = 2.0 * g(1.0, x) - g(2.0, x)
    length = (2.0 * g(1.5, x) - g(2.5, x)) / _SQRT_PI
    envelope = 2.0 * g(1.5, math.log(2.0)) / _SQRT_PI
    return {
        "x": x,
        "envelope_length_coeff": envelope,
        "surplus_count_coeff": count,
        "surplus_length_coeff": length,
        "lower_bound": 2.0 * length,
    }


def cl_bounds(c_lower: float, c_upper: float) -> tuple[float, float]:
    """Bounds for the lunar constant from bounds for the EMST constant."""
    if not 0 < c_lower <= c_upper:
        raise ValueError("need 0 < c_lower <= c_upper")
    return ((math.sqrt(2.0) - 1.0) * c_lower, math.sqrt(2.0) * c_upper - 0.5)


def analytic_table(n: float = 1.0) -> dict:
    """Every closed-form quantity, as printed by the ``analytic`` command."""
    from .sixpack import C_UPPER, table1_constants

    pipe = theorem31_pipeline()
    lo = pipe["lower_bound"]
    return {
        "moments_at_infinity": {name: expected_moment(name, intensity=n) for name in MOMENTS},
        "moments_eta_half": {name: eta_moment(name, 0.5, intensity=n) for name in MOMENTS},
        "boundary_bounds": boundary_bounds(n),
        "theorem31": pipe,
        "cl_bounds": list(cl_bounds(lo, math.sqrt(2.0) / 2.0)),
        "table1_at_bounds": {
            "lower": table1_constants(lo, cl_bounds(lo, C_UPPER)[0]).as_dict(),
            "upper": table1_constants(math.sqrt(2.0) / 2.0, 0.5).as_dict(),
        },
        "intensity": n,
    }
