"""The quadratic cutoff family gamma(t) = 1 - c t^2 and its differential inequality.

For admissible parameters (n, a) the profile vanishes at t = tan(theta) and
satisfies, on [0, tan(theta)],

    0 < kappa <= (gamma - (t/n) gamma')^2 + (gamma'/n)^2 <= 1 - delta t^2,

with closed-form constants c, theta, delta, kappa.  The middle expression is
exactly the n-volume scaling of the associated retraction and the squared
pointwise comass of the vanishing calibration, which is why the whole
construction hinges on this one inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INEQUALITY_SLACK_TOL = -1e-12


def admissible_interval(n: int) -> tuple[float, float]:
    """Open interval of admissible family parameters a for plane dimension n."""
    if n < 3:
        raise ValueError(f"plane dimension n must be >= 3, got {n}")
    return 4.0 * n / (n + 2.0), float(n * (n - 2))


@dataclass(frozen=True)
class CutoffParams:
    """Admissible parameter pair (n, a) with its derived constants."""

    n: int
    a: float
    c: float
    theta: float
    delta: float
    kappa: float

    @property
    def tan_theta(self) -> float:
        return math.sqrt(self.a / (self.n * (self.n - 2)))


def make_params(n: int, a: float) -> CutoffParams:
    """Build the derived constants, enforcing 4n/(n+2) < a < n(n-2)."""
    if int(n) != n:
        raise ValueError(f"plane dimension n must be an integer, got {n!r}")
    n = int(n)
    lo, hi = admissible_interval(n)
    if not a > lo:
        raise ValueError(
            f"inadmissible a={a:g}: requires a > 4n/(n+2) = {lo:g} for n={n}"
        )
    if not a < hi:
        raise ValueError(
            f"inadmissible a={a:g}: requires a < n(n-2) = {hi:g} for n={n}"
        )
    c = n * (n - 2) / a
    theta = math.atan(math.sqrt(a / (n * (n - 2))))
    delta = (n - 2) ** 2 * (a * (n + 2) - 4 * n) / (a * a * n)
    kappa = 4.0 * (a - 1.0) / (a * a)
    return CutoffParams(n=n, a=float(a), c=c, theta=theta, delta=delta, kappa=kappa)


@dataclass(frozen=True)
class CutoffProfile:
    """The profile gamma(t) = max(1 - c t^2, 0) with one-sided derivatives.

    Smooth and monotone decreasing on [0, tan theta], identically zero
    beyond; the derivative jumps at t = tan theta, so both one-sided values
    are exposed.  ``n`` and ``tan_theta`` are carried so that negative
    controls can force an inadmissible c without going through make_params.
    """

    n: int
    c: float
    tan_theta: float

    @classmethod
    def from_params(cls, params: CutoffParams) -> "CutoffProfile":
        return cls(n=params.n, c=params.c, tan_theta=params.tan_theta)

    @classmethod
    def forced(cls, n: int, c: float) -> "CutoffProfile":
        """Profile 1 - c t^2 vanishing at 1/sqrt(c), bypassing admissibility."""
        if c <= 0:
            raise ValueError("forced profile needs c > 0")
        return cls(n=int(n), c=float(c), tan_theta=1.0 / math.sqrt(c))

    def gamma(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < self.tan_theta, 1.0 - self.c * t * t, 0.0)

    def dgamma(self, t, side: str = "left"):
        """One-sided derivative; ``side`` selects the branch at t = tan theta."""
        t = np.asarray(t, dtype=float)
        inside = t <= self.tan_theta if side == "left" else t < self.tan_theta
        return np.where(inside, -2.0 * self.c * t, 0.0)

    def c_coefficient(self, t):
        """gamma - (t/n) gamma' on the smooth branch, zero beyond the wedge."""
        t = np.asarray(t, dtype=float)
        inside = t < self.tan_theta
        val = 1.0 - self.c * (self.n - 2) / self.n * t * t
        return np.where(inside, val, 0.0)

    def s_coefficient(self, t):
        """gamma'/n on the smooth branch, zero beyond the wedge."""
        t = np.asarray(t, dtype=float)
        inside = t < self.tan_theta
        return np.where(inside, -2.0 * self.c * t / self.n, 0.0)

    def middle_expression(self, t):
        """(gamma - (t/n) gamma')^2 + (gamma'/n)^2 on the closed wedge.

        Uses the left (smooth) branch at the interface, matching the range
        of validity of the differential inequality.
        """
        t = np.asarray(t, dtype=float)
        g = 1.0 - self.c * t * t
        dg = -2.0 * self.c * t
        val = (g - t / self.n * dg) ** 2 + (dg / self.n) ** 2
        return np.where(t <= self.tan_theta, val, 0.0)


def quartic_expansion(params: CutoffParams, t) -> np.ndarray | float:
    """The expanded middle expression 1 - 2(n-2)^2(a-2)/a^2 t^2 + (n-2)^4/a^2 t^4."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > params.tan_theta * (1 + 1e-12)):
        raise ValueError(f"t must lie in [0, tan theta = {params.tan_theta:g}]")
    n, a = params.n, params.a
    val = (
        1.0
        - 2.0 * (n - 2) ** 2 * (a - 2.0) / a**2 * t_arr**2
        + (n - 2) ** 4 / a**2 * t_arr**4
    )
    return float(val) if np.isscalar(t) else val


def quartic_discriminant(params: CutoffParams) -> float:
    """Discriminant of the middle expression as a quadratic in t^2."""
    n, a = params.n, params.a
    return -16.0 * (a - 1.0) * (n - 2) ** 4 / a**4


def quartic_axis(params: CutoffParams) -> float:
    """Location in t^2 of the quartic's minimum: (a-2)/(n-2)^2."""
    return (params.a - 2.0) / (params.n - 2) ** 2


@dataclass(frozen=True)
class InequalityReport:
    """Grid verification of the three-part cutoff inequality."""

    n: int
    a: float
    grid_points: int
    min_slack_lower: float  # min over grid of middle - kappa
    min_slack_upper: float  # min over grid of (1 - delta t^2) - middle
    kappa_positive: float  # kappa itself (must be > 0)
    grid_min_middle: float
    argmin_t: float
    kappa: float
    axis_t_squared: float
    axis_in_range: bool
    endpoint_gamma: float  # gamma at tan theta from the left (continuity)

    @property
    def passed(self) -> bool:
        return (
            self.min_slack_lower >= INEQUALITY_SLACK_TOL
            and self.min_slack_upper >= INEQUALITY_SLACK_TOL
            and self.kappa_positive > 0.0
        )


def verify_inequality_one(params: CutoffParams, grid_points: int) -> InequalityReport:
    """Evaluate both sides of the inequality on a uniform grid over [0, tan theta]."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    profile = CutoffProfile.from_params(params)
    t = np.linspace(0.0, params.tan_theta, grid_points)
    middle = profile.middle_expression(t)
    upper = 1.0 - params.delta * t * t
    slack_lower = middle - params.kappa
    slack_upper = upper - middle
    j = int(np.argmin(middle))
    axis = quartic_axis(params)
    return InequalityReport(
        n=params.n,
        a=params.a,
        grid_points=grid_points,
        min_slack_lower=float(slack_lower.min()),
        min_slack_upper=float(slack_upper.min()),
        kappa_positive=params.kappa,
        grid_min_middle=float(middle[j]),
        argmin_t=float(t[j]),
        kappa=params.kappa,
        axis_t_squared=axis,
        axis_in_range=bool(0.0 <= axis <= params.tan_theta**2),
        endpoint_gamma=float(1.0 - params.c * params.tan_theta**2),
    )


def angle_threshold(n: int) -> float:
    """Infimum 2 arctan(2 / sqrt(n^2 - 4)) of achievable double wedge angles."""
    if n < 3:
        raise ValueError(f"plane dimension n must be >= 3, got {n}")
    return 2.0 * math.atan(2.0 / math.sqrt(n * n - 4.0))


def half_angle_cap(n: int) -> float:
    """The cap arctan(2 / sqrt((n-2)(n+3/2))) applied when choosing a."""
    return math.atan(2.0 / math.sqrt((n - 2) * (n + 1.5)))


def choose_a_for_angle(
    n: int, target_half_angle: float, *, with_branch: bool = False
):
    """Pick a so the wedge half-angle is min(target, cap), or fail below threshold.

    The target must exceed arctan(2 / sqrt(n^2 - 4)) strictly; the returned
    a = n(n-2) tan^2(min(target, cap)) is always admissible.
    """
    if n < 3:
        raise ValueError(f"plane dimension n must be >= 3, got {n}")
    threshold_half = angle_threshold(n) / 2.0
    if not target_half_angle > threshold_half:
        raise ValueError(
            f"target half angle {target_half_angle:g} does not exceed the "
            f"threshold arctan(2/sqrt(n^2-4)) = {threshold_half:g} for n={n}"
        )
    cap = half_angle_cap(n)
    branch = "target" if target_half_angle <= cap else "cap"
    half = min(target_half_angle, cap)
    a = n * (n - 2) * math.tan(half) ** 2
    lo, hi = admissible_interval(n)
    if not lo < a < hi:  # cannot happen; guards the closed-form derivation
        raise ValueError(
            f"derived a={a:g} fell outside the admissible interval ({lo:g}, {hi:g})"
        )
    return (a, branch) if with_branch else a
