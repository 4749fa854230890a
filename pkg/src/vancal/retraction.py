"""Area-nonincreasing retraction onto the calibrated plane.

The map scales the x-block by gamma(t)^{1/n} and kills the y-block, sending
the wedge exterior to the shared subspace (the origin when there is no
l-block).  Its n-volume scaling factor on any n-plane is controlled by the
cutoff inequality, which is what the verification below samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coords import WedgeCoordinates
from .cutoff import CutoffProfile
from .exterior import random_orthonormal_frames


@dataclass(frozen=True, eq=False)
class RetractionMap:
    """p = (x, y, l)  ->  (gamma(t)^{1/n} x, 0, l)."""

    coords: WedgeCoordinates
    profile: CutoffProfile

    def __post_init__(self):
        if self.coords.n != self.profile.n:
            raise ValueError(
                f"profile dimension n={self.profile.n} does not match the "
                f"x-block dimension {self.coords.n}"
            )

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on a point or a batch of points."""
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        pts = np.atleast_2d(points)
        xi = self.coords.x_part(pts)
        r = np.linalg.norm(xi, axis=1)
        z = self.coords.z(pts)
        scale = np.zeros_like(r)
        inside = r > 0.0
        t = np.zeros_like(r)
        t[inside] = z[inside] / r[inside]
        gamma = self.profile.gamma(t[inside])
        scale[inside] = np.maximum(gamma, 0.0) ** (1.0 / self.profile.n)
        out = (scale[:, None] * xi) @ self.coords.x_frame
        if self.coords.k:
            out = out + self.coords.l_part(pts) @ self.coords.l_frame
        return out[0] if single else out

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.apply(points)

    def differential(self, point: np.ndarray, h: float = 1e-6) -> np.ndarray:
        """Central-difference Jacobian, error O(h^2); see ``differential_exact``."""
        point = np.asarray(point, dtype=float)
        N = self.coords.ambient_dim
        if h <= 0:
            raise ValueError("step h must be positive")
        r = float(self.coords.r(point))
        if r <= 2.0 * h:
            raise ValueError(f"point has r = {r:g} <= 2h; stencil reaches the singular axis")
        d_int = float(self.coords.interface_distance(point, self.profile.tan_theta))
        if d_int <= 2.0 * h:
            raise ValueError(
                f"point is {d_int:g} <= 2h from the wedge interface; the "
                "differential jumps there"
            )
        steps = h * np.eye(N)
        plus = self.apply(point[None, :] + steps)
        minus = self.apply(point[None, :] - steps)
        return (plus - minus).T / (2.0 * h)

    def differential_exact(self, point: np.ndarray) -> np.ndarray:
        """Chain-rule Jacobian on the smooth strata (independent oracle)."""
        point = np.asarray(point, dtype=float)
        coords, profile = self.coords, self.profile
        n = profile.n
        xi = coords.x_part(point)
        eta = coords.y_part(point)
        r = float(np.linalg.norm(xi))
        if r == 0.0:
            raise ValueError("exact differential undefined at r = 0")
        z = float(np.linalg.norm(eta)) if coords.m else 0.0
        t = z / r
        N = coords.ambient_dim
        jac = np.zeros((N, N))
        if coords.k:
            jac += coords.l_frame.T @ coords.l_frame
        if t >= profile.tan_theta:
            return jac  # constant map onto the l-block beyond the wedge
        gamma = float(profile.gamma(t))
        dgamma = float(profile.dgamma(t))
        G = gamma ** (1.0 / n)
        Gp = (1.0 / n) * gamma ** (1.0 / n - 1.0) * dgamma
        # t-gradient: dt = (1/r) dz - (t/r) dr
        dr_vec = coords.x_frame.T @ (xi / r)
        grad_t = -(t / r) * dr_vec
        if z > 0.0:
            dz_vec = coords.y_frame.T @ (eta / z)
            grad_t = grad_t + dz_vec / r
        elif coords.m:
            # t = |y|/r is not differentiable in y at y = 0, but G'(0) = 0
            # for the quadratic profile, so the product limit below is 0.
            pass
        x_amb = coords.x_frame.T @ xi
        jac += G * (coords.x_frame.T @ coords.x_frame)
        jac += Gp * np.outer(x_amb, grad_t)
        return jac


def plane_volume_scaling(jacobian: np.ndarray, plane_frames: np.ndarray) -> np.ndarray:
    """n-volume scaling |Lambda^n(J) xi| for orthonormal n-frames xi.

    ``plane_frames`` has shape (count, n, N); the scaling is the product of
    singular values of J restricted to each plane.
    """
    restricted = np.einsum("ij,pkj->pik", jacobian, plane_frames)  # (count, N, n)
    svals = np.linalg.svd(restricted, compute_uv=False)
    return np.prod(svals, axis=1)


def top_volume_scaling(jacobian: np.ndarray, n: int) -> float:
    """Max n-volume scaling over all n-planes: product of the top n singular values."""
    svals = np.linalg.svd(jacobian, compute_uv=False)
    return float(np.prod(svals[:n]))


@dataclass(frozen=True)
class AreaScalingReport:
    samples: int
    planes_per_sample: int
    seed: int
    max_plane_scaling: float
    max_top_scaling: float
    x_plane_scaling_error: float  # |scaling - 1| for tangent planes at x-plane points
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.max_plane_scaling <= 1.0 + self.tolerance
            and self.max_top_scaling <= 1.0 + self.tolerance
            and self.x_plane_scaling_error <= 1e-8
        )


def sample_wedge_points(
    coords: WedgeCoordinates,
    tan_theta: float,
    count: int,
    rng: np.random.Generator,
    *,
    r_range=(0.5, 1.5),
    t_fraction=(0.05, 0.9),
    l_range=(-1.0, 1.0),
) -> np.ndarray:
    """Seeded points in the open wedge interior, away from both singular strata."""
    n, m, k = coords.n, coords.m, coords.k
    x_dir = rng.standard_normal((count, n))
    x_dir /= np.linalg.norm(x_dir, axis=1, keepdims=True)
    r = rng.uniform(*r_range, size=count)
    t = tan_theta * rng.uniform(*t_fraction, size=count)
    points = (r[:, None] * x_dir) @ coords.x_frame
    if m:
        y_dir = rng.standard_normal((count, m))
        y_dir /= np.linalg.norm(y_dir, axis=1, keepdims=True)
        points = points + ((r * t)[:, None] * y_dir) @ coords.y_frame
    if k:
        lam = rng.uniform(*l_range, size=(count, k))
        points = points + lam @ coords.l_frame
    return points


def verify_area_nonincreasing(
    retraction: RetractionMap,
    samples: int,
    planes_per_sample: int,
    seed: int,
    *,
    h: float = 1e-6,
    tolerance: float = 1e-8,
) -> AreaScalingReport:
    """Sample n-volume scalings of the differential inside the wedge.

    At every sampled interior point the finite-difference Jacobian is
    restricted to random orthonormal n-planes, and additionally maximized
    over all planes via its top-n singular values.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    coords, profile = retraction.coords, retraction.profile
    n, N = profile.n, coords.ambient_dim
    rng = np.random.default_rng(seed)
    t_hi = max(0.9, 1.0 - 4.0 * h / profile.tan_theta)
    points = sample_wedge_points(
        coords, profile.tan_theta, samples, rng, t_fraction=(0.05, t_hi)
    )

    max_plane = 0.0
    max_top = 0.0
    for p in points:
        jac = retraction.differential(p, h)
        frames = random_orthonormal_frames(planes_per_sample, N, n, rng)
        max_plane = max(max_plane, float(plane_volume_scaling(jac, frames).max()))
        max_top = max(max_top, top_volume_scaling(jac, n))

    # tangent plane at a point of the calibrated plane scales exactly by 1
    x_point = coords.assemble(
        np.full(coords.n, 1.0 / math.sqrt(coords.n)), np.zeros(coords.m)
    )
    jac0 = retraction.differential(x_point, h)
    tangent = coords.x_frame[None, :, :]
    x_err = abs(float(plane_volume_scaling(jac0, tangent)[0]) - 1.0)

    return AreaScalingReport(
        samples=samples,
        planes_per_sample=planes_per_sample,
        seed=seed,
        max_plane_scaling=max_plane,
        max_top_scaling=max_top,
        x_plane_scaling_error=x_err,
        tolerance=tolerance,
    )


def lipschitz_estimate(
    retraction: RetractionMap, pairs: int, seed: int, *, box_halfwidth: float = 2.0
) -> float:
    """Largest sampled difference quotient of the retraction on a box."""
    rng = np.random.default_rng(seed)
    N = retraction.coords.ambient_dim
    p = rng.uniform(-box_halfwidth, box_halfwidth, size=(pairs, N))
    q = rng.uniform(-box_halfwidth, box_halfwidth, size=(pairs, N))
    num = np.linalg.norm(retraction.apply(p) - retraction.apply(q), axis=1)
    den = np.linalg.norm(p - q, axis=1)
    keep = den > 1e-12
    return float((num[keep] / den[keep]).max())


def level_set_curve_consistency(
    retraction: RetractionMap, theta_values: np.ndarray
) -> float:
    """Check the level sets against the integral-curve identity.

    On the ray at polar angle theta off the x-plane (with |image| = 1), the
    Euclidean distance rho to the shared subspace satisfies
    (rho cos theta)^(-n) = gamma(tan theta).  Returns the max violation.
    """
    coords, profile = retraction.coords, retraction.profile
    n = profile.n
    worst = 0.0
    x0 = np.zeros(coords.n)
    x0[0] = 1.0
    for theta in np.atleast_1d(theta_values):
        tan_t = math.tan(theta)
        gamma = float(profile.gamma(tan_t))
        if gamma <= 0.0:
            continue
        r = gamma ** (-1.0 / n)
        point = coords.assemble(r * x0, np.zeros(coords.m))
        if coords.m:
            eta = np.zeros(coords.m)
            eta[0] = r * tan_t
            point = coords.assemble(r * x0, eta)
        image = retraction.apply(point)
        worst = max(worst, float(np.linalg.norm(image - coords.assemble(x0, np.zeros(coords.m)))))
        rho = float(np.linalg.norm(point))
        worst = max(worst, abs((rho * math.cos(theta)) ** (-n) - gamma))
    return worst
