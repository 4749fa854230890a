"""Vanishing calibration forms and their numeric verification.

The basic field is (c(t) dr + s(t) dz) ^ (n/r) psi_bar (^ dl on a shared
block), supported on the angular wedge t <= tan(theta) around the calibrated
plane.  It is simple at every point, so its pointwise comass equals the
closed form sqrt(c^2 + s^2), which the grid scans exploit; the
frame-manifold optimizer cross-checks that fast path on subsamples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from ._threads import ordered_map
from .coords import WedgeCoordinates
from .cutoff import CutoffParams, CutoffProfile
from .exterior import (
    AlternatingTensor,
    FormField,
    closedness_order,
    comass,
    evaluate,
    interior_product,
    n_coefficients,
    wedge,
)
from .retraction import RetractionMap
from .subspaces import PlanePair

COMASS_GRID_TOL = 1e-9
CALIBRATED_VALUE_TOL = 1e-10
CLOSEDNESS_MIN_ORDER = 1.8
OPTIMIZER_AGREEMENT_TOL = 1e-6


def covector_volume(frame: np.ndarray, ambient_dim: int) -> AlternatingTensor:
    """Wedge of the ambient covectors given by the rows of an orthonormal frame."""
    out = AlternatingTensor.scalar(ambient_dim, 1.0)
    for row in np.atleast_2d(frame):
        out = wedge(out, AlternatingTensor(ambient_dim, 1, row))
    return out


def psi_bar(coords: WedgeCoordinates, point: np.ndarray) -> AlternatingTensor:
    """The (n-1)-form (r/n) i_{unit radial}(dx_1 ^ ... ^ dx_n) at a point.

    Its exterior derivative is the x-block volume form, and (n/r) psi_bar is
    dual to the tangent planes of the spheres r = const inside the x-plane.
    """
    point = np.asarray(point, dtype=float)
    xi = coords.x_part(point)
    r = float(np.linalg.norm(xi))
    if r == 0.0:
        raise ValueError("psi_bar is singular at r = 0")
    radial = coords.x_frame.T @ (xi / r)
    vol_x = covector_volume(coords.x_frame, coords.ambient_dim)
    return (r / coords.n) * interior_product(radial, vol_x)


@dataclass(frozen=True, eq=False)
class VanishingCalibration:
    """The assembled wedge-supported calibration around a plane."""

    coords: WedgeCoordinates
    profile: CutoffProfile
    params: CutoffParams
    field: FormField
    c_coef: Callable[[np.ndarray], np.ndarray]
    s_coef: Callable[[np.ndarray], np.ndarray]
    orientation: float = 1.0

    @property
    def degree(self) -> int:
        return self.coords.n + self.coords.k

    def plane_frame(self) -> np.ndarray:
        """Oriented orthonormal frame of the calibrated plane (x rows then l rows)."""
        frame = np.vstack([self.coords.x_frame, self.coords.l_frame])
        if self.orientation < 0:
            frame = frame.copy()
            frame[0] *= -1.0
        return frame

    def pointwise_comass(self, points: np.ndarray) -> np.ndarray:
        """Exact pointwise comass sqrt(c(t)^2 + s(t)^2); zero outside the wedge."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        r = self.coords.r(points)
        z = self.coords.z(points)
        inside = z < self.profile.tan_theta * r
        out = np.zeros(points.shape[0])
        if inside.any():
            t = z[inside] / r[inside]
            c = self.profile.c_coefficient(t)
            s = self.profile.s_coefficient(t)
            out[inside] = np.sqrt(c * c + s * s)
        return out

    def primitive_norm(self, points: np.ndarray) -> np.ndarray:
        """Norm of the Lipschitz primitive gamma * psi_bar (up to the l factor)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        r = self.coords.r(points)
        t = np.where(r > 0, self.coords.z(points) / np.where(r > 0, r, 1.0), 0.0)
        return self.profile.gamma(t) * r / self.coords.n


def build_vanishing_calibration(
    params: CutoffParams,
    coords: WedgeCoordinates,
    *,
    orientation: float = 1.0,
) -> VanishingCalibration:
    """Assemble (c dr + s dz) ^ (n/r) psi_bar (^ dl) for admissible parameters.

    The field is identically zero for t >= tan(theta), equals the plane's
    volume form on the plane itself, and is undefined on r = 0.
    """
    if coords.n != params.n:
        raise ValueError(
            f"coordinate x-block has dimension {coords.n}, parameters have n={params.n}"
        )
    if orientation not in (1.0, -1.0, 1, -1):
        raise ValueError("orientation must be +1 or -1")
    profile = CutoffProfile.from_params(params)
    N = coords.ambient_dim
    degree = coords.n + coords.k
    vol_x = covector_volume(coords.x_frame, N)
    l_vol = covector_volume(coords.l_frame, N) if coords.k else None
    sign = float(orientation)
    tan_theta = profile.tan_theta

    def evaluator(point: np.ndarray) -> AlternatingTensor:
        point = np.asarray(point, dtype=float)
        xi = coords.x_part(point)
        r = float(np.linalg.norm(xi))
        z = float(coords.z(point))
        if z >= tan_theta * r:
            # closed wedge exterior; the form extends there by zero, except
            # on the shared subspace r = z = 0 where it is discontinuous
            if r == 0.0 and z == 0.0:
                raise ValueError(
                    "vanishing calibration is singular on the shared subspace (r = 0)"
                )
            return AlternatingTensor.zero(N, degree)
        t = z / r  # wedge interior forces r > 0
        c = float(profile.c_coefficient(t))
        s = float(profile.s_coefficient(t))
        radial = coords.x_frame.T @ (xi / r)
        one_form = c * radial
        if z > 0.0:
            eta = coords.y_part(point)
            one_form = one_form + s * (coords.y_frame.T @ (eta / z))
        sphere = interior_product(radial, vol_x)
        tensor = wedge(AlternatingTensor(N, 1, one_form), sphere)
        if l_vol is not None:
            tensor = wedge(tensor, l_vol)
        return sign * tensor

    def singular(point: np.ndarray, margin: float = 0.0) -> bool:
        point = np.asarray(point, dtype=float)
        r = float(coords.r(point))
        z = float(coords.z(point))
        iface = float(coords.interface_distance(point, tan_theta))
        if iface <= margin:
            return True  # Lipschitz kink across the interface
        # the 1/r singular axis matters only where the wedge is reachable
        near_wedge = z < tan_theta * r or iface <= margin
        return near_wedge and r <= margin

    cal = VanishingCalibration(
        coords=coords,
        profile=profile,
        params=params,
        field=None,  # placeholder, replaced below
        c_coef=profile.c_coefficient,
        s_coef=profile.s_coefficient,
        orientation=sign,
    )
    field = FormField(
        ambient_dim=N,
        degree=degree,
        evaluator=evaluator,
        singular_locus_descriptor=singular,
        pointwise_comass=cal.pointwise_comass,
    )
    object.__setattr__(cal, "field", field)
    return cal


# -- grid utilities ----------------------------------------------------------


def region_box(lows: Sequence[float], highs: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    lows = np.asarray(lows, dtype=float)
    highs = np.asarray(highs, dtype=float)
    if lows.shape != highs.shape or np.any(lows >= highs):
        raise ValueError("region must satisfy low < high per axis")
    return lows, highs


def iter_grid_chunks(
    lows: np.ndarray, highs: np.ndarray, grid: int, chunk_axes: int = 2
) -> Iterator[np.ndarray]:
    """Tensor-product grid points, yielded in chunks along the first axes."""
    N = lows.size
    axes = [np.linspace(lows[i], highs[i], grid) for i in range(N)]
    chunk_axes = max(1, min(chunk_axes, N - 1)) if N > 1 else 0
    if chunk_axes == 0:
        yield axes[0][:, None]
        return
    tail = np.meshgrid(*axes[chunk_axes:], indexing="ij")
    tail = np.stack([a.reshape(-1) for a in tail], axis=1)
    head_axes = np.meshgrid(*axes[:chunk_axes], indexing="ij")
    head = np.stack([a.reshape(-1) for a in head_axes], axis=1)
    for row in head:
        chunk = np.empty((tail.shape[0], N))
        chunk[:, :chunk_axes] = row
        chunk[:, chunk_axes:] = tail
        yield chunk


def sample_box_points(
    lows: np.ndarray, highs: np.ndarray, count: int, rng: np.random.Generator
) -> np.ndarray:
    return rng.uniform(lows, highs, size=(count, lows.size))


# -- verification ------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationReport:
    """Grid verification of a single vanishing calibration."""

    grid: int
    grid_points_total: int
    points_in_wedge: int
    max_comass: float
    envelope_min_slack: float  # min of sqrt(1 - delta t^2) - comass inside the wedge
    optimizer_max_deviation: float
    closedness_max_residual: float
    closedness_order: float
    plane_value_max_error: float
    vanishing_max_abs: float
    primitive_interface_norm: float
    comass_tol: float = COMASS_GRID_TOL

    @property
    def passed(self) -> bool:
        return (
            self.max_comass <= 1.0 + self.comass_tol
            and self.envelope_min_slack >= -1e-9
            and self.optimizer_max_deviation <= OPTIMIZER_AGREEMENT_TOL
            and (
                math.isinf(self.closedness_order)
                or self.closedness_order >= CLOSEDNESS_MIN_ORDER
            )
            and self.plane_value_max_error <= CALIBRATED_VALUE_TOL
            and self.vanishing_max_abs == 0.0
        )


def _interior_sample(
    cal: VanishingCalibration,
    lows: np.ndarray,
    highs: np.ndarray,
    count: int,
    rng: np.random.Generator,
    margin: float,
    *,
    inside_wedge: bool,
) -> np.ndarray:
    """Seeded region points with the requested wedge side and singular margins."""
    picked = []
    attempts = 0
    while len(picked) < count and attempts < 400:
        attempts += 1
        pts = sample_box_points(lows, highs, 4 * count, rng)
        r = cal.coords.r(pts)
        z = cal.coords.z(pts)
        iface = cal.coords.interface_distance(pts, cal.profile.tan_theta)
        good = (r > margin) & (iface > margin)
        side = z < cal.profile.tan_theta * r if inside_wedge else z > cal.profile.tan_theta * r
        good &= side
        for p in pts[good]:
            picked.append(p)
            if len(picked) == count:
                break
    return np.array(picked)


def verify_calibration(
    cal: VanishingCalibration,
    region: tuple[Sequence[float], Sequence[float]],
    grid: int,
    *,
    seed: int = 0,
    optimizer_subsample: int = 6,
    closedness_points: int = 4,
    fd_h_values: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
    r_margin: float = 0.05,
) -> CalibrationReport:
    """Scan a box region: comass, closedness, calibrated values, vanishing.

    The grid comass uses the closed-form pointwise value (exact for this
    simple field) on every grid point; the frame optimizer re-derives it on
    a seeded subsample.  Closedness is finite-difference with an order fit,
    away from the interface and the r = 0 axis by 2h.
    """
    lows, highs = region_box(*region)
    if lows.size != cal.coords.ambient_dim:
        raise ValueError("region dimension does not match the ambient dimension")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    rng = np.random.default_rng(seed)
    delta = cal.params.delta
    tan_theta = cal.profile.tan_theta

    def scan_chunk(chunk):
        r = cal.coords.r(chunk)
        values = cal.pointwise_comass(chunk)
        z = cal.coords.z(chunk)
        inside = z < tan_theta * r
        env_min = math.inf
        if inside.any():
            t = z[inside] / r[inside]
            envelope = np.sqrt(1.0 - delta * t * t)
            env_min = float((envelope - values[inside]).min())
        return (
            chunk.shape[0],
            float(r.min()),
            float(values.max(initial=0.0)),
            int(inside.sum()),
            env_min,
        )

    # max/min/count reductions are scheduling-independent, so the chunk scan
    # may run on the VANCAL_THREADS pool without affecting the report
    results = ordered_map(scan_chunk, list(iter_grid_chunks(lows, highs, grid)))
    total = sum(r[0] for r in results)
    min_grid_r = min(r[1] for r in results)
    max_comass = max(r[2] for r in results)
    in_wedge = sum(r[3] for r in results)
    envelope_min = min(r[4] for r in results)
    if min_grid_r <= r_margin:
        raise ValueError(
            f"region reaches r = {min_grid_r:g} <= margin {r_margin:g}; "
            "the field is singular on r = 0"
        )

    # optimizer cross-check of the closed-form pointwise comass
    opt_dev = 0.0
    sub = _interior_sample(cal, lows, highs, optimizer_subsample, rng,
                           2.0 * max(fd_h_values), inside_wedge=True)
    for p in np.atleast_2d(sub) if sub.size else []:
        tensor = cal.field.evaluator(p)
        measured = comass(tensor, multistarts=24, tol=1e-12, seed=seed)
        opt_dev = max(opt_dev, abs(measured - float(cal.pointwise_comass(p[None])[0])))

    # closedness with order fit
    fd_pts = _interior_sample(cal, lows, highs, closedness_points, rng,
                              2.0 * max(fd_h_values), inside_wedge=True)
    max_res, order, _ = closedness_order(cal.field, fd_pts, fd_h_values)

    # calibrated value on plane frames (z = 0 section of the region)
    frame = cal.plane_frame()
    plane_err = 0.0
    for _ in range(50):
        point = cal.coords.assemble(
            rng.uniform(0.25, 1.5, size=cal.coords.n) * rng.choice([-1.0, 1.0], size=cal.coords.n),
            np.zeros(cal.coords.m),
            rng.uniform(-1.0, 1.0, size=cal.coords.k) if cal.coords.k else None,
        )
        value = evaluate(cal.field.evaluator(point), frame)
        plane_err = max(plane_err, abs(value - 1.0))

    # exact vanishing beyond the wedge
    vanish_pts = _interior_sample(cal, lows, highs, 50, rng, 0.0, inside_wedge=False)
    vanish_max = 0.0
    for p in vanish_pts:
        vanish_max = max(vanish_max, float(np.abs(cal.field.evaluator(p).coefficients).max()))

    # the Lipschitz primitive gamma psi_bar tends to 0 at the interface
    ts = tan_theta * (1.0 - np.geomspace(1e-8, 0.2, 12))
    ray_x = np.full(cal.coords.n, 1.0 / math.sqrt(cal.coords.n))
    ray_pts = np.array(
        [
            cal.coords.assemble(
                ray_x,
                t / math.sqrt(cal.coords.m) * np.ones(cal.coords.m) if cal.coords.m else np.zeros(0),
            )
            for t in ts
        ]
    )
    prim = cal.primitive_norm(ray_pts)
    primitive_interface = float(prim[0])

    return CalibrationReport(
        grid=grid,
        grid_points_total=total,
        points_in_wedge=in_wedge,
        max_comass=max_comass,
        envelope_min_slack=float(envelope_min) if envelope_min < math.inf else 0.0,
        optimizer_max_deviation=opt_dev,
        closedness_max_residual=max_res,
        closedness_order=order,
        plane_value_max_error=plane_err,
        vanishing_max_abs=vanish_max,
        primitive_interface_norm=primitive_interface,
    )


# -- pair calibration ---------------------------------------------------------


def adapted_wedge_coordinates(pair: PlanePair) -> tuple[WedgeCoordinates, WedgeCoordinates, float, float]:
    """Per-plane adapted coordinates and orientation signs for a split pair.

    For plane i: the x-block spans its complement factor, the l-block the
    shared intersection, the y-block everything orthogonal to the plane.
    The sign makes the adapted frame (x rows then l rows) match the plane's
    own orientation.
    """
    N = pair.ambient_dim
    l_frame = pair.intersection.orthonormal_basis()
    out = []
    for plane, complement in (
        (pair.p1, pair.complement1),
        (pair.p2, pair.complement2),
    ):
        x_frame = complement.orthonormal_basis()
        stacked = np.vstack([x_frame, l_frame])
        # orthonormal basis of the orthogonal complement of the plane
        _, svals, vt = np.linalg.svd(stacked, full_matrices=True)
        y_frame = vt[stacked.shape[0] :]
        coords = WedgeCoordinates(N, x_frame, y_frame, l_frame)
        change = plane.basis @ stacked.T
        sign = 1.0 if np.linalg.det(change) > 0 else -1.0
        out.append((coords, sign))
    (c1, s1), (c2, s2) = out
    return c1, c2, s1, s2


def sum_pair_calibration(
    params: CutoffParams, pair: PlanePair
) -> tuple[FormField, tuple[VanishingCalibration, VanishingCalibration]]:
    """The two-plane calibration Phi + Psi with disjoint wedge supports.

    Requires the pair's smallest principal angle to exceed twice the wedge
    half-angle; each summand is built in coordinates adapted to its plane,
    with the shared intersection as the l-block, and oriented to calibrate
    that plane positively.
    """
    if pair.principal_angles.size == 0:
        raise ValueError("equal planes: nothing transverse to calibrate")
    min_angle = float(pair.principal_angles.min())
    if not min_angle > 2.0 * params.theta:
        raise ValueError(
            f"angle budget violated: smallest principal angle {min_angle:.6f} "
            f"must exceed 2 theta = {2 * params.theta:.6f}; the wedges would overlap"
        )
    coords1, coords2, sign1, sign2 = adapted_wedge_coordinates(pair)
    cal1 = build_vanishing_calibration(params, coords1, orientation=sign1)
    cal2 = build_vanishing_calibration(params, coords2, orientation=sign2)
    N = pair.ambient_dim
    degree = cal1.degree

    def evaluator(point: np.ndarray) -> AlternatingTensor:
        return cal1.field.evaluator(point) + cal2.field.evaluator(point)

    def singular(point: np.ndarray, margin: float = 0.0) -> bool:
        return cal1.field.singular_locus_descriptor(
            point, margin
        ) or cal2.field.singular_locus_descriptor(point, margin)

    def pointwise(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        v1 = cal1.pointwise_comass(points)
        v2 = cal2.pointwise_comass(points)
        both = (v1 > 0) & (v2 > 0)
        out = np.maximum(v1, v2)
        out[both] = np.nan  # overlapping supports: no closed form, flagged
        return out

    field = FormField(
        ambient_dim=N,
        degree=degree,
        evaluator=evaluator,
        singular_locus_descriptor=singular,
        pointwise_comass=pointwise,
        summands=(cal1.field, cal2.field),
    )
    return field, (cal1, cal2)


@dataclass(frozen=True)
class PairReport:
    """Grid verification of a two-plane calibration."""

    grid: int
    grid_points_total: int
    intersection_dim: int
    min_principal_angle: float
    double_wedge_angle: float
    overlap_count: int
    max_comass: float
    optimizer_max_deviation: float
    closedness_max_residual: float
    closedness_order: float
    plane1_value_max_error: float
    plane2_value_max_error: float
    vanishing_max_abs: float
    comass_tol: float = COMASS_GRID_TOL

    @property
    def angle_budget_ok(self) -> bool:
        return self.min_principal_angle > self.double_wedge_angle

    @property
    def passed(self) -> bool:
        return (
            self.angle_budget_ok
            and self.overlap_count == 0
            and self.max_comass <= 1.0 + self.comass_tol
            and self.optimizer_max_deviation <= OPTIMIZER_AGREEMENT_TOL
            and (
                math.isinf(self.closedness_order)
                or self.closedness_order >= CLOSEDNESS_MIN_ORDER
            )
            and self.plane1_value_max_error <= CALIBRATED_VALUE_TOL
            and self.plane2_value_max_error <= CALIBRATED_VALUE_TOL
            and self.vanishing_max_abs == 0.0
        )


def verify_pair_calibration(
    params: CutoffParams,
    pair: PlanePair,
    region: tuple[Sequence[float], Sequence[float]],
    grid: int,
    *,
    seed: int = 0,
    optimizer_subsample: int = 4,
    closedness_points: int = 3,
    fd_h_values: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
) -> tuple[PairReport, FormField]:
    """Full pipeline for Phi + Psi over a box region around the intersection."""
    field, (cal1, cal2) = sum_pair_calibration(params, pair)
    lows, highs = region_box(*region)
    rng = np.random.default_rng(seed)
    tan_theta = cal1.profile.tan_theta

    def scan_chunk(chunk):
        r1, z1 = cal1.coords.r(chunk), cal1.coords.z(chunk)
        r2, z2 = cal2.coords.r(chunk), cal2.coords.z(chunk)
        active1 = z1 < tan_theta * r1
        active2 = z2 < tan_theta * r2
        values = field.pointwise_comass(chunk)
        finite = values[~np.isnan(values)]
        return (
            chunk.shape[0],
            int((active1 & active2).sum()),
            float(finite.max(initial=0.0)) if finite.size else 0.0,
        )

    results = ordered_map(scan_chunk, list(iter_grid_chunks(lows, highs, grid)))
    total = sum(r[0] for r in results)
    overlap = sum(r[1] for r in results)
    max_comass = max(r[2] for r in results)

    # optimizer cross-check inside each wedge
    opt_dev = 0.0
    margin = 2.0 * max(fd_h_values)
    for cal in (cal1, cal2):
        sub = _interior_sample(cal, lows, highs, optimizer_subsample, rng, margin,
                               inside_wedge=True)
        for p in sub:
            tensor = field.evaluator(p)
            measured = comass(tensor, multistarts=24, tol=1e-12, seed=seed)
            expected = float(field.pointwise_comass(p[None])[0])
            opt_dev = max(opt_dev, abs(measured - expected))

    # closedness of the sum away from both interfaces
    def pair_safe(points: np.ndarray) -> np.ndarray:
        keep = np.ones(points.shape[0], dtype=bool)
        for cal in (cal1, cal2):
            keep &= cal.coords.r(points) > margin
            keep &= cal.coords.interface_distance(points, tan_theta) > margin
        return keep

    fd_pts = []
    attempts = 0
    while len(fd_pts) < closedness_points and attempts < 200:
        attempts += 1
        cand = _interior_sample(cal1 if attempts % 2 else cal2, lows, highs, 8, rng,
                                margin, inside_wedge=True)
        if cand.size == 0:
            continue
        cand = cand[pair_safe(cand)]
        for p in cand:
            fd_pts.append(p)
            if len(fd_pts) == closedness_points:
                break
    max_res, order, _ = closedness_order(field, np.array(fd_pts), fd_h_values)

    # calibrated values on both plane frames
    plane_errs = []
    for cal in (cal1, cal2):
        frame = cal.plane_frame()
        err = 0.0
        for _ in range(25):
            xi = rng.uniform(0.25, 1.25, size=cal.coords.n) * rng.choice(
                [-1.0, 1.0], size=cal.coords.n
            )
            lam = rng.uniform(-1.0, 1.0, size=cal.coords.k) if cal.coords.k else None
            p = cal.coords.assemble(xi, np.zeros(cal.coords.m), lam)
            err = max(err, abs(evaluate(field.evaluator(p), frame) - 1.0))
        plane_errs.append(err)

    # exact vanishing outside both wedges
    vanish_max = 0.0
    found = 0
    for _ in range(200):
        p = sample_box_points(lows, highs, 1, rng)[0]
        r1, z1 = float(cal1.coords.r(p)), float(cal1.coords.z(p))
        r2, z2 = float(cal2.coords.r(p)), float(cal2.coords.z(p))
        if z1 > tan_theta * r1 and z2 > tan_theta * r2 and min(r1, r2) > 1e-9:
            vanish_max = max(
                vanish_max, float(np.abs(field.evaluator(p).coefficients).max())
            )
            found += 1
            if found >= 40:
                break

    report = PairReport(
        grid=grid,
        grid_points_total=total,
        intersection_dim=pair.intersection_dim,
        min_principal_angle=float(pair.principal_angles.min()),
        double_wedge_angle=2.0 * params.theta,
        overlap_count=overlap,
        max_comass=max_comass,
        optimizer_max_deviation=opt_dev,
        closedness_max_residual=max_res,
        closedness_order=order,
        plane1_value_max_error=plane_errs[0],
        plane2_value_max_error=plane_errs[1],
        vanishing_max_abs=vanish_max,
    )
    return report, field


# -- scaled calibrations and coordinate-plane sums ----------------------------


def scaled_calibration(
    cal: VanishingCalibration,
    f: Callable[[np.ndarray], float],
    *,
    check_halfwidth: float = 2.0,
    check_count: int = 512,
    seed: int = 0,
) -> FormField:
    """The field (f o retraction) * phi for a scalar f on the calibrated plane.

    f takes intrinsic x-block coordinates.  |f| <= 1 is required and checked
    on a seeded sample of the plane; closedness is preserved because the
    level sets of the retraction are tangent to the kernel of phi.
    """
    rng = np.random.default_rng(seed)
    sample = rng.uniform(-check_halfwidth, check_halfwidth, size=(check_count, cal.coords.n))
    values = np.array([abs(float(f(x))) for x in sample])
    if values.max(initial=0.0) > 1.0 + 1e-12:
        raise ValueError(
            f"|f| exceeds 1 on the sample grid (max {values.max():g}); "
            "the scaled field would not be a calibration"
        )
    retraction = RetractionMap(cal.coords, cal.profile)

    def evaluator(point: np.ndarray) -> AlternatingTensor:
        tensor = cal.field.evaluator(point)
        if tensor.is_zero():
            return tensor
        image = retraction.apply(point)
        return float(f(cal.coords.x_part(image))) * tensor

    def pointwise(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        base = cal.pointwise_comass(points)
        images = retraction.apply(points)
        scale = np.array([abs(float(f(x))) for x in cal.coords.x_part(images)])
        return base * scale

    return FormField(
        ambient_dim=cal.coords.ambient_dim,
        degree=cal.degree,
        evaluator=evaluator,
        singular_locus_descriptor=cal.field.singular_locus_descriptor,
        pointwise_comass=pointwise,
        summands=(cal.field,),
    )


def coordinate_plane_sum(c: int, ambient_dim: int, *, shared: int = 0) -> FormField:
    """The constant calibration dx_1..dx_c + dy_1..dy_c (^ dl on shared axes).

    Calibrates both coordinate c-planes; comass 1 for c >= 2.  c = 1 is
    rejected: dx_1 + dy_1 is a 1-form of norm sqrt(2) > 1.
    """
    if c == 1:
        raise ValueError(
            "c = 1 rejected: dx_1 + dy_1 has comass sqrt(2) > 1 and cannot calibrate"
        )
    if c < 2:
        raise ValueError(f"block dimension c must be >= 2, got {c}")
    if 2 * c + shared > ambient_dim:
        raise ValueError(
            f"need 2c + shared = {2 * c + shared} <= ambient dimension {ambient_dim}"
        )
    x_tensor = AlternatingTensor.basis(ambient_dim, tuple(range(c)))
    y_tensor = AlternatingTensor.basis(ambient_dim, tuple(range(c, 2 * c)))
    tensor = x_tensor + y_tensor
    if shared:
        l_tensor = AlternatingTensor.basis(
            ambient_dim, tuple(range(2 * c, 2 * c + shared))
        )
        tensor = wedge(tensor, l_tensor)

    def evaluator(point: np.ndarray) -> AlternatingTensor:
        return tensor

    comass_cache: dict = {}

    def pointwise(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if "value" not in comass_cache:
            comass_cache["value"] = comass(tensor)
        return np.full(points.shape[0], comass_cache["value"])

    return FormField(
        ambient_dim=ambient_dim,
        degree=c + shared,
        evaluator=evaluator,
        pointwise_comass=pointwise,
    )
