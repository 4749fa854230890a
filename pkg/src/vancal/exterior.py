"""Exterior algebra over R^N and comass computation.

Alternating k-tensors are stored by their coefficients on the basis of
strictly increasing multi-indices in lexicographic order, so antisymmetry
carries no redundant storage.  The comass of a tensor (its supremum over
orthonormal k-frames) is computed two independent ways: projected ascent
on the frame manifold with multistarts, and a brute-force sampling oracle
over random orthonormal frames.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Optional

import numpy as np

MAX_AMBIENT_DIM = 16

_ORACLE_CHUNK = 1 << 16


def _never_singular(point: np.ndarray, margin: float = 0.0) -> bool:
    return False


@lru_cache(maxsize=None)
def multi_indices(ambient_dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """All strictly increasing multi-indices of the given length, lexicographic."""
    return tuple(combinations(range(ambient_dim), degree))


@lru_cache(maxsize=None)
def _index_positions(ambient_dim: int, degree: int) -> dict:
    return {mi: pos for pos, mi in enumerate(multi_indices(ambient_dim, degree))}


@lru_cache(maxsize=None)
def _index_array(ambient_dim: int, degree: int) -> np.ndarray:
    mis = multi_indices(ambient_dim, degree)
    if degree == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.array(mis, dtype=np.intp)


def n_coefficients(ambient_dim: int, degree: int) -> int:
    return math.comb(ambient_dim, degree)


@dataclass(frozen=True, eq=False)
class AlternatingTensor:
    """A pointwise alternating k-tensor on R^N in the increasing-index basis."""

    ambient_dim: int
    degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        if not 1 <= self.ambient_dim <= MAX_AMBIENT_DIM:
            raise ValueError(
                f"ambient dimension must be in [1, {MAX_AMBIENT_DIM}], got {self.ambient_dim}"
            )
        if not 0 <= self.degree <= self.ambient_dim:
            raise ValueError(
                f"degree must be in [0, {self.ambient_dim}], got {self.degree}"
            )
        coeff = np.array(self.coefficients, dtype=float).reshape(-1)
        expected = n_coefficients(self.ambient_dim, self.degree)
        if coeff.size != expected:
            raise ValueError(
                f"expected {expected} coefficients for degree {self.degree} "
                f"in dimension {self.ambient_dim}, got {coeff.size}"
            )
        coeff.flags.writeable = False
        object.__setattr__(self, "coefficients", coeff)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ambient_dim: int, degree: int) -> "AlternatingTensor":
        return cls(ambient_dim, degree, np.zeros(n_coefficients(ambient_dim, degree)))

    @classmethod
    def basis(cls, ambient_dim: int, index: tuple[int, ...]) -> "AlternatingTensor":
        """The basis covector dx_{i1} ^ ... ^ dx_{ik} for a strictly increasing index."""
        index = tuple(index)
        if any(index[i] >= index[i + 1] for i in range(len(index) - 1)):
            raise ValueError(f"index must be strictly increasing, got {index}")
        pos = _index_positions(ambient_dim, len(index))[index]
        coeff = np.zeros(n_coefficients(ambient_dim, len(index)))
        coeff[pos] = 1.0
        return cls(ambient_dim, len(index), coeff)

    @classmethod
    def from_covector(cls, components: np.ndarray) -> "AlternatingTensor":
        components = np.asarray(components, dtype=float).reshape(-1)
        return cls(components.size, 1, components)

    @classmethod
    def scalar(cls, ambient_dim: int, value: float) -> "AlternatingTensor":
        return cls(ambient_dim, 0, np.array([value]))

    # -- vector space operations -------------------------------------------

    def _check_compatible(self, other: "AlternatingTensor") -> None:
        if self.ambient_dim != other.ambient_dim or self.degree != other.degree:
            raise ValueError(
                f"incompatible tensors: ({self.ambient_dim}, deg {self.degree}) "
                f"vs ({other.ambient_dim}, deg {other.degree})"
            )

    def __add__(self, other: "AlternatingTensor") -> "AlternatingTensor":
        self._check_compatible(other)
        return AlternatingTensor(
            self.ambient_dim, self.degree, self.coefficients + other.coefficients
        )

    def __sub__(self, other: "AlternatingTensor") -> "AlternatingTensor":
        self._check_compatible(other)
        return AlternatingTensor(
            self.ambient_dim, self.degree, self.coefficients - other.coefficients
        )

    def __mul__(self, c: float) -> "AlternatingTensor":
        return AlternatingTensor(self.ambient_dim, self.degree, self.coefficients * c)

    __rmul__ = __mul__

    def __neg__(self) -> "AlternatingTensor":
        return self * -1.0

    @property
    def norm(self) -> float:
        """Euclidean norm in the orthonormal increasing-index basis.

        Always an upper bound for the comass; equal to it for simple tensors.
        """
        return float(np.linalg.norm(self.coefficients))

    def is_zero(self) -> bool:
        return bool(np.all(self.coefficients == 0.0))

    def allclose(self, other: "AlternatingTensor", atol: float = 1e-12) -> bool:
        self._check_compatible(other)
        return bool(np.allclose(self.coefficients, other.coefficients, atol=atol, rtol=0.0))

    def wedge(self, other: "AlternatingTensor") -> "AlternatingTensor":
        return wedge(self, other)

    def __repr__(self) -> str:
        return (
            f"AlternatingTensor(N={self.ambient_dim}, k={self.degree}, "
            f"norm={self.norm:.6g})"
        )


@dataclass(frozen=True, eq=False)
class SimpleKVector:
    """An ordered k-frame in R^N, representing the simple k-vector v1 ^ ... ^ vk."""

    frame: np.ndarray  # shape (k, N), rows are the frame vectors

    def __post_init__(self):
        frame = np.array(self.frame, dtype=float)
        if frame.ndim != 2:
            raise ValueError("frame must be a (k, N) array of row vectors")
        frame.flags.writeable = False
        object.__setattr__(self, "frame", frame)

    @property
    def degree(self) -> int:
        return self.frame.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[1]

    def gram_defect(self) -> float:
        """Max-norm distance of the Gram matrix from the identity."""
        k = self.degree
        gram = self.frame @ self.frame.T
        return float(np.max(np.abs(gram - np.eye(k)))) if k else 0.0

    def is_orthonormal(self, tol: float = 1e-12) -> bool:
        return self.gram_defect() <= tol


# -- wedge -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _wedge_table(ambient_dim: int, deg_a: int, deg_b: int):
    """Sparse multiplication table (pos_a, pos_b, pos_out, sign) for the wedge.

    Rows are sorted by a key symmetric in the two factors, so u ^ v and
    v ^ u accumulate in the same order and graded anticommutativity holds
    bit-exactly.
    """
    out_positions = _index_positions(ambient_dim, deg_a + deg_b)
    rows = []
    for pa, ia in enumerate(multi_indices(ambient_dim, deg_a)):
        set_a = set(ia)
        for pb, ib in enumerate(multi_indices(ambient_dim, deg_b)):
            if set_a & set(ib):
                continue
            # parity of the merge of two sorted index blocks
            inversions = sum(1 for x in ia for y in ib if x > y)
            merged = tuple(sorted(ia + ib))
            key = (pa, pb) if deg_a < deg_b or (deg_a == deg_b and pa <= pb) else (pb, pa)
            rows.append(
                (out_positions[merged], key, pa, pb, -1.0 if inversions % 2 else 1.0)
            )
    rows.sort(key=lambda row: (row[0], row[1]))
    return (
        np.array([r[2] for r in rows], dtype=np.intp),
        np.array([r[3] for r in rows], dtype=np.intp),
        np.array([r[0] for r in rows], dtype=np.intp),
        np.array([r[4] for r in rows], dtype=float),
    )


def wedge(u: AlternatingTensor, v: AlternatingTensor) -> AlternatingTensor:
    """Exterior product in the increasing-index basis."""
    if u.ambient_dim != v.ambient_dim:
        raise ValueError(
            f"ambient dimension mismatch: {u.ambient_dim} vs {v.ambient_dim}"
        )
    k_out = u.degree + v.degree
    if k_out > u.ambient_dim:
        raise ValueError(
            f"degree overflow: {u.degree} + {v.degree} > {u.ambient_dim}"
        )
    ia, ib, iout, signs = _wedge_table(u.ambient_dim, u.degree, v.degree)
    vals = signs * u.coefficients[ia] * v.coefficients[ib]
    if u.degree == v.degree and u.degree >= 1 and vals.size:
        # swap-partner rows are adjacent; combining them first keeps
        # anticommutativity bit-exact (IEEE addition commutes pairwise)
        vals = vals[0::2] + vals[1::2]
        iout = iout[0::2]
    out = np.zeros(n_coefficients(u.ambient_dim, k_out))
    np.add.at(out, iout, vals)
    return AlternatingTensor(u.ambient_dim, k_out, out)


# -- interior product ------------------------------------------------------


@lru_cache(maxsize=None)
def _interior_table(ambient_dim: int, degree: int):
    """Table (pos_in, axis, pos_out, sign) for contraction with a vector."""
    out_positions = _index_positions(ambient_dim, degree - 1)
    rows_in, axes, rows_out, signs = [], [], [], []
    for p, idx in enumerate(multi_indices(ambient_dim, degree)):
        for j, axis in enumerate(idx):
            reduced = idx[:j] + idx[j + 1 :]
            rows_in.append(p)
            axes.append(axis)
            rows_out.append(out_positions[reduced])
            signs.append(-1.0 if j % 2 else 1.0)
    return (
        np.array(rows_in, dtype=np.intp),
        np.array(axes, dtype=np.intp),
        np.array(rows_out, dtype=np.intp),
        np.array(signs, dtype=float),
    )


def interior_product(w: np.ndarray, u: AlternatingTensor) -> AlternatingTensor:
    """Contraction i_w(u), inserting the vector w into the first slot."""
    if u.degree < 1:
        raise ValueError("interior product requires degree >= 1")
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size != u.ambient_dim:
        raise ValueError(
            f"vector length {w.size} does not match ambient dimension {u.ambient_dim}"
        )
    rows_in, axes, rows_out, signs = _interior_table(u.ambient_dim, u.degree)
    out = np.zeros(n_coefficients(u.ambient_dim, u.degree - 1))
    np.add.at(out, rows_out, signs * w[axes] * u.coefficients[rows_in])
    return AlternatingTensor(u.ambient_dim, u.degree - 1, out)


# -- evaluation ------------------------------------------------------------


def frame_plucker(frame: np.ndarray, ambient_dim: int) -> np.ndarray:
    """Pluecker coordinates of a k-frame: determinants over increasing indices."""
    frame = np.asarray(frame, dtype=float)
    k = frame.shape[0]
    idx = _index_array(ambient_dim, k)
    if k == 0:
        return np.ones(1)
    sub = frame[:, idx]  # (k, M, k)
    return np.linalg.det(np.moveaxis(sub, 1, 0))


def evaluate(u: AlternatingTensor, xi) -> float:
    """Determinant pairing of u with the simple k-vector spanned by a frame."""
    frame = xi.frame if isinstance(xi, SimpleKVector) else np.asarray(xi, dtype=float)
    if frame.ndim != 2 or frame.shape[1] != u.ambient_dim:
        raise ValueError(
            f"frame must have shape (k, {u.ambient_dim}), got {frame.shape}"
        )
    if frame.shape[0] != u.degree:
        raise ValueError(
            f"degree mismatch: tensor has degree {u.degree}, frame has {frame.shape[0]} vectors"
        )
    return float(u.coefficients @ frame_plucker(frame, u.ambient_dim))


# -- batched machinery for the comass optimizer -----------------------------


def _batched_plucker(frames: np.ndarray, ambient_dim: int, degree: int) -> np.ndarray:
    """Pluecker coordinates for a (S, k, N) stack of frames, returned as (S, M)."""
    if degree == 0:
        return np.ones((frames.shape[0], 1))
    idx = _index_array(ambient_dim, degree)
    sub = frames[:, :, idx]  # (S, k, M, k)
    return np.linalg.det(np.moveaxis(sub, 2, 1))


@lru_cache(maxsize=None)
def _minor_index_pairs(k: int):
    keep = []
    for a in range(k):
        keep.append(np.array([r for r in range(k) if r != a], dtype=np.intp))
    return keep


def _batched_cofactors(mats: np.ndarray) -> np.ndarray:
    """Cofactor matrices of a (..., k, k) stack, via explicit minors.

    Robust at singular matrices, unlike det * inv.
    """
    k = mats.shape[-1]
    if k == 1:
        return np.ones_like(mats)
    keep = _minor_index_pairs(k)
    cof = np.empty_like(mats)
    for a in range(k):
        rows = mats[..., keep[a], :]
        for b in range(k):
            minor = rows[..., :, keep[b]]
            sign = -1.0 if (a + b) % 2 else 1.0
            cof[..., a, b] = sign * np.linalg.det(minor)
    return cof


@lru_cache(maxsize=None)
def _scatter_matrices(ambient_dim: int, degree: int):
    idx = _index_array(ambient_dim, degree)
    mats = []
    for b in range(degree):
        s = np.zeros((idx.shape[0], ambient_dim))
        s[np.arange(idx.shape[0]), idx[:, b]] = 1.0
        mats.append(s)
    return tuple(mats)


def _batched_values(coeff: np.ndarray, frames: np.ndarray, ambient_dim: int, degree: int):
    return _batched_plucker(frames, ambient_dim, degree) @ coeff


def _batched_gradients(coeff, frames, ambient_dim, degree):
    """d/dQ of <coeff, pluecker(Q)> for a (S, k, N) stack Q."""
    idx = _index_array(ambient_dim, degree)
    sub = np.moveaxis(frames[:, :, idx], 2, 1)  # (S, M, k, k)
    cof = _batched_cofactors(sub)
    grad = np.zeros_like(frames)
    scatter = _scatter_matrices(ambient_dim, degree)
    for b in range(degree):
        contrib = coeff[None, :, None] * cof[:, :, :, b]  # (S, M, k)
        grad += np.einsum("smk,mn->skn", contrib, scatter[b])
    return grad


def _polar_orthonormalize(frames: np.ndarray) -> np.ndarray:
    """Nearest orthonormal frames (polar retraction) for a (S, k, N) stack."""
    u, _, vt = np.linalg.svd(frames, full_matrices=False)
    return u @ vt


def random_orthonormal_frames(
    count: int, ambient_dim: int, degree: int, rng: np.random.Generator
) -> np.ndarray:
    """Haar-distributed orthonormal frames, shape (count, degree, ambient_dim).

    QR of a Gaussian matrix is Haar only after fixing the R diagonal to be
    positive; LAPACK's Householder sign convention would otherwise bias
    every column into a half-space.
    """
    if degree == 0:
        return np.zeros((count, 0, ambient_dim))
    gauss = rng.standard_normal((count, ambient_dim, degree))
    q, r = np.linalg.qr(gauss)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return np.swapaxes(q * signs[:, None, :], 1, 2)


def comass(
    u: AlternatingTensor,
    multistarts: int = 64,
    tol: float = 1e-10,
    *,
    seed: int = 0,
    max_iter: int = 10_000,
    return_frame: bool = False,
):
    """Comass by projected ascent on orthonormal k-frames with multistarts.

    Ascends the pairing in the frame variables and re-orthonormalizes after
    every step (polar retraction); a start is converged when its accepted
    frame update has norm below ``tol``.  The largest local maximum over all
    starts is returned.  Since flipping one frame vector negates the value,
    the magnitude of any converged value is a valid lower bound, so the
    maximum of absolute values is reported.
    """
    N, k = u.ambient_dim, u.degree
    if k == 0:
        val = abs(float(u.coefficients[0]))
        return (val, np.zeros((0, N))) if return_frame else val
    if u.is_zero():
        frame = np.zeros((k, N))
        frame[:, :k] = np.eye(k)
        return (0.0, frame) if return_frame else 0.0

    rng = np.random.default_rng(seed)
    frames = random_orthonormal_frames(multistarts, N, k, rng)
    coeff = u.coefficients
    vals = _batched_values(coeff, frames, N, k)
    eta = np.full(multistarts, 0.25)
    active = np.ones(multistarts, dtype=bool)

    iterations = 0
    while active.any() and iterations < max_iter:
        iterations += 1
        grads = _batched_gradients(coeff, frames[active], N, k)
        cand = _polar_orthonormalize(
            frames[active] + eta[active, None, None] * grads
        )
        cand_vals = _batched_values(coeff, cand, N, k)
        improved = cand_vals > vals[active]
        step_norm = np.linalg.norm(
            (cand - frames[active]).reshape(cand.shape[0], -1), axis=1
        )

        idx_active = np.flatnonzero(active)
        take = idx_active[improved]
        frames[take] = cand[improved]
        vals[take] = cand_vals[improved]
        eta[take] *= 1.25
        eta[idx_active[~improved]] *= 0.5

        done = np.zeros(len(idx_active), dtype=bool)
        done |= improved & (step_norm < tol)
        done |= eta[idx_active] < 1e-17
        active[idx_active[done]] = False

    if active.any():
        warnings.warn(
            f"comass ascent: {int(active.sum())} of {multistarts} starts did not "
            f"converge within {max_iter} iterations",
            RuntimeWarning,
        )

    best = int(np.argmax(np.abs(vals)))
    value = abs(float(vals[best]))
    if return_frame:
        frame = frames[best]
        if vals[best] < 0:
            frame = frame.copy()
            frame[0] *= -1.0
        return value, frame
    return value


def comass_oracle(u: AlternatingTensor, samples: int, seed: int) -> float:
    """Brute-force comass lower bound: max pairing over random orthonormal frames.

    Deterministic for a fixed seed and never exceeds the true comass.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    N, k = u.ambient_dim, u.degree
    if k == 0 or u.is_zero():
        return abs(float(u.coefficients[0])) if k == 0 else 0.0
    rng = np.random.default_rng(seed)
    best = -math.inf
    remaining = samples
    while remaining > 0:
        batch = min(_ORACLE_CHUNK, remaining)
        frames = random_orthonormal_frames(batch, N, k, rng)
        vals = _batched_values(u.coefficients, frames, N, k)
        best = max(best, float(vals.max()))
        remaining -= batch
    return best


def _best_sampled_frame(u: AlternatingTensor, samples: int, rng: np.random.Generator):
    N, k = u.ambient_dim, u.degree
    best_val = -math.inf
    best_frame = None
    remaining = samples
    while remaining > 0:
        batch = min(_ORACLE_CHUNK, remaining)
        frames = random_orthonormal_frames(batch, N, k, rng)
        vals = np.abs(_batched_values(u.coefficients, frames, N, k))
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val = float(vals[j])
            best_frame = frames[j]
        remaining -= batch
    return best_val, best_frame


def comass_oracle_refined(
    u: AlternatingTensor,
    samples: int,
    seed: int,
    *,
    rounds: int = 64,
    proposals: int = 128,
) -> float:
    """Sampling oracle followed by derivative-free local refinement.

    Shrinking-radius random search around the best sampled frame; every
    candidate is a genuine orthonormal frame, so the result is still a lower
    bound for the comass.  Independent of the gradient-ascent optimizer.
    """
    N, k = u.ambient_dim, u.degree
    if k == 0 or u.is_zero():
        return comass_oracle(u, max(samples, 1), seed)
    rng = np.random.default_rng(seed)
    val, frame = _best_sampled_frame(u, samples, rng)
    if frame is None:
        return 0.0
    sigma = 0.3
    for _ in range(rounds):
        noise = sigma * rng.standard_normal((proposals, N, k))
        cand = noise + frame.T[None, :, :]
        q, r = np.linalg.qr(cand)
        signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
        signs[signs == 0] = 1.0
        cand_frames = np.swapaxes(q * signs[:, None, :], 1, 2)
        vals = np.abs(_batched_values(u.coefficients, cand_frames, N, k))
        j = int(np.argmax(vals))
        if vals[j] > val:
            val = float(vals[j])
            frame = cand_frames[j]
        else:
            sigma *= 0.6
            if sigma < 1e-14:
                break
    return val


# -- form fields and the finite-difference exterior derivative ---------------


@dataclass(frozen=True, eq=False)
class FormField:
    """A k-form field on R^N given by a pointwise evaluator.

    ``singular_locus_descriptor(p, margin)`` flags points within ``margin``
    of the set where the field is undefined or merely Lipschitz.
    ``pointwise_comass`` is an optional vectorized fast path returning the
    exact pointwise comass for a (num_points, N) batch; it is only provided
    by constructions whose values are known to be simple.  ``summands``
    records an additive decomposition when the field is built as a sum.
    """

    ambient_dim: int
    degree: int
    evaluator: Callable[[np.ndarray], AlternatingTensor]
    singular_locus_descriptor: Callable[..., bool] = _never_singular
    pointwise_comass: Optional[Callable[[np.ndarray], np.ndarray]] = None
    summands: tuple = ()

    def __call__(self, point: np.ndarray) -> AlternatingTensor:
        return self.evaluator(np.asarray(point, dtype=float))


def constant_form_field(tensor: AlternatingTensor) -> FormField:
    comass_value = None

    def _evaluate(point: np.ndarray) -> AlternatingTensor:
        return tensor

    def _pointwise(points: np.ndarray) -> np.ndarray:
        nonlocal comass_value
        if comass_value is None:
            comass_value = comass(tensor)
        return np.full(points.shape[0], comass_value)

    return FormField(
        ambient_dim=tensor.ambient_dim,
        degree=tensor.degree,
        evaluator=_evaluate,
        pointwise_comass=_pointwise,
    )


def finite_difference_exterior_derivative(
    field: FormField, point: np.ndarray, h: float
) -> AlternatingTensor:
    """Central-difference approximation of dF at a point, error O(h^2)."""
    point = np.asarray(point, dtype=float).reshape(-1)
    N, k = field.ambient_dim, field.degree
    if point.size != N:
        raise ValueError(f"point must have length {N}")
    if k >= N:
        raise ValueError("exterior derivative of a top-degree form is not representable")
    if h <= 0:
        raise ValueError("step h must be positive")
    if field.singular_locus_descriptor(point, 2.0 * h):
        raise ValueError(
            f"finite-difference stencil at {point} touches the singular locus "
            f"(margin {2 * h:g})"
        )
    out = np.zeros(n_coefficients(N, k + 1))
    for axis in range(N):
        offset = np.zeros(N)
        offset[axis] = h
        plus = field.evaluator(point + offset)
        minus = field.evaluator(point - offset)
        partial = (plus.coefficients - minus.coefficients) / (2.0 * h)
        term = wedge(
            AlternatingTensor.basis(N, (axis,)),
            AlternatingTensor(N, k, partial),
        )
        out += term.coefficients
    return AlternatingTensor(N, k + 1, out)


def closedness_order(
    field: FormField,
    points: np.ndarray,
    h_values=(1e-2, 5e-3, 2.5e-3),
) -> tuple[float, float, np.ndarray]:
    """Fit the convergence order of the finite-difference dF residual.

    Returns (max residual at the smallest h, fitted order, residual matrix).
    Residuals at machine-precision level are treated as exactly closed and
    reported with order infinity.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return 0.0, math.inf, np.zeros((0, len(h_values)))
    points = np.atleast_2d(points)
    h_values = np.asarray(sorted(h_values, reverse=True), dtype=float)
    residuals = np.empty((points.shape[0], h_values.size))
    for i, p in enumerate(points):
        for j, h in enumerate(h_values):
            residuals[i, j] = finite_difference_exterior_derivative(field, p, h).norm
    max_res = float(residuals[:, -1].max(initial=0.0))
    mean_res = residuals.mean(axis=0)
    if np.all(mean_res < 1e-12):
        return max_res, math.inf, residuals
    slope = np.polyfit(np.log(h_values), np.log(np.maximum(mean_res, 1e-300)), 1)[0]
    return max_res, float(slope), residuals
