from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ph_bloch.calculus.cmatrix import (
    SINGULAR_THRESHOLD,
    CMat,
    determinant,
    inverse,
    min_gain,
    op_norm,
    stack_min_gains,
)
from ph_bloch.calculus.holomap import PolyMap, d_poly, d_poly_batch, eval_poly
from ph_bloch.core.sampling import realify, rng_for, uniform_sphere
from ph_bloch.errors import DhSingular, DimensionMismatch, InternalConsistencyError, Singular, UsageError

# Imaginary residue allowed in the block determinant before it is dropped.
IMAG_RESIDUE_TOL = 1e-10

# Number of fixed (axis / diagonal) directions added to every sphere scan.
SPHERE_SCAN_FIXED = 64

# Power / inverse iteration steps used to polish the sphere-scan extremes.
POLISH_ITERATIONS = 4000


@dataclass(frozen=True, eq=False)
class PHMap:
    """Pluriharmonic mapping f = h + conj(g) with polynomial h, g."""

    h: PolyMap
    g: PolyMap

    def __post_init__(self) -> None:
        if self.h.n != self.g.n:
            raise DimensionMismatch("h and g must have the same dimension", h=self.h.n, g=self.g.n)

    @property
    def n(self) -> int:
        return self.h.n

    @classmethod
    def holomorphic(cls, h: PolyMap) -> "PHMap":
        return cls(h=h, g=PolyMap.zero(h.n))

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        return eval_ph(self, z)


@dataclass(frozen=True, eq=False)
class DerivPack:
    z: np.ndarray
    Dh: CMat
    Dg: CMat
    omega: CMat
    lambda_big: float
    lambda_small: float
    det_j: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "z": [[float(c.real), float(c.imag)] for c in self.z],
            "Dh": self.Dh.to_records(),
            "Dg": self.Dg.to_records(),
            "omega": self.omega.to_records(),
            "omega_norm": op_norm(self.omega),
            "lambda_big": self.lambda_big,
            "lambda_small": self.lambda_small,
            "det_j": self.det_j,
        }


def eval_ph(f: PHMap, z: Sequence[complex]) -> np.ndarray:
    """f(z) = h(z) + conj(g(z)), single point or batch."""
    return eval_poly(f.h, z) + np.conj(eval_poly(f.g, z))


def omega(f: PHMap, z: Sequence[complex]) -> CMat:
    """Dilatation Dg(z) [Dh(z)]^-1."""
    Dh = d_poly(f.h, z)
    try:
        Dh_inv = inverse(Dh)
    except Singular as e:
        raise DhSingular(
            "Dh is singular; local biholomorphy fails",
            witness=_point_record(z),
            min_gain=e.context.get("min_gain"),
        ) from e
    return d_poly(f.g, z) @ Dh_inv


def real_jacobian_batch(f: PHMap, z: Sequence[complex]) -> np.ndarray:
    """
    (N, 2n, 2n) real Jacobians of (Re f, Im f) w.r.t. (x1..xn, y1..yn).

    With Df = Dh and conj-derivative Dbar f = conj(Dg):
    df/dx = Df + Dbar f, df/dy = i (Df - Dbar f).
    """
    Df = d_poly_batch(f.h, z)
    Dbar = np.conj(d_poly_batch(f.g, z))
    dx = Df + Dbar
    dy = 1j * (Df - Dbar)
    top = np.concatenate([dx.real, dy.real], axis=2)
    bottom = np.concatenate([dx.imag, dy.imag], axis=2)
    return np.concatenate([top, bottom], axis=1)


def real_jacobian(f: PHMap, z: Sequence[complex]) -> np.ndarray:
    arr = np.asarray(z, dtype=complex)
    if arr.ndim != 1:
        raise DimensionMismatch("real_jacobian takes a single point", got=list(arr.shape))
    return real_jacobian_batch(f, arr)[0]


def det_jacobian(f: PHMap, z: Sequence[complex]) -> float:
    """det J_f = |det Dh|^2 det(I - omega conj(omega)), checked to be real."""
    w = omega(f, z)
    Dh = d_poly(f.h, z)
    block = determinant(CMat.identity(f.n) - w @ w.conj())
    value = abs(determinant(Dh)) ** 2 * block
    if abs(value.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(value.real)):
        raise InternalConsistencyError(
            "block determinant has a non-negligible imaginary part",
            real=value.real,
            imag=value.imag,
        )
    return float(value.real)


def det_jacobian_batch(f: PHMap, z: Sequence[complex]) -> np.ndarray:
    """det of the real 2n x 2n Jacobian at each point (no Dh hypothesis needed)."""
    return np.linalg.det(real_jacobian_batch(f, z))


def lambda_extremes(f: PHMap, z: Sequence[complex]) -> Tuple[float, float]:
    """(Lambda_f(z), lambda_f(z)): extreme singular values of the real Jacobian."""
    s = np.linalg.svd(real_jacobian(f, z), compute_uv=False)
    return float(s[0]), float(s[-1])


def lambda_extremes_batch(f: PHMap, z: Sequence[complex]) -> Tuple[np.ndarray, np.ndarray]:
    s = np.linalg.svd(real_jacobian_batch(f, z), compute_uv=False)
    return s[:, 0], s[:, -1]


def _fixed_directions(n: int) -> np.ndarray:
    """64 deterministic unit directions: phased axes first, then phased diagonals."""
    dirs = []
    for k in range(n):
        for m in range(8):
            e = np.zeros(n, dtype=complex)
            e[k] = np.exp(1j * np.pi * m / 4.0)
            dirs.append(e)
    m = 0
    while len(dirs) < SPHERE_SCAN_FIXED:
        phases = np.exp(2j * np.pi * m * (np.arange(n) + 1) / SPHERE_SCAN_FIXED)
        dirs.append(phases / np.sqrt(n))
        m += 1
    return np.array(dirs[:SPHERE_SCAN_FIXED])


def _polish(J: np.ndarray, start: np.ndarray, largest: bool) -> float:
    """
    ||J v|| after power iteration (largest) or inverse iteration (smallest) on J^T J from `start`.
    Every iterate is a unit vector, so the value never leaves [lambda, Lambda].
    """
    M = J.T @ J
    v = start / np.linalg.norm(start)
    factor = None
    if not largest:
        try:
            factor = cho_factor(M)
        except LinAlgError:
            # J^T J not positive definite; keep the start direction
            return float(np.linalg.norm(J @ v))
    for _ in range(POLISH_ITERATIONS):
        w = M @ v if factor is None else cho_solve(factor, v)
        norm = float(np.linalg.norm(w))
        if not np.isfinite(norm) or norm == 0.0:
            break
        v = w / norm
    return float(np.linalg.norm(J @ v))


def sphere_scan_extremes(f: PHMap, z: Sequence[complex], samples: int, seed: int) -> Tuple[float, float]:
    """
    Extremes of ||Dh theta + conj(Dg) conj(theta)|| over `samples` uniform theta on the
    complex unit sphere plus 64 fixed directions.

    The best fixed directions are then polished on the real Jacobian (power iteration for
    the max, inverse iteration for the min). The random stream is a prefix stream and the
    polish does not depend on it, so more samples never loses a direction
    (max nondecreasing, min nonincreasing).
    """
    if samples < 1:
        raise UsageError("samples must be positive", samples=samples)
    Dh = d_poly(f.h, z).entries
    Dg_bar = np.conj(d_poly(f.g, z).entries)
    fixed = _fixed_directions(f.n)
    theta = np.vstack([fixed, uniform_sphere(rng_for(seed), f.n, samples)])
    images = theta @ Dh.T + np.conj(theta) @ Dg_bar.T
    norms = np.linalg.norm(images, axis=1)

    J = real_jacobian(f, z)
    fixed_norms = norms[: len(fixed)]
    big_start = realify(fixed[int(np.argmax(fixed_norms))])
    small_start = realify(fixed[int(np.argmin(fixed_norms))])
    generic = np.sqrt(np.arange(2, 2 * f.n + 2, dtype=float))
    big = max(float(norms.max()), _polish(J, big_start, True), _polish(J, generic, True))
    small = min(float(norms.min()), _polish(J, small_start, False), _polish(J, generic, False))
    return big, small


def planar_dilatation(f: PHMap, z: Sequence[complex]) -> complex:
    """n = 1 only: omega(z) = g'(z) / h'(z)."""
    if f.n != 1:
        raise DimensionMismatch("planar dilatation needs n = 1", n=f.n)
    return complex(omega(f, z).entries[0, 0])


def is_sense_preserving(f: PHMap, z: Sequence[complex]) -> bool:
    """Sufficient test: Dh nonsingular and ||omega(z)|| < 1."""
    if min_gain(d_poly(f.h, z)) <= SINGULAR_THRESHOLD:
        return False
    return op_norm(omega(f, z)) < 1.0


def derivs(f: PHMap, z: Sequence[complex]) -> DerivPack:
    point = np.asarray(z, dtype=complex)
    big, small = lambda_extremes(f, point)
    return DerivPack(
        z=point,
        Dh=d_poly(f.h, point),
        Dg=d_poly(f.g, point),
        omega=omega(f, point),
        lambda_big=big,
        lambda_small=small,
        det_j=det_jacobian(f, point),
    )


def omega_norms_batch(f: PHMap, z: Sequence[complex]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    For a batch of points: (||Dh||, ||omega||, singular mask).

    Points where Dh is singular get ||omega|| = inf and are flagged in the mask.
    """
    Dh = d_poly_batch(f.h, z)
    Dg = d_poly_batch(f.g, z)
    s_h = np.linalg.svd(Dh, compute_uv=False)
    singular = s_h[:, -1] <= SINGULAR_THRESHOLD
    safe = Dh.copy()
    safe[singular] = np.eye(f.n, dtype=complex)
    # omega = Dg Dh^-1  <=>  Dh^T omega^T = Dg^T
    w = np.swapaxes(np.linalg.solve(np.swapaxes(safe, 1, 2), np.swapaxes(Dg, 1, 2)), 1, 2)
    w_norm = np.linalg.svd(w, compute_uv=False)[:, 0]
    w_norm = np.where(singular, np.inf, w_norm)
    return s_h[:, 0], w_norm, singular


def dh_min_gains_batch(f: PHMap, z: Sequence[complex]) -> np.ndarray:
    return stack_min_gains(d_poly_batch(f.h, z))


def _point_record(z: Sequence[complex]) -> list:
    return [[float(c.real), float(c.imag)] for c in np.atleast_1d(np.asarray(z, dtype=complex))]
