from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from ph_bloch.errors import DimensionMismatch, NonFiniteInput, Singular

# min_gain at or below this counts as singular.
SINGULAR_THRESHOLD = 1e-12


@dataclass(frozen=True, eq=False)
class CMat:
    """
    Dense n x n complex matrix (immutable).

    Houses Dh, Dg, omega = Dg[Dh]^-1, perturbation matrices A, A(lambda), B, C.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=complex, copy=True)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise DimensionMismatch("CMat must be square with n >= 1", shape=list(arr.shape))
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInput("CMat entries must be finite", shape=list(arr.shape))
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, n: int) -> "CMat":
        return cls(np.eye(int(n), dtype=complex))

    @classmethod
    def zeros(cls, n: int) -> "CMat":
        return cls(np.zeros((int(n), int(n)), dtype=complex))

    @classmethod
    def diag(cls, values: Iterable[complex]) -> "CMat":
        return cls(np.diag(np.asarray(list(values), dtype=complex)))

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    @property
    def is_diagonal(self) -> bool:
        off = self.entries - np.diag(np.diag(self.entries))
        return bool(np.all(off == 0))

    def conj(self) -> "CMat":
        return CMat(np.conj(self.entries))

    @property
    def T(self) -> "CMat":
        return CMat(self.entries.T)

    @property
    def H(self) -> "CMat":
        return CMat(np.conj(self.entries).T)

    def __matmul__(self, other: "CMat") -> "CMat":
        _same_n(self, other)
        return CMat(self.entries @ other.entries)

    def __add__(self, other: "CMat") -> "CMat":
        _same_n(self, other)
        return CMat(self.entries + other.entries)

    def __sub__(self, other: "CMat") -> "CMat":
        _same_n(self, other)
        return CMat(self.entries - other.entries)

    def __mul__(self, scalar: complex) -> "CMat":
        return CMat(self.entries * complex(scalar))

    __rmul__ = __mul__

    def apply(self, v: Sequence[complex]) -> np.ndarray:
        """Column action A @ v."""
        vec = np.asarray(v, dtype=complex)
        if vec.shape != (self.n,):
            raise DimensionMismatch("vector length does not match matrix", n=self.n, got=int(vec.size))
        return self.entries @ vec

    def allclose(self, other: "CMat", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(np.allclose(self.entries, other.entries, rtol=0.0, atol=atol))

    def to_records(self) -> List[List[List[float]]]:
        """Row-major [[re, im], ...] pairs (report / CLI serialization)."""
        return [[[float(c.real), float(c.imag)] for c in row] for row in self.entries]

    @classmethod
    def from_records(cls, rows: Sequence[Sequence[Any]]) -> "CMat":
        data = [[complex(float(c[0]), float(c[1])) for c in row] for row in rows]
        return cls(np.array(data, dtype=complex))


def _same_n(a: CMat, b: CMat) -> None:
    if a.n != b.n:
        raise DimensionMismatch("matrix dimensions differ", left=a.n, right=b.n)


def singular_values(A: CMat) -> np.ndarray:
    """Singular values in decreasing order (LAPACK gesdd)."""
    return np.linalg.svd(A.entries, compute_uv=False)


def op_norm(A: CMat) -> float:
    """Operator norm ||A|| = largest singular value = max of ||A theta|| over unit theta."""
    return float(singular_values(A)[0])


def min_gain(A: CMat) -> float:
    """Smallest singular value = min of ||A theta|| over unit theta (0 iff A singular)."""
    return float(singular_values(A)[-1])


def determinant(A: CMat) -> complex:
    return complex(np.linalg.det(A.entries))


def inverse(A: CMat) -> CMat:
    gain = min_gain(A)
    if gain <= SINGULAR_THRESHOLD:
        raise Singular("matrix is singular to working precision", min_gain=gain, n=A.n)
    return CMat(np.linalg.inv(A.entries))


def determinant_gain_bound(A: CMat) -> float:
    """|det A| / ||A||^(n-1): lower bound for ||A theta|| on the unit sphere."""
    norm = op_norm(A)
    if norm == 0.0:
        return 0.0
    return abs(determinant(A)) / norm ** (A.n - 1)


def neumann_bound(A: CMat) -> float:
    """1 / (1 - ||A||): upper bound for ||(I +- A)^-1|| when ||A|| < 1."""
    norm = op_norm(A)
    if norm >= 1.0:
        return float("inf")
    return 1.0 / (1.0 - norm)


def random_cmat(rng: np.random.Generator, n: int, target_norm: Optional[float] = None) -> CMat:
    """
    Entries with independent real/imaginary parts uniform on [-1, 1];
    optionally rescaled so that op_norm equals `target_norm`.
    """
    raw = rng.uniform(-1.0, 1.0, (n, n)) + 1j * rng.uniform(-1.0, 1.0, (n, n))
    if target_norm is not None:
        norm = float(np.linalg.svd(raw, compute_uv=False)[0])
        if norm > 0.0:
            raw = raw * (float(target_norm) / norm)
    return CMat(raw)


# --- batched kernels on raw (N, n, n) stacks, used by the sampling code paths ---


def stack_singular_values(stack: np.ndarray) -> np.ndarray:
    """(N, n, n) -> (N, n) singular values, decreasing along the last axis."""
    return np.linalg.svd(np.asarray(stack, dtype=complex), compute_uv=False)


def stack_op_norms(stack: np.ndarray) -> np.ndarray:
    return stack_singular_values(stack)[:, 0]


def stack_min_gains(stack: np.ndarray) -> np.ndarray:
    return stack_singular_values(stack)[:, -1]
