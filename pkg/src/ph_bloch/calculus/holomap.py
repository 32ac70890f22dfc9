from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ph_bloch.calculus.cmatrix import CMat
from ph_bloch.errors import DegreeCapExceeded, DimensionMismatch, NonFiniteInput, UsageError

# Per-variable exponent cap, enforced when a PolyMap is built.
DEGREE_CAP = 16


@dataclass(frozen=True)
class Monomial:
    component: int
    exponents: Tuple[int, ...]
    coefficient: complex

    @property
    def key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.component, self.exponents)


@dataclass(frozen=True, eq=False)
class PolyMap:
    """
    Sparse polynomial holomorphic mapping C^n -> C^n in canonical form.

    Component j is the sum of coefficient * z^alpha over the terms with component j.
    Always build through `PolyMap.from_terms` (or the helpers below) so terms are
    merged, zero-free and sorted by (component, exponents).
    """

    n: int
    terms: Tuple[Monomial, ...]
    # Dense views of the term table for vectorized evaluation.
    _components: np.ndarray = field(repr=False, compare=False, default=None)  # type: ignore[assignment]
    _exponents: np.ndarray = field(repr=False, compare=False, default=None)  # type: ignore[assignment]
    _coefficients: np.ndarray = field(repr=False, compare=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        n = int(self.n)
        comps = np.array([t.component for t in self.terms], dtype=np.int64)
        exps = np.array([t.exponents for t in self.terms], dtype=np.int64).reshape(len(self.terms), n)
        coefs = np.array([t.coefficient for t in self.terms], dtype=complex)
        for arr in (comps, exps, coefs):
            arr.setflags(write=False)
        object.__setattr__(self, "_components", comps)
        object.__setattr__(self, "_exponents", exps)
        object.__setattr__(self, "_coefficients", coefs)

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Monomial]) -> "PolyMap":
        n = int(n)
        if n < 1:
            raise DimensionMismatch("dimension must be >= 1", n=n)
        merged: Dict[Tuple[int, Tuple[int, ...]], complex] = {}
        for idx, t in enumerate(terms):
            exps = tuple(int(e) for e in t.exponents)
            if len(exps) != n:
                raise DimensionMismatch(
                    "exponents length must equal n", n=n, term=idx, got=len(exps)
                )
            if not 0 <= int(t.component) < n:
                raise DimensionMismatch("component index out of range", n=n, term=idx, component=int(t.component))
            if any(e < 0 for e in exps):
                raise DimensionMismatch("exponents must be nonnegative", term=idx, exponents=list(exps))
            if any(e > DEGREE_CAP for e in exps):
                raise DegreeCapExceeded(
                    "per-variable degree exceeds cap", cap=DEGREE_CAP, term=idx, exponents=list(exps)
                )
            coef = complex(t.coefficient)
            if not (np.isfinite(coef.real) and np.isfinite(coef.imag)):
                raise NonFiniteInput("monomial coefficient must be finite", term=idx)
            key = (int(t.component), exps)
            merged[key] = merged.get(key, 0j) + coef

        canonical = tuple(
            Monomial(component=k[0], exponents=k[1], coefficient=v)
            for k, v in sorted(merged.items())
            if v != 0
        )
        return cls(n=n, terms=canonical)

    @classmethod
    def zero(cls, n: int) -> "PolyMap":
        return cls.from_terms(n, [])

    @classmethod
    def identity(cls, n: int) -> "PolyMap":
        return cls.linear(CMat.identity(n))

    @classmethod
    def linear(cls, M: CMat) -> "PolyMap":
        """z -> M z (component j = sum_k M[j,k] z_k)."""
        n = M.n
        terms: List[Monomial] = []
        for j in range(n):
            for k in range(n):
                e = [0] * n
                e[k] = 1
                terms.append(Monomial(j, tuple(e), complex(M.entries[j, k])))
        return cls.from_terms(n, terms)

    @property
    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return int(self._exponents.sum(axis=1).max())

    def same_terms(self, other: "PolyMap") -> bool:
        return self.n == other.n and self.terms == other.terms

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        return eval_poly(self, z)


def _as_batch(P: PolyMap, z: Sequence[complex]) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=complex)
    single = arr.ndim == 1
    batch = arr.reshape(1, -1) if single else arr
    if batch.ndim != 2 or batch.shape[1] != P.n:
        raise DimensionMismatch("point dimension does not match map", n=P.n, got=list(arr.shape))
    return batch, single


def _monomials(batch: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """(N, n) points, (T, n) exponents -> (N, T) values of z^alpha (exact integer powers)."""
    N, n = batch.shape
    T = exps.shape[0]
    if T == 0:
        return np.zeros((N, 0), dtype=complex)
    dmax = int(exps.max()) if exps.size else 0
    powers = np.ones((N, n, dmax + 1), dtype=complex)
    for k in range(1, dmax + 1):
        powers[:, :, k] = powers[:, :, k - 1] * batch
    gathered = powers[:, np.arange(n)[None, :], exps]  # (N, T, n)
    return np.prod(gathered, axis=2)


def _accumulate(P: PolyMap, values: np.ndarray) -> np.ndarray:
    """(N, T) term values -> (N, n) component sums, in canonical term order."""
    out = np.zeros((values.shape[0], P.n), dtype=complex)
    for j in range(P.n):
        mask = P._components == j
        if np.any(mask):
            out[:, j] = values[:, mask].sum(axis=1)
    return out


def eval_poly(P: PolyMap, z: Sequence[complex]) -> np.ndarray:
    """P(z) for one point (n,) or a batch (N, n)."""
    batch, single = _as_batch(P, z)
    values = _monomials(batch, P._exponents) * P._coefficients[None, :]
    out = _accumulate(P, values)
    return out[0] if single else out


def d_poly_batch(P: PolyMap, z: Sequence[complex]) -> np.ndarray:
    """Jacobians DP at each point: (N, n, n) with entry (j, k) = dP_j/dz_k (power rule)."""
    batch, _ = _as_batch(P, z)
    N, n = batch.shape
    out = np.zeros((N, n, n), dtype=complex)
    if not P.terms:
        return out
    for k in range(n):
        alpha_k = P._exponents[:, k]
        live = alpha_k > 0
        if not np.any(live):
            continue
        exps = P._exponents[live].copy()
        exps[:, k] -= 1
        factors = P._coefficients[live] * alpha_k[live]
        values = _monomials(batch, exps) * factors[None, :]
        comps = P._components[live]
        for j in range(n):
            mask = comps == j
            if np.any(mask):
                out[:, j, k] = values[:, mask].sum(axis=1)
    return out


def d_poly(P: PolyMap, z: Sequence[complex]) -> CMat:
    """Complex Jacobian DP(z) at a single point; row j is the gradient of component j."""
    arr = np.asarray(z, dtype=complex)
    if arr.ndim != 1:
        raise DimensionMismatch("d_poly takes a single point; use d_poly_batch", got=list(arr.shape))
    return CMat(d_poly_batch(P, arr)[0])


def linear_combine(P: PolyMap, Q: PolyMap, A: CMat, sign: int) -> PolyMap:
    """
    R(z) = P(z) + sign * (Q(z) . A), with (v . A)_j = sum_k v_k A[k, j] (row covector).

    Hence DR = DP + sign * A^T DQ.
    """
    if sign not in (1, -1):
        raise UsageError("sign must be +1 or -1", sign=sign)
    if not (P.n == Q.n == A.n):
        raise DimensionMismatch("dimensions differ", p=P.n, q=Q.n, a=A.n)
    terms: List[Monomial] = list(P.terms)
    for t in Q.terms:
        row = A.entries[t.component]
        for j in range(A.n):
            c = row[j]
            if c != 0:
                terms.append(Monomial(j, t.exponents, sign * t.coefficient * complex(c)))
    return PolyMap.from_terms(P.n, terms)
