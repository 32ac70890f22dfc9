from __future__ import annotations

import numpy as np
import pytest

from ph_bloch.calculus.cmatrix import CMat, random_cmat
from ph_bloch.calculus.holomap import (
    DEGREE_CAP,
    Monomial,
    PolyMap,
    d_poly,
    d_poly_batch,
    eval_poly,
    linear_combine,
)
from ph_bloch.errors import DegreeCapExceeded, DimensionMismatch, NonFiniteInput, UsageError
from tests.conftest import random_map


def test_from_terms_merges_and_drops_zeros() -> None:
    P = PolyMap.from_terms(
        2,
        [
            Monomial(1, (0, 1), 2.0),
            Monomial(0, (2, 0), 1.0),
            Monomial(0, (2, 0), 1.0),
            Monomial(1, (1, 1), 3.0),
            Monomial(1, (1, 1), -3.0),
        ],
    )
    assert [(t.component, t.exponents, t.coefficient) for t in P.terms] == [
        (0, (2, 0), 2.0),
        (1, (0, 1), 2.0),
    ]


def test_exponent_length_mismatch() -> None:
    with pytest.raises(DimensionMismatch) as exc:
        PolyMap.from_terms(2, [Monomial(0, (1,), 1.0)])
    assert exc.value.context["term"] == 0


def test_degree_cap() -> None:
    PolyMap.from_terms(1, [Monomial(0, (DEGREE_CAP,), 1.0)])
    with pytest.raises(DegreeCapExceeded):
        PolyMap.from_terms(1, [Monomial(0, (DEGREE_CAP + 1,), 1.0)])


def test_eval_known_value() -> None:
    P = PolyMap.from_terms(2, [Monomial(0, (2, 0), 1.0), Monomial(0, (1, 1), 2.0), Monomial(1, (0, 1), 1j)])
    out = eval_poly(P, [1 + 1j, 2.0])
    assert out[0] == pytest.approx(4 + 6j)
    assert out[1] == pytest.approx(2j)


def test_batch_matches_single_points() -> None:
    rng = np.random.default_rng(11)
    P = random_map(rng, 3, scale=0.5).g
    z = 0.5 * (rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3)))
    batch = eval_poly(P, z)
    for i in range(20):
        np.testing.assert_allclose(batch[i], eval_poly(P, z[i]), rtol=0, atol=1e-14)


def test_zero_map_evaluates_to_zero() -> None:
    np.testing.assert_array_equal(eval_poly(PolyMap.zero(2), [1.0, 2.0]), np.zeros(2))


def test_linear_helper() -> None:
    M = random_cmat(np.random.default_rng(2), 3)
    z = np.array([0.1 + 0.2j, -0.3j, 0.5])
    np.testing.assert_allclose(eval_poly(PolyMap.linear(M), z), M.apply(z), atol=1e-14)
    assert d_poly(PolyMap.linear(M), z).allclose(M)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_jacobian_matches_central_differences(n: int) -> None:
    rng = np.random.default_rng(30 + n)
    P = random_map(rng, n, scale=0.7).h
    z = 0.4 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    D = d_poly(P, z).entries
    eps = 1e-6
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = eps
        fd = (eval_poly(P, z + e) - eval_poly(P, z - e)) / (2 * eps)
        np.testing.assert_allclose(D[:, k], fd, rtol=1e-6, atol=1e-8)


def test_d_poly_rejects_batch() -> None:
    with pytest.raises(DimensionMismatch):
        d_poly(PolyMap.identity(1), np.zeros((2, 1)))


@pytest.mark.parametrize("sign", [1, -1])
def test_linear_combine_values_and_jacobian(sign: int) -> None:
    rng = np.random.default_rng(50)
    f = random_map(rng, 2, scale=0.5)
    A = random_cmat(rng, 2)
    R = linear_combine(f.h, f.g, A, sign)
    z = np.array([0.2 - 0.1j, -0.3 + 0.25j])
    np.testing.assert_allclose(eval_poly(R, z), eval_poly(f.h, z) + sign * (eval_poly(f.g, z) @ A.entries), atol=1e-13)
    expected = d_poly(f.h, z).entries + sign * A.entries.T @ d_poly(f.g, z).entries
    np.testing.assert_allclose(d_poly_batch(R, z)[0], expected, atol=1e-13)


def test_linear_combine_rejects_bad_sign() -> None:
    with pytest.raises(UsageError):
        linear_combine(PolyMap.identity(1), PolyMap.zero(1), CMat.identity(1), 2)


def _random_cubic(rng: np.random.Generator, n: int) -> PolyMap:
    terms = []
    for j in range(n):
        for _ in range(6):
            e = [0] * n
            for _ in range(int(rng.integers(1, 4))):
                e[int(rng.integers(n))] += 1
            terms.append(Monomial(j, tuple(e), complex(*rng.uniform(-1, 1, 2))))
    return PolyMap.from_terms(n, terms)


def test_canonicalization_is_idempotent() -> None:
    rng = np.random.default_rng(60)
    P = _random_cubic(rng, 3)
    raw = list(reversed(P.terms)) + [Monomial(0, (1, 0, 0), 0.0)]
    again = PolyMap.from_terms(3, raw)
    assert again.terms == P.terms
    assert PolyMap.from_terms(3, again.terms).terms == P.terms


@pytest.mark.parametrize("n", [1, 2, 3])
def test_first_order_taylor_remainder_is_quadratic(n: int) -> None:
    rng = np.random.default_rng(65 + n)
    P = _random_cubic(rng, n)
    z = 0.3 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(n)
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    u /= np.linalg.norm(u)
    D = d_poly(P, z).entries
    fitted = []
    for s in (1e-3, 1e-4):
        delta = s * u
        remainder = np.linalg.norm(eval_poly(P, z + delta) - eval_poly(P, z) - D @ delta)
        fitted.append(remainder / s**2)
    assert fitted[1] == pytest.approx(fitted[0], rel=0.05)


def test_non_finite_coefficient_is_rejected() -> None:
    with pytest.raises(NonFiniteInput) as exc:
        PolyMap.from_terms(1, [Monomial(0, (1,), complex(np.inf, 0.0))])
    assert exc.value.context["term"] == 0
