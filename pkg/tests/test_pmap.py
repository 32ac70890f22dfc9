from __future__ import annotations

import numpy as np
import pytest

from ph_bloch.calculus.cmatrix import op_norm
from ph_bloch.calculus.holomap import PolyMap
from ph_bloch.calculus.pmap import (
    PHMap,
    det_jacobian,
    det_jacobian_batch,
    derivs,
    is_sense_preserving,
    lambda_extremes,
    omega,
    omega_norms_batch,
    planar_dilatation,
    real_jacobian,
    sphere_scan_extremes,
)
from ph_bloch.core.sampling import complexify, realify
from ph_bloch.errors import DhSingular, DimensionMismatch, Singular, UsageError
from tests.conftest import planar, random_map


def test_eval_adds_conjugate_of_g(half_square: PHMap) -> None:
    z = 0.3 + 0.4j
    assert half_square([z])[0] == pytest.approx(z + np.conj(z * z / 2))


def test_planar_dilatation_of_half_square(half_square: PHMap) -> None:
    assert planar_dilatation(half_square, [0.3 + 0.1j]) == pytest.approx(0.3 + 0.1j)


def test_planar_dilatation_needs_n_one() -> None:
    with pytest.raises(DimensionMismatch):
        planar_dilatation(PHMap.holomorphic(PolyMap.identity(2)), [0.0, 0.0])


def test_real_jacobian_of_identity(identity1: PHMap) -> None:
    np.testing.assert_array_equal(real_jacobian(identity1, [0.2j]), np.eye(2))
    ident3 = PHMap.holomorphic(PolyMap.identity(3))
    np.testing.assert_array_equal(real_jacobian(ident3, np.zeros(3)), np.eye(6))


def test_affine_shear_quantities() -> None:
    f = planar({1: 1.0}, {1: 0.5})
    assert det_jacobian(f, [0.1]) == pytest.approx(0.75)
    big, small = lambda_extremes(f, [0.1])
    assert big == pytest.approx(1.5)
    assert small == pytest.approx(0.5)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_block_determinant_matches_real_jacobian(n: int) -> None:
    rng = np.random.default_rng(70 + n)
    checked = 0
    while checked < 500:
        f = random_map(rng, n, scale=0.2)
        z = 0.5 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(n)
        if op_norm(omega(f, z)) >= 0.9:
            continue
        expected = float(np.linalg.det(real_jacobian(f, z)))
        assert det_jacobian(f, z) == pytest.approx(expected, rel=1e-9, abs=1e-12)
        checked += 1


def test_batch_determinant_matches_single(half_square: PHMap) -> None:
    z = np.array([[0.1], [0.5j], [-0.7 + 0.2j]])
    batch = det_jacobian_batch(half_square, z)
    for i in range(3):
        assert batch[i] == pytest.approx(det_jacobian(half_square, z[i]), rel=1e-12)


def test_omega_singular_dh_raises() -> None:
    f = planar({2: 1.0}, {})
    with pytest.raises(DhSingular) as exc:
        omega(f, [0.0])
    assert isinstance(exc.value, Singular)


def test_sphere_scan_planar_is_tight() -> None:
    f = planar({1: 1.0, 2: 0.3}, {2: 0.25})
    z = [0.2 + 0.3j]
    big, small = lambda_extremes(f, z)
    scan_big, scan_small = sphere_scan_extremes(f, z, samples=20_000, seed=1)
    assert scan_big <= big * (1 + 1e-12)
    assert scan_small >= small * (1 - 1e-12)
    assert scan_big >= big * (1 - 1e-3)
    assert scan_small <= small * (1 + 1e-3)


@pytest.mark.parametrize("n", [2, 3])
def test_sphere_scan_brackets_svd_within_tolerance(n: int) -> None:
    rng = np.random.default_rng(90 + n)
    for trial in range(10):
        f = random_map(rng, n, scale=0.3)
        z = 0.5 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2 * n)
        big, small = lambda_extremes(f, z)
        scan_big, scan_small = sphere_scan_extremes(f, z, samples=100_000, seed=trial)
        assert small * (1 - 1e-12) <= scan_small <= scan_big <= big * (1 + 1e-12)
        assert scan_big >= big * (1 - 1e-3)
        assert scan_small <= small * (1 + 1e-3)


def test_sphere_scan_is_monotone_in_samples(half_square: PHMap) -> None:
    z = [0.4 - 0.2j]
    few = sphere_scan_extremes(half_square, z, samples=100, seed=5)
    many = sphere_scan_extremes(half_square, z, samples=1000, seed=5)
    assert many[0] >= few[0]
    assert many[1] <= few[1]


def test_sense_preserving(half_square: PHMap) -> None:
    assert is_sense_preserving(half_square, [0.5])
    assert not is_sense_preserving(planar({1: 1.0}, {1: 2.0}), [0.1])
    assert not is_sense_preserving(planar({2: 1.0}, {}), [0.0])


def test_derivs_pack(half_square: PHMap) -> None:
    pack = derivs(half_square, [0.5])
    assert pack.omega.entries[0, 0] == pytest.approx(0.5)
    assert pack.det_j == pytest.approx(0.75)
    assert pack.lambda_big == pytest.approx(1.5)
    data = pack.to_dict()
    assert data["omega_norm"] == pytest.approx(0.5)


def test_omega_norms_batch_flags_singular_points() -> None:
    f = planar({2: 1.0}, {2: 0.5})
    _, w, singular = omega_norms_batch(f, np.array([[0.0], [0.5]]))
    assert singular.tolist() == [True, False]
    assert w[0] == np.inf
    assert w[1] == pytest.approx(0.5)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_real_jacobian_matches_finite_differences(n: int) -> None:
    rng = np.random.default_rng(80 + n)
    f = random_map(rng, n, scale=0.4)
    z = 0.4 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(n)
    J = real_jacobian(f, z)
    eps = 1e-6
    for k in range(2 * n):
        step = np.zeros(2 * n)
        step[k] = eps
        dz = complexify(step)
        fd = (realify(f(z + dz)) - realify(f(z - dz))) / (2 * eps)
        np.testing.assert_allclose(J[:, k], fd, rtol=0, atol=1e-7)


def test_sphere_scan_rejects_zero_samples(half_square: PHMap) -> None:
    with pytest.raises(UsageError):
        sphere_scan_extremes(half_square, [0.1], samples=0, seed=1)
