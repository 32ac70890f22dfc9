from __future__ import annotations

import numpy as np
import pytest

from ph_bloch.analysis.volume import (
    dyadic_radii,
    generalized_volume,
    integrate_ball,
    k_r,
    real_volume,
    sup_generalized_volume,
    volume_inequality_check,
)
from ph_bloch.calculus.holomap import PolyMap
from ph_bloch.calculus.pmap import PHMap
from ph_bloch.errors import HypothesisViolated, IntegrandNonFinite, PreconditionViolated
from tests.conftest import planar, random_map


def test_identity_volumes_are_exact(identity1: PHMap) -> None:
    est = generalized_volume(identity1, 0.5, 1000, seed=1)
    assert est.value == pytest.approx(0.25, rel=1e-12)
    assert est.stderr == pytest.approx(0.0, abs=1e-15)
    assert real_volume(identity1, 0.5, 1000, seed=1).value == pytest.approx(0.25, rel=1e-12)


def test_identity_in_higher_dimension() -> None:
    f = PHMap.holomorphic(PolyMap.identity(2))
    assert generalized_volume(f, 0.5, 500, seed=3).value == pytest.approx(0.0625, rel=1e-12)


@pytest.mark.parametrize("r", [0.3, 0.7, 0.9])
def test_half_square_profile(half_square: PHMap, r: float) -> None:
    est = generalized_volume(half_square, r, 200_000, seed=7)
    exact = r**2 - r**4 / 2.0
    assert abs(est.value - exact) <= 5.0 * est.stderr


def test_holomorphic_quadratic() -> None:
    f = planar({1: 1.0, 2: 0.25}, {})
    r = 0.9
    est = generalized_volume(f, r, 200_000, seed=8)
    assert abs(est.value - (r**2 + r**4 / 8.0)) <= 5.0 * est.stderr


def test_same_seed_same_bits(half_square: PHMap) -> None:
    a = generalized_volume(half_square, 0.6, 5000, seed=11, workers=2)
    b = generalized_volume(half_square, 0.6, 5000, seed=11, workers=2)
    assert a.to_dict() == b.to_dict()


def test_worker_count_changes_stream_but_not_estimate(half_square: PHMap) -> None:
    one = generalized_volume(half_square, 0.6, 50_000, seed=11, workers=1)
    three = generalized_volume(half_square, 0.6, 50_000, seed=11, workers=3)
    assert three.workers == 3
    assert abs(one.value - three.value) <= 5.0 * np.hypot(one.stderr, three.stderr)


def test_sup_profile_of_half_square(half_square: PHMap) -> None:
    profile = sup_generalized_volume(half_square, 50_000, seed=5, budget=10)
    assert profile.radii == dyadic_radii(10)
    assert not profile.diverged
    r = profile.radii[-1]
    last = profile.values[-1]
    assert abs(profile.sup_estimate - (r**2 - r**4 / 2.0)) <= 5.0 * last.stderr
    assert profile.sup_estimate == pytest.approx(0.5, abs=0.01)
    assert len(profile.rows()) == 10


def test_budget_too_small(half_square: PHMap) -> None:
    with pytest.raises(PreconditionViolated):
        sup_generalized_volume(half_square, 1000, seed=1, budget=2)


def test_too_few_samples(identity1: PHMap) -> None:
    with pytest.raises(PreconditionViolated):
        generalized_volume(identity1, 0.5, 50, seed=1)


def test_radius_domain(identity1: PHMap) -> None:
    with pytest.raises(PreconditionViolated):
        generalized_volume(identity1, 1.0, 1000, seed=1)


def test_non_finite_integrand_raises() -> None:
    with pytest.raises(IntegrandNonFinite) as exc:
        integrate_ball(lambda pts: np.full(len(pts), np.nan), 1, 0.5, 200, seed=1)
    assert "point" in exc.value.context


def test_dilatation_above_one_is_a_hypothesis_failure() -> None:
    f = planar({1: 1.0}, {1: 2.0})
    with pytest.raises(HypothesisViolated) as exc:
        generalized_volume(f, 0.5, 1000, seed=1)
    assert exc.value.stage == "generalized_volume"
    assert exc.value.witness is not None


def test_k_r() -> None:
    assert k_r(0.5) == pytest.approx(3.0)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("r", [0.3, 0.5, 0.7])
def test_volume_inequality_holds_on_random_maps(n: int, r: float) -> None:
    rng = np.random.default_rng(1000 + 10 * n + int(10 * r))
    for trial in range(5):
        f = random_map(rng, n, scale=0.1)
        verdict = volume_inequality_check(f, r, 20_000, seed=trial)
        assert verdict.passed
        assert not verdict.hard_violation
        assert verdict.kr_n == pytest.approx(k_r(r) ** n)


def test_planar_real_volume_matches_generalized_volume(half_square: PHMap) -> None:
    lhs = real_volume(half_square, 0.7, 5000, seed=3)
    rhs = generalized_volume(half_square, 0.7, 5000, seed=3)
    assert lhs.value == pytest.approx(rhs.value, rel=1e-10)


def test_integrate_squared_norm_over_unit_disk() -> None:
    est = integrate_ball(lambda pts: np.sum(np.abs(pts) ** 2, axis=1), 1, 1.0, 1_000_000, seed=21)
    assert abs(est.value - 0.5) <= 3.0 * est.stderr


def test_integrate_constant_is_exact() -> None:
    for n in (1, 2, 3):
        est = integrate_ball(lambda pts: np.ones(len(pts)), n, 0.5, 500, seed=2)
        assert est.value == pytest.approx(0.5 ** (2 * n), rel=1e-12)


def test_scaled_identity_volume() -> None:
    f = planar({1: 2.0}, {})
    est = generalized_volume(f, 0.5, 1000, seed=4)
    assert abs(est.value - 1.0) <= max(3.0 * est.stderr, 1e-12)


@pytest.mark.parametrize("h,g", [({1: 1.0, 2: 0.25}, {}), ({1: 1.0}, {2: 0.5}), ({1: 1.0}, {2: 0.25})])
def test_profile_is_monotone_up_to_noise(h, g) -> None:
    f = planar(h, g)
    profile = sup_generalized_volume(f, 20_000, seed=9, budget=8)
    for a, b in zip(profile.values, profile.values[1:]):
        assert a.value <= b.value + 3.0 * (a.stderr + b.stderr)


@pytest.mark.slow
@pytest.mark.parametrize("r", [0.3, 0.5, 0.7])
def test_volume_inequality_full_battery(r: float) -> None:
    rng = np.random.default_rng(2000 + int(10 * r))
    checked = 0
    while checked < 100:
        f = random_map(rng, 2, scale=0.1)
        verdict = volume_inequality_check(f, r, 20_000, seed=checked)
        assert verdict.passed
        assert not verdict.hard_violation
        checked += 1
