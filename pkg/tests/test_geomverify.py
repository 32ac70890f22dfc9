from __future__ import annotations

import numpy as np
import pytest

from ph_bloch.calculus.holomap import PolyMap
from ph_bloch.calculus.pmap import PHMap, eval_ph
from ph_bloch.core.sampling import realify, rng_for, uniform_ball
from ph_bloch.core.verdicts import ScanStatus
from ph_bloch.errors import GraphDisconnected, HypothesisViolated, PreconditionViolated
from ph_bloch.verify.geomverify import (
    connectivity_estimate,
    connectivity_from_cloud,
    connectivity_with_retry,
    covering_check,
    landau_bloch_verify,
    univalence_scan,
)
from ph_bloch.verify.stability import counterexample_family
from tests.conftest import planar


def test_identity_is_univalent(identity1: PHMap) -> None:
    verdict = univalence_scan(identity1, 0.9, 2000, seed=1)
    assert verdict.status == ScanStatus.NO_VIOLATION
    assert verdict.summary.startswith("no counterexample found at")
    assert verdict.witness is None


def test_square_map_collision_is_recheckable() -> None:
    f = planar({2: 1.0}, {})
    verdict = univalence_scan(f, 0.9, 2000, seed=2)
    assert verdict.violated
    w = verdict.witness
    assert w["type"] == "collision"
    z1 = np.array([complex(*c) for c in w["z1"]])
    z2 = np.array([complex(*c) for c in w["z2"]])
    assert np.linalg.norm(eval_ph(f, z1) - eval_ph(f, z2)) <= verdict.tol
    assert np.linalg.norm(z1 - z2) >= 100 * verdict.tol
    assert np.abs(z2).max() < 0.9


def test_affine_shear_is_univalent() -> None:
    verdict = univalence_scan(planar({1: 1.0}, {1: 0.5}), 1.0, 2000, seed=3)
    assert verdict.status == ScanStatus.NO_VIOLATION


def test_fold_is_reported_as_local_violation() -> None:
    verdict = univalence_scan(planar({1: 1.0}, {2: 1.0}), 0.9, 2000, seed=4)
    assert verdict.violated
    assert verdict.witness["type"] in ("nonpositive_jacobian", "collision")


def test_univalence_scan_is_deterministic() -> None:
    f = planar({1: 1.0, 2: 0.3}, {2: 0.2})
    a = univalence_scan(f, 0.8, 3000, seed=9)
    b = univalence_scan(f, 0.8, 3000, seed=9, workers=2)
    assert a.to_dict() == b.to_dict()


def test_univalence_accepts_holomorphic_polymap() -> None:
    verdict = univalence_scan(PolyMap.identity(2), 0.5, 1000, seed=1)
    assert verdict.status == ScanStatus.NO_VIOLATION


def test_univalence_rejects_bad_radius(identity1: PHMap) -> None:
    with pytest.raises(PreconditionViolated):
        univalence_scan(identity1, 1.5, 100, seed=1)


def test_identity_covers(identity1: PHMap) -> None:
    verdict = covering_check(identity1, 1.0, 0.9, 200, seed=1)
    assert verdict.status == ScanStatus.NO_VIOLATION
    assert verdict.details["reached"] == 200


def test_explicit_target_outside_image_is_reported() -> None:
    f = counterexample_family(10, 2)
    verdict = covering_check(f, 1.0, 0.3, 1, seed=1, target_points=[[0.0, 0.2]])
    assert verdict.violated
    assert verdict.witness["type"] == "unreached_target"
    assert verdict.witness["target"] == [[0.0, 0.0], [0.2, 0.0]]


@pytest.mark.parametrize("k", [2, 5, 10])
def test_counterexample_family_covering(k: int) -> None:
    f = counterexample_family(k, 2)
    assert covering_check(f, 1.0, 1.0 / (2 * k), 200, seed=k).status == ScanStatus.NO_VIOLATION
    assert covering_check(f, 1.0, 1.0 / k + 0.05, 500, seed=k).violated


def test_identity_disk_is_nearly_convex(identity1: PHMap) -> None:
    est = connectivity_estimate(identity1, 1.0, 2000, 8, seed=42)
    assert 1.0 <= est.m_hat <= 1.15
    assert est.pairs_checked > 0
    assert est.path_witness is not None


def _horseshoe(count: int, seed: int) -> np.ndarray:
    rng = rng_for(seed)
    r = np.sqrt(1.0 + 3.0 * rng.random(count))
    t = rng.uniform(0.0, 1.5 * np.pi, count)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def test_horseshoe_has_large_constant() -> None:
    est = connectivity_from_cloud(_horseshoe(3000, 1), 8, 10_000, seed=1)
    assert est.m_hat >= 2.0


def test_connectivity_is_scale_invariant() -> None:
    cloud = _horseshoe(1500, 2)
    a = connectivity_from_cloud(cloud, 8, 3000, seed=3)
    b = connectivity_from_cloud(4.0 * cloud, 8, 3000, seed=3)
    assert b.m_hat == pytest.approx(a.m_hat, rel=1e-9)
    assert b.epsilon == pytest.approx(4.0 * a.epsilon, rel=1e-12)


def _two_clusters() -> np.ndarray:
    rng = rng_for(5)
    left = rng.random((200, 2))
    return np.vstack([left, left + 100.0])


def test_disconnected_cloud_raises() -> None:
    with pytest.raises(GraphDisconnected) as exc:
        connectivity_from_cloud(_two_clusters(), 8, 1000, seed=1)
    assert exc.value.context["components"] >= 2
    assert exc.value.stage == "connectivity"


def test_connectivity_with_retry_succeeds_first_time(identity1: PHMap) -> None:
    est = connectivity_with_retry(identity1, 1.0, 500, 8, seed=1, pairs=1000)
    assert est.k_neighbors == 8


def test_connectivity_needs_enough_points(identity1: PHMap) -> None:
    with pytest.raises(PreconditionViolated):
        connectivity_estimate(identity1, 1.0, 50, 8, seed=1)


def test_end_to_end_on_half_square(half_square: PHMap) -> None:
    report = landau_bloch_verify(half_square, 20_000, seed=42, budget=8, pairs=5000, targets=100)
    assert report.passed
    assert report.alpha == pytest.approx(1.0)
    assert report.profile.sup_estimate == pytest.approx(0.5, abs=0.02)
    assert report.radii.Ru > 0.0
    assert report.to_dict()["passed"] is True


@pytest.mark.slow
def test_end_to_end_on_half_square_at_full_size(half_square: PHMap) -> None:
    report = landau_bloch_verify(half_square, 200_000, seed=42, budget=10, pairs=1_000_000, targets=1000)
    assert report.passed
    assert report.univalence.samples >= 1_000_000
    assert report.covering.samples == 1000
    assert report.profile.sup_estimate == pytest.approx(0.5, abs=0.01)


def test_end_to_end_rejects_unnormalized_maps() -> None:
    with pytest.raises(HypothesisViolated) as exc:
        landau_bloch_verify(planar({0: 0.1, 1: 1.0}, {}), 1000, seed=1, budget=4)
    assert exc.value.stage == "hypotheses"
    with pytest.raises(HypothesisViolated) as exc:
        landau_bloch_verify(planar({1: 1.0}, {1: 0.5}), 1000, seed=1, budget=4)
    assert exc.value.stage == "hypotheses"


def test_end_to_end_stops_on_failed_dilatation_check() -> None:
    f = planar({1: 1.0}, {2: 0.50025})
    with pytest.raises(HypothesisViolated) as exc:
        landau_bloch_verify(f, 2000, seed=3, budget=6, pairs=500, targets=20)
    assert exc.value.stage == "hypotheses"
    assert "dilatation_below_one" in exc.value.context["failed"]


def test_end_to_end_in_two_dimensions() -> None:
    f = PHMap.holomorphic(PolyMap.identity(2))
    report = landau_bloch_verify(f, 2000, seed=7, budget=8, pairs=2000, targets=50)
    assert report.passed
    assert report.profile.sup_estimate == pytest.approx((1 - 2**-8) ** 4, rel=1e-12)


def test_uniform_ball_cloud_of_identity_matches_eval(identity1: PHMap) -> None:
    z = uniform_ball(rng_for(1), 1, 0.5, 10)
    np.testing.assert_allclose(realify(eval_ph(identity1, z)), realify(z))
