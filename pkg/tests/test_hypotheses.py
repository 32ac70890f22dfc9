from __future__ import annotations

import pytest

from ph_bloch.core.verdicts import CheckStatus
from ph_bloch.hypotheses import alpha_of, any_failed, run_hypothesis_checks, sampled_sup_omega
from tests.conftest import planar


def _by_name(results):
    return {r.name: r for r in results}


def test_identity_passes_everything(identity1) -> None:
    results = run_hypothesis_checks(identity1, 500, seed=1)
    assert [r.name for r in results] == [
        "origin_fixed",
        "dg_origin",
        "dh_nonsingular",
        "dilatation_below_one",
        "alpha_positive",
    ]
    assert all(r.status == CheckStatus.OK for r in results)
    assert not any_failed(results)


def test_translated_map_fails_origin_check() -> None:
    results = _by_name(run_hypothesis_checks(planar({0: 0.5, 1: 1.0}, {}), 500, seed=1))
    assert results["origin_fixed"].status == CheckStatus.FAIL
    assert results["dg_origin"].status == CheckStatus.OK


def test_linear_g_fails_dg_origin() -> None:
    results = _by_name(run_hypothesis_checks(planar({1: 1.0}, {1: 0.5}), 500, seed=1))
    assert results["dg_origin"].status == CheckStatus.FAIL
    assert results["dilatation_below_one"].status == CheckStatus.OK


def test_dilatation_near_one_warns(half_square) -> None:
    results = _by_name(run_hypothesis_checks(half_square, 5000, seed=1))
    assert results["dilatation_below_one"].status == CheckStatus.WARN


def test_singular_dh_fails() -> None:
    results = _by_name(run_hypothesis_checks(planar({2: 1.0}, {}), 500, seed=1))
    assert results["dh_nonsingular"].status == CheckStatus.FAIL
    assert results["alpha_positive"].status == CheckStatus.FAIL


def test_alpha_of_shear() -> None:
    assert alpha_of(planar({1: 2.0}, {})) == pytest.approx(4.0)


def test_sampled_sup_omega(half_square) -> None:
    sup, at = sampled_sup_omega(half_square, 2000, seed=2, radius=0.5)
    assert sup < 0.5
    assert abs(at[0]) == pytest.approx(sup)


def test_dilatation_reaching_one_near_the_boundary_fails() -> None:
    f = planar({1: 1.0}, {2: 0.50025})
    sup, at = sampled_sup_omega(f, 4000, seed=1)
    assert sup >= 1.0
    assert abs(at[0]) < 1.0
    results = _by_name(run_hypothesis_checks(f, 4000, seed=1))
    assert results["dilatation_below_one"].status == CheckStatus.FAIL
    assert any_failed(list(results.values()))
