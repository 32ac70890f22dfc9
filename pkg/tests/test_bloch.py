from __future__ import annotations

import math

import numpy as np
import pytest

from ph_bloch.analysis.bloch import (
    NU_MAX,
    PSI0,
    R0,
    T_STAR,
    BlochInputs,
    alpha_cap,
    bounded_map_bound_check,
    growth_bound_check,
    landau_bloch_radii,
    nu,
    nu_argmax,
    psi,
    psi_argmin,
    rho,
    schwarz_omega_check,
    t_grid,
)
from ph_bloch.core.sampling import ball_grid
from ph_bloch.errors import DomainError, HypothesisViolated, PreconditionViolated
from tests.conftest import planar


def test_constants() -> None:
    assert PSI0 == pytest.approx(11.090169943749475, rel=1e-15)
    assert R0 == pytest.approx(0.6180339887498949, rel=1e-15)
    assert T_STAR == pytest.approx(0.5857864376269049, rel=1e-15)
    assert NU_MAX == pytest.approx(0.1715728752538097, rel=1e-14)


def test_psi_and_nu_values() -> None:
    assert psi(0.5) == pytest.approx(12.0)
    assert psi(R0) == pytest.approx(PSI0, rel=1e-12)
    assert nu(T_STAR) == pytest.approx(NU_MAX, rel=1e-12)
    assert nu(0.0) == 0.0


@pytest.mark.parametrize("r", [0.0, 1.0, -0.5, 1.5])
def test_psi_domain(r: float) -> None:
    with pytest.raises(DomainError):
        psi(r)


def test_numeric_extremizers_match_closed_forms() -> None:
    assert psi_argmin() == pytest.approx(R0, abs=1e-6)
    assert nu_argmax() == pytest.approx(T_STAR, abs=1e-6)


def test_reference_radii() -> None:
    radii = landau_bloch_radii(BlochInputs(n=1, alpha=1.0, volume=1.0))
    assert radii.Ru == pytest.approx(7.5096e-3, rel=1e-3)
    assert radii.Rc == pytest.approx(1.1275e-3, rel=1e-3)
    assert radii.rc_within_ru
    assert radii.notes == []


def test_ru_at_the_cap() -> None:
    for n in (1, 2, 3):
        cap = alpha_cap(1.7, n)
        radii = landau_bloch_radii(BlochInputs(n=n, alpha=cap, volume=1.7))
        assert radii.Ru == pytest.approx((math.sqrt(5) - 1) * NU_MAX, rel=1e-12)
        assert radii.Ru == pytest.approx(0.21208, rel=1e-4)


def test_rc_above_ru_is_flagged_not_rejected() -> None:
    radii = landau_bloch_radii(BlochInputs(n=1, alpha=alpha_cap(1.0, 1), volume=1.0))
    assert radii.Rc > radii.Ru
    assert not radii.rc_within_ru
    assert radii.notes


def test_alpha_above_cap() -> None:
    cap = alpha_cap(1.0, 1)
    with pytest.raises(HypothesisViolated) as exc:
        BlochInputs(n=1, alpha=cap * 1.01, volume=1.0)
    assert exc.value.stage == "cap"
    assert exc.value.context["max_alpha"] == pytest.approx(cap)


@pytest.mark.parametrize("alpha,volume", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, float("inf"))])
def test_bad_inputs(alpha: float, volume: float) -> None:
    with pytest.raises(PreconditionViolated):
        BlochInputs(n=1, alpha=alpha, volume=volume)


def test_scaling_laws() -> None:
    base = landau_bloch_radii(BlochInputs(n=2, alpha=1.0, volume=2.0))
    double_alpha = landau_bloch_radii(BlochInputs(n=2, alpha=2.0, volume=2.0))
    double_volume = landau_bloch_radii(BlochInputs(n=2, alpha=1.0, volume=4.0))
    assert double_alpha.Ru == pytest.approx(2 * base.Ru, rel=1e-12)
    assert double_alpha.Rc == pytest.approx(4 * base.Rc, rel=1e-12)
    assert double_volume.Ru == pytest.approx(base.Ru / 2, rel=1e-12)


def test_ru_is_the_optimum_of_the_table() -> None:
    radii = landau_bloch_radii(BlochInputs(n=1, alpha=1.0, volume=1.0))
    ts = np.array(radii.t_grid)
    assert T_STAR in radii.t_grid
    best = max(R0 * t * rho(t, 1.0, 1.0, 1) for t in ts)
    assert best == pytest.approx(radii.Ru, rel=1e-12)
    assert len(radii.rows()) == len(t_grid())
    assert "rho_table" in radii.to_dict(include_table=True)


def test_growth_bound_on_identity(identity1) -> None:
    grid = ball_grid(1, 0.49, 500, seed=1)
    verdict = growth_bound_check(identity1, 1.0, 0.5, grid)
    assert verdict.passed
    assert verdict.checked == 500


def test_growth_bound_on_quarter_square() -> None:
    f = planar({1: 1.0}, {2: 0.25})
    grid = ball_grid(1, 0.69, 1000, seed=2)
    assert growth_bound_check(f, 0.875, 0.7, grid).passed


def test_growth_bound_rejects_points_outside_radius(identity1) -> None:
    with pytest.raises(PreconditionViolated):
        growth_bound_check(identity1, 1.0, 0.5, [[0.6]])


def test_growth_bound_requires_normalization() -> None:
    f = planar({0: 0.1, 1: 1.0}, {})
    with pytest.raises(HypothesisViolated) as exc:
        growth_bound_check(f, 1.0, 0.5, [[0.1]])
    assert exc.value.stage == "growth_bound"


def test_schwarz_omega(identity1, half_square) -> None:
    grid = ball_grid(1, 0.95, 500, seed=3)
    assert schwarz_omega_check(identity1, grid).passed
    assert schwarz_omega_check(half_square, grid).passed
    with pytest.raises(HypothesisViolated):
        schwarz_omega_check(planar({1: 1.0}, {1: 0.5}), grid)


@pytest.mark.parametrize(
    "h,g",
    [({1: 0.5}, {}), ({1: 1.0}, {}), ({1: 0.5}, {2: 0.125})],
)
def test_bounded_maps_satisfy_both_bounds(h, g) -> None:
    grid = ball_grid(1, 0.99, 500, seed=4)
    verdict = bounded_map_bound_check(planar(h, g), grid)
    assert verdict.passed
    assert verdict.details == "derivative and value bounds"


def test_bounded_map_image_must_stay_in_ball() -> None:
    grid = ball_grid(1, 0.9, 100, seed=4)
    with pytest.raises(HypothesisViolated) as exc:
        bounded_map_bound_check(planar({1: 2.0}, {}), grid)
    assert exc.value.stage == "bounded_map"


def test_bounded_map_without_normalization_checks_derivative_only() -> None:
    grid = ball_grid(1, 0.9, 100, seed=4)
    verdict = bounded_map_bound_check(planar({0: 0.2, 1: 0.5}, {}), grid)
    assert verdict.passed
    assert verdict.details == "derivative bound only"
