from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np

from ph_bloch.calculus.cmatrix import SINGULAR_THRESHOLD, op_norm
from ph_bloch.calculus.holomap import d_poly
from ph_bloch.calculus.pmap import PHMap, det_jacobian_batch, dh_min_gains_batch, eval_ph, omega_norms_batch
from ph_bloch.core.logging import get_logger
from ph_bloch.core.sampling import ball_grid, substream, uniform_sphere
from ph_bloch.core.verdicts import CheckResult, CheckStatus

ORIGIN_TOL = 1e-12
# Sampled sup ||omega|| above this is reported as a warning.
DILATATION_WARN = 0.99
# Shell radii 1 - 2^-k sampled near the boundary by sampled_sup_omega.
SHELL_DEPTH = 20


def origin_value_norm(f: PHMap) -> float:
    return float(np.linalg.norm(eval_ph(f, np.zeros(f.n, dtype=complex))))


def dg_origin_norm(f: PHMap) -> float:
    return op_norm(d_poly(f.g, np.zeros(f.n, dtype=complex)))


def alpha_of(f: PHMap) -> float:
    """alpha = |det J_f(0)|."""
    return float(abs(det_jacobian_batch(f, np.zeros((1, f.n), dtype=complex))[0]))


def sampled_sup_omega(f: PHMap, samples: int, seed: int, radius: float = 1.0) -> Tuple[float, np.ndarray]:
    """
    Sampled sup of ||omega|| over B^n(radius), with the point attaining it.

    The ball grid is followed by a shell of sphere directions at radii
    radius * (1 - 2^-k), k = 1..SHELL_DEPTH, where a dilatation reaching 1 first shows up.
    A singular Dh anywhere on the sample makes the sup infinite.
    """
    shell_size = max(SHELL_DEPTH, int(samples) // 4)
    factors = 1.0 - 2.0 ** -(1.0 + np.arange(shell_size) % SHELL_DEPTH)
    shell = uniform_sphere(substream(seed, 1), f.n, shell_size) * (float(radius) * factors)[:, None]
    pts = np.vstack([ball_grid(f.n, radius, samples, seed), shell])
    _, w_norm, _ = omega_norms_batch(f, pts)
    idx = int(np.argmax(w_norm))
    return float(w_norm[idx]), pts[idx]


def run_hypothesis_checks(f: PHMap, samples: int, seed: int) -> List[CheckResult]:
    """
    Preflight checks for the standing hypotheses on f = h + conj(g).
    Quick and side-effect-free; every check reports instead of raising.
    """
    log = get_logger(component="hypotheses")
    results: List[CheckResult] = [
        _check_origin_fixed(f),
        _check_dg_origin(f),
        _check_dh_nonsingular(f, samples, seed),
        _check_dilatation(f, samples, seed),
        _check_alpha(f),
    ]

    counts: Dict[CheckStatus, int] = {s: sum(1 for r in results if r.status == s) for s in CheckStatus}
    log.info(
        "hypothesis_checks_complete",
        ok=counts[CheckStatus.OK],
        warn=counts[CheckStatus.WARN],
        fail=counts[CheckStatus.FAIL],
    )
    for r in results:
        log.info("hypothesis_check", name=r.name, status=r.status.value, details=r.details)
    return results


def any_failed(results: List[CheckResult]) -> bool:
    return any(r.status == CheckStatus.FAIL for r in results)


def _check_origin_fixed(f: PHMap) -> CheckResult:
    name = "origin_fixed"
    v = origin_value_norm(f)
    if v > ORIGIN_TOL:
        return CheckResult(name=name, status=CheckStatus.FAIL, details="||f(0)|| = %.3e" % v)
    return CheckResult(name=name, status=CheckStatus.OK, details="f(0) = 0")


def _check_dg_origin(f: PHMap) -> CheckResult:
    name = "dg_origin"
    v = dg_origin_norm(f)
    if v > ORIGIN_TOL:
        return CheckResult(name=name, status=CheckStatus.FAIL, details="||Dg(0)|| = %.3e" % v)
    return CheckResult(name=name, status=CheckStatus.OK, details="Dg(0) = 0")


def _check_dh_nonsingular(f: PHMap, samples: int, seed: int) -> CheckResult:
    name = "dh_nonsingular"
    pts = ball_grid(f.n, 1.0, samples, seed)
    gains = dh_min_gains_batch(f, pts)
    idx = int(np.argmin(gains))
    worst = float(gains[idx])
    if worst <= SINGULAR_THRESHOLD:
        return CheckResult(
            name=name,
            status=CheckStatus.FAIL,
            details="Dh singular near z = %s (min gain %.3e)" % (_fmt_point(pts[idx]), worst),
        )
    return CheckResult(
        name=name,
        status=CheckStatus.OK,
        details="min gain %.3e over %d samples" % (worst, len(pts)),
    )


def _check_dilatation(f: PHMap, samples: int, seed: int) -> CheckResult:
    name = "dilatation_below_one"
    sup, at = sampled_sup_omega(f, samples, seed)
    if not sup < 1.0:
        return CheckResult(
            name=name,
            status=CheckStatus.FAIL,
            details="sup ||omega|| = %.6g at z = %s" % (sup, _fmt_point(at)),
        )
    if sup > DILATATION_WARN:
        return CheckResult(
            name=name,
            status=CheckStatus.WARN,
            details="sup ||omega|| = %.6g is close to 1" % sup,
        )
    return CheckResult(name=name, status=CheckStatus.OK, details="sup ||omega|| = %.6g" % sup)


def _check_alpha(f: PHMap) -> CheckResult:
    name = "alpha_positive"
    a = alpha_of(f)
    if not a > 0.0:
        return CheckResult(name=name, status=CheckStatus.FAIL, details="|det J_f(0)| = 0")
    return CheckResult(name=name, status=CheckStatus.OK, details="alpha = %.6g" % a)


def _fmt_point(z: np.ndarray) -> str:
    return "(" + ", ".join("%.4g%+.4gi" % (c.real, c.imag) for c in np.atleast_1d(z)) + ")"
