from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from ph_bloch.analysis.volume import k_r
from ph_bloch.calculus.pmap import PHMap, eval_ph, lambda_extremes_batch, omega_norms_batch
from ph_bloch.core.logging import get_logger
from ph_bloch.core.sampling import ball_grid
from ph_bloch.core.verdicts import InequalityVerdict, VerdictStatus
from ph_bloch.errors import DomainError, HypothesisViolated, InternalConsistencyError, PreconditionViolated
from ph_bloch.hypotheses import ORIGIN_TOL, dg_origin_norm, origin_value_norm, sampled_sup_omega

PSI0 = (11.0 + 5.0 * math.sqrt(5.0)) / 2.0
R0 = (math.sqrt(5.0) - 1.0) / 2.0
T_STAR = 2.0 - math.sqrt(2.0)
NU_MAX = 3.0 - 2.0 * math.sqrt(2.0)

# Slack for the grid inequality checks.
CHECK_SLACK = 1e-9
# Interior points of the rho(t) table (t* is always inserted).
T_GRID_POINTS = 999
# Relative tolerance for the closed-form radius identities.
IDENTITY_TOL = 1e-12


def constants() -> Tuple[float, float, float, float]:
    """(psi0, r0, t*, nu_max) from exact radicals."""
    return PSI0, R0, T_STAR, NU_MAX


def psi(r: float) -> float:
    """psi(r) = (1 + r) / (r^2 (1 - r)) on (0, 1); minimized at r0 with value psi0."""
    r = float(r)
    if not 0.0 < r < 1.0:
        raise DomainError("psi is defined on (0, 1)", r=r)
    return (1.0 + r) / (r * r * (1.0 - r))


def nu(t: float) -> float:
    """nu(t) = t (1 - t) / (2 - t); maximal at t* with value 3 - 2 sqrt(2)."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError("nu is defined on [0, 1]", t=t)
    return t * (1.0 - t) / (2.0 - t)


def m_of_t(t: float, volume: float, n: int) -> float:
    """M(t) = V^(1/2n) sqrt(psi0) / (1 - t)."""
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise DomainError("M(t) is defined on [0, 1)", t=t)
    return volume ** (1.0 / (2.0 * n)) * math.sqrt(PSI0) / (1.0 - t)


def rho(t: float, alpha: float, volume: float, n: int) -> float:
    """rho(t) = alpha pi (1 - t) / (4 M(0)^(2n) (2 - t)), with M(0)^(2n) = V psi0^n."""
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise DomainError("rho is defined on [0, 1)", t=t)
    return alpha * math.pi * (1.0 - t) / (4.0 * volume * PSI0**n * (2.0 - t))


def covering_radius_at(t: float, alpha: float, volume: float, n: int) -> float:
    """R(t) = alpha^2 pi (1 - t) / (8 M(0)^(4n-1) (2 - t))."""
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise DomainError("R(t) is defined on [0, 1)", t=t)
    m0 = m_of_t(0.0, volume, n)
    return alpha * alpha * math.pi * (1.0 - t) / (8.0 * m0 ** (4 * n - 1) * (2.0 - t))


def alpha_cap(volume: float, n: int) -> float:
    return 8.0 * volume * PSI0**n / math.pi


def _golden_refine(fn: Any, grid: np.ndarray) -> float:
    values = np.array([fn(x) for x in grid])
    i = int(np.clip(np.argmin(values), 1, len(grid) - 2))
    res = minimize_scalar(fn, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=1e-10)
    return float(res.x)


def psi_argmin(points: int = 981) -> float:
    """Numeric minimizer of psi: dense grid over [0.01, 0.99] plus golden-section refinement."""
    return _golden_refine(psi, np.linspace(0.01, 0.99, int(points)))


def nu_argmax(points: int = 999) -> float:
    return _golden_refine(lambda t: -nu(t), np.linspace(0.001, 0.999, int(points)))


@dataclass(frozen=True)
class BlochInputs:
    n: int
    alpha: float
    volume: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise PreconditionViolated("n must be >= 1", n=self.n)
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise PreconditionViolated("alpha must be a positive finite number", alpha=self.alpha)
        if not (self.volume > 0.0 and math.isfinite(self.volume)):
            raise PreconditionViolated("volume must be a positive finite number", volume=self.volume)
        cap = alpha_cap(self.volume, self.n)
        if self.alpha > cap:
            raise HypothesisViolated(
                "alpha exceeds 8 V psi0^n / pi",
                stage="cap",
                alpha=self.alpha,
                volume=self.volume,
                n=self.n,
                max_alpha=cap,
            )


@dataclass(frozen=True)
class BlochRadii:
    psi0: float
    r0: float
    t_star: float
    nu_max: float
    t_grid: List[float]
    rho_at_t: List[float]
    Ru: float
    Rc: float
    rc_within_ru: bool = True
    notes: List[str] = field(default_factory=list)

    def rows(self) -> List[Dict[str, float]]:
        return [{"t": t, "rho": r} for t, r in zip(self.t_grid, self.rho_at_t)]

    def to_dict(self, include_table: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "psi0": self.psi0,
            "r0": self.r0,
            "t_star": self.t_star,
            "nu_max": self.nu_max,
            "Ru": self.Ru,
            "Rc": self.Rc,
            "rc_within_ru": self.rc_within_ru,
            "notes": list(self.notes),
        }
        if include_table:
            data["rho_table"] = self.rows()
        return data


def t_grid() -> np.ndarray:
    grid = np.linspace(0.0, 1.0, T_GRID_POINTS + 2)[1:-1]
    return np.sort(np.append(grid, T_STAR))


def _assert_identity(name: str, closed: float, derived: float) -> None:
    if abs(closed - derived) > IDENTITY_TOL * max(abs(closed), 1e-300):
        raise InternalConsistencyError(
            "closed-form radius disagrees with its defining expression",
            radius=name,
            closed_form=closed,
            derived=derived,
        )


def landau_bloch_radii(inputs: BlochInputs) -> BlochRadii:
    """Univalence radius Ru and covering radius Rc for (n, alpha, V)."""
    n, a, V = inputs.n, inputs.alpha, inputs.volume
    s5 = math.sqrt(5.0) - 1.0
    Ru = a * math.pi * s5 * NU_MAX / (8.0 * V * PSI0**n)
    Rc = (
        a * a * math.pi * s5 * NU_MAX
        / (16.0 * V ** ((4.0 * n - 1.0) / (2.0 * n)) * PSI0 ** ((4.0 * n - 1.0) / 2.0))
    )

    _assert_identity("Ru", Ru, R0 * T_STAR * rho(T_STAR, a, V, n))
    _assert_identity("Rc", Rc, R0 * T_STAR * covering_radius_at(T_STAR, a, V, n))

    ts = t_grid()
    table = [rho(float(t), a, V, n) for t in ts]
    notes: List[str] = []
    within = Rc <= Ru
    if not within:
        notes.append("Rc exceeds Ru for these inputs; the covering radius is reported as computed")
        get_logger(component="bloch").warning("radius_order_flag", Ru=Ru, Rc=Rc, alpha=a, volume=V, n=n)

    return BlochRadii(
        psi0=PSI0,
        r0=R0,
        t_star=T_STAR,
        nu_max=NU_MAX,
        t_grid=[float(t) for t in ts],
        rho_at_t=table,
        Ru=Ru,
        Rc=Rc,
        rc_within_ru=within,
        notes=notes,
    )


# --- grid checks of the growth / Schwarz / bounded-map estimates ---


def _point(z: np.ndarray) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in z]


def _witnesses(mask: np.ndarray, grid: np.ndarray, lhs: np.ndarray, rhs: np.ndarray) -> List[Dict[str, Any]]:
    return [
        {"index": int(i), "z": _point(grid[i]), "lhs": float(lhs[i]), "rhs": float(rhs[i])}
        for i in np.flatnonzero(mask)
    ]


def _as_grid(f: PHMap, grid: Sequence[Sequence[complex]]) -> np.ndarray:
    arr = np.asarray(grid, dtype=complex)
    if arr.ndim != 2 or arr.shape[1] != f.n:
        raise PreconditionViolated("grid must be an (N, n) array of points", n=f.n, got=list(arr.shape))
    return arr


def _require_normalized(f: PHMap, stage: str) -> None:
    if origin_value_norm(f) > ORIGIN_TOL:
        raise HypothesisViolated("f(0) != 0", stage=stage, value=origin_value_norm(f))
    if dg_origin_norm(f) > ORIGIN_TOL:
        raise HypothesisViolated("Dg(0) != 0", stage=stage, value=dg_origin_norm(f))


def _require_omega_below_one(f: PHMap, stage: str, samples: int, seed: int) -> float:
    sup, at = sampled_sup_omega(f, samples, seed)
    if not sup < 1.0:
        raise HypothesisViolated(
            "sampled sup ||omega|| is not below 1", stage=stage, witness=_point(at), sup_omega=sup
        )
    return sup


def _verdict(name: str, checked: int, witnesses: List[Dict[str, Any]], details: Optional[str] = None) -> InequalityVerdict:
    status = VerdictStatus.FAIL if witnesses else VerdictStatus.PASS
    if witnesses:
        get_logger(component="bloch").warning("violation_found", check=name, count=len(witnesses))
    return InequalityVerdict(
        name=name, status=status, checked=checked, slack=CHECK_SLACK, witnesses=witnesses, details=details
    )


def growth_bound_check(
    f: PHMap,
    volume: float,
    r: float,
    grid: Sequence[Sequence[complex]],
    *,
    hypothesis_samples: int = 4000,
    seed: int = 42,
) -> InequalityVerdict:
    """Lambda_f(z)^(2n) <= K_r^n V / (r - ||z||)^(2n) at every grid point with ||z|| < r."""
    if not 0.0 < r < 1.0:
        raise PreconditionViolated("radius must lie in (0, 1)", r=r)
    pts = _as_grid(f, grid)
    norms = np.linalg.norm(pts, axis=1)
    outside = np.flatnonzero(norms >= r)
    if outside.size:
        i = int(outside[0])
        raise PreconditionViolated(
            "grid point outside B(r)", r=r, index=i, z=_point(pts[i]), norm=float(norms[i])
        )
    _require_normalized(f, "growth_bound")
    _require_omega_below_one(f, "growth_bound", hypothesis_samples, seed)

    n = f.n
    big, _ = lambda_extremes_batch(f, pts)
    lhs = big ** (2 * n)
    rhs = k_r(r) ** n * volume / (r - norms) ** (2 * n)
    bad = lhs > rhs * (1.0 + CHECK_SLACK)
    return _verdict("growth_bound", len(pts), _witnesses(bad, pts, lhs, rhs), details="r=%g V=%g" % (r, volume))


def schwarz_omega_check(
    f: PHMap,
    grid: Sequence[Sequence[complex]],
    *,
    hypothesis_samples: int = 4000,
    seed: int = 42,
) -> InequalityVerdict:
    """||omega(z)|| <= ||z|| on the grid (Dg(0) = 0 and ||omega|| < 1 required)."""
    pts = _as_grid(f, grid)
    d0 = dg_origin_norm(f)
    if d0 > ORIGIN_TOL:
        raise HypothesisViolated("Dg(0) != 0", stage="schwarz_omega", value=d0)
    _require_omega_below_one(f, "schwarz_omega", hypothesis_samples, seed)

    _, w_norm, _ = omega_norms_batch(f, pts)
    rhs = np.linalg.norm(pts, axis=1)
    bad = w_norm > rhs + CHECK_SLACK
    return _verdict("schwarz_omega", len(pts), _witnesses(bad, pts, w_norm, rhs))


def bounded_map_bound_check(
    f: PHMap,
    grid: Sequence[Sequence[complex]],
    *,
    hypothesis_samples: int = 4000,
    seed: int = 42,
) -> InequalityVerdict:
    """
    For f mapping into the unit ball: Lambda_f(z) <= (4/pi) / (1 - ||z||^2), and
    ||f(z)|| <= (4/pi) arctan ||z|| when f(0) = 0.
    """
    pts = _as_grid(f, grid)
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms >= 1.0):
        raise PreconditionViolated("grid must lie in the open unit ball", max_norm=float(norms.max()))

    cloud = np.vstack([pts, ball_grid(f.n, 1.0, hypothesis_samples, seed)])
    images = np.linalg.norm(eval_ph(f, cloud), axis=1)
    worst = int(np.argmax(images))
    if images[worst] > 1.0 + CHECK_SLACK:
        raise HypothesisViolated(
            "image leaves the closed unit ball",
            stage="bounded_map",
            witness=_point(cloud[worst]),
            image_norm=float(images[worst]),
        )

    big, _ = lambda_extremes_batch(f, pts)
    rhs_d = (4.0 / math.pi) / (1.0 - norms**2)
    bad_d = big > rhs_d * (1.0 + CHECK_SLACK)
    witnesses = [dict(w, bound="derivative") for w in _witnesses(bad_d, pts, big, rhs_d)]

    details = "derivative bound only"
    if origin_value_norm(f) <= ORIGIN_TOL:
        vals = np.linalg.norm(eval_ph(f, pts), axis=1)
        rhs_v = (4.0 / math.pi) * np.arctan(norms)
        bad_v = vals > rhs_v + CHECK_SLACK
        witnesses += [dict(w, bound="value") for w in _witnesses(bad_v, pts, vals, rhs_v)]
        details = "derivative and value bounds"
    witnesses.sort(key=lambda w: (w["index"], w["bound"]))
    return _verdict("bounded_map_bound", len(pts), witnesses, details=details)
