from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ph_bloch.calculus.pmap import PHMap, det_jacobian_batch, omega_norms_batch
from ph_bloch.core.logging import get_logger
from ph_bloch.core.parallel import map_ordered, pairwise_sum, split_counts
from ph_bloch.core.sampling import substreams, uniform_ball
from ph_bloch.core.verdicts import VerdictStatus
from ph_bloch.errors import HypothesisViolated, IntegrandNonFinite, PreconditionViolated

# Points evaluated per vectorized chunk inside one worker.
CHUNK = 65_536
# Share of samples allowed to violate ||omega|| < 1 / Dh nonsingular before giving up.
MAX_VIOLATION_SHARE = 1e-3
# Minimum sample count for a ball integral.
MIN_SAMPLES = 100

Integrand = Callable[[np.ndarray], np.ndarray]
Monitor = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegralEstimate:
    """
    Monte-Carlo estimate of an integral over B^n(r) under the normalized volume measure.

    The raw accumulators are stored; value and stderr are derived from them.
    """

    r: float
    n: int
    samples: int
    seed: int
    workers: int
    total: float
    total_sq: float
    violations: int = 0
    witness: Optional[List[List[float]]] = None

    @property
    def mass(self) -> float:
        return self.r ** (2 * self.n)

    @property
    def value(self) -> float:
        return self.mass * (self.total / self.samples)

    @property
    def stderr(self) -> float:
        N = self.samples
        if N < 2:
            return 0.0
        var = (self.total_sq - self.total * self.total / N) / (N - 1)
        return self.mass * math.sqrt(max(var, 0.0) / N)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "workers": self.workers,
            "r": self.r,
            "n": self.n,
            "violations": self.violations,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class VolumeProfile:
    radii: List[float]
    values: List[IntegralEstimate]
    sup_estimate: float
    diverged: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "radii": list(self.radii),
            "values": [v.to_dict() for v in self.values],
            "sup_estimate": self.sup_estimate,
            "diverged": self.diverged,
        }

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"r": est.r, "value": est.value, "stderr": est.stderr, "samples": est.samples}
            for est in self.values
        ]


@dataclass(frozen=True)
class VolumeInequalityVerdict:
    status: VerdictStatus
    lhs: IntegralEstimate
    rhs: IntegralEstimate
    kr_n: float
    margin: float
    sigma: float
    hard_violation: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == VerdictStatus.PASS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "lhs_real_volume": self.lhs.to_dict(),
            "rhs_generalized_volume": self.rhs.to_dict(),
            "kr_n": self.kr_n,
            "margin": self.margin,
            "sigma": self.sigma,
            "hard_violation": self.hard_violation,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class _Partial:
    total: float
    total_sq: float
    violations: int
    witness: Optional[np.ndarray]


def _run_chunked(
    integrand: Integrand,
    monitor: Optional[Monitor],
    rng: np.random.Generator,
    n: int,
    r: float,
    count: int,
) -> _Partial:
    total = 0.0
    total_sq = 0.0
    violations = 0
    witness: Optional[np.ndarray] = None
    remaining = count
    while remaining > 0:
        size = min(CHUNK, remaining)
        remaining -= size
        pts = uniform_ball(rng, n, r, size)
        vals = np.asarray(integrand(pts), dtype=float).reshape(size)
        if monitor is not None:
            bad = np.asarray(monitor(pts), dtype=bool).reshape(size)
            if np.any(bad):
                violations += int(bad.sum())
                if witness is None:
                    witness = pts[int(np.argmax(bad))]
                vals = np.where(bad, 0.0, vals)
        finite = np.isfinite(vals)
        if not np.all(finite):
            idx = int(np.argmin(finite))
            raise IntegrandNonFinite(
                "integrand returned a non-finite value",
                point=[[float(c.real), float(c.imag)] for c in pts[idx]],
                value=str(vals[idx]),
            )
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
    return _Partial(total=total, total_sq=total_sq, violations=violations, witness=witness)


def integrate_ball(
    integrand: Integrand,
    n: int,
    r: float,
    samples: int,
    seed: int,
    *,
    workers: int = 1,
    monitor: Optional[Monitor] = None,
) -> IntegralEstimate:
    """
    Mean of `integrand` over uniform points of B^n(r), times the normalized mass r^(2n).

    `integrand` and `monitor` are vectorized: (N, n) complex points -> (N,) values / flags.
    Points flagged by `monitor` contribute 0 and are counted in `violations`.
    Worker w draws from substream (seed, w); the reduction is pairwise in worker order,
    so results are bit-stable for a fixed (seed, samples, workers).
    """
    if not 0.0 < r <= 1.0:
        raise PreconditionViolated("radius must lie in (0, 1]", r=r)
    if samples < MIN_SAMPLES:
        raise PreconditionViolated("at least %d samples required" % MIN_SAMPLES, samples=samples)

    counts = split_counts(samples, workers)
    streams = substreams(seed, len(counts))
    jobs = list(zip(streams, counts))
    partials = map_ordered(
        lambda job: _run_chunked(integrand, monitor, job[0], n, r, job[1]),
        jobs,
        workers=workers,
    )
    witness = next((p.witness for p in partials if p.witness is not None), None)
    return IntegralEstimate(
        r=float(r),
        n=int(n),
        samples=int(samples),
        seed=int(seed),
        workers=int(workers),
        total=pairwise_sum([p.total for p in partials]),
        total_sq=pairwise_sum([p.total_sq for p in partials]),
        violations=sum(p.violations for p in partials),
        witness=None if witness is None else [[float(c.real), float(c.imag)] for c in witness],
    )


def _hypothesis_monitor(f: PHMap) -> Monitor:
    def monitor(pts: np.ndarray) -> np.ndarray:
        _, w_norm, singular = omega_norms_batch(f, pts)
        return singular | (w_norm >= 1.0)

    return monitor


def _check_violations(est: IntegralEstimate, quantity: str) -> IntegralEstimate:
    share = est.violations / est.samples
    if share > MAX_VIOLATION_SHARE:
        raise HypothesisViolated(
            "||omega|| < 1 with Dh nonsingular fails on too many samples",
            stage=quantity,
            witness=est.witness,
            share=share,
            violations=est.violations,
            samples=est.samples,
        )
    return est


def generalized_volume(f: PHMap, r: float, samples: int, seed: int, *, workers: int = 1) -> IntegralEstimate:
    """V_f(r): integral of ||Dh||^(2n) (1 - ||omega||^2)^n over B^n(r)."""
    if not 0.0 < r < 1.0:
        raise PreconditionViolated("radius must lie in (0, 1)", r=r)
    n = f.n

    def integrand(pts: np.ndarray) -> np.ndarray:
        dh_norm, w_norm, singular = omega_norms_batch(f, pts)
        w = np.where(singular | ~np.isfinite(w_norm), 0.0, w_norm)
        return dh_norm ** (2 * n) * (1.0 - w * w) ** n

    est = integrate_ball(integrand, n, r, samples, seed, workers=workers, monitor=_hypothesis_monitor(f))
    get_logger(component="volume").debug(
        "volume_estimated", quantity="generalized", r=r, value=est.value, stderr=est.stderr
    )
    return _check_violations(est, "generalized_volume")


def real_volume(f: PHMap, r: float, samples: int, seed: int, *, workers: int = 1) -> IntegralEstimate:
    """Integral of |det J_f| over B^n(r), same sampling stream as generalized_volume."""
    if not 0.0 < r < 1.0:
        raise PreconditionViolated("radius must lie in (0, 1)", r=r)

    def integrand(pts: np.ndarray) -> np.ndarray:
        return np.abs(det_jacobian_batch(f, pts))

    est = integrate_ball(integrand, f.n, r, samples, seed, workers=workers, monitor=_hypothesis_monitor(f))
    get_logger(component="volume").debug(
        "volume_estimated", quantity="real", r=r, value=est.value, stderr=est.stderr
    )
    return _check_violations(est, "real_volume")


def dyadic_radii(budget: int) -> List[float]:
    return [1.0 - 2.0 ** (-k) for k in range(1, int(budget) + 1)]


def sup_generalized_volume(
    f: PHMap, samples: int, seed: int, budget: int, *, workers: int = 1
) -> VolumeProfile:
    """
    V = sup over 0 < r < 1 of V_f(r), read off the dyadic schedule r_k = 1 - 2^-k.

    Every radius reuses the same seed (common random numbers). `diverged` flags a
    profile whose last two increments each exceed 10% relatively; nothing is extrapolated.
    """
    if budget < 3:
        raise PreconditionViolated("budget must cover at least 3 radii", budget=budget)
    radii = dyadic_radii(budget)
    values = [generalized_volume(f, r, samples, seed, workers=workers) for r in radii]
    vs = [v.value for v in values]

    def rel_increment(a: float, b: float) -> float:
        if a <= 0.0:
            return float("inf") if b > 0.0 else 0.0
        return (b - a) / a

    diverged = rel_increment(vs[-3], vs[-2]) > 0.1 and rel_increment(vs[-2], vs[-1]) > 0.1
    profile = VolumeProfile(radii=radii, values=values, sup_estimate=vs[-1], diverged=diverged)
    get_logger(component="volume").info(
        "volume_profile", budget=budget, sup_estimate=profile.sup_estimate, diverged=diverged
    )
    return profile


def k_r(r: float) -> float:
    return (1.0 + r) / (1.0 - r)


def volume_inequality_check(
    f: PHMap, r: float, samples: int, seed: int, *, workers: int = 1
) -> VolumeInequalityVerdict:
    """
    Real volume <= K_r^n * V_f(r), with both sides on the same random points.

    Passes iff lhs <= K_r^n rhs + 3 sigma; a gap beyond 5 sigma is marked as a hard
    violation (a counterexample artifact, not noise).
    """
    if not 0.0 < r < 1.0:
        raise PreconditionViolated("radius must lie in (0, 1)", r=r)
    lhs = real_volume(f, r, samples, seed, workers=workers)
    rhs = generalized_volume(f, r, samples, seed, workers=workers)
    kr_n = k_r(r) ** f.n
    sigma = math.hypot(lhs.stderr, kr_n * rhs.stderr)
    margin = kr_n * rhs.value - lhs.value
    passed = margin >= -3.0 * sigma
    hard = margin < -5.0 * sigma
    notes: List[str] = []
    if hard:
        notes.append("hard violation beyond 5 sigma; keep this map as a counterexample artifact")
        get_logger(component="volume").warning(
            "violation_found", check="volume_inequality", r=r, margin=margin, sigma=sigma
        )
    return VolumeInequalityVerdict(
        status=VerdictStatus.PASS if passed else VerdictStatus.FAIL,
        lhs=lhs,
        rhs=rhs,
        kr_n=kr_n,
        margin=margin,
        sigma=sigma,
        hard_violation=hard,
        notes=notes,
    )
