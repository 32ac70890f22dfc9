from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ph_bloch.calculus.cmatrix import CMat, op_norm, random_cmat
from ph_bloch.calculus.holomap import PolyMap, eval_poly, linear_combine
from ph_bloch.calculus.pmap import PHMap, eval_ph, omega_norms_batch
from ph_bloch.config import ScanSettings
from ph_bloch.core.logging import get_logger
from ph_bloch.core.parallel import map_ordered
from ph_bloch.core.sampling import ball_grid, rng_for
from ph_bloch.core.verdicts import ScanStatus, VerdictStatus
from ph_bloch.errors import (
    Case1Unsupported,
    DegenerateDenominator,
    DimensionMismatch,
    HypothesisViolated,
    NotACollision,
    NotApplicable,
    PreconditionViolated,
)
from ph_bloch.verify.geomverify import ConnectivityEstimate, ScanVerdict, connectivity_with_retry, univalence_scan

NORM_TOL = 1e-12
COLLISION_TOL = 1e-9
# |h_j(z1) - h_j(z2)| at or below this takes theta_j = 0.
PHASE_ZERO_TOL = 1e-12
MOEBIUS_MARGIN = 1e-9
# Allowance on M' for the sampled connectivity estimate of the perturbed image.
SHEAR_SLACK = 1.15


class PerturbationKind(str, Enum):
    GENERAL_CONTRACTION = "general-contraction"
    UNIT_NORM = "unit-norm"
    UNIMODULAR_DIAGONAL = "unimodular-diagonal"
    CONTRACTION_DIAGONAL = "contraction-diagonal"


@dataclass(frozen=True, eq=False)
class Perturbation:
    kind: PerturbationKind
    matrix: CMat

    def __post_init__(self) -> None:
        kind = PerturbationKind(self.kind)
        object.__setattr__(self, "kind", kind)
        norm = op_norm(self.matrix)
        if kind in (PerturbationKind.GENERAL_CONTRACTION, PerturbationKind.CONTRACTION_DIAGONAL):
            if norm > 1.0 + NORM_TOL:
                raise PreconditionViolated("perturbation must be a contraction", kind=kind.value, norm=norm)
        if kind == PerturbationKind.UNIT_NORM and abs(norm - 1.0) > NORM_TOL:
            raise PreconditionViolated("perturbation must have norm 1", kind=kind.value, norm=norm)
        if kind in (PerturbationKind.UNIMODULAR_DIAGONAL, PerturbationKind.CONTRACTION_DIAGONAL):
            if not self.matrix.is_diagonal:
                raise PreconditionViolated("perturbation must be diagonal", kind=kind.value)
        if kind == PerturbationKind.UNIMODULAR_DIAGONAL:
            mods = np.abs(self.matrix.diagonal)
            if np.any(np.abs(mods - 1.0) > NORM_TOL):
                raise PreconditionViolated(
                    "diagonal entries must have modulus 1", kind=kind.value, moduli=[float(m) for m in mods]
                )

    @property
    def n(self) -> int:
        return self.matrix.n

    @classmethod
    def identity(cls, kind: PerturbationKind, n: int) -> "Perturbation":
        return cls(kind=kind, matrix=CMat.identity(n))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "matrix": self.matrix.to_records(), "norm": op_norm(self.matrix)}


MatrixLike = Union[Perturbation, CMat]


def _matrix(A: MatrixLike) -> CMat:
    return A.matrix if isinstance(A, Perturbation) else A


def perturb(h: PolyMap, g: PolyMap, A: MatrixLike, conjugated: bool) -> Union[PHMap, PolyMap]:
    """
    conjugated: f_A = h + conj(g) A, stored as PHMap(h, g conj(A)).
    otherwise:  F_A = h + g A as a PolyMap.
    """
    M = _matrix(A)
    if not (h.n == g.n == M.n):
        raise DimensionMismatch("dimensions differ", h=h.n, g=g.n, a=M.n)
    if conjugated:
        return PHMap(h=h, g=linear_combine(PolyMap.zero(h.n), g, M.conj(), 1))
    return linear_combine(h, g, M, 1)


def shear_counterpart(f: PHMap) -> PolyMap:
    """F = h - g."""
    return linear_combine(f.h, f.g, CMat.identity(f.n), -1)


def perturbation_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def sample_perturbation(kind: PerturbationKind, n: int, seed: int) -> Perturbation:
    kind = PerturbationKind(kind)
    rng = rng_for(seed)
    if kind == PerturbationKind.GENERAL_CONTRACTION:
        return Perturbation(kind, random_cmat(rng, n, target_norm=1.0 - rng.random()))
    if kind == PerturbationKind.UNIT_NORM:
        return Perturbation(kind, random_cmat(rng, n, target_norm=1.0))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    if kind == PerturbationKind.UNIMODULAR_DIAGONAL:
        return Perturbation(kind, CMat.diag(np.exp(1j * theta)))
    radius = np.sqrt(rng.random(n))
    return Perturbation(kind, CMat.diag(radius * np.exp(1j * theta)))


def moebius_diagonal(A: MatrixLike, D: MatrixLike) -> CMat:
    """
    C = (A + D)(I + conj(A) D)^-1 for diagonal A = diag(lambda) and D = diag(e^{i theta});
    entries (lambda_j + e^{i theta_j}) / (1 + conj(lambda_j) e^{i theta_j}) have modulus 1.
    """
    a, d = _matrix(A), _matrix(D)
    if a.n != d.n:
        raise DimensionMismatch("matrix dimensions differ", left=a.n, right=d.n)
    if not (a.is_diagonal and d.is_diagonal):
        raise PreconditionViolated("moebius_diagonal takes diagonal matrices")
    lam = a.diagonal
    dj = d.diagonal
    if np.any(np.abs(lam) > 1.0 - MOEBIUS_MARGIN):
        raise PreconditionViolated(
            "diagonal must be a strict contraction", max_modulus=float(np.abs(lam).max()), margin=MOEBIUS_MARGIN
        )
    if np.any(np.abs(np.abs(dj) - 1.0) > NORM_TOL):
        raise PreconditionViolated("D must be unimodular diagonal")
    den = 1.0 + np.conj(lam) * dj
    if np.any(np.abs(den) < MOEBIUS_MARGIN):
        j = int(np.argmin(np.abs(den)))
        raise DegenerateDenominator(
            "Moebius denominator vanishes", stage="moebius", index=j, denominator=abs(complex(den[j]))
        )
    return CMat.diag((lam + dj) / den)


@dataclass(frozen=True)
class TransferResult:
    perturbation: Perturbation
    residual: float
    theta: List[float]
    z1: List[List[float]]
    z2: List[List[float]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "A": self.perturbation.to_dict(),
            "residual": self.residual,
            "theta": list(self.theta),
            "z1": self.z1,
            "z2": self.z2,
        }


def transfer_collision(
    h: PolyMap, g: PolyMap, A0: Perturbation, z1: Sequence[complex], z2: Sequence[complex]
) -> TransferResult:
    """
    Turn a collision of F_{A0} = h + g A0 into one of f_A = h + conj(g) A with
    A = conj(A0) conj(B)^2, B = diag(e^{-i theta}), theta_j = arg(h_j(z1) - h_j(z2)).
    """
    p1 = np.asarray(z1, dtype=complex)
    p2 = np.asarray(z2, dtype=complex)
    F = perturb(h, g, A0, conjugated=False)
    gap = float(np.linalg.norm(eval_poly(F, p1) - eval_poly(F, p2)))
    if np.allclose(p1, p2, rtol=0.0, atol=PHASE_ZERO_TOL):
        raise NotACollision("z1 and z2 coincide", stage="transfer", gap=gap)
    if gap > COLLISION_TOL:
        raise NotACollision("points do not collide under h + g A0", stage="transfer", gap=gap)

    dh = eval_poly(h, p1) - eval_poly(h, p2)
    zero = np.abs(dh) <= PHASE_ZERO_TOL
    if np.all(zero):
        raise Case1Unsupported(
            "h(z1) = h(z2) in every component", stage="transfer", z1=_records(p1), z2=_records(p2)
        )
    theta = np.where(zero, 0.0, np.angle(dh))
    A = Perturbation(A0.kind, CMat(np.conj(A0.matrix.entries) * np.exp(2j * theta)[None, :]))
    f_A = perturb(h, g, A, conjugated=True)
    residual = float(np.linalg.norm(eval_ph(f_A, p1) - eval_ph(f_A, p2)))
    return TransferResult(
        perturbation=A, residual=residual, theta=[float(t) for t in theta], z1=_records(p1), z2=_records(p2)
    )


def mprime(M: float, C: float) -> float:
    """M' = M (1 + C) / (1 - (1 + 2M) C), defined for C < 1 / (2M + 1)."""
    if M < 1.0 - 1e-9:
        raise PreconditionViolated("M must be >= 1", M=M)
    if C < 0.0:
        raise PreconditionViolated("C must be >= 0", C=C)
    bound = 1.0 / (2.0 * M + 1.0)
    if C >= bound:
        raise PreconditionViolated("C must be below 1 / (2M + 1)", M=M, C=C, bound=bound)
    return M * (1.0 + C) / (1.0 - (1.0 + 2.0 * M) * C)


def _records(z: np.ndarray) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in np.atleast_1d(z)]


# --- scans ---


@dataclass(frozen=True)
class PerturbationOutcome:
    index: int
    perturbation: Perturbation
    conjugated: ScanVerdict
    holomorphic: ScanVerdict

    @property
    def violated(self) -> bool:
        return self.conjugated.violated or self.holomorphic.violated

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "A": self.perturbation.to_dict(),
            "f_A": self.conjugated.to_dict(),
            "F_A": self.holomorphic.to_dict(),
        }


@dataclass(frozen=True)
class StabilityReport:
    kind: PerturbationKind
    radius: float
    outcomes: List[PerturbationOutcome]
    h_verdict: Optional[ScanVerdict] = None

    @property
    def status(self) -> ScanStatus:
        if any(o.violated for o in self.outcomes) or (self.h_verdict is not None and self.h_verdict.violated):
            return ScanStatus.VIOLATION
        return ScanStatus.NO_VIOLATION

    def violations(self) -> List[Dict[str, Any]]:
        out: List[Dict[str, Any]] = []
        for o in self.outcomes:
            for family, v in (("f_A", o.conjugated), ("F_A", o.holomorphic)):
                if v.violated:
                    out.append({"index": o.index, "family": family, "A": o.perturbation.to_dict(), "witness": v.witness})
        return out

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "index": o.index,
                "norm": op_norm(o.perturbation.matrix),
                "f_A": o.conjugated.status.value,
                "F_A": o.holomorphic.status.value,
            }
            for o in self.outcomes
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "radius": self.radius,
            "status": self.status.value,
            "perturbations": [o.to_dict() for o in self.outcomes],
            "h": None if self.h_verdict is None else self.h_verdict.to_dict(),
            "violations": self.violations(),
            "note": "finite scan over sampled A; a falsification attempt, not a proof of stability",
        }


def stability_scan(
    h: PolyMap,
    g: PolyMap,
    kind: PerturbationKind,
    num_perturbations: int,
    *,
    radius: float = 1.0,
    pairs: int = 100_000,
    seed: int = 42,
    tol: float = 1e-9,
    workers: int = 1,
    scan: Optional[ScanSettings] = None,
    scan_h: bool = False,
) -> StabilityReport:
    """
    Univalence scans of f_A = h + conj(g) A and F_A = h + g A for A = I (index 0)
    and num_perturbations - 1 sampled perturbations of the given kind.
    """
    if num_perturbations < 1:
        raise PreconditionViolated("num_perturbations must be >= 1", num_perturbations=num_perturbations)
    kind = PerturbationKind(kind)
    n = h.n
    perts = [Perturbation.identity(kind, n)] + [
        sample_perturbation(kind, n, perturbation_seed(seed, i)) for i in range(1, int(num_perturbations))
    ]
    log = get_logger(component="stability", kind=kind.value)

    def run(item: Any) -> PerturbationOutcome:
        i, A = item
        f_a = perturb(h, g, A, conjugated=True)
        F_a = perturb(h, g, A, conjugated=False)
        return PerturbationOutcome(
            index=i,
            perturbation=A,
            conjugated=univalence_scan(f_a, radius, pairs, seed, tol, scan=scan),
            holomorphic=univalence_scan(F_a, radius, pairs, seed, tol, scan=scan),
        )

    outcomes = map_ordered(run, list(enumerate(perts)), workers=workers)
    h_verdict = univalence_scan(h, radius, pairs, seed, tol, workers=workers, scan=scan) if scan_h else None
    report = StabilityReport(kind=kind, radius=radius, outcomes=outcomes, h_verdict=h_verdict)
    log.info("scan_complete", status=report.status.value, perturbations=len(outcomes))
    return report


class ShearPart(str, Enum):
    PART_I = "I"
    PART_II = "II"


@dataclass(frozen=True)
class ShearReport:
    part: ShearPart
    perturbation: Perturbation
    C: float
    m_hat: ConnectivityEstimate
    m_prime: float
    perturbed_scan: ScanVerdict
    m_hat_perturbed: ConnectivityEstimate
    precondition_scan: ScanVerdict

    @property
    def connectivity_ok(self) -> bool:
        return self.m_hat_perturbed.m_hat <= SHEAR_SLACK * self.m_prime

    @property
    def status(self) -> VerdictStatus:
        if self.perturbed_scan.violated or not self.connectivity_ok:
            return VerdictStatus.FAIL
        return VerdictStatus.PASS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "part": self.part.value,
            "A": self.perturbation.to_dict(),
            "C": self.C,
            "m_hat": self.m_hat.to_dict(),
            "m_prime": self.m_prime,
            "perturbed_univalence": self.perturbed_scan.to_dict(),
            "m_hat_perturbed": self.m_hat_perturbed.to_dict(),
            "slack": SHEAR_SLACK,
            "connectivity_ok": self.connectivity_ok,
            "precondition_univalence": self.precondition_scan.to_dict(),
            "status": self.status.value,
            "note": "M_hat is a sampled lower estimate of M; C < 1/(2 M_hat + 1) is necessary, not sufficient",
        }


@dataclass(frozen=True)
class ShearConfig:
    radius: float = 1.0
    pairs: int = 100_000
    grid_points: int = 2000
    k_neighbors: int = 8
    connectivity_pairs: int = 10_000
    seed: int = 42
    tol: float = 1e-9
    scan: ScanSettings = field(default_factory=ScanSettings)


def shear_verify(f: PHMap, part: ShearPart, A: Perturbation, config: Optional[ShearConfig] = None) -> ShearReport:
    """
    Part I: F = h - g univalent with linear-connectivity M  =>  f_A = h + conj(g) A univalent.
    Part II: f univalent  =>  F_A = h - g A univalent.
    """
    cfg = config or ShearConfig()
    part = ShearPart(part)
    if op_norm(A.matrix) > 1.0 + NORM_TOL:
        raise PreconditionViolated("A must be a contraction", norm=op_norm(A.matrix))
    log = get_logger(component="stability", command="shear_verify", part=part.value)

    source: Union[PHMap, PolyMap] = shear_counterpart(f) if part == ShearPart.PART_I else f
    pre = univalence_scan(source, cfg.radius, cfg.pairs, cfg.seed, cfg.tol, scan=cfg.scan)
    if pre.violated:
        raise HypothesisViolated(
            "source map is not univalent on the sample", stage="precondition", witness=pre.witness, part=part.value
        )

    grid = ball_grid(f.n, 0.95 * cfg.radius, cfg.grid_points, cfg.seed)
    _, w_norm, _ = omega_norms_batch(f, grid)
    C = float(w_norm.max())

    m_hat = connectivity_with_retry(
        source, cfg.radius, cfg.grid_points, cfg.k_neighbors, cfg.seed, pairs=cfg.connectivity_pairs
    )
    bound = 1.0 / (2.0 * m_hat.m_hat + 1.0)
    if not C < bound:
        raise NotApplicable(
            "dilatation bound C < 1 / (2 M_hat + 1) fails",
            stage="shear_hypothesis",
            C=C,
            m_hat=m_hat.m_hat,
            bound=bound,
        )
    m_prime = mprime(max(1.0, m_hat.m_hat), C)

    if part == ShearPart.PART_I:
        target: Union[PHMap, PolyMap] = perturb(f.h, f.g, A, conjugated=True)
    else:
        target = linear_combine(f.h, f.g, A.matrix, -1)
    scan_v = univalence_scan(target, cfg.radius, cfg.pairs, cfg.seed, cfg.tol, scan=cfg.scan)
    m_hat_p = connectivity_with_retry(
        target, cfg.radius, cfg.grid_points, cfg.k_neighbors, cfg.seed, pairs=cfg.connectivity_pairs
    )

    report = ShearReport(
        part=part,
        perturbation=A,
        C=C,
        m_hat=m_hat,
        m_prime=m_prime,
        perturbed_scan=scan_v,
        m_hat_perturbed=m_hat_p,
        precondition_scan=pre,
    )
    log.info("stage_complete", status=report.status.value, C=C, m_hat=m_hat.m_hat, m_prime=m_prime)
    return report


def counterexample_family(k: int, n: int) -> PHMap:
    """f_k(z) = (k z1, z2 / k, z3, ..., zn): det J = 1 at 0, f_k(0) = 0, no uniform Bloch radius."""
    if n < 2:
        raise PreconditionViolated("counterexample family needs n >= 2", n=n)
    if k < 1:
        raise PreconditionViolated("k must be >= 1", k=k)
    diag = np.ones(n, dtype=complex)
    diag[0] = k
    diag[1] = 1.0 / k
    return PHMap.holomorphic(PolyMap.linear(CMat.diag(diag)))
