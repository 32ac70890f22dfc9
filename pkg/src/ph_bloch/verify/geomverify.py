from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from ph_bloch.analysis.bloch import BlochInputs, BlochRadii, landau_bloch_radii
from ph_bloch.analysis.volume import VolumeProfile, sup_generalized_volume
from ph_bloch.calculus.holomap import PolyMap
from ph_bloch.calculus.pmap import PHMap, det_jacobian_batch, eval_ph
from ph_bloch.config import ScanSettings
from ph_bloch.core.logging import get_logger
from ph_bloch.core.parallel import map_ordered
from ph_bloch.core.sampling import complexify, low_discrepancy_ball, realify, rng_for, substream, uniform_ball, uniform_sphere
from ph_bloch.core.verdicts import CheckResult, CheckStatus, ScanStatus, no_counterexample_phrase
from ph_bloch.errors import GraphDisconnected, HypothesisViolated, PreconditionViolated
from ph_bloch.hypotheses import alpha_of, any_failed, run_hypothesis_checks
from ph_bloch.verify.newton import solve_batch

# Pairs evaluated per vectorized chunk; chunk c always draws from substream (seed, c).
PAIR_CHUNK = 65_536
# Domain samples for connectivity come from this fraction of the domain radius.
BOUNDARY_RHO = 0.95
# Pairs closer than this many graph radii only measure graph discretization.
MIN_CHORD_FACTOR = 4.0

MapLike = Union[PHMap, PolyMap]


def as_phmap(fmap: MapLike) -> PHMap:
    if isinstance(fmap, PolyMap):
        return PHMap.holomorphic(fmap)
    return fmap


def _point(z: np.ndarray) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in np.atleast_1d(z)]


@dataclass(frozen=True)
class ScanVerdict:
    """
    Falsification outcome. `violation` always carries a re-checkable witness;
    `no-violation` is never a proof and says so in `summary`.
    """

    kind: str
    status: ScanStatus
    samples: int
    tol: float
    seed: int
    witness: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return self.status == ScanStatus.VIOLATION

    @property
    def summary(self) -> str:
        if self.violated:
            return "counterexample found"
        return no_counterexample_phrase(self.samples)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "status": self.status.value,
            "summary": self.summary,
            "samples": self.samples,
            "tol": self.tol,
            "seed": self.seed,
            "witness": self.witness,
            "details": dict(self.details),
        }


# --- univalence ---


@dataclass(frozen=True)
class _ChunkScan:
    collision: Optional[Tuple[np.ndarray, np.ndarray, float]]
    fold: Optional[Tuple[np.ndarray, float]]
    ratios: np.ndarray
    z1: np.ndarray
    z2: np.ndarray


def _pair_chunks(pairs: int, near: int) -> Iterator[Tuple[int, int, int]]:
    """(chunk index, uniform pairs, near-diagonal pairs) in a fixed order."""
    c = 0
    for start in range(0, pairs, PAIR_CHUNK):
        yield c, min(PAIR_CHUNK, pairs - start), 0
        c += 1
    for start in range(0, near, PAIR_CHUNK):
        yield c, 0, min(PAIR_CHUNK, near - start)
        c += 1


def _near_diagonal(rng: np.random.Generator, n: int, radius: float, count: int, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    z1 = uniform_ball(rng, n, radius, count)
    lo, hi = np.log(10.0 * tol), np.log(0.1 * radius)
    delta = np.exp(rng.uniform(lo, max(lo, hi), count))
    z2 = z1 + uniform_sphere(rng, n, count) * delta[:, None]
    inside = np.linalg.norm(z2, axis=1) < radius
    return z1[inside], z2[inside]


def _scan_chunk(f: PHMap, radius: float, tol: float, seed: int, job: Tuple[int, int, int], keep: int) -> _ChunkScan:
    index, uniform, near = job
    rng = substream(seed, index)
    if uniform:
        z1 = uniform_ball(rng, f.n, radius, uniform)
        z2 = uniform_ball(rng, f.n, radius, uniform)
    else:
        z1, z2 = _near_diagonal(rng, f.n, radius, near, tol)

    d_img = np.linalg.norm(eval_ph(f, z1) - eval_ph(f, z2), axis=1)
    d_dom = np.linalg.norm(z1 - z2, axis=1)
    separated = d_dom >= 100.0 * tol

    collision = None
    hit = np.flatnonzero(separated & (d_img <= tol))
    if hit.size:
        i = int(hit[0])
        collision = (z1[i], z2[i], float(d_img[i]))

    fold = None
    dets = det_jacobian_batch(f, z1)
    bad = np.flatnonzero(dets <= 0.0)
    if bad.size:
        i = int(bad[0])
        fold = (z1[i], float(dets[i]))

    ratios = np.where(separated, d_img / np.where(separated, d_dom, 1.0), np.inf)
    order = np.argsort(ratios, kind="stable")[:keep]
    return _ChunkScan(collision=collision, fold=fold, ratios=ratios[order], z1=z1[order], z2=z2[order])


def univalence_scan(
    fmap: MapLike,
    radius: float,
    pairs: int,
    seed: int,
    tol: float = 1e-9,
    *,
    workers: int = 1,
    scan: Optional[ScanSettings] = None,
) -> ScanVerdict:
    """
    Hunt for z1 != z2 in B^n(radius) with f(z1) = f(z2).

    Uniform pairs plus a near-diagonal batch are screened directly; the pairs with the
    smallest image/domain distance ratio are then refined by Newton on f(z2) = f(z1).
    Sampled points with det J_f <= 0 are reported as local violations.
    """
    if not 0.0 < radius <= 1.0:
        raise PreconditionViolated("radius must lie in (0, 1]", radius=radius)
    if pairs < 1:
        raise PreconditionViolated("pairs must be >= 1", pairs=pairs)
    cfg = scan or ScanSettings()
    f = as_phmap(fmap)
    log = get_logger(component="geomverify", check="univalence")

    near = int(round(cfg.near_diagonal_fraction * pairs))
    jobs = list(_pair_chunks(int(pairs), near))
    keep = max(1, int(cfg.refine_candidates))
    chunks = map_ordered(lambda job: _scan_chunk(f, radius, tol, seed, job, keep), jobs, workers=workers)
    samples = int(pairs) + near
    base = {"radius": radius, "pairs": int(pairs), "near_diagonal": near}

    def verdict(status: ScanStatus, witness: Optional[Dict[str, Any]] = None, **extra: Any) -> ScanVerdict:
        v = ScanVerdict(
            kind="univalence",
            status=status,
            samples=samples,
            tol=tol,
            seed=seed,
            witness=witness,
            details=dict(base, **extra),
        )
        if v.violated:
            log.warning("violation_found", radius=radius, witness=witness)
        log.info("scan_complete", status=status.value, samples=samples)
        return v

    for ch in chunks:
        if ch.collision is not None:
            z1, z2, d = ch.collision
            return verdict(
                ScanStatus.VIOLATION,
                {"type": "collision", "z1": _point(z1), "z2": _point(z2), "image_distance": d,
                 "separation": float(np.linalg.norm(z1 - z2))},
                stage="sampling",
            )
    for ch in chunks:
        if ch.fold is not None:
            z, det = ch.fold
            return verdict(
                ScanStatus.VIOLATION,
                {"type": "nonpositive_jacobian", "z": _point(z), "det_j": det},
                stage="sampling",
            )

    ratios = np.concatenate([ch.ratios for ch in chunks])
    z1s = np.vstack([ch.z1 for ch in chunks])
    z2s = np.vstack([ch.z2 for ch in chunks])
    finite = np.isfinite(ratios)
    order = np.argsort(ratios, kind="stable")[:keep]
    order = order[finite[order]]
    if order.size:
        z1c, z2c = z1s[order], z2s[order]
        res = solve_batch(f, eval_ph(f, z1c), z2c, tol=tol, bound=radius)
        sep = np.linalg.norm(res.z - z1c, axis=1)
        inside = np.linalg.norm(res.z, axis=1) < radius
        found = np.flatnonzero(res.converged & inside & (sep >= 100.0 * tol))
        if found.size:
            i = int(found[0])
            z1, z2 = z1c[i], res.z[i]
            d = float(np.linalg.norm(eval_ph(f, z1) - eval_ph(f, z2)))
            return verdict(
                ScanStatus.VIOLATION,
                {"type": "collision", "z1": _point(z1), "z2": _point(z2), "image_distance": d,
                 "separation": float(sep[i])},
                stage="refinement",
                refined=int(order.size),
            )
    return verdict(ScanStatus.NO_VIOLATION, refined=int(order.size), min_ratio=float(ratios[finite].min()) if finite.any() else None)


# --- covering ---


def covering_check(
    fmap: MapLike,
    domain_radius: float,
    target_radius: float,
    targets: int,
    seed: int,
    *,
    tol: float = 1e-9,
    starts: int = 32,
    target_points: Optional[Sequence[Sequence[complex]]] = None,
) -> ScanVerdict:
    """
    Is every sampled target w in B^n(target_radius) hit from inside B^n(domain_radius)?

    Each target gets damped Newton from the same deterministic low-discrepancy starts;
    the witness of a violation is the unreached target with the largest best residual.
    """
    if target_radius <= 0.0:
        raise PreconditionViolated("target_radius must be positive", target_radius=target_radius)
    if domain_radius <= 0.0:
        raise PreconditionViolated("domain_radius must be positive", domain_radius=domain_radius)
    f = as_phmap(fmap)
    if target_points is not None:
        ws = np.asarray(target_points, dtype=complex).reshape(-1, f.n)
    else:
        if targets < 1:
            raise PreconditionViolated("targets must be >= 1", targets=targets)
        ws = uniform_ball(rng_for(seed), f.n, target_radius, int(targets))

    z0 = low_discrepancy_ball(f.n, domain_radius, int(starts))
    T, S = len(ws), len(z0)
    W = np.repeat(ws, S, axis=0)
    Z = np.tile(z0, (T, 1))
    res = solve_batch(f, W, Z, tol=tol, bound=2.0 * domain_radius)

    ok = res.converged & (np.linalg.norm(res.z, axis=1) < domain_radius)
    reached = ok.reshape(T, S).any(axis=1)
    best_any = res.residual.reshape(T, S).min(axis=1)

    log = get_logger(component="geomverify", check="covering")
    details = {
        "domain_radius": domain_radius,
        "target_radius": target_radius,
        "targets": T,
        "starts": S,
        "reached": int(reached.sum()),
    }
    if reached.all():
        log.info("covering_complete", status="no-violation", targets=T)
        return ScanVerdict(
            kind="covering", status=ScanStatus.NO_VIOLATION, samples=T, tol=tol, seed=seed, details=details
        )

    missed = np.flatnonzero(~reached)
    hardest = int(missed[np.argmax(best_any[missed])])
    row = res.z.reshape(T, S, f.n)[hardest]
    j = int(np.argmin(res.residual.reshape(T, S)[hardest]))
    witness = {
        "type": "unreached_target",
        "target": _point(ws[hardest]),
        "best_z": _point(row[j]),
        "best_residual": float(best_any[hardest]),
        "best_z_norm": float(np.linalg.norm(row[j])),
    }
    log.warning("violation_found", unreached=int(missed.size), witness=witness)
    log.info("covering_complete", status="violation", targets=T)
    details["unreached"] = int(missed.size)
    return ScanVerdict(
        kind="covering", status=ScanStatus.VIOLATION, samples=T, tol=tol, seed=seed, witness=witness, details=details
    )


# --- linear connectivity ---


@dataclass(frozen=True)
class ConnectivityEstimate:
    m_hat: float
    epsilon: float
    pairs_checked: int
    boundary_rho: float
    k_neighbors: int
    points: int
    path_witness: Optional[List[List[float]]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m_hat": self.m_hat,
            "epsilon": self.epsilon,
            "pairs_checked": self.pairs_checked,
            "boundary_rho": self.boundary_rho,
            "k_neighbors": self.k_neighbors,
            "points": self.points,
            "path_witness": self.path_witness,
        }


def connectivity_from_cloud(
    points: np.ndarray,
    k_neighbors: int,
    pairs: int,
    seed: int,
    *,
    boundary_rho: float = BOUNDARY_RHO,
    min_chord_factor: float = MIN_CHORD_FACTOR,
) -> ConnectivityEstimate:
    """
    Linear-connectivity constant of a real point cloud (N, d).

    Graph: edges between points at distance <= eps, eps = 2 x median k-NN distance.
    M_hat: max over random pairs with chord >= min_chord_factor * eps of
    (shortest-path length) / (chord). Raises GraphDisconnected if the graph splits.
    """
    pts = np.asarray(points, dtype=float)
    N = len(pts)
    if N < 2 or k_neighbors < 1 or k_neighbors >= N:
        raise PreconditionViolated("need at least k_neighbors + 1 points", points=N, k=k_neighbors)

    tree = cKDTree(pts)
    dists, _ = tree.query(pts, k=int(k_neighbors) + 1)
    eps = 2.0 * float(np.median(dists[:, -1]))
    edges = tree.query_pairs(eps, output_type="ndarray")
    w = np.linalg.norm(pts[edges[:, 0]] - pts[edges[:, 1]], axis=1)
    # csgraph treats explicit zeros as missing edges
    w = np.maximum(w, np.finfo(float).tiny)
    graph = coo_matrix((w, (edges[:, 0], edges[:, 1])), shape=(N, N)).tocsr()

    components, labels = connected_components(graph, directed=False)
    if components > 1:
        sizes = np.bincount(labels)
        raise GraphDisconnected(
            "epsilon-graph of the image cloud is disconnected; raise grid_points or k",
            stage="connectivity",
            components=int(components),
            largest=int(sizes.max()),
            epsilon=eps,
            k=int(k_neighbors),
        )

    rng = rng_for(seed)
    ii = rng.integers(0, N, int(pairs))
    jj = rng.integers(0, N, int(pairs))
    chord = np.linalg.norm(pts[ii] - pts[jj], axis=1)
    keep = chord >= min_chord_factor * eps
    ii, jj, chord = ii[keep], jj[keep], chord[keep]
    if ii.size == 0:
        return ConnectivityEstimate(
            m_hat=1.0, epsilon=eps, pairs_checked=0, boundary_rho=boundary_rho, k_neighbors=int(k_neighbors), points=N
        )

    sources, inverse = np.unique(ii, return_inverse=True)
    lengths, preds = dijkstra(graph, directed=False, indices=sources, return_predecessors=True)
    path = lengths[inverse, jj]
    ratios = path / chord
    best = int(np.argmax(ratios))

    witness: List[List[float]] = []
    node = int(jj[best])
    row = int(inverse[best])
    while node >= 0:
        witness.append([float(x) for x in pts[node]])
        if node == int(ii[best]):
            break
        node = int(preds[row, node])
    witness.reverse()

    return ConnectivityEstimate(
        m_hat=float(ratios[best]),
        epsilon=eps,
        pairs_checked=int(ii.size),
        boundary_rho=boundary_rho,
        k_neighbors=int(k_neighbors),
        points=N,
        path_witness=witness,
    )


def connectivity_estimate(
    fmap: MapLike,
    domain_radius: float,
    grid_points: int,
    k_neighbors: int,
    seed: int,
    *,
    pairs: int = 10_000,
) -> ConnectivityEstimate:
    """M_hat for the image of B^n(0.95 * domain_radius) under the map."""
    if grid_points < 100:
        raise PreconditionViolated("grid_points must be >= 100", grid_points=grid_points)
    f = as_phmap(fmap)
    z = uniform_ball(rng_for(seed), f.n, BOUNDARY_RHO * domain_radius, int(grid_points))
    cloud = realify(eval_ph(f, z))
    est = connectivity_from_cloud(cloud, k_neighbors, pairs, seed)
    get_logger(component="geomverify", check="connectivity").info(
        "scan_complete", m_hat=est.m_hat, epsilon=est.epsilon, pairs=est.pairs_checked
    )
    return est


def path_witness_complex(est: ConnectivityEstimate) -> Optional[List[List[List[float]]]]:
    """Path witness as complex point records, for clouds that came from C^n images."""
    if est.path_witness is None:
        return None
    return [_point(complexify(np.asarray(p))) for p in est.path_witness]


# --- end-to-end pipeline ---


@dataclass(frozen=True)
class LandauBlochReport:
    hypotheses: List[CheckResult]
    alpha: float
    profile: VolumeProfile
    radii: BlochRadii
    univalence: ScanVerdict
    covering: ScanVerdict

    @property
    def passed(self) -> bool:
        return not (self.univalence.violated or self.covering.violated)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hypotheses": [r.to_dict() for r in self.hypotheses],
            "alpha": self.alpha,
            "volume": self.profile.to_dict(),
            "V": self.profile.sup_estimate,
            "radii": self.radii.to_dict(),
            "univalence": self.univalence.to_dict(),
            "covering": self.covering.to_dict(),
            "passed": self.passed,
        }


def _stage(log: Any, name: str) -> None:
    log.info("stage_starting", stage=name)


def landau_bloch_verify(
    f: PHMap,
    samples: int,
    seed: int,
    *,
    budget: int = 14,
    pairs: int = 100_000,
    targets: int = 1000,
    tol: float = 1e-9,
    workers: int = 1,
    scan: Optional[ScanSettings] = None,
) -> LandauBlochReport:
    """
    alpha -> V -> cap -> (Ru, Rc) -> univalence on B(Ru) -> covering of B(Rc) from B(Ru).

    Any hypothesis failure raises HypothesisViolated tagged with its stage.
    """
    cfg = scan or ScanSettings()
    log = get_logger(component="geomverify", command="landau_bloch_verify")

    _stage(log, "hypotheses")
    checks = run_hypothesis_checks(f, cfg.hypothesis_samples, seed)
    if any_failed(checks):
        failed = {r.name: r.details for r in checks if r.status == CheckStatus.FAIL}
        raise HypothesisViolated(
            "standing hypotheses fail: %s" % ", ".join(failed), stage="hypotheses", failed=failed
        )

    current = "alpha"
    try:
        _stage(log, current)
        alpha = alpha_of(f)
        if not alpha > 0.0:
            raise HypothesisViolated("|det J_f(0)| must be positive", alpha=alpha)

        current = "volume"
        _stage(log, current)
        profile = sup_generalized_volume(f, samples, seed, budget, workers=workers)
        if profile.diverged:
            raise HypothesisViolated(
                "generalized volume profile keeps growing; V looks unbounded",
                sup_estimate=profile.sup_estimate,
            )

        current = "cap"
        _stage(log, current)
        inputs = BlochInputs(n=f.n, alpha=alpha, volume=profile.sup_estimate)

        current = "radii"
        radii = landau_bloch_radii(inputs)

        current = "univalence"
        _stage(log, current)
        uni = univalence_scan(f, radii.Ru, pairs, seed, tol, workers=workers, scan=cfg)

        current = "covering"
        _stage(log, current)
        cov = covering_check(f, radii.Ru, radii.Rc, targets, seed, tol=tol, starts=cfg.newton_starts)
    except HypothesisViolated as e:
        if e.stage is None:
            e.stage = current
        raise

    report = LandauBlochReport(
        hypotheses=checks, alpha=alpha, profile=profile, radii=radii, univalence=uni, covering=cov
    )
    log.info("stage_complete", stage="pipeline", status="pass" if report.passed else "violation")
    return report


def connectivity_with_retry(
    fmap: MapLike,
    domain_radius: float,
    grid_points: int,
    k_neighbors: int,
    seed: int,
    *,
    pairs: int = 10_000,
    attempts: int = 3,
) -> ConnectivityEstimate:
    """connectivity_estimate, doubling k after each disconnected graph (up to `attempts` tries)."""
    log = get_logger(component="geomverify", check="connectivity")
    for attempt in Retrying(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(GraphDisconnected),
        reraise=True,
    ):
        with attempt:
            k = int(k_neighbors) * 2 ** (attempt.retry_state.attempt_number - 1)
            if attempt.retry_state.attempt_number > 1:
                log.warning("connectivity_retry", attempt=attempt.retry_state.attempt_number, k=k)
            return connectivity_estimate(fmap, domain_radius, grid_points, min(k, grid_points - 1), seed, pairs=pairs)
    raise AssertionError("unreachable")
