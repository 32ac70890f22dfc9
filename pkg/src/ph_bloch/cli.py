from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import typer

from ph_bloch.analysis import bloch, volume
from ph_bloch.calculus.cmatrix import CMat
from ph_bloch.calculus.pmap import derivs as derivs_at
from ph_bloch.calculus.pmap import eval_ph, sphere_scan_extremes
from ph_bloch.calculus.holomap import eval_poly
from ph_bloch.config import AppSettings, normalize_log_level
from ph_bloch.core.logging import configure_logging, get_logger
from ph_bloch.core.sampling import ball_grid
from ph_bloch.core.verdicts import ScanStatus, VerdictStatus
from ph_bloch.errors import (
    EXIT_HYPOTHESIS,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VIOLATION,
    HypothesisViolated,
    PhBlochError,
    UsageError,
)
from ph_bloch.hypotheses import alpha_of, any_failed, run_hypothesis_checks
from ph_bloch.report.envelope import make_report, write_csv, write_report
from ph_bloch.report.spec_file import MappingSpec, parse_spec
from ph_bloch.verify import geomverify, stability

app = typer.Typer(no_args_is_help=True, help="Numerical toolkit for pluriharmonic mappings: volumes, Landau-Bloch radii, univalence and stability scans.")


@dataclass
class Outcome:
    results: Dict[str, Any]
    status: str
    exit_code: int = EXIT_OK
    rows: List[Dict[str, Any]] = field(default_factory=list)


# --- shared options ---


def _spec_opt() -> Any:
    return typer.Option(..., "--spec", help="Mapping spec JSON file")


def _seed_opt() -> Any:
    return typer.Option(None, "--seed", help="Root seed (default from PH_BLOCH_SEED, else 42)")


def _samples_opt() -> Any:
    return typer.Option(None, "--samples", help="Monte-Carlo / scan sample count")


def _tol_opt() -> Any:
    return typer.Option(None, "--tol", help="Collision / residual tolerance (default 1e-9)")


def _workers_opt() -> Any:
    return typer.Option(None, "--workers", help="Worker threads; part of the reproducibility key")


def _out_opt() -> Any:
    return typer.Option(None, "--out", help="Write the JSON report here instead of stdout")


def _csv_opt() -> Any:
    return typer.Option(None, "--csv", help="Optional CSV sidecar for tabular results")


def _log_opt() -> Any:
    return typer.Option(None, "--log-level", help="Log level for stderr (default WARNING)")


@dataclass
class Common:
    settings: AppSettings
    seed: int
    samples: int
    tol: float
    workers: int

    def echo(self) -> Dict[str, Any]:
        return {"seed": self.seed, "samples": self.samples, "tol": self.tol, "workers": self.workers}


def _common(
    seed: Optional[int] = None,
    samples: Optional[int] = None,
    tol: Optional[float] = None,
    workers: Optional[int] = None,
    log_level: Optional[str] = None,
) -> Common:
    settings = AppSettings()
    level = settings.log_level
    if log_level is not None:
        try:
            level = normalize_log_level(log_level)
        except ValueError as e:
            typer.echo("error: --log-level: %s" % e, err=True)
            raise typer.Exit(code=EXIT_USAGE) from e
    configure_logging(level)
    return Common(
        settings=settings,
        seed=settings.seed if seed is None else int(seed),
        samples=settings.samples if samples is None else int(samples),
        tol=settings.tol if tol is None else float(tol),
        workers=settings.workers if workers is None else max(1, int(workers)),
    )


def _run(
    command: str,
    params: Dict[str, Any],
    out: Optional[Path],
    csv_path: Optional[Path],
    body: Callable[[], Outcome],
) -> None:
    log = get_logger(command=command)
    log.info("command_starting", **{k: v for k, v in params.items() if not isinstance(v, (dict, list))})
    try:
        outcome = body()
    except PhBlochError as e:
        status = "hypothesis-violated" if isinstance(e, HypothesisViolated) else "error"
        log.error("command_failed", code=e.code, message=e.message)
        report = make_report(command=command, params=params, results={"error": e.to_dict()}, status=status)
        text = write_report(report, out)
        if out is None:
            typer.echo(text, nl=False)
        raise typer.Exit(code=e.exit_code)

    report = make_report(command=command, params=params, results=outcome.results, status=outcome.status)
    text = write_report(report, out)
    if out is None:
        typer.echo(text, nl=False)
    if csv_path is not None and outcome.rows:
        write_csv(outcome.rows, csv_path)
    raise typer.Exit(code=outcome.exit_code)


def _load(spec: Path) -> MappingSpec:
    return parse_spec(Path(spec))


def _parse_point(text: str, n: int) -> np.ndarray:
    try:
        z = np.array([complex(p.strip().replace(" ", "")) for p in text.split(",") if p.strip()], dtype=complex)
    except ValueError as e:
        raise UsageError("cannot parse point; use comma separated complex numbers like 0.1+0.2j", point=text) from e
    if z.shape != (n,):
        raise UsageError("point must have n coordinates", n=n, point=text)
    return z


def _records(z: np.ndarray) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in np.atleast_1d(z)]


def _scan_outcome(verdict: geomverify.ScanVerdict, key: str) -> Outcome:
    code = EXIT_VIOLATION if verdict.violated else EXIT_OK
    return Outcome(results={key: verdict.to_dict()}, status=verdict.status.value, exit_code=code)


# --- commands ---


@app.command("info")
def info(
    spec: Path = _spec_opt(),
    seed: Optional[int] = _seed_opt(),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Describe a mapping spec and run the preflight hypothesis checks."""
    c = _common(seed=seed, log_level=log_level)
    params = {"spec": str(spec), "seed": c.seed, "hypothesis_samples": c.settings.scan.hypothesis_samples}

    def body() -> Outcome:
        m = _load(spec)
        f = m.as_phmap()
        checks = run_hypothesis_checks(f, c.settings.scan.hypothesis_samples, c.seed)
        failed = any_failed(checks)
        return Outcome(
            results={
                "n": m.n,
                "metadata": None if m.metadata is None else m.metadata.model_dump(exclude_none=True),
                "h_terms": len(m.h.terms),
                "g_terms": len(m.g.terms),
                "h_degree": m.h.total_degree,
                "g_degree": m.g.total_degree,
                "alpha": alpha_of(f),
                "hypotheses": [r.to_dict() for r in checks],
            },
            status="hypotheses-failed" if failed else "ok",
        )

    _run("info", params, out, None, body)


@app.command("eval")
def eval_cmd(
    spec: Path = _spec_opt(),
    z: str = typer.Option(..., "--z", help="Point as comma separated complex numbers, e.g. 0.1+0.2j,0.3"),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Evaluate f = h + conj(g) at a point."""
    _common(log_level=log_level)
    params = {"spec": str(spec), "z": z}

    def body() -> Outcome:
        m = _load(spec)
        p = _parse_point(z, m.n)
        return Outcome(
            results={
                "z": _records(p),
                "f": _records(eval_ph(m.as_phmap(), p)),
                "h": _records(eval_poly(m.h, p)),
                "g": _records(eval_poly(m.g, p)),
            },
            status="ok",
        )

    _run("eval", params, out, None, body)


@app.command("derivs")
def derivs(
    spec: Path = _spec_opt(),
    z: str = typer.Option(..., "--z", help="Point as comma separated complex numbers"),
    seed: Optional[int] = _seed_opt(),
    samples: Optional[int] = _samples_opt(),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Dh, Dg, omega, Lambda/lambda and det J at a point, with a sphere-scan cross-check."""
    c = _common(seed=seed, samples=samples, log_level=log_level)
    params = {"spec": str(spec), "z": z, **c.echo()}

    def body() -> Outcome:
        m = _load(spec)
        f = m.as_phmap()
        p = _parse_point(z, m.n)
        pack = derivs_at(f, p)
        big, small = sphere_scan_extremes(f, p, c.samples, c.seed)
        return Outcome(
            results={
                "derivs": pack.to_dict(),
                "sphere_scan": {"max": big, "min": small, "samples": c.samples, "seed": c.seed},
            },
            status="ok",
        )

    _run("derivs", params, out, None, body)


@app.command("volume")
def volume_cmd(
    spec: Path = _spec_opt(),
    r: Optional[float] = typer.Option(None, "--r", help="Single radius: V_f(r), real volume and the volume inequality"),
    budget: Optional[int] = typer.Option(None, "--budget", help="Dyadic radii 1 - 2^-k, k = 1..budget"),
    seed: Optional[int] = _seed_opt(),
    samples: Optional[int] = _samples_opt(),
    workers: Optional[int] = _workers_opt(),
    out: Optional[Path] = _out_opt(),
    csv: Optional[Path] = _csv_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Generalized volume V_f(r), or its supremum over the dyadic radius schedule."""
    c = _common(seed=seed, samples=samples, workers=workers, log_level=log_level)
    k = c.settings.volume_budget if budget is None else int(budget)
    params = {"spec": str(spec), "r": r, "budget": k, **c.echo()}

    def body() -> Outcome:
        f = _load(spec).as_phmap()
        if r is not None:
            check = volume.volume_inequality_check(f, r, c.samples, c.seed, workers=c.workers)
            return Outcome(
                results={"inequality": check.to_dict()},
                status=check.status.value,
                exit_code=EXIT_OK if check.passed else EXIT_VIOLATION,
                rows=[
                    {"quantity": "real_volume", "r": r, "value": check.lhs.value, "stderr": check.lhs.stderr},
                    {"quantity": "generalized_volume", "r": r, "value": check.rhs.value, "stderr": check.rhs.stderr},
                ],
            )
        profile = volume.sup_generalized_volume(f, c.samples, c.seed, k, workers=c.workers)
        return Outcome(
            results={"profile": profile.to_dict()},
            status="diverged" if profile.diverged else "ok",
            rows=profile.rows(),
        )

    _run("volume", params, out, csv, body)


@app.command("bloch")
def bloch_cmd(
    spec: Path = _spec_opt(),
    pairs: Optional[int] = typer.Option(None, "--pairs", help="Univalence scan pairs"),
    targets: Optional[int] = typer.Option(None, "--targets", help="Covering targets"),
    budget: Optional[int] = typer.Option(None, "--budget", help="Volume radius budget"),
    seed: Optional[int] = _seed_opt(),
    samples: Optional[int] = _samples_opt(),
    tol: Optional[float] = _tol_opt(),
    workers: Optional[int] = _workers_opt(),
    out: Optional[Path] = _out_opt(),
    csv: Optional[Path] = _csv_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """End-to-end Landau-Bloch pipeline: alpha, V, radii, univalence and covering scans."""
    c = _common(seed=seed, samples=samples, tol=tol, workers=workers, log_level=log_level)
    s = c.settings
    params = {
        "spec": str(spec),
        "pairs": s.pairs if pairs is None else pairs,
        "targets": s.targets if targets is None else targets,
        "budget": s.volume_budget if budget is None else budget,
        "scan": s.scan.model_dump(),
        **c.echo(),
    }

    def body() -> Outcome:
        f = _load(spec).as_phmap()
        rep = geomverify.landau_bloch_verify(
            f,
            c.samples,
            c.seed,
            budget=params["budget"],
            pairs=params["pairs"],
            targets=params["targets"],
            tol=c.tol,
            workers=c.workers,
            scan=s.scan,
        )
        return Outcome(
            results=rep.to_dict(),
            status="pass" if rep.passed else "violation",
            exit_code=EXIT_OK if rep.passed else EXIT_VIOLATION,
            rows=rep.profile.rows(),
        )

    _run("bloch", params, out, csv, body)


@app.command("verify-univalence")
def verify_univalence(
    spec: Path = _spec_opt(),
    radius: float = typer.Option(1.0, "--radius", help="Ball radius in (0, 1]"),
    pairs: Optional[int] = typer.Option(None, "--pairs", help="Uniform pairs"),
    seed: Optional[int] = _seed_opt(),
    tol: Optional[float] = _tol_opt(),
    workers: Optional[int] = _workers_opt(),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Search B^n(radius) for a collision f(z1) = f(z2)."""
    c = _common(seed=seed, tol=tol, workers=workers, log_level=log_level)
    n_pairs = c.settings.pairs if pairs is None else pairs
    params = {"spec": str(spec), "radius": radius, "pairs": n_pairs, "scan": c.settings.scan.model_dump(), **c.echo()}

    def body() -> Outcome:
        f = _load(spec).as_phmap()
        v = geomverify.univalence_scan(f, radius, n_pairs, c.seed, c.tol, workers=c.workers, scan=c.settings.scan)
        return _scan_outcome(v, "univalence")

    _run("verify-univalence", params, out, None, body)


@app.command("verify-covering")
def verify_covering(
    spec: Path = _spec_opt(),
    domain_radius: float = typer.Option(1.0, "--domain-radius", help="Preimages must lie in B^n(domain_radius)"),
    target_radius: float = typer.Option(..., "--target-radius", help="Targets are sampled in B^n(target_radius)"),
    targets: Optional[int] = typer.Option(None, "--targets", help="Number of targets"),
    seed: Optional[int] = _seed_opt(),
    tol: Optional[float] = _tol_opt(),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Check that every sampled target is reached by damped Newton from inside the domain ball."""
    c = _common(seed=seed, tol=tol, log_level=log_level)
    n_targets = c.settings.targets if targets is None else targets
    params = {
        "spec": str(spec),
        "domain_radius": domain_radius,
        "target_radius": target_radius,
        "targets": n_targets,
        "starts": c.settings.scan.newton_starts,
        "seed": c.seed,
        "tol": c.tol,
    }

    def body() -> Outcome:
        f = _load(spec).as_phmap()
        v = geomverify.covering_check(
            f, domain_radius, target_radius, n_targets, c.seed, tol=c.tol, starts=c.settings.scan.newton_starts
        )
        return _scan_outcome(v, "covering")

    _run("verify-covering", params, out, None, body)


@app.command("connectivity")
def connectivity(
    spec: Path = _spec_opt(),
    radius: float = typer.Option(1.0, "--radius", help="Domain radius"),
    points: Optional[int] = typer.Option(None, "--points", help="Image cloud size"),
    k: Optional[int] = typer.Option(None, "--k", help="Neighbors for the graph radius"),
    pairs: Optional[int] = typer.Option(None, "--pairs", help="Random pairs for the path/chord ratio"),
    seed: Optional[int] = _seed_opt(),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Estimate the linear-connectivity constant M of the image of B^n(radius)."""
    c = _common(seed=seed, log_level=log_level)
    s = c.settings
    params = {
        "spec": str(spec),
        "radius": radius,
        "points": s.connectivity_points if points is None else points,
        "k": s.connectivity_k if k is None else k,
        "pairs": s.connectivity_pairs if pairs is None else pairs,
        "seed": c.seed,
    }

    def body() -> Outcome:
        f = _load(spec).as_phmap()
        est = geomverify.connectivity_with_retry(
            f, radius, params["points"], params["k"], c.seed, pairs=params["pairs"]
        )
        results = est.to_dict()
        results["path_witness"] = geomverify.path_witness_complex(est)
        return Outcome(results={"connectivity": results}, status="ok")

    _run("connectivity", params, out, None, body)


@app.command("stability-scan")
def stability_scan(
    spec: Path = _spec_opt(),
    kind: stability.PerturbationKind = typer.Option(
        stability.PerturbationKind.UNIT_NORM, "--kind", help="Perturbation family"
    ),
    count: Optional[int] = typer.Option(None, "--count", help="Perturbations, A = I included"),
    radius: float = typer.Option(1.0, "--radius", help="Ball radius in (0, 1]"),
    pairs: Optional[int] = typer.Option(None, "--pairs", help="Pairs per univalence scan"),
    scan_h: bool = typer.Option(False, "--scan-h", help="Also scan h itself"),
    seed: Optional[int] = _seed_opt(),
    tol: Optional[float] = _tol_opt(),
    workers: Optional[int] = _workers_opt(),
    out: Optional[Path] = _out_opt(),
    csv: Optional[Path] = _csv_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Univalence scans of f_A = h + conj(g) A and F_A = h + g A over sampled A."""
    c = _common(seed=seed, tol=tol, workers=workers, log_level=log_level)
    s = c.settings
    params = {
        "spec": str(spec),
        "kind": kind.value,
        "count": s.perturbations if count is None else count,
        "radius": radius,
        "pairs": s.pairs if pairs is None else pairs,
        "scan_h": scan_h,
        "scan": s.scan.model_dump(),
        **c.echo(),
    }

    def body() -> Outcome:
        m = _load(spec)
        rep = stability.stability_scan(
            m.h,
            m.g,
            kind,
            params["count"],
            radius=radius,
            pairs=params["pairs"],
            seed=c.seed,
            tol=c.tol,
            workers=c.workers,
            scan=s.scan,
            scan_h=scan_h,
        )
        violated = rep.status == ScanStatus.VIOLATION
        return Outcome(
            results={"stability": rep.to_dict()},
            status=rep.status.value,
            exit_code=EXIT_VIOLATION if violated else EXIT_OK,
            rows=rep.rows(),
        )

    _run("stability-scan", params, out, csv, body)


def _perturbation(kind: stability.PerturbationKind, n: int, seed: int, phase: Optional[float]) -> stability.Perturbation:
    if phase is not None:
        return stability.Perturbation(
            stability.PerturbationKind.UNIMODULAR_DIAGONAL, CMat.identity(n) * complex(np.exp(1j * phase))
        )
    return stability.sample_perturbation(kind, n, seed)


@app.command("shear-verify")
def shear_verify(
    spec: Path = _spec_opt(),
    part: stability.ShearPart = typer.Option(stability.ShearPart.PART_I, "--part", help="I: F = h - g given; II: f given"),
    kind: stability.PerturbationKind = typer.Option(
        stability.PerturbationKind.UNIT_NORM, "--kind", help="Family A is sampled from"
    ),
    phase: Optional[float] = typer.Option(None, "--phase", help="Use A = e^{i phase} I instead of sampling"),
    radius: float = typer.Option(1.0, "--radius", help="Ball radius in (0, 1]"),
    pairs: Optional[int] = typer.Option(None, "--pairs", help="Pairs per univalence scan"),
    points: Optional[int] = typer.Option(None, "--points", help="Connectivity cloud size"),
    k: Optional[int] = typer.Option(None, "--k", help="Connectivity neighbors"),
    seed: Optional[int] = _seed_opt(),
    tol: Optional[float] = _tol_opt(),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Check the shear construction: dilatation bound, M', perturbed univalence and connectivity."""
    c = _common(seed=seed, tol=tol, log_level=log_level)
    s = c.settings
    cfg = stability.ShearConfig(
        radius=radius,
        pairs=s.pairs if pairs is None else pairs,
        grid_points=s.connectivity_points if points is None else points,
        k_neighbors=s.connectivity_k if k is None else k,
        connectivity_pairs=s.connectivity_pairs,
        seed=c.seed,
        tol=c.tol,
        scan=s.scan,
    )
    params = {
        "spec": str(spec),
        "part": part.value,
        "kind": kind.value,
        "phase": phase,
        "radius": cfg.radius,
        "pairs": cfg.pairs,
        "points": cfg.grid_points,
        "k": cfg.k_neighbors,
        "connectivity_pairs": cfg.connectivity_pairs,
        "seed": c.seed,
        "tol": c.tol,
    }

    def body() -> Outcome:
        f = _load(spec).as_phmap()
        A = _perturbation(kind, f.n, c.seed, phase)
        rep = stability.shear_verify(f, part, A, cfg)
        passed = rep.status == VerdictStatus.PASS
        return Outcome(
            results={"shear": rep.to_dict()},
            status=rep.status.value,
            exit_code=EXIT_OK if passed else EXIT_VIOLATION,
        )

    _run("shear-verify", params, out, None, body)


@app.command("transfer-collision")
def transfer_collision(
    spec: Path = _spec_opt(),
    z1: str = typer.Option(..., "--z1", help="First point of the F_A0 collision"),
    z2: str = typer.Option(..., "--z2", help="Second point of the F_A0 collision"),
    phase: float = typer.Option(0.0, "--phase", help="A0 = e^{i phase} I"),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Turn a collision of h + g A0 into a collision of h + conj(g) A."""
    _common(log_level=log_level)
    params = {"spec": str(spec), "z1": z1, "z2": z2, "phase": phase}

    def body() -> Outcome:
        m = _load(spec)
        A0 = _perturbation(stability.PerturbationKind.UNIMODULAR_DIAGONAL, m.n, 0, phase)
        res = stability.transfer_collision(m.h, m.g, A0, _parse_point(z1, m.n), _parse_point(z2, m.n))
        ok = res.residual <= stability.COLLISION_TOL
        return Outcome(
            results={"transfer": res.to_dict(), "A0": A0.to_dict()},
            status="transferred" if ok else "residual-too-large",
            exit_code=EXIT_OK if ok else EXIT_VIOLATION,
        )

    _run("transfer-collision", params, out, None, body)


@app.command("demo-counterexample")
def demo_counterexample(
    k: int = typer.Option(10, "--k", help="Family parameter"),
    n: int = typer.Option(2, "--n", help="Dimension (>= 2)"),
    radius: float = typer.Option(0.15, "--radius", help="Target radius for the covering check"),
    volume_r: float = typer.Option(0.9, "--volume-r", help="Radius for the real volume estimate"),
    targets: Optional[int] = typer.Option(None, "--targets", help="Covering targets"),
    seed: Optional[int] = _seed_opt(),
    samples: Optional[int] = _samples_opt(),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """f_k = (k z1, z2/k, z3, ...): finite volume, det J(0) = 1, yet small covering balls fail."""
    c = _common(seed=seed, samples=samples, log_level=log_level)
    n_targets = c.settings.targets if targets is None else targets
    params = {
        "k": k,
        "n": n,
        "radius": radius,
        "volume_r": volume_r,
        "targets": n_targets,
        "seed": c.seed,
        "samples": c.samples,
    }

    def body() -> Outcome:
        f = stability.counterexample_family(k, n)
        est = volume.real_volume(f, volume_r, c.samples, c.seed)
        cov = geomverify.covering_check(
            f, 1.0, radius, n_targets, c.seed, tol=c.tol, starts=c.settings.scan.newton_starts
        )
        return Outcome(
            results={
                "alpha": alpha_of(f),
                "real_volume": est.to_dict(),
                "expected_volume": volume_r ** (2 * n),
                "covering": cov.to_dict(),
                "inverse_k": 1.0 / k,
            },
            status=cov.status.value,
            exit_code=EXIT_VIOLATION if cov.violated else EXIT_OK,
        )

    _run("demo-counterexample", params, out, None, body)


@app.command("constants")
def constants(
    alpha: Optional[float] = typer.Option(None, "--alpha", help="|det J_f(0)|, for the radii"),
    volume_v: Optional[float] = typer.Option(None, "--volume", help="Generalized volume V, for the radii"),
    n: int = typer.Option(1, "--n", help="Dimension, for the radii"),
    out: Optional[Path] = _out_opt(),
    csv: Optional[Path] = _csv_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """psi0, r0, t*, nu_max; with --alpha and --volume also Ru, Rc and the rho(t) table."""
    _common(log_level=log_level)
    params = {"alpha": alpha, "volume": volume_v, "n": n}

    def body() -> Outcome:
        psi0, r0, t_star, nu_max = bloch.constants()
        results: Dict[str, Any] = {
            "psi0": psi0,
            "r0": r0,
            "t_star": t_star,
            "nu_max": nu_max,
            "psi_argmin": bloch.psi_argmin(),
            "nu_argmax": bloch.nu_argmax(),
            "psi_at_r0": bloch.psi(r0),
        }
        rows: List[Dict[str, Any]] = []
        if (alpha is None) != (volume_v is None):
            raise UsageError("--alpha and --volume go together")
        if alpha is not None and volume_v is not None:
            radii = bloch.landau_bloch_radii(bloch.BlochInputs(n=n, alpha=alpha, volume=volume_v))
            results["radii"] = radii.to_dict(include_table=True)
            results["alpha_cap"] = bloch.alpha_cap(volume_v, n)
            rows = radii.rows()
        return Outcome(results=results, status="ok", rows=rows)

    _run("constants", params, out, csv, body)


@app.command("check-bounds")
def check_bounds(
    spec: Path = _spec_opt(),
    r: float = typer.Option(0.7, "--r", help="Radius for the growth bound"),
    volume_v: Optional[float] = typer.Option(None, "--volume", help="V for the growth bound (estimated if omitted)"),
    points: Optional[int] = typer.Option(None, "--points", help="Grid points per check"),
    seed: Optional[int] = _seed_opt(),
    samples: Optional[int] = _samples_opt(),
    workers: Optional[int] = _workers_opt(),
    out: Optional[Path] = _out_opt(),
    log_level: Optional[str] = _log_opt(),
) -> None:
    """Schwarz, growth and bounded-map inequalities on a seeded grid."""
    c = _common(seed=seed, samples=samples, workers=workers, log_level=log_level)
    s = c.settings
    n_points = s.grid_points if points is None else points
    params = {"spec": str(spec), "r": r, "volume": volume_v, "points": n_points, **c.echo()}

    def body() -> Outcome:
        f = _load(spec).as_phmap()
        hs = s.scan.hypothesis_samples
        results: Dict[str, Any] = {}
        statuses: List[str] = []

        def attempt(name: str, fn: Callable[[], Any]) -> None:
            try:
                verdict = fn()
            except HypothesisViolated as e:
                results[name] = {"status": "hypothesis-violated", "error": e.to_dict()}
                statuses.append("hypothesis")
                return
            results[name] = verdict.to_dict()
            statuses.append(verdict.status.value)

        unit_grid = ball_grid(f.n, 1.0 - 1e-6, n_points, c.seed)
        attempt("schwarz_omega", lambda: bloch.schwarz_omega_check(f, unit_grid, hypothesis_samples=hs, seed=c.seed))

        def growth() -> Any:
            V = volume_v
            if V is None:
                V = volume.sup_generalized_volume(f, c.samples, c.seed, s.volume_budget, workers=c.workers).sup_estimate
                results["volume_estimate"] = V
            grid = ball_grid(f.n, r, n_points, c.seed)
            return bloch.growth_bound_check(f, V, r, grid, hypothesis_samples=hs, seed=c.seed)

        attempt("growth_bound", growth)
        attempt(
            "bounded_map_bound",
            lambda: bloch.bounded_map_bound_check(f, unit_grid, hypothesis_samples=hs, seed=c.seed),
        )

        if VerdictStatus.FAIL.value in statuses:
            return Outcome(results=results, status="fail", exit_code=EXIT_VIOLATION)
        if all(st == "hypothesis" for st in statuses):
            return Outcome(results=results, status="hypothesis-violated", exit_code=EXIT_HYPOTHESIS)
        return Outcome(results=results, status="pass")

    _run("check-bounds", params, out, None, body)

