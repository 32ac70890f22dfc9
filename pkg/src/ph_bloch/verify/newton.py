from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ph_bloch.calculus.pmap import PHMap, eval_ph, real_jacobian_batch
from ph_bloch.core.sampling import complexify, realify
from ph_bloch.errors import DimensionMismatch

MAX_ITER = 200
MAX_HALVINGS = 20
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class NewtonResult:
    z: np.ndarray
    residual: np.ndarray
    converged: np.ndarray
    iterations: int


def solve_batch(
    f: PHMap,
    targets: np.ndarray,
    starts: np.ndarray,
    *,
    tol: float = RESIDUAL_TOL,
    bound: Optional[float] = None,
    max_iter: int = MAX_ITER,
) -> NewtonResult:
    """
    Damped Newton for f(z) = w on the real 2n-dimensional system, one problem per row.

    Steps use the pseudo-inverse of the real Jacobian and are halved (up to 20 times)
    until the residual decreases. With `bound`, trial points outside B(bound) are rejected.
    Rows stop moving once their residual is strictly below `tol`.
    """
    w = np.asarray(targets, dtype=complex)
    z = np.array(starts, dtype=complex, copy=True)
    if w.shape != z.shape:
        raise DimensionMismatch("targets and starts differ in shape", targets=list(w.shape), starts=list(z.shape))

    def residual_of(pts: np.ndarray, goal: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            res = np.linalg.norm(eval_ph(f, pts) - goal, axis=1)
        res = np.where(np.isfinite(res), res, np.inf)
        if bound is not None:
            res = np.where(np.linalg.norm(pts, axis=1) <= bound, res, np.inf)
        return res

    res = residual_of(z, w)
    it = 0
    for it in range(1, int(max_iter) + 1):
        active = res >= tol
        if not np.any(active):
            break
        za, wa, ra = z[active], w[active], res[active]
        F = realify(eval_ph(f, za) - wa)
        J = real_jacobian_batch(f, za)
        step = -np.einsum("nij,nj->ni", np.linalg.pinv(J), F)

        scale = np.ones(len(za))
        accepted = np.zeros(len(za), dtype=bool)
        new_z = za.copy()
        new_r = ra.copy()
        for _ in range(MAX_HALVINGS + 1):
            todo = ~accepted
            if not np.any(todo):
                break
            trial = za[todo] + complexify(step[todo] * scale[todo, None])
            tr = residual_of(trial, wa[todo])
            better = tr < ra[todo]
            idx = np.flatnonzero(todo)[better]
            new_z[idx] = trial[better]
            new_r[idx] = tr[better]
            accepted[idx] = True
            scale[todo] *= 0.5

        if not np.any(accepted):
            break
        z[active] = new_z
        res[active] = new_r

    return NewtonResult(z=z, residual=res, converged=res < tol, iterations=it)
