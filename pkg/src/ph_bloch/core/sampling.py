from __future__ import annotations

from typing import List

import numpy as np


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def substreams(seed: int, count: int) -> List[np.random.Generator]:
    """
    Independent per-worker (or per-item) generators derived from (seed, index).
    The i-th stream depends only on seed and i, not on `count`.
    """
    root = np.random.SeedSequence(int(seed))
    return [np.random.default_rng(child) for child in root.spawn(int(count))]


def substream(seed: int, index: int) -> np.random.Generator:
    return substreams(seed, index + 1)[index]


def realify(z: np.ndarray) -> np.ndarray:
    """(..., n) complex -> (..., 2n) real ordered (x1..xn, y1..yn)."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def complexify(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def uniform_sphere(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Uniform points on the unit sphere of C^n (real dimension 2n), shape (size, n)."""
    g = rng.standard_normal((int(size), 2 * int(n)))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return complexify(g)


def uniform_ball(rng: np.random.Generator, n: int, r: float, size: int) -> np.ndarray:
    """
    Uniform points in B^n(r): Gaussian direction, radius r * U^(1/2n). No rejection.
    """
    direction = uniform_sphere(rng, n, size)
    radius = float(r) * rng.random(int(size)) ** (1.0 / (2.0 * n))
    return direction * radius[:, None]


def ball_grid(n: int, radius: float, points: int, seed: int) -> np.ndarray:
    """Seeded check grid in B^n(radius); the origin is always the first point."""
    pts = uniform_ball(rng_for(seed), n, radius, max(0, int(points) - 1))
    return np.vstack([np.zeros((1, n), dtype=complex), pts])


def _generalized_golden(d: int) -> float:
    x = 2.0
    for _ in range(30):
        x = pow(1.0 + x, 1.0 / (d + 1))
    return x


def low_discrepancy_ball(n: int, radius: float, count: int) -> np.ndarray:
    """
    Deterministic quasirandom start points in B^n(radius), origin first.

    Additive recurrence u_i = (0.5 + alpha * i) mod 1 in [0,1)^(2n) with alpha from the
    generalized golden ratio, mapped to the cube and kept when inside the ball.
    """
    d = 2 * int(n)
    g = _generalized_golden(d)
    alpha = np.array([pow(1.0 / g, j + 1) % 1.0 for j in range(d)])

    out = [np.zeros(d)]
    i = 1
    while len(out) < int(count):
        u = (0.5 + alpha * i) % 1.0
        x = 2.0 * u - 1.0
        if float(np.dot(x, x)) < 1.0:
            out.append(x)
        i += 1
    return complexify(np.array(out[: int(count)])) * float(radius)
