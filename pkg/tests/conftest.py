from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np
import pytest

from ph_bloch.calculus.holomap import Monomial, PolyMap
from ph_bloch.calculus.pmap import PHMap

Terms = Dict[Tuple[int, Tuple[int, ...]], complex]


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-size batteries")


def pytest_collection_modifyitems(config: pytest.Config, items: List[pytest.Item]) -> None:
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="acceptance-size battery; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def poly(n: int, terms: Terms) -> PolyMap:
    return PolyMap.from_terms(n, [Monomial(c, e, v) for (c, e), v in terms.items()])


def planar(h: Terms, g: Terms) -> PHMap:
    """n = 1 map from {exponent: coefficient} dicts."""
    return PHMap(
        h=poly(1, {(0, (k,)): v for k, v in h.items()}),
        g=poly(1, {(0, (k,)): v for k, v in g.items()}),
    )


def random_map(rng: np.random.Generator, n: int, scale: float = 0.1) -> PHMap:
    """h = z + small quadratic, g = small quadratic (so Dg(0) = 0)."""
    h_terms = [Monomial(j, tuple(1 if k == j else 0 for k in range(n)), 1.0) for j in range(n)]
    g_terms = []
    for j in range(n):
        for a in range(n):
            for b in range(a, n):
                e = [0] * n
                e[a] += 1
                e[b] += 1
                h_terms.append(Monomial(j, tuple(e), complex(*rng.uniform(-scale, scale, 2))))
                g_terms.append(Monomial(j, tuple(e), complex(*rng.uniform(-scale, scale, 2))))
    return PHMap(h=PolyMap.from_terms(n, h_terms), g=PolyMap.from_terms(n, g_terms))


@pytest.fixture
def identity1() -> PHMap:
    return planar({1: 1.0}, {})


@pytest.fixture
def half_square() -> PHMap:
    """h = z, g = z^2 / 2: omega(z) = z."""
    return planar({1: 1.0}, {2: 0.5})
