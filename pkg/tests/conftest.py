"""Shared corpus fixtures.

The random rational corpus is seeded and filtered so that no root modulus
comes within 0.06 of a circle used by the measurement radii in the suites
(quadrature there converges spectrally only while roots keep their distance
from the integration circles).
"""

import numpy as np
import pytest

from annuchar import RationalFunction

# Radii (and their reciprocals where relevant) used across the suites:
# unit circle, jensen radii 0.7/2.5, window circles 1/3, 0.5, 2, 3,
# argument-principle radii 1.5, 2.7 and their inverses.
PROTECTED_MODULI = (
    1.0 / 3.0,
    0.37,
    0.4,
    0.5,
    2.0 / 3.0,
    0.7,
    1.0,
    1.5,
    2.0,
    2.5,
    2.7,
    3.0,
)
MARGIN = 0.06

_MULT_CHOICES = (1, 1, 1, 1, -1, -1, -1, -1, 2, -2)


def _admissible(rho: float) -> bool:
    return all(abs(rho - p) >= MARGIN for p in PROTECTED_MODULI)


def random_rational(rng: np.random.Generator, max_total_degree: int = 4) -> RationalFunction:
    budget = int(rng.integers(1, max_total_degree + 1))
    factors = []
    used = 0
    while used < budget:
        mult = int(_MULT_CHOICES[rng.integers(0, len(_MULT_CHOICES))])
        if used + abs(mult) > budget:
            mult = 1 if mult > 0 else -1
        while True:
            rho = float(rng.uniform(0.3, 3.0))
            if _admissible(rho):
                break
        ang = float(rng.uniform(0.0, 2.0 * np.pi))
        factors.append((rho * np.exp(1j * ang), mult))
        used += abs(mult)
    scale = float(rng.uniform(0.5, 2.0)) * np.exp(1j * float(rng.uniform(0.0, 2.0 * np.pi)))
    return RationalFunction(scale, tuple(factors))


@pytest.fixture(scope="session")
def corpus50():
    rng = np.random.default_rng(20250814)
    return [random_rational(rng) for _ in range(50)]


@pytest.fixture(scope="session")
def corpus_degree3(corpus50):
    out = [f for f in corpus50 if sum(abs(m) for _, m in f.factors) <= 3]
    assert len(out) >= 10
    return out


@pytest.fixture(scope="session")
def scan_corpus():
    from annuchar import constant, rational

    return [
        rational(1.0, [(0.0, 2)]),
        rational(1.0, [(0.0, -3)]),
        rational(1.0, [(2.0, 1), (0.5, -1)]),
        rational(2.0, [(1.5, 1), (-2.0, 1), (-0.4, -1)]),
        constant(5.0),
    ]
