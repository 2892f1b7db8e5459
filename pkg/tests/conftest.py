"""Shared fixtures: cached oracle values and standard amplitudes."""

from __future__ import annotations

import numpy as np
import pytest

from oscillquad.amplitudes import rational_amplitude
from oscillquad.chebyshev import Polynomial
from oscillquad.reference import oracle_value

# x / (x^2 + 0.02), the amplitude used by both worked integrals.
RUNGE_NUM = Polynomial([0.0, 1.0])
RUNGE_DEN = Polynomial([0.02, 0.0, 1.0])


def runge_amplitude(dim: int = 1):
    return rational_amplitude(RUNGE_NUM, RUNGE_DEN, dim, name="rational_runge")


@pytest.fixture(scope="session")
def oracle_cache():
    """Memoized brute-force integrals keyed by (system config, amplitude, n)."""
    cache: dict = {}

    def get(system, amplitude, n_points: int) -> complex:
        key = (repr(sorted((system.config or {}).items())), system.omega,
               amplitude.name, n_points)
        if key not in cache:
            cache[key] = oracle_value(system, amplitude, n_points)
        return cache[key]

    return get


def fit_loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log10(np.asarray(xs, dtype=float)),
                            np.log10(np.asarray(ys, dtype=float)), 1)[0])
