"""Built-in amplitude registry.

Names resolve to :class:`AmplitudeSpec` instances with closed-form endpoint
derivative tables (no finite differences anywhere):

* ``one``            -- f = 1 in the first component
* ``cos``            -- f = cos(x) in the first component
* ``rational_runge`` -- f = x / (x^2 + 0.02) in the first component
* ``manufactured:<n>`` -- f = L_omega(e_1 T_n), which makes the exact
  quadrature value available in closed form from the weight endpoints.

For systems with more than one component the named scalar amplitudes sit
in the first component and the rest are zero.
"""

from __future__ import annotations

import numpy as np

from .chebyshev import Polynomial, RationalFunction
from .oscillator import AmplitudeSpec, OscillatorSystem

#: Depth of the endpoint-derivative tables built for registry amplitudes.
MAX_DERIVATIVE_ORDER = 6

#: Largest manufactured basis index (monomial conversion stays well
#: conditioned in double precision well past this).
MAX_MANUFACTURED_INDEX = 40


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=np.float64), dtype=np.complex128)


def _pad_components(first, dim):
    return (first,) + tuple(_zero for _ in range(dim - 1))


def _tables_first_component(dim, plus_col, minus_col):
    l_max = len(plus_col)
    dp = np.zeros((l_max, dim), dtype=np.complex128)
    dm = np.zeros((l_max, dim), dtype=np.complex128)
    dp[:, 0] = plus_col
    dm[:, 0] = minus_col
    return dp, dm


def rational_amplitude(num: Polynomial, den: Polynomial, dim: int,
                       name: str = "") -> AmplitudeSpec:
    """Scalar rational amplitude in the first component, exact derivatives."""
    rat = RationalFunction(num, den)
    plus = rat.derivatives_at(1.0, MAX_DERIVATIVE_ORDER)[1:]
    minus = rat.derivatives_at(-1.0, MAX_DERIVATIVE_ORDER)[1:]
    dp, dm = _tables_first_component(dim, plus, minus)

    def f(x):
        return rat(np.asarray(x, dtype=np.float64)).astype(np.complex128)

    return AmplitudeSpec(components=_pad_components(f, dim),
                         deriv_plus=dp, deriv_minus=dm, name=name)


def chebyshev_t_polynomial(n: int) -> Polynomial:
    """T_n in the monomial basis."""
    e = np.zeros(n + 1)
    e[n] = 1.0
    return Polynomial(np.polynomial.chebyshev.cheb2poly(e))


def manufactured_amplitude(system: OscillatorSystem, n: int) -> AmplitudeSpec:
    """f = L_omega(e_1 T_n): every component is rational with denominator r.

    Component i is  delta_{i,1} T_n' + (G^T)_{i,1} T_n, assembled exactly
    over the cleared polynomial data.
    """
    if n < 0 or n > MAX_MANUFACTURED_INDEX:
        raise ValueError(f"manufactured index must be in [0, {MAX_MANUFACTURED_INDEX}]")
    t_n = chebyshev_t_polynomial(n)
    t_np = t_n.deriv()
    m = system.dim
    rats = []
    for i in range(m):
        num = system.r_g[0][i] * t_n
        if i == 0:
            num = num + system.r * t_np
        rats.append(RationalFunction(num, system.r))

    def make_f(rat):
        return lambda x: rat(np.asarray(x, dtype=np.float64)).astype(np.complex128)

    dp = np.zeros((MAX_DERIVATIVE_ORDER, m), dtype=np.complex128)
    dm = np.zeros((MAX_DERIVATIVE_ORDER, m), dtype=np.complex128)
    for i, rat in enumerate(rats):
        dp[:, i] = rat.derivatives_at(1.0, MAX_DERIVATIVE_ORDER)[1:]
        dm[:, i] = rat.derivatives_at(-1.0, MAX_DERIVATIVE_ORDER)[1:]
    return AmplitudeSpec(components=tuple(make_f(r) for r in rats),
                         deriv_plus=dp, deriv_minus=dm, name=f"manufactured:{n}")


def manufactured_expected_value(system: OscillatorSystem, n: int) -> complex:
    """Exact I_omega[f] for f = L_omega(e_1 T_n): T_n(1) w_1(1) - T_n(-1) w_1(-1)."""
    sign = -1.0 if n % 2 else 1.0
    return complex(system.w_plus[0] - sign * system.w_minus[0])


def make_amplitude(name: str, system: OscillatorSystem) -> AmplitudeSpec:
    """Resolve a registry name against a system (dimension, manufactured data)."""
    dim = system.dim
    if name == "one":
        plus = np.zeros(MAX_DERIVATIVE_ORDER, dtype=np.complex128)
        dp, dm = _tables_first_component(dim, plus, plus)
        return AmplitudeSpec(
            components=_pad_components(
                lambda x: np.ones_like(np.asarray(x, dtype=np.float64),
                                       dtype=np.complex128), dim),
            deriv_plus=dp, deriv_minus=dm, name="one")
    if name == "cos":
        ls = np.arange(1, MAX_DERIVATIVE_ORDER + 1)
        plus = np.cos(1.0 + ls * np.pi / 2).astype(np.complex128)
        minus = np.cos(-1.0 + ls * np.pi / 2).astype(np.complex128)
        dp, dm = _tables_first_component(dim, plus, minus)
        return AmplitudeSpec(
            components=_pad_components(
                lambda x: np.cos(np.asarray(x, dtype=np.float64)).astype(np.complex128),
                dim),
            deriv_plus=dp, deriv_minus=dm, name="cos")
    if name == "rational_runge":
        return rational_amplitude(Polynomial([0.0, 1.0]), Polynomial([0.02, 0.0, 1.0]),
                                  dim, name="rational_runge")
    if name.startswith("manufactured:"):
        return manufactured_amplitude(system, int(name.split(":", 1)[1]))
    raise KeyError(f"unknown amplitude {name!r}; available: one, cos, "
                   f"rational_runge, manufactured:<n>")
