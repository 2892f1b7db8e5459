"""Accelerated Levin collocation on Clenshaw-Curtis points.

The collocation operator, row-scaled by (1 - x^2) and with denominators
cleared by r(x), acts on the Chebyshev basis as a banded matrix.  Folding
the high-order columns back onto the grid (aliasing) yields a finite
banded system whose interior part is solved through one DCT-I per
component plus a banded LU; the two boundary degrees of freedom per
component that the row scaling annihilates are recovered from precomputed
null vectors through a small dense bordering system.  Endpoint-derivative
conditions (s >= 1) add 2s tail coefficients per component, resolved by
auxiliary solves against the same factorization and one dense
2Ms x 2Ms system.

All solver entry points are pure functions of their problem; engines and
results are immutable once returned.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .banded import (
    SingularMatrixError,
    banded_lu_factor,
    banded_solve,
    dense_solve,
    hockney_permutation,
    reorder_block_banded,
)
from .chebyshev import (
    ONE_MINUS_X2,
    BandedMatrix,
    ClenshawCurtisGrid,
    Polynomial,
    UnsupportedRegimeError,
    apply_collocation_matrix,
    apply_inverse_collocation,
    build_banded_operator,
    clenshaw_curtis_points,
    endpoint_derivative_row,
    fold_chebyshev_tail,
    fold_operator,
)
from .oscillator import AmplitudeSpec, OscillatorSystem


class UnsolvableProblemError(RuntimeError):
    """Both the fast path and the dense reference path failed."""


#: Solves whose scaled residual exceeds this factor times omega * max|f|
#: are flagged (not rejected).
RESIDUAL_FLAG_FACTOR = 1e-5


@dataclass(frozen=True)
class LevinProblem:
    """A quadrature task: oscillator system, amplitude, nu interior points, order s."""

    system: OscillatorSystem
    amplitude: AmplitudeSpec
    nu: int
    s: int = 0

    def __post_init__(self):
        if self.nu < 2 or self.nu % 2 != 0:
            raise ValueError(f"nu must be even and >= 2, got {self.nu}")
        if self.s < 0:
            raise ValueError("s must be >= 0")
        if self.amplitude.dim != self.system.dim:
            raise ValueError(
                f"amplitude has {self.amplitude.dim} components, "
                f"system has {self.system.dim}"
            )
        if self.s >= 1 and self.amplitude.max_derivative_order < self.s:
            raise ValueError(
                f"s={self.s} requires amplitude endpoint derivatives up to "
                f"order {self.s}; only {self.amplitude.max_derivative_order} supplied"
            )

    @property
    def n_basis(self) -> int:
        return self.nu + 2 * self.s + 2


@dataclass(frozen=True)
class QuadratureResult:
    """Quadrature value plus solve diagnostics.

    ``coeffs[k]`` holds the nu+2s+2 Chebyshev coefficients of the k-th
    solution component; the boundary evaluation of those coefficients
    against w(+-1) reproduces ``value``.
    """

    value: complex
    coeffs: np.ndarray
    residual: float
    path: str
    wall_time: float
    flagged: bool = False


# ---------------------------------------------------------------------------
# Engine: everything that depends on (system, nu, s) but not on f
# ---------------------------------------------------------------------------

class CollocationEngine:
    """Factored fast-path machinery, reusable across right-hand sides."""

    def __init__(self, system: OscillatorSystem, nu: int, s: int = 0):
        m = system.dim
        self.system = system
        self.nu = nu
        self.s = s
        self.grid = clenshaw_curtis_points(nu)

        # (1-x^2)-scaled, r-cleared operator blocks on a generous basis range.
        p_diff = ONE_MINUS_X2 * system.r
        p_mult = [[ONE_MINUS_X2 * system.r_g[j][i] for j in range(m)] for i in range(m)]
        max_deg = max(max(p.degree for row in p_mult for p in row), p_diff.degree)
        n_build = nu + 2 * s + 2 + max_deg + 4
        zero = Polynomial([0.0])
        self.blocks_big = [
            [build_banded_operator(p_diff if i == j else zero, p_mult[i][j], n_build)
             for j in range(m)]
            for i in range(m)
        ]
        lbw = max(b.lower_bw for row in self.blocks_big for b in row)
        self.fold_depth = lbw - 1
        if nu <= self.fold_depth:
            raise UnsupportedRegimeError(
                f"nu={nu} too small for operator bandwidth (need nu > {self.fold_depth})"
            )
        self.folded = [
            [fold_operator(self.blocks_big[i][j], nu, self.fold_depth) for j in range(m)]
            for i in range(m)
        ]

        mids = [[blk.principal_submatrix(1, nu + 1) for blk in row] for row in self.folded]
        self.perm = hockney_permutation(m, nu)
        self.reordered = reorder_block_banded(mids, self.perm)
        self.lu = banded_lu_factor(self.reordered)

        # Unscaled collocation rows at the endpoints: rows_plus[i, j, n] is the
        # coefficient of alpha_n^[j] in the i-th cleared equation at x = +1.
        n_head = nu + 2
        ns = np.arange(n_head, dtype=np.float64)
        tp = ns * ns                      # T_n'(+1)
        tm = -(ns * ns) * (-1.0) ** ns    # T_n'(-1) = (-1)^(n-1) n^2
        sp = np.ones(n_head)              # T_n(+1)
        sm = (-1.0) ** ns                 # T_n(-1)
        r_p = complex(system.r(1.0))
        r_m = complex(system.r(-1.0))
        self.rows_plus = np.empty((m, m, n_head), dtype=np.complex128)
        self.rows_minus = np.empty((m, m, n_head), dtype=np.complex128)
        for i in range(m):
            for j in range(m):
                gt_p = complex(system.r_g[j][i](1.0))
                gt_m = complex(system.r_g[j][i](-1.0))
                self.rows_plus[i, j] = (r_p * tp if i == j else 0.0) + gt_p * sp
                self.rows_minus[i, j] = (r_m * tm if i == j else 0.0) + gt_m * sm

        # Null vectors of the projected system: v = e_{k,end} + interior part,
        # one banded back-solve per endpoint column of the folded operator.
        rhs = np.zeros((m * nu, 2 * m), dtype=np.complex128)
        for k in range(m):
            for e_idx, end in enumerate((0, nu + 1)):
                col = 2 * k + e_idx
                stacked = np.concatenate(
                    [-self.folded[i][k].column(end)[1 : nu + 1] for i in range(m)]
                )
                rhs[:, col] = stacked[self.perm.perm]
        sol = banded_solve(self.lu, rhs)
        self.null_vectors = np.zeros((2 * m, m, n_head), dtype=np.complex128)
        inv = self.perm.inverse
        for k in range(m):
            for e_idx, end in enumerate((0, nu + 1)):
                col = 2 * k + e_idx
                unperm = sol[:, col][inv]
                self.null_vectors[col, :, 1 : nu + 1] = unperm.reshape(m, nu)
                self.null_vectors[col, k, end] += 1.0

        # Bordering matrix: the 2M unscaled endpoint rows applied to the
        # 2M null vectors.
        self.border = np.empty((2 * m, 2 * m), dtype=np.complex128)
        for i in range(m):
            for col in range(2 * m):
                v = self.null_vectors[col]
                self.border[2 * i, col] = np.sum(self.rows_plus[i] * v)
                self.border[2 * i + 1, col] = np.sum(self.rows_minus[i] * v)

        self.m = m

    # -- single cleared solve -----------------------------------------------

    def solve_cleared(self, rhs_scaled_mid: np.ndarray, rhs_plus: np.ndarray,
                      rhs_minus: np.ndarray) -> np.ndarray:
        """Solve the cleared collocation system A alpha = b on the nu+2 head.

        ``rhs_scaled_mid[i, m]`` holds (1 - c_m^2) b_i(c_m) at the interior
        points m = 1..nu; ``rhs_plus`` / ``rhs_minus`` the unscaled values
        b_i(+-1).  Returns coefficients of shape (M, nu+2).
        """
        m, nu = self.m, self.nu
        z_mid = np.empty((m, nu), dtype=np.complex128)
        full = np.zeros(nu + 2, dtype=np.complex128)
        for i in range(m):
            full[1 : nu + 1] = rhs_scaled_mid[i]
            z_mid[i] = apply_inverse_collocation(full)[1 : nu + 1]
        x = banded_solve(self.lu, z_mid.reshape(m * nu)[self.perm.perm])
        alpha0 = np.zeros((m, nu + 2), dtype=np.complex128)
        alpha0[:, 1 : nu + 1] = x[self.perm.inverse].reshape(m, nu)

        rhs_border = np.empty(2 * m, dtype=np.complex128)
        for i in range(m):
            rhs_border[2 * i] = rhs_plus[i] - np.sum(self.rows_plus[i] * alpha0)
            rhs_border[2 * i + 1] = rhs_minus[i] - np.sum(self.rows_minus[i] * alpha0)
        delta = dense_solve(self.border, rhs_border)
        return alpha0 + np.tensordot(delta, self.null_vectors, axes=(0, 0))

    # -- auxiliary tail columns (s >= 1) --------------------------------------

    def aux_scaled_values(self, k: int, j: int) -> np.ndarray:
        """(1-x^2)-scaled cleared operator applied to e_k T_{nu+1+j}, at the grid."""
        n_col = self.nu + 1 + j
        out = np.empty((self.m, self.nu + 2), dtype=np.complex128)
        for i in range(self.m):
            folded = fold_chebyshev_tail(self.blocks_big[i][k].column(n_col), self.nu)
            out[i] = apply_collocation_matrix(folded, self.grid)
        return out

    def aux_endpoint_values(self, k: int, j: int):
        """Unscaled cleared operator applied to e_k T_{nu+1+j} at x = +-1."""
        n_col = self.nu + 1 + j
        nn = float(n_col) ** 2
        sgn = -1.0 if n_col % 2 else 1.0
        h_plus = np.empty(self.m, dtype=np.complex128)
        h_minus = np.empty(self.m, dtype=np.complex128)
        r_p = complex(self.system.r(1.0))
        r_m = complex(self.system.r(-1.0))
        for i in range(self.m):
            gt_p = complex(self.system.r_g[k][i](1.0))
            gt_m = complex(self.system.r_g[k][i](-1.0))
            h_plus[i] = (r_p * nn if i == k else 0.0) + gt_p
            h_minus[i] = (r_m * (-sgn) * nn if i == k else 0.0) + gt_m * sgn
        return h_plus, h_minus

    # -- residual --------------------------------------------------------------

    def residual(self, head: np.ndarray, tail_flat: np.ndarray | None,
                 f_values: np.ndarray, aux_scaled: list | None) -> float:
        """Max collocation residual |L_omega q - f| over all grid points.

        The interior rows are checked in scaled cleared form and divided
        back by (1 - c_m^2) r(c_m); the endpoint rows (recovered by the
        bordering solve) are checked directly.
        """
        m, nu = self.m, self.nu
        grid = self.grid
        r_vals = self.system.r(grid.points)
        scaled_target = grid.sin2 * r_vals * f_values
        rp = complex(self.system.r(1.0))
        rm = complex(self.system.r(-1.0))
        h_plus_tot = np.zeros(m, dtype=np.complex128)
        h_minus_tot = np.zeros(m, dtype=np.complex128)
        if tail_flat is not None:
            for idx, (k, j) in enumerate(self._tail_index_pairs()):
                hp, hm = self.aux_endpoint_values(k, j)
                h_plus_tot += tail_flat[idx] * hp
                h_minus_tot += tail_flat[idx] * hm
        resid = 0.0
        for i in range(m):
            acc = np.zeros(nu + 2, dtype=np.complex128)
            for j in range(m):
                acc += self.folded[i][j].matvec(head[j])
            y = apply_collocation_matrix(acc, grid)
            if tail_flat is not None:
                for idx, vals in enumerate(aux_scaled):
                    y = y + tail_flat[idx] * vals[i]
            interior = np.abs(y[1:-1] - scaled_target[i, 1:-1]) / (
                grid.sin2[1:-1] * np.abs(r_vals[1:-1])
            )
            resid = max(resid, float(interior.max()))
            end_p = np.sum(self.rows_plus[i] * head) + h_plus_tot[i]
            end_m = np.sum(self.rows_minus[i] * head) + h_minus_tot[i]
            resid = max(resid, abs(end_p - rp * f_values[i, 0]) / abs(rp))
            resid = max(resid, abs(end_m - rm * f_values[i, -1]) / abs(rm))
        return resid

    def _tail_index_pairs(self):
        return [(k, j) for k in range(self.m) for j in range(1, 2 * self.s + 1)]


# ---------------------------------------------------------------------------
# Endpoint-derivative (tail) machinery for s >= 1
# ---------------------------------------------------------------------------

def _poly_endpoint_derivs(p: Polynomial, l_max: int) -> tuple[np.ndarray, np.ndarray]:
    """d^p/dx^p at +1 and -1 for p = 0..l_max, by repeated differentiation."""
    plus = np.empty(l_max + 1, dtype=np.complex128)
    minus = np.empty(l_max + 1, dtype=np.complex128)
    q = p
    for l in range(l_max + 1):
        plus[l] = q(1.0)
        minus[l] = q(-1.0)
        q = q.deriv()
    return plus, minus


class _TailAssembler:
    """Rows of the cleared derivative conditions d^l [r L q]_i (+-1)."""

    def __init__(self, engine: CollocationEngine):
        self.engine = engine
        s = engine.s
        sys = engine.system
        m = engine.m
        self.r_derivs = _poly_endpoint_derivs(sys.r, s)
        self.gt_derivs = [
            [_poly_endpoint_derivs(sys.r_g[j][i], s) for j in range(m)]
            for i in range(m)
        ]
        n_head = engine.nu + 2
        n_all = engine.nu + 2 * s + 2
        # Endpoint derivative tables for T_n, orders 0..s+1.
        self.t_plus = np.stack(
            [endpoint_derivative_row(n_all - 1, l, +1) for l in range(s + 2)]
        )
        self.t_minus = np.stack(
            [endpoint_derivative_row(n_all - 1, l, -1) for l in range(s + 2)]
        )
        self.n_head = n_head

    def row_on_head(self, i: int, l: int, sign: int, head: np.ndarray) -> complex:
        """Apply d^l [r L .]_i (sign 1) to coefficients on the nu+2 head."""
        eng = self.engine
        t_tab = self.t_plus if sign > 0 else self.t_minus
        e_idx = 0 if sign > 0 else 1
        total = 0.0 + 0.0j
        for p in range(l + 1):
            c = math.comb(l, p)
            r_p = self.r_derivs[e_idx][p]
            total += c * r_p * np.dot(head[i], t_tab[l + 1 - p, : self.n_head])
            for j in range(eng.m):
                g_p = self.gt_derivs[i][j][e_idx][p]
                total += c * g_p * np.dot(head[j], t_tab[l - p, : self.n_head])
        return total

    def row_on_tail_basis(self, i: int, l: int, sign: int, k: int, j: int) -> complex:
        """Apply d^l [r L .]_i (sign 1) to the basis element e_k T_{nu+1+j}."""
        eng = self.engine
        t_tab = self.t_plus if sign > 0 else self.t_minus
        e_idx = 0 if sign > 0 else 1
        n_col = eng.nu + 1 + j
        total = 0.0 + 0.0j
        for p in range(l + 1):
            c = math.comb(l, p)
            if i == k:
                total += c * self.r_derivs[e_idx][p] * t_tab[l + 1 - p, n_col]
            total += c * self.gt_derivs[i][k][e_idx][p] * t_tab[l - p, n_col]
        return total

    def cleared_f_derivative(self, amplitude: AmplitudeSpec, i: int, l: int,
                             sign: int) -> complex:
        """d^l [r f_i] at sign 1 via Leibniz on exact r derivatives."""
        e_idx = 0 if sign > 0 else 1
        total = 0.0 + 0.0j
        for p in range(l + 1):
            f_der = amplitude.derivative(l - p, sign)[i]
            total += math.comb(l, p) * self.r_derivs[e_idx][p] * f_der
        return total


# ---------------------------------------------------------------------------
# Solver tiers
# ---------------------------------------------------------------------------

def _solve_fast(problem: LevinProblem, path: str) -> QuadratureResult:
    t0 = time.perf_counter()
    eng = CollocationEngine(problem.system, problem.nu, problem.s)
    grid = eng.grid
    m, nu, s = eng.m, eng.nu, eng.s

    f_values = problem.amplitude.values(grid.points)
    r_vals = problem.system.r(grid.points)
    rhs_scaled_mid = (grid.sin2 * r_vals * f_values)[:, 1:-1]
    rhs_plus = r_vals[0] * f_values[:, 0]
    rhs_minus = r_vals[-1] * f_values[:, -1]

    if s == 0:
        head = eng.solve_cleared(rhs_scaled_mid, rhs_plus, rhs_minus)
        tail_flat = None
        aux_scaled = None
        coeffs = head
    else:
        beta = eng.solve_cleared(rhs_scaled_mid, rhs_plus, rhs_minus)
        pairs = eng._tail_index_pairs()
        aux_scaled = []
        betas_aux = []
        for (k, j) in pairs:
            vals = eng.aux_scaled_values(k, j)
            h_plus, h_minus = eng.aux_endpoint_values(k, j)
            aux_scaled.append(vals)
            betas_aux.append(
                eng.solve_cleared(-vals[:, 1:-1], -h_plus, -h_minus)
            )
        asm = _TailAssembler(eng)
        n_t = len(pairs)
        mat = np.empty((n_t, n_t), dtype=np.complex128)
        rhs = np.empty(n_t, dtype=np.complex128)
        row = 0
        for i in range(m):
            for l in range(1, s + 1):
                for sign in (+1, -1):
                    for col, (k, j) in enumerate(pairs):
                        mat[row, col] = (
                            asm.row_on_head(i, l, sign, betas_aux[col])
                            + asm.row_on_tail_basis(i, l, sign, k, j)
                        )
                    rhs[row] = (
                        asm.cleared_f_derivative(problem.amplitude, i, l, sign)
                        - asm.row_on_head(i, l, sign, beta)
                    )
                    row += 1
        tail_flat = dense_solve(mat, rhs)
        head = beta.copy()
        for col in range(n_t):
            head += tail_flat[col] * betas_aux[col]
        coeffs = np.zeros((m, nu + 2 * s + 2), dtype=np.complex128)
        coeffs[:, : nu + 2] = head
        coeffs[:, nu + 2 :] = tail_flat.reshape(m, 2 * s)

    value = _boundary_value(problem.system, coeffs)
    resid = eng.residual(head, tail_flat, f_values, aux_scaled)
    f_scale = float(np.max(np.abs(f_values)))
    flagged = resid > RESIDUAL_FLAG_FACTOR * problem.system.omega * max(f_scale, 1e-300)
    coeffs = coeffs.copy()
    coeffs.setflags(write=False)
    return QuadratureResult(
        value=value,
        coeffs=coeffs,
        residual=resid,
        path=path,
        wall_time=time.perf_counter() - t0,
        flagged=flagged,
    )


def _boundary_value(system: OscillatorSystem, coeffs: np.ndarray) -> complex:
    signs = (-1.0) ** np.arange(coeffs.shape[1])
    q_plus = coeffs.sum(axis=1)
    q_minus = coeffs @ signs
    return complex(np.dot(q_plus, system.w_plus) - np.dot(q_minus, system.w_minus))


def solve_scalar_s0(problem: LevinProblem) -> QuadratureResult:
    """Fast path for M = 1, s = 0."""
    if problem.system.dim != 1 or problem.s != 0:
        raise ValueError("solve_scalar_s0 requires M = 1 and s = 0")
    return _solve_fast(problem, "scalar_s0")


def solve_scalar_s(problem: LevinProblem) -> QuadratureResult:
    """Fast path for M = 1, s >= 1 (endpoint-derivative conditions)."""
    if problem.system.dim != 1 or problem.s < 1:
        raise ValueError("solve_scalar_s requires M = 1 and s >= 1")
    return _solve_fast(problem, "scalar_s")


def solve_block_s0(problem: LevinProblem) -> QuadratureResult:
    """Fast path for M >= 2, s = 0."""
    if problem.system.dim < 2 or problem.s != 0:
        raise ValueError("solve_block_s0 requires M >= 2 and s = 0")
    return _solve_fast(problem, "block_s0")


def solve_block_s(problem: LevinProblem) -> QuadratureResult:
    """Fast path for M >= 2, s >= 1."""
    if problem.system.dim < 2 or problem.s < 1:
        raise ValueError("solve_block_s requires M >= 2 and s >= 1")
    return _solve_fast(problem, "block_s")


def quadrature(problem: LevinProblem) -> QuadratureResult:
    """Dispatch to the matching fast tier; fall back to the dense solver.

    The fast path signals trouble through singular pivots, an unsupported
    nu/bandwidth regime, or a flagged residual (all of which occur when
    omega is too small for the projected system to be trustworthy); any of
    these triggers one dense reference solve, recorded as path
    ``dense_fallback``.  If neither path produces an acceptable solution
    the problem is reported unsolvable.
    """
    if problem.system.dim == 1:
        path = "scalar_s0" if problem.s == 0 else "scalar_s"
    else:
        path = "block_s0" if problem.s == 0 else "block_s"
    fast_result = None
    try:
        fast_result = _solve_fast(problem, path)
        if not fast_result.flagged:
            return fast_result
    except (SingularMatrixError, UnsupportedRegimeError):
        pass
    from .reference import dense_levin_solve

    try:
        result = dense_levin_solve(problem)
    except (SingularMatrixError, ValueError) as exc:
        if fast_result is not None:
            # Dense is unavailable (singular or over the size guard);
            # the flagged fast result is the best we have.
            return fast_result
        raise UnsolvableProblemError(
            "both the fast path and the dense path failed"
        ) from exc
    return QuadratureResult(
        value=result.value,
        coeffs=result.coeffs,
        residual=result.residual,
        path="dense_fallback",
        wall_time=result.wall_time,
        flagged=result.flagged,
    )


# ---------------------------------------------------------------------------
# Spec-level scalar building blocks (exposed for direct testing)
# ---------------------------------------------------------------------------

def solve_interior_scalar(b_tilde: BandedMatrix, f_samples,
                          grid: ClenshawCurtisGrid) -> np.ndarray:
    """Interior solve of the scaled scalar system: P B~ P alpha0 = P C^-1 f~.

    ``f_samples`` are unscaled values f(c_m); the row scaling (1 - c_m^2)
    is applied here.  Returns the full nu+2 coefficient vector with
    alpha0[0] = alpha0[nu+1] = 0.
    """
    nu = grid.nu
    f_samples = np.asarray(f_samples, dtype=np.complex128)
    if f_samples.shape[0] != nu + 2:
        raise ValueError("f_samples must have nu + 2 entries")
    if b_tilde.n != nu + 2:
        raise ValueError("B~ must be (nu+2) x (nu+2)")
    z = apply_inverse_collocation(grid.sin2 * f_samples)
    lu = banded_lu_factor(b_tilde.principal_submatrix(1, nu + 1))
    alpha0 = np.zeros(nu + 2, dtype=np.complex128)
    alpha0[1 : nu + 1] = banded_solve(lu, z[1 : nu + 1])
    return alpha0


def null_vectors_scalar(b_tilde: BandedMatrix, grid: ClenshawCurtisGrid):
    """The two kernel vectors of the projected scalar system.

    v1 = e_0 + interior part, v2 = e_{nu+1} + interior part, with
    P A v_j = 0; the interior parts solve the same banded middle system
    against the endpoint columns of B~.
    """
    nu = grid.nu
    lu = banded_lu_factor(b_tilde.principal_submatrix(1, nu + 1))
    v1 = np.zeros(nu + 2, dtype=np.complex128)
    v2 = np.zeros(nu + 2, dtype=np.complex128)
    v1[1 : nu + 1] = banded_solve(lu, -b_tilde.column(0)[1 : nu + 1])
    v2[1 : nu + 1] = banded_solve(lu, -b_tilde.column(nu + 1)[1 : nu + 1])
    v1[0] = 1.0
    v2[nu + 1] = 1.0
    return v1, v2
