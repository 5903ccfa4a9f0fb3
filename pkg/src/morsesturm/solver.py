"""Fixed-grid integration of the second-order linear system J'' = R(t) J.

The integrator is an explicit Dormand-Prince 5(4) pair marching over a fixed
master grid on [0, 1]. Each master cell is subdivided into a uniform number
of substeps chosen from the embedded error estimate, so the reported
solution always lives on the master grid while the local error respects the
requested tolerance. Dense output between master nodes is cubic Hermite on
(value, derivative) pairs; the derivative gets its own Hermite built from
(derivative, second derivative) pairs, with the second derivative supplied
exactly by the differential equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._roots import golden_min
from .errors import IntegrationFailure, MissingSeed, NotTimelike
from .forms import MetricForm, Subspace, g_orthogonal_complement
from .problem import CoefficientPath, MorseSturmProblem

__all__ = [
    "DEFAULT_GRID_SIZE",
    "DEFAULT_ODE_TOL",
    "FundamentalSolution",
    "TimelikeWitness",
    "integrate_linear_second_order",
    "solve_fundamental",
    "solve_witness",
    "wronskian_drift",
]

DEFAULT_GRID_SIZE = 2048
DEFAULT_ODE_TOL = 1e-10

#: Minimum number of sample points certifying the witness margin.
MIN_MARGIN_POINTS = 512

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_ERR = _B5 - _B4

_MAX_TOL_ATTEMPTS = 8


def _sweep(coefficient: CoefficientPath, y0: np.ndarray, yp0: np.ndarray,
           ts: np.ndarray, substeps: int) -> tuple[np.ndarray, np.ndarray, float]:
    """One full integration pass; returns node values, node derivatives and
    the worst local relative error estimate."""
    n_cells = ts.size - 1
    n, m = y0.shape
    h_cell = ts[1] - ts[0]
    h = h_cell / substeps

    # Every stage time for the whole sweep, evaluated in one vectorized call.
    starts = (ts[:-1, None] + np.arange(substeps)[None, :] * h).ravel()
    stage_ts = (starts[:, None] + _C[None, :] * h).ravel()
    r_stages = coefficient(stage_ts).reshape(starts.size, 7, n, n)

    vals = np.empty((n_cells + 1, n, m))
    ders = np.empty((n_cells + 1, n, m))
    vals[0], ders[0] = y0, yp0

    state = np.vstack([y0, yp0])  # (2n, m)
    worst = 0.0
    ks = np.empty((7, 2 * n, m))
    step = 0
    for cell in range(n_cells):
        for _ in range(substeps):
            r_here = r_stages[step]
            for i in range(7):
                if i == 0:
                    y_stage = state
                else:
                    incr = np.tensordot(_A[i], ks[:i], axes=(0, 0))
                    y_stage = state + h * incr
                ks[i, :n] = y_stage[n:]
                ks[i, n:] = r_here[i] @ y_stage[:n]
            y_new = state + h * np.tensordot(_B5, ks, axes=(0, 0))
            err_vec = h * np.tensordot(_ERR, ks, axes=(0, 0))
            scale = max(1.0, float(np.max(np.abs(y_new))))
            worst = max(worst, float(np.max(np.abs(err_vec))) / scale)
            state = y_new
            step += 1
        vals[cell + 1] = state[:n]
        ders[cell + 1] = state[n:]
    return vals, ders, worst


def integrate_linear_second_order(
    coefficient: CoefficientPath,
    y0: np.ndarray,
    yp0: np.ndarray,
    grid_size: int = DEFAULT_GRID_SIZE,
    ode_tol: float = DEFAULT_ODE_TOL,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, int]:
    """Integrate Y'' = R(t) Y over [0, 1] on a fixed master grid.

    Initial data may be a matrix of stacked columns or a single vector.
    Returns (ts, values, derivatives, err_estimate, substeps). The substep
    count per master cell is raised from the embedded 5(4) error estimate
    until the worst local relative error is below ode_tol; if eight
    escalations do not get there, IntegrationFailure is raised.
    """
    y0 = np.atleast_2d(np.asarray(y0, dtype=float))
    yp0 = np.atleast_2d(np.asarray(yp0, dtype=float))
    if y0.shape[0] == 1 and coefficient.n != 1:
        y0, yp0 = y0.T, yp0.T
    ts = np.linspace(0.0, 1.0, grid_size + 1)

    substeps = 1
    for attempt in range(_MAX_TOL_ATTEMPTS):
        vals, ders, worst = _sweep(coefficient, y0, yp0, ts, substeps)
        if worst <= ode_tol:
            return ts, vals, ders, worst, substeps
        if attempt == 0:
            # Fifth-order local error: scale the substep count directly.
            factor = (worst / (0.5 * ode_tol)) ** 0.2
            substeps = max(substeps + 1, int(np.ceil(substeps * factor)))
        else:
            substeps = int(np.ceil(substeps * 1.6))
        if substeps > 4096:
            break
    raise IntegrationFailure(
        f"local error {worst:.3e} exceeds ode_tol={ode_tol:.1e} even at "
        f"{substeps} substeps per cell"
    )


class _HermitePath:
    """Piecewise-cubic Hermite interpolant of a matrix-valued grid function
    with known derivatives at the nodes."""

    def __init__(self, ts: np.ndarray, values: np.ndarray, derivs: np.ndarray):
        self.ts = ts
        self.values = values
        self.derivs = derivs
        self._h = ts[1] - ts[0]

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(
            np.searchsorted(self.ts, t_arr, side="right") - 1, 0, self.ts.size - 2
        )
        h = self._h
        s = (t_arr - self.ts[idx]) / h
        s2, s3 = s * s, s * s * s
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        extra = (1,) * (self.values.ndim - 1)
        out = (
            h00.reshape(-1, *extra) * self.values[idx]
            + (h * h10).reshape(-1, *extra) * self.derivs[idx]
            + h01.reshape(-1, *extra) * self.values[idx + 1]
            + (h * h11).reshape(-1, *extra) * self.derivs[idx + 1]
        )
        if np.ndim(t) == 0:
            return out[0]
        return out


@dataclass(frozen=True)
class FundamentalSolution:
    """A basis of solutions respecting the initial-condition subspace.

    The first ``k`` columns start on the boundary subspace with velocities
    fixed by the boundary operator; the remaining columns start at zero with
    Euclidean-orthonormal velocities spanning the g-orthogonal complement.
    ``value`` and ``derivative`` evaluate the dense output anywhere in
    [0, 1].
    """

    problem: MorseSturmProblem
    ts: np.ndarray
    columns: np.ndarray
    columns_deriv: np.ndarray
    err_estimate: float
    substeps: int
    _dense_value: _HermitePath = field(repr=False)
    _dense_deriv: _HermitePath = field(repr=False)

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def boundary_dim(self) -> int:
        return self.problem.boundary.dim

    def value(self, t) -> np.ndarray:
        return self._dense_value(t)

    def derivative(self, t) -> np.ndarray:
        return self._dense_deriv(t)


def solve_fundamental(
    problem: MorseSturmProblem,
    grid_size: int = DEFAULT_GRID_SIZE,
    ode_tol: float = DEFAULT_ODE_TOL,
) -> FundamentalSolution:
    """Integrate the full solution family determined by the boundary data."""
    n = problem.n
    k = problem.boundary.dim
    y0 = np.zeros((n, n))
    yp0 = np.zeros((n, n))
    if k > 0:
        basis = problem.boundary.space.basis
        y0[:, :k] = basis
        yp0[:, :k] = -(basis @ problem.boundary.operator)
    if k < n:
        comp = g_orthogonal_complement(problem.metric, problem.boundary.space)
        yp0[:, k:] = comp.orthonormalized().basis

    ts, vals, ders, err, substeps = integrate_linear_second_order(
        problem.coefficient, y0, yp0, grid_size, ode_tol
    )
    second = np.einsum("tij,tjk->tik", problem.coefficient(ts), vals)
    return FundamentalSolution(
        problem=problem,
        ts=ts,
        columns=vals,
        columns_deriv=ders,
        err_estimate=err,
        substeps=substeps,
        _dense_value=_HermitePath(ts, vals, ders),
        _dense_deriv=_HermitePath(ts, ders, second),
    )


@dataclass(frozen=True)
class TimelikeWitness:
    """A solution of the same system that stays strictly timelike.

    ``min_margin`` is the certified minimum of -g(Y, Y) over [0, 1],
    evaluated on at least MIN_MARGIN_POINTS grid points and refined around
    the discrete minimizer.
    """

    ts: np.ndarray
    points: np.ndarray
    points_deriv: np.ndarray
    min_margin: float
    err_estimate: float
    residual_estimate: float
    _dense_value: _HermitePath = field(repr=False)
    _dense_deriv: _HermitePath = field(repr=False)

    def value(self, t) -> np.ndarray:
        return self._dense_value(t)[..., 0]

    def derivative(self, t) -> np.ndarray:
        return self._dense_deriv(t)[..., 0]


def solve_witness(
    problem: MorseSturmProblem,
    grid_size: int = DEFAULT_GRID_SIZE,
    ode_tol: float = DEFAULT_ODE_TOL,
    seed_value: np.ndarray | None = None,
    seed_velocity: np.ndarray | None = None,
) -> TimelikeWitness:
    """Integrate a witness candidate and certify that it stays timelike.

    The seed comes from the arguments when given, otherwise from the
    problem's stored witness seed (MissingSeed if neither exists). The
    symmetry form must have exactly one negative direction for "timelike"
    to mean anything; NotTimelike is raised if the certified margin is not
    strictly positive.
    """
    if problem.metric.inertia.n_minus != 1:
        raise ValueError(
            "witness solves need a symmetry form with exactly one negative "
            f"direction, got inertia {problem.metric.inertia.as_tuple()}"
        )
    if seed_value is None or seed_velocity is None:
        if problem.witness_seed is None:
            raise MissingSeed(
                "no witness seed: pass seed_value/seed_velocity or store "
                "y_seed in the problem"
            )
        seed_value = problem.witness_seed.value
        seed_velocity = problem.witness_seed.velocity

    grid_size = max(grid_size, MIN_MARGIN_POINTS)
    y0 = np.asarray(seed_value, dtype=float).reshape(-1, 1)
    yp0 = np.asarray(seed_velocity, dtype=float).reshape(-1, 1)
    ts, vals, ders, err, _ = integrate_linear_second_order(
        problem.coefficient, y0, yp0, grid_size, ode_tol
    )
    second = np.einsum("tij,tjk->tik", problem.coefficient(ts), vals)
    dense_value = _HermitePath(ts, vals, ders)
    dense_deriv = _HermitePath(ts, ders, second)

    g_mat = problem.metric.matrix

    def margin_at(t: float) -> float:
        y = dense_value(t)[:, 0]
        return -float(y @ g_mat @ y)

    margins = -np.einsum("tiz,ij,tjz->t", vals, g_mat, vals)
    j0 = int(np.argmin(margins))
    lo = ts[max(j0 - 1, 0)]
    hi = ts[min(j0 + 1, ts.size - 1)]
    _, refined = golden_min(margin_at, float(lo), float(hi), tol=1e-10)
    min_margin = min(float(np.min(margins)), refined)
    if min_margin <= 0.0:
        raise NotTimelike(
            f"witness loses timelike character: min -g(Y, Y) = {min_margin:.3e}"
        )

    mids = 0.5 * (ts[:-1] + ts[1:])
    h = ts[1] - ts[0]
    # Hermite derivative of the value interpolant at cell midpoints:
    # d/dt H[v](mid) = 1.5 (v_{i+1} - v_i)/h - 0.25 (d_i + d_{i+1}).
    approx = 1.5 * (vals[1:] - vals[:-1]) / h - 0.25 * (ders[1:] + ders[:-1])
    residual = float(np.max(np.abs(approx - dense_deriv(mids))))

    return TimelikeWitness(
        ts=ts,
        points=vals[:, :, 0],
        points_deriv=ders[:, :, 0],
        min_margin=min_margin,
        err_estimate=err,
        residual_estimate=residual,
        _dense_value=dense_value,
        _dense_deriv=dense_deriv,
    )


def wronskian_drift(solution: FundamentalSolution) -> float:
    """Maximum deviation of the solution-family pairing from its initial
    value across the master grid.

    The conserved pairing is W(t) = M'(t)^T G M(t) - M(t)^T G M'(t); for
    admissible initial data W(0) vanishes identically, so the drift measures
    accumulated integration error.
    """
    g_mat = solution.problem.metric.matrix
    m, mp = solution.columns, solution.columns_deriv
    w = np.einsum("tji,jk,tkl->til", mp, g_mat, m) - np.einsum(
        "tji,jk,tkl->til", m, g_mat, mp
    )
    w0 = w[0]
    return float(np.max(np.abs(w - w0)))
