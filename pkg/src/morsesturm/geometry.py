"""Metric charts, geodesics, parallel frames, and the reduction of the
linearized geodesic flow to a constant-symmetry second-order system.

A chart supplies the metric matrix (and optionally its coordinate
partials) at arbitrary points of one coordinate patch. Geodesics are
integrated in rescaled time so every downstream problem lives on the unit
interval, a parallel frame is transported along the path, and the
linearized flow written in that frame becomes a problem the focal and
index machinery can consume directly: constant symmetry form, sampled
coefficient path, first-order boundary data carried over from the initial
submanifold germ.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    CurvatureAsymmetry,
    DegenerateMetric,
    IntegrationFailure,
    LeftChart,
)
from .forms import MetricForm, Subspace, inertia
from .problem import BoundaryData, CoefficientPath, MorseSturmProblem
from .solver import DEFAULT_ODE_TOL

__all__ = [
    "DEFAULT_H_FD",
    "DEFAULT_SAMPLES",
    "DEFAULT_TOL_SYM",
    "BUILTIN_CHARTS",
    "GeodesicPath",
    "GeodesicSeed",
    "MetricChart",
    "ParallelFrame",
    "SubmanifoldGerm",
    "chart_by_name",
    "integrate_geodesic",
    "orthonormal_frame_at",
    "parallel_frame",
    "trivialize",
    "trivialize_from_seed",
]

DEFAULT_H_FD = 1e-5
DEFAULT_SAMPLES = 513
DEFAULT_TOL_SYM = 1e-6


@dataclass(frozen=True)
class MetricChart:
    """One coordinate patch of a semi-Riemannian manifold.

    ``g_at`` maps a point (length ``dim`` array) to the symmetric metric
    matrix there. ``dg_at``, when given, must return the stacked
    coordinate partials with shape (dim, dim, dim), axis 0 being the
    differentiation direction; when absent, partials are computed by
    central differences with step ``h_fd``. Any exception raised by the
    callables, and any non-finite value they return, is reported as
    LeftChart: the evaluation point is outside the patch.
    """

    dim: int
    g_at: Callable[[np.ndarray], np.ndarray]
    dg_at: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "custom"
    h_fd: float = DEFAULT_H_FD

    def metric(self, point) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        try:
            g = np.asarray(self.g_at(point), dtype=float)
        except Exception as exc:
            raise LeftChart(
                f"metric evaluation failed at {point.tolist()}"
            ) from exc
        if g.shape != (self.dim, self.dim):
            raise ValueError(
                f"chart returned shape {g.shape}, expected ({self.dim}, {self.dim})"
            )
        if not np.all(np.isfinite(g)):
            raise LeftChart(f"metric is not finite at {point.tolist()}")
        if np.abs(g - g.T).max() > 1e-12 * max(1.0, float(np.abs(g).max())):
            raise ValueError(f"chart metric is not symmetric at {point.tolist()}")
        return 0.5 * (g + g.T)

    def metric_partials(self, point) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        if self.dg_at is not None:
            try:
                dg = np.asarray(self.dg_at(point), dtype=float)
            except Exception as exc:
                raise LeftChart(
                    f"metric partial evaluation failed at {point.tolist()}"
                ) from exc
            if dg.shape != (self.dim, self.dim, self.dim):
                raise ValueError(
                    f"chart partials have shape {dg.shape}, expected "
                    f"({self.dim}, {self.dim}, {self.dim})"
                )
            if not np.all(np.isfinite(dg)):
                raise LeftChart(
                    f"metric partials are not finite at {point.tolist()}"
                )
            return dg
        out = np.empty((self.dim, self.dim, self.dim))
        for d in range(self.dim):
            shift = np.zeros(self.dim)
            shift[d] = self.h_fd
            out[d] = (self.metric(point + shift) - self.metric(point - shift)) / (
                2.0 * self.h_fd
            )
        return out

    def christoffel(self, point) -> np.ndarray:
        """Connection symbols as an array G[a, b, c], upper index first."""
        point = np.asarray(point, dtype=float)
        g = self.metric(point)
        dg = self.metric_partials(point)
        lower = 0.5 * (dg.transpose(1, 0, 2) + dg.transpose(2, 1, 0) - dg)
        try:
            ginv = np.linalg.inv(g)
        except np.linalg.LinAlgError as exc:
            raise DegenerateMetric(
                f"chart metric is singular at {point.tolist()}"
            ) from exc
        return np.einsum("ad,dbc->abc", ginv, lower)

    def christoffel_partials(self, point, step: float | None = None) -> np.ndarray:
        """Central differences of the symbols, axis 0 the derivative direction."""
        point = np.asarray(point, dtype=float)
        h = self.h_fd if step is None else float(step)
        out = np.empty((self.dim,) * 4)
        for d in range(self.dim):
            shift = np.zeros(self.dim)
            shift[d] = h
            out[d] = (
                self.christoffel(point + shift) - self.christoffel(point - shift)
            ) / (2.0 * h)
        return out


@dataclass(frozen=True)
class GeodesicSeed:
    """Initial point, initial velocity, and parameter length of a geodesic.

    The geodesic runs over chart time [0, T] and is rescaled to the unit
    interval on output, so T controls how much of the curve the downstream
    problem sees.
    """

    x0: np.ndarray
    v0: np.ndarray
    T: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "v0", np.asarray(self.v0, dtype=float))
        object.__setattr__(self, "T", float(self.T))
        if not (np.all(np.isfinite(self.x0)) and np.all(np.isfinite(self.v0))):
            raise ValueError("seed point and velocity must be finite")
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ValueError(f"parameter length must be positive, got {self.T}")


@dataclass(frozen=True)
class SubmanifoldGerm:
    """First-order data of the initial submanifold at the geodesic start.

    ``tangent_basis`` columns span the tangent space (n x k, k = 0 allowed
    for a single point); ``second_fundamental`` is the shape operator in
    the direction of the initial velocity, written as a k x k matrix in
    tangent_basis coordinates. Orthogonality to the velocity and
    nondegeneracy of the metric on the span are checked at reduction time,
    where the chart is available.
    """

    tangent_basis: np.ndarray
    second_fundamental: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.tangent_basis, dtype=float)
        shape = np.asarray(self.second_fundamental, dtype=float)
        if basis.ndim != 2:
            raise ValueError("tangent_basis must be 2d (columns are vectors)")
        k = basis.shape[1]
        if shape.shape != (k, k):
            raise ValueError(
                f"second_fundamental must be ({k}, {k}), got {shape.shape}"
            )
        if not (np.all(np.isfinite(basis)) and np.all(np.isfinite(shape))):
            raise ValueError("germ data must be finite")
        object.__setattr__(self, "tangent_basis", basis)
        object.__setattr__(self, "second_fundamental", shape)

    @property
    def k(self) -> int:
        return self.tangent_basis.shape[1]


@dataclass(frozen=True)
class GeodesicPath:
    """Sampled geodesic in unit time.

    Velocities are unit-time derivatives (T times the chart-time
    velocity). The dense interpolant from the integrator is kept so later
    stages can evaluate the path between samples.
    """

    chart: MetricChart
    T: float
    ts: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    conservation_drift: float
    _dense: Callable = field(repr=False, compare=False)

    def position(self, u) -> np.ndarray:
        out = np.asarray(self._dense(np.asarray(u, dtype=float)))
        n = self.chart.dim
        return out[:n] if out.ndim == 1 else out[:n].T

    def velocity(self, u) -> np.ndarray:
        out = np.asarray(self._dense(np.asarray(u, dtype=float)))
        n = self.chart.dim
        return out[n:] if out.ndim == 1 else out[n:].T


@dataclass(frozen=True)
class ParallelFrame:
    """Frame transported along a geodesic with vanishing covariant
    derivative, sampled on the geodesic grid.

    ``gram`` is the matrix of metric pairings of the frame legs at the
    start; parallelism keeps it constant along the path up to integration
    error, recorded as ``gram_drift``. This constant matrix is the
    symmetry form of the reduced problem.
    """

    chart: MetricChart
    ts: np.ndarray
    frames: np.ndarray
    gram: np.ndarray
    gram_drift: float
    _dense: Callable = field(repr=False, compare=False)

    def at(self, u) -> np.ndarray:
        out = np.asarray(self._dense(np.asarray(u, dtype=float)))
        n = self.chart.dim
        if out.ndim == 1:
            return out.reshape(n, n)
        return out.T.reshape(-1, n, n)


def integrate_geodesic(
    chart: MetricChart,
    seed: GeodesicSeed,
    ode_tol: float = DEFAULT_ODE_TOL,
    samples: int = DEFAULT_SAMPLES,
) -> GeodesicPath:
    """Integrate the geodesic equation over the rescaled unit interval.

    The chart-time interval [0, T] maps to [0, 1], which simply scales
    the initial velocity by T (affine reparameterizations preserve
    geodesics). The metric pairing of the velocity with itself is
    conserved along exact geodesics; its worst relative drift over the
    samples is recorded on the returned path.
    """
    n = chart.dim
    x0 = np.asarray(seed.x0, dtype=float)
    v0 = seed.T * np.asarray(seed.v0, dtype=float)
    if x0.shape != (n,) or v0.shape != (n,):
        raise ValueError(f"seed data must have length {n}")

    def rhs(u, state):
        x, v = state[:n], state[n:]
        gamma = chart.christoffel(x)
        acc = -np.einsum("abc,b,c->a", gamma, v, v)
        return np.concatenate([v, acc])

    sol = solve_ivp(
        rhs,
        (0.0, 1.0),
        np.concatenate([x0, v0]),
        method="DOP853",
        rtol=ode_tol,
        atol=0.01 * ode_tol,
        dense_output=True,
    )
    if not sol.success:
        raise IntegrationFailure(f"geodesic integration failed: {sol.message}")

    ts = np.linspace(0.0, 1.0, int(samples))
    states = sol.sol(ts)
    xs = states[:n].T.copy()
    vs = states[n:].T.copy()
    speeds = np.array([v @ chart.metric(x) @ v for x, v in zip(xs, vs)])
    drift = float(np.abs(speeds - speeds[0]).max() / max(1.0, abs(speeds[0])))
    return GeodesicPath(
        chart=chart,
        T=seed.T,
        ts=ts,
        xs=xs,
        vs=vs,
        conservation_drift=drift,
        _dense=sol.sol,
    )


def orthonormal_frame_at(chart: MetricChart, point) -> np.ndarray:
    """A frame at one point whose metric Gram matrix is diag(+-1).

    Built from the eigendecomposition of the metric there; eigenvalues in
    ascending order, so negative directions come first.
    """
    g = chart.metric(point)
    eigvals, eigvecs = np.linalg.eigh(g)
    if np.abs(eigvals).min() <= 1e-12 * max(1.0, float(np.abs(eigvals).max())):
        raise DegenerateMetric(f"metric is degenerate at {np.asarray(point).tolist()}")
    return eigvecs / np.sqrt(np.abs(eigvals))


def parallel_frame(
    chart: MetricChart,
    geodesic: GeodesicPath,
    ode_tol: float = DEFAULT_ODE_TOL,
    initial_frame: np.ndarray | None = None,
) -> ParallelFrame:
    """Transport a frame along the geodesic with zero covariant derivative.

    The default initial frame is the coordinate frame (identity matrix);
    pass the result of orthonormal_frame_at to get a Gram matrix of the
    form diag(+-1) instead.
    """
    n = chart.dim
    e0 = np.eye(n) if initial_frame is None else np.asarray(initial_frame, dtype=float)
    if e0.shape != (n, n):
        raise ValueError(f"initial frame must be ({n}, {n})")
    if abs(np.linalg.det(e0)) <= 1e-12:
        raise ValueError("initial frame is singular")

    def rhs(u, flat):
        x = geodesic.position(u)
        v = geodesic.velocity(u)
        m = np.einsum("abc,b->ac", chart.christoffel(x), v)
        return (-(m @ flat.reshape(n, n))).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, 1.0),
        e0.ravel(),
        method="DOP853",
        rtol=ode_tol,
        atol=0.01 * ode_tol,
        dense_output=True,
    )
    if not sol.success:
        raise IntegrationFailure(f"frame transport failed: {sol.message}")

    frames = sol.sol(geodesic.ts).T.reshape(-1, n, n)
    grams = np.stack(
        [e.T @ chart.metric(x) @ e for x, e in zip(geodesic.xs, frames)]
    )
    gram = grams[0]
    drift = float(
        np.abs(grams - gram).max() / max(1.0, float(np.abs(gram).max()))
    )
    return ParallelFrame(
        chart=chart,
        ts=geodesic.ts,
        frames=frames,
        gram=gram,
        gram_drift=drift,
        _dense=sol.sol,
    )


def trivialize(
    chart: MetricChart,
    geodesic: GeodesicPath,
    frame: ParallelFrame,
    germ: SubmanifoldGerm,
    tol_sym: float = DEFAULT_TOL_SYM,
) -> MorseSturmProblem:
    """Reduce the linearized geodesic flow to a sampled coefficient problem.

    Differentiating the geodesic equation along a one-parameter variation
    gives the coordinate form of the variation equation; rewriting it
    through the parallel frame E leaves y'' = R(u) y with

        R = E^{-1} (D1 - D2 + G(acc) + G(vel)^2) E,

    where G(w) is the symbol contraction G[a, b, c] w[b], acc is the
    coordinate acceleration -G(vel) vel, D1 contracts the symbol partials
    with the velocity in the derivative and first lower slots, and D2
    puts the derivative index on the free column instead. Only the
    symbols and their first derivatives along the path are needed, never
    the full four-index curvature tensor. Velocities are unit-time ones,
    so the T^2 scaling of the coefficient is automatic, and the boundary
    operator picks up one factor of T for the same reason.

    The symmetry form of the result is the constant frame Gram matrix;
    the coefficient must be symmetric relative to it, and a relative
    failure beyond tol_sym raises CurvatureAsymmetry (usually a sign the
    finite-difference step is too coarse for the chart). Below the
    tolerance the coefficient is symmetrized exactly.
    """
    n = chart.dim
    basis = germ.tangent_basis
    if basis.shape[0] != n:
        raise ValueError(
            f"germ tangent basis lives in dimension {basis.shape[0]}, chart has {n}"
        )
    g0 = chart.metric(geodesic.xs[0])
    v_start = geodesic.vs[0]
    if basis.size:
        pairings = basis.T @ g0 @ v_start
        scale = max(
            1.0,
            float(np.abs(basis).max())
            * float(np.abs(g0).max())
            * max(1.0, float(np.abs(v_start).max())),
        )
        if np.abs(pairings).max() > 1e-8 * scale:
            raise ValueError(
                "germ tangent space is not orthogonal to the initial "
                "velocity under the chart metric"
            )
        if inertia(basis.T @ g0 @ basis).n_zero:
            raise DegenerateMetric(
                "symmetry form is degenerate on the germ tangent space"
            )

    ts = geodesic.ts
    values = np.empty((ts.size, n, n))
    for i in range(ts.size):
        x = geodesic.xs[i]
        v = geodesic.vs[i]
        gamma = chart.christoffel(x)
        dgamma = chart.christoffel_partials(x)
        gv = np.einsum("abc,b->ac", gamma, v)
        acc = -gv @ v
        d1 = np.einsum("dabc,d,b->ac", dgamma, v, v)
        d2 = np.einsum("cabd,b,d->ac", dgamma, v, v)
        a_mat = d1 - d2 + np.einsum("abc,b->ac", gamma, acc) + gv @ gv
        values[i] = np.linalg.solve(frame.frames[i], a_mat @ frame.frames[i])

    gram = frame.gram
    paired = np.einsum("ab,ibc->iac", gram, values)
    asym = float(np.abs(paired - paired.transpose(0, 2, 1)).max())
    scale = max(1.0, float(np.abs(paired).max()))
    if asym > tol_sym * scale:
        raise CurvatureAsymmetry(
            f"coefficient fails symmetry relative to the frame Gram matrix "
            f"(relative asymmetry {asym / scale:.3e}); the finite-difference "
            "step is too coarse or the supplied partials are inconsistent"
        )
    symmetric = 0.5 * (paired + paired.transpose(0, 2, 1))
    values = np.einsum("ab,ibc->iac", np.linalg.inv(gram), symmetric)

    coefficient = CoefficientPath("sampled-grid", n, {"ts": ts, "values": values})
    if basis.size:
        p_frame = np.linalg.solve(frame.frames[0], basis)
    else:
        p_frame = np.zeros((n, 0))
    boundary = BoundaryData(
        Subspace(p_frame), geodesic.T * germ.second_fundamental
    )
    return MorseSturmProblem(
        MetricForm(gram),
        coefficient,
        boundary,
        meta={
            "name": f"{chart.name}-trivialized",
            "chart": chart.name,
            "T": geodesic.T,
        },
    )


def trivialize_from_seed(
    chart: MetricChart,
    seed: GeodesicSeed,
    germ: SubmanifoldGerm,
    ode_tol: float = DEFAULT_ODE_TOL,
    samples: int = DEFAULT_SAMPLES,
    tol_sym: float = DEFAULT_TOL_SYM,
) -> MorseSturmProblem:
    """Chain geodesic integration, frame transport, and reduction."""
    geodesic = integrate_geodesic(chart, seed, ode_tol=ode_tol, samples=samples)
    frame = parallel_frame(chart, geodesic, ode_tol=ode_tol)
    return trivialize(chart, geodesic, frame, germ, tol_sym=tol_sym)


def _constant_chart(name: str, g: np.ndarray) -> MetricChart:
    g = np.asarray(g, dtype=float)
    zeros = np.zeros((g.shape[0],) * 3)
    return MetricChart(
        dim=g.shape[0],
        g_at=lambda point, _g=g: _g,
        dg_at=lambda point, _z=zeros: _z,
        name=name,
    )


def _conformal_g(point):
    factor = math.exp(point[1] ** 2)
    return np.array([[factor, 0.0], [0.0, -factor]])


def _conformal_dg(point):
    t = point[1]
    d_t = 2.0 * t * math.exp(t * t)
    return np.array(
        [
            [[0.0, 0.0], [0.0, 0.0]],
            [[d_t, 0.0], [0.0, -d_t]],
        ]
    )


BUILTIN_CHARTS = {
    "minkowski2": _constant_chart("minkowski2", np.diag([1.0, -1.0])),
    "minkowski3": _constant_chart("minkowski3", np.diag([1.0, 1.0, -1.0])),
    "conformal_exp_t2": MetricChart(
        dim=2,
        g_at=_conformal_g,
        dg_at=_conformal_dg,
        name="conformal_exp_t2",
    ),
}


def chart_by_name(name: str) -> MetricChart:
    try:
        return BUILTIN_CHARTS[name]
    except KeyError:
        raise ValueError(
            f"unknown chart {name!r}; built-ins: {sorted(BUILTIN_CHARTS)}"
        ) from None
