"""Galerkin discretization of the index forms and the verification report.

The continuous objects are three bilinear forms on vector fields V with
V(0) in the boundary space and V(1) = 0:

  plain form        integral of g(V', W') + g(R V, W)  minus  g(S V(0), W(0))
  reparameterized   the same form restricted to [0, t], pulled back to [0, 1]
                    by s = t u (stiffness scaled by 1/t, coefficient becomes
                    t R(t u))
  extended          t times the reparameterized form, which stays bounded as
                    t -> 0 and limits to the pure stiffness form

All three are assembled over piecewise-linear vector-valued elements on a
uniform mesh: stiffness integrated exactly, the coefficient block by
two-point Gauss quadrature per element. For an indefinite symmetry form the
negative count of the full discrete space grows with the mesh and means
nothing; the meaningful index lives on the constraint subspace carved out by
a certified timelike witness, computed here as an SVD null space. verify()
ties everything together: constrained index, boundary-space count, signed
focal count and endpoint correction, with mesh refinement until the counted
integer stabilizes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    ConditioningWarning,
    DegenerateFocalInstant,
    EmptyKernel,
    NotStabilized,
)
from .focal import (
    DEFAULT_REFINE_TOL,
    DEFAULT_T_GUARD,
    DEFAULT_TOL_RANK,
    FocalScan,
    maslov_robust,
    scan_focal,
)
from .forms import DEFAULT_TOL_EIG, Inertia, Subspace, inertia, restrict
from .problem import MorseSturmProblem
from .solver import (
    DEFAULT_GRID_SIZE,
    DEFAULT_ODE_TOL,
    TimelikeWitness,
    solve_fundamental,
    solve_witness,
)

__all__ = [
    "DEFAULT_MESH",
    "MESH_SCHEDULE",
    "Mesh",
    "DiscreteForm",
    "EvolutionTrace",
    "IndexJump",
    "IndexReport",
    "assemble_I1",
    "assemble_It_hat",
    "assemble_Ct",
    "constraint_rows",
    "constraint_kernel",
    "constrained_index",
    "evolution_trace",
    "default_t_grid",
    "verify",
]

DEFAULT_MESH = 64
MESH_SCHEDULE = (32, 64, 128, 256, 512)

#: Two-point Gauss abscissae on the reference element [0, 1].
_GAUSS_XI = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


@dataclass(frozen=True)
class Mesh:
    """Uniform partition of [0, 1] into m piecewise-linear elements."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"mesh needs at least 2 elements, got {self.m}")

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 1)

    @cached_property
    def h(self) -> float:
        return 1.0 / self.m

    @cached_property
    def gauss_points(self) -> np.ndarray:
        """All 2m quadrature abscissae, cell by cell."""
        left = self.nodes[:-1]
        return np.concatenate(
            [left + _GAUSS_XI[0] * self.h, left + _GAUSS_XI[1] * self.h]
        ).reshape(2, self.m).T.ravel()

    @cached_property
    def gauss_weights(self) -> np.ndarray:
        return np.full(2 * self.m, 0.5 * self.h)


def _as_mesh(mesh) -> Mesh:
    return mesh if isinstance(mesh, Mesh) else Mesh(int(mesh))


@dataclass(frozen=True)
class DiscreteForm:
    """A symmetric Galerkin matrix over the free coefficients.

    space_tag is "H1_P-full" for the plain and reparameterized assemblies,
    "C0-limit" for the extended family, and "K-constrained" after reduction
    to a constraint kernel.
    """

    matrix: np.ndarray = field(repr=False)
    space_tag: str
    mesh: Mesh
    t: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def inertia(self, tol_eig: float = DEFAULT_TOL_EIG) -> Inertia:
        return inertia(self.matrix, tol_eig)


def _embedding(problem: MorseSturmProblem, mesh: Mesh) -> np.ndarray:
    """Nodal embedding: free coefficients -> full nodal vector.

    Free layout: k boundary-space coordinates for node 0, then n components
    for each interior node. Node m is pinned to zero.
    """
    n = problem.n
    k = problem.boundary.space.dim
    m = mesh.m
    full_dim = n * (m + 1)
    free_dim = k + n * (m - 1)
    b = np.zeros((full_dim, free_dim))
    if k:
        b[:n, :k] = problem.boundary.space.basis
    for j in range(1, m):
        b[n * j : n * (j + 1), k + n * (j - 1) : k + n * j] = np.eye(n)
    return b


def _assemble(
    problem: MorseSturmProblem,
    mesh: Mesh,
    stiff_scale: float,
    mass_scale: float,
    coeff_time_scale: float,
    boundary_scale: float,
    space_tag: str,
    t: float,
) -> DiscreteForm:
    n = problem.n
    m = mesh.m
    h = mesh.h
    g = problem.metric.matrix
    full_dim = n * (m + 1)
    a_full = np.zeros((full_dim, full_dim))

    stiff_block = (stiff_scale / h) * g
    for j in range(m):
        sl0 = slice(n * j, n * (j + 1))
        sl1 = slice(n * (j + 1), n * (j + 2))
        a_full[sl0, sl0] += stiff_block
        a_full[sl1, sl1] += stiff_block
        a_full[sl0, sl1] -= stiff_block
        a_full[sl1, sl0] -= stiff_block

    if mass_scale != 0.0:
        qpts = mesh.gauss_points
        coeffs = problem.coefficient(coeff_time_scale * qpts)
        g_r = np.einsum("ab,qbc->qac", g, coeffs)
        g_r = 0.5 * (g_r + np.transpose(g_r, (0, 2, 1)))
        w = mass_scale * mesh.gauss_weights
        # Shape values of the two local hats at each quadrature point.
        xi = np.tile(np.asarray(_GAUSS_XI), m)
        phi = np.stack([1.0 - xi, xi])
        for j in range(m):
            for q in (2 * j, 2 * j + 1):
                block = w[q] * g_r[q]
                for a in range(2):
                    for b2 in range(2):
                        row = slice(n * (j + a), n * (j + a + 1))
                        col = slice(n * (j + b2), n * (j + b2 + 1))
                        a_full[row, col] += phi[a, q] * phi[b2, q] * block

    b = _embedding(problem, mesh)
    a = b.T @ a_full @ b

    k = problem.boundary.space.dim
    if k and boundary_scale != 0.0:
        gram = problem.boundary.space.basis.T @ g @ problem.boundary.space.basis
        s_block = gram @ problem.boundary.operator
        a[:k, :k] -= boundary_scale * 0.5 * (s_block + s_block.T)

    a = 0.5 * (a + a.T)
    return DiscreteForm(matrix=a, space_tag=space_tag, mesh=mesh, t=t)


def assemble_I1(problem: MorseSturmProblem, mesh=DEFAULT_MESH) -> DiscreteForm:
    """Galerkin matrix of the plain index form over the whole interval."""
    return _assemble(
        problem, _as_mesh(mesh),
        stiff_scale=1.0, mass_scale=1.0, coeff_time_scale=1.0,
        boundary_scale=1.0, space_tag="H1_P-full", t=1.0,
    )


def assemble_It_hat(problem: MorseSturmProblem, mesh, t: float) -> DiscreteForm:
    """Reparameterized form: the interval [0, t] pulled back to [0, 1].

    At t = 1 this is the identical matrix to assemble_I1.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    return _assemble(
        problem, _as_mesh(mesh),
        stiff_scale=1.0 / t, mass_scale=t, coeff_time_scale=t,
        boundary_scale=1.0, space_tag="H1_P-full", t=t,
    )


def assemble_Ct(problem: MorseSturmProblem, mesh, t: float) -> DiscreteForm:
    """Extended family: t times the reparameterized form.

    Defined for t in [0, 1]; at t = 0 it degenerates to the pure stiffness
    form, and for t > 0 it has the same inertia as the reparameterized form
    (positive multiple).
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return _assemble(
        problem, _as_mesh(mesh),
        stiff_scale=1.0, mass_scale=t * t, coeff_time_scale=t,
        boundary_scale=t, space_tag="C0-limit", t=t,
    )


def constraint_rows(
    problem: MorseSturmProblem,
    witness: TimelikeWitness,
    mesh,
    t: float,
) -> np.ndarray:
    """Centered constraint matrix over the free coefficients, one row per
    element.

    The continuous constraint requires the pairing
    c_V(u) = g(V'(u), Y(t u)) - g(V(u), t Y'(t u)) to be constant in u.
    Imposing it pointwise at both Gauss abscissae would give 2m - 1
    independent rows, a square system against the n = 2 free coefficients
    that generically admits only V = 0. The constraint is therefore imposed
    weakly: each row is the quadrature average of c_V over one element
    (the pairing tested against piecewise-constant functions), centered by
    the mean over elements. This removes at most m - 1 dimensions and
    recovers the same constraint space under mesh refinement.
    """
    mesh = _as_mesh(mesh)
    n = problem.n
    m = mesh.m
    h = mesh.h
    g = problem.metric.matrix

    qpts = mesh.gauss_points
    y = np.atleast_2d(witness.value(t * qpts))
    yp = np.atleast_2d(witness.derivative(t * qpts))
    gy = y @ g.T
    gyp = t * (yp @ g.T)

    xi = np.tile(np.asarray(_GAUSS_XI), m)
    rows_full = np.zeros((m, n * (m + 1)))
    for j in range(m):
        left = slice(n * j, n * (j + 1))
        right = slice(n * (j + 1), n * (j + 2))
        for q in (2 * j, 2 * j + 1):
            phi_l, phi_r = 1.0 - xi[q], xi[q]
            rows_full[j, left] += 0.5 * ((-1.0 / h) * gy[q] - phi_l * gyp[q])
            rows_full[j, right] += 0.5 * ((1.0 / h) * gy[q] - phi_r * gyp[q])

    rows = rows_full @ _embedding(problem, mesh)
    return rows - rows.mean(axis=0, keepdims=True)


def constraint_kernel(
    problem: MorseSturmProblem,
    witness: TimelikeWitness,
    mesh,
    t: float,
    tol_rank: float = DEFAULT_TOL_RANK,
) -> np.ndarray:
    """Orthonormal basis of the discrete constraint space."""
    rows = constraint_rows(problem, witness, mesh, t)
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    if s.size and s[0] > 0.0:
        rank = int(np.sum(s >= tol_rank * s[0]))
    else:
        rank = 0
    kernel = vt[rank:].T
    if kernel.shape[1] == 0:
        raise EmptyKernel(
            f"constraint kernel is zero dimensional at t={t}, m={_as_mesh(mesh).m}"
        )
    return kernel


def constrained_index(
    problem: MorseSturmProblem,
    witness: TimelikeWitness | None,
    mesh,
    t: float,
    tol_eig: float = DEFAULT_TOL_EIG,
    tol_rank: float = DEFAULT_TOL_RANK,
) -> Inertia:
    """Inertia of the extended form on the constraint space at parameter t.

    With witness None the full discrete space is counted instead, which is
    only meaningful for a positive definite symmetry form.
    """
    form = assemble_Ct(problem, mesh, t)
    if witness is None:
        counted = form.matrix
    else:
        kernel = constraint_kernel(problem, witness, mesh, t, tol_rank)
        counted = kernel.T @ form.matrix @ kernel
        counted = 0.5 * (counted + counted.T)
    result = inertia(counted, tol_eig)
    if result.n_zero:
        warnings.warn(
            ConditioningWarning(
                f"{result.n_zero} near-zero eigenvalue(s) at t={t}; "
                "the parameter sits at or near a focal instant"
            ),
            stacklevel=2,
        )
    return result


def default_t_grid() -> np.ndarray:
    """Evaluation grid 0.05, 0.10, ..., 1.00."""
    return np.round(np.arange(1, 21) * 0.05, 10)


@dataclass(frozen=True)
class IndexJump:
    """A change of the counted index between consecutive grid parameters."""

    t_jump: float
    delta_i: int
    matched_focal_t: float | None
    matched_signature: int | None


@dataclass(frozen=True)
class EvolutionTrace:
    """The counted index along a parameter grid, with located jumps."""

    ts: np.ndarray
    i_of_t: np.ndarray
    jumps: tuple[IndexJump, ...]
    constrained: bool
    mesh: Mesh


def _resolve_witness(
    problem: MorseSturmProblem,
    witness: TimelikeWitness | None,
    grid_size: int,
    ode_tol: float,
) -> TimelikeWitness | None:
    """Pick the counting mode: full space when g is positive definite,
    otherwise a certified witness (solving for one if not supplied)."""
    if problem.metric.positive_definite:
        return witness
    if witness is not None:
        return witness
    return solve_witness(problem, grid_size=grid_size, ode_tol=ode_tol)


def evolution_trace(
    problem: MorseSturmProblem,
    witness: TimelikeWitness | None = None,
    mesh=DEFAULT_MESH,
    t_grid: np.ndarray | None = None,
    scan: FocalScan | None = None,
    tol_eig: float = DEFAULT_TOL_EIG,
    tol_rank: float = DEFAULT_TOL_RANK,
    grid_size: int = DEFAULT_GRID_SIZE,
    ode_tol: float = DEFAULT_ODE_TOL,
) -> EvolutionTrace:
    """Counted index at each grid parameter, with jumps matched to the
    focal scan.

    A jump record carries the bracketing-interval midpoint, the index
    change, and the matched focal instant (its exact location and
    signature). Matching prefers the instant inside the bracketing
    interval; when the discrete count lags a fraction of a cell behind
    an instant sitting just below a grid point, the nearest unclaimed
    instant within one full cell of the midpoint is taken instead.
    """
    mesh = _as_mesh(mesh)
    if t_grid is None:
        t_grid = default_t_grid()
    t_grid = np.asarray(t_grid, dtype=float)
    witness = _resolve_witness(problem, witness, grid_size, ode_tol)
    if scan is None:
        scan = scan_focal(
            solve_fundamental(problem, grid_size=grid_size, ode_tol=ode_tol),
            tol_rank=tol_rank, tol_eig=tol_eig,
        )

    counts = np.empty(t_grid.size, dtype=int)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        for i, t in enumerate(t_grid):
            counts[i] = constrained_index(
                problem, witness, mesh, float(t), tol_eig, tol_rank
            ).n_minus

    jumps = []
    claimed: set[int] = set()
    for a in range(t_grid.size - 1):
        delta = int(counts[a + 1] - counts[a])
        if delta == 0:
            continue
        lo, hi = float(t_grid[a]), float(t_grid[a + 1])
        mid = 0.5 * (lo + hi)
        # An instant sitting exactly on the left grid point produces its
        # index change across this interval (the count at the instant
        # itself sees a zero mode, not a negative one yet).
        inside = [
            (i, f)
            for i, f in enumerate(scan.instants)
            if i not in claimed and lo - 1e-6 < f.t <= hi
        ]
        if not inside:
            near = sorted(
                (abs(f.t - mid), i, f)
                for i, f in enumerate(scan.instants)
                if i not in claimed and abs(f.t - mid) <= hi - lo
            )
            if near:
                inside = [(near[0][1], near[0][2])]
        claimed.update(i for i, _ in inside)
        matched_t = inside[0][1].t if len(inside) == 1 else None
        matched_sig = sum(f.signature for _, f in inside) if inside else None
        jumps.append(
            IndexJump(
                t_jump=mid,
                delta_i=delta,
                matched_focal_t=matched_t,
                matched_signature=matched_sig,
            )
        )

    return EvolutionTrace(
        ts=t_grid, i_of_t=counts, jumps=tuple(jumps),
        constrained=witness is not None, mesh=mesh,
    )


@dataclass(frozen=True)
class IndexReport:
    """All terms of the index identity, with the residual that should
    vanish: n_minus_K - n_minus_gP - maslov + endpoint_correction."""

    n_minus_K: int
    n_minus_gP: int
    maslov: int
    endpoint_correction: int
    residual: int
    mesh_history: tuple[tuple[int, int], ...]
    constrained: bool
    tolerances: dict

    @property
    def stabilized_at(self) -> int:
        return self.mesh_history[-1][0]

    def to_json_dict(self) -> dict:
        return {
            "n_minus_K": self.n_minus_K,
            "n_minus_gP": self.n_minus_gP,
            "maslov": self.maslov,
            "endpoint_correction": self.endpoint_correction,
            "residual": self.residual,
            "mesh_history": [list(pair) for pair in self.mesh_history],
            "constrained": self.constrained,
            "tolerances": dict(self.tolerances),
        }


def _endpoint_correction(problem, scan, tol_eig) -> int:
    inst = scan.endpoint_instant
    if inst is None:
        return 0
    gram_inertia = inertia(
        restrict(problem.metric, Subspace(inst.jperp_basis)), tol_eig
    )
    if gram_inertia.n_zero:
        raise DegenerateFocalInstant(
            "the symmetry form is degenerate on the endpoint complement "
            "space; the endpoint correction is undefined"
        )
    return gram_inertia.n_minus


def verify(
    problem: MorseSturmProblem,
    witness: TimelikeWitness | None = None,
    mesh_schedule=MESH_SCHEDULE,
    tol_eig: float = DEFAULT_TOL_EIG,
    tol_rank: float = DEFAULT_TOL_RANK,
    refine_tol: float = DEFAULT_REFINE_TOL,
    t_guard: float = DEFAULT_T_GUARD,
    grid_size: int = DEFAULT_GRID_SIZE,
    ode_tol: float = DEFAULT_ODE_TOL,
    robust_eps: float = 1e-4,
    robust_trials: int = 8,
    robust_seed: int = 0,
) -> IndexReport:
    """Verify the index identity on one problem.

    The constrained index at t = 1 is recomputed over the mesh schedule
    until two consecutive meshes agree (NotStabilized otherwise). The
    signed focal count uses the plain sum when every interior instant is
    nondegenerate and the certified perturbation vote otherwise. An
    endpoint focal instant is not an error here: its correction term is
    computed from the complement space, provided the symmetry form is
    nondegenerate on it.
    """
    solution = solve_fundamental(problem, grid_size=grid_size, ode_tol=ode_tol)
    scan = scan_focal(
        solution, tol_rank=tol_rank, refine_tol=refine_tol,
        t_guard=t_guard, tol_eig=tol_eig,
    )

    if any(f.degenerate for f in scan.interior_instants):
        maslov = maslov_robust(
            problem, eps=robust_eps, n_trials=robust_trials, seed=robust_seed,
            grid_size=grid_size, ode_tol=ode_tol, tol_rank=tol_rank,
            refine_tol=refine_tol, t_guard=t_guard, tol_eig=tol_eig,
        ).value
    else:
        maslov = scan.signed_count

    correction = _endpoint_correction(problem, scan, tol_eig)
    n_minus_gp = inertia(
        restrict(problem.metric, problem.boundary.space), tol_eig
    ).n_minus

    witness = _resolve_witness(problem, witness, grid_size, ode_tol)
    history: list[tuple[int, int]] = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        for m in mesh_schedule:
            count = constrained_index(
                problem, witness, Mesh(int(m)), 1.0, tol_eig, tol_rank
            ).n_minus
            history.append((int(m), count))
            if len(history) >= 2 and history[-1][1] == history[-2][1]:
                break
        else:
            raise NotStabilized(
                "mesh schedule exhausted without two consecutive agreeing "
                f"counts: {history}"
            )

    n_minus_k = history[-1][1]
    return IndexReport(
        n_minus_K=n_minus_k,
        n_minus_gP=n_minus_gp,
        maslov=maslov,
        endpoint_correction=correction,
        residual=n_minus_k - n_minus_gp - maslov + correction,
        mesh_history=tuple(history),
        constrained=witness is not None,
        tolerances={
            "tol_eig": tol_eig,
            "tol_rank": tol_rank,
            "refine_tol": refine_tol,
            "t_guard": t_guard,
            "grid_size": grid_size,
            "ode_tol": ode_tol,
        },
    )
