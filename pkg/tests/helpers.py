"""Seeded random problem generators shared by the test modules.

Every generator is deterministic in its seed and returns problems whose
ground truth is known in closed form (Riemannian case) or guaranteed by
construction (timelike curves with a certified margin bound).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from morsesturm.forms import MetricForm, Subspace
from morsesturm.indexform import Mesh, assemble_I1, constraint_kernel
from morsesturm.problem import (
    BoundaryData,
    CoefficientPath,
    MorseSturmProblem,
    SmoothCurve,
    generate_timelike_2d,
)

_MIN_ROOT_SEPARATION = 0.04
_ENDPOINT_CLEARANCE = 0.02
_START_CLEARANCE = 0.05


def random_riemannian_problem(seed: int) -> tuple[MorseSturmProblem, list[tuple[float, int]]]:
    """Constant-coefficient problem with positive definite metric.

    R = -Q diag(w_i^2) Q^T for a random orthogonal Q, boundary space {0}.
    Every mode i contributes simple focal instants at t = k pi / w_i with
    multiplicity 1, so the expected (t, multiplicity) list is closed form.
    Frequencies are resampled until all roots are pairwise separated and
    clear of both endpoints.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    for _ in range(200):
        omegas = rng.uniform(2.2, 8.8, size=n)
        roots = []
        near_endpoint = False
        for w in omegas:
            k = 1
            while (val := k * math.pi / w) < 1.0 + _ENDPOINT_CLEARANCE:
                if val >= 1.0 - _ENDPOINT_CLEARANCE:
                    near_endpoint = True
                else:
                    roots.append(val)
                k += 1
        roots.sort()
        if near_endpoint or not roots or roots[0] < _START_CLEARANCE:
            continue
        gaps_ok = all(b - a >= _MIN_ROOT_SEPARATION for a, b in zip(roots, roots[1:]))
        if gaps_ok:
            break
    else:
        raise AssertionError(f"could not place separated roots for seed {seed}")

    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    coeff_matrix = -q @ np.diag(omegas**2) @ q.T
    problem = MorseSturmProblem(
        MetricForm(np.eye(n)),
        CoefficientPath.constant(coeff_matrix),
        BoundaryData(Subspace.zero(n), np.zeros((0, 0))),
        meta={"omegas": [float(w) for w in omegas], "seed": seed},
    )
    expected = [(t, 1) for t in roots]
    return problem, expected


def random_timelike_curve(seed: int) -> SmoothCurve:
    """Vector field on [0, 1] with g(y, y) <= -0.37 pointwise, g = diag(1, -1).

    The second (timelike) component stays above 0.73 while the first stays
    below 0.4, so the field clears the null cone with a certified margin.
    Closed-form derivatives throughout.
    """
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.5, 4.0)
    a = rng.uniform(-0.3, 0.3)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    b = rng.uniform(-0.1, 0.1)
    c0 = rng.uniform(0.9, 1.3)
    c2 = rng.uniform(-0.05, 0.2)
    nu = rng.uniform(0.5, 3.0)
    d = rng.uniform(-0.12, 0.12)

    def value(t: float) -> np.ndarray:
        return np.array([a * math.sin(w * t + phi) + b * t,
                         c0 + c2 * t * t + d * math.cos(nu * t)])

    def velocity(t: float) -> np.ndarray:
        return np.array([a * w * math.cos(w * t + phi) + b,
                         2.0 * c2 * t - d * nu * math.sin(nu * t)])

    def acceleration(t: float) -> np.ndarray:
        return np.array([-a * w * w * math.sin(w * t + phi),
                         2.0 * c2 - d * nu * nu * math.cos(nu * t)])

    return SmoothCurve(value=value, velocity=velocity, acceleration=acceleration)


def random_lorentzian_problem(
    seed: int,
    with_boundary: bool = True,
    lambda_range: tuple[float, float] = (0.0, 2.0),
) -> MorseSturmProblem:
    """Indefinite-signature problem built around a random timelike curve.

    The coefficient path comes from generate_timelike_2d with a random
    potential strength drawn from ``lambda_range`` (large negative values
    make the spacelike mode oscillate and produce focal instants);
    optionally the trivial boundary space is replaced by a random
    one-dimensional timelike or spacelike line with a bounded shape scalar.
    """
    rng = np.random.default_rng(seed)
    lam = float(rng.uniform(*lambda_range))
    theta = float(rng.uniform(-0.8, 0.8))
    timelike = bool(rng.integers(0, 2))
    s = float(rng.uniform(-1.2, 1.2))

    problem = generate_timelike_2d(
        random_timelike_curve(seed), lambda_=lam, meta={"seed": seed}
    )
    if not with_boundary:
        return problem
    if timelike:
        direction = np.array([[math.sinh(theta)], [math.cosh(theta)]])
    else:
        direction = np.array([[math.cosh(theta)], [math.sinh(theta)]])
    boundary = BoundaryData(Subspace(direction), np.array([[s]]))
    return dataclasses.replace(problem, boundary=boundary)


def witness_pairing(problem, witness, seed, meshes):
    """Pairing of a constrained field against a localized witness multiple.

    Projects a random coarse nodal field into the discrete constraint
    space, builds the nodal interpolant of f * Y for a coarse hat profile
    f, and returns the absolute value of the full form between them on
    each mesh of ``meshes``.
    """
    rng = np.random.default_rng(seed)
    coarse = Mesh(meshes[0])
    n = problem.n
    k = problem.boundary.space.dim
    c0 = rng.standard_normal(k)
    start = problem.boundary.space.basis @ c0 if k else np.zeros(n)
    nodal = np.vstack(
        [start, rng.standard_normal((coarse.m - 1, n)), np.zeros(n)]
    )
    center = coarse.nodes[int(rng.integers(1, coarse.m))]
    width = coarse.h

    values = []
    for m in meshes:
        mesh = Mesh(m)
        matrix = assemble_I1(problem, mesh).matrix
        z = constraint_kernel(problem, witness, mesh, 1.0)
        interped = np.column_stack(
            [np.interp(mesh.nodes, coarse.nodes, nodal[:, i]) for i in range(n)]
        )
        field = z @ (z.T @ np.concatenate([c0, interped[1:-1].ravel()]))
        field /= np.linalg.norm(field)
        profile = np.clip(1.0 - np.abs(mesh.nodes - center) / width, 0.0, None)
        w_nodes = profile[:, None] * witness.value(mesh.nodes)
        w_free = np.concatenate([np.zeros(k), w_nodes[1:-1].ravel()])
        values.append(abs(field @ matrix @ w_free))
    return values
