"""Problem definitions, validation, perturbation, and file round-tripping.

A Morse-Sturm problem on [0, 1] bundles a fixed nondegenerate symmetric form
g on R^n, a continuous g-symmetric coefficient path R(t), boundary data (a
g-nondegenerate initial subspace plus a symmetric operator on it), and an
optional witness seed used by the indefinite-signature machinery.

Problems are serialized to JSON files with extension ``.msp.json``. The
schema is flat and explicit; floats survive a save/load round trip
bit-exactly because the JSON writer emits shortest round-trip reprs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    NotTimelike,
    ParseError,
    PerturbationBrokeInvariant,
    SchemaError,
)
from .forms import MetricForm, Subspace, check_g_symmetric, inertia, restrict

__all__ = [
    "CoefficientPath",
    "BoundaryData",
    "WitnessSeed",
    "MorseSturmProblem",
    "Perturbation",
    "SmoothCurve",
    "validate",
    "perturb",
    "generate_timelike_2d",
    "save",
    "load",
    "loads",
    "fixture_path",
    "list_fixtures",
    "load_matrix_curve",
]

COEFFICIENT_KINDS = ("constant", "polynomial", "trigonometric", "sampled-grid")

#: Number of Chebyshev sample points used by validate() for symmetry checks.
N_SYMMETRY_SAMPLES = 32

#: Relative tolerance for the g-symmetry of R(t) and S in validate().
TOL_SYMMETRY = 1e-8


def _chebyshev_points(m: int) -> np.ndarray:
    """Chebyshev nodes mapped to [0, 1]."""
    k = np.arange(m)
    return 0.5 * (1.0 - np.cos((2 * k + 1) * np.pi / (2 * m)))


class CoefficientPath:
    """A continuous matrix-valued path t -> R(t) on [0, 1].

    Four kinds are supported: ``constant``, ``polynomial`` (matrix
    coefficients of powers of t), ``trigonometric`` (a finite sum of
    cos/sin matrix terms), and ``sampled-grid`` (cubic-spline interpolation
    of samples, which is C^2 and in particular C^1 at the knots). The first
    three kinds are smooth, so a derivative is available for diagnostics on
    all kinds.

    Calling the path with a scalar returns an (n, n) array; calling with a
    1d array of times returns a stacked (m, n, n) array.
    """

    def __init__(self, kind: str, n: int, data: dict):
        if kind not in COEFFICIENT_KINDS:
            raise ValueError(f"unknown coefficient kind {kind!r}")
        self.kind = kind
        self.n = int(n)
        self.data = data
        self._spline = None
        self._dspline = None
        if kind == "sampled-grid":
            ts = np.asarray(data["ts"], dtype=float)
            vals = np.asarray(data["values"], dtype=float)
            if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0):
                raise ValueError("sampled-grid needs strictly increasing ts")
            if vals.shape != (ts.size, self.n, self.n):
                raise ValueError("sampled-grid values must be (len(ts), n, n)")
            self._spline = CubicSpline(ts, vals, axis=0)
            self._dspline = self._spline.derivative()

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def constant(cls, matrix: np.ndarray) -> "CoefficientPath":
        m = np.asarray(matrix, dtype=float)
        return cls("constant", m.shape[0], {"matrix": m})

    @classmethod
    def polynomial(cls, coefficients) -> "CoefficientPath":
        """R(t) = sum_i t^i * coefficients[i]."""
        coeffs = np.asarray(coefficients, dtype=float)
        if coeffs.ndim != 3:
            raise ValueError("polynomial coefficients must be (deg+1, n, n)")
        return cls("polynomial", coeffs.shape[1], {"coefficients": coeffs})

    @classmethod
    def trigonometric(cls, terms) -> "CoefficientPath":
        """R(t) = sum over terms of cos(omega t) C + sin(omega t) D.

        Each term is a dict with keys ``omega`` and at least one of ``cos``
        and ``sin`` (matrix or None).
        """
        clean = []
        n = None
        for term in terms:
            cos_m = None if term.get("cos") is None else np.asarray(term["cos"], float)
            sin_m = None if term.get("sin") is None else np.asarray(term["sin"], float)
            if cos_m is None and sin_m is None:
                raise ValueError("trigonometric term needs cos or sin data")
            n = (cos_m if cos_m is not None else sin_m).shape[0] if n is None else n
            clean.append({"omega": float(term["omega"]), "cos": cos_m, "sin": sin_m})
        return cls("trigonometric", n, {"terms": clean})

    @classmethod
    def sampled(cls, ts: np.ndarray, values: np.ndarray) -> "CoefficientPath":
        ts = np.asarray(ts, dtype=float)
        values = np.asarray(values, dtype=float)
        return cls("sampled-grid", values.shape[1], {"ts": ts, "values": values})

    # ------------------------------------------------------------------
    # evaluation

    def __call__(self, t) -> np.ndarray:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = self._eval(t_arr)
        if np.isscalar(t) or np.ndim(t) == 0:
            return out[0]
        return out

    def _eval(self, ts: np.ndarray) -> np.ndarray:
        m, n = ts.size, self.n
        if self.kind == "constant":
            return np.broadcast_to(self.data["matrix"], (m, n, n)).copy()
        if self.kind == "polynomial":
            coeffs = self.data["coefficients"]
            out = np.zeros((m, n, n))
            # Horner evaluation, highest power first.
            for c in coeffs[::-1]:
                out = out * ts[:, None, None] + c
            return out
        if self.kind == "trigonometric":
            out = np.zeros((m, n, n))
            for term in self.data["terms"]:
                w = term["omega"]
                if term["cos"] is not None:
                    out += np.cos(w * ts)[:, None, None] * term["cos"]
                if term["sin"] is not None:
                    out += np.sin(w * ts)[:, None, None] * term["sin"]
            return out
        return self._spline(ts)

    def derivative(self, t) -> np.ndarray:
        """dR/dt, for diagnostics."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        m, n = t_arr.size, self.n
        if self.kind == "constant":
            out = np.zeros((m, n, n))
        elif self.kind == "polynomial":
            coeffs = self.data["coefficients"]
            out = np.zeros((m, n, n))
            for i, c in enumerate(coeffs):
                if i >= 1:
                    out += i * (t_arr ** (i - 1))[:, None, None] * c
        elif self.kind == "trigonometric":
            out = np.zeros((m, n, n))
            for term in self.data["terms"]:
                w = term["omega"]
                if term["cos"] is not None:
                    out += -w * np.sin(w * t_arr)[:, None, None] * term["cos"]
                if term["sin"] is not None:
                    out += w * np.cos(w * t_arr)[:, None, None] * term["sin"]
        else:
            out = self._dspline(t_arr)
        if np.isscalar(t) or np.ndim(t) == 0:
            return out[0]
        return out

    def shifted_by_constant(self, delta: np.ndarray) -> "CoefficientPath":
        """Kind-preserving addition of a constant matrix."""
        delta = np.asarray(delta, dtype=float)
        if self.kind == "constant":
            return CoefficientPath.constant(self.data["matrix"] + delta)
        if self.kind == "polynomial":
            coeffs = self.data["coefficients"].copy()
            coeffs[0] = coeffs[0] + delta
            return CoefficientPath.polynomial(coeffs)
        if self.kind == "trigonometric":
            terms = [dict(t) for t in self.data["terms"]]
            for term in terms:
                if term["omega"] == 0.0 and term["cos"] is not None:
                    term["cos"] = term["cos"] + delta
                    break
            else:
                terms.append({"omega": 0.0, "cos": delta, "sin": None})
            return CoefficientPath.trigonometric(terms)
        # Cubic-spline interpolation is linear in the data, so shifting every
        # sample shifts the interpolant exactly.
        return CoefficientPath.sampled(
            self.data["ts"], self.data["values"] + delta
        )

    # ------------------------------------------------------------------
    # serialization

    def to_json_dict(self) -> dict:
        if self.kind == "constant":
            data = {"matrix": self.data["matrix"].tolist()}
        elif self.kind == "polynomial":
            data = {"coefficients": self.data["coefficients"].tolist()}
        elif self.kind == "trigonometric":
            data = {
                "terms": [
                    {
                        "omega": term["omega"],
                        "cos": None if term["cos"] is None else term["cos"].tolist(),
                        "sin": None if term["sin"] is None else term["sin"].tolist(),
                    }
                    for term in self.data["terms"]
                ]
            }
        else:
            data = {
                "ts": self.data["ts"].tolist(),
                "values": self.data["values"].tolist(),
            }
        return {"kind": self.kind, "data": data}

    @classmethod
    def from_json_dict(cls, obj: dict, n: int) -> "CoefficientPath":
        kind = obj["kind"]
        data = obj["data"]
        if kind == "constant":
            return cls.constant(np.asarray(data["matrix"], float).reshape(n, n))
        if kind == "polynomial":
            return cls.polynomial(np.asarray(data["coefficients"], float))
        if kind == "trigonometric":
            return cls.trigonometric(data["terms"])
        if kind == "sampled-grid":
            return cls.sampled(np.asarray(data["ts"], float), np.asarray(data["values"], float))
        raise SchemaError(f"unknown coefficient kind {kind!r}")


@dataclass(frozen=True)
class BoundaryData:
    """Initial data: a subspace of R^n and a symmetric operator on it.

    ``operator`` is a k x k matrix expressed in the columns of
    ``space.basis``. For a zero-dimensional space it is the empty 0 x 0
    matrix.
    """

    space: Subspace
    operator: np.ndarray

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=float)
        k = self.space.dim
        if op.shape != (k, k):
            raise ValueError(f"operator must be {k} x {k}, got {op.shape}")
        object.__setattr__(self, "operator", op)

    @property
    def dim(self) -> int:
        return self.space.dim


@dataclass(frozen=True)
class WitnessSeed:
    """Initial value and velocity for the timelike witness solve."""

    value: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", np.asarray(self.value, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))


@dataclass(frozen=True)
class MorseSturmProblem:
    """A complete problem instance on the unit interval."""

    metric: MetricForm
    coefficient: CoefficientPath
    boundary: BoundaryData
    witness_seed: WitnessSeed | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.metric.dim

    @property
    def name(self) -> str:
        return str(self.meta.get("name", "unnamed"))

    def with_coefficient(self, path: CoefficientPath) -> "MorseSturmProblem":
        return replace(self, coefficient=path)


def validate(problem: MorseSturmProblem) -> list[str]:
    """Check every semantic invariant; return a list of violation messages.

    An empty list means the problem is admissible. Checks: shape coherence,
    nondegeneracy of g (already enforced by MetricForm, re-reported for
    completeness), g-symmetry of R(t) at 32 Chebyshev points of [0, 1],
    g-nondegeneracy of the boundary subspace, symmetry of the boundary
    operator relative to g restricted to that subspace, and witness seed
    dimensions.
    """
    v: list[str] = []
    n = problem.n
    if problem.coefficient.n != n:
        v.append(
            f"coefficient path dimension {problem.coefficient.n} != metric dimension {n}"
        )
        return v
    if problem.boundary.space.ambient_dim != n:
        v.append("boundary subspace lives in the wrong ambient dimension")
        return v

    for t in _chebyshev_points(N_SYMMETRY_SAMPLES):
        if not check_g_symmetric(problem.metric, problem.coefficient(float(t)), TOL_SYMMETRY):
            v.append(f"coefficient matrix is not g-symmetric at t={t:.6f}")
            break

    k = problem.boundary.dim
    if k > 0:
        gram = restrict(problem.metric, problem.boundary.space)
        ine = inertia(gram)
        if not ine.nondegenerate:
            v.append(
                f"boundary subspace is g-degenerate (inertia {ine.as_tuple()})"
            )
        else:
            s_op = problem.boundary.operator
            gs = gram @ s_op
            asym = np.linalg.norm(gs - gs.T)
            if asym > TOL_SYMMETRY * max(1.0, np.linalg.norm(gs)):
                v.append("boundary operator is not symmetric relative to g on the subspace")

    seed = problem.witness_seed
    if seed is not None:
        if seed.value.shape != (n,) or seed.velocity.shape != (n,):
            v.append("witness seed has wrong dimensions")
    return v


# ----------------------------------------------------------------------
# perturbation


@dataclass(frozen=True)
class Perturbation:
    """Specification of a random, invariant-preserving perturbation.

    ``targets`` is a subset of {"R", "S", "P"} naming which pieces of the
    problem receive entrywise-uniform noise of magnitude ``eps``.
    """

    eps: float
    seed: int
    targets: tuple[str, ...] = ("R",)

    def __post_init__(self):
        bad = set(self.targets) - {"R", "S", "P"}
        if bad:
            raise ValueError(f"unknown perturbation targets {sorted(bad)}")


def perturb(problem: MorseSturmProblem, spec: Perturbation) -> MorseSturmProblem:
    """Perturb a problem without leaving the admissible class.

    The coefficient perturbation is a constant matrix delta drawn entrywise
    from U(-eps, eps) and projected to its g-symmetric part
    (delta + g^{-1} delta^T g) / 2, then folded into the path in a
    kind-preserving way. The boundary operator receives a symmetrized (with
    respect to g on the subspace) uniform delta. The subspace itself is moved
    by the small linear map I + eps K with K uniform. If the result fails
    validation, PerturbationBrokeInvariant is raised with the violations.
    """
    rng = np.random.default_rng(spec.seed)
    n = problem.n
    g = problem.metric.matrix
    g_inv = problem.metric.inverse()

    coefficient = problem.coefficient
    boundary = problem.boundary

    if "R" in spec.targets:
        raw = rng.uniform(-spec.eps, spec.eps, size=(n, n))
        delta = 0.5 * (raw + g_inv @ raw.T @ g)
        coefficient = coefficient.shifted_by_constant(delta)

    if "S" in spec.targets and boundary.dim > 0:
        k = boundary.dim
        gram = restrict(problem.metric, boundary.space)
        raw = rng.uniform(-spec.eps, spec.eps, size=(k, k))
        delta = 0.5 * (raw + np.linalg.inv(gram) @ raw.T @ gram)
        boundary = BoundaryData(boundary.space, boundary.operator + delta)

    if "P" in spec.targets and boundary.dim > 0:
        k_map = rng.uniform(-1.0, 1.0, size=(n, n))
        moved = (np.eye(n) + spec.eps * k_map) @ boundary.space.basis
        try:
            new_space = Subspace(moved)
        except ValueError as exc:
            raise PerturbationBrokeInvariant(str(exc)) from exc
        boundary = BoundaryData(new_space, boundary.operator)

    candidate = replace(
        problem,
        coefficient=coefficient,
        boundary=boundary,
        meta={**problem.meta, "perturbed": {"eps": spec.eps, "seed": spec.seed,
                                            "targets": list(spec.targets)}},
    )
    violations = validate(candidate)
    if violations:
        raise PerturbationBrokeInvariant("; ".join(violations))
    return candidate


# ----------------------------------------------------------------------
# timelike 2d generator


@dataclass(frozen=True)
class SmoothCurve:
    """A curve on [0, 1] given by value, velocity and acceleration callables.

    Each callable maps a float t to an array of shape (2,).
    """

    value: Callable[[float], np.ndarray]
    velocity: Callable[[float], np.ndarray]
    acceleration: Callable[[float], np.ndarray]


def generate_timelike_2d(
    curve: SmoothCurve,
    lambda_: float = 0.0,
    n_samples: int = 257,
    meta: dict | None = None,
) -> MorseSturmProblem:
    """Build a 2d problem with g = diag(1, -1) that admits the given curve
    as an exact solution.

    The coefficient family solving R(t) Y(t) = Y''(t) with R g-symmetric is
    one dimensional at each t; the returned member is the minimum-Frobenius
    solution plus ``lambda_`` times the (smoothly normalized) homogeneous
    direction. The result carries the curve's initial data as witness seed,
    a zero-dimensional boundary subspace, and a sampled-grid coefficient
    path on ``n_samples`` uniform points.

    Raises NotTimelike if g(Y, Y) < 0 fails anywhere on a dense check grid.
    """
    g_mat = np.array([[1.0, 0.0], [0.0, -1.0]])
    ts = np.linspace(0.0, 1.0, n_samples)

    check_ts = np.linspace(0.0, 1.0, 1025)
    vals = np.array([curve.value(float(t)) for t in check_ts])
    margin = vals[:, 1] ** 2 - vals[:, 0] ** 2
    if np.min(margin) <= 0.0:
        worst = float(check_ts[int(np.argmin(margin))])
        raise NotTimelike(
            f"curve is not timelike: g(Y, Y) >= 0 near t={worst:.4f}"
        )

    values = np.empty((n_samples, 2, 2))
    w_inv = np.diag([1.0, 1.0 / np.sqrt(2.0), 1.0])
    for i, t in enumerate(ts):
        y = curve.value(float(t))
        ypp = curve.acceleration(float(t))
        # Unknowns x = (a, b, d) parameterize R = [[a, b], [-b, d]], the
        # general g-symmetric matrix for this signature.
        a_mat = np.array(
            [[y[0], y[1], 0.0], [0.0, -y[0], y[1]]]
        )
        x_min = w_inv @ np.linalg.pinv(a_mat @ w_inv) @ ypp
        kernel = np.array([y[1] ** 2, -y[0] * y[1], -y[0] ** 2])
        kernel = kernel / np.linalg.norm(kernel)
        x = x_min + lambda_ * kernel
        values[i] = np.array([[x[0], x[1]], [-x[1], x[2]]])
        resid = np.linalg.norm(values[i] @ y - ypp)
        if resid > 1e-10:
            raise NotTimelike(
                f"coefficient solve residual {resid:.2e} at t={t:.4f}"
            )

    problem = MorseSturmProblem(
        metric=MetricForm(g_mat),
        coefficient=CoefficientPath.sampled(ts, values),
        boundary=BoundaryData(Subspace.zero(2), np.zeros((0, 0))),
        witness_seed=WitnessSeed(curve.value(0.0), curve.velocity(0.0)),
        meta={"generator": "timelike-2d", "lambda": float(lambda_), **(meta or {})},
    )
    violations = validate(problem)
    if violations:
        raise NotTimelike("generated problem failed validation: " + "; ".join(violations))
    return problem


# ----------------------------------------------------------------------
# file format


def _problem_to_dict(problem: MorseSturmProblem) -> dict:
    obj = {
        "format": "msp",
        "version": 1,
        "n": problem.n,
        "g": problem.metric.matrix.tolist(),
        "P": [row.tolist() for row in problem.boundary.space.basis.T],
        "S": problem.boundary.operator.tolist(),
        "R": problem.coefficient.to_json_dict(),
        "meta": problem.meta,
    }
    if problem.witness_seed is not None:
        obj["y_seed"] = {
            "value": problem.witness_seed.value.tolist(),
            "velocity": problem.witness_seed.velocity.tolist(),
        }
    else:
        obj["y_seed"] = None
    return obj


def _problem_from_dict(obj: dict) -> MorseSturmProblem:
    if not isinstance(obj, dict):
        raise SchemaError("problem file must contain a JSON object")
    if obj.get("format") != "msp":
        raise SchemaError("missing or wrong 'format' marker (expected 'msp')")
    required = ["n", "g", "P", "S", "R", "meta"]
    missing = [key for key in required if key not in obj]
    if missing:
        raise SchemaError(f"missing required keys: {missing}")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError("'n' must be a positive integer")

    g_arr = np.asarray(obj["g"], dtype=float)
    if g_arr.shape != (n, n):
        raise SchemaError(f"'g' must be {n} x {n}")
    try:
        metric = MetricForm(g_arr)
    except Exception as exc:
        raise SchemaError(f"metric is not admissible: {exc}") from exc

    p_rows = obj["P"]
    if not isinstance(p_rows, list):
        raise SchemaError("'P' must be a list of basis rows")
    if p_rows:
        basis = np.asarray(p_rows, dtype=float).T
        if basis.shape[0] != n:
            raise SchemaError("'P' rows must have length n")
    else:
        basis = np.zeros((n, 0))
    try:
        space = Subspace(basis)
    except ValueError as exc:
        raise SchemaError(f"'P' basis is not independent: {exc}") from exc

    s_arr = np.asarray(obj["S"], dtype=float)
    k = space.dim
    if s_arr.size == 0:
        s_arr = np.zeros((k, k))
    if s_arr.shape != (k, k):
        raise SchemaError(f"'S' must be {k} x {k} to match 'P'")

    r_obj = obj["R"]
    if not isinstance(r_obj, dict) or "kind" not in r_obj or "data" not in r_obj:
        raise SchemaError("'R' must be an object with 'kind' and 'data'")
    try:
        coefficient = CoefficientPath.from_json_dict(r_obj, n)
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(f"coefficient path is malformed: {exc}") from exc
    if coefficient.n != n:
        raise SchemaError("coefficient path dimension does not match 'n'")

    seed_obj = obj.get("y_seed")
    seed = None
    if seed_obj is not None:
        if not isinstance(seed_obj, dict) or "value" not in seed_obj or "velocity" not in seed_obj:
            raise SchemaError("'y_seed' must have 'value' and 'velocity'")
        value = np.asarray(seed_obj["value"], dtype=float)
        velocity = np.asarray(seed_obj["velocity"], dtype=float)
        if value.shape != (n,) or velocity.shape != (n,):
            raise SchemaError("'y_seed' entries must have length n")
        seed = WitnessSeed(value, velocity)

    meta = obj.get("meta") or {}
    if not isinstance(meta, dict):
        raise SchemaError("'meta' must be an object")

    try:
        boundary = BoundaryData(space, s_arr)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    return MorseSturmProblem(metric, coefficient, boundary, seed, meta)


def save(problem: MorseSturmProblem, path: str | Path) -> Path:
    """Write a problem to a ``.msp.json`` file. Returns the path."""
    path = Path(path)
    path.write_text(dumps(problem))
    return path


def dumps(problem: MorseSturmProblem) -> str:
    return json.dumps(_problem_to_dict(problem), indent=2, sort_keys=True) + "\n"


def load(path: str | Path) -> MorseSturmProblem:
    """Read a problem file. ParseError for broken JSON, SchemaError for a
    document that parses but does not describe an admissible problem."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def loads(text: str) -> MorseSturmProblem:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return _problem_from_dict(obj)


# ----------------------------------------------------------------------
# packaged fixtures


def fixture_path(name: str) -> Path:
    """Path to a packaged fixture by bare name or file name.

    ``fixture_path("exsimple")`` resolves exsimple.msp.json; matrix-curve
    fixtures resolve by their .curve.json names.
    """
    root = resources.files("morsesturm") / "fixtures"
    candidates = [name, f"{name}.msp.json", f"{name}.curve.json"]
    for cand in candidates:
        p = Path(str(root / cand))
        if p.is_file():
            return p
    raise FileNotFoundError(
        f"no packaged fixture named {name!r}; available: {list_fixtures()}"
    )


def list_fixtures() -> list[str]:
    root = Path(str(resources.files("morsesturm") / "fixtures"))
    return sorted(p.name for p in root.iterdir() if p.suffix == ".json")


def load_matrix_curve(path_or_name: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Load a sampled symmetric-matrix curve fixture.

    Returns (ts, matrices) with matrices of shape (len(ts), n, n). Accepts a
    file path or a packaged fixture name.
    """
    path = Path(path_or_name)
    if not path.is_file():
        path = fixture_path(str(path_or_name))
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    try:
        ts = np.asarray(obj["ts"], dtype=float)
        mats = np.asarray(obj["matrices"], dtype=float)
    except KeyError as exc:
        raise SchemaError(f"matrix curve file missing key {exc}") from exc
    if mats.ndim != 3 or mats.shape[0] != ts.size:
        raise SchemaError("matrix curve shapes are inconsistent")
    return ts, mats
