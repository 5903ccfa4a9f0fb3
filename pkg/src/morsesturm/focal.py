"""Focal-instant detection, classification and signed counting.

A focal instant of a solution family is a parameter value where the family
matrix M(t) loses rank. The scanner locates them from two independent
signals on the master grid: dips of the smallest singular value (primary)
and sign changes of det M(t) (cross-check), refines each candidate to a
tight tolerance, merges duplicates, and classifies every survivor by its
multiplicity, the restriction of the symmetry form to the complement space
spanned by the kernel velocities, and a degeneracy flag.

The signed count over interior instants is the Maslov-type index; the
robust variant certifies it by unanimity across randomly perturbed copies
of the problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._roots import bisect_root, golden_min
from .errors import (
    AllTrialsDegenerate,
    DegenerateFocalInstant,
    EndpointFocal,
    NoAgreement,
    UnresolvedRoot,
)
from .forms import DEFAULT_TOL_EIG, Subspace, inertia, restrict
from .problem import MorseSturmProblem, Perturbation, perturb
from .solver import (
    DEFAULT_GRID_SIZE,
    DEFAULT_ODE_TOL,
    FundamentalSolution,
    solve_fundamental,
)

__all__ = [
    "DEFAULT_TOL_RANK",
    "DEFAULT_REFINE_TOL",
    "DEFAULT_T_GUARD",
    "FocalInstant",
    "FocalScan",
    "MaslovAgreement",
    "TrialRecord",
    "scan_focal",
    "maslov_index",
    "maslov_robust",
]

DEFAULT_TOL_RANK = 1e-7
DEFAULT_REFINE_TOL = 1e-10
DEFAULT_T_GUARD = 0.01

#: Instants beyond this point count as sitting at the right endpoint.
ENDPOINT_BAND = 1e-8

#: Relative dip threshold that promotes a local sigma_min minimum to a
#: candidate bracket (deliberately loose; refinement does the real test).
_CANDIDATE_FRACTION = 0.05

#: Fraction of grid samples allowed below the strict rank threshold before
#: the focal set is declared non-discrete.
_NON_DISCRETE_FRACTION = 0.2

_MAX_CLUSTERS = 64


@dataclass(frozen=True)
class FocalInstant:
    """One rank-loss instant of the solution family.

    ``kernel_basis`` holds coefficient vectors in the family basis (columns
    c with M(t) c = 0); ``jperp_basis`` holds the corresponding velocity
    vectors M'(t) c, which span the complement space whose restricted form
    defines the signature.
    """

    t: float
    multiplicity: int
    signature: int
    degenerate: bool
    kernel_basis: np.ndarray
    jperp_basis: np.ndarray


@dataclass(frozen=True)
class FocalScan:
    """Scan result: classified instants plus the raw detection traces."""

    instants: tuple[FocalInstant, ...]
    endpoint_focal: bool
    ts: np.ndarray = field(repr=False)
    det_trace: np.ndarray = field(repr=False)
    sigma_min_trace: np.ndarray = field(repr=False)
    tolerances: dict = field(default_factory=dict)

    @property
    def interior_instants(self) -> tuple[FocalInstant, ...]:
        return tuple(f for f in self.instants if f.t < 1.0 - ENDPOINT_BAND)

    @property
    def endpoint_instant(self) -> FocalInstant | None:
        for f in self.instants:
            if f.t >= 1.0 - ENDPOINT_BAND:
                return f
        return None

    @property
    def total_multiplicity(self) -> int:
        return sum(f.multiplicity for f in self.interior_instants)

    @property
    def signed_count(self) -> int:
        return sum(f.signature for f in self.interior_instants)


def _classify(
    solution: FundamentalSolution,
    t_star: float,
    tol_rank: float,
    tol_eig: float,
    sigma_max_global: float,
) -> FocalInstant | None:
    """Build a FocalInstant at a refined candidate, or None if the matrix
    is actually full rank there."""
    n = solution.n
    m = solution.value(t_star)
    u, s, vt = np.linalg.svd(m)
    if s[0] <= tol_rank * sigma_max_global:
        # The whole family vanishes here; every direction is kernel.
        mu = n
        kernel = np.eye(n)
    else:
        if s[-1] >= tol_rank * sigma_max_global:
            return None
        # Rank is judged against the global scale of the family. Two simple
        # roots closer together than the scan can separate leave several
        # singular values far below that scale at the refined point; the
        # looser cluster threshold folds them into one instant whose
        # multiplicity and signature sum over the unresolved pair.
        cluster_level = np.sqrt(tol_rank) * sigma_max_global
        mu = int(np.sum(s < cluster_level))
        kernel = vt[n - mu:].T
    jperp = solution.derivative(t_star) @ kernel
    gram = restrict(solution.problem.metric, Subspace(jperp))
    ine = inertia(gram, tol_eig)
    return FocalInstant(
        t=float(t_star),
        multiplicity=mu,
        signature=ine.signature,
        degenerate=not ine.nondegenerate,
        kernel_basis=kernel,
        jperp_basis=jperp,
    )


def scan_focal(
    solution: FundamentalSolution,
    tol_rank: float = DEFAULT_TOL_RANK,
    refine_tol: float = DEFAULT_REFINE_TOL,
    t_guard: float = DEFAULT_T_GUARD,
    tol_eig: float = DEFAULT_TOL_EIG,
) -> FocalScan:
    """Locate and classify every focal instant in (t_guard, 1].

    Candidates come from local minima of the smallest singular value and
    from determinant sign changes on the master grid; each is refined to
    ``refine_tol`` and candidates closer than one master grid cell are
    merged (detections inside one cell cannot be told apart at scan
    resolution). A singular value below ``tol_rank`` times the global
    largest one counts as zero. Raises UnresolvedRoot when the focal set
    does not look discrete (a large fraction of samples rank-deficient,
    or an implausible number of candidate clusters).
    """
    ts = solution.ts
    mats = solution.columns
    svals = np.linalg.svd(mats, compute_uv=False)
    sigma_min = svals[:, -1]
    sigma_max_global = float(np.max(svals[:, 0]))
    det_trace = np.linalg.det(mats)

    if sigma_max_global == 0.0:
        raise UnresolvedRoot("solution family is identically zero")

    guard_mask = ts >= t_guard
    below_strict = sigma_min[guard_mask] < tol_rank * sigma_max_global
    if np.mean(below_strict) > _NON_DISCRETE_FRACTION:
        raise UnresolvedRoot(
            "focal set does not look discrete: "
            f"{np.mean(below_strict):.0%} of samples are rank deficient",
            bracket=(float(ts[guard_mask][0]), 1.0),
        )

    def sigma_min_at(t: float) -> float:
        return float(np.linalg.svd(solution.value(t), compute_uv=False)[-1])

    def det_at(t: float) -> float:
        return float(np.linalg.det(solution.value(t)))

    dip_level = _CANDIDATE_FRACTION * sigma_max_global
    candidates: list[float] = []

    interior = np.arange(1, ts.size - 1)
    interior = interior[ts[interior] >= t_guard]
    for j in interior:
        if (
            sigma_min[j] < dip_level
            and sigma_min[j] <= sigma_min[j - 1]
            and sigma_min[j] <= sigma_min[j + 1]
        ):
            t_star, _ = golden_min(
                sigma_min_at, float(ts[j - 1]), float(ts[j + 1]), refine_tol
            )
            candidates.append(t_star)

    if sigma_min[-1] < dip_level:
        t_star, _ = golden_min(sigma_min_at, float(ts[-2]), 1.0, refine_tol)
        candidates.append(t_star)

    start = int(np.argmax(guard_mask))
    for j in range(start, ts.size - 1):
        if det_trace[j] * det_trace[j + 1] < 0.0:
            root = bisect_root(det_at, float(ts[j]), float(ts[j + 1]), refine_tol)
            if root is not None:
                candidates.append(root)

    candidates.sort()
    merge_radius = max(2.0 * refine_tol, float(ts[1] - ts[0]))
    groups: list[list[float]] = []
    for c in candidates:
        if groups and c - groups[-1][-1] < merge_radius:
            groups[-1].append(c)
        else:
            groups.append([c])
    if len(groups) > _MAX_CLUSTERS:
        raise UnresolvedRoot(
            f"{len(groups)} candidate clusters; focal set not discrete",
            bracket=(groups[0][0], groups[-1][-1]),
        )
    # Each group is represented by its deepest member: between two split
    # roots the mean would sit where the matrix is far from singular.
    clusters = [min(grp, key=sigma_min_at) for grp in groups]

    instants = []
    for t_star in clusters:
        inst = _classify(solution, t_star, tol_rank, tol_eig, sigma_max_global)
        if inst is not None:
            instants.append(inst)
    instants.sort(key=lambda f: f.t)

    scan = FocalScan(
        instants=tuple(instants),
        endpoint_focal=any(f.t >= 1.0 - ENDPOINT_BAND for f in instants),
        ts=ts,
        det_trace=det_trace,
        sigma_min_trace=sigma_min,
        tolerances={
            "tol_rank": tol_rank,
            "refine_tol": refine_tol,
            "t_guard": t_guard,
            "tol_eig": tol_eig,
        },
    )
    return scan


def maslov_index(scan: FocalScan) -> int:
    """Sum of signatures over interior focal instants.

    Well defined only when the right endpoint is not focal and every
    interior instant is nondegenerate; otherwise the corresponding error
    is raised and the robust variant should be used instead.
    """
    if scan.endpoint_focal:
        raise EndpointFocal(
            "t = 1 is focal; the signed count needs an endpoint correction"
        )
    bad = [f.t for f in scan.interior_instants if f.degenerate]
    if bad:
        raise DegenerateFocalInstant(
            f"degenerate focal instant(s) at t = {bad}; use maslov_robust"
        )
    return scan.signed_count


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one perturbation trial."""

    seed: int
    status: str  # "ok", "degenerate", or "endpoint-focal"
    value: int | None


@dataclass(frozen=True)
class MaslovAgreement:
    """A certified signed count with its per-trial evidence."""

    value: int
    trials: tuple[TrialRecord, ...]

    @property
    def unanimous(self) -> bool:
        vals = {t.value for t in self.trials if t.status == "ok"}
        return len(vals) == 1


def maslov_robust(
    problem: MorseSturmProblem,
    eps: float = 1e-4,
    n_trials: int = 8,
    seed: int = 0,
    targets: tuple[str, ...] = ("R",),
    grid_size: int = DEFAULT_GRID_SIZE,
    ode_tol: float = DEFAULT_ODE_TOL,
    tol_rank: float = DEFAULT_TOL_RANK,
    refine_tol: float = DEFAULT_REFINE_TOL,
    t_guard: float = DEFAULT_T_GUARD,
    tol_eig: float = DEFAULT_TOL_EIG,
) -> MaslovAgreement:
    """Signed count certified by unanimity over perturbed copies.

    With ``eps == 0`` this reduces exactly to maslov_index of the
    unperturbed problem. Otherwise ``n_trials`` copies are perturbed with
    seeds ``seed + i``, re-solved and re-scanned; trials whose scan is
    endpoint focal or contains a degenerate instant are recorded and
    excluded. All surviving trials must agree (NoAgreement otherwise);
    if none survive, AllTrialsDegenerate is raised. The unperturbed scan
    must not be endpoint focal to begin with.
    """

    def scan_one(p: MorseSturmProblem) -> FocalScan:
        sol = solve_fundamental(p, grid_size=grid_size, ode_tol=ode_tol)
        return scan_focal(
            sol, tol_rank=tol_rank, refine_tol=refine_tol,
            t_guard=t_guard, tol_eig=tol_eig,
        )

    base = scan_one(problem)
    if base.endpoint_focal:
        raise EndpointFocal(
            "t = 1 is focal for the unperturbed problem; the robust count "
            "is about interior instants only"
        )
    if eps == 0.0:
        value = maslov_index(base)
        return MaslovAgreement(value, (TrialRecord(seed, "ok", value),))

    trials: list[TrialRecord] = []
    for i in range(n_trials):
        trial_seed = seed + i
        moved = perturb(problem, Perturbation(eps=eps, seed=trial_seed, targets=targets))
        scan = scan_one(moved)
        if scan.endpoint_focal:
            trials.append(TrialRecord(trial_seed, "endpoint-focal", None))
            continue
        if any(f.degenerate for f in scan.interior_instants):
            trials.append(TrialRecord(trial_seed, "degenerate", None))
            continue
        trials.append(TrialRecord(trial_seed, "ok", scan.signed_count))

    values = [t.value for t in trials if t.status == "ok"]
    if not values:
        raise AllTrialsDegenerate(
            f"all {n_trials} perturbation trials were degenerate or endpoint focal"
        )
    if len(set(values)) > 1:
        raise NoAgreement(
            "perturbation trials disagree: "
            + ", ".join(f"seed {t.seed} -> {t.value}" for t in trials if t.status == "ok")
        )
    return MaslovAgreement(values[0], tuple(trials))
