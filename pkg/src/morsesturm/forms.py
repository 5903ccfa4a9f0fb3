"""Symmetric bilinear forms on R^n and their inertia bookkeeping.

This module owns the small linear-algebra vocabulary everything else is built
on: nondegenerate symmetric forms, inertia triples computed by symmetric
eigendecomposition with an explicit zero tolerance, restrictions of a form to
a subspace, orthogonal complements with respect to an indefinite form, and
symmetry checks for operators relative to such a form.

Conventions used throughout the package:

* a form is represented by its Gram matrix G in the standard basis, so
  g(x, y) = x^T G y;
* a subspace is represented by a matrix whose columns are a basis;
* an operator A is symmetric relative to g when G A is a symmetric matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMetric

__all__ = [
    "Inertia",
    "MetricForm",
    "Subspace",
    "inertia",
    "restrict",
    "g_orthogonal_complement",
    "check_g_symmetric",
    "matrix_curve_inertia",
    "subspaces_equal",
]

#: Relative eigenvalue threshold below which a direction counts as null.
DEFAULT_TOL_EIG = 1e-9

#: Principal-angle threshold for declaring two subspaces equal.
DEFAULT_TOL_ANGLE = 1e-8


@dataclass(frozen=True)
class Inertia:
    """Signature data of a symmetric matrix: counts of negative, zero and
    positive eigenvalues relative to a tolerance."""

    n_minus: int
    n_zero: int
    n_plus: int

    @property
    def dim(self) -> int:
        return self.n_minus + self.n_zero + self.n_plus

    @property
    def signature(self) -> int:
        """n_plus - n_minus, the usual integer signature."""
        return self.n_plus - self.n_minus

    @property
    def nondegenerate(self) -> bool:
        return self.n_zero == 0

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_minus, self.n_zero, self.n_plus)


def _as_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


def inertia(a: np.ndarray, tol_eig: float = DEFAULT_TOL_EIG) -> Inertia:
    """Inertia of a symmetric matrix via eigendecomposition.

    Eigenvalues with ``|lam| <= tol_eig * max(1, spectral_norm)`` count as
    zero. The input is symmetrized first, so mild numerical asymmetry from
    assembly is harmless.

    Parameters
    ----------
    a : ndarray
        Square matrix, assumed symmetric up to roundoff.
    tol_eig : float
        Relative zero threshold for eigenvalues.
    """
    a = _as_symmetric(a)
    if a.shape[0] == 0:
        return Inertia(0, 0, 0)
    lam = np.linalg.eigvalsh(a)
    scale = max(1.0, float(np.max(np.abs(lam)))) if lam.size else 1.0
    thresh = tol_eig * scale
    n_minus = int(np.sum(lam < -thresh))
    n_plus = int(np.sum(lam > thresh))
    return Inertia(n_minus, a.shape[0] - n_minus - n_plus, n_plus)


@dataclass(frozen=True)
class MetricForm:
    """A nondegenerate symmetric bilinear form on R^n, held as its Gram
    matrix.

    Raises DegenerateMetric on construction if the matrix is singular at the
    inertia tolerance, so a MetricForm instance can always be inverted.
    """

    matrix: np.ndarray
    tol_eig: float = DEFAULT_TOL_EIG
    _inertia: Inertia = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = _as_symmetric(self.matrix)
        object.__setattr__(self, "matrix", m)
        ine = inertia(m, self.tol_eig)
        if not ine.nondegenerate:
            raise DegenerateMetric(
                f"form has {ine.n_zero} null direction(s); inertia {ine.as_tuple()}"
            )
        object.__setattr__(self, "_inertia", ine)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def inertia(self) -> Inertia:
        return self._inertia

    @property
    def positive_definite(self) -> bool:
        return self._inertia.n_minus == 0

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    def apply(self, x: np.ndarray, y: np.ndarray) -> float:
        """Evaluate g(x, y)."""
        return float(np.asarray(x) @ self.matrix @ np.asarray(y))

    def gram(self, basis: np.ndarray) -> np.ndarray:
        """Gram matrix of g restricted to the given column basis."""
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        return basis.T @ self.matrix @ basis


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of R^n given by a basis matrix (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise ValueError("basis must be a 2d array (columns are vectors)")
        if b.shape[1] > 0 and np.linalg.matrix_rank(b) < b.shape[1]:
            raise ValueError("basis columns are linearly dependent")
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @staticmethod
    def zero(ambient_dim: int) -> "Subspace":
        return Subspace(np.zeros((ambient_dim, 0)))

    @staticmethod
    def full(ambient_dim: int) -> "Subspace":
        return Subspace(np.eye(ambient_dim))

    def orthonormalized(self) -> "Subspace":
        """Same subspace with a Euclidean-orthonormal basis (via QR)."""
        if self.dim == 0:
            return self
        q, _ = np.linalg.qr(self.basis)
        return Subspace(q)


def restrict(form: MetricForm | np.ndarray, space: Subspace) -> np.ndarray:
    """Gram matrix of a form restricted to a subspace, in the subspace basis.

    Accepts either a MetricForm or a raw symmetric matrix (useful for
    restricting forms that are allowed to be degenerate).
    """
    g = form.matrix if isinstance(form, MetricForm) else _as_symmetric(form)
    return space.basis.T @ g @ space.basis


def g_orthogonal_complement(form: MetricForm, space: Subspace) -> Subspace:
    """Complement of a subspace relative to an indefinite form.

    The complement is { x : g(x, p) = 0 for all p in the subspace }, computed
    as the kernel of B^T G. The returned basis is Euclidean-orthonormal. For a
    g-nondegenerate input subspace the complement is a true algebraic
    complement; for a degenerate one the two spaces intersect, which callers
    must handle themselves.
    """
    n = form.dim
    if space.dim == 0:
        return Subspace.full(n)
    constraints = space.basis.T @ form.matrix  # (k, n)
    # Kernel via SVD, same recipe as scipy.linalg.null_space.
    _, s, vt = np.linalg.svd(constraints)
    tol = max(constraints.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return Subspace(vt[rank:].T)


def check_g_symmetric(
    form: MetricForm | np.ndarray,
    operator: np.ndarray,
    tol: float = 1e-9,
) -> bool:
    """Whether an operator A is symmetric relative to g.

    The test is ``||G A - A^T G|| <= tol * ||G A||`` in the Frobenius norm,
    with the convention that a near-zero G A (norm below 1e-12 times the
    scale of G and A) counts as symmetric, so exact zero operators pass.
    """
    g = form.matrix if isinstance(form, MetricForm) else np.asarray(form, dtype=float)
    a = np.asarray(operator, dtype=float)
    ga = g @ a
    asym = np.linalg.norm(ga - ga.T)
    scale = np.linalg.norm(ga)
    floor = 1e-12 * max(1.0, np.linalg.norm(g) * np.linalg.norm(a))
    if scale <= floor:
        return asym <= floor
    return asym <= tol * scale


def matrix_curve_inertia(
    ts: np.ndarray,
    matrices: np.ndarray,
    tol_eig: float = DEFAULT_TOL_EIG,
) -> list[Inertia]:
    """Inertia of a one-parameter family of symmetric matrices, sample by
    sample.

    This is the diagnostic used to tabulate how n_minus behaves across a
    degeneracy instant of a matrix curve; no continuity in t is assumed and
    none is enforced.
    """
    ts = np.asarray(ts, dtype=float)
    mats = np.asarray(matrices, dtype=float)
    if mats.ndim != 3 or mats.shape[0] != ts.shape[0]:
        raise ValueError("matrices must have shape (len(ts), n, n)")
    return [inertia(mats[i], tol_eig) for i in range(ts.shape[0])]


def subspaces_equal(
    a: Subspace,
    b: Subspace,
    tol_angle: float = DEFAULT_TOL_ANGLE,
) -> bool:
    """Subspace equality via principal angles.

    True when both spaces have the same dimension and the largest principal
    angle between them is below tol_angle.
    """
    if a.ambient_dim != b.ambient_dim or a.dim != b.dim:
        return False
    if a.dim == 0:
        return True
    qa = a.orthonormalized().basis
    qb = b.orthonormalized().basis
    # sin(theta_max) is the spectral norm of the projector difference. This
    # stays accurate for tiny angles, where arccos of a near-unit cosine
    # would lose half the working precision.
    gap = qa @ qa.T - qb @ qb.T
    sin_theta = float(np.linalg.norm(gap, ord=2))
    return np.arcsin(min(sin_theta, 1.0)) < tol_angle
