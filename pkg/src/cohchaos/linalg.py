"""Dense complex linear algebra shared by every other module.

Matrices are plain ``numpy.ndarray`` objects; the ``as_*`` helpers validate
structure on the way in and return a cleaned copy. Only objects that carry
more than one array (spectra, bases) get their own classes.

Conventions
-----------
* eigenvalues ascending; eigenvector global phase fixed so that the first
  largest-magnitude component is real and positive
* near-degenerate eigenvalues (gap <= ``DEGENERACY_TOL``) are ordered by the
  position of the largest-magnitude eigenvector entry
* matrix exponentials of Hermitian operators only through the spectral
  decomposition
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
STATE_NORM_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
DEGENERACY_TOL = 1e-10


class DimensionError(ValueError):
    """Operand dimensions do not match."""


class StructureError(ValueError):
    """A matrix or vector violates the structure its type requires."""


class EigensolverError(RuntimeError):
    """The dense eigensolver failed to converge."""


class DegeneracyWarning(UserWarning):
    """An identity that assumes a nondegenerate spectrum was evaluated anyway."""


# ---------------------------------------------------------------------------
# validators


def as_matrix(a, square: bool = True) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise StructureError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise StructureError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise StructureError("matrix has non-finite entries")
    if not (np.issubdtype(a.dtype, np.floating) or np.issubdtype(a.dtype, np.complexfloating)):
        a = a.astype(float)
    return a


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``a`` as Hermitian and return the exactly symmetrised copy."""
    a = as_matrix(a)
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol:
        raise StructureError(f"matrix is not Hermitian: max|M - M^dag| = {dev:.3e} > {tol:.0e}")
    return 0.5 * (a + a.conj().T)


def as_unitary(a, tol: float = UNITARY_TOL) -> np.ndarray:
    a = as_matrix(a)
    dev = np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])))
    if dev > tol:
        raise StructureError(f"matrix is not unitary: max|U^dag U - I| = {dev:.3e} > {tol:.0e}")
    return a


def as_pure_state(psi, tol: float = STATE_NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.ndim != 1 or psi.size < 1:
        raise StructureError(f"expected a 1-D state vector, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise StructureError("state vector has non-finite entries")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise StructureError(f"state is not normalised: |psi| = {norm!r}")
    return psi


def as_density_matrix(rho) -> np.ndarray:
    """Density matrix from ``rho``; a 1-D input is read as a pure state."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        psi = as_pure_state(rho)
        return np.outer(psi, psi.conj())
    rho = as_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise StructureError(f"density matrix trace {tr!r} differs from 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -POSITIVITY_TOL:
        raise StructureError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho


def as_probability_vector(p) -> np.ndarray:
    """Nonnegative vector summing to one; entries within -1e-12 of zero are clamped."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise StructureError(f"expected a 1-D probability vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise StructureError("probability vector has non-finite entries")
    if np.any(p < -1e-12):
        raise StructureError(f"probability vector has negative entry {p.min():.3e}")
    total = p.sum()
    if abs(total - 1.0) > TRACE_TOL:
        raise StructureError(f"probabilities sum to {total!r}, not 1")
    return np.clip(p, 0.0, None)


def check_bistochastic(x, tol: float = 1e-10) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise StructureError(f"bistochastic matrix must be square, got {x.shape}")
    if np.any(x < -tol) or np.any(x > 1 + tol):
        raise StructureError("bistochastic entries must lie in [0, 1]")
    row = np.max(np.abs(x.sum(axis=1) - 1.0))
    col = np.max(np.abs(x.sum(axis=0) - 1.0))
    if max(row, col) > tol:
        raise StructureError(f"row/column sums deviate from 1 by {max(row, col):.3e}")
    return x


def _check_same_dim(*dims: int) -> int:
    if len(set(dims)) != 1:
        raise DimensionError(f"dimension mismatch: {dims}")
    return dims[0]


# ---------------------------------------------------------------------------
# bases and spectra


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Ordered orthonormal basis; column ``j`` of ``vectors`` is ``|j>``."""

    vectors: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vectors", as_unitary(self.vectors))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.dimension:
                raise StructureError("one label per basis vector required")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def computational(cls, d: int) -> "OrthonormalBasis":
        return cls(np.eye(d))

    @property
    def dimension(self) -> int:
        return self.vectors.shape[0]

    @property
    def is_computational(self) -> bool:
        return bool(np.array_equal(self.vectors, np.eye(self.dimension)))

    def projector(self, j: int) -> np.ndarray:
        v = self.vectors[:, j]
        return np.outer(v, v.conj())

    def projectors(self) -> np.ndarray:
        """All rank-1 projectors stacked as a ``(d, d, d)`` array."""
        v = self.vectors
        return np.einsum("aj,bj->jab", v, v.conj())

    def components(self, op) -> np.ndarray:
        """Matrix elements ``<j|op|k>`` of an operator (2-D) or amplitudes of a state (1-D)."""
        op = np.asarray(op)
        if op.shape[0] != self.dimension:
            raise DimensionError(f"operand dimension {op.shape[0]} != basis dimension {self.dimension}")
        if self.is_computational:
            return op
        if op.ndim == 1:
            return self.vectors.conj().T @ op
        return self.vectors.conj().T @ op @ self.vectors

    def permuted(self, order: Sequence[int]) -> "OrthonormalBasis":
        order = list(order)
        labels = None if self.labels is None else tuple(self.labels[i] for i in order)
        return OrthonormalBasis(self.vectors[:, order], labels)


def as_basis(basis, d: int | None = None) -> OrthonormalBasis:
    """Coerce ``None`` (computational), an int, a unitary array or a basis."""
    if isinstance(basis, OrthonormalBasis):
        b = basis
    elif basis is None:
        if d is None:
            raise ValueError("dimension needed for the default computational basis")
        b = OrthonormalBasis.computational(d)
    elif isinstance(basis, (int, np.integer)):
        b = OrthonormalBasis.computational(int(basis))
    else:
        b = OrthonormalBasis(np.asarray(basis))
    if d is not None:
        _check_same_dim(b.dimension, d)
    return b


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_norm: float = field(default=1.0, repr=False)

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size

    @property
    def basis(self) -> OrthonormalBasis:
        return OrthonormalBasis(self.eigenvectors)

    @property
    def min_gap(self) -> float:
        if self.dimension < 2:
            return np.inf
        return float(np.min(np.diff(self.eigenvalues)))

    def is_degenerate(self, tol: float = DEGENERACY_TOL) -> bool:
        return self.min_gap <= tol

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def residual(self, h) -> float:
        return float(np.max(np.abs(self.reconstruct() - h)))


def _fix_phases(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Make the first largest-magnitude entry of every column real positive."""
    mag = np.abs(v)
    lead = np.argmax(mag >= mag.max(axis=0) - 1e-12, axis=0)
    cols = np.arange(v.shape[1])
    pivot = v[lead, cols]
    if np.iscomplexobj(v):
        v = v * (np.abs(pivot) / pivot)
    else:
        v = v * np.sign(pivot)
    return v, lead


def _tie_break_order(w: np.ndarray, v: np.ndarray, lead: np.ndarray) -> np.ndarray:
    order = np.arange(w.size)
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or w[i] - w[i - 1] > DEGENERACY_TOL:
            if i - start > 1:
                block = order[start:i]
                keys = sorted(block, key=lambda c: (lead[c], -abs(v[lead[c], c])))
                order[start:i] = keys
            start = i
    return order


def eigh(h, check: bool = False) -> SpectralDecomposition:
    """Hermitian eigendecomposition with reproducible ordering and phases.

    Parameters
    ----------
    h : array_like
        Hermitian matrix (validated to 1e-12, then symmetrised).
    check : bool
        Verify the reconstruction residual ``<= 1e-10 * d * max|H|``.
    """
    h = as_hermitian(h)
    d = h.shape[0]
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge for a {d}x{d} matrix") from exc
    v, lead = _fix_phases(v)
    order = _tie_break_order(w, v, lead)
    spec = SpectralDecomposition(w[order], v[:, order], float(np.max(np.abs(h))))
    if check:
        tol = 1e-10 * d * max(spec.source_norm, 1.0)
        res = spec.residual(h)
        if res > tol:
            raise EigensolverError(f"reconstruction residual {res:.3e} exceeds {tol:.1e} (d={d})")
    return spec


def evolve(spec: SpectralDecomposition, t: float) -> np.ndarray:
    """``U_t = V exp(-i Lambda t) V^dag``."""
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t!r}")
    v = spec.eigenvectors
    return (v * np.exp(-1j * spec.eigenvalues * t)) @ v.conj().T


# ---------------------------------------------------------------------------
# superoperators and bipartite tools


def dephase(rho, basis=None) -> np.ndarray:
    """``D_B(X) = sum_j Pi_j X Pi_j``, returned in the computational representation."""
    rho = np.asarray(rho)
    b = as_basis(basis, rho.shape[0])
    diag = np.diagonal(b.components(rho)).copy()
    if b.is_computational:
        return np.diag(diag)
    return (b.vectors * diag) @ b.vectors.conj().T


def _bipartite_dims(dims, total: int) -> tuple[int, int]:
    da, db = (int(x) for x in dims)
    if da < 1 or db < 1 or da * db != total:
        raise DimensionError(f"dims {dims} do not factorise dimension {total}")
    return da, db


def partial_trace(rho, dims, keep: str = "a") -> np.ndarray:
    """Reduced state on subsystem ``keep`` ('a' first factor, 'b' second)."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    da, db = _bipartite_dims(dims, rho.shape[0])
    r = rho.reshape(da, db, da, db)
    if keep in ("a", 0):
        return np.einsum("ijkj->ik", r)
    if keep in ("b", 1):
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 'a' or 'b', got {keep!r}")


def schmidt_squared(psi, dims) -> np.ndarray:
    """Squared Schmidt coefficients (spectrum of the reduced state), descending."""
    psi = as_pure_state(psi)
    da, db = _bipartite_dims(dims, psi.size)
    s = np.linalg.svd(psi.reshape(da, db), compute_uv=False)
    return s**2


def overlap_matrix(b1, b2) -> np.ndarray:
    """``X[j, k] = |<j|k'>|^2``, a bistochastic matrix."""
    b1 = as_basis(b1)
    b2 = as_basis(b2, b1.dimension)
    return np.abs(b1.vectors.conj().T @ b2.vectors) ** 2


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def hs_norm_sq(a) -> float:
    """Squared Hilbert-Schmidt norm ``Tr(A^dag A)``."""
    a = np.asarray(a)
    return float(np.vdot(a, a).real)


def warn_if_degenerate(spec: SpectralDecomposition, what: str) -> bool:
    if spec.is_degenerate():
        warnings.warn(
            f"{what}: spectrum has a gap {spec.min_gap:.2e} <= {DEGENERACY_TOL:.0e}; "
            "diagonal-ensemble identities do not apply",
            DegeneracyWarning,
            stacklevel=3,
        )
        return True
    return False
