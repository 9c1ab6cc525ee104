"""Majorization of probability vectors and its use on dephased eigenstates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coherence import c2, c_rel, renyi2_entropy, shannon_entropy
from .linalg import DimensionError, as_basis, as_probability_vector, eigh
from .utils import central_slice

PARTIAL_SUM_TOL = 1e-12
TOTAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MajorizationResult:
    majorized: bool
    first_violation_index: int | None
    partial_sum_gaps: np.ndarray

    def __bool__(self) -> bool:
        return self.majorized


def _partial_sums(p: np.ndarray) -> np.ndarray:
    return np.cumsum(np.sort(p)[::-1])


def majorizes(w, v) -> MajorizationResult:
    """Test ``v < w``: every sorted partial sum of ``w`` dominates that of ``v``.

    ``first_violation_index`` is the 1-based length ``k`` of the first failing
    partial sum, or ``None``.
    """
    w = as_probability_vector(w)
    v = as_probability_vector(v)
    if w.size != v.size:
        raise DimensionError(f"length mismatch: {w.size} vs {v.size}")
    gaps = _partial_sums(w) - _partial_sums(v)
    bad = np.nonzero(gaps < -PARTIAL_SUM_TOL)[0]
    totals_ok = abs(gaps[-1]) <= TOTAL_TOL
    first = int(bad[0]) + 1 if bad.size else (w.size if not totals_ok else None)
    return MajorizationResult(bool(bad.size == 0 and totals_ok), first, gaps)


def _majorized_columns(p_int: np.ndarray, p_chaos: np.ndarray) -> np.ndarray:
    """Column-wise ``p_chaos[:, k] < p_int[:, k]`` for population matrices."""
    gi = np.cumsum(-np.sort(-p_int, axis=0), axis=0)
    gc = np.cumsum(-np.sort(-p_chaos, axis=0), axis=0)
    gaps = gi - gc
    return np.all(gaps >= -PARTIAL_SUM_TOL, axis=0) & (np.abs(gaps[-1]) <= TOTAL_TOL)


def eigenstate_majorization_flags(h_int, h_chaos, basis=None, spec_int=None, spec_chaos=None) -> np.ndarray:
    """For each energy-ordered index ``k``, whether the dephased ``k``-th chaotic
    eigenstate is majorized by the dephased ``k``-th integrable one."""
    spec_int = spec_int or eigh(h_int)
    spec_chaos = spec_chaos or eigh(h_chaos)
    if spec_int.dimension != spec_chaos.dimension:
        raise DimensionError(f"dimension mismatch: {spec_int.dimension} vs {spec_chaos.dimension}")
    b = as_basis(basis, spec_int.dimension)
    bv = b.vectors.conj().T
    p_int = np.abs(bv @ spec_int.eigenvectors) ** 2
    p_chaos = np.abs(bv @ spec_chaos.eigenvectors) ** 2
    return _majorized_columns(p_int, p_chaos)


def eigenstate_majorization_fraction(
    h_int, h_chaos, basis=None, window: float = 1.0, spec_int=None, spec_chaos=None
) -> float:
    """Fraction of paired eigenstates, within the central ``window`` of the
    spectrum, where the chaotic state is majorized by its integrable partner."""
    flags = eigenstate_majorization_flags(h_int, h_chaos, basis, spec_int, spec_chaos)
    sel = flags[central_slice(flags.size, window)]
    return float(np.mean(sel))


def schur_concavity_check(w, v, tol: float = PARTIAL_SUM_TOL) -> bool:
    """Given ``v < w``, check that every Schur-concave quantity is larger on ``v``.

    Compares Shannon and Renyi-2 entropies of the vectors, and ``c2`` and
    ``c_rel`` of the pure states with amplitudes ``sqrt(p)`` in the
    computational basis.
    """
    res = majorizes(w, v)
    if not res:
        raise ValueError(
            f"precondition failed: v is not majorized by w (first violation at k={res.first_violation_index})"
        )
    w = as_probability_vector(w)
    v = as_probability_vector(v)
    sw, sv = np.sqrt(w), np.sqrt(v)
    pairs = [
        (shannon_entropy(v), shannon_entropy(w)),
        (renyi2_entropy(v), renyi2_entropy(w)),
        (c2(sv / np.linalg.norm(sv)), c2(sw / np.linalg.norm(sw))),
        (c_rel(sv / np.linalg.norm(sv)), c_rel(sw / np.linalg.norm(sw))),
    ]
    return all(a >= b - tol for a, b in pairs)
