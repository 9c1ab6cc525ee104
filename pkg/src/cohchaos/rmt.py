"""Random-matrix diagnostics: level statistics, the four-point form factor,
Haar-averaged OTOC/CGP values and short-time CGP growth."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import cgp, squared_commutator
from .ensembles import (  # noqa: F401  (re-exported samplers)
    KINDS,
    EnsembleSpec,
    sample_goe,
    sample_gue,
    sample_haar_unitary,
)
from .linalg import SpectralDecomposition, as_basis, as_hermitian, eigh, evolve, overlap_matrix
from .models import build_k_local_commuting
from .utils import MonteCarloEstimate, central_slice, mean_and_stderr, sample_rng

POISSON_MEAN_RATIO = 2 * math.log(2) - 1


# ---------------------------------------------------------------------------
# level statistics


@dataclass(frozen=True, eq=False)
class SpacingStatistics:
    spacings: np.ndarray
    ratios: np.ndarray
    histogram: np.ndarray
    bin_edges: np.ndarray

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios))


def spacing_statistics(levels, fraction: float = 0.8, bins: int = 40, s_max: float = 4.0) -> SpacingStatistics:
    """Nearest-neighbour spacings and consecutive-gap ratios of the central ``fraction`` of levels.

    Spacings are divided by their mean within the window (no unfolding);
    the histogram is a density on ``[0, s_max]``.
    """
    if isinstance(levels, SpectralDecomposition):
        levels = levels.eigenvalues
    levels = np.sort(np.asarray(levels, dtype=float))
    if levels.size < 50:
        raise ValueError(f"need at least 50 levels for spacing statistics, got {levels.size}")
    window = levels[central_slice(levels.size, fraction)]
    s = np.diff(window)
    s = s / s.mean()
    a, b = s[:-1], s[1:]
    with np.errstate(invalid="ignore"):
        r = np.where(np.maximum(a, b) > 0, np.minimum(a, b) / np.maximum(a, b), 0.0)
    hist, edges = np.histogram(s, bins=bins, range=(0.0, s_max), density=True)
    return SpacingStatistics(s, r, hist, edges)


def reference_mean_ratio(kind: str, n_levels: int, samples: int = 200, seed: int = 0) -> MonteCarloEstimate:
    """Sampling oracle for the mean gap ratio under the same windowing.

    ``kind`` is ``"Poisson"`` (sorted i.i.d. uniform levels) or ``"GOE"``.
    """
    vals = np.empty(samples)
    for i in range(samples):
        rng = sample_rng(seed, i)
        if kind == "Poisson":
            levels = rng.random(n_levels)
        elif kind == "GOE":
            levels = np.linalg.eigvalsh(sample_goe(n_levels, rng))
        else:
            raise ValueError(f"kind must be 'Poisson' or 'GOE', got {kind!r}")
        vals[i] = spacing_statistics(levels).mean_ratio
    return MonteCarloEstimate.from_samples(vals)


# ---------------------------------------------------------------------------
# four-point spectral form factor


def _set_partitions(items: Sequence[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


_PARTITIONS_4 = [
    (
        [tuple(b) for b in part],
        math.prod((-1) ** (len(b) - 1) * math.factorial(len(b) - 1) for b in part),
    )
    for part in _set_partitions([0, 1, 2, 3])
]
# signs of the exponents: e^{-i(l_k + l_l - l_m - l_n) t}
_CHARGES = (1, 1, -1, -1)


def r4_single(eigenvalues, times, convention: str = "distinct") -> np.ndarray:
    """Four-point form factor of one spectrum at each time.

    ``"distinct"`` sums over pairwise-distinct ``(k, l, m, n)`` using Moebius
    inversion over set partitions; ``"all"`` is the unrestricted ``|sum_k z_k|^4``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phase = lam[:, None] * times[None, :]
    if convention == "all":
        return np.abs(np.exp(-1j * phase).sum(axis=0)) ** 4
    if convention != "distinct":
        raise ValueError(f"convention must be 'distinct' or 'all', got {convention!r}")
    power_sums = {q: np.exp(-1j * q * phase).sum(axis=0) for q in range(-2, 3)}
    total = np.zeros(times.size, dtype=complex)
    for blocks, mu in _PARTITIONS_4:
        term = np.ones(times.size, dtype=complex)
        for b in blocks:
            term = term * power_sums[sum(_CHARGES[i] for i in b)]
        total += mu * term
    return total.real


@dataclass(frozen=True, eq=False)
class SffEstimate:
    times: np.ndarray
    r4_values: np.ndarray
    standard_errors: np.ndarray


def _spectra(ensemble: EnsembleSpec) -> list[np.ndarray]:
    if ensemble.kind not in ("GOE", "GUE"):
        raise ValueError(f"spectral form factor needs a Gaussian ensemble, got {ensemble.kind}")
    return [np.linalg.eigvalsh(h) for h in ensemble]


def sff_r4(ensemble: EnsembleSpec, times, convention: str = "distinct") -> SffEstimate:
    """Ensemble average of ``r4_single`` with per-time standard errors."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    vals = np.array([r4_single(lam, times, convention) for lam in _spectra(ensemble)])
    mean = vals.mean(axis=0)
    err = vals.std(axis=0, ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else np.zeros_like(mean)
    return SffEstimate(times, mean, err)


# ---------------------------------------------------------------------------
# GUE bound


def cgp_diagonal_surrogate(u, basis=None) -> float:
    """CGP with the off-diagonal transition terms dropped: ``1 - (1/d) sum_j X_jj^2``."""
    u = np.asarray(u)
    x = np.abs(as_basis(basis, u.shape[0]).components(u)) ** 2
    return float(1.0 - np.sum(np.diagonal(x) ** 2) / x.shape[0])


@dataclass(frozen=True)
class BoundRow:
    t: float
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float

    @property
    def gap(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 3.0 * math.hypot(self.lhs_stderr, self.rhs_stderr)


def gue_cgp_bound_check(ensemble: EnsembleSpec, basis, times) -> list[BoundRow]:
    """Compare the ensemble-averaged CGP of ``exp(-iHt)`` with ``1 - R4(t)/(d(d+1)(d+2)(d+3))``."""
    if ensemble.kind != "GUE":
        raise ValueError("the bound is stated for the GUE")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    d = ensemble.d
    b = as_basis(basis, d)
    norm = d * (d + 1) * (d + 2) * (d + 3)
    lhs = np.empty((ensemble.samples, times.size))
    r4 = np.empty((ensemble.samples, times.size))
    for i, h in enumerate(ensemble):
        spec = eigh(h)
        lhs[i] = [cgp(evolve(spec, t), b) for t in times]
        r4[i] = r4_single(spec.eigenvalues, times)
    rows = []
    for j, t in enumerate(times):
        lm, le = mean_and_stderr(lhs[:, j])
        rm, re = mean_and_stderr(1.0 - r4[:, j] / norm)
        rows.append(BoundRow(float(t), lm, le, rm, re))
    return rows


def surrogate_discrepancy(ensemble: EnsembleSpec, basis, times) -> np.ndarray:
    """Ensemble mean of ``surrogate - cgp`` at each time."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    b = as_basis(basis, ensemble.d)
    out = np.zeros(times.size)
    for h in ensemble:
        spec = eigh(h)
        for j, t in enumerate(times):
            u = evolve(spec, t)
            x = np.abs(b.components(u)) ** 2
            # the off-diagonal transition weight, summed directly to avoid cancellation
            out[j] += (np.sum(x**2) - np.sum(np.diagonal(x) ** 2)) / ensemble.d
    return out / ensemble.samples


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# ---------------------------------------------------------------------------
# Haar averages


def haar_avg_cgp(d: int) -> float:
    if d < 2:
        raise ValueError("d must be at least 2")
    return (d - 1) / (d + 1)


def haar_avg_otoc_closed_form(v, w, d: int | None = None) -> float:
    """Haar average over ``U`` of the squared commutator of unitaries with eigenvalues ``v``, ``w``."""
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    d = v.size if d is None else d
    if v.shape != (d,) or w.shape != (d,):
        raise ValueError(f"need {d} eigenvalues each, got {v.shape} and {w.shape}")
    if np.max(np.abs(np.abs(np.concatenate([v, w])) - 1)) > 1e-12:
        raise ValueError("eigenvalues must have unit modulus")
    sv, sw = v.sum(), w.sum()
    # sum_{j != l} a_j^* a_l = |sum a|^2 - d for unit-modulus a
    off_v = abs(sv) ** 2 - d
    off_w = abs(sw) ** 2 - d
    cross = off_v * off_w
    return float(
        2 * (d - 1) / (d + 1) + 2 / (d**2 * (d**2 - 1)) * cross - 2 / (d * (d + 1)) * (off_v + off_w)
    )


def haar_avg_otoc_mc(v, w, ensemble: EnsembleSpec) -> MonteCarloEstimate:
    if ensemble.kind != "Haar":
        raise ValueError("Haar ensemble required")
    vm, wm = np.diag(np.asarray(v, dtype=complex)), np.diag(np.asarray(w, dtype=complex))
    return MonteCarloEstimate.from_samples([squared_commutator(vm, wm, u) for u in ensemble])


def haar_avg_cgp_mc(ensemble: EnsembleSpec, basis=None) -> MonteCarloEstimate:
    b = as_basis(basis, ensemble.d)
    return MonteCarloEstimate.from_samples([cgp(u, b) for u in ensemble])


# ---------------------------------------------------------------------------
# short-time growth

FD_STEPS = (1e-2, 5e-3, 2.5e-3)


@dataclass(frozen=True)
class CurvatureReport:
    analytic: float
    finite_difference: float
    kappa: float
    q_bound: float
    mean_square: float
    op_norm: float

    @property
    def kappa_defined(self) -> bool:
        return not math.isnan(self.kappa)

    @property
    def bound_chain_holds(self) -> bool:
        """``analytic <= (Tr H^2 / d) q <= ||H||_inf^2 q`` and ``q <= 1``."""
        tol = 1e-12 * max(1.0, self.op_norm**2)
        return (
            self.analytic <= self.mean_square * self.q_bound + tol
            and self.mean_square <= self.op_norm**2 + tol
            and self.q_bound <= 1.0 + 1e-12
        )


def _second_derivative_at_zero(c, steps=FD_STEPS) -> float:
    """Central differences at ``t = 0`` refined by two Richardson levels (step ratio 2)."""
    c0 = c(0.0)
    d0 = [(c(h) - 2 * c0 + c(-h)) / h**2 for h in steps]
    d1 = [(4 * d0[i + 1] - d0[i]) / 3 for i in range(len(d0) - 1)]
    return (16 * d1[1] - d1[0]) / 15


def short_time_cgp_curvature(h, basis=None, spec: SpectralDecomposition | None = None) -> CurvatureReport:
    """Short-time growth of ``cgp(exp(-iHt), B)``.

    ``analytic`` is the basis-averaged energy variance ``(1/d) sum_j var_j(H)``;
    ``finite_difference`` is half the numerical second derivative at ``t = 0``.
    """
    h = as_hermitian(h)
    d = h.shape[0]
    b = as_basis(basis, d)
    spec = spec or eigh(h)
    hb = b.components(h)
    tr_h2 = float(np.vdot(h, h).real)
    analytic = max((tr_h2 - float(np.sum(np.abs(np.diagonal(hb)) ** 2))) / d, 0.0)
    fd = 0.5 * _second_derivative_at_zero(lambda t: cgp(evolve(spec, t), b))
    scale = max(1.0, np.max(np.abs(h)) ** 2)
    kappa = fd / analytic if analytic > 1e-12 * scale else math.nan
    x = overlap_matrix(b, spec.basis)
    q = float(np.linalg.norm(np.eye(d) - x.T @ x, 2))
    op = float(np.max(np.abs(spec.eigenvalues)))
    return CurvatureReport(analytic, fd, kappa, q, tr_h2 / d, op)


@dataclass(frozen=True)
class KLocalRow:
    L: int
    k: int
    norm_inf: float
    trace_h2: float
    finite_difference: float

    @property
    def normalized(self) -> float:
        return self.finite_difference / self.norm_inf**2

    @property
    def inverse_terms(self) -> float:
        return 1.0 / (self.L - self.k + 1)


def klocal_short_time_scan(L_range, k) -> list[KLocalRow]:
    """Short-time CGP growth of the commuting k-local family in the computational basis.

    ``k`` may be an integer or ``"L"`` (the fully nonlocal member for each L).
    """
    rows = []
    for L in L_range:
        kk = L if k == "L" else int(k)
        if kk > L:
            raise ValueError(f"k={kk} exceeds L={L}")
        h = build_k_local_commuting(L, kk)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = short_time_cgp_curvature(h)
        rows.append(KLocalRow(L, kk, rep.op_norm, rep.mean_square * 2**L, rep.finite_difference))
    return rows


def fit_through_origin(x, y) -> tuple[float, float]:
    """Least-squares slope of ``y = a x`` and its uncentred coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = float(np.dot(x, y) / np.dot(x, x))
    r2 = 1.0 - float(np.sum((y - a * x) ** 2) / np.sum(y**2))
    return a, r2

