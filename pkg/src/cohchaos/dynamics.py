"""Scrambling diagnostics for unitary channels.

Operators are dense ``(d, d)`` arrays and bases are ``OrthonormalBasis``
objects (or anything ``as_basis`` accepts). Heisenberg-picture evolution is
``W(t) = U^dag W U``; the composed map that pairs with the basis of ``V`` is
therefore ``U^dag`` followed by the intertwiner ``B_V -> B_W``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg as sla

from .coherence import c2 as _c2
from .ensembles import EnsembleSpec
from .linalg import (
    DimensionError,
    OrthonormalBasis,
    as_basis,
    as_density_matrix,
    as_matrix,
    as_unitary,
    commutator,
    eigh,
    evolve,
    hs_norm_sq,
)
from .models import TfimParams, build_tfim, sigma_z_diagonal
from .utils import MonteCarloEstimate

EIGENPHASE_TOL = 1e-12


def _square_same(*ops) -> int:
    mats = [as_matrix(op) for op in ops]
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionError(f"operator dimensions differ: {sorted(dims)}")
    return dims.pop()


def heisenberg(w, u) -> np.ndarray:
    return u.conj().T @ w @ u


def squared_commutator(v, w, u) -> float:
    """``C(t) = (1/d) || [V, W(t)] ||_2^2`` at infinite temperature."""
    d = _square_same(v, w, u)
    return hs_norm_sq(commutator(v, heisenberg(w, u))) / d


def otoc_F(v, w, u) -> complex:
    """Four-point function ``(1/d) Tr(W(t)^dag V^dag W(t) V)``."""
    d = _square_same(v, w, u)
    wt = heisenberg(w, u)
    return complex(np.trace(wt.conj().T @ v.conj().T @ wt @ v) / d)


# ---------------------------------------------------------------------------
# coherence-generating power


def transition_matrix(u, basis=None) -> np.ndarray:
    """``X[j, k] = Tr(Pi_j U Pi_k U^dag) = |<j|U|k>|^2``."""
    u = as_matrix(u)
    return np.abs(as_basis(basis, u.shape[0]).components(u)) ** 2


def cgp(u, basis=None) -> float:
    """Coherence-generating power ``1 - (1/d) Tr(X^T X)``."""
    x = transition_matrix(u, basis)
    return float(1.0 - np.sum(x**2) / x.shape[0])


def cgp_commutator_form(u, basis=None) -> float:
    """``(1/2d) sum_{jk} || [Pi_j, U Pi_k U^dag] ||_2^2``, evaluated literally."""
    u = as_matrix(u)
    b = as_basis(basis, u.shape[0])
    proj = b.projectors()
    total = 0.0
    for pk in proj:
        evolved = u @ pk @ u.conj().T
        comm = proj @ evolved - evolved @ proj
        total += float(np.sum(np.abs(comm) ** 2))
    return total / (2 * b.dimension)


def intertwiner(b_from, b_to) -> np.ndarray:
    """Unitary mapping ``|j_from>`` to ``|j_to>`` column by column."""
    b1 = as_basis(b_from)
    b2 = as_basis(b_to, b1.dimension)
    return b2.vectors @ b1.vectors.conj().T


@dataclass(frozen=True, eq=False)
class UnitaryEigensystem:
    """A unitary given by its eigenbasis and unit-modulus eigenvalues."""

    basis: OrthonormalBasis
    eigenphases: np.ndarray

    def __post_init__(self):
        b = as_basis(self.basis)
        ph = np.asarray(self.eigenphases, dtype=complex)
        if ph.shape != (b.dimension,):
            raise DimensionError(f"need {b.dimension} eigenphases, got shape {ph.shape}")
        dev = np.max(np.abs(np.abs(ph) - 1.0))
        if dev > EIGENPHASE_TOL:
            raise ValueError(f"eigenphases must have unit modulus (deviation {dev:.2e})")
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "eigenphases", ph)

    @classmethod
    def from_unitary(cls, u) -> "UnitaryEigensystem":
        u = as_unitary(u)
        t, z = sla.schur(u.astype(complex), output="complex")
        ph = np.diagonal(t)
        return cls(OrthonormalBasis(z), ph / np.abs(ph))

    @classmethod
    def diagonal(cls, phases) -> "UnitaryEigensystem":
        phases = np.asarray(phases)
        return cls(OrthonormalBasis.computational(phases.size), phases)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def operator(self) -> np.ndarray:
        b = self.basis.vectors
        return (b * self.eigenphases) @ b.conj().T


@dataclass(frozen=True)
class OtocDecomposition:
    total: float
    cgp_part: float
    offdiag_part: float
    residual: float


def otoc_cgp_decomposition(vsys: UnitaryEigensystem, wsys: UnitaryEigensystem, u) -> OtocDecomposition:
    """Split the squared commutator into a CGP term and an off-diagonal remainder.

    ``total`` comes from ``squared_commutator`` directly. ``cgp_part`` is
    ``2 cgp(U^dag V_int, B_V)``. ``offdiag_part`` is the phase-weighted
    four-projector sum over index pairs with ``j != l`` or ``k != m``,
    computed as the full contraction minus its ``j = l, k = m`` diagonal.
    """
    d = _square_same(vsys.operator(), wsys.operator(), u)
    v, w = vsys.eigenphases, wsys.eigenphases
    composed = u.conj().T @ intertwiner(vsys.basis, wsys.basis)
    cgp_part = 2.0 * cgp(composed, vsys.basis)
    # G[j, k] = <j_V| U^dag |k_W>, so Tr(Pi_j Pi~_k(t)) = |G[j, k]|^2
    g = vsys.basis.vectors.conj().T @ u.conj().T @ wsys.basis.vectors
    m = g.conj().T @ (v.conj()[:, None] * g)
    full = np.sum(np.outer(w.conj(), w) * np.abs(m) ** 2)
    diag = np.sum(np.outer(np.abs(v) ** 2, np.abs(w) ** 2) * np.abs(g) ** 4)
    offdiag = float(-(2.0 / d) * (full - diag).real)
    total = squared_commutator(vsys.operator(), wsys.operator(), u)
    return OtocDecomposition(total, cgp_part, offdiag, abs(total - cgp_part - offdiag))


def projection_otoc_sum(b_v, b_w, u, beta: int | None = None) -> float:
    """Sum of squared commutators ``C_{Pi_alpha, Pi~_beta}(t)`` between projectors.

    With ``beta`` given, sums over ``alpha`` only; otherwise over both indices.
    """
    u = as_matrix(u)
    d = u.shape[0]
    bv = as_basis(b_v, d)
    bw = as_basis(b_w, d)
    betas = range(d) if beta is None else [beta]
    if beta is not None and not 0 <= beta < d:
        raise IndexError(f"beta={beta} outside [0, {d})")
    pv = bv.projectors()
    total = 0.0
    for b in betas:
        pt = heisenberg(bw.projector(b), u)
        comm = pv @ pt - pt @ pv
        total += float(np.sum(np.abs(comm) ** 2))
    return total / d


# ---------------------------------------------------------------------------
# averaged identities


def _composed(b_v, b_w, u) -> tuple[np.ndarray, OrthonormalBasis, OrthonormalBasis]:
    u = as_matrix(u)
    bv = as_basis(b_v, u.shape[0])
    bw = as_basis(b_w, u.shape[0])
    return u.conj().T @ intertwiner(bv, bw), bv, bw


def _check_samples(samples: int):
    if samples is None or samples < 1:
        raise ValueError("Monte-Carlo mode needs at least one sample")


def phase_averaged_otoc(b_v, b_w, u, samples: int | None = None, seed: int | None = None):
    """Average of ``|| [V, W(t)] ||_2^2`` over V, W diagonal in ``b_v``, ``b_w``
    with i.i.d. uniform eigenphases.

    Without ``samples`` returns the exact value ``2 d cgp(U^dag V_int, B_V)``;
    otherwise a ``MonteCarloEstimate``.
    """
    composed, bv, bw = _composed(b_v, b_w, u)
    d = bv.dimension
    if samples is None:
        return 2 * d * cgp(composed, bv)
    _check_samples(samples)
    spec = EnsembleSpec("DiagonalPhases", d, 2 * samples, 0 if seed is None else seed)
    vals = np.empty(samples)
    for i in range(samples):
        v = UnitaryEigensystem(bv, spec.draw(2 * i)).operator()
        w = UnitaryEigensystem(bw, spec.draw(2 * i + 1)).operator()
        vals[i] = d * squared_commutator(v, w, u)
    return MonteCarloEstimate.from_samples(vals)


def grassmannian_distance_sq(b1, b2) -> float:
    """Squared distance between the MASAs of two bases, ``2 (d - Tr X^T X)``."""
    b1 = as_basis(b1)
    b2 = as_basis(b2, b1.dimension)
    x = np.abs(b1.vectors.conj().T @ b2.vectors) ** 2
    return float(2.0 * (b1.dimension - np.sum(x**2)))


def _dephased_unitary(u, basis: OrthonormalBasis) -> np.ndarray:
    diag = np.diagonal(basis.components(u))
    return (basis.vectors * diag) @ basis.vectors.conj().T


def haar_state_commutator_avg(rho, basis=None, samples: int | None = None, seed: int | None = None):
    """Haar average of ``|| [D_B(V), rho] ||_2^2``; exactly ``(2/d) c2(rho, B)``."""
    rho = as_density_matrix(rho)
    d = rho.shape[0]
    b = as_basis(basis, d)
    if samples is None:
        return 2.0 / d * _c2(rho, b)
    _check_samples(samples)
    spec = EnsembleSpec("Haar", d, samples, 0 if seed is None else seed)
    vals = [hs_norm_sq(commutator(_dephased_unitary(v, b), rho)) for v in spec]
    return MonteCarloEstimate.from_samples(vals)


def haar_masa_commutator_avg(b1, b2, samples: int | None = None, seed: int | None = None, kind: str = "Haar"):
    """Average of ``|| [D_B1(V), D_B2(W)] ||_2^2`` over independent V, W.

    Exact value ``D^2 / d^2``. ``kind="Pauli"`` samples from the Pauli group,
    a unitary 1-design, instead of the Haar measure.
    """
    b1 = as_basis(b1)
    b2 = as_basis(b2, b1.dimension)
    d = b1.dimension
    if samples is None:
        return grassmannian_distance_sq(b1, b2) / d**2
    _check_samples(samples)
    if kind not in ("Haar", "Pauli"):
        raise ValueError(f"kind must be 'Haar' or 'Pauli', got {kind!r}")
    spec = EnsembleSpec(kind, d, 2 * samples, 0 if seed is None else seed)
    vals = np.empty(samples)
    for i in range(samples):
        dv = _dephased_unitary(spec.draw(2 * i), b1)
        dw = _dephased_unitary(spec.draw(2 * i + 1), b2)
        vals[i] = hs_norm_sq(commutator(dv, dw))
    return MonteCarloEstimate.from_samples(vals)


# ---------------------------------------------------------------------------
# time series


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError(f"times and values must be 1-D of equal length, got {t.shape}, {v.shape}")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("time series must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def temporal_variance(series: TimeSeries, window: tuple[float, float] | None = None) -> float:
    """Population variance of the samples with ``t_min <= t <= t_max``."""
    if window is None:
        vals = series.values
    else:
        lo, hi = window
        vals = series.values[(series.times >= lo) & (series.times <= hi)]
    if vals.size < 2:
        raise ValueError(f"window {window} contains {vals.size} samples; need at least 2")
    return float(np.var(vals))


def time_grid(t_min: float, t_max: float, dt: float) -> np.ndarray:
    if not (dt > 0 and t_max > t_min):
        raise ValueError(f"invalid time grid ({t_min}, {t_max}, {dt})")
    n = int(round((t_max - t_min) / dt))
    return t_min + dt * np.arange(n + 1)


def edge_otoc_series(p: TfimParams, times: Sequence[float], v_site: int = 1, w_site: int | None = None):
    """OTOC and CGP time series for ``V = Z_{v_site}``, ``W = Z_{w_site}`` in the TFIM.

    The sigma_z operators are diagonal in the computational basis, which
    serves as their (degenerate) eigenbasis, so the CGP entering the
    decomposition is that of ``U_t^dag`` in the computational basis. Returns
    ``(otoc, cgp)`` as ``TimeSeries``.
    """
    w_site = p.L if w_site is None else w_site
    spec = eigh(build_tfim(p))
    d = spec.dimension
    v = sigma_z_diagonal(p.L, v_site)
    w = sigma_z_diagonal(p.L, w_site)
    dv2 = np.abs(v[:, None] - v[None, :]) ** 2
    otoc = np.empty(len(times))
    cg = np.empty(len(times))
    for i, t in enumerate(times):
        u = evolve(spec, t)
        wt = u.conj().T @ (w[:, None] * u)
        # V diagonal: ||[V, W(t)]||^2 = sum_ij |v_i - v_j|^2 |W(t)_ij|^2
        otoc[i] = np.sum(dv2 * np.abs(wt) ** 2) / d
        cg[i] = 1.0 - np.sum(np.abs(u) ** 4) / d
    times = np.asarray(times, dtype=float)
    return TimeSeries(times, otoc), TimeSeries(times, cg)


@dataclass(frozen=True)
class VarianceRatioRow:
    n: int
    observable: str
    var_integrable: float
    var_chaotic: float

    @property
    def ratio(self) -> float:
        return (self.var_integrable - self.var_chaotic) / self.var_integrable


def variance_ratio_scan(
    n_range: Iterable[int],
    window: tuple[float, float] = (50.0, 500.0),
    dt: float = 0.5,
    integrable=TfimParams.integrable,
    chaotic=TfimParams.chaotic,
) -> list[VarianceRatioRow]:
    """Temporal variances of edge OTOC and CGP for integrable vs chaotic TFIM chains.

    ``integrable`` and ``chaotic`` map a chain length to ``TfimParams``.
    Returns one row per ``(n, observable)``.
    """
    times = time_grid(window[0], window[1], dt)
    rows = []
    for n in n_range:
        oi, ci = edge_otoc_series(integrable(n), times)
        oc, cc = edge_otoc_series(chaotic(n), times)
        rows.append(VarianceRatioRow(n, "otoc", temporal_variance(oi), temporal_variance(oc)))
        rows.append(VarianceRatioRow(n, "cgp", temporal_variance(ci), temporal_variance(cc)))
    return rows
