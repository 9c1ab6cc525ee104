"""Coherence and delocalisation measures of states relative to a basis.

All entropies use the natural logarithm; only the GOE reference value for the
relative entropy of coherence can also be reported in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, optimize

from .linalg import (
    DegeneracyWarning,  # noqa: F401  (re-exported)
    SpectralDecomposition,
    as_basis,
    as_density_matrix,
    as_pure_state,
    eigh,
    schmidt_squared,
    warn_if_degenerate,
)
from .utils import MonteCarloEstimate, as_rng, central_slice, mean_and_stderr

MEASURES = ("c2", "c_rel", "c_l1", "pr2")


def _entropy(p: np.ndarray) -> float:
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def shannon_entropy(p) -> float:
    """Shannon entropy in nats with ``0 ln 0 = 0``."""
    return _entropy(p)


def renyi2_entropy(p) -> float:
    return float(-np.log(np.sum(np.asarray(p, dtype=float) ** 2)))


def von_neumann_entropy(rho) -> float:
    return _entropy(np.linalg.eigvalsh(rho))


def _rho_in_basis(rho, basis) -> np.ndarray:
    rho = as_density_matrix(rho)
    return as_basis(basis, rho.shape[0]).components(rho)


def populations(psi, basis=None) -> np.ndarray:
    """``p_j = |<j|psi>|^2``."""
    psi = as_pure_state(psi)
    return np.abs(as_basis(basis, psi.size).components(psi)) ** 2


def c2(rho, basis=None) -> float:
    """l2 coherence: squared Hilbert-Schmidt distance to the dephased state."""
    r = _rho_in_basis(rho, basis)
    off = np.abs(r) ** 2
    return float(off.sum() - np.trace(off))


def c_rel(rho, basis=None) -> float:
    """Relative entropy of coherence ``S(D(rho)) - S(rho)`` in nats."""
    r = _rho_in_basis(rho, basis)
    return max(_entropy(np.diagonal(r).real) - _entropy(np.linalg.eigvalsh(r)), 0.0)


def c_l1(rho, basis=None) -> float:
    r = np.abs(_rho_in_basis(rho, basis))
    return float(r.sum() - np.trace(r))


def pr2(psi, basis=None) -> float:
    """Second participation moment ``sum_j p_j^2``."""
    return float(np.sum(populations(psi, basis) ** 2))


def participation_count(psi, basis=None) -> float:
    """Reciprocal of ``pr2``: effective number of occupied basis states."""
    return 1.0 / pr2(psi, basis)


def loschmidt_echo(psi, spec: SpectralDecomposition, t: float) -> float:
    """Return probability ``|<psi|exp(-iHt)|psi>|^2``."""
    psi = as_pure_state(psi)
    q = np.abs(spec.eigenvectors.conj().T @ psi) ** 2
    return float(min(abs(np.sum(q * np.exp(-1j * spec.eigenvalues * t))) ** 2, 1.0))


def effective_dimension(rho) -> float:
    rho = as_density_matrix(rho)
    return 1.0 / float(np.vdot(rho, rho).real)


def escape_probability(psi, spec: SpectralDecomposition) -> float:
    """``1 - sum_j |<E_j|psi>|^4``; a DegeneracyWarning is emitted for degenerate spectra."""
    warn_if_degenerate(spec, "escape_probability")
    psi = as_pure_state(psi)
    q = np.abs(spec.eigenvectors.conj().T @ psi) ** 2
    return float(1.0 - np.sum(q**2))


def finite_time_average(f: Callable[[float], float], T: float, dt: float) -> float:
    """Trapezoidal time average of ``f`` over ``[0, T]`` on a uniform grid of step ``<= dt``."""
    if not (T > 0 and 0 < dt < T):
        raise ValueError(f"need T > 0 and 0 < dt < T, got T={T}, dt={dt}")
    n = math.ceil(T / dt)
    times = np.linspace(0.0, T, n + 1)
    values = np.array([f(t) for t in times], dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("time series has non-finite samples")
    return float(integrate.trapezoid(values, times) / T)


# ---------------------------------------------------------------------------
# GOE reference values


def goe_crel_prediction(d: int, base: str = "nats") -> float:
    """Ensemble-averaged relative entropy of coherence of GOE eigenvectors, ``ln(0.48 d)``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    value = math.log(0.48 * d)
    if base == "nats":
        return value
    if base == "bits":
        return value / math.log(2)
    raise ValueError(f"base must be 'nats' or 'bits', got {base!r}")


def goe_c2_analytic(d: int) -> float:
    """Exact mean 2-coherence of a Haar-random real unit vector: ``1 - 3/(d+2)``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return 1.0 - 3.0 / (d + 2)


def goe_c2_prediction(d: int, samples: int, seed, full_eigenvectors: bool = False) -> MonteCarloEstimate:
    """Monte-Carlo mean of ``c2`` for GOE eigenvectors in a fixed basis.

    By orthogonal invariance each GOE eigenvector is a uniformly random real
    unit vector, which is what is sampled by default. ``full_eigenvectors``
    diagonalises GOE matrices instead and averages over all their columns.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = as_rng(seed)
    vals = np.empty(samples)
    for i in range(samples):
        if full_eigenvectors:
            a = rng.standard_normal((d, d))
            vecs = np.linalg.eigh(a + a.T)[1]
            vals[i] = np.mean(1.0 - np.sum(vecs**4, axis=0))
        else:
            x = rng.standard_normal(d)
            p = x**2 / np.dot(x, x)
            vals[i] = 1.0 - np.sum(p**2)
    mean, err = mean_and_stderr(vals)
    return MonteCarloEstimate(mean, err, samples)


# ---------------------------------------------------------------------------
# minimum over product bases


def min_product_basis_c2(psi, dims) -> float:
    """Minimum of ``c2`` over all product bases: the linear entropy ``1 - sum_j lambda_j^4``."""
    lam2 = schmidt_squared(psi, dims)
    return float(1.0 - np.sum(lam2**2))


def _su2(params) -> np.ndarray:
    a, b, c = params
    return np.array(
        [
            [np.cos(a) * np.exp(1j * b), -np.sin(a) * np.exp(-1j * c)],
            [np.sin(a) * np.exp(1j * c), np.cos(a) * np.exp(-1j * b)],
        ]
    )


def product_basis_c2(psi, params) -> float:
    """``c2`` of a two-qubit state in the product basis ``u(params[:3]) x u(params[3:])``."""
    u = np.kron(_su2(params[:3]), _su2(params[3:]))
    p = np.abs(u.conj().T @ psi) ** 2
    return float(1.0 - np.sum(p**2))


def brute_force_min_product_c2(psi, rng=None, starts: int = 200, polish: int = 8) -> float:
    """Search over two-qubit product bases: random starts, best few polished by Nelder-Mead."""
    psi = as_pure_state(psi)
    if psi.size != 4:
        raise ValueError("brute-force search is implemented for two qubits")
    rng = as_rng(rng)
    pts = rng.uniform(0, 2 * np.pi, size=(starts, 6))
    vals = np.array([product_basis_c2(psi, x) for x in pts])
    best = float(vals.min())
    for i in np.argsort(vals)[:polish]:
        res = optimize.minimize(
            lambda x: product_basis_c2(psi, x), pts[i], method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000},
        )
        best = min(best, float(res.fun))
    return best


# ---------------------------------------------------------------------------
# eigenstate scans


@dataclass(frozen=True)
class CoherenceReport:
    index: int
    energy: float
    c2: float
    c_rel: float
    c_l1: float
    pr2: float
    normalized_c2: float
    normalized_c_rel: float

    FIELDS = ("index", "energy", "c2", "c_rel", "c_l1", "pr2", "normalized_c2", "normalized_c_rel")

    def row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


def eigenstate_coherence_scan(
    h, basis=None, measures: Iterable[str] = MEASURES, spec: SpectralDecomposition | None = None
) -> list[CoherenceReport]:
    """Coherence of every eigenstate of ``h`` in ``basis``, ordered by energy.

    Columns that were not requested are NaN. Normalised columns divide by
    ``goe_c2_analytic(d)`` and ``goe_crel_prediction(d)``.
    """
    measures = set(measures)
    unknown = measures - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown measures {sorted(unknown)}; valid: {MEASURES}")
    spec = spec or eigh(h)
    d = spec.dimension
    b = as_basis(basis, d)
    amp = b.vectors.conj().T @ spec.eigenvectors
    p = np.abs(amp) ** 2
    nan = np.full(d, np.nan)
    # pure states: every quantity follows from the amplitudes in the basis
    c2_vals = 1.0 - np.sum(p**2, axis=0) if measures & {"c2", "pr2"} else nan
    crel_vals = np.array([_entropy(p[:, k]) for k in range(d)]) if "c_rel" in measures else nan
    cl1_vals = np.sum(np.abs(amp), axis=0) ** 2 - 1.0 if "c_l1" in measures else nan
    pr2_vals = 1.0 - c2_vals if "pr2" in measures else nan
    if "c2" not in measures:
        c2_vals = nan
    n2, nrel = goe_c2_analytic(d), goe_crel_prediction(d)
    return [
        CoherenceReport(
            k, float(spec.eigenvalues[k]), float(c2_vals[k]), float(crel_vals[k]), float(cl1_vals[k]),
            float(pr2_vals[k]), float(c2_vals[k] / n2), float(crel_vals[k] / nrel),
        )
        for k in range(d)
    ]


def central_mean(reports: list[CoherenceReport], field: str, fraction: float = 0.2) -> float:
    vals = np.array([getattr(r, field) for r in reports])
    return float(np.mean(vals[central_slice(vals.size, fraction)]))
