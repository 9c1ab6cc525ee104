"""Spin-1/2 chain Hamiltonians as dense real symmetric matrices.

Basis convention used throughout: a basis state is an L-bit integer, bit value
1 means spin up (sigma_z = +1), and site 1 is the most significant bit. Sector
states are listed in ascending integer order; full-space index equals the
bit label.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import DegeneracyWarning, OrthonormalBasis, SpectralDecomposition, eigh

MAX_SECTOR_SITES = 24
MAX_FULL_SITES = 14


class CapacityError(ValueError):
    """Requested system is too large for dense exact diagonalisation."""


def _bit(L: int, site: int) -> int:
    # bit position of a 1-based site index
    return L - site


def spins(states: np.ndarray, L: int, site: int) -> np.ndarray:
    """sigma_z eigenvalue (+1/-1) of ``site`` for each bit label in ``states``."""
    return 2 * ((np.asarray(states) >> _bit(L, site)) & 1) - 1


@dataclass(frozen=True)
class SpinSector:
    L: int
    n_up: int
    states: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.states.size)

    def index_of(self, labels) -> np.ndarray:
        idx = np.searchsorted(self.states, labels)
        idx = np.clip(idx, 0, self.dimension - 1)
        if not np.all(self.states[idx] == labels):
            raise KeyError("label outside the sector")
        return idx

    def labels(self) -> tuple[str, ...]:
        return tuple(format(int(s), f"0{self.L}b") for s in self.states)


def sector_basis(L: int, n_up: int) -> SpinSector:
    """All L-bit labels with ``n_up`` set bits, ascending."""
    if L > MAX_SECTOR_SITES:
        raise CapacityError(f"L={L} exceeds the dense sector limit of {MAX_SECTOR_SITES} sites")
    if not 0 <= n_up <= L or L < 1:
        raise ValueError(f"need 0 <= n_up <= L with L >= 1, got L={L}, n_up={n_up}")
    states = np.fromiter(
        (sum(1 << b for b in bits) for bits in itertools.combinations(range(L), n_up)),
        dtype=np.int64,
        count=math.comb(L, n_up),
    )
    states.sort()
    return SpinSector(L, n_up, states)


# ---------------------------------------------------------------------------
# XXZ chain with a single-site defect


@dataclass(frozen=True)
class XxzDefectParams:
    L: int
    n_up: int
    delta: int
    omega: float = 0.0
    epsilon_delta: float = 0.5
    J_xy: float = 1.0
    J_z: float = 0.5

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be positive, got {self.L}")
        if not 0 <= self.n_up <= self.L:
            raise ValueError(f"n_up={self.n_up} outside [0, {self.L}]")
        if not 1 <= self.delta <= self.L:
            raise ValueError(f"defect site out of range: delta={self.delta} not in [1, {self.L}]")

    @classmethod
    def standard(cls, L: int, chaotic: bool) -> "XxzDefectParams":
        """Default couplings, floor(L/3) spins up; defect at the edge or the middle."""
        return cls(L=L, n_up=L // 3, delta=L // 2 if chaotic else 1)

    def replace(self, **changes) -> "XxzDefectParams":
        return XxzDefectParams(**{**self.__dict__, **changes})


def build_xxz_defect(p: XxzDefectParams, sector: SpinSector | None = None) -> np.ndarray:
    """XXZ Hamiltonian with open boundaries and a Zeeman defect, restricted to a sector.

    ``H = 1/4 sum_j [J_xy (XX + YY) + J_z ZZ] + 1/2 (omega sum_j Z_j + eps Z_delta)``.
    """
    sector = sector or sector_basis(p.L, p.n_up)
    d = sector.dimension
    if d < 2:
        raise ValueError(f"sector L={p.L}, n_up={p.n_up} has dimension {d} < 2")
    s = sector.states
    L = p.L
    h = np.zeros((d, d))
    diag = np.zeros(d)
    for j in range(1, L):
        diag += 0.25 * p.J_z * spins(s, L, j) * spins(s, L, j + 1)
        mask = (1 << _bit(L, j)) | (1 << _bit(L, j + 1))
        flip = spins(s, L, j) != spins(s, L, j + 1)
        rows = np.nonzero(flip)[0]
        cols = sector.index_of(s[rows] ^ mask)
        # (XX + YY)/4 exchanges antiparallel neighbours with amplitude 1/2
        h[rows, cols] += 0.5 * p.J_xy
    for j in range(1, L + 1):
        diag += 0.5 * p.omega * spins(s, L, j)
    diag += 0.5 * p.epsilon_delta * spins(s, L, p.delta)
    h[np.arange(d), np.arange(d)] = diag
    return h


def mean_field_decomposition(p: XxzDefectParams) -> SpectralDecomposition:
    """Eigensystem of the same Hamiltonian with ``J_z = 0``."""
    return eigh(build_xxz_defect(p.replace(J_z=0.0)))


def mean_field_basis(p: XxzDefectParams) -> OrthonormalBasis:
    """Mean-field eigenbasis; warns when the free spectrum has gaps below 1e-10,
    in which case the basis inside each degenerate block is a convention."""
    spec = mean_field_decomposition(p)
    if spec.is_degenerate():
        warnings.warn(
            f"mean-field spectrum has gap {spec.min_gap:.2e}; degenerate blocks resolved by tie-break",
            DegeneracyWarning,
            stacklevel=2,
        )
    return spec.basis


# ---------------------------------------------------------------------------
# full-space models


def _check_full(L: int, minimum: int = 1) -> int:
    if L > MAX_FULL_SITES:
        raise CapacityError(f"L={L} exceeds the dense full-space limit of {MAX_FULL_SITES} sites (d={2**L})")
    if L < minimum:
        raise ValueError(f"L={L} below minimum {minimum}")
    return 1 << L


def sigma_z_diagonal(L: int, site: int) -> np.ndarray:
    """Diagonal of sigma_z on ``site`` in the full 2^L computational basis."""
    _check_full(L)
    if not 1 <= site <= L:
        raise ValueError(f"site {site} not in [1, {L}]")
    return spins(np.arange(1 << L), L, site).astype(float)


@dataclass(frozen=True)
class TfimParams:
    L: int
    g: float
    h: float

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"TFIM needs L >= 2, got {self.L}")

    @classmethod
    def integrable(cls, L: int) -> "TfimParams":
        return cls(L, 1.0, 0.0)

    @classmethod
    def chaotic(cls, L: int) -> "TfimParams":
        return cls(L, -1.05, 0.5)

    @property
    def regime(self) -> str:
        # free-fermion solvable without a longitudinal field, classical without a transverse one
        return "integrable" if self.h == 0 or self.g == 0 else "chaotic"


def build_tfim(p: TfimParams) -> np.ndarray:
    """``H = -(sum_j Z_j Z_{j+1} + g sum_j X_j + h sum_j Z_j)``, open chain, full space."""
    d = _check_full(p.L, minimum=2)
    idx = np.arange(d)
    h = np.zeros((d, d))
    diag = np.zeros(d)
    for j in range(1, p.L):
        diag -= spins(idx, p.L, j) * spins(idx, p.L, j + 1)
    for j in range(1, p.L + 1):
        diag -= p.h * spins(idx, p.L, j)
        h[idx, idx ^ (1 << _bit(p.L, j))] -= p.g
    h[idx, idx] = diag
    return h


def build_k_local_commuting(L: int, k: int) -> np.ndarray:
    """``H^(k) = sum_{j=1}^{L-k+1} X_j X_{j+1} ... X_{j+k-1}``."""
    d = _check_full(L)
    if not 1 <= k <= L:
        raise ValueError(f"need 1 <= k <= L, got k={k}, L={L}")
    idx = np.arange(d)
    h = np.zeros((d, d))
    for j in range(1, L - k + 2):
        mask = sum(1 << _bit(L, s) for s in range(j, j + k))
        h[idx, idx ^ mask] += 1.0
    return h
