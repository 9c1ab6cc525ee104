"""Random-matrix samplers and reproducible ensemble specifications.

Gaussian ensembles follow ``P(H) ~ exp(-(d/2) Tr H^2)`` so that the spectral
density is a semicircle on ``[-2, 2]``:

* GUE: diagonal ``N(0, 1/d)``, off-diagonal real and imaginary parts ``N(0, 1/(2d))``
* GOE: diagonal ``N(0, 2/d)``, off-diagonal ``N(0, 1/d)``; ``E[Tr H^2] = d + 1``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .utils import sample_rng

KINDS = ("GOE", "GUE", "Haar", "DiagonalPhases", "Pauli")


def sample_goe(d: int, rng: np.random.Generator) -> np.ndarray:
    if d < 2:
        raise ValueError("d must be at least 2")
    a = rng.standard_normal((d, d))
    return (a + a.T) / np.sqrt(2 * d)


def sample_gue(d: int, rng: np.random.Generator) -> np.ndarray:
    if d < 2:
        raise ValueError("d must be at least 2")
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / (2 * np.sqrt(d))


def sample_haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix,
    with the diagonal of R rotated to be positive."""
    if d < 2:
        raise ValueError("d must be at least 2")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r)
    return q * (ph / np.abs(ph))


def sample_diagonal_phases(d: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus vector with i.i.d. uniform phases."""
    return np.exp(2j * np.pi * rng.random(d))


_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def sample_pauli(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random n-qubit Pauli string (a unitary 1-design), ``d = 2^n``."""
    n = d.bit_length() - 1
    if d < 2 or 1 << n != d:
        raise ValueError(f"Pauli sampling needs d a power of two, got {d}")
    out = np.ones((1, 1), dtype=complex)
    for i in rng.integers(0, 4, size=n):
        out = np.kron(out, _PAULIS[i])
    return out


_SAMPLERS = {
    "GOE": sample_goe,
    "GUE": sample_gue,
    "Haar": sample_haar_unitary,
    "DiagonalPhases": sample_diagonal_phases,
    "Pauli": sample_pauli,
}


@dataclass(frozen=True)
class EnsembleSpec:
    """``samples`` draws of ``kind`` in dimension ``d``; draw ``i`` uses its own
    RNG stream derived from ``(master_seed, i)``."""

    kind: str
    d: int
    samples: int
    master_seed: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; valid kinds: {', '.join(KINDS)}")
        if self.d < 2:
            raise ValueError(f"ensemble dimension must be >= 2, got {self.d}")
        if self.samples < 1:
            raise ValueError(f"ensemble needs at least one sample, got {self.samples}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def rng(self, index: int) -> np.random.Generator:
        return sample_rng(self.master_seed, index)

    def draw(self, index: int) -> np.ndarray:
        return _SAMPLERS[self.kind](self.d, self.rng(index))

    def __iter__(self) -> Iterator[np.ndarray]:
        for i in range(self.samples):
            yield self.draw(i)
