import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cohchaos.linalg import (
    DimensionError,
    EigensolverError,
    OrthonormalBasis,
    StructureError,
    as_density_matrix,
    as_hermitian,
    as_probability_vector,
    check_bistochastic,
    dephase,
    eigh,
    evolve,
    overlap_matrix,
    partial_trace,
    schmidt_squared,
)
from cohchaos.models import XxzDefectParams, build_xxz_defect

SX = np.array([[0, 1], [1, 0]], dtype=float)
SZ = np.diag([1.0, -1.0])
HAD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def rand_herm(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def rand_rho(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = a @ a.conj().T
    return r / np.trace(r).real


def rand_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def test_validators_reject_bad_structure():
    with pytest.raises(StructureError):
        as_hermitian([[0, 1], [0, 0]])
    with pytest.raises(StructureError):
        as_hermitian([[np.nan, 0], [0, 0]])
    with pytest.raises(StructureError):
        as_density_matrix(np.diag([0.7, 0.7]))
    with pytest.raises(StructureError):
        as_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(StructureError):
        OrthonormalBasis(np.ones((2, 2)))
    with pytest.raises(StructureError):
        check_bistochastic(np.array([[0.6, 0.6], [0.4, 0.4]]))
    p = as_probability_vector([1.0 + 5e-13, -5e-13])
    assert p.min() == 0.0


def test_hermitian_is_symmetrised_exactly():
    rng = np.random.default_rng(0)
    h = rand_herm(rng, 5)
    h[0, 1] += 1e-13
    out = as_hermitian(h)
    assert np.array_equal(out, out.conj().T)


def test_eigh_sigma_z():
    spec = eigh(SZ)
    assert np.allclose(spec.eigenvalues, [-1, 1])
    assert np.allclose(spec.eigenvectors, [[0, 1], [1, 0]])


def test_eigh_sigma_x_phase_convention():
    spec = eigh(SX)
    assert np.allclose(spec.eigenvalues, [-1, 1])
    s = 1 / np.sqrt(2)
    # first largest-magnitude entry made real positive
    assert np.allclose(spec.eigenvectors[:, 0], [s, -s])
    assert np.allclose(spec.eigenvectors[:, 1], [s, s])


def test_eigh_xxz_reconstruction():
    h = build_xxz_defect(XxzDefectParams(L=12, n_up=4, delta=6))
    spec = eigh(h, check=True)
    assert spec.dimension == 495
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    assert spec.residual(h) <= 1e-10


def test_eigh_degenerate_order_is_reproducible():
    h = np.diag([1.0, 0.0, 1.0, 0.0])
    spec = eigh(h)
    assert np.allclose(spec.eigenvalues, [0, 0, 1, 1])
    assert np.allclose(np.abs(spec.eigenvectors), np.eye(4)[:, [1, 3, 0, 2]])
    again = eigh(h.copy())
    assert np.array_equal(spec.eigenvectors, again.eigenvectors)


def test_eigh_failure_names_dimension(monkeypatch):
    def boom(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigh", boom)
    with pytest.raises(EigensolverError, match="3x3"):
        eigh(np.eye(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 64), st.integers(0, 2**32 - 1))
def test_eigh_reconstruction_random(d, seed):
    h = rand_herm(np.random.default_rng(seed), d)
    spec = eigh(h)
    assert spec.residual(h) <= 1e-10 * d * np.max(np.abs(h))
    v = spec.eigenvectors
    assert np.max(np.abs(v.conj().T @ v - np.eye(d))) <= 1e-10


def test_evolve_examples():
    spec_z = eigh(SZ)
    assert np.allclose(evolve(spec_z, 0.0), np.eye(2))
    t = 0.7
    assert np.allclose(evolve(spec_z, t), np.diag([np.exp(-1j * t), np.exp(1j * t)]))
    assert np.allclose(evolve(eigh(SX), np.pi), -np.eye(2), atol=1e-12)
    with pytest.raises(ValueError):
        evolve(spec_z, np.inf)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 16), st.floats(-10, 10), st.integers(0, 2**32 - 1))
def test_evolve_inverse(d, t, seed):
    spec = eigh(rand_herm(np.random.default_rng(seed), d))
    prod = evolve(spec, t) @ evolve(spec, -t)
    assert np.max(np.abs(prod - np.eye(d))) <= 1e-10


def test_dephase_examples():
    plus = np.full((2, 2), 0.5)
    assert np.allclose(dephase(plus), np.diag([0.5, 0.5]))
    p = np.diag([0.2, 0.3, 0.5])
    assert np.array_equal(dephase(p), p)
    with pytest.raises(DimensionError):
        dephase(plus, OrthonormalBasis.computational(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 16), st.integers(0, 2**32 - 1))
def test_dephase_properties(d, seed):
    rng = np.random.default_rng(seed)
    rho = rand_rho(rng, d)
    q = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
    b = OrthonormalBasis(q)
    once = dephase(rho, b)
    assert abs(np.trace(once) - 1) <= 1e-12
    assert np.linalg.eigvalsh(once).min() >= -1e-12
    assert np.max(np.abs(dephase(once, b) - once)) <= 1e-12
    assert np.max(np.abs(np.triu(b.components(once), 1))) <= 1e-12


def test_partial_trace_examples():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace(bell, (2, 2), "a"), np.eye(2) / 2)
    rng = np.random.default_rng(1)
    phi, chi = rand_state(rng, 2), rand_state(rng, 3)
    prod = np.kron(phi, chi)
    assert np.allclose(partial_trace(prod, (2, 3), "a"), np.outer(phi, phi.conj()))
    assert np.allclose(partial_trace(prod, (2, 3), "b"), np.outer(chi, chi.conj()))
    rho = rand_rho(rng, 8)
    for keep in ("a", "b"):
        assert abs(np.trace(partial_trace(rho, (2, 4), keep)) - 1) <= 1e-12
    with pytest.raises(DimensionError):
        partial_trace(rho, (3, 3))


def test_schmidt_squared():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(schmidt_squared(bell, (2, 2)), [0.5, 0.5])
    assert np.allclose(schmidt_squared(np.array([1.0, 0, 0, 0]), (2, 2)), [1, 0])
    rng = np.random.default_rng(2)
    for _ in range(20):
        psi = rand_state(rng, 6)
        lam2 = schmidt_squared(psi, (2, 3))
        # oracle: spectrum of the reduced state
        ev = np.sort(np.linalg.eigvalsh(partial_trace(psi, (2, 3), "a")))[::-1]
        assert np.max(np.abs(lam2 - ev)) <= 1e-10
    with pytest.raises(DimensionError):
        schmidt_squared(bell, (3, 2))


def test_overlap_matrix():
    b = OrthonormalBasis.computational(4)
    assert np.allclose(overlap_matrix(b, b), np.eye(4))
    assert np.allclose(overlap_matrix(2, HAD), 0.5)
    rng = np.random.default_rng(3)
    for _ in range(10):
        q1 = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))[0]
        q2 = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))[0]
        x = overlap_matrix(q1, q2)
        # oracle: direct summation of |<j|k'>|^2
        direct = np.array([[abs(np.vdot(q1[:, j], q2[:, k])) ** 2 for k in range(8)] for j in range(8)])
        assert np.allclose(x, direct, atol=1e-14)
        check_bistochastic(x)
    with pytest.raises(DimensionError):
        overlap_matrix(2, 3)
