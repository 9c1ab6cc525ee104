import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cohchaos.coherence import (
    c2,
    c_l1,
    c_rel,
    central_mean,
    effective_dimension,
    eigenstate_coherence_scan,
    escape_probability,
    finite_time_average,
    goe_c2_analytic,
    goe_c2_prediction,
    goe_crel_prediction,
    loschmidt_echo,
    min_product_basis_c2,
    participation_count,
    pr2,
)
from cohchaos.linalg import DegeneracyWarning, DimensionError, OrthonormalBasis, dephase, eigh, partial_trace
from cohchaos.models import XxzDefectParams, build_xxz_defect, mean_field_basis

PLUS = np.array([1, 1]) / np.sqrt(2)
SZ = np.diag([1.0, -1.0])


def rand_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def rand_unitary(rng, d):
    return np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]


def rand_herm(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def max_coherent(d):
    return np.ones(d) / np.sqrt(d)


def test_c2_examples():
    assert np.isclose(c2(PLUS), 0.5)
    assert c2(np.array([0, 1.0, 0])) == 0
    for d in (2, 5, 8):
        assert np.isclose(c2(max_coherent(d)), 1 - 1 / d)
    with pytest.raises(DimensionError):
        c2(PLUS, OrthonormalBasis.computational(3))


def test_c_rel_examples():
    assert np.isclose(c_rel(PLUS), math.log(2))
    assert abs(c_rel(np.diag([0.2, 0.3, 0.5]))) <= 1e-12
    for d in (2, 5, 8):
        assert np.isclose(c_rel(max_coherent(d)), math.log(d))


def test_c_l1_examples():
    assert np.isclose(c_l1(PLUS), 1.0)
    assert c_l1(np.diag([0.5, 0.5])) == 0
    for d in (2, 5, 8):
        assert np.isclose(c_l1(max_coherent(d)), d - 1)


def test_pr2_examples():
    assert pr2(np.array([0, 0, 1.0])) == 1
    for d in (2, 6):
        assert np.isclose(pr2(max_coherent(d)), 1 / d)
        assert np.isclose(participation_count(max_coherent(d)), d)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 64), st.integers(0, 2**32 - 1))
def test_pr2_plus_c2_is_one(d, seed):
    rng = np.random.default_rng(seed)
    psi = rand_state(rng, d)
    b = OrthonormalBasis(rand_unitary(rng, d))
    assert abs(pr2(psi, b) + c2(psi, b) - 1) <= 1e-12


def test_loschmidt_echo():
    spec = eigh(SZ)
    assert np.isclose(loschmidt_echo(PLUS, spec, 0.0), 1.0)
    for t in (0.3, 1.7, 5.0):
        assert np.isclose(loschmidt_echo(PLUS, spec, t), math.cos(t) ** 2)
        assert np.isclose(loschmidt_echo(spec.eigenvectors[:, 0], spec, t), 1.0)


def test_effective_dimension():
    assert np.isclose(effective_dimension(PLUS), 1.0)
    assert np.isclose(effective_dimension(np.eye(5) / 5), 5.0)
    assert np.isclose(effective_dimension(np.diag([0.75, 0.25])), 1.6)


def test_escape_probability():
    spec = eigh(SZ)
    assert abs(escape_probability(spec.eigenvectors[:, 1], spec)) <= 1e-15
    assert np.isclose(escape_probability(PLUS, spec), 0.5)
    rng = np.random.default_rng(4)
    for _ in range(20):
        spec = eigh(rand_herm(rng, 8))
        psi = rand_state(rng, 8)
        assert abs(escape_probability(psi, spec) - c2(psi, spec.basis)) <= 1e-12
        rho_de = dephase(np.outer(psi, psi.conj()), spec.basis)
        assert abs(effective_dimension(rho_de) - 1 / pr2(psi, spec.basis)) <= 1e-10
    with pytest.warns(DegeneracyWarning):
        escape_probability(PLUS, eigh(np.eye(2)))


def test_finite_time_average():
    assert np.isclose(finite_time_average(lambda t: 3.2, 10.0, 0.1), 3.2)
    spec = eigh(SZ)
    avg = finite_time_average(lambda t: loschmidt_echo(PLUS, spec, t), 100 * math.pi, 0.01)
    assert abs(avg - 0.5) <= 1e-3
    with pytest.raises(ValueError):
        finite_time_average(lambda t: 1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        finite_time_average(lambda t: math.nan, 1.0, 0.1)


def test_echo_average_converges_to_pr2():
    rng = np.random.default_rng(5)
    d = 8
    spec = eigh(rand_herm(rng, d))
    psi = rand_state(rng, d)
    target = pr2(psi, spec.basis)
    spacing = (spec.eigenvalues[-1] - spec.eigenvalues[0]) / (d - 1)
    q = np.abs(spec.eigenvectors.conj().T @ psi) ** 2
    errors = []
    for n in (1e2, 1e3, 1e4):
        T = n / spacing
        f = lambda t: abs(np.sum(q * np.exp(-1j * spec.eigenvalues * t))) ** 2  # noqa: E731
        errors.append(abs(finite_time_average(f, T, 0.05) - target))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] * 1e4 < 10 * errors[0] * 1e2


@pytest.mark.parametrize("seed", range(3))
def test_invariances(seed):
    rng = np.random.default_rng(seed)
    d = 6
    psi = rand_state(rng, d)
    b = OrthonormalBasis(rand_unitary(rng, d))
    perm = rng.permutation(d)
    bp = b.permuted(perm)
    phased = np.exp(1.3j) * psi
    for f in (c2, c_rel, c_l1, pr2):
        ref = f(psi, b)
        assert abs(f(phased, b) - ref) <= 1e-12
        assert abs(f(psi, bp) - ref) <= 1e-12


def test_bounds_saturated_only_by_max_coherent():
    rng = np.random.default_rng(6)
    for d in range(2, 9):
        mc = max_coherent(d) * np.exp(1j * rng.uniform(0, 2 * np.pi, d))
        assert abs(c_rel(mc) - math.log(d)) <= 1e-10
        assert abs(c2(mc) - (1 - 1 / d)) <= 1e-12
        psi = rand_state(rng, d)
        assert c_rel(psi) < math.log(d) - 1e-6
        assert c2(psi) < 1 - 1 / d - 1e-6
        assert c_rel(psi) <= math.log(d) + 1e-10


def test_goe_crel_prediction():
    assert abs(goe_crel_prediction(3003, "bits") - 10.49) <= 0.01
    assert abs(goe_crel_prediction(3003, "nats") - 7.273397892903) <= 1e-9
    r_n = 6.1 / goe_crel_prediction(495, "nats")
    r_b = (6.1 / math.log(2)) / goe_crel_prediction(495, "bits")
    assert abs(r_n - r_b) <= 1e-12
    with pytest.raises(ValueError):
        goe_crel_prediction(1)


def test_goe_c2_prediction():
    est = goe_c2_prediction(3003, samples=200, seed=11)
    assert abs(est.mean - 0.9991) <= 0.0005
    assert est.within(goe_c2_analytic(3003))
    for d in (16, 40):
        est = goe_c2_prediction(d, samples=3000, seed=d)
        assert est.within(goe_c2_analytic(d))
    est = goe_c2_prediction(12, samples=300, seed=3, full_eigenvectors=True)
    assert est.within(goe_c2_analytic(12))
    vals = [goe_c2_analytic(d) for d in (2, 10, 100, 1000, 10000)]
    assert all(a < b < 1 for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        goe_c2_prediction(10, samples=0, seed=1)


def test_min_product_basis_c2_closed_form():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.isclose(min_product_basis_c2(bell, (2, 2)), 0.5)
    assert abs(min_product_basis_c2(np.kron(PLUS, [0, 1.0]), (2, 2))) <= 1e-15
    rng = np.random.default_rng(7)
    for dims in ((2, 2), (2, 3), (3, 4)):
        psi = rand_state(rng, dims[0] * dims[1])
        ra = partial_trace(psi, dims, "a")
        assert abs(min_product_basis_c2(psi, dims) - (1 - np.trace(ra @ ra).real)) <= 1e-10


def test_eigenstate_scan_diagonal_hamiltonian():
    reports = eigenstate_coherence_scan(np.diag([3.0, 1.0, 2.0]))
    assert [r.energy for r in reports] == [1.0, 2.0, 3.0]
    assert all(r.c2 == 0 and r.c_l1 == 0 and r.pr2 == 1 for r in reports)


def test_eigenstate_scan_matches_state_functions():
    rng = np.random.default_rng(8)
    h = rand_herm(rng, 7)
    b = OrthonormalBasis(rand_unitary(rng, 7))
    spec = eigh(h)
    for r in eigenstate_coherence_scan(h, b):
        v = spec.eigenvectors[:, r.index]
        assert abs(r.c2 - c2(v, b)) <= 1e-12
        assert abs(r.c_rel - c_rel(v, b)) <= 1e-10
        assert abs(r.c_l1 - c_l1(v, b)) <= 1e-12
        assert abs(r.pr2 - pr2(v, b)) <= 1e-12
        assert abs(r.normalized_c2 * goe_c2_analytic(7) - r.c2) <= 1e-12
        assert 0 <= r.c2 <= 1 - 1 / 7 + 1e-10
        assert 0 <= r.c_rel <= math.log(7) + 1e-10
    partial = eigenstate_coherence_scan(h, b, measures={"c2"})
    assert math.isnan(partial[0].c_rel) and not math.isnan(partial[0].c2)


def test_xxz_integrable_less_coherent_than_chaotic():
    for basis_kind in ("site", "mean_field"):
        vals = {}
        for delta in (1, 6):
            p = XxzDefectParams(L=12, n_up=4, delta=delta)
            b = mean_field_basis(p) if basis_kind == "mean_field" else None
            vals[delta] = central_mean(eigenstate_coherence_scan(build_xxz_defect(p), b), "normalized_c_rel")
        assert vals[1] < vals[6]


def test_degeneracy_warning_does_not_hide_results():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        val = escape_probability(PLUS, eigh(np.eye(2)))
    assert caught and np.isfinite(val)
