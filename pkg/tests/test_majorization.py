import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cohchaos.coherence import shannon_entropy
from cohchaos.linalg import DimensionError, OrthonormalBasis, eigh
from cohchaos.majorization import (
    eigenstate_majorization_fraction,
    majorizes,
    schur_concavity_check,
)
from cohchaos.models import XxzDefectParams, build_xxz_defect
from cohchaos.utils import central_slice


def simplex(rng, d, sharp=1.0):
    p = rng.random(d) ** sharp
    return p / p.sum()


def test_examples():
    rng = np.random.default_rng(0)
    for _ in range(10):
        v = simplex(rng, 3)
        assert majorizes([1, 0, 0], v)
        assert majorizes(v, [1 / 3, 1 / 3, 1 / 3])
    res = majorizes([0.6, 0.2, 0.2], [0.5, 0.3, 0.2])
    assert res.majorized and res.first_violation_index is None
    assert np.allclose(res.partial_sum_gaps, [0.1, 0.0, 0.0])
    res = majorizes([0.5, 0.3, 0.2], [0.6, 0.2, 0.2])
    assert not res and res.first_violation_index == 1
    with pytest.raises(DimensionError):
        majorizes([1, 0], [1, 0, 0])


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 16), st.integers(0, 2**32 - 1))
def test_reflexive_and_transitive(d, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (simplex(rng, d, s) for s in rng.uniform(0.2, 6, 3))
    assert majorizes(a, a)
    if majorizes(a, b) and majorizes(b, c):
        assert majorizes(a, c)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 16), st.integers(0, 2**32 - 1))
def test_schur_consequences(d, seed):
    rng = np.random.default_rng(seed)
    w = simplex(rng, d, 8.0)
    # a doubly stochastic image of w is always majorized by it
    q = np.linalg.qr(rng.normal(size=(d, d)))[0]
    v = (q**2) @ w
    assume(majorizes(w, v))
    assert shannon_entropy(v) >= shannon_entropy(w) - 1e-12
    assert np.sum(v**2) <= np.sum(w**2) + 1e-12
    assert schur_concavity_check(w, v)


def test_schur_concavity_check():
    assert schur_concavity_check([1, 0], [0.5, 0.5])
    p = [0.4, 0.35, 0.25]
    assert schur_concavity_check(p, p)
    with pytest.raises(ValueError, match="precondition"):
        schur_concavity_check([0.5, 0.5], [1, 0])


def test_schur_on_xxz_pairs():
    si = eigh(build_xxz_defect(XxzDefectParams.standard(9, chaotic=False)))
    sc = eigh(build_xxz_defect(XxzDefectParams.standard(9, chaotic=True)))
    pi = np.abs(si.eigenvectors) ** 2
    pc = np.abs(sc.eigenvectors) ** 2
    checked = 0
    for a in range(pi.shape[1]):
        for b in range(0, pc.shape[1], 7):
            if majorizes(pi[:, a], pc[:, b]):
                assert schur_concavity_check(pi[:, a], pc[:, b])
                checked += 1
    assert checked > 10


def test_fraction_reflexive_and_bounded():
    h = build_xxz_defect(XxzDefectParams.standard(9, chaotic=True))
    assert eigenstate_majorization_fraction(h, h) == 1.0
    h1 = build_xxz_defect(XxzDefectParams.standard(9, chaotic=False))
    for w in (1.0, 0.5, 0.2):
        f = eigenstate_majorization_fraction(h1, h, window=w)
        assert 0.0 <= f <= 1.0


def test_fraction_invariant_under_basis_relabeling():
    h1 = build_xxz_defect(XxzDefectParams.standard(9, chaotic=False))
    h2 = build_xxz_defect(XxzDefectParams.standard(9, chaotic=True))
    d = h1.shape[0]
    perm = np.random.default_rng(1).permutation(d)
    b = OrthonormalBasis(np.eye(d)[:, perm])
    for w in (1.0, 0.2):
        assert eigenstate_majorization_fraction(h1, h2, None, w) == eigenstate_majorization_fraction(h1, h2, b, w)


def test_central_window_rounds_outward():
    assert central_slice(10, 0.2) == slice(4, 6)
    assert central_slice(495, 0.2) == slice(198, 297)
    assert central_slice(84, 0.2) == slice(33, 51)
    assert central_slice(7, 1.0) == slice(0, 7)
    with pytest.raises(ValueError):
        central_slice(10, 0.0)
