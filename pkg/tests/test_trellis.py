"""Max-log BCJR against hand values and the exhaustive max-log oracle."""

import numpy as np
import pytest

from tadecode.trellis import LLR_MAX, bcjr, branch_metrics, extrinsic
from tadecode.verify import exhaustive_maxlog_llrs


def test_branch_metrics_uniform():
    g = branch_metrics(np.zeros(1), np.zeros(1))
    assert g.shape == (1, 2, 2)
    assert g == pytest.approx(2 * np.log(0.5) * np.ones((1, 2, 2)), abs=1e-12)


def test_branch_metrics_fault_suppressed():
    g = branch_metrics(np.zeros(1), np.full(1, LLR_MAX))
    # f = 1 branches carry log P(f=1) ~ -LLR_MAX
    assert g[0, 1, 0] < -LLR_MAX + 1.0
    assert g[0, 1, 1] < -LLR_MAX + 1.0
    assert g[0, 0, 0] > -1.0


def test_branch_metrics_hand_value():
    # L(x) = 2, L(f) = -1, label f=0/x=1:
    # -log(1+e^2) + (-1) - log(1+e^-1) = -3.4402
    g = branch_metrics(np.array([2.0]), np.array([-1.0]))
    assert g[0, 0, 1] == pytest.approx(-3.4401896985611957, abs=1e-12)


def test_branch_metrics_shape_mismatch():
    with pytest.raises(ValueError):
        branch_metrics(np.zeros(3), np.zeros(4))


def test_bcjr_single_step_passthrough():
    # With one layer the output equals the state equals the fault, so the
    # posterior combines the two priors; at L(x)=0 it is just L(f).
    lam = 3.7
    out = bcjr(np.zeros(1), np.array([lam]))
    assert out[0] == pytest.approx(lam, abs=1e-12)


def test_bcjr_no_fault_dominance():
    out = bcjr(np.zeros(5), np.full(5, 12.0))
    assert (out > 0).all()


def test_bcjr_matches_exhaustive_oracle():
    rng = np.random.default_rng(99)
    for rho in range(1, 7):
        for _ in range(60):
            l_x = rng.uniform(-9, 9, rho)
            l_f = rng.uniform(-9, 9, rho)
            got = bcjr(l_x, l_f)
            want = exhaustive_maxlog_llrs(l_x, l_f)
            assert got == pytest.approx(want, abs=1e-9)


def test_bcjr_oracle_under_sign_transformations():
    # Structured sign flips stay oracle-consistent.
    rng = np.random.default_rng(100)
    for _ in range(40):
        l_x = rng.uniform(-6, 6, 4)
        l_f = rng.uniform(-6, 6, 4)
        l_x2 = l_x.copy()
        l_x2[::2] *= -1
        assert bcjr(l_x2, l_f) == pytest.approx(exhaustive_maxlog_llrs(l_x2, l_f), abs=1e-9)
        assert bcjr(-l_x, -l_f) == pytest.approx(exhaustive_maxlog_llrs(-l_x, -l_f), abs=1e-9)


def test_bcjr_batched_consistency():
    rng = np.random.default_rng(101)
    l_x = rng.uniform(-5, 5, (6, 4))
    l_f = rng.uniform(-5, 5, (6, 4))
    batched = bcjr(l_x, l_f)
    for i in range(6):
        assert batched[i] == pytest.approx(bcjr(l_x[i], l_f[i]), abs=0)


def test_bcjr_outputs_bounded():
    out = bcjr(np.full(6, 100.0), np.full(6, -100.0))
    assert (np.abs(out) <= LLR_MAX).all()
    assert np.isfinite(out).all()


def test_bcjr_monotone_in_first_fault_prior():
    l_x = np.zeros(4)
    prev = -np.inf
    for lam in np.linspace(-8, 8, 33):
        l_f = np.array([lam, 1.0, -0.5, 2.0])
        cur = bcjr(l_x, l_f)[0]
        assert cur >= prev - 1e-12
        prev = cur


def test_bcjr_exact_variant_single_step():
    # With rho = 1 max-log and exact coincide.
    l_x, l_f = np.array([1.3]), np.array([-0.4])
    assert bcjr(l_x, l_f, exact=True) == pytest.approx(bcjr(l_x, l_f), abs=1e-12)


def test_extrinsic():
    post = np.array([1.0, -2.0, 3.0])
    assert extrinsic(post, np.zeros(3)) == pytest.approx(post)
    assert extrinsic(post, post) == pytest.approx(np.zeros(3))
    assert extrinsic(np.array([40.0]), np.array([-40.0]))[0] == LLR_MAX
    with pytest.raises(ValueError):
        extrinsic(post, np.zeros(4))


def test_extrinsic_matches_oracle_difference():
    rng = np.random.default_rng(102)
    l_x = rng.uniform(-4, 4, 4)
    l_f = rng.uniform(-4, 4, 4)
    post = bcjr(l_x, l_f)
    want = exhaustive_maxlog_llrs(l_x, l_f) - l_x
    assert extrinsic(post, l_x) == pytest.approx(want, abs=1e-9)
