import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_checks, random_code
from tccdec.marginals import forward_backward, log_xi_total, xi_split, xi_split_all
from tccdec.oracle import log_sum_bruteforce, xi_bruteforce
from tccdec.trellis import (
    IntersectionCode,
    build_check_trellis,
    build_conv_trellis,
    enumerate_codewords,
    repetition_trellis,
)

# brute-force enumeration of the repetition pair with mu = 0.5 everywhere
REP_TOTAL = math.log(math.exp(2) + math.exp(-2))          # 2.0181499...
REP_PAIR_TOTAL = 2 * math.log(math.e + 1 / math.e)         # 2.2538560...


def rel(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(1.0, abs(b))


class TestForwardBackward:
    def test_repetition_total(self):
        mt = forward_backward(repetition_trellis(2), [1.0, 1.0])
        assert mt.total == pytest.approx(REP_TOTAL, abs=1e-12)
        assert mt.total == pytest.approx(2.0181499, abs=1e-7)

    def test_zero_weights_count_codewords(self):
        for t in (build_conv_trellis(["7", "5"], 2, 4), build_check_trellis([[1, 1, 1, 0], [0, 1, 1, 1]])):
            mt = forward_backward(t, np.zeros(t.n))
            assert mt.total == pytest.approx(math.log(len(enumerate_codewords(t))), abs=1e-12)

    def test_single_codeword(self):
        t = build_check_trellis([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
        mu = np.array([0.3, -1.2, 2.0])
        mt = forward_backward(t, mu)
        assert mt.total == pytest.approx(mu.sum(), abs=1e-12)
        assert np.all(mt.per_position[:, 0] == -math.inf)
        np.testing.assert_allclose(mt.per_position[:, 1], mt.total)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            forward_backward(repetition_trellis(3), [0.0, 1.0])

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            forward_backward(repetition_trellis(2), [math.nan, 0.0])

    def test_section_offset_adds_n_times(self):
        t = build_conv_trellis(["7", "5"], 2, 3)
        mu = np.random.default_rng(0).normal(size=t.n)
        base = forward_backward(t, mu).total
        assert forward_backward(t, mu, offset=0.37).total == pytest.approx(base + t.n * 0.37, abs=1e-10)

    def test_pinning_never_nan(self):
        t = build_check_trellis([[1, 1, 1, 1]])
        mu = np.array([math.inf, -math.inf, 0.0, 0.0])
        mt = forward_backward(t, mu)
        assert not np.isnan(mt.per_position).any()
        assert mt.total == pytest.approx(math.log(2), abs=1e-12)
        assert mt.per_position[0, 0] == -math.inf
        assert mt.per_position[1, 1] == -math.inf

    def test_contradictory_pins_give_minus_inf(self):
        t = repetition_trellis(2)
        mt = forward_backward(t, [math.inf, -math.inf])
        assert mt.total == -math.inf
        assert not np.isnan(mt.per_position).any()


class TestXiSplit:
    def test_repetition_pair(self):
        t = repetition_trellis(2)
        mt = forward_backward(t, [0.5, 0.5])
        split = xi_split(mt, mt, 0)
        assert split.log_xi_m1 == pytest.approx(0.0, abs=1e-12)
        assert split.log_xi_p1 == pytest.approx(0.0, abs=1e-12)
        assert split.log_xi_0 == pytest.approx(REP_TOTAL, abs=1e-12)
        assert log_xi_total(mt, mt) == pytest.approx(REP_PAIR_TOTAL, abs=1e-12)
        assert split.total == pytest.approx(REP_PAIR_TOTAL, abs=1e-12)

    def test_symmetric_inputs(self):
        t = build_conv_trellis(["7", "5"], 2, 3)
        mt = forward_backward(t, np.random.default_rng(1).normal(size=t.n))
        for j in range(t.n):
            s = xi_split(mt, mt, j)
            assert s.log_xi_m1 == s.log_xi_p1

    def test_pinned_second_table(self):
        t = build_check_trellis([[1, 1, 1]])
        mt1 = forward_backward(t, [0.2, 0.1, -0.3])
        mt2 = forward_backward(t, [math.inf, 0.0, 0.0])
        assert xi_split(mt1, mt2, 0).log_xi_p1 == -math.inf

    def test_index_range(self):
        mt = forward_backward(repetition_trellis(2), [0.0, 0.0])
        with pytest.raises(IndexError):
            xi_split(mt, mt, 2)

    def test_vectorised_matches_scalar(self, rng):
        code = random_code(rng, 8)
        mt1 = forward_backward(code.trellis1, rng.normal(size=8))
        mt2 = forward_backward(code.trellis2, rng.normal(size=8))
        m1, z, p1 = xi_split_all(mt1, mt2)
        for j in range(8):
            s = xi_split(mt1, mt2, j)
            assert (s.log_xi_m1, s.log_xi_0, s.log_xi_p1) == (m1[j], z[j], p1[j])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 14))
def test_single_trellis_matches_brute_force(seed, n):
    rng = np.random.default_rng(seed)
    t = build_check_trellis(random_checks(rng, int(rng.integers(1, 4)), n))
    mu = rng.normal(scale=2.0, size=n)
    mt = forward_backward(t, mu)
    total, per = log_sum_bruteforce(t, mu)
    assert rel(mt.total, total) <= 1e-9
    for j in range(n):
        for col in (0, 1):
            assert rel(mt.per_position[j, col], per[j, col]) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 10))
def test_split_components_sum_to_total(seed, n):
    rng = np.random.default_rng(seed)
    code = random_code(rng, n)
    mt1 = forward_backward(code.trellis1, rng.normal(size=n))
    mt2 = forward_backward(code.trellis2, rng.normal(size=n))
    total = log_xi_total(mt1, mt2)
    for j in range(n):
        assert rel(xi_split(mt1, mt2, j).total, total) <= 1e-9
        assert rel(np.logaddexp(*mt1.per_position[j]), mt1.total) <= 1e-9


def test_pair_against_double_enumeration(rng):
    for _ in range(20):
        n = int(rng.integers(4, 11))
        code = random_code(rng, n)
        lam = float(rng.uniform(0.3, 2.0))
        w1, w2 = rng.normal(size=n), rng.normal(size=n)
        mt1 = forward_backward(code.trellis1, lam * w1)
        mt2 = forward_backward(code.trellis2, lam * w2)
        ref_total, ref_splits = xi_bruteforce(code, w1, w2, lam)
        assert rel(log_xi_total(mt1, mt2), ref_total) <= 1e-9
        for j, ref in enumerate(ref_splits):
            got = xi_split(mt1, mt2, j)
            assert rel(got.log_xi_m1, ref.log_xi_m1) <= 1e-9
            assert rel(got.log_xi_0, ref.log_xi_0) <= 1e-9
            assert rel(got.log_xi_p1, ref.log_xi_p1) <= 1e-9
