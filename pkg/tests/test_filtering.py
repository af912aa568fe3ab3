import math

import numpy as np
import pytest

from qkd_mismatch import (
    Knowledge,
    ZeroRateReason,
    compute_filter,
    load_pair,
    mismatch_spectrum,
    noiseless_rate,
    noiseless_rate_bruteforce,
    special_case_rate,
    swap_detectors,
)
from qkd_mismatch.errors import DomainError, SingularDetector

from conftest import random_efficiency, random_pair

# Gram matrix of the reported contraction [[0.51, -0.17], [0.12, 0.56]]
# (the printed matrix is factor-convention dependent; its Gram is not).
REPORTED_GRAM = np.array([[0.2745, -0.0195], [-0.0195, 0.3425]])


def test_demo_filter_gram_matches_reported(demo_filter):
    assert np.abs(demo_filter.gram.real - REPORTED_GRAM).max() < 0.02
    assert np.abs(demo_filter.gram.imag).max() < 1e-12
    assert demo_filter.validity_margin >= -1e-9


def test_equal_detectors_gram_is_the_response():
    rng = np.random.default_rng(4)
    e = random_efficiency(rng, 3)
    pair = load_pair(e, e)
    filt = compute_filter(mismatch_spectrum(pair), pair)
    np.testing.assert_allclose(filt.gram, e, atol=1e-12)


def test_scalar_gram_is_min_efficiency():
    pair = load_pair([[0.8]], [[0.2]])
    filt = compute_filter(mismatch_spectrum(pair), pair)
    np.testing.assert_allclose(filt.gram, [[0.2]], atol=1e-12)


def test_filter_eigenvalue_identities():
    # eigenvalues of F_i^-dag C^dag C F_i^-1 are min(1/D, 1) and min(D, 1)
    rng = np.random.default_rng(17)
    for _ in range(10):
        pair = random_pair(rng, int(rng.integers(1, 4)))
        spec = mismatch_spectrum(pair)
        filt = compute_filter(spec, pair)
        for f, expected in (
            (pair.f0, np.minimum(1.0 / spec.ratios, 1.0)),
            (pair.f1, np.minimum(spec.ratios, 1.0)),
        ):
            fi = np.linalg.inv(f)
            block = fi.conj().T @ filt.gram @ fi
            np.testing.assert_allclose(
                np.sort(np.linalg.eigvalsh(block)), np.sort(expected), atol=1e-8
            )
        assert filt.validity_margin >= -1e-9


def test_noiseless_rate_demo(demo_spectrum):
    rate = noiseless_rate(demo_spectrum)
    assert abs(rate.rate - 0.496) < 0.001
    assert rate.zero_reason is None
    assert rate.rate == pytest.approx(2.0 / (1.0 + rate.limiting_ratio))


def test_noiseless_rate_no_mismatch_is_one():
    rng = np.random.default_rng(6)
    e = random_efficiency(rng, 2)
    rate = noiseless_rate(mismatch_spectrum(load_pair(e, e)))
    assert rate.rate == pytest.approx(1.0, abs=1e-9)


def test_noiseless_rate_diagonal_case_hand_value():
    # eta0 = (0.8, 0.4), eta1 = (0.3, 0.9): min(2*0.3/1.1, 2*0.4/1.3) = 6/11
    pair = load_pair(np.diag([0.8, 0.4]), np.diag([0.3, 0.9]))
    rate = noiseless_rate(mismatch_spectrum(pair))
    assert rate.rate == pytest.approx(6.0 / 11.0, abs=1e-12)


def test_bruteforce_demo(demo_pair, demo_filter):
    value = noiseless_rate_bruteforce(demo_pair, demo_filter, samples=1000, seed=1)
    assert abs(value - 0.496) < 0.002


def test_bruteforce_no_mismatch_is_constant_one():
    rng = np.random.default_rng(9)
    e = random_efficiency(rng, 2)
    pair = load_pair(e, e)
    filt = compute_filter(mismatch_spectrum(pair), pair)
    value = noiseless_rate_bruteforce(pair, filt, samples=1000, seed=2)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_bruteforce_scalar():
    pair = load_pair([[0.8]], [[0.2]])
    filt = compute_filter(mismatch_spectrum(pair), pair)
    value = noiseless_rate_bruteforce(pair, filt, samples=1000, seed=3)
    assert value == pytest.approx(0.4, abs=1e-12)


def test_bruteforce_rejects_small_sample_budget(demo_pair, demo_filter):
    with pytest.raises(DomainError):
        noiseless_rate_bruteforce(demo_pair, demo_filter, samples=100)


def test_oracle_matches_closed_form_on_random_pairs():
    rng = np.random.default_rng(23)
    for _ in range(12):
        d = int(rng.integers(1, 4))
        pair = random_pair(rng, d)
        spec = mismatch_spectrum(pair)
        closed = noiseless_rate(spec).rate
        brute = noiseless_rate_bruteforce(pair, compute_filter(spec, pair), samples=1000,
                                          seed=int(rng.integers(1 << 31)))
        assert abs(closed - brute) <= 0.005


def test_rate_invariant_under_swap(demo_pair, demo_spectrum):
    swapped = mismatch_spectrum(swap_detectors(demo_pair))
    assert noiseless_rate(swapped).rate == pytest.approx(
        noiseless_rate(demo_spectrum).rate, abs=1e-10
    )


def test_rate_monotone_as_ratios_leave_one():
    rng = np.random.default_rng(31)
    e0 = random_efficiency(rng, 3, lo=0.4, hi=0.9)
    previous = math.inf
    for c in (1.0, 0.8, 0.6, 0.4):
        pair = load_pair(e0, c * e0)  # all ratios equal 1/c >= 1
        rate = noiseless_rate(mismatch_spectrum(pair)).rate
        assert rate <= previous + 1e-12
        previous = rate


def test_special_case_singular_detector():
    pair = load_pair(np.diag([0.5, 0.0]), np.diag([0.5, 0.5]))
    result = special_case_rate(pair, Knowledge.FULL_MATRICES)
    assert result.rate == 0.0
    assert result.zero_reason is ZeroRateReason.SINGULAR_DETECTOR


def test_special_case_diagonal_only_is_zero_for_d_at_least_two(demo_pair):
    result = special_case_rate(demo_pair, Knowledge.DIAGONAL_ONLY)
    assert result.rate == 0.0
    assert result.zero_reason is ZeroRateReason.DIAGONAL_ONLY_KNOWLEDGE


def test_special_case_diagonal_only_scalar_still_keys():
    pair = load_pair([[0.8]], [[0.2]])
    result = special_case_rate(pair, Knowledge.DIAGONAL_ONLY)
    assert result.zero_reason is None
    assert result.rate == pytest.approx(0.4, abs=1e-12)


def test_special_case_full_knowledge_delegates(demo_pair, demo_spectrum):
    result = special_case_rate(demo_pair, Knowledge.FULL_MATRICES)
    assert result.rate == pytest.approx(noiseless_rate(demo_spectrum).rate, abs=1e-12)


def test_special_case_deflates_matching_nullspaces():
    from conftest import random_unitary

    rng = np.random.default_rng(41)
    u = random_unitary(rng, 3)
    e0 = (u * np.array([0.5, 0.3, 0.0])) @ u.conj().T
    e1 = (u * np.array([0.2, 0.8, 0.0])) @ u.conj().T
    result = special_case_rate(load_pair(e0, e1), Knowledge.FULL_MATRICES)
    assert result.zero_reason is None
    assert result.rate == pytest.approx(6.0 / 11.0, abs=1e-8)


def test_compute_filter_requires_full_rank():
    singular = load_pair(np.diag([0.5, 0.0]), np.diag([0.5, 0.5]))
    spectrum = mismatch_spectrum(load_pair(0.5 * np.eye(2), 0.5 * np.eye(2)))
    with pytest.raises(SingularDetector):
        compute_filter(spectrum, singular)
