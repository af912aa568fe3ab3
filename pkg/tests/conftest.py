import numpy as np
import pytest

from qkd_mismatch import compute_filter, load_pair, mismatch_spectrum

# The two-time-bin demo pair with strong mismatch (ratios ~3.03 and ~0.356).
DEMO_E0 = np.array([[0.8, -0.2], [-0.2, 0.4]])
DEMO_E1 = np.array([[0.3, 0.1], [0.1, 0.9]])


@pytest.fixture(scope="session")
def demo_pair():
    return load_pair(DEMO_E0, DEMO_E1)


@pytest.fixture(scope="session")
def demo_spectrum(demo_pair):
    return mismatch_spectrum(demo_pair)


@pytest.fixture(scope="session")
def demo_filter(demo_pair, demo_spectrum):
    return compute_filter(demo_spectrum, demo_pair)


def random_unitary(rng, d):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))[np.newaxis, :].conj()


def random_efficiency(rng, d, lo=0.1, hi=0.95):
    """Random full-rank Hermitian matrix with eigenvalues in [lo, hi]."""
    u = random_unitary(rng, d)
    w = rng.uniform(lo, hi, size=d)
    return (u * w[np.newaxis, :]) @ u.conj().T


def random_pair(rng, d, lo=0.1, hi=0.95):
    return load_pair(random_efficiency(rng, d, lo, hi), random_efficiency(rng, d, lo, hi))
