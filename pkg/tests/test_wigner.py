import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermenc.analytic import flat_encoding_distribution
from thermenc.channel import ChannelContext, Coherent
from thermenc.encoding import Encoding, average_distribution
from thermenc.fock import PhotonDistribution, poisson_pmf, thermal_pmf
from thermenc.wigner import RadialProfile, radial_normalization, wigner_plane, wigner_radial

import oracles

VACUUM = PhotonDistribution(np.array([1.0]), 0.0)


def test_vacuum_anchor():
    assert wigner_radial(VACUUM, [0.0]).values[0] == 1.0 / math.pi


def test_single_photon_origin():
    assert wigner_radial(PhotonDistribution(np.array([0.0, 1.0]), 0.0), [0.0]).values[0] == -1.0 / math.pi


def test_vacuum_gaussian_profile():
    r = np.linspace(0, 4, 41)
    np.testing.assert_allclose(wigner_radial(VACUUM, r).values, np.exp(-r * r) / math.pi, rtol=1e-14)


@pytest.mark.parametrize("r", [0.0, 0.4, 1.3, 2.7])
def test_matches_displaced_parity_oracle(r):
    d = poisson_pmf(2.0)
    assert wigner_radial(d, [r]).values[0] == pytest.approx(
        oracles.wigner_parity_oracle(d.probs, r), abs=1e-10)


def test_matches_scipy_laguerre_sum():
    d = thermal_pmf(2.0)
    r = np.linspace(0, 3, 31)
    np.testing.assert_allclose(wigner_radial(d, r).values,
                               oracles.wigner_fock_diag_direct(d.probs, r), atol=1e-12)


def test_flat_state_shape_and_normalization():
    d = flat_encoding_distribution(9.0)
    prof = wigner_radial(d, np.linspace(0, 8, 4001))
    assert abs(prof.normalization() - 1) <= 1e-3
    inner = prof.values[prof.radii <= 2]
    assert inner.max() / inner.min() < 1.2
    assert prof.values[-1] < 1e-3 * inner.min()


def test_optimal_average_state_normalization():
    ctx = ChannelContext(Coherent(3.5))
    enc = Encoding([0.0682, 1.0], [0.127, 0.873])
    prof = wigner_radial(average_distribution(enc, ctx), np.linspace(0, 7, 3001))
    assert prof.normalization() == pytest.approx(1.0, abs=1e-3)


def test_large_radii_stay_finite():
    d = poisson_pmf(60.0)
    prof = wigner_radial(d, np.array([0.0, 5.0, 30.0, 60.0]))
    assert np.all(np.isfinite(prof.values))
    assert abs(prof.values[-1]) < 1e-300 or prof.values[-1] == 0.0


def test_rejects_negative_radius():
    with pytest.raises(ValueError):
        wigner_radial(VACUUM, [-1.0])


def test_plane_wrapper():
    d = thermal_pmf(0.5)
    x = np.linspace(-2, 2, 9)
    W = wigner_plane(d, x, x)
    assert W.shape == (9, 9)
    np.testing.assert_allclose(W, W.T, atol=1e-15)
    assert W[4, 4] == pytest.approx(wigner_radial(d, [0.0]).values[0])


def test_profile_is_read_only():
    prof = wigner_radial(VACUUM, [0.0, 1.0])
    assert isinstance(prof, RadialProfile)
    with pytest.raises(ValueError):
        prof.values[0] = 0.0
    assert radial_normalization(prof.radii, prof.values) == prof.normalization()


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.0, 6.0), st.floats(0.0, 1.0))
def test_linearity_in_the_state(m1, m2, lam):
    r = np.linspace(0, 5, 26)
    a, b = poisson_pmf(m1), thermal_pmf(m2)
    L = max(len(a), len(b))
    mix = PhotonDistribution(lam * a.padded(L) + (1 - lam) * b.padded(L),
                             lam * a.tail_mass + (1 - lam) * b.tail_mass)
    lhs = wigner_radial(mix, r).values
    rhs = lam * wigner_radial(a, r).values + (1 - lam) * wigner_radial(b, r).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12
