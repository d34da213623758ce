import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermenc.channel import (
    ChannelContext,
    Coherent,
    DisplacedThermal,
    PureFock,
    Thermal,
    UnsupportedChannelError,
    codeword_entropy,
    ring_distribution,
)
from thermenc.fock import g_function, poisson_pmf, shannon_entropy, thermal_pmf

import oracles


def test_resource_validation():
    with pytest.raises(ValueError):
        Coherent(-1.0)
    with pytest.raises(ValueError):
        DisplacedThermal(1.0, float("nan"))
    with pytest.raises(ValueError):
        PureFock([1.0, 1.0])
    with pytest.raises(ValueError):
        ChannelContext(Coherent(1.0), n_env=-0.1)
    with pytest.raises(TypeError):
        ChannelContext("coherent")


def test_eta_out_of_range():
    with pytest.raises(ValueError):
        ring_distribution(ChannelContext(Coherent(1.0)), 1.2)


def test_coherent_vacuum_environment_is_poisson():
    d = ring_distribution(ChannelContext(Coherent(1.1)), 1.0)
    np.testing.assert_allclose(d.probs, poisson_pmf(1.1).probs)


def test_thermal_resource_equal_to_environment():
    ctx = ChannelContext(Thermal(2.0), 2.0)
    ref = thermal_pmf(2.0).probs
    for eta in (0.0, 0.3, 1.0):
        np.testing.assert_allclose(ring_distribution(ctx, eta).probs, ref, rtol=1e-12)


def test_coherent_thermal_environment_matches_oracle():
    d = ring_distribution(ChannelContext(Coherent(1.0), 1.0), 0.4)
    ref = oracles.displaced_thermal_diag(0.6, 0.4, len(d))
    assert np.max(np.abs(d.probs - ref)) <= 1e-10


def test_codeword_entropy_examples():
    assert codeword_entropy(ChannelContext(Coherent(3.0)), 0.5) == 0.0
    assert codeword_entropy(ChannelContext(Thermal(1.0)), 1.0) == 2.0
    # n_ch = (1 - 0.4) * 2 = 1.2; g(1.2) = 2.2 log2 2.2 - 1.2 log2 1.2
    expected = 2.2 * np.log2(2.2) - 1.2 * np.log2(1.2)
    assert expected == pytest.approx(2.186866, abs=1e-6)
    assert codeword_entropy(ChannelContext(Coherent(0.5), 2.0), 0.4) == pytest.approx(expected, abs=1e-14)


def test_pure_fock_only_at_full_transmission():
    amps = np.array([0.6, 0.8])
    ctx = ChannelContext(PureFock(amps))
    np.testing.assert_allclose(ring_distribution(ctx, 1.0).probs, [0.36, 0.64])
    assert codeword_entropy(ctx, 1.0) == 0.0
    with pytest.raises(UnsupportedChannelError):
        ring_distribution(ctx, 0.5)
    with pytest.raises(UnsupportedChannelError):
        codeword_entropy(ChannelContext(PureFock(amps), 0.1), 1.0)


def test_length_extends_without_shortening():
    ctx = ChannelContext(Coherent(1.0))
    d = ring_distribution(ctx, 1.0, 300)
    assert len(d) == 300
    assert len(ring_distribution(ctx, 1.0, 2)) == len(ring_distribution(ctx, 1.0))


_families = st.one_of(
    st.builds(Coherent, st.floats(0.0, 12.0)),
    st.builds(Thermal, st.floats(0.0, 8.0)),
    st.builds(DisplacedThermal, st.floats(0.0, 6.0), st.floats(0.0, 8.0)),
)


@settings(max_examples=60, deadline=None)
@given(_families, st.floats(0.0, 6.0), st.floats(0.0, 1.0))
def test_energy_bookkeeping(res, n_env, eta):
    ctx = ChannelContext(res, n_env)
    assert ring_distribution(ctx, eta).mean() == pytest.approx(
        eta * res.energy + (1 - eta) * n_env, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(_families, st.floats(0.0, 6.0), st.floats(0.0, 1.0))
def test_phase_averaging_raises_entropy(res, n_env, eta):
    ctx = ChannelContext(res, n_env)
    assert codeword_entropy(ctx, eta) <= shannon_entropy(ring_distribution(ctx, eta)) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 8.0), st.floats(0.0, 8.0), st.floats(0.0, 1.0))
def test_thermal_swap_symmetry(n_res, n_env, eta):
    a = ring_distribution(ChannelContext(Thermal(n_res), n_env), eta)
    b = ring_distribution(ChannelContext(Thermal(n_env), n_res), 1.0 - eta)
    L = max(len(a), len(b))
    np.testing.assert_allclose(a.padded(L), b.padded(L), atol=1e-12)
