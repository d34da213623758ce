import math
import warnings

import numpy as np
import pytest

from thermenc.analytic import two_codeword_capacity
from thermenc.channel import ChannelContext, Coherent, DisplacedThermal, Thermal
from thermenc.encoding import Encoding, holevo, kkt_residuals
from thermenc.optimizer import (
    OptimizationError,
    OptimizerConfig,
    optimize_encoding,
    optimize_weights,
    support_transitions,
    threshold_scan,
)

import oracles

# chi of the optimal T=0 coherent encodings, from explicit phase-sampled
# density matrices (oracles.holevo_coherent_rings) at the optimizer's atoms
CHI_E35_ORACLE = 2.995108574180116
CHI_E92_ORACLE = 4.0009895133906195


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(kkt_tolerance=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(max_support=0)


def test_weights_single_point():
    enc = optimize_weights([1.0], ChannelContext(Coherent(2.0)))
    assert enc.weights.tolist() == [1.0]


def test_weights_two_codeword_vacuum_resource():
    ctx = ChannelContext(Thermal(0.0), 1.0)
    enc = optimize_weights([0.0, 1.0], ctx)
    np.testing.assert_allclose(enc.weights, [0.4, 0.6], atol=1e-8)
    assert holevo(enc, ctx) == pytest.approx(math.log2(1.25), abs=1e-10)


@pytest.mark.parametrize("n_env", [0.5, 2.0, 8.0])
def test_weights_match_bruteforce_scan(n_env):
    q0_ref, chi_ref = oracles.two_codeword_bruteforce(n_env)
    enc = optimize_weights([0.0, 1.0], ChannelContext(Thermal(0.0), n_env))
    assert enc.weights[0] == pytest.approx(q0_ref, abs=1e-6)
    assert holevo(enc, ChannelContext(Thermal(0.0), n_env)) == pytest.approx(chi_ref, abs=1e-8)


def test_weights_prune_useless_middle_atom():
    ctx = ChannelContext(Thermal(0.0), 1.0)
    enc = optimize_weights([0.0, 0.5, 1.0], ctx)
    assert enc.support.tolist() == [0.0, 1.0]
    assert holevo(enc, ctx) == pytest.approx(two_codeword_capacity(1.0)[1], abs=1e-10)


def test_weights_accepts_unsorted_support_and_initial_weights():
    ctx = ChannelContext(Coherent(3.5))
    a = optimize_weights([1.0, 0.0682], ctx, initial_weights=[0.9, 0.1])
    b = optimize_weights([0.0682, 1.0], ctx)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-9)


def test_weights_reject_bad_support():
    with pytest.raises(ValueError):
        optimize_weights([], ChannelContext(Coherent(1.0)))
    with pytest.raises(ValueError):
        optimize_weights([1.5], ChannelContext(Coherent(1.0)))


def test_optimize_low_energy_single_ring():
    enc, rep = optimize_encoding(ChannelContext(Coherent(1.1)))
    assert enc.support.tolist() == [1.0]
    assert rep.chi == pytest.approx(2.0, abs=0.1)
    assert rep.converged


def test_optimize_two_rings_matches_density_matrix_oracle():
    enc, rep = optimize_encoding(ChannelContext(Coherent(3.5)))
    assert len(enc) == 2
    assert rep.chi == pytest.approx(CHI_E35_ORACLE, abs=1e-9)
    np.testing.assert_allclose(enc.ring_energies(3.5), [0.2387, 3.5], atol=1e-3)


def test_optimize_three_rings_matches_density_matrix_oracle():
    enc, rep = optimize_encoding(ChannelContext(Coherent(9.2)))
    assert len(enc) == 3
    assert rep.chi == pytest.approx(CHI_E92_ORACLE, abs=1e-9)


def test_optimize_degenerate_thermal():
    enc, rep = optimize_encoding(ChannelContext(Thermal(2.0), 2.0))
    assert len(enc) == 1 and rep.chi == 0.0 and rep.converged


def test_optimize_support_budget_error_carries_best():
    with pytest.raises(OptimizationError) as err:
        optimize_encoding(ChannelContext(Coherent(3.5)), OptimizerConfig(max_support=1))
    assert len(err.value.best) == 1
    assert err.value.report.chi == pytest.approx(holevo(err.value.best, ChannelContext(Coherent(3.5))))


@pytest.mark.parametrize("ctx", [
    ChannelContext(Coherent(5.0)),
    ChannelContext(Coherent(2.0), 1.0),
    ChannelContext(Thermal(0.0), 3.0),
    ChannelContext(Thermal(1.0), 0.2),
    ChannelContext(DisplacedThermal(0.5, 3.0)),
], ids=["coh5", "coh2-env1", "vac-env3", "th1-env0.2", "dts"])
def test_converged_reports_satisfy_optimality_conditions(ctx):
    enc, rep = optimize_encoding(ctx)
    assert rep.converged
    assert rep.grid_residuals <= 1e-6
    assert np.all(np.abs(rep.support_residuals[enc.weights > 0]) <= 1e-6)
    assert abs(rep.weighted_support_residual) <= 1e-10
    # independent re-check on a plain, undensified grid
    assert kkt_residuals(enc, ctx, np.linspace(0, 1, 2001)).grid_residuals <= 1e-6


def test_scan_single_ring_transition():
    grid = [1.3, 1.45, 1.55, 1.58, 1.7]
    rows = threshold_scan(lambda E: ChannelContext(Coherent(E)), grid)
    assert all(r.ok for r in rows)
    trans = support_transitions(rows)
    assert len(trans) == 1
    lo, hi, a, b = trans[0]
    # the transition energy is 1.25034^2 = 1.56335
    assert (a, b) == (1, 2) and lo <= 1.25034 ** 2 <= hi
    chis = [r.chi for r in rows]
    assert np.all(np.diff(chis) >= 0)
    assert all(r.encoding.support[-1] == 1.0 for r in rows)


def test_scan_vacuum_resource_third_codeword():
    rows = threshold_scan(lambda n: ChannelContext(Thermal(0.0), n), [8.0, 8.5, 8.9, 9.5])
    trans = support_transitions(rows)
    assert len(trans) == 1
    lo, hi, a, b = trans[0]
    assert (a, b) == (2, 3) and lo <= 8.67754 <= hi


def test_scan_rejects_non_monotone_grid():
    with pytest.raises(ValueError):
        threshold_scan(lambda E: ChannelContext(Coherent(E)), [1.0, 2.0, 1.5])


def test_scan_records_failures_and_continues():
    rows = threshold_scan(lambda E: ChannelContext(Coherent(E)), [1.0, 3.5],
                          OptimizerConfig(max_support=1))
    assert rows[0].ok and not rows[1].ok
    assert rows[1].error


def test_thermal_swap_symmetry_gives_equal_capacity():
    a = optimize_encoding(ChannelContext(Thermal(0.5), 3.0))[1].chi
    b = optimize_encoding(ChannelContext(Thermal(3.0), 0.5))[1].chi
    assert a == pytest.approx(b, abs=1e-8)


def test_warm_and_cold_start_agree():
    rows = threshold_scan(lambda E: ChannelContext(Coherent(E)), [2.0, 4.0, 6.0])
    cold = optimize_encoding(ChannelContext(Coherent(6.0)))[1].chi
    assert rows[-1].chi == pytest.approx(cold, abs=1e-5)


def test_coherent_scan_monotone_and_outer_ring():
    grid = np.linspace(0.5, 12.0, 9)
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        rows = threshold_scan(lambda E: ChannelContext(Coherent(E)), grid)
    assert all(r.ok for r in rows)
    assert np.all(np.diff([r.chi for r in rows]) >= 0)
    assert all(r.encoding.support[-1] == 1.0 for r in rows)


def test_optimum_beats_any_single_ring_and_bound():
    from thermenc.fock import g_function

    ctx = ChannelContext(Coherent(7.0))
    chi = optimize_encoding(ctx)[1].chi
    for eta in (0.3, 0.8, 1.0):
        assert chi >= holevo(Encoding.point(eta), ctx)
    assert chi <= g_function(7.0)
