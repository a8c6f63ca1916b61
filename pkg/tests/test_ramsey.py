import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apvsim.physics import TWO_PI
from apvsim.ramsey import (
    EstimatorError,
    NoiseModel,
    RamseySequence,
    collect_counts,
    effective_efficiency,
    effective_tau,
    fringe_contrast,
    position_jitter_bias,
    ramsey_probability,
    run_experiment,
    simulate_trial,
    verify_scaling,
)

from conftest import make_plan


def binomial_arm_stderr(p_plus, p_minus, shots_per_probe, contrast, T, delta=0.0):
    """Projection-noise stderr of one arm's frequency from the two-point fringe slope."""
    var = (p_plus * (1 - p_plus) + p_minus * (1 - p_minus)) / shots_per_probe
    return math.sqrt(var) / (contrast * T * math.cos(delta * T))


class TestProbability:
    def test_resonant(self):
        seq = RamseySequence(1.0, 5.0)
        assert ramsey_probability(5.0, seq, math.inf) == 1.0

    def test_half_period(self):
        seq = RamseySequence(2.0, 0.0)
        assert ramsey_probability(math.pi / 2, seq, math.inf) == pytest.approx(0.0, abs=1e-15)

    def test_decay(self):
        seq = RamseySequence(0.6, 0.0)
        assert ramsey_probability(0.0, seq, 0.6) == pytest.approx(0.5 * (1 + math.exp(-1)))
        assert ramsey_probability(0.0, seq, 0.6) == pytest.approx(0.684, abs=5e-4)

    @given(st.floats(-1e6, 1e6), st.floats(1e-6, 10), st.floats(1e-6, 1.0), st.floats(1e-6, 1e6))
    def test_clamp_never_triggers(self, detuning, T, contrast, tau):
        seq = RamseySequence(T, 0.0, contrast)
        raw = 0.5 * (1 + contrast * math.exp(-T / tau) * math.cos(detuning * T))
        assert 0.0 <= raw <= 1.0
        assert ramsey_probability(detuning, seq, tau) == raw

    @pytest.mark.parametrize("kw", [dict(free_time=0.0), dict(contrast=0.0), dict(contrast=1.1)])
    def test_invalid_sequence(self, kw):
        base = dict(free_time=1.0, phase_reference=0.0)
        base.update(kw)
        with pytest.raises(ValueError):
            RamseySequence(**base)


class TestTrials:
    def test_deterministic_bits(self, ra226, noiseless):
        # + probe sits on resonance (p = 1), - probe half a fringe away (p = 0)
        plan = make_plan(ra226, detune_hz=0.0)
        plan = replace(plan, sequence=replace(plan.sequence,
                                              phase_reference=plan.zeeman_splitting - plan.sequence.quadrature))
        noise = replace(noiseless, projection_noise=True)
        bits = [simulate_trial(plan, noise, i, False) for i in range(40)]
        assert bits == [1, 0] * 20

    def test_seed_reproducible(self, ra226):
        plan = make_plan(ra226)
        noise = NoiseModel(b_field_sigma=TWO_PI, position_sigma=50e-9)
        a = [simulate_trial(plan, noise, i, True) for i in range(50)]
        assert a == [simulate_trial(plan, noise, i, True) for i in range(50)]
        other = replace(plan, seed=2)
        assert a != [simulate_trial(other, noise, i, True) for i in range(50)]

    @pytest.mark.parametrize("lasers_on", [False, True])
    def test_scalar_matches_vectorized(self, ra226, lasers_on):
        plan = make_plan(ra226, tpb=30, blocks=3)
        noise = NoiseModel(b_field_sigma=TWO_PI * 2, position_sigma=80e-9, common_mode_drift=5.0,
                           b_field_drift=0.3)
        off, on = collect_counts(plan, noise)
        counts = on if lasers_on else off
        bits = np.array([simulate_trial(plan, noise, i, lasers_on) for i in range(plan.trials_per_arm)])
        per_block = bits.reshape(plan.blocks, plan.trials_per_block, 2).sum(axis=1)
        np.testing.assert_array_equal(per_block, counts)

    def test_scalar_matches_vectorized_probabilities(self, ra226):
        plan = make_plan(ra226, tpb=5, blocks=2)
        noise = NoiseModel(position_sigma=50e-9, b_field_sigma=1.0, projection_noise=False)
        _, on = collect_counts(plan, noise)
        p = np.array([simulate_trial(plan, noise, i, True) for i in range(plan.trials_per_arm)])
        np.testing.assert_allclose(p.reshape(2, 5, 2).sum(axis=1), on, rtol=1e-12)


class TestEstimator:
    @pytest.mark.parametrize("name,hz", [("ra226", 5.3), ("ba138", 0.3)])
    def test_noiseless_exact(self, name, hz, noiseless, request):
        plan = make_plan(request.getfixturevalue(name))
        res = run_experiment(plan, noiseless)
        assert res.expected_pnc_shift == pytest.approx(TWO_PI * hz, rel=1e-12)
        assert abs(res.pnc_shift_estimate / res.expected_pnc_shift - 1) < 1e-9
        assert res.pnc_shift_stderr == 0.0
        assert res.blocks_discarded == 0

    def test_noiseless_with_decoherence_and_tracking(self, ra226):
        plan = make_plan(ra226, free_time=0.3, on_offset=None, detune_hz=0.4)
        noise = NoiseModel(projection_noise=False)
        res = run_experiment(plan, noise)
        assert fringe_contrast(plan, noise) < 0.7
        assert abs(res.pnc_shift_estimate / res.expected_pnc_shift - 1) < 1e-9

    @pytest.mark.parametrize("drift", [0.0, 1.0, -250.0, 3e4])
    def test_common_mode_noiseless(self, ra226, noiseless, drift):
        plan = make_plan(ra226)
        ref = run_experiment(plan, noiseless).pnc_shift_estimate
        assert run_experiment(plan, replace(noiseless, common_mode_drift=drift)).pnc_shift_estimate == ref

    def test_common_mode_noisy(self, ra226):
        plan = make_plan(ra226)
        noise = NoiseModel(b_field_sigma=TWO_PI, position_sigma=30e-9)
        a = run_experiment(plan, noise)
        b = run_experiment(plan, replace(noise, common_mode_drift=TWO_PI * 40.0))
        assert abs(a.pnc_shift_estimate - b.pnc_shift_estimate) < 3 * a.pnc_shift_stderr

    def test_worker_invariance(self, ra226):
        plan = make_plan(ra226, blocks=7)
        noise = NoiseModel(b_field_sigma=TWO_PI, position_sigma=30e-9)
        a = run_experiment(plan, noise, workers=1)
        b = run_experiment(plan, noise, workers=3)
        assert a == b and a.block_records == b.block_records

    def test_stderr_matches_binomial(self, ra226):
        plan = make_plan(ra226, free_time=0.01, detune_hz=0.0, tpb=50, blocks=400)
        noise = NoiseModel(decoherence_tau=math.inf, quench_rates={})
        res = run_experiment(plan, noise)
        M = plan.trials_per_block * plan.blocks
        oracle = binomial_arm_stderr(0.5, 0.5, M, 1.0, 0.01)
        assert res.freq_off_stderr == pytest.approx(oracle, rel=0.1)
        assert res.pnc_shift_stderr == pytest.approx(math.hypot(oracle, oracle) / 2, rel=0.1)

    @pytest.mark.slow
    def test_stderr_shrinks_root_m(self, ra226):
        # replicate spread over seeds, one block per run
        noise = NoiseModel(decoherence_tau=math.inf, quench_rates={})
        scaled = []
        for M in (1_000, 10_000, 100_000):
            plan = make_plan(ra226, detune_hz=0.0, tpb=M // 2, blocks=1)
            est = [run_experiment(replace(plan, seed=s), noise).pnc_shift_estimate for s in range(200)]
            scaled.append(np.std(est, ddof=1) * math.sqrt(M))
        assert max(scaled) / min(scaled) < 1.2

    def test_single_block_uses_binomial(self, ra226):
        plan = make_plan(ra226, detune_hz=0.0, tpb=5000, blocks=1)
        noise = NoiseModel(decoherence_tau=math.inf, quench_rates={})
        res = run_experiment(plan, noise)
        assert res.freq_off_stderr == pytest.approx(binomial_arm_stderr(0.5, 0.5, 5000, 1.0, 0.01), rel=0.05)

    def test_out_of_range_blocks_discarded(self, ra226):
        plan = make_plan(ra226, detune_hz=0.0, tpb=1, blocks=200)
        noise = NoiseModel(decoherence_tau=0.05, quench_rates={})
        res = run_experiment(plan, noise)
        assert res.blocks_discarded > 0
        assert res.trials_used == 2 * (2 * plan.blocks - res.blocks_discarded)

    def test_all_blocks_out_of_range(self, ra226, noiseless):
        plan = make_plan(ra226, free_time=0.01, detune_hz=25.0)  # detuning * T = pi/2
        with pytest.raises(EstimatorError):
            run_experiment(plan, noiseless)

    @pytest.mark.parametrize("interleave,slots", [(True, 1), (False, 20)])
    def test_interleave_drift_bias(self, ra226, noiseless, interleave, slots):
        drift = 0.01
        plan = make_plan(ra226, blocks=20, interleave=interleave)
        res = run_experiment(plan, replace(noiseless, b_field_drift=drift))
        bias = res.larmor_shift - 2 * res.expected_pnc_shift
        assert bias == pytest.approx(drift * slots, rel=1e-6)

    def test_quench_shortens_tau(self, ra226):
        plan = make_plan(ra226)
        assert effective_tau(plan, NoiseModel()) == pytest.approx(1 / (1 / 0.6 + 0.04))
        assert effective_tau(plan, NoiseModel(quench_rates={})) == 0.6

    def test_effective_efficiency(self, ra226, noiseless):
        plan = make_plan(ra226, free_time=0.3, on_offset=None, detune_hz=0.0, tpb=200, blocks=20)
        res = run_experiment(plan, NoiseModel(quench_rates={}))
        f = effective_efficiency(res, plan)
        assert 0.05 < f < 1.0
        assert math.isinf(effective_efficiency(run_experiment(plan, noiseless), plan))

    @pytest.mark.parametrize("kw", [dict(tpb=0), dict(blocks=0), dict(zeeman_hz=0.0), dict(seed=-1)])
    def test_invalid_plan(self, ra226, kw):
        with pytest.raises(ValueError):
            make_plan(ra226, **kw)


class TestJitter:
    def test_zero_sigma(self, ra226):
        assert position_jitter_bias(make_plan(ra226), 0.0) == (0.0, 0.0)

    def test_deterministic_offset(self, ra226):
        bias, _ = position_jitter_bias(make_plan(ra226), 50e-9, deterministic=True)
        assert bias == pytest.approx(1 - math.cos(TWO_PI * 50 / 828), rel=1e-12)
        assert bias == pytest.approx(0.071, abs=0.001)

    def test_gaussian(self, ra226):
        bias, err = position_jitter_bias(make_plan(ra226), 50e-9)
        oracle = 1 - math.exp(-(TWO_PI * 50 / 828) ** 2 / 2)
        assert oracle == pytest.approx(0.0695, abs=2e-4)
        assert abs(bias - oracle) < 3 * err


class TestScaling:
    def test_grid_too_small(self, ra226):
        with pytest.raises(ValueError, match="3 values"):
            verify_scaling(make_plan(ra226), NoiseModel(), [1, 2], [1, 2, 3])

    def test_zero_trials(self, ra226):
        with pytest.raises(ValueError, match="no trials"):
            verify_scaling(make_plan(ra226), NoiseModel(), [0.0, 0.0, 0.0], [1, 2, 3])
