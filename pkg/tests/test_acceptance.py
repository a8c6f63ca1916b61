"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints at the end of the run.
Oracles here are written out by hand and do not call the package's own formulas.
"""

import contextlib
import json
import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from apvsim.budget import (
    antinode_amplitude_error,
    e1_pnc_si,
    full_budget,
    node_amplitude_error,
    statistical_uncertainty,
)
from apvsim.cli import main
from apvsim.config import data_path
from apvsim.physics import (
    TWO_PI,
    CouplingMatrix,
    calibrate_pnc_scale,
    crossed_fields,
    nsd_pnc_scale,
    pnc_light_shift,
    pnc_rabi_matrix,
    quad_light_shift,
    quad_rabi_matrix,
    species_pnc_scale,
)
from apvsim.ramsey import NoiseModel, load_plan, position_jitter_bias, run_experiment, verify_scaling
from apvsim.species import load_species

from conftest import ACCEPTANCE_LINES

HALF = Fraction(1, 2)

# CODATA 2018, typed in independently of scipy
HBAR = 1.054571817e-34
E_CHARGE = 1.602176634e-19
A0 = 5.29177210903e-11


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        ACCEPTANCE_LINES.append(f"FAIL  {number}. {title}")
        print(f"FAIL  {number}. {title}")
        raise
    ACCEPTANCE_LINES.append(f"PASS  {number}. {title}")
    print(f"PASS  {number}. {title}")


def brute_force_shift(pnc, quad, col):
    """Interference shift written out with explicit real arithmetic."""
    acc = 0.0
    norm2 = 0.0
    for row in range(len(pnc)):
        a, b = complex(pnc[row][col]), complex(quad[row][col])
        acc += a.real * b.real + a.imag * b.imag
        norm2 += b.real * b.real + b.imag * b.imag
    return -acc / math.sqrt(norm2)


def test_1_positioning_systematics(ba138, ra226):
    with criterion(1, "positioning systematics: 1.2 %, 7.1 %, 37 % (+-0.2 pp); Ba+ E'' vs 16 % (+-1 pp)"):
        ld = 50e-9
        ba_wl, ra_wl = ba138.sd_wavelength("D3/2"), ra226.sd_wavelength("D3/2")
        assert ba_wl == pytest.approx(2051e-9) and ra_wl == pytest.approx(828e-9)
        assert abs(100 * antinode_amplitude_error(ba_wl, ld) - 1.2) <= 0.2
        assert abs(100 * antinode_amplitude_error(ra_wl, ld) - 7.1) <= 0.2
        assert abs(100 * node_amplitude_error(ra_wl, ld) - 37.0) <= 0.2
        assert abs(100 * node_amplitude_error(ba_wl, ld) - 16.0) <= 1.0


def test_2_statistical_entry(ba138, ra226, scenario):
    with criterion(2, "statistical entry: Ba+ 1.05e-3 (~0.1 %), Ra+ 6.5e-4 computed, differs from 0.03 %"):
        frac = {}
        for sp in (ba138, ra226):
            sp = scenario.apply(sp)
            inputs = scenario.inputs_for(sp)
            computed = statistical_uncertainty(inputs) / e1_pnc_si(sp)
            oracle = (HBAR / (2e6 * 0.1 * math.sqrt(1 * 86400 * sp.coherence_time))
                      / (sp.e1_pnc_coeff * 1e-11 * 0.9 * E_CHARGE * A0))
            assert computed == pytest.approx(oracle, rel=0.05)
            assert full_budget(sp, inputs).statistical_fraction == computed
            frac[sp.name] = computed
        ba, ra = frac["138Ba+"], frac["226Ra+"]
        assert ba == pytest.approx(1.05e-3, rel=0.05)
        assert round(ba * 100, 1) == 0.1
        assert ra == pytest.approx(6.5e-4, rel=0.05)
        # the 0.03 % reference figure for Ra+ is not reproduced by these inputs
        assert ra / 3e-4 > 2.0


def test_3_calibration_round_trip(ba138, ra226):
    with criterion(3, "calibration round trip: 2pi x 5.3 rad/s (Ra+), 2pi x 0.3 rad/s (Ba+) to 1e-9"):
        for sp, hz in ((ra226, 5.3), (ba138, 0.3)):
            e_prime, e_dprime = crossed_fields(sp, 2e6, 2e6)
            quad = quad_rabi_matrix(sp, e_dprime, sp.geometry_for("D3/2", "quad"))
            geom = sp.geometry_for("D3/2", "pnc")
            scale = calibrate_pnc_scale(sp, 2e6, TWO_PI * hz, quad, geom)
            shift = pnc_light_shift(pnc_rabi_matrix(sp, e_prime, geom, scale), quad, HALF)
            assert abs(shift / (TWO_PI * hz) - 1) < 1e-9
            assert species_pnc_scale(sp, 2e6) == pytest.approx(scale, rel=1e-12)


def test_4_light_shift_properties(ra226):
    with criterion(4, "light-shift properties on 1000 random matrices and the shipped geometry tables"):
        rng = np.random.default_rng(20090601)
        for _ in range(1000):
            shape = (4, 2) if rng.random() < 0.5 else (6, 2)
            upper = "D3/2" if shape[0] == 4 else "D5/2"

            def draw():
                return rng.normal(size=shape) + 1j * rng.normal(size=shape)

            p1, p2, q = draw(), draw(), draw()
            P1, P2 = CouplingMatrix(p1, "pnc", upper=upper), CouplingMatrix(p2, "pnc", upper=upper)
            Q = CouplingMatrix(q, "quad", upper=upper)
            c, a, b = rng.uniform(1e-3, 1e3), rng.normal(), rng.normal()
            for col, m in enumerate((-HALF, HALF)):
                s1, s2 = pnc_light_shift(P1, Q, m), pnc_light_shift(P2, Q, m)
                assert s1 == pytest.approx(brute_force_shift(p1, q, col), rel=1e-12, abs=1e-300)
                scaled = pnc_light_shift(P1, CouplingMatrix(c * q, "quad", upper=upper), m)
                assert scaled == pytest.approx(s1, rel=1e-12)
                combo = pnc_light_shift(CouplingMatrix(a * p1 + b * p2, "pnc", upper=upper), Q, m)
                assert abs(combo - (a * s1 + b * s2)) <= 1e-12 * (abs(a * s1) + abs(b * s2))

        ra227 = load_species(data_path("species", "ra227.yaml"))
        for sp, manifold, scale in ((ra226, "D3/2", species_pnc_scale(ra226, 2e6)),
                                    (ra227, "D5/2", nsd_pnc_scale(ra227, 1e-5))):
            e_prime, e_dprime = crossed_fields(sp, 2e6, 2e6, manifold)
            pnc = pnc_rabi_matrix(sp, e_prime, sp.geometry_for(manifold, "pnc"), scale)
            quad = quad_rabi_matrix(sp, e_dprime, sp.geometry_for(manifold, "quad"))
            plus, minus = pnc_light_shift(pnc, quad, HALF), pnc_light_shift(pnc, quad, -HALF)
            assert plus != 0 and minus == pytest.approx(-plus, rel=1e-12)
            assert quad_light_shift(quad, TWO_PI * 1e6, HALF) == pytest.approx(
                quad_light_shift(quad, TWO_PI * 1e6, -HALF), rel=1e-12)


def test_5_monte_carlo_statistics():
    with criterion(5, "Monte Carlo: noiseless bias < 1e-9, binomial stderr within 10 % at M=1e4, "
                      "exponent in [-0.6, -0.4]"):
        plan, noise, _ = load_plan(data_path("plans", "ra226_ramsey.yaml"))
        noiseless = NoiseModel(projection_noise=False, decoherence_tau=math.inf, quench_rates={})
        res = run_experiment(plan, noiseless)
        assert abs(res.pnc_shift_estimate / res.expected_pnc_shift - 1) < 1e-9

        # projection noise only, M = 1e4 trials per arm, on-arm LO tracks the shift
        projection = NoiseModel(decoherence_tau=math.inf, quench_rates={})
        small = replace(plan, trials_per_block=250, blocks=20)
        assert small.trials_per_arm == 10_000
        runs = [run_experiment(replace(small, seed=s), projection) for s in range(300)]
        T = small.sequence.free_time
        per_probe = small.trials_per_arm // 2
        arm = math.sqrt((0.25 + 0.25) / per_probe) / T  # p = 1/2 on both probes, unit contrast
        oracle = math.hypot(arm, arm) / 2
        empirical = np.std([r.pnc_shift_estimate for r in runs], ddof=1)
        assert empirical == pytest.approx(oracle, rel=0.10)
        assert np.mean([r.pnc_shift_stderr for r in runs]) == pytest.approx(oracle, rel=0.10)

        rows, exponent = verify_scaling(plan, noise, [1000.0, 4000.0, 16000.0], [0.2, 0.6, 1.8])
        assert len(rows) == 9
        print(f"stderr exponent vs t*tau: {exponent:.4f}")
        assert -0.6 <= exponent <= -0.4


def test_6_position_jitter(ra226):
    from conftest import make_plan

    with criterion(6, "position jitter: deterministic 50 nm gives 7.1 %; Gaussian within 3 sigma of oracle"):
        plan = make_plan(ra226)
        bias, _ = position_jitter_bias(plan, 50e-9, deterministic=True)
        assert bias == pytest.approx(1 - math.cos(2 * math.pi * 50 / 828), rel=1e-12)
        assert round(100 * bias, 1) == 7.1
        bias, err = position_jitter_bias(plan, 50e-9)
        oracle = 1 - math.exp(-((2 * math.pi * 50 / 828) ** 2) / 2)
        assert abs(bias - oracle) < 3 * err


def test_7_common_mode_immunity():
    with criterion(7, "common-mode immunity: noiseless change exactly 0, noisy change < 3 sigma"):
        plan, noise, _ = load_plan(data_path("plans", "ra226_ramsey.yaml"))
        plan = replace(plan, trials_per_block=200, blocks=20)
        noiseless = NoiseModel(projection_noise=False, decoherence_tau=math.inf, quench_rates={})
        ref = run_experiment(plan, noiseless).pnc_shift_estimate
        for drift_hz in (1e-3, 0.5, 37.0, 1e3, -2.5e4):
            shifted = run_experiment(plan, replace(noiseless, common_mode_drift=TWO_PI * drift_hz))
            assert shifted.pnc_shift_estimate - ref == 0.0
        base = run_experiment(plan, noise)
        for drift_hz in (0.5, 37.0):
            shifted = run_experiment(plan, replace(noise, common_mode_drift=TWO_PI * drift_hz))
            assert abs(shifted.pnc_shift_estimate - base.pnc_shift_estimate) < 3 * base.pnc_shift_stderr


def test_8_reproducibility(tmp_path, capsys):
    with criterion(8, "reproducibility: byte-identical outputs across runs and worker counts"):
        plan_ref = "pkg:plans/ra226_ramsey.yaml"
        commands = [
            ["ramsey", "--plan", plan_ref, "--seed", "12345"],
            ["sweep", "--plan", plan_ref, "--axis", "coherence_tau=0.3,0.6,1.2", "--seed", "9"],
            ["budget", "--species", "pkg:species/ba138.yaml", "pkg:species/ra226.yaml"],
        ]
        for argv in commands:
            outputs = []
            for i, workers in enumerate((1, 1, 4)):
                out = tmp_path / f"{argv[0]}{i}"
                extra = ["--workers", str(workers)] if argv[0] != "budget" else []
                assert main([*argv, *extra, "--out", str(out)]) == 0
                manifest = json.loads((out / "manifest.json").read_text())
                manifest.pop("timestamp")
                outputs.append(((out / f"{argv[0]}.json").read_bytes(),
                                (out / f"{argv[0]}.csv").read_bytes(),
                                json.dumps(manifest, sort_keys=True)))
            assert outputs[0] == outputs[1] == outputs[2]
        capsys.readouterr()
