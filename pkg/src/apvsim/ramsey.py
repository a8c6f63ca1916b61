"""Monte Carlo of the lasers-on / lasers-off Ramsey measurement of the ground Larmor splitting.

Each arm is probed at two local-oscillator settings a quarter fringe either
side of its reference, ``p(+/-) = (1 +/- C sin(delta T)) / 2``, and the
detuning is recovered per block as ``arcsin((p+ - p-) / C) / T``.
Trial ``i`` of an arm uses probe ``+`` for even ``i`` and ``-`` for odd ``i``;
block ``b`` owns trials ``2 b n .. 2 (b + 1) n - 1`` with ``n = trials_per_block``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import rng
from .budget import e1_pnc_si, scenario_from_mapping
from .config import ConfigError, check_keys, get_number, load_document, resolve_relative
from .constants import CODATA, PhysicalConstants
from .physics import (
    TWO_PI,
    StandingWaveField,
    field_amplitude_at,
    field_gradient_at,
    crossed_fields,
    larmor_splitting,
    light_shifts,
    pnc_light_shift,
    pnc_rabi_matrix,
    quad_light_shift,
    quad_rabi_matrix,
    species_pnc_scale,
)
from .species import IonSpecies, load_species

HALF = Fraction(1, 2)


class EstimatorError(RuntimeError):
    """No block of an arm produced an invertible fringe reading."""


@dataclass(frozen=True)
class RamseySequence:
    free_time: float  # s
    phase_reference: float  # rad/s, LO frequency of the lasers-off arm
    contrast: float = 1.0
    on_offset: float | None = None  # rad/s, LO step for the lasers-on arm; None tracks the prediction

    def __post_init__(self):
        if not self.free_time > 0:
            raise ValueError("free_time must be > 0")
        if not 0 < self.contrast <= 1:
            raise ValueError("contrast must be in (0, 1]")

    @property
    def quadrature(self) -> float:
        """LO step that puts each probe a quarter fringe off resonance."""
        return math.pi / (2.0 * self.free_time)


@dataclass(frozen=True)
class NoiseModel:
    b_field_sigma: float = 0.0  # rad/s, white per-trial Larmor offset
    position_sigma: float = 0.0  # m, per-trial displacement along each standing axis
    decoherence_tau: float | None = None  # s; None uses the species coherence time
    quench_rates: dict | None = None  # None uses the species rates
    common_mode_drift: float = 0.0  # rad/s, equal shift of both ground sublevels
    b_field_drift: float = 0.0  # rad/s per block-slot, slow linear Larmor drift
    projection_noise: bool = True

    def __post_init__(self):
        for name in ("b_field_sigma", "position_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.decoherence_tau is not None and not self.decoherence_tau > 0:
            raise ValueError("decoherence_tau must be > 0")
        for rate in (self.quench_rates or {}).values():
            if rate < 0:
                raise ValueError("quench rates must be >= 0")

    @property
    def noiseless(self) -> bool:
        return (not self.projection_noise and self.b_field_sigma == 0
                and self.position_sigma == 0 and self.b_field_drift == 0)


@dataclass(frozen=True)
class ExperimentPlan:
    species: IonSpecies
    e_prime: StandingWaveField
    e_dprime: StandingWaveField
    sequence: RamseySequence
    trials_per_block: int
    blocks: int
    zeeman_splitting: float  # rad/s
    interleave: bool = True
    seed: int = 0
    manifold: str = "D3/2"
    pnc_scale: float | None = None  # None: species calibration
    quad_detuning: float = TWO_PI * 1e6  # rad/s

    def __post_init__(self):
        if self.trials_per_block < 1:
            raise ValueError("trials_per_block must be >= 1")
        if self.blocks < 1:
            raise ValueError("blocks must be >= 1")
        if not self.zeeman_splitting > 0:
            raise ValueError("zeeman_splitting must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.quad_detuning == 0:
            raise ValueError("quad_detuning must be nonzero")
        if self.pnc_scale is None:
            object.__setattr__(self, "pnc_scale", species_pnc_scale(self.species, self.e_dprime.amplitude))

    @property
    def trials_per_arm(self) -> int:
        return 2 * self.trials_per_block * self.blocks

    def predicted_shifts(self):
        return light_shifts(self.species, self.e_prime, self.e_dprime, self.pnc_scale,
                            self.manifold, quad_detuning=self.quad_detuning)

    def lo_frequency(self, lasers_on: bool) -> float:
        lo = self.sequence.phase_reference
        if lasers_on:
            offset = self.sequence.on_offset
            lo += self.predicted_shifts().larmor_change if offset is None else offset
        return lo

    def time_slot(self, block: int, lasers_on: bool) -> int:
        """Position of an arm's block in the acquisition order."""
        if self.interleave:
            return 2 * block + int(lasers_on)
        return block + int(lasers_on) * self.blocks


@dataclass(frozen=True)
class EstimatorResult:
    freq_on: float
    freq_on_stderr: float
    freq_off: float
    freq_off_stderr: float
    larmor_shift: float  # freq_on - freq_off
    larmor_shift_stderr: float
    pnc_shift_estimate: float  # per-sublevel shift, half the Larmor change
    pnc_shift_stderr: float
    trials_used: int
    blocks_discarded: int
    seed: int
    expected_pnc_shift: float
    block_records: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "block_records"}
        d["schema_version"] = 1
        d["pnc_shift_estimate_hz"] = self.pnc_shift_estimate / TWO_PI
        d["pnc_shift_stderr_hz"] = self.pnc_shift_stderr / TWO_PI
        return d


def ramsey_probability(true_freq, sequence: RamseySequence, decoherence_tau: float,
                       lo_frequency=None):
    """Bright-state probability after two pi/2 pulses separated by ``free_time``."""
    lo = sequence.phase_reference if lo_frequency is None else lo_frequency
    T = sequence.free_time
    decay = math.exp(-T / decoherence_tau) if math.isfinite(decoherence_tau) else 1.0
    p = 0.5 * (1.0 + sequence.contrast * decay * np.cos((np.asarray(true_freq) - lo) * T))
    p = np.clip(p, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def effective_tau(plan: ExperimentPlan, noise: NoiseModel) -> float:
    """Coherence time including ground-state quenching as extra loss."""
    tau = plan.species.coherence_time if noise.decoherence_tau is None else noise.decoherence_tau
    rates = plan.species.quench_rates if noise.quench_rates is None else noise.quench_rates
    gamma = 1.0 / tau + sum(r for (mf, _), r in rates.items() if mf == "S1/2")
    return 1.0 / gamma if gamma > 0 else math.inf


def fringe_contrast(plan: ExperimentPlan, noise: NoiseModel) -> float:
    tau = effective_tau(plan, noise)
    decay = math.exp(-plan.sequence.free_time / tau) if math.isfinite(tau) else 1.0
    return plan.sequence.contrast * decay


def _larmor_frequencies(plan: ExperimentPlan, noise: NoiseModel, u: np.ndarray, lasers_on: bool,
                        slots: np.ndarray) -> np.ndarray:
    """Per-trial Larmor frequency; columns 1..3 of ``u`` drive the B-field and position noise."""
    z = rng.normals(u[:, 1:4])
    if lasers_on:
        # displacement along each beam's standing axis
        pos1 = np.multiply.outer(noise.position_sigma * z[:, 1], plan.e_prime.standing_axis)
        pos2 = np.multiply.outer(noise.position_sigma * z[:, 2], plan.e_dprime.standing_axis)
        e_mag = np.linalg.norm(field_amplitude_at(plan.e_prime, pos1), axis=1)
        grad = field_gradient_at(plan.e_dprime, pos2)
        unit_e = replace(plan.e_prime, amplitude=1.0, offset=0.0)
        pnc_unit = pnc_rabi_matrix(plan.species, unit_e, plan.species.geometry_for(plan.manifold, "pnc"),
                                   plan.pnc_scale)
        quad_ideal = quad_rabi_matrix(plan.species, plan.e_dprime,
                                      plan.species.geometry_for(plan.manifold, "quad"))
        g0 = field_gradient_at(plan.e_dprime)
        # the shift is linear in |E'| and depends on the quadrupole matrix only through its phase
        phase = np.sign(np.real(grad / g0))
        plus = pnc_light_shift(pnc_unit, quad_ideal, HALF) * e_mag * phase
        minus = pnc_light_shift(pnc_unit, quad_ideal, -HALF) * e_mag * phase
        common = noise.common_mode_drift + quad_light_shift(quad_ideal, plan.quad_detuning, HALF) * (
            np.abs(grad / g0) ** 2)
        freq = larmor_splitting(plan.zeeman_splitting, plus, minus, common)
    else:
        freq = np.full(len(u), larmor_splitting(plan.zeeman_splitting, 0.0, 0.0, noise.common_mode_drift))
    return freq + noise.b_field_sigma * z[:, 0] + noise.b_field_drift * slots


def simulate_trial(plan: ExperimentPlan, noise: NoiseModel, trial_index: int, lasers_on: bool):
    """One shot; the result depends only on (seed, trial_index, lasers_on).

    Returns a 0/1 bit, or the bright probability itself when projection noise is off.
    This path recomputes the couplings through the full matrix calculation and
    serves as a reference for the vectorized block path.
    """
    stream = rng.STREAM_ON if lasers_on else rng.STREAM_OFF
    u = rng.trial_uniforms(plan.seed, stream, trial_index, 1)[0]
    z = rng.normals(u[1:4])
    block = trial_index // (2 * plan.trials_per_block)
    freq = plan.zeeman_splitting
    if lasers_on:
        species, manifold = plan.species, plan.manifold
        e_prime = plan.e_prime.shifted(noise.position_sigma * z[1])
        e_dprime = plan.e_dprime.shifted(noise.position_sigma * z[2])
        pnc = pnc_rabi_matrix(species, e_prime, species.geometry_for(manifold, "pnc"), plan.pnc_scale)
        quad = quad_rabi_matrix(species, e_dprime, species.geometry_for(manifold, "quad"))
        common = noise.common_mode_drift + quad_light_shift(quad, plan.quad_detuning, HALF)
        freq = larmor_splitting(freq, pnc_light_shift(pnc, quad, HALF),
                                pnc_light_shift(pnc, quad, -HALF), common)
    freq += noise.b_field_sigma * z[0] + noise.b_field_drift * plan.time_slot(block, lasers_on)
    sign = 1.0 if trial_index % 2 == 0 else -1.0
    lo = plan.lo_frequency(lasers_on) + sign * plan.sequence.quadrature
    p = ramsey_probability(freq, plan.sequence, effective_tau(plan, noise), lo)
    if not noise.projection_noise:
        return p
    return int(u[0] < p)


def _arm_blocks(plan: ExperimentPlan, noise: NoiseModel, lasers_on: bool,
                block_range: tuple[int, int]) -> np.ndarray:
    """Bright sums per block and probe, shape (n_blocks, 2) ordered (+, -)."""
    b0, b1 = block_range
    n = plan.trials_per_block
    stream = rng.STREAM_ON if lasers_on else rng.STREAM_OFF
    u = rng.trial_uniforms(plan.seed, stream, 2 * n * b0, 2 * n * (b1 - b0))
    slots = np.array([plan.time_slot(b, lasers_on) for b in range(b0, b1)]).repeat(2 * n)
    freq = _larmor_frequencies(plan, noise, u, lasers_on, slots)
    sign = np.where(np.arange(len(u)) % 2 == 0, 1.0, -1.0)
    lo = plan.lo_frequency(lasers_on) + sign * plan.sequence.quadrature
    p = ramsey_probability(freq, plan.sequence, effective_tau(plan, noise), lo)
    outcome = (u[:, 0] < p).astype(np.int64) if noise.projection_noise else p
    return outcome.reshape(b1 - b0, n, 2).sum(axis=1)


def _chunk_worker(args):
    plan, noise, chunk = args
    return _arm_blocks(plan, noise, False, chunk), _arm_blocks(plan, noise, True, chunk)


def _chunks(blocks: int, workers: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, blocks, min(workers, blocks) + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def collect_counts(plan: ExperimentPlan, noise: NoiseModel, workers: int = 1):
    """Per-block bright sums for both arms; identical for any worker count."""
    chunks = _chunks(plan.blocks, max(1, workers))
    jobs = [(plan, noise, c) for c in chunks]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_worker, jobs))
    else:
        parts = [_chunk_worker(j) for j in jobs]
    off = np.concatenate([p[0] for p in parts])
    on = np.concatenate([p[1] for p in parts])
    return off, on


def _invert(counts: np.ndarray, n: int, contrast: float, T: float):
    """Per-block detuning estimates and validity mask from (+, -) bright sums."""
    p = counts / n
    ratio = (p[:, 0] - p[:, 1]) / contrast
    valid = np.abs(ratio) < 1.0
    delta = np.where(valid, np.arcsin(np.clip(ratio, -1, 1)) / T, np.nan)
    return p, delta, valid


def _arm_estimate(p, delta, valid, n, contrast, T, lo, noise):
    good = delta[valid]
    if good.size == 0:
        raise EstimatorError("estimator out of range: no invertible block")
    freq = lo + float(np.mean(good))
    if good.size >= 2 and not noise.noiseless:
        stderr = float(np.std(good, ddof=1) / math.sqrt(good.size))
    else:
        # binomial propagation through the fringe slope from the pooled probabilities
        pm = p[valid].mean(axis=0)
        m = n * good.size
        slope = contrast * T * math.cos(float(np.mean(good)) * T)
        var = (pm[0] * (1 - pm[0]) + pm[1] * (1 - pm[1])) / m if noise.projection_noise else 0.0
        stderr = math.sqrt(var) / abs(slope)
    return freq, stderr


def run_experiment(plan: ExperimentPlan, noise: NoiseModel, workers: int = 1) -> EstimatorResult:
    n, T = plan.trials_per_block, plan.sequence.free_time
    contrast = fringe_contrast(plan, noise)
    off_counts, on_counts = collect_counts(plan, noise, workers)
    arms = {}
    records = []
    discarded = 0
    used = 0
    for lasers_on, counts in ((False, off_counts), (True, on_counts)):
        lo = plan.lo_frequency(lasers_on)
        p, delta, valid = _invert(counts, n, contrast, T)
        discarded += int(np.count_nonzero(~valid))
        used += 2 * n * int(np.count_nonzero(valid))
        arms[lasers_on] = _arm_estimate(p, delta, valid, n, contrast, T, lo, noise)
        for b in range(plan.blocks):
            records.append({
                "block": b,
                "lasers_on": int(lasers_on),
                "time_slot": plan.time_slot(b, lasers_on),
                "bright_plus": float(counts[b, 0]),
                "bright_minus": float(counts[b, 1]),
                "p_plus": float(p[b, 0]),
                "p_minus": float(p[b, 1]),
                "freq_estimate": float(lo + delta[b]) if valid[b] else None,
                "valid": int(valid[b]),
            })
    (f_off, s_off), (f_on, s_on) = arms[False], arms[True]
    shift = f_on - f_off
    shift_err = math.hypot(s_on, s_off)
    records.sort(key=lambda r: r["time_slot"])
    return EstimatorResult(
        freq_on=f_on,
        freq_on_stderr=s_on,
        freq_off=f_off,
        freq_off_stderr=s_off,
        larmor_shift=shift,
        larmor_shift_stderr=shift_err,
        pnc_shift_estimate=shift / 2.0,
        pnc_shift_stderr=shift_err / 2.0,
        trials_used=used,
        blocks_discarded=discarded,
        seed=plan.seed,
        expected_pnc_shift=plan.predicted_shifts().pnc[HALF],
        block_records=tuple(records),
    )


def effective_efficiency(result: EstimatorResult, plan: ExperimentPlan,
                         constants: PhysicalConstants = CODATA) -> float:
    """Efficiency factor f that the shot-noise formula would need to match this run.

    Observation time is the total free-evolution time spent with the lasers on.
    """
    if result.pnc_shift_stderr <= 0 or result.expected_pnc_shift == 0:
        return math.inf
    amplitude = e1_pnc_si(plan.species, constants)
    delta_e1 = amplitude * result.pnc_shift_stderr / abs(result.expected_pnc_shift)
    t = result.trials_used / 2 * plan.sequence.free_time
    return constants.hbar / (plan.e_prime.amplitude * delta_e1
                             * math.sqrt(t * plan.species.coherence_time))


def position_jitter_bias(plan: ExperimentPlan, sigma: float, samples: int = 100_000,
                         deterministic: bool = False) -> tuple[float, float]:
    """Mean fractional loss of E' at displaced positions, with its Monte Carlo standard error."""
    field = plan.e_prime
    if deterministic or sigma == 0:
        shift = np.array([sigma])
    else:
        u = rng.trial_uniforms(plan.seed, rng.STREAM_JITTER, 0, samples)
        shift = sigma * rng.normals(u[:, 0])
    pos = np.multiply.outer(shift, field.standing_axis)
    ideal = np.linalg.norm(field_amplitude_at(field))
    loss = 1.0 - np.linalg.norm(field_amplitude_at(field, pos), axis=1) / ideal
    stderr = float(np.std(loss, ddof=1) / math.sqrt(loss.size)) if loss.size > 1 else 0.0
    return float(np.mean(loss)), stderr


def verify_scaling(plan: ExperimentPlan, noise: NoiseModel, obs_times, coherence_times,
                   blocks: int = 40, workers: int = 1):
    """Empirical PNC-shift stderr over a (t, tau) grid and its power-law exponent in t*tau.

    For each point the free time is tau/2 and the lasers-on arm gets ``t / (tau/2)`` shots.
    """
    obs_times, coherence_times = list(obs_times), list(coherence_times)
    if len(obs_times) < 3 or len(coherence_times) < 3:
        raise ValueError("scaling study needs at least 3 values per axis")
    rows = []
    for tau in coherence_times:
        for t in obs_times:
            T = tau / 2.0
            shots = int(round(t / T))
            per_block = shots // (2 * blocks)
            if per_block < 1:
                raise ValueError(f"t = {t} s gives no trials per block at tau = {tau} s")
            p = replace(plan, sequence=replace(plan.sequence, free_time=T), trials_per_block=per_block,
                        blocks=blocks)
            nz = replace(noise, decoherence_tau=tau, quench_rates={})
            res = run_experiment(p, nz, workers)
            rows.append({"t": t, "tau": tau, "trials": p.trials_per_arm, "free_time": T,
                         "stderr": res.pnc_shift_stderr})
    x = np.log([r["t"] * r["tau"] for r in rows])
    y = np.log([r["stderr"] for r in rows])
    exponent = float(np.polyfit(x, y, 1)[0])
    return rows, exponent


_PLAN_KEYS = {"schema_version", "species", "scenario", "manifold", "fields", "sequence",
              "zeeman_splitting_hz", "quad_detuning_hz", "trials_per_block", "blocks",
              "interleave", "seed", "noise"}
_NOISE_KEYS = {"b_field_sigma_hz", "position_sigma", "decoherence_tau", "use_quench_rates",
               "common_mode_drift_hz", "b_field_drift_hz", "projection_noise"}


def plan_from_mapping(doc: dict, source: str | Path, seed: int | None = None):
    """Build (plan, noise, snapshot) from a parsed plan document."""
    src = str(source)
    check_keys(doc, _PLAN_KEYS, ("species", "sequence", "trials_per_block", "blocks", "zeeman_splitting_hz"),
               source=src)
    if not isinstance(doc["species"], str):
        raise ConfigError("expected a file reference", source=src, field="species")
    species_path = resolve_relative(source, doc["species"])
    if not species_path.exists():
        raise ConfigError(f"species file not found: {species_path}", source=src, field="species")
    species = load_species(species_path)
    if "scenario" in doc:
        sc_path = resolve_relative(source, str(doc["scenario"]))
        scenario = scenario_from_mapping(load_document(sc_path, "scenario"), str(sc_path))
        species = scenario.apply(species)
        e0p, e0pp = scenario.e0_prime, scenario.e0_double_prime
    else:
        e0p = e0pp = None
    manifold = str(doc.get("manifold", "D3/2"))

    flds = doc.get("fields") or {}
    check_keys(flds, {"e0_prime", "e0_double_prime", "e_prime_offset", "e_double_prime_offset"},
               source=src, prefix="fields.")
    e0p = get_number(flds, "e0_prime", source=src, prefix="fields.", default=e0p, nonneg=True)
    e0pp = get_number(flds, "e0_double_prime", source=src, prefix="fields.", default=e0pp, positive=True)
    try:
        e_prime, e_dprime = crossed_fields(species, e0p, e0pp, manifold)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc), source=src, field="manifold") from exc
    e_prime = e_prime.shifted(get_number(flds, "e_prime_offset", source=src, prefix="fields.", default=0.0))
    e_dprime = e_dprime.shifted(get_number(flds, "e_double_prime_offset", source=src, prefix="fields.",
                                           default=0.0))

    seq = doc["sequence"]
    check_keys(seq, {"free_time", "phase_reference_hz", "contrast", "on_offset_hz"}, {"free_time"},
               source=src, prefix="sequence.")
    zeeman = TWO_PI * get_number(doc, "zeeman_splitting_hz", source=src, positive=True)
    ref = seq.get("phase_reference_hz")
    on_off = seq.get("on_offset_hz")
    try:
        sequence = RamseySequence(
            free_time=get_number(seq, "free_time", source=src, prefix="sequence."),
            phase_reference=zeeman if ref is None else TWO_PI * get_number(seq, "phase_reference_hz",
                                                                           source=src, prefix="sequence."),
            contrast=get_number(seq, "contrast", source=src, prefix="sequence.", default=1.0),
            on_offset=None if on_off is None else TWO_PI * get_number(seq, "on_offset_hz", source=src,
                                                                      prefix="sequence."),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), source=src, field="sequence." + str(exc).split()[0]) from exc

    nd = doc.get("noise") or {}
    check_keys(nd, _NOISE_KEYS, source=src, prefix="noise.")
    tau = nd.get("decoherence_tau")
    try:
        noise = NoiseModel(
            b_field_sigma=TWO_PI * get_number(nd, "b_field_sigma_hz", source=src, prefix="noise.",
                                              default=0.0, nonneg=True),
            position_sigma=get_number(nd, "position_sigma", source=src, prefix="noise.", default=0.0,
                                      nonneg=True),
            decoherence_tau=None if tau is None else get_number(nd, "decoherence_tau", source=src,
                                                                prefix="noise.", positive=True),
            quench_rates=None if nd.get("use_quench_rates", True) else {},
            common_mode_drift=TWO_PI * get_number(nd, "common_mode_drift_hz", source=src, prefix="noise.",
                                                  default=0.0),
            b_field_drift=TWO_PI * get_number(nd, "b_field_drift_hz", source=src, prefix="noise.",
                                              default=0.0),
            projection_noise=bool(nd.get("projection_noise", True)),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), source=src, field="noise") from exc

    if seed is None:
        seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer", source=src, field="seed")
    ints = {}
    for key in ("trials_per_block", "blocks"):
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError("must be an integer >= 1", source=src, field=key)
        ints[key] = v
    try:
        plan = ExperimentPlan(
            species=species, e_prime=e_prime, e_dprime=e_dprime, sequence=sequence,
            trials_per_block=ints["trials_per_block"], blocks=ints["blocks"], zeeman_splitting=zeeman,
            interleave=bool(doc.get("interleave", True)), seed=seed, manifold=manifold,
            quad_detuning=TWO_PI * get_number(doc, "quad_detuning_hz", source=src, default=1e6),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), source=src) from exc

    snapshot = {k: v for k, v in doc.items()}
    snapshot["seed"] = seed
    snapshot["species"] = str(species_path)
    return plan, noise, snapshot


def load_plan(path: str | Path, seed: int | None = None):
    return plan_from_mapping(load_document(path, "plan"), path, seed)
