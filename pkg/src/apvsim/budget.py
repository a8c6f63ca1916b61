"""Statistical and positioning-systematic uncertainty budget for the PNC amplitude."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .config import ConfigError, check_keys, get_number, load_document
from .constants import CODATA, PhysicalConstants
from .physics import (
    TWO_PI,
    crossed_fields,
    pnc_light_shift,
    pnc_rabi_matrix,
    quad_rabi_matrix,
    species_pnc_scale,
)
from .species import IonSpecies

E1_PNC_UNIT = 1e-11  # multiplies i e a0 (-Q_W/N)


@dataclass(frozen=True)
class BudgetInputs:
    e0_prime: float  # V/m
    efficiency_f: float
    n_ions: int
    obs_time_t: float  # s
    coherence_tau: float  # s
    lamb_dicke_extent: float  # m

    def __post_init__(self):
        for name in ("e0_prime", "obs_time_t", "coherence_tau", "lamb_dicke_extent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 < self.efficiency_f <= 1:
            raise ValueError("efficiency_f must be in (0, 1]")
        if int(self.n_ions) != self.n_ions or self.n_ions < 1:
            raise ValueError("n_ions must be an integer >= 1")


@dataclass(frozen=True)
class Scenario:
    """Experiment-wide settings; the coherence time comes from each species."""

    e0_prime: float
    e0_double_prime: float
    efficiency_f: float
    n_ions: int
    obs_time_t: float
    lamb_dicke_extent: float
    qw_over_n: float
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def inputs_for(self, species: IonSpecies) -> BudgetInputs:
        return BudgetInputs(self.e0_prime, self.efficiency_f, self.n_ions, self.obs_time_t,
                            species.coherence_time, self.lamb_dicke_extent)

    def apply(self, species: IonSpecies) -> IonSpecies:
        return replace(species, qw_over_n=self.qw_over_n)

    def snapshot(self) -> dict:
        d = asdict(self)
        d["constants"] = self.constants.as_dict()
        return d


_SCENARIO_KEYS = ("e0_prime", "e0_double_prime", "efficiency_f", "n_ions", "obs_time_t",
                  "lamb_dicke_extent", "qw_over_n")


def scenario_from_mapping(doc: dict, source: str | None = None) -> Scenario:
    check_keys(doc, set(_SCENARIO_KEYS) | {"schema_version", "constants"}, _SCENARIO_KEYS,
               source=source)
    vals = {k: get_number(doc, k, source=source) for k in _SCENARIO_KEYS}
    try:
        constants = PhysicalConstants.from_mapping(doc.get("constants"))
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc), source=source, field="constants") from exc
    try:
        BudgetInputs(vals["e0_prime"], vals["efficiency_f"], vals["n_ions"], vals["obs_time_t"],
                     1.0, vals["lamb_dicke_extent"])
    except ValueError as exc:
        name = str(exc).split()[0]
        raise ConfigError(str(exc), source=source, field=name if name in vals else None) from exc
    if not vals["e0_double_prime"] > 0:
        raise ConfigError("must be > 0", source=source, field="e0_double_prime")
    if vals["qw_over_n"] < 0:
        raise ConfigError("must be >= 0", source=source, field="qw_over_n")
    vals["n_ions"] = int(vals["n_ions"])
    return Scenario(**vals, constants=constants)


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_mapping(load_document(path, "scenario"), str(path))


def e1_pnc_si(species: IonSpecies, constants: PhysicalConstants = CODATA) -> float:
    """|E1_PNC| in C m (the i is a phase convention)."""
    return (species.e1_pnc_coeff * E1_PNC_UNIT * species.qw_over_n
            * constants.elem_charge * constants.bohr_radius)


def statistical_uncertainty(inputs: BudgetInputs, constants: PhysicalConstants = CODATA) -> float:
    """Shot-noise-limited uncertainty on E1_PNC (C m): hbar / (E0' f sqrt(N t tau))."""
    return constants.hbar / (
        inputs.e0_prime * inputs.efficiency_f
        * math.sqrt(inputs.n_ions * inputs.obs_time_t * inputs.coherence_tau)
    )


def antinode_amplitude_error(wavelength: float, lamb_dicke_extent: float) -> float:
    """Fractional loss of E' for an ion displaced by the confinement extent from an antinode."""
    return 1.0 - math.cos(TWO_PI / wavelength * lamb_dicke_extent)


def node_amplitude_error(wavelength: float, lamb_dicke_extent: float) -> float:
    """Fractional E'' picked up by an ion displaced by the confinement extent from a node."""
    return math.sin(TWO_PI / wavelength * lamb_dicke_extent)


def lamb_dicke_mass_scaling(ref_extent: float, ref_mass: float, new_mass: float) -> float:
    if not (ref_mass > 0 and new_mass > 0):
        raise ValueError("masses must be > 0")
    return ref_extent * math.sqrt(ref_mass / new_mass)


@dataclass(frozen=True)
class BudgetReport:
    species: str
    wavelength: float  # m, S-D transition used
    lamb_dicke_extent: float  # m
    e1_pnc_si: float
    delta_e1_si: float
    statistical_fraction: float  # inf when the amplitude vanishes
    antinode_error_fraction: float
    node_error_fraction: float
    pnc_shift_hz: float
    measurable: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        if not math.isfinite(d["statistical_fraction"]):
            d["statistical_fraction"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BudgetReport":
        d = dict(d)
        if d["statistical_fraction"] is None:
            d["statistical_fraction"] = math.inf
        return cls(**d)


def full_budget(species: IonSpecies, inputs: BudgetInputs, constants: PhysicalConstants = CODATA,
                manifold: str = "D3/2", e0_double_prime: float | None = None) -> BudgetReport:
    wavelength = species.sd_wavelength(manifold)
    amplitude = e1_pnc_si(species, constants)
    delta = statistical_uncertainty(inputs, constants)
    measurable = amplitude > 0
    if measurable:
        e_prime, e_dprime = crossed_fields(species, inputs.e0_prime,
                                        e0_double_prime or inputs.e0_prime, manifold)
        scale = species_pnc_scale(species, e_dprime.amplitude)
        pnc = pnc_rabi_matrix(species, e_prime, species.geometry_for(manifold, "pnc"), scale)
        quad = quad_rabi_matrix(species, e_dprime, species.geometry_for(manifold, "quad"))
        shift_hz = pnc_light_shift(pnc, quad, Fraction(1, 2)) / TWO_PI
    else:
        shift_hz = 0.0
    return BudgetReport(
        species=species.name,
        wavelength=wavelength,
        lamb_dicke_extent=inputs.lamb_dicke_extent,
        e1_pnc_si=amplitude,
        delta_e1_si=delta,
        statistical_fraction=delta / amplitude if measurable else math.inf,
        antinode_error_fraction=antinode_amplitude_error(wavelength, inputs.lamb_dicke_extent),
        node_error_fraction=node_amplitude_error(wavelength, inputs.lamb_dicke_extent),
        pnc_shift_hz=shift_hz,
        measurable=measurable,
    )


def _sig2(x: float, scale: float = 1.0, suffix: str = "") -> str:
    if not math.isfinite(x):
        return "not measurable"
    return f"{x * scale:.2g}{suffix}"


def format_table(reports: list[BudgetReport]) -> str:
    """Aligned text table, two significant figures per entry."""
    rows = [
        ("species", lambda r: r.species),
        ("S-D wavelength (nm)", lambda r: f"{r.wavelength * 1e9:g}"),
        ("E1_PNC (C m)", lambda r: f"{r.e1_pnc_si:.3g}"),
        ("PNC light-shift (Hz)", lambda r: _sig2(r.pnc_shift_hz)),
        ("statistical dE1/E1", lambda r: _sig2(r.statistical_fraction, 100, " %")),
        ("systematic from E'", lambda r: _sig2(r.antinode_error_fraction, 100, " %")),
        ("systematic from E''", lambda r: _sig2(r.node_error_fraction, 100, " %")),
    ]
    cells = [[label] + [fmt(r) for r in reports] for label, fmt in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cells[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
