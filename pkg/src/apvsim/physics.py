"""Standing-wave fields, Zeeman coupling matrices and the PNC/quadrupole interference shift.

Frequencies are angular (rad/s) throughout; divide by 2*pi for Hz.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .species import GeometryFactors, IonSpecies, SpeciesError, format_m, half_integer, sublevels

TWO_PI = 2.0 * np.pi
ORIGIN = np.zeros(3)
X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


class NoQuadrupoleCoupling(ValueError):
    """The quadrupole column for the requested sublevel vanishes (shift formula singular)."""


@dataclass(frozen=True)
class StandingWaveField:
    """A standing wave ``phase * amplitude * trig(k s) * polarization``.

    ``trig`` is cos for antinode placement and sin for node placement; ``s`` is
    the ion coordinate along ``standing_axis`` plus ``offset``.
    """

    amplitude: float  # V/m
    wavelength: float  # m
    polarization_axis: np.ndarray
    standing_axis: np.ndarray
    placement: str = "antinode"
    offset: float = 0.0  # m
    phase: complex = 1.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be > 0")
        if self.placement not in ("antinode", "node"):
            raise ValueError(f"placement must be 'antinode' or 'node', got {self.placement!r}")
        if not np.isclose(abs(self.phase), 1.0):
            raise ValueError("phase must be a unit complex number")
        for name in ("polarization_axis", "standing_axis"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.shape != (3,) or not np.isclose(np.linalg.norm(axis), 1.0, atol=1e-12):
                raise ValueError(f"{name} must be a unit 3-vector")
            axis.setflags(write=False)
            object.__setattr__(self, name, axis)
        if abs(np.dot(self.polarization_axis, self.standing_axis)) > 1e-12:
            raise ValueError("polarization_axis must be perpendicular to standing_axis")

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength

    def coordinate(self, position):
        """Standing-axis coordinate of one position (3,) or many (n, 3)."""
        s = np.asarray(position, dtype=float) @ self.standing_axis + self.offset
        return float(s) if np.ndim(s) == 0 else s

    def shifted(self, displacement: float) -> "StandingWaveField":
        return replace(self, offset=self.offset + displacement)

    def scaled(self, amplitude: float) -> "StandingWaveField":
        return replace(self, amplitude=amplitude)


def field_amplitude_at(field: StandingWaveField, position=ORIGIN) -> np.ndarray:
    """Complex field vector at ``position``; shape (3,) or (n, 3) for stacked positions."""
    ks = field.k * field.coordinate(position)
    trig = np.cos(ks) if field.placement == "antinode" else np.sin(ks)
    return field.phase * field.amplitude * np.multiply.outer(trig, field.polarization_axis)


def field_gradient_at(field: StandingWaveField, position=ORIGIN):
    """d(E . polarization)/d(standing coordinate); E0 k cos(k s) for node placement."""
    ks = field.k * field.coordinate(position)
    deriv = np.cos(ks) if field.placement == "node" else -np.sin(ks)
    value = field.phase * field.amplitude * field.k * deriv
    if np.ndim(value):
        return value
    return float(np.real(value)) if np.imag(value) == 0 else complex(value)


def crossed_fields(species: IonSpecies, e0_prime: float, e0_double_prime: float,
                manifold: str = "D3/2") -> tuple[StandingWaveField, StandingWaveField]:
    """Crossed pair: E' along x standing on z (antinode), E'' = i z-polarized standing on x (node)."""
    wl = species.sd_wavelength(manifold)
    e_prime = StandingWaveField(e0_prime, wl, X_AXIS, Z_AXIS, "antinode")
    e_dprime = StandingWaveField(e0_double_prime, wl, Z_AXIS, X_AXIS, "node", phase=1j)
    return e_prime, e_dprime


@dataclass(frozen=True)
class CouplingMatrix:
    """Complex Rabi frequencies (rad/s), rows m' of ``upper``, columns m of ``lower``."""

    entries: np.ndarray
    kind: str
    lower: str = "S1/2"
    upper: str = "D3/2"

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        shape = (len(sublevels(self.upper)), len(sublevels(self.lower)))
        if entries.shape != shape:
            raise ValueError(f"coupling matrix shape {entries.shape}, expected {shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def column(self, m) -> np.ndarray:
        return self.entries[:, sublevels(self.lower).index(half_integer(m))]


def _check_geometry(species: IonSpecies, geometry: GeometryFactors, kind: str, character: str):
    if geometry.kind != kind:
        raise ValueError(f"expected a {kind} geometry table, got {geometry.kind}")
    species.transition(character, geometry.upper)


def pnc_rabi_matrix(species: IonSpecies, field: StandingWaveField, geometry: GeometryFactors,
                    pnc_scale: float, position=ORIGIN) -> CouplingMatrix:
    """PNC-induced E1 couplings; the factor i is the phase of the PNC amplitude."""
    if field.placement != "antinode":
        raise ValueError("PNC coupling requires an antinode-placed field")
    _check_geometry(species, geometry, "pnc", "pnc-dipole")
    e_mag = np.linalg.norm(field_amplitude_at(field, position))
    return CouplingMatrix(1j * pnc_scale * e_mag * geometry.g, "pnc", geometry.lower, geometry.upper)


def quad_rabi_matrix(species: IonSpecies, field: StandingWaveField, geometry: GeometryFactors,
                     quad_scale: float | None = None, position=ORIGIN) -> CouplingMatrix:
    if field.placement != "node":
        raise ValueError("quadrupole coupling requires a node-placed field")
    _check_geometry(species, geometry, "quad", "quadrupole")
    if quad_scale is None:
        quad_scale = species.quad_scale
    grad = field_gradient_at(field, position)
    return CouplingMatrix(quad_scale * grad * geometry.g, "quad", geometry.lower, geometry.upper)


def pnc_light_shift(pnc: CouplingMatrix, quad: CouplingMatrix, m) -> float:
    """Interference shift of ground sublevel m: -Re sum_m' conj(pnc) quad / |quad column|."""
    if pnc.entries.shape != quad.entries.shape or (pnc.lower, pnc.upper) != (quad.lower, quad.upper):
        raise ValueError("PNC and quadrupole matrices must share index ranges")
    p, q = pnc.column(m), quad.column(m)
    norm = np.sqrt(np.sum(np.abs(q) ** 2))
    if norm == 0:
        raise NoQuadrupoleCoupling(f"no quadrupole coupling for m = {format_m(half_integer(m))}")
    return float(-np.real(np.vdot(p, q)) / norm)


def quad_light_shift(quad: CouplingMatrix, detuning: float, m) -> float:
    """Second-order shift sum_m' |Omega|^2 / (4 detuning) of ground sublevel m."""
    if detuning == 0:
        raise ValueError("quadrupole light shift is singular at zero detuning")
    q = quad.column(m)
    return float(np.sum(np.abs(q) ** 2) / (4.0 * detuning))


def calibrate_pnc_scale(species: IonSpecies, E0_prime: float, target_shift: float,
                        quad: CouplingMatrix, geometry: GeometryFactors, m=Fraction(1, 2)) -> float:
    """PNC scale (rad/s per V/m) at which sublevel m shifts by ``target_shift`` at field E0'.

    The shift is linear in the PNC matrix, so this is one division.
    """
    if not target_shift > 0:
        raise ValueError("target_shift must be > 0")
    if not E0_prime > 0:
        raise ValueError("E0_prime must be > 0")
    field = StandingWaveField(E0_prime, species.sd_wavelength(geometry.upper), X_AXIS, Z_AXIS)
    unit = pnc_light_shift(pnc_rabi_matrix(species, field, geometry, 1.0), quad, m)
    if unit == 0:
        raise NoQuadrupoleCoupling("geometry gives no PNC/quadrupole interference")
    return target_shift / unit


def larmor_splitting(zeeman_splitting: float, pnc_shift_plus: float, pnc_shift_minus: float,
                     common_mode: float = 0.0) -> float:
    """Ground-state splitting E(+1/2) - E(-1/2).

    ``common_mode`` shifts both sublevels equally and therefore never enters.
    """
    if not zeeman_splitting > 0:
        raise ValueError("zeeman_splitting must be > 0")
    del common_mode
    return zeeman_splitting + pnc_shift_plus - pnc_shift_minus


def species_pnc_scale(species: IonSpecies, e0_double_prime: float) -> float:
    """Calibrated PNC scale from the species reference point, rescaled to its Q_W/N."""
    cal = species.calibration
    if cal is None:
        raise SpeciesError(f"{species.name}: no calibration reference")
    _, e_dprime = crossed_fields(species, cal.e0_prime, e0_double_prime, cal.manifold)
    quad = quad_rabi_matrix(species, e_dprime, species.geometry_for(cal.manifold, "quad"))
    scale = calibrate_pnc_scale(species, cal.e0_prime, TWO_PI * cal.shift_hz, quad,
                                species.geometry_for(cal.manifold, "pnc"))
    return scale * species.qw_over_n / cal.qw_over_n


@dataclass(frozen=True)
class LightShifts:
    """Per-sublevel shifts (rad/s) of the ground manifold for one field configuration."""

    pnc: dict  # m -> rad/s
    quad: dict  # m -> rad/s, None when no detuning given
    larmor_change: float  # rad/s

    def as_hz(self) -> dict:
        return {
            "pnc_shift_hz": {format_m(m): v / TWO_PI for m, v in self.pnc.items()},
            "quad_shift_hz": {format_m(m): (None if v is None else v / TWO_PI) for m, v in self.quad.items()},
            "larmor_change_hz": self.larmor_change / TWO_PI,
        }


def light_shifts(species: IonSpecies, e_prime: StandingWaveField, e_dprime: StandingWaveField,
                 pnc_scale: float, manifold: str = "D3/2", position=ORIGIN,
                 quad_detuning: float | None = None) -> LightShifts:
    pnc = pnc_rabi_matrix(species, e_prime, species.geometry_for(manifold, "pnc"), pnc_scale, position)
    quad = quad_rabi_matrix(species, e_dprime, species.geometry_for(manifold, "quad"), position=position)
    ms = sublevels("S1/2")
    pnc_shift = {m: pnc_light_shift(pnc, quad, m) for m in ms}
    quad_shift = {m: (None if quad_detuning is None else quad_light_shift(quad, quad_detuning, m))
                  for m in ms}
    half = Fraction(1, 2)
    return LightShifts(pnc_shift, quad_shift, pnc_shift[half] - pnc_shift[-half])


def nsd_pnc_scale(species: IonSpecies, unit_scale: float) -> float:
    """D5/2 PNC scale: species NSD amplitude times a common reference scale."""
    if species.nsd_coeff is None:
        raise SpeciesError(f"{species.name}: no nuclear-spin-dependent amplitude")
    return species.nsd_coeff * unit_scale
