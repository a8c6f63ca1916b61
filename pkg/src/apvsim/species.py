"""Ion species records, Zeeman manifolds and angular geometry tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    check_keys,
    get_number,
    load_document,
    resolve_relative,
)

MANIFOLD_J = {
    "S1/2": Fraction(1, 2),
    "P1/2": Fraction(1, 2),
    "P3/2": Fraction(3, 2),
    "D3/2": Fraction(3, 2),
    "D5/2": Fraction(5, 2),
}
ZEEMAN_MANIFOLDS = ("S1/2", "D3/2", "D5/2")
CHARACTERS = ("pnc-dipole", "quadrupole", "cooling-dipole", "repump-dipole")
COUPLING_KINDS = ("pnc", "quad")


def half_integer(value) -> Fraction:
    """Parse ``1/2``, ``"+3/2"``, ``-0.5`` ... into an exact half-integer."""
    if isinstance(value, str):
        value = value.strip().lstrip("+")
    m = Fraction(value)
    if (2 * m).denominator != 1:
        raise ValueError(f"{value!r} is not a half-integer")
    return m


def format_m(m: Fraction) -> str:
    return f"{'+' if m >= 0 else '-'}{abs(m)}"


def sublevels(manifold: str) -> list[Fraction]:
    """Magnetic quantum numbers -J..J of ``manifold``, ascending."""
    J = MANIFOLD_J[manifold]
    return [-J + i for i in range(int(2 * J) + 1)]


@dataclass(frozen=True)
class ZeemanLevel:
    manifold: str
    m: Fraction

    def __post_init__(self):
        if self.manifold not in ZEEMAN_MANIFOLDS:
            raise ValueError(f"unknown Zeeman manifold {self.manifold!r}")
        object.__setattr__(self, "m", half_integer(self.m))
        if abs(self.m) > MANIFOLD_J[self.manifold]:
            raise ValueError(f"|m| = {abs(self.m)} exceeds J of {self.manifold}")

    @property
    def index(self) -> int:
        return sublevels(self.manifold).index(self.m)


@dataclass(frozen=True)
class Transition:
    lower: str
    upper: str
    wavelength: float  # m
    character: str

    def __post_init__(self):
        if self.character not in CHARACTERS:
            raise ValueError(f"unknown transition character {self.character!r}")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be > 0")
        for lvl in (self.lower, self.upper):
            if lvl not in MANIFOLD_J:
                raise ValueError(f"unknown manifold {lvl!r}")
        if self.character in ("pnc-dipole", "quadrupole"):
            if not (self.lower.startswith("S") and self.upper.startswith("D")):
                raise ValueError(f"{self.character} allowed only on S->D transitions")


@dataclass(frozen=True)
class GeometryFactors:
    """Angular factors g[m', m] (rows: upper sublevels, cols: ground sublevels)."""

    lower: str
    upper: str
    kind: str
    geometry: str
    g: np.ndarray

    def __post_init__(self):
        if self.kind not in COUPLING_KINDS:
            raise ValueError(f"unknown coupling kind {self.kind!r}")
        g = np.array(self.g, dtype=complex)
        shape = (len(sublevels(self.upper)), len(sublevels(self.lower)))
        if g.shape != shape:
            raise ValueError(f"geometry table shape {g.shape}, expected {shape}")
        norms = np.sum(np.abs(g) ** 2, axis=0)
        if not np.allclose(norms, 1.0, rtol=0, atol=1e-12):
            raise ValueError(f"geometry columns not normalized: {norms}")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)


def load_geometry(path: str | Path) -> GeometryFactors:
    """Read a plain-text table: ``# key: value`` header lines then numeric rows."""
    path = Path(path)
    header: dict[str, str] = {}
    rows = []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read geometry table ({exc.strerror})", source=str(path)) from exc
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                header[key.strip()] = value.strip()
            continue
        try:
            rows.append([complex(tok.replace("i", "j")) for tok in line.split()])
        except ValueError as exc:
            raise ConfigError(f"bad number on line {lineno}", source=str(path)) from exc
    for key in ("pair", "kind", "geometry"):
        if key not in header:
            raise ConfigError("missing header line", source=str(path), field=key)
    lower, _, upper = (s.strip() for s in header["pair"].partition("->"))
    try:
        return GeometryFactors(lower, upper, header["kind"], header["geometry"], np.array(rows))
    except ValueError as exc:
        raise ConfigError(str(exc), source=str(path)) from exc


def dump_geometry(table: GeometryFactors) -> str:
    lines = [
        f"# pair: {table.lower} -> {table.upper}",
        f"# kind: {table.kind}",
        f"# geometry: {table.geometry}",
        "# rows: m' = " + " ".join(format_m(m) for m in sublevels(table.upper)),
        "# cols: m = " + " ".join(format_m(m) for m in sublevels(table.lower)),
    ]
    real = bool(np.all(table.g.imag == 0))
    for row in table.g + 0.0:  # drops negative zeros
        if real:
            lines.append("  ".join(f"{float(v.real):.17g}" for v in row))
        else:
            lines.append("  ".join(f"{v.real:.17g}{v.imag:+.17g}j" for v in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Calibration:
    """Reference point at which the per-sublevel PNC shift is known."""

    manifold: str
    shift_hz: float
    e0_prime: float
    qw_over_n: float


@dataclass(frozen=True)
class IonSpecies:
    name: str
    mass: float  # u
    nuclear_spin: Fraction
    half_life: float | str  # years or "stable"
    transitions: tuple[Transition, ...]
    e1_pnc_coeff: float
    coherence_time: float
    quench_rates: dict = field(default_factory=dict)  # (manifold, m) -> 1/s
    qw_over_n: float = 0.9
    quad_scale: float = 1.0  # rad/s per V/m^2, convention-relative
    nsd_coeff: float | None = None  # S1/2-D5/2 NSD amplitude, relative units
    calibration: Calibration | None = None
    geometry: dict = field(default_factory=dict)  # (manifold, kind) -> GeometryFactors

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be > 0")
        if not self.e1_pnc_coeff > 0:
            raise ValueError("e1_pnc_coeff must be > 0")
        if not self.coherence_time > 0:
            raise ValueError("coherence_time must be > 0")
        if self.qw_over_n < 0:
            raise ValueError("qw_over_n must be >= 0")
        if self.nuclear_spin < 0 or (2 * Fraction(self.nuclear_spin)).denominator != 1:
            raise ValueError("nuclear_spin must be a half-integer >= 0")
        for (manifold, m), rate in self.quench_rates.items():
            ZeemanLevel(manifold, m)
            if rate < 0:
                raise ValueError(f"quench rate for {manifold} m={m} must be >= 0")

    def transition(self, character: str, upper: str | None = None) -> Transition:
        for tr in self.transitions:
            if tr.character == character and (upper is None or tr.upper == upper):
                return tr
        want = character + (f" to {upper}" if upper else "")
        raise SpeciesError(f"{self.name}: no {want} transition")

    def sd_wavelength(self, manifold: str = "D3/2") -> float:
        return self.transition("quadrupole", manifold).wavelength

    def geometry_for(self, manifold: str, kind: str) -> GeometryFactors:
        try:
            return self.geometry[(manifold, kind)]
        except KeyError:
            raise SpeciesError(f"{self.name}: no {kind} geometry table for {manifold}") from None

    def ground_quench_rate(self) -> float:
        """Total incoherent loss rate out of the ground manifold."""
        return sum(r for (mf, _), r in self.quench_rates.items() if mf == "S1/2")


class SpeciesError(ValueError):
    """Species lacks a transition or table needed by an operation."""


_SPECIES_KEYS = {
    "schema_version", "name", "mass", "nuclear_spin", "half_life", "transitions",
    "e1_pnc_coeff", "qw_over_n", "coherence_time", "quench_rates", "quad_scale",
    "nsd_coeff", "calibration", "geometry",
}
_REQUIRED = ("name", "mass", "nuclear_spin", "half_life", "transitions", "e1_pnc_coeff",
             "coherence_time")


def load_species(path: str | Path) -> IonSpecies:
    path = Path(path)
    src = str(path)
    doc = load_document(path, "species")
    check_keys(doc, _SPECIES_KEYS, _REQUIRED, source=src)

    transitions = []
    if not isinstance(doc["transitions"], list):
        raise ConfigError("expected a list", source=src, field="transitions")
    for i, tr in enumerate(doc["transitions"]):
        pre = f"transitions[{i}]."
        if not isinstance(tr, dict):
            raise ConfigError("expected a mapping", source=src, field=pre[:-1])
        check_keys(tr, {"lower", "upper", "wavelength_nm", "character"},
                   {"lower", "upper", "wavelength_nm", "character"}, source=src, prefix=pre)
        wl = get_number(tr, "wavelength_nm", source=src, prefix=pre, positive=True) * 1e-9
        try:
            transitions.append(Transition(str(tr["lower"]), str(tr["upper"]), wl, str(tr["character"])))
        except ValueError as exc:
            raise ConfigError(str(exc), source=src, field=pre[:-1]) from exc

    quench = {}
    for key, rate in (doc.get("quench_rates") or {}).items():
        fld = f"quench_rates.{key}"
        manifold, _, m = str(key).partition(":")
        try:
            level = ZeemanLevel(manifold.strip(), m)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad level key ({exc})", source=src, field=fld) from exc
        quench[(level.manifold, level.m)] = get_number({"r": rate}, "r", source=src, nonneg=True)

    calibration = None
    if "calibration" in doc:
        cal = doc["calibration"]
        pre = "calibration."
        check_keys(cal, {"manifold", "shift_hz", "e0_prime", "qw_over_n"},
                   {"manifold", "shift_hz", "e0_prime", "qw_over_n"}, source=src, prefix=pre)
        calibration = Calibration(
            manifold=str(cal["manifold"]),
            shift_hz=get_number(cal, "shift_hz", source=src, prefix=pre, positive=True),
            e0_prime=get_number(cal, "e0_prime", source=src, prefix=pre, positive=True),
            qw_over_n=get_number(cal, "qw_over_n", source=src, prefix=pre, positive=True),
        )

    geometry = {}
    for manifold, kinds in (doc.get("geometry") or {}).items():
        if manifold not in ZEEMAN_MANIFOLDS or not isinstance(kinds, dict):
            raise ConfigError("bad geometry entry", source=src, field=f"geometry.{manifold}")
        for kind, ref in kinds.items():
            if kind not in COUPLING_KINDS:
                raise ConfigError("unknown coupling kind", source=src, field=f"geometry.{manifold}.{kind}")
            table = load_geometry(resolve_relative(path, str(ref)))
            if (table.lower, table.upper, table.kind) != ("S1/2", manifold, kind):
                raise ConfigError("table header does not match its slot", source=src,
                                  field=f"geometry.{manifold}.{kind}")
            geometry[(manifold, kind)] = table

    half_life = doc["half_life"]
    if half_life != "stable":
        half_life = get_number(doc, "half_life", source=src, positive=True)
    try:
        nuclear_spin = half_integer(doc["nuclear_spin"])
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc), source=src, field="nuclear_spin") from exc

    try:
        return IonSpecies(
            name=str(doc["name"]),
            mass=get_number(doc, "mass", source=src, positive=True),
            nuclear_spin=nuclear_spin,
            half_life=half_life,
            transitions=tuple(transitions),
            e1_pnc_coeff=get_number(doc, "e1_pnc_coeff", source=src, positive=True),
            coherence_time=get_number(doc, "coherence_time", source=src, positive=True),
            quench_rates=quench,
            qw_over_n=get_number(doc, "qw_over_n", source=src, default=0.9, nonneg=True),
            quad_scale=get_number(doc, "quad_scale", source=src, default=1.0, positive=True),
            nsd_coeff=(get_number(doc, "nsd_coeff", source=src, positive=True)
                       if "nsd_coeff" in doc else None),
            calibration=calibration,
            geometry=geometry,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), source=src) from exc
