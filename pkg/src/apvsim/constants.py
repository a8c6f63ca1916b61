"""Physical constants (CODATA via scipy.constants), overridable for pinning."""

from __future__ import annotations

from dataclasses import dataclass, fields

import scipy.constants as sc

ATOMIC_MASS_UNIT = sc.atomic_mass
SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = sc.hbar
    elem_charge: float = sc.e
    bohr_radius: float = sc.physical_constants["Bohr radius"][0]
    bohr_magneton: float = sc.physical_constants["Bohr magneton"][0]

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"constant {f.name} must be positive")

    @classmethod
    def from_mapping(cls, overrides: dict | None) -> "PhysicalConstants":
        overrides = dict(overrides or {})
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown constant(s): {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in overrides.items()})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


CODATA = PhysicalConstants()
