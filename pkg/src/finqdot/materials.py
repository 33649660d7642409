"""Material parameter records and the built-in defaults.

Elastic and thermal constants are isotropic and temperature independent.
Valence-band and magnetic parameters are only meaningful for semiconductor
records; oxide and metal rows leave them at None.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class MaterialRecord:
    name: str
    role: str                       # "semiconductor" | "oxide" | "metal"
    young_E: float                  # GPa
    thermal_alpha: float            # 1/K
    poisson_nu: float               # dimensionless
    gamma1: Optional[float] = None
    gamma2: Optional[float] = None
    gamma3: Optional[float] = None
    delta0_SO: Optional[float] = None   # eV
    kappa: Optional[float] = None
    def_pot_av: Optional[float] = None  # eV
    def_pot_b: Optional[float] = None   # eV
    def_pot_d: Optional[float] = None   # eV
    rel_permittivity: float = 1.0

    def __post_init__(self):
        if self.role not in ("semiconductor", "oxide", "metal"):
            raise ValueError(f"unknown material role {self.role!r}")
        if self.young_E <= 0:
            raise ValueError(f"{self.name}: Young modulus must be positive")
        if not 0.0 <= self.poisson_nu < 0.5:
            raise ValueError(f"{self.name}: Poisson ratio must lie in [0, 0.5)")
        if self.role == "semiconductor":
            for attr in ("gamma1", "gamma2", "gamma3", "delta0_SO", "kappa",
                         "def_pot_av", "def_pot_b", "def_pot_d"):
                value = getattr(self, attr)
                if value is None or not math.isfinite(value):
                    raise ValueError(f"{self.name}: semiconductor needs finite {attr}")
        if self.role != "metal" and self.rel_permittivity < 1.0:
            raise ValueError(f"{self.name}: relative permittivity must be >= 1")

    def with_overrides(self, **kwargs) -> "MaterialRecord":
        return replace(self, **kwargs)


# Relative permittivities are standard textbook values; they do not come from
# the thermo-mechanical parameter table.
SILICON = MaterialRecord(
    name="Si", role="semiconductor",
    young_E=169.0, thermal_alpha=2.6e-6, poisson_nu=0.27,
    gamma1=4.285, gamma2=0.339, gamma3=1.21,
    delta0_SO=0.044, kappa=-0.42,
    def_pot_av=2.46, def_pot_b=-2.35, def_pot_d=-5.32,
    rel_permittivity=11.7,
)

SILICON_DIOXIDE = MaterialRecord(
    name="SiO2", role="oxide",
    young_E=73.0, thermal_alpha=0.49e-6, poisson_nu=0.17,
    rel_permittivity=3.9,
)

TITANIUM_NITRIDE = MaterialRecord(
    name="TiN", role="metal",
    young_E=43.0, thermal_alpha=9.35e-6, poisson_nu=0.33,
    rel_permittivity=1.0,
)

DEFAULT_MATERIALS = {m.name: m for m in (SILICON, SILICON_DIOXIDE, TITANIUM_NITRIDE)}


def material_table(overrides: Optional[dict] = None) -> dict:
    """Default material set with optional per-material field overrides.

    ``overrides`` maps material name to a dict of MaterialRecord fields, e.g.
    ``{"Si": {"young_E": 130.0}}``. Unknown materials are added verbatim when
    given a complete field dict.
    """
    table = dict(DEFAULT_MATERIALS)
    for name, fields in (overrides or {}).items():
        if name in table:
            table[name] = table[name].with_overrides(**fields)
        else:
            table[name] = MaterialRecord(name=name, **fields)
    return table
