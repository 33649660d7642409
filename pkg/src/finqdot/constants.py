"""Physical constants in the unit system used throughout the package.

Lengths are nm, energies eV, potentials V, magnetic fields T, temperatures K.
Charge densities are carried in units of the elementary charge per nm^3, so
the vacuum permittivity appears as e/(V nm).
"""

from dataclasses import dataclass, field

import scipy.constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants plus the derived factors the solvers need."""

    hbar: float = _sc.hbar                        # J s
    electron_mass_m0: float = _sc.m_e             # kg
    elementary_charge: float = _sc.e              # C
    bohr_magneton_muB: float = field(default=_sc.physical_constants
                                     ["Bohr magneton in eV/T"][0])  # eV/T
    boltzmann_kB: float = field(default=_sc.k / _sc.e)              # eV/K
    vacuum_permittivity: float = _sc.epsilon_0    # F/m

    def __post_init__(self):
        for name in ("hbar", "electron_mass_m0", "elementary_charge",
                     "bohr_magneton_muB", "boltzmann_kB", "vacuum_permittivity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"constant {name} must be positive")
        derived = self.hbar / (2.0 * self.electron_mass_m0)  # eV/T since muB = hbar e / 2 m0
        if abs(derived - self.bohr_magneton_muB) > 1e-6 * self.bohr_magneton_muB:
            raise ValueError("Bohr magneton inconsistent with hbar*e/(2*m0)")

    @property
    def hbar2_over_2m0(self) -> float:
        """hbar^2/(2 m0) in eV nm^2 (about 0.0381)."""
        return self.hbar ** 2 / (2.0 * self.electron_mass_m0
                                 * self.elementary_charge) * 1e18

    @property
    def e_over_hbar(self) -> float:
        """e/hbar in 1/(T nm^2); scales the vector potential into wave numbers."""
        return self.elementary_charge / self.hbar * 1e-18

    @property
    def eps0_e_per_V_nm(self) -> float:
        """Vacuum permittivity in e/(V nm) (about 0.05526)."""
        return self.vacuum_permittivity / self.elementary_charge * 1e-9

    @property
    def planck_h_eVs(self) -> float:
        """Planck constant in eV s."""
        return 2.0 * _sc.pi * self.hbar / self.elementary_charge


CONSTANTS = PhysicalConstants()
