"""Physical constant sets for the different unit systems used by the package.

Grid simulations run in natural units (hbar = m = 1) to keep FFT inputs at
O(1) float scales; the closed-form atom model runs in SI. Conversion happens
only at I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """A self-consistent set of physical constants.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant (J s in SI mode, 1 in natural mode).
    h_planck : float
        Planck constant; must equal 2*pi*hbar.
    electron_mass : float
        Particle mass scale (kg).
    elementary_charge : float
        Elementary charge (C).
    epsilon0 : float
        Vacuum permittivity (F/m).
    speed_of_light : float
        Speed of light (m/s).
    joule_per_ev : float
        Energy conversion factor (J per eV).
    """

    hbar: float
    h_planck: float
    electron_mass: float
    elementary_charge: float
    epsilon0: float
    speed_of_light: float
    joule_per_ev: float

    def __post_init__(self):
        for name in (
            "hbar",
            "h_planck",
            "electron_mass",
            "elementary_charge",
            "epsilon0",
            "speed_of_light",
            "joule_per_ev",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"constant {name} must be finite and positive, got {value}")
        if abs(self.h_planck - 2 * math.pi * self.hbar) > 1e-12 * self.h_planck:
            raise ValueError("h_planck must equal 2*pi*hbar")


def si_constants() -> PhysicalConstants:
    """CODATA 2018 values (h exact by SI definition, hbar derived)."""
    h = 6.62607015e-34
    return PhysicalConstants(
        hbar=h / (2 * math.pi),
        h_planck=h,
        electron_mass=9.1093837015e-31,
        elementary_charge=1.602176634e-19,
        epsilon0=8.8541878128e-12,
        speed_of_light=299792458.0,
        joule_per_ev=1.602176634e-19,
    )


def paper_constants() -> PhysicalConstants:
    """Rounded constants matching published 3-digit inputs (e.g. 1.6e-19 J/eV).

    Used by the atom model's reproduction mode, where the published transition
    digits depend on these rounded values rather than on full CODATA precision.
    """
    h = 6.626e-34
    return PhysicalConstants(
        hbar=h / (2 * math.pi),
        h_planck=h,
        electron_mass=9.109e-31,
        elementary_charge=1.6e-19,
        epsilon0=8.85e-12,
        speed_of_light=3.0e8,
        joule_per_ev=1.6e-19,
    )


def natural_constants() -> PhysicalConstants:
    """Hartree-like natural units: hbar = m = e = 1 and 4*pi*epsilon0 = 1."""
    return PhysicalConstants(
        hbar=1.0,
        h_planck=2 * math.pi,
        electron_mass=1.0,
        elementary_charge=1.0,
        epsilon0=1.0 / (4 * math.pi),
        speed_of_light=137.035999084,  # atomic-units value; unused in grid work
        joule_per_ev=1.0,
    )
