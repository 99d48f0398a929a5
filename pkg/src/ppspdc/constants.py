"""Physical constants in the package unit system.

Lengths are in micrometres, times in picoseconds, angular frequencies in
rad/ps (numerically equal to rad*THz) and temperatures in degrees Celsius.
Wave numbers therefore come out in rad/um.
"""
from dataclasses import dataclass
import math

C_UM_PER_PS = 299.792458
HBAR_J_PS = 1.054571817e-22  # J*ps, so hbar*omega[rad/ps] is in joules
EPS0_F_PER_UM = 8.8541878128e-18


@dataclass(frozen=True)
class OpticalConstants:
    c: float = C_UM_PER_PS
    hbar: float = HBAR_J_PS
    eps0: float = EPS0_F_PER_UM
    # Pump transverse area (um^2); only ever enters as an overall prefactor.
    S: float = 1.0


DEFAULT_CONSTANTS = OpticalConstants()


def omega_from_wavelength(wavelength_um):
    return 2.0 * math.pi * C_UM_PER_PS / wavelength_um


def wavelength_from_omega(omega):
    return 2.0 * math.pi * C_UM_PER_PS / omega


def thz_to_rad_per_ps(f_thz):
    return 2.0 * math.pi * f_thz
