"""Temperature-dependent dispersion of uniaxial nonlinear crystals.

Coefficient tables live in plain-text files under ``ppspdc/data`` (format
documented in the file headers) so alternative fits can be dropped in with
``load_material(path)``.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType

import numpy as np

from .constants import C_UM_PER_PS
from .errors import ConfigError, OutOfValidityRange

ORDINARY = "ordinary"
EXTRAORDINARY = "extraordinary"
BRANCHES = (ORDINARY, EXTRAORDINARY)

_BUILTIN = {
    "LiNbO3": "linbo3_congruent.txt",
    "LiTaO3": "litao3_stoichiometric.txt",
}


@dataclass(frozen=True)
class SellmeierBranch:
    form: str
    coefficients: MappingProxyType
    shift: float = 0.0

    def n_squared(self, lam, temperature):
        c = self.coefficients
        lam2 = lam * lam
        if self.form == "edwards_lawrence":
            t0 = c["T0"]
            f = (temperature - t0) * (temperature + t0 + 546.0)
            return (
                c["A1"]
                + (c["A2"] + c["B1"] * f) / (lam2 - (c["A3"] + c["B2"] * f) ** 2)
                + c["B3"] * f
                - c["A4"] * lam2
            )
        if self.form == "bruner":
            tk2 = (temperature + 273.15) ** 2
            b = c["b0"] * tk2
            cc = c["c0"] * tk2
            return (
                c["A"]
                + b
                + (c["B"] + b) / (lam2 - (c["C"] + cc) ** 2)
                + c["E"] / (lam2 - c["F"] ** 2)
                + c["G"] / (lam2 - c["H"] ** 2)
                + c["D"] * lam2
            )
        raise ConfigError(f"unknown Sellmeier form {self.form!r}")


_REQUIRED = {
    "edwards_lawrence": ("T0", "A1", "A2", "A3", "A4", "B1", "B2", "B3"),
    "bruner": ("A", "B", "C", "D", "E", "F", "G", "H", "b0", "c0"),
}


@dataclass(frozen=True)
class MaterialModel:
    name: str
    ordinary: SellmeierBranch
    extraordinary: SellmeierBranch
    wavelength_validity: tuple
    temperature_validity: tuple
    thermal_expansion: float
    expansion_reference: float = 25.0
    source: str = field(default="", compare=False)

    def branch(self, which):
        if which == ORDINARY:
            return self.ordinary
        if which == EXTRAORDINARY:
            return self.extraordinary
        raise ValueError(f"branch must be one of {BRANCHES}, got {which!r}")

    def expansion_factor(self, temperature):
        """Linear thermal scaling of poled-domain lengths relative to the reference."""
        return 1.0 + self.thermal_expansion * (temperature - self.expansion_reference)


def parse_material_table(text, source=""):
    top = {}
    blocks = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in BRANCHES:
                raise ConfigError(f"{source}:{lineno}: unknown branch [{current}]")
            blocks[current] = {}
            continue
        key, *values = line.split()
        if not values:
            raise ConfigError(f"{source}:{lineno}: key {key!r} has no value")
        target = top if current is None else blocks[current]
        target[key] = values

    if int(top.get("format_version", ["0"])[0]) != 1:
        raise ConfigError(f"{source}: unsupported format_version")
    branches = {}
    for name in BRANCHES:
        if name not in blocks:
            raise ConfigError(f"{source}: missing [{name}] block")
        block = dict(blocks[name])
        form = block.pop("form")[0]
        if form not in _REQUIRED:
            raise ConfigError(f"{source}: unknown Sellmeier form {form!r}")
        shift = float(block.pop("shift", ["0"])[0])
        coeffs = {k: float(v[0]) for k, v in block.items()}
        missing = [k for k in _REQUIRED[form] if k not in coeffs]
        if missing:
            raise ConfigError(f"{source}: [{name}] lacks coefficients {missing}")
        branches[name] = SellmeierBranch(form, MappingProxyType(coeffs), shift)

    def pair(key):
        lo, hi = (float(v) for v in top[key][:2])
        return (lo, hi)

    return MaterialModel(
        name=top["name"][0],
        ordinary=branches[ORDINARY],
        extraordinary=branches[EXTRAORDINARY],
        wavelength_validity=pair("wavelength_range"),
        temperature_validity=pair("temperature_range"),
        thermal_expansion=float(top["thermal_expansion"][0]),
        expansion_reference=float(top.get("expansion_reference", ["25"])[0]),
        source=source,
    )


@lru_cache(maxsize=None)
def _load_builtin(name):
    fname = _BUILTIN[name]
    text = resources.files("ppspdc").joinpath("data", fname).read_text()
    return parse_material_table(text, source=fname)


def load_material(name_or_path):
    """Return a built-in material by name (``LiNbO3``, ``LiTaO3``) or parse a table file."""
    if isinstance(name_or_path, MaterialModel):
        return name_or_path
    if name_or_path in _BUILTIN:
        return _load_builtin(name_or_path)
    path = Path(name_or_path)
    if not path.is_file():
        raise ConfigError(
            f"material: {name_or_path!r} is neither a built-in "
            f"({', '.join(_BUILTIN)}) nor a readable table file"
        )
    return parse_material_table(path.read_text(), source=str(path))


def _check_range(quantity, values, interval):
    lo, hi = interval
    arr = np.asarray(values, dtype=float)
    bad = (arr < lo) | (arr > hi) | ~np.isfinite(arr)
    if np.any(bad):
        offending = arr[bad].flat[0] if arr.ndim else float(arr)
        raise OutOfValidityRange(quantity, float(offending), interval)


def refractive_index(material, branch, wavelength, temperature):
    """Principal index of ``branch`` at vacuum ``wavelength`` (um) and ``temperature`` (deg C).

    Accepts scalars or arrays; raises :class:`OutOfValidityRange` outside the
    fit's wavelength/temperature box.
    """
    _check_range("wavelength", wavelength, material.wavelength_validity)
    _check_range("temperature", temperature, material.temperature_validity)
    b = material.branch(branch)
    lam = np.asarray(wavelength, dtype=float)
    n = np.sqrt(b.n_squared(lam, np.asarray(temperature, dtype=float))) + b.shift
    return n if n.ndim else float(n)


def index_at_omega(material, branch, omega, temperature):
    return refractive_index(
        material, branch, 2.0 * np.pi * C_UM_PER_PS / np.asarray(omega, float), temperature
    )


def extraordinary_index_at_angle(n_o, n_e, theta):
    """Index of the extraordinary wave whose wave vector makes ``theta`` with the optic axis.

    Index-ellipsoid relation 1/n^2 = cos^2/n_o^2 + sin^2/n_e^2.
    """
    ct = np.cos(theta)
    st = np.sin(theta)
    # cos(pi/2) is 6e-17, not 0; snap so the principal values come back exactly.
    ct = np.where(np.abs(ct) < 1e-15, 0.0, ct)
    st = np.where(np.abs(st) < 1e-15, 0.0, st)
    inv = ct * ct / (n_o * n_o) + st * st / (n_e * n_e)
    n = 1.0 / np.sqrt(inv)
    n = np.where(st == 0.0, n_o, np.where(ct == 0.0, n_e, n))
    return n if np.ndim(n) else float(n)


def wavevector_magnitude(omega, n):
    """k = n*omega/c in rad/um for omega in rad/ps."""
    k = np.asarray(n, float) * np.asarray(omega, float) / C_UM_PER_PS
    return k if k.ndim else float(k)


def direction_index(material, omega, temperature, cos_to_axis):
    """Extraordinary-wave index for a wave whose direction cosine with the optic axis is given.

    ``cos_to_axis`` = 0 is a wave perpendicular to the axis (principal n_e).
    """
    n_o = index_at_omega(material, ORDINARY, omega, temperature)
    n_e = index_at_omega(material, EXTRAORDINARY, omega, temperature)
    c2 = np.asarray(cos_to_axis, float) ** 2
    inv = c2 / (n_o * n_o) + (1.0 - c2) / (n_e * n_e)
    n = np.where(c2 == 0.0, n_e, 1.0 / np.sqrt(inv))
    return n if np.ndim(n) else float(n)
