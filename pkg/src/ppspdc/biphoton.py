"""Two-photon spectral amplitude of the down-converted pair.

Under cw pumping the energy-conservation delta is consumed analytically, so
a :class:`JsaSlice` is a one-dimensional function of the signal frequency
with the idler pinned at ``omega_p0 - omega_s``.  The longitudinal integral
over chi(2)(z) is evaluated exactly, domain by domain; the closed form for
uniform poling is kept alongside as an oracle and fast path.

All dimensional prefactors (pump amplitude, S, eps0, hbar) are collapsed
into ``pump_amplitude`` (default 1), so rates and spectra are relative.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np

from .constants import C_UM_PER_PS
from .errors import ConfigError
from .materials import (
    EXTRAORDINARY,
    direction_index,
    index_at_omega,
    load_material,
    wavevector_magnitude,
)
from .parallel import map_chunks

CSV_VERSION = 1
_LD = np.longdouble
_PI_LD = np.arccos(_LD(-1))
_TWO_PI_LD = 2 * _PI_LD


@dataclass(frozen=True)
class FrequencyGrid:
    omega_p0: float
    omega_s_center: float
    half_span: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise ConfigError(f"grid.n_points must be >= 2, got {self.n_points}")
        if not self.half_span > 0:
            raise ConfigError(f"grid.half_span must be > 0, got {self.half_span}")
        if not 0 < self.omega_s_center < self.omega_p0:
            raise ConfigError("grid: signal centre must lie strictly between 0 and omega_p0")

    @property
    def omega_i_center(self):
        return self.omega_p0 - self.omega_s_center

    @property
    def spacing(self):
        return 2.0 * self.half_span / (self.n_points - 1)

    @property
    def detunings(self):
        # Built symmetric so the mirror of point j is exactly point n-1-j.
        half = np.linspace(-self.half_span, self.half_span, self.n_points)
        return 0.5 * (half - half[::-1])

    @property
    def omega_s(self):
        return self.omega_s_center + self.detunings

    @property
    def omega_i(self):
        return self.omega_p0 - self.omega_s

    def describe(self):
        return {
            "omega_p0": self.omega_p0,
            "omega_s_center": self.omega_s_center,
            "half_span": self.half_span,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class Collinear:
    """All three waves along z."""


COLLINEAR = Collinear()


@dataclass(frozen=True)
class Angles:
    """Signal and idler directions: radial angle from z, azimuth measured from the y axis."""

    theta_s: float
    psi_s: float
    theta_i: float
    psi_i: float


def axis_cosine(theta, psi):
    """Direction cosine with the optic (y) axis."""
    return np.sin(theta) * np.cos(psi)


def unit_vector(theta, psi):
    st = np.sin(theta)
    return np.stack([st * np.sin(psi), st * np.cos(psi), np.cos(theta)], axis=-1)


def wave_number(material, omega, temperature, theta=0.0, psi=0.0):
    """|k| of an extraordinary wave travelling in direction (theta, psi)."""
    n = direction_index(material, omega, temperature, axis_cosine(theta, psi))
    return wavevector_magnitude(omega, n)


def phase_mismatch(omega_s, omega_i, geometry, material, temperature, omega_p=None):
    """Longitudinal mismatch k_p,z - k_s,z - k_i,z (rad/um); pump along z."""
    material = load_material(material)
    omega_s = np.asarray(omega_s, float)
    omega_i = np.asarray(omega_i, float)
    if omega_p is None:
        omega_p = omega_s + omega_i
    kp = wavevector_magnitude(omega_p, index_at_omega(material, EXTRAORDINARY, omega_p, temperature))
    if isinstance(geometry, Collinear):
        ks = wavevector_magnitude(omega_s, index_at_omega(material, EXTRAORDINARY, omega_s, temperature))
        ki = wavevector_magnitude(omega_i, index_at_omega(material, EXTRAORDINARY, omega_i, temperature))
        return kp - ks - ki
    g = geometry
    ks = wave_number(material, omega_s, temperature, g.theta_s, g.psi_s)
    ki = wave_number(material, omega_i, temperature, g.theta_i, g.psi_i)
    return kp - ks * np.cos(g.theta_s) - ki * np.cos(g.theta_i)


def normalization_C(omega_s, omega_i, n_s, n_i, c=C_UM_PER_PS):
    """pi*sqrt(ws*wi) / (i*c*sqrt(ns*ni))."""
    val = math.pi * np.sqrt(np.asarray(omega_s) * omega_i) / (1j * c * np.sqrt(np.asarray(n_s) * n_i))
    return val if np.ndim(val) else complex(val)


def _reduced(phase):
    """Extended-precision phase folded into [-pi, pi] and returned as float64."""
    return (phase - np.round(phase / _TWO_PI_LD) * _TWO_PI_LD).astype(float)


def _sinc(x):
    return np.sinc(x / math.pi)


def structure_factor(domains, dk, workers=None):
    """Integral of chi(2)(z) exp(i dk z) over the crystal, summed domain by domain.

    Each domain of length d centred at c contributes
    sign * d * sinc(dk d / 2) * exp(i dk c), which is the exact integral and
    is finite at dk = 0.  Domains are accumulated sequentially from the
    entrance, vectorised over the ``dk`` points.
    """
    dk = np.asarray(dk, float)
    shape = dk.shape
    flat = dk.ravel()
    z = domains.exact_boundaries
    lengths = np.diff(z).astype(float)
    # Phases about the crystal centre, formed and reduced mod 2 pi in extended
    # precision; weights and accumulation stay in float64.
    z_ref = 0.5 * (z[0] + z[-1])
    offsets = 0.5 * ((z[1:] - z_ref) + (z[:-1] - z_ref))
    signs = domains.signs * domains.chi2_magnitude

    def chunk(sl):
        x = flat[sl]
        xl = x.astype(_LD)
        acc = np.zeros(x.shape, complex)
        for s, d, c in zip(signs, lengths, offsets):
            acc += (s * d) * _sinc(0.5 * d * x) * np.exp(1j * _reduced(xl * c))
        return acc * np.exp(1j * _reduced(xl * z_ref))

    parts = map_chunks(chunk, flat.size, workers)
    out = np.concatenate(parts) if parts else np.zeros(0, complex)
    return out.reshape(shape)


def closed_form_factor(dk, l0, n_layers):
    """Uniform-poling structure factor in closed form.

    l0 sinc(dk l0/2) sin[(dk l0 - pi) N/2] / sin[(dk l0 - pi)/2]
    * exp[-i (dk l0 + pi) N/2 - i pi/2], with the removable singularity of the
    ratio handled by its limit.
    """
    # Evaluated in extended precision: the arguments reach N*pi and the
    # sin(N eps) factor is ill-conditioned near its nulls.
    dk = np.asarray(dk, float)
    n = int(n_layers)
    x = dk.astype(_LD) * _LD(l0)
    half = 0.5 * (x - _PI_LD)
    # Reduce half = m*pi + eps; the ratio is then (-1)^(m(N-1)) sin(N eps)/sin(eps).
    m = np.round(half / _PI_LD)
    eps = half - m * _PI_LD
    sign = np.where((m * (n - 1)) % 2 == 0, 1.0, -1.0)
    small = np.abs(eps) < 1e-12
    safe = np.where(small, _LD(1), np.sin(eps))
    series = n * (1 - (n * n - 1) * eps * eps / 6)
    ratio = sign * np.where(small, series, np.sin(n * eps) / safe)
    hx = 0.5 * x
    sinc = np.where(hx == 0, _LD(1), np.sin(hx) / np.where(hx == 0, _LD(1), hx))
    ph = (x + _PI_LD) * (0.5 * n) + 0.5 * _PI_LD
    ph = ph - np.round(ph / (2 * _PI_LD)) * (2 * _PI_LD)
    out = (_LD(l0) * sinc * ratio).astype(float) * np.exp(-1j * ph.astype(float))
    return out if out.ndim else complex(out)


def _indices(material, geometry, omega_s, omega_i, temperature):
    if isinstance(geometry, Collinear):
        ns = index_at_omega(material, EXTRAORDINARY, omega_s, temperature)
        ni = index_at_omega(material, EXTRAORDINARY, omega_i, temperature)
    else:
        ns = direction_index(material, omega_s, temperature, axis_cosine(geometry.theta_s, geometry.psi_s))
        ni = direction_index(material, omega_i, temperature, axis_cosine(geometry.theta_i, geometry.psi_i))
    return ns, ni


@dataclass(frozen=True)
class JsaSlice:
    omega_s: np.ndarray
    amplitude: np.ndarray
    omega_p0: float
    omega_s_center: float
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def detunings(self):
        return self.omega_s - self.omega_s_center

    @property
    def omega_i(self):
        return self.omega_p0 - self.omega_s

    @property
    def omega_i_center(self):
        return self.omega_p0 - self.omega_s_center

    @property
    def spacing(self):
        return float(self.omega_s[1] - self.omega_s[0])

    @property
    def intensity(self):
        return np.abs(self.amplitude) ** 2

    def csv_text(self):
        lines = ["detuning[rad/ps],re_amplitude[rel],im_amplitude[rel]"]
        for w, a in zip(self.detunings, self.amplitude):
            lines.append(f"{float(w)!r},{float(a.real)!r},{float(a.imag)!r}")
        return "\n".join(lines) + "\n"

    def write(self, csv_path, json_path=None):
        with open(csv_path, "w", newline="\n") as fh:
            fh.write(self.csv_text())
        if json_path is not None:
            meta = {
                "format_version": CSV_VERSION,
                "omega_p0": self.omega_p0,
                "omega_s_center": self.omega_s_center,
                **self.metadata,
            }
            with open(json_path, "w") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True, default=str)


def jsa_layer_sum(domains, grid, geometry, material, temperature, pump_amplitude=1.0,
                  workers=None, metadata=None):
    """cw two-photon amplitude on ``grid`` from the exact domain-by-domain integral."""
    material = load_material(material)
    ws = grid.omega_s
    wi = grid.omega_i
    dk = phase_mismatch(ws, wi, geometry, material, temperature, omega_p=grid.omega_p0)
    ns, ni = _indices(material, geometry, ws, wi, temperature)
    amp = normalization_C(ws, wi, ns, ni) * pump_amplitude * structure_factor(domains, dk, workers)
    meta = {
        "geometry": _geometry_meta(geometry),
        "material": material.name,
        "temperature": temperature,
        "n_domains": domains.n_domains,
        "crystal_length_um": domains.total_length,
        "grid": grid.describe(),
    }
    meta.update(metadata or {})
    return JsaSlice(ws, amp, grid.omega_p0, grid.omega_s_center, meta)


def jsa_closed_form_uniform(omega_s, omega_i, l0, n_layers, material, temperature,
                            geometry=COLLINEAR, pump_amplitude=1.0):
    """Uniform-poling amplitude from the closed form, including C and the pump constant."""
    material = load_material(material)
    ws = np.asarray(omega_s, float)
    wi = np.asarray(omega_i, float)
    dk = phase_mismatch(ws, wi, geometry, material, temperature)
    ns, ni = _indices(material, geometry, ws, wi, temperature)
    return normalization_C(ws, wi, ns, ni) * pump_amplitude * closed_form_factor(dk, l0, n_layers)


def _geometry_meta(geometry):
    if isinstance(geometry, Collinear):
        return "collinear"
    return {"theta_s": geometry.theta_s, "psi_s": geometry.psi_s,
            "theta_i": geometry.theta_i, "psi_i": geometry.psi_i}


def pump_line(omega_sum, omega_p0, sigma_p):
    """Gaussian quasi-cw pump line exp(-(w_s + w_i - w_p0)^2 / (4 sigma_p^2))."""
    d = np.asarray(omega_sum) - omega_p0
    return np.exp(-d * d / (4.0 * sigma_p * sigma_p))


def tabulated_structure_factor(domains, dk, oversample=64, workers=None):
    """Structure factor at many mismatches through a spline table of the exact sum.

    The factor about the crystal centre is band-limited (its "frequencies"
    are the domain offsets, |z| <= L/2), so sampling the exact sum at
    2*pi/(oversample*L) and interpolating with a cubic spline keeps the
    relative error near 1e-8 for oversample = 64.  Falls back to the exact
    sum when the table would not be smaller than the request.
    """
    from scipy.interpolate import CubicSpline

    dk = np.asarray(dk, float)
    if dk.size == 0:
        return np.zeros(dk.shape, complex)
    lo, hi = float(dk.min()), float(dk.max())
    h = 2.0 * math.pi / (oversample * domains.total_length)
    m = int(math.ceil((hi - lo) / h)) + 5
    if m >= dk.size:
        return structure_factor(domains, dk, workers)
    grid = lo - 2 * h + h * np.arange(m)
    z_mid = 0.5 * (domains.boundaries[0] + domains.boundaries[-1])
    table = structure_factor(domains, grid, workers) * np.exp(-1j * grid * z_mid)
    return CubicSpline(grid, table)(dk) * np.exp(1j * dk * z_mid)


def quasi_cw_entries(domains, omega_s, omega_i, omega_p0, sigma_p, material, temperature,
                     cutoff=7.0, exact=False, workers=None):
    """Non-negligible entries (j, k, a) of the quasi-cw amplitude a(omega_s[j], omega_i[k]).

    The pump frequency is omega_s + omega_i at every point; entries more than
    ``cutoff`` sigma_p off the energy-conservation ridge are dropped (the
    Gaussian there is below exp(-cutoff^2/4)).
    """
    material = load_material(material)
    ws = np.asarray(omega_s, float)
    wi = np.asarray(omega_i, float)
    j, k = np.nonzero(np.abs(ws[:, None] + wi[None, :] - omega_p0) <= cutoff * sigma_p)
    WS, WI = ws[j], wi[k]
    dk = phase_mismatch(WS, WI, COLLINEAR, material, temperature)
    ns, ni = _indices(material, COLLINEAR, WS, WI, temperature)
    factor = (structure_factor(domains, dk, workers) if exact
              else tabulated_structure_factor(domains, dk, workers=workers))
    vals = normalization_C(WS, WI, ns, ni) * pump_line(WS + WI, omega_p0, sigma_p) * factor
    return j, k, vals


def quasi_cw_amplitude(domains, omega_s, omega_i, omega_p0, sigma_p, material, temperature,
                       cutoff=7.0, exact=False, workers=None):
    """Two-dimensional collinear amplitude for a narrow Gaussian pump line, as a dense array."""
    j, k, vals = quasi_cw_entries(domains, omega_s, omega_i, omega_p0, sigma_p, material,
                                  temperature, cutoff, exact, workers)
    out = np.zeros((np.size(omega_s), np.size(omega_i)), complex)
    out[j, k] = vals
    return out
