"""Pair rates, energy spectra, bandwidths and Hong-Ou-Mandel profiles.

Everything here works on a cw :class:`~ppspdc.biphoton.JsaSlice`, so the
integrals are one-dimensional in the signal detuning and use the composite
trapezoid rule on the slice's uniform grid.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.ndimage import uniform_filter1d

from .constants import DEFAULT_CONSTANTS
from .errors import ConfigError, DegenerateInput, GridTooCoarse, NoHalfCrossing
from .parallel import map_chunks

PEAK_STEP_LIMIT = 0.2
EDGE_LEVEL_LIMIT = 5e-2
TAU_CHUNK = 256


@dataclass(frozen=True)
class Spectrum:
    abscissa: np.ndarray
    values: np.ndarray
    label: str = "signal"
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.abscissa, float)
        y = np.asarray(self.values, float)
        if x.shape != y.shape or x.ndim != 1:
            raise ConfigError("spectrum: abscissa and values must be 1-d arrays of equal length")
        if np.any(np.diff(x) <= 0):
            raise ConfigError("spectrum: abscissa must be strictly increasing")
        if np.any(y < 0):
            raise ConfigError("spectrum: values must be non-negative")
        object.__setattr__(self, "abscissa", x)
        object.__setattr__(self, "values", y)

    @property
    def spacing(self):
        return float(self.abscissa[1] - self.abscissa[0])


@dataclass(frozen=True)
class HomProfile:
    delays: np.ndarray
    rate: np.ndarray
    baseline: float
    dip_position: float
    visibility: float
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def rho(self):
        return 1.0 - self.rate


def check_resolution(intensity, limit=PEAK_STEP_LIMIT):
    """Raise GridTooCoarse if |a|^2 jumps by more than ``limit`` next to its peak."""
    y = np.asarray(intensity, float)
    if y.size < 3:
        raise GridTooCoarse("grid has fewer than 3 points")
    p = int(np.argmax(y))
    peak = y[p]
    if peak == 0.0:
        return
    for q in (p - 1, p + 1):
        if 0 <= q < y.size and abs(y[q] - peak) > limit * peak:
            raise GridTooCoarse(
                f"|a|^2 changes by {abs(y[q] - peak) / peak:.1%} between adjacent points at the "
                f"peak (limit {limit:.0%}); refine the frequency grid"
            )


def pair_rate(jsa, check=True):
    """Relative pair number: trapezoid integral of |a|^2 over the slice."""
    y = jsa.intensity
    if not np.all(np.isfinite(y)):
        raise ConfigError("pair_rate: amplitude is not finite")
    if check:
        check_resolution(y)
    return float(trapezoid(y, dx=jsa.spacing))


def energy_spectrum(jsa, which="signal", constants=DEFAULT_CONSTANTS):
    """S(omega) = hbar*omega*|a|^2 for the signal or, via energy conservation, the idler."""
    y = jsa.intensity
    if which == "signal":
        w = jsa.omega_s
    elif which == "idler":
        w = jsa.omega_i[::-1]
        y = y[::-1]
    else:
        raise ConfigError(f"spectrum.which must be 'signal' or 'idler', got {which!r}")
    return Spectrum(w, constants.hbar * w * y, which, dict(jsa.metadata))


def smooth_spectrum(s, window_width):
    """Flat moving average over ``window_width`` (rad/ps).

    The window holds an odd number of samples, round(width/spacing) rounded
    up to odd.  Edges are mirror-reflected, which keeps constants fixed and
    conserves the trapezoid integral exactly.
    """
    dx = s.spacing
    if window_width < dx * (1 - 1e-9):
        raise ConfigError(f"smoothing window {window_width!r} is below the grid spacing {dx!r}")
    w = int(round(window_width / dx)) | 1
    if w >= s.values.size:
        raise ConfigError("smoothing window covers the whole spectrum")
    y = uniform_filter1d(s.values, w, mode="mirror") if w > 1 else s.values.copy()
    meta = dict(s.metadata, smoothing_window=window_width, smoothing_points=w)
    return Spectrum(s.abscissa, np.maximum(y, 0.0), s.label, meta)


def _curve(obj):
    if isinstance(obj, Spectrum):
        return obj.abscissa, obj.values
    if isinstance(obj, HomProfile):
        return obj.delays, obj.rho
    x, y = obj
    return np.asarray(x, float), np.asarray(y, float)


def half_crossings(x, y):
    """Outermost abscissae where ``y`` crosses half its maximum, linearly interpolated."""
    peak = float(np.max(y))
    if not peak > 0:
        raise DegenerateInput("curve has no positive extremum")
    half = 0.5 * peak
    above = np.nonzero(y >= half)[0]
    i0, i1 = above[0], above[-1]
    if i0 == 0 or i1 == y.size - 1:
        raise NoHalfCrossing("curve does not fall below half its maximum inside the window")

    def cross(a, b):
        return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a])

    return cross(i0 - 1, i0), cross(i1, i1 + 1)


def fwhm(obj):
    """Full width at half maximum between the outermost half-level crossings.

    Takes a Spectrum, a HomProfile (width of the dip, measured on 1 - R_n) or
    an ``(x, y)`` pair.
    """
    x, y = _curve(obj)
    lo, hi = half_crossings(x, y)
    return float(hi - lo)


def spectral_fwhm(jsa):
    """FWHM of |a|^2 in signal detuning (rad/ps)."""
    return fwhm((jsa.detunings, jsa.intensity))


def _exchange_product(jsa):
    d = jsa.detunings
    if not np.allclose(d, -d[::-1], rtol=0, atol=1e-9 * max(1.0, np.abs(d).max())):
        raise ConfigError("hom: the slice grid must be symmetric about its centre")
    a = jsa.amplitude
    return d, a * np.conj(a[::-1])


def hom_dip(jsa, delays, workers=None, edge_limit=EDGE_LEVEL_LIMIT):
    """Normalized coincidence rate R_n(tau) = 1 - rho(tau) behind a balanced beamsplitter.

    rho(tau) = Re[exp(i tau (w_i0 - w_s0)) * int a(W) a*(-W) exp(-2 i W tau) dW] / R0,
    with W the detuning of each photon from its own centre frequency and
    R0 = int |a|^2 dW.  At degeneracy this is the usual exchange overlap;
    away from it the prefactor gives the beat at |w_i0 - w_s0|.
    """
    check_resolution(jsa.intensity)
    y = jsa.intensity
    if max(y[0], y[-1]) > edge_limit * y.max():
        raise GridTooCoarse(
            "hom: |a|^2 at the grid edge exceeds "
            f"{edge_limit:g} of its peak; widen the frequency span"
        )
    d, prod = _exchange_product(jsa)
    dx = jsa.spacing
    r0 = float(trapezoid(y, dx=dx))
    if r0 == 0.0:
        raise DegenerateInput("hom: amplitude vanishes on the grid")
    tau = np.asarray(delays, float)
    beat = jsa.omega_i_center - jsa.omega_s_center

    def chunk(sl):
        t = tau[sl][:, None]
        overlap = trapezoid(prod[None, :] * np.exp(-2j * d[None, :] * t), dx=dx, axis=1)
        return np.real(np.exp(1j * tau[sl] * beat) * overlap) / r0

    rho = np.concatenate(map_chunks(chunk, tau.size, workers, chunk=TAU_CHUNK))
    rate = 1.0 - rho
    k = int(np.argmin(rate))
    vis = float(min(1.0, max(0.0, 1.0 - rate[k])))
    meta = dict(jsa.metadata, baseline_tolerance=float(max(abs(rate[0] - 1), abs(rate[-1] - 1))))
    return HomProfile(tau, rate, r0, float(tau[k]), vis, meta)


def beat_period(profile, level=0.1):
    """Oscillation period of rho(tau) from its zero crossings where |rho| envelope is significant."""
    x, y = profile.delays, profile.rho
    zs = []
    for i in range(y.size - 1):
        if y[i] == 0.0 or y[i] * y[i + 1] < 0:
            zs.append(x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))
    zs = np.array(zs)
    if zs.size < 3:
        raise NoHalfCrossing("profile shows fewer than three zero crossings")
    # Keep crossings inside the region where the oscillation is well above the noise.
    strong = np.abs(y) >= level * np.abs(y).max()
    lo, hi = x[strong][0], x[strong][-1]
    zs = zs[(zs >= lo) & (zs <= hi)]
    if zs.size < 3:
        raise NoHalfCrossing("too few zero crossings inside the oscillation envelope")
    return float(2.0 * (zs[-1] - zs[0]) / (zs.size - 1))
