"""Transverse emission patterns: photon-number maps, angle-resolved spectra,
correlation areas and temperature scans.

Directions are parametrized by the radial angle theta from the pump axis z
and the azimuth psi measured from the optic axis y, so a unit wave vector is
(sin(theta) sin(psi), sin(theta) cos(psi), cos(theta)).  Signal and idler are
extraordinary waves whose index follows the index ellipsoid.  The pump is a
plane wave along z unless a finite waist is given, in which case only its
Gaussian transverse wave-vector spectrum is modelled.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from .biphoton import Angles, closed_form_factor, structure_factor, tabulated_structure_factor
from .constants import C_UM_PER_PS, thz_to_rad_per_ps
from .errors import ConfigError, NoHalfCrossing, NoTransverseMatch
from .materials import EXTRAORDINARY, ORDINARY, index_at_omega, load_material
from .observables import Spectrum, half_crossings, smooth_spectrum
from .poling import build_domains

THETA_CAP = math.radians(10.0)
AXIS_UNITS = {"theta_s": "rad", "psi_s": "rad", "d_theta_i": "rad", "d_psi_i": "rad",
              "temperature": "degC"}


@dataclass(frozen=True)
class EmissionGeometry(Angles):
    """Signal and idler directions, with the small-angle validity cap enforced."""

    def __post_init__(self):
        for name in ("theta_s", "theta_i"):
            v = getattr(self, name)
            if not 0.0 <= v <= THETA_CAP:
                raise ConfigError(f"{name}={v!r} rad outside [0, {THETA_CAP:.4f}] (10 deg cap)")


@dataclass(frozen=True)
class Filter:
    """Flat-top spectral filter on the signal, ``bandwidth_thz`` wide (full width, in THz).

    With ``reject=True`` the band is removed instead of passed.
    """

    center: float
    bandwidth_thz: float
    reject: bool = False

    def __post_init__(self):
        if not self.bandwidth_thz > 0:
            raise ConfigError(f"filter.bandwidth_thz must be > 0, got {self.bandwidth_thz!r}")

    @property
    def half_width(self):
        return 0.5 * thz_to_rad_per_ps(self.bandwidth_thz)

    def transmission(self, omega):
        inside = np.abs(np.asarray(omega, float) - self.center) <= self.half_width
        return (~inside if self.reject else inside).astype(float)


@dataclass(frozen=True)
class AngularSetup:
    """Everything a map needs apart from the angular grid.

    ``half_span`` and ``n_omega`` give the signal frequency window about
    ``omega_s0``; maps integrate over this window (times any filter).
    """

    domains: object
    material: object
    temperature: float
    omega_p0: float
    omega_s0: float
    half_span: float = 600.0
    n_omega: int = 2401
    pump_waist: float = math.inf
    uniform_l0: float = None   # set for uniform structures to use the closed form
    exact: bool = False        # force the per-domain sum at every point

    @property
    def omegas(self):
        half = np.linspace(-self.half_span, self.half_span, self.n_omega)
        return self.omega_s0 + 0.5 * (half - half[::-1])

    def with_(self, **kw):
        vals = {k: getattr(self, k) for k in self.__dataclass_fields__}
        vals.update(kw)
        return AngularSetup(**vals)


@dataclass(frozen=True)
class AngularMap:
    axes: tuple          # ((name, array), ...) in array-index order
    values: np.ndarray
    pump_waist: float = math.inf
    filter: Filter = None
    flags: np.ndarray = None   # True where no transverse match existed
    metadata: dict = field(default_factory=dict, compare=False)

    def axis(self, name):
        for n, a in self.axes:
            if n == name:
                return a
        raise KeyError(name)

    def csv_text(self):
        names = [n for n, _ in self.axes]
        grids = np.meshgrid(*[a for _, a in self.axes], indexing="ij")
        flags = self.flags if self.flags is not None else np.zeros(self.values.shape, bool)
        head = [f"{n}[{AXIS_UNITS.get(n, '1')}]" for n in names]
        lines = [",".join(head + ["value[rel]", "no_match[1]"])]
        for idx in np.ndindex(self.values.shape):
            cols = [repr(float(g[idx])) for g in grids]
            cols += [repr(float(self.values[idx])), str(int(flags[idx]))]
            lines.append(",".join(cols))
        return "\n".join(lines) + "\n"

    def matrix_csv_text(self):
        """Two-axis maps as a matrix: first column the first axis, header row the second."""
        if len(self.axes) != 2:
            raise ConfigError("matrix layout needs a two-axis map")
        (n0, a0), (n1, a1) = self.axes
        lines = [f"{n0}\\{n1}," + ",".join(repr(float(v)) for v in a1)]
        for i, v in enumerate(a0):
            lines.append(repr(float(v)) + "," + ",".join(repr(float(x)) for x in self.values[i]))
        return "\n".join(lines) + "\n"


# -- wave vectors ---------------------------------------------------------

def _indices(material, omega, temperature):
    n_o = index_at_omega(material, ORDINARY, omega, temperature)
    n_e = index_at_omega(material, EXTRAORDINARY, omega, temperature)
    return n_o, n_e


def _k_dir(omega, n_o, n_e, theta, psi):
    # Extraordinary k magnitude for direction (theta, psi); cos to the y axis is sin(theta)cos(psi).
    c = np.sin(theta) * np.cos(psi)
    inv = c * c / (n_o * n_o) + (1.0 - c * c) / (n_e * n_e)
    return omega / (C_UM_PER_PS * np.sqrt(inv))


def _transverse(k, theta, psi):
    st = k * np.sin(theta)
    return st * np.sin(psi), st * np.cos(psi)


def idler_direction(omega_s, theta_s, psi_s, omega_i, material, temperature, tol=1e-15,
                    max_iter=100):
    """Idler angles giving zero transverse mismatch with a plane-wave pump along z.

    psi_i = psi_s + pi and sin(theta_i) = k_s sin(theta_s) / k_i(theta_i), the
    last solved by fixed-point iteration because the idler index depends on
    its own direction.  Broadcasts over all arguments.
    """
    material = load_material(material)
    ws, ts, ps, wi = np.broadcast_arrays(*(np.asarray(v, float) for v in
                                           (omega_s, theta_s, psi_s, omega_i)))
    no_s, ne_s = _indices(material, ws, temperature)
    no_i, ne_i = _indices(material, wi, temperature)
    ks = _k_dir(ws, no_s, ne_s, ts, ps)
    target = ks * np.sin(ts)
    psi_i = ps + math.pi
    theta_i = np.arcsin(np.clip(target / _k_dir(wi, no_i, ne_i, 0.0, 0.0), -1.0, 1.0))
    for _ in range(max_iter):
        ki = _k_dir(wi, no_i, ne_i, theta_i, psi_i)
        s = target / ki
        if np.any(s > 1.0):
            raise NoTransverseMatch("idler would need sin(theta_i) > 1")
        new = np.arcsin(s)
        done = np.max(np.abs(new - theta_i), initial=0.0) <= tol
        theta_i = new
        if done:
            break
    ki = _k_dir(wi, no_i, ne_i, theta_i, psi_i)
    return theta_i, psi_i, ks, ki


def transverse_residual(omega_s, theta_s, psi_s, omega_i, theta_i, psi_i, material, temperature):
    """|k_s,perp + k_i,perp| and |k_s,perp| for a candidate idler direction."""
    material = load_material(material)
    no_s, ne_s = _indices(material, omega_s, temperature)
    no_i, ne_i = _indices(material, omega_i, temperature)
    ks = _k_dir(omega_s, no_s, ne_s, theta_s, psi_s)
    ki = _k_dir(omega_i, no_i, ne_i, theta_i, psi_i)
    sx, sy = _transverse(ks, theta_s, psi_s)
    ix, iy = _transverse(ki, theta_i, psi_i)
    return np.hypot(sx + ix, sy + iy), np.hypot(sx, sy)


# -- longitudinal factor --------------------------------------------------

def phase_factor(setup, dk):
    """Structure factor of ``setup.domains`` at the mismatches ``dk``.

    Uniform structures use the closed form; general ones go through the
    spline table of the exact sum unless ``setup.exact`` is set.
    """
    dk = np.asarray(dk, float)
    d = setup.domains
    if setup.uniform_l0 is not None:
        return closed_form_factor(dk, setup.uniform_l0, d.n_domains)
    if setup.exact:
        return structure_factor(d, dk)
    return tabulated_structure_factor(d, dk)


def _pair_amplitude(setup, ws, wi, ks, ki, theta_s, theta_i, kp_z):
    dkz = kp_z - ks * np.cos(theta_s) - ki * np.cos(theta_i)
    ns = ks * C_UM_PER_PS / ws
    ni = ki * C_UM_PER_PS / wi
    c = math.pi * np.sqrt(ws * wi / (ns * ni)) / C_UM_PER_PS
    return c * phase_factor(setup, dkz)


def _pump_k(setup, temperature=None):
    material = load_material(setup.material)
    t = setup.temperature if temperature is None else temperature
    n = index_at_omega(material, EXTRAORDINARY, setup.omega_p0, t)
    return n * setup.omega_p0 / C_UM_PER_PS


def _direction_intensity(setup, theta_s, psi_s, omegas):
    """|a|^2 on (direction, frequency) for plane-wave pumping; no-match entries flagged."""
    material = load_material(setup.material)
    ws = omegas[None, :]
    wi = setup.omega_p0 - ws
    ts = np.asarray(theta_s, float)[:, None]
    ps = np.asarray(psi_s, float)[:, None]
    ts, ps, ws, wi = np.broadcast_arrays(ts, ps, ws, wi)
    no_s, ne_s = _indices(material, ws, setup.temperature)
    no_i, ne_i = _indices(material, wi, setup.temperature)
    ks = _k_dir(ws, no_s, ne_s, ts, ps)
    ki0 = _k_dir(wi, no_i, ne_i, 0.0, 0.0)
    reach = ks * np.sin(ts) < ki0 * (1 - 1e-12)
    flags = ~reach
    theta_i, psi_i, ks, ki = _masked_idler(ws, ts, ps, wi, material, setup.temperature, reach)
    amp = _pair_amplitude(setup, ws, wi, ks, ki, ts, theta_i, _pump_k(setup))
    inten = np.abs(amp) ** 2
    inten[flags] = 0.0
    return inten, flags


def _masked_idler(ws, ts, ps, wi, material, temperature, reach):
    theta_i = np.zeros(ws.shape)
    psi_i = ps + math.pi
    ks = np.ones(ws.shape)
    ki = np.ones(ws.shape)
    if np.any(reach):
        ti, _, a, b = idler_direction(ws[reach], ts[reach], ps[reach], wi[reach], material,
                                      temperature)
        theta_i[reach], ks[reach], ki[reach] = ti, a, b
    return theta_i, psi_i, ks, ki


def photon_number_map(setup, thetas, psis, filter=None):
    """Signal photon number N_s(theta_s, psi_s) = int F(w) |a|^2 dw over the setup window."""
    thetas = np.asarray(thetas, float)
    psis = np.asarray(psis, float)
    if np.any(thetas < 0) or np.any(thetas > THETA_CAP):
        raise ConfigError("angular grid: theta_s must lie in [0, 10 deg]")
    omegas = setup.omegas
    T, P = np.meshgrid(thetas, psis, indexing="ij")
    inten, flags = _direction_intensity(setup, T.ravel(), P.ravel(), omegas)
    weight = filter.transmission(omegas) if filter is not None else np.ones(omegas.size)
    dw = float(omegas[1] - omegas[0])
    vals = trapezoid(inten * weight[None, :], dx=dw, axis=1).reshape(T.shape)
    cell_flags = np.any(flags, axis=1).reshape(T.shape)
    return AngularMap((("theta_s", thetas), ("psi_s", psis)), vals, setup.pump_waist, filter,
                      cell_flags, {"omega_window": [float(omegas[0]), float(omegas[-1])]})


def count_peaks(spectrum, prominence=0.25, smooth=None):
    """Number of maxima in a spectrum standing out by ``prominence`` of its peak."""
    s = spectrum
    if smooth is not None:
        s = smooth_spectrum(s, smooth)
    y = s.values
    top = y.max()
    if top <= 0:
        return 0
    # Pad with zeros so maxima at the window edge still count.
    peaks, _ = find_peaks(np.concatenate([[0.0], y, [0.0]]), prominence=prominence * top)
    return int(peaks.size)


def count_bands(spectrum, level=0.2, smooth=None):
    """Number of separate frequency bands where the spectrum exceeds ``level`` of its peak."""
    from scipy.ndimage import label

    s = spectrum if smooth is None else smooth_spectrum(spectrum, smooth)
    top = s.values.max()
    if top <= 0:
        return 0
    return int(label(s.values > level * top)[1])


def angular_spectrum(setup, thetas, psi_s=0.0, hbar=1.0):
    """Signal energy spectra S_s(w; theta_s) along azimuth ``psi_s``, one Spectrum per angle."""
    omegas = setup.omegas
    thetas = np.atleast_1d(np.asarray(thetas, float))
    inten, flags = _direction_intensity(setup, thetas, np.full(thetas.shape, psi_s), omegas)
    out = []
    for t, row, fl in zip(thetas, inten, flags):
        out.append(Spectrum(omegas.copy(), hbar * omegas * row, "signal",
                            {"theta_s": float(t), "psi_s": psi_s, "no_match_points": int(fl.sum())}))
    return out


# -- correlation area -----------------------------------------------------

def _conditional(setup, theta_s, psi_s, theta_i, psi_i, omegas, weights, waist):
    """P(theta_i, psi_i) = sum_w F T_pump |a_z|^2 for arrays of idler directions."""
    material = load_material(setup.material)
    temp = setup.temperature
    ws = omegas[None, :]
    wi = setup.omega_p0 - ws
    no_s, ne_s = _indices(material, omegas, temp)
    no_i, ne_i = _indices(material, setup.omega_p0 - omegas, temp)
    ks = _k_dir(omegas, no_s, ne_s, theta_s, psi_s)[None, :]
    th = np.asarray(theta_i, float)[:, None]
    ph = np.asarray(psi_i, float)[:, None]
    ki = _k_dir(wi, no_i[None, :], ne_i[None, :], th, ph)
    sx, sy = _transverse(ks, theta_s, psi_s)
    ix, iy = _transverse(ki, th, ph)
    q2 = (sx + ix) ** 2 + (sy + iy) ** 2
    kp = _pump_k(setup)
    kp_z = np.sqrt(kp * kp - q2)
    amp = _pair_amplitude(setup, ws, wi, ks, ki, theta_s, th, kp_z)
    inten = np.exp(-0.5 * waist * waist * q2) * np.abs(amp) ** 2
    if omegas.size == 1:
        return inten[:, 0]
    dw = float(omegas[1] - omegas[0])
    return trapezoid(inten * weights[None, :], dx=dw, axis=1)


def _spectral_points(setup, filter, monochromatic):
    if monochromatic:
        return np.array([setup.omega_s0]), np.ones(1)
    omegas = setup.omegas
    if filter is None:
        return omegas, np.ones(omegas.size)
    return omegas, filter.transmission(omegas)


def optimum_idler_theta(setup, theta_s, psi_s):
    """Idler radial angle matching the signal at the centre frequency."""
    ti, _, _, _ = idler_direction(setup.omega_s0, theta_s, psi_s, setup.omega_p0 - setup.omega_s0,
                                  setup.material, setup.temperature)
    return float(ti)


def lobe_widths(x, y, rel_height=0.5):
    """Per-lobe FWHMs of a bimodal curve: split at the deepest minimum between the two top peaks."""
    peaks, _ = find_peaks(np.concatenate([[0.0], y, [0.0]]), prominence=0.05 * y.max())
    peaks = peaks - 1
    if peaks.size < 2:
        return []
    top = np.sort(peaks[np.argsort(y[peaks])[-2:]])
    cut = top[0] + int(np.argmin(y[top[0]:top[1] + 1]))
    widths = []
    for sl in (slice(0, cut + 1), slice(cut, y.size)):
        xs, ys = x[sl], y[sl]
        try:
            lo, hi = _lobe_crossings(xs, ys, rel_height)
            widths.append(float(hi - lo))
        except NoHalfCrossing:
            widths.append(float("nan"))
    return widths


def _lobe_crossings(x, y, rel):
    # Like half_crossings, but the split point is allowed to sit above the level.
    peak = y.max()
    level = rel * peak
    above = np.nonzero(y >= level)[0]
    i0, i1 = above[0], above[-1]

    def cross(a, b):
        return x[a] + (level - y[a]) * (x[b] - x[a]) / (y[b] - y[a])

    lo = x[0] if i0 == 0 else cross(i0 - 1, i0)
    hi = x[-1] if i1 == y.size - 1 else cross(i1, i1 + 1)
    if i0 == 0 and i1 == y.size - 1:
        raise NoHalfCrossing("lobe has no half-level crossing")
    return lo, hi


@dataclass(frozen=True)
class CorrelationArea:
    map: AngularMap
    theta_i_opt: float
    radial_width: float       # envelope FWHM along delta theta_i
    azimuthal_width: float    # envelope FWHM along delta psi_i
    radial_cut: tuple
    azimuthal_cut: tuple
    radial_peaks: int
    lobe_widths: list = field(default_factory=list)

    @property
    def split(self):
        return self.radial_peaks >= 2


def correlation_area(setup, theta_s, psi_s, pump_waist, d_theta, d_psi, filter=None,
                     cut_points=None, monochromatic=False):
    """Conditional idler distribution around the optimum idler direction.

    ``d_theta`` and ``d_psi`` are offset grids (rad) about (theta_i_opt,
    psi_s + pi); negative radial offsets past the axis continue on the far
    side.  The distribution is integrated over the setup's frequency window
    (times ``filter`` if given); ``monochromatic=True`` instead fixes the
    signal at omega_s0.
    Widths are FWHMs along the radial cut through the maximum and the
    azimuthal cut through it.
    """
    if not (pump_waist > 0 and math.isfinite(pump_waist)):
        raise ConfigError("correlation area needs a finite pump waist > 0")
    waist = float(pump_waist)
    d_theta = np.asarray(d_theta, float)
    d_psi = np.asarray(d_psi, float)
    t0 = optimum_idler_theta(setup, theta_s, psi_s)
    p0 = psi_s + math.pi
    omegas, weights = _spectral_points(setup, filter, monochromatic)

    def at(dt, dp):
        return _conditional(setup, theta_s, psi_s, t0 + dt, p0 + dp, omegas, weights, waist)

    DT, DP = np.meshgrid(d_theta, d_psi, indexing="ij")
    vals = at(DT.ravel(), DP.ravel()).reshape(DT.shape)
    amap = AngularMap((("d_theta_i", d_theta), ("d_psi_i", d_psi)), vals, waist, filter,
                      None, {"theta_s": theta_s, "psi_s": psi_s, "theta_i_opt": t0})

    # Principal cuts on a finer grid through the maximum.
    n = cut_points or 4 * max(d_theta.size, d_psi.size) + 1
    rt = np.linspace(d_theta[0], d_theta[-1], n)
    r_vals = at(rt, np.zeros(n))
    k = int(np.argmax(r_vals))
    rp = np.linspace(d_psi[0], d_psi[-1], n)
    a_vals = at(np.full(n, rt[k]), rp)
    lo, hi = half_crossings(rt, r_vals)
    try:
        alo, ahi = half_crossings(rp, a_vals)
        az = float(ahi - alo)
    except NoHalfCrossing:
        # A collinear signal gives an azimuthally symmetric distribution.
        if abs(theta_s) > 1e-12:
            raise
        az = float("nan")
    peaks, _ = find_peaks(np.concatenate([[0.0], r_vals, [0.0]]), prominence=0.05 * r_vals.max())
    lobes = lobe_widths(rt, r_vals) if peaks.size >= 2 else []
    return CorrelationArea(amap, t0, float(hi - lo), az, (rt, r_vals), (rp, a_vals),
                           int(peaks.size), lobes)


def correlation_width_vs_chirp(setup, zetas, l0, n_layers, theta_s, psi_s, pump_waist, d_theta,
                               d_psi, filter=None, monochromatic=False, cut_points=None):
    """Radial correlation width for each chirp parameter; returns (widths, monotone_increasing)."""
    from .poling import PolingSpec

    widths = []
    for z in zetas:
        d = build_domains(PolingSpec(l0=l0, zeta=float(z), n_layers=n_layers))
        s = setup.with_(domains=d, uniform_l0=l0 if z == 0 else None)
        widths.append(correlation_area(s, theta_s, psi_s, pump_waist, d_theta, d_psi, filter,
                                       cut_points, monochromatic).radial_width)
    widths = np.array(widths)
    return widths, bool(np.all(np.diff(widths) > 0))


# -- temperature ----------------------------------------------------------

def temperature_scan(setup, temperatures, thetas, bandwidth_thz, psi_s=0.0, center=None):
    """N_s(theta_s, T) along ``psi_s`` behind a flat-top filter about the degenerate frequency.

    At each temperature the indices are re-evaluated and the domain
    structure is stretched by the material's thermal expansion.
    """
    material = load_material(setup.material)
    centre = 0.5 * setup.omega_p0 if center is None else center
    filt = Filter(centre, bandwidth_thz)
    temps = np.asarray(temperatures, float)
    thetas = np.asarray(thetas, float)
    # Sample only the filter passband.
    half = filt.half_width
    n = max(3, int(round(setup.n_omega * half / setup.half_span)) | 1)
    rows, flags = [], []
    for t in temps:
        d = setup.domains.scaled(material.expansion_factor(t) / material.expansion_factor(
            setup.temperature))
        s = setup.with_(domains=d, temperature=float(t), omega_s0=centre, half_span=half,
                        n_omega=n, uniform_l0=None if setup.uniform_l0 is None else
                        setup.uniform_l0 * d.total_length / setup.domains.total_length)
        m = photon_number_map(s, thetas, [psi_s], filt)
        rows.append(m.values[:, 0])
        flags.append(m.flags[:, 0])
    vals = np.array(rows).T
    return AngularMap((("theta_s", thetas), ("temperature", temps)), vals, setup.pump_waist, filt,
                      np.array(flags).T, {"psi_s": psi_s, "design_temperature": setup.temperature})


def ring_radius(thetas, values):
    """Angle of the profile maximum (0 for an on-axis spot)."""
    return float(np.asarray(thetas)[int(np.argmax(values))])


def collinear_optimized_l0(material, omega_p0, omega_s0, temperature, n_layers, l0_guess,
                           half_span=600.0, n_omega=2401, rel_range=2e-3):
    """Uniform layer length maximizing the collinear (theta_s = 0) photon number.

    Exact phase matching at the centre frequency leaves the dispersion-shifted
    band slightly mismatched on axis, so the frequency-integrated emission
    then peaks on a small cone.  Maximizing N_s(0) over l0 removes that and
    is what "optimized for collinear interaction" means here.
    """
    from scipy.optimize import minimize_scalar
    from .poling import PolingSpec

    def neg(l0):
        d = build_domains(PolingSpec(l0=l0, n_layers=n_layers))
        s = AngularSetup(d, material, temperature, omega_p0, omega_s0, half_span, n_omega,
                         uniform_l0=l0)
        return -photon_number_map(s, [0.0], [0.0]).values[0, 0]

    res = minimize_scalar(neg, bounds=(l0_guess * (1 - rel_range), l0_guess * (1 + rel_range)),
                          method="bounded", options={"xatol": l0_guess * 1e-10})
    return float(res.x)
