"""Command-line front end.

    ppspdc [--config FILE] [--set section.key=value ...] [--out DIR] [--plot PNG] COMMAND

Each command writes ``<command>.csv`` (data only, header with units) and
``<command>.json`` (config hash, versions, tolerances, results) into the
output directory and prints a one-line summary.  ``ppspdc defaults``
prints the documented default configuration.
"""
import argparse
from dataclasses import dataclass, field
import math
import sys

import numpy as np

from . import __version__
from .angular import (
    AngularSetup,
    Filter,
    collinear_optimized_l0,
    correlation_area,
    count_bands,
    photon_number_map,
    ring_radius,
    angular_spectrum,
    temperature_scan,
)
from .biphoton import COLLINEAR, FrequencyGrid, jsa_layer_sum
from .config import defaults_text, load_config
from .constants import OpticalConstants, omega_from_wavelength
from .errors import ConfigError, DomainError, GridTooCoarse, NoHalfCrossing, SpdcError
from .io import csv_table, write_artifacts
from .materials import load_material
from .observables import (
    EDGE_LEVEL_LIMIT,
    PEAK_STEP_LIMIT,
    energy_spectrum,
    fwhm,
    hom_dip,
    pair_rate,
    smooth_spectrum,
)
from .poling import (
    BLUEPRINT_VERSION,
    PolingSpec,
    blueprint_text,
    build_domains,
    design_basic_layer,
    fixed_endpoint_zeta,
)
from .schmidt import NORM_TOL, TRUNCATION, quasi_cw_schmidt

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_RESOLUTION = 4

RELATIVE = OpticalConstants(hbar=1.0)


@dataclass
class Result:
    stem: str
    csv: str
    meta: dict
    summary: str
    scalars: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    extra_csv: dict = field(default_factory=dict)
    plot: object = None


# -- shared set-up --------------------------------------------------------

class Context:
    """Material, centre frequencies, layer length and domains derived from a config."""

    def __init__(self, cfg, temperature=None, design_temperature=None):
        self.cfg = cfg
        self.material = load_material(cfg["crystal.material"])
        self.temperature = cfg["crystal.temperature"] if temperature is None else temperature
        self.lp = cfg["wavelengths.pump_um"]
        self.ls = cfg["wavelengths.signal_um"]
        self.li = cfg.idler_um
        self.wp = omega_from_wavelength(self.lp)
        self.ws0 = omega_from_wavelength(self.ls)
        t_design = self.temperature if design_temperature is None else design_temperature
        l0 = cfg["poling.l0_um"]
        self.l0 = design_basic_layer(self.material, self.lp, self.ls, self.li, t_design) \
            if l0 is None else l0
        self.zeta = cfg["poling.zeta_per_um2"]
        self.n_layers = cfg["poling.n_layers"]
        self.workers = cfg.workers

    def domains(self, l0=None):
        spec = PolingSpec(l0=self.l0 if l0 is None else l0, zeta=self.zeta,
                          n_layers=self.n_layers, reverse=self.cfg["poling.reverse"])
        return build_domains(spec)

    def grid(self):
        return FrequencyGrid(self.wp, self.ws0, self.cfg["grid.half_span"],
                             self.cfg["grid.n_points"])

    def jsa(self):
        return jsa_layer_sum(self.domains(), self.grid(), COLLINEAR, self.material,
                             self.temperature, workers=self.workers)

    def describe(self):
        return {"material": self.material.name, "temperature_c": self.temperature,
                "lambda_p_um": self.lp, "lambda_s_um": self.ls, "lambda_i_um": self.li,
                "l0_um": self.l0, "zeta_per_um2": self.zeta, "n_layers": self.n_layers}

    def filter(self):
        bw = self.cfg["filter.bandwidth_thz"]
        if bw is None:
            return None
        c = self.cfg["filter.center_um"]
        return Filter(self.ws0 if c is None else omega_from_wavelength(c), bw,
                      self.cfg["filter.reject"])

    def angular_setup(self, half_span, n_omega, pump_waist=math.inf):
        """Map set-up; uniform structures may use the collinear-optimized layer length."""
        l0 = self.l0
        uniform = self.zeta == 0.0
        if uniform and self.cfg["angular.optimize_l0"]:
            l0 = collinear_optimized_l0(self.material, self.wp, self.ws0, self.temperature,
                                        self.n_layers, self.l0, half_span, n_omega)
        setup = AngularSetup(self.domains(l0), self.material, self.temperature, self.wp,
                             self.ws0, half_span, n_omega, pump_waist,
                             uniform_l0=l0 if uniform and not self.cfg["poling.reverse"] else None)
        return setup, l0


def _grid_tolerances():
    return {"peak_step_limit": PEAK_STEP_LIMIT, "edge_level_limit": EDGE_LEVEL_LIMIT}


def _safe_fwhm(obj):
    try:
        return fwhm(obj)
    except NoHalfCrossing:
        return float("nan")


# -- commands -------------------------------------------------------------

def cmd_spectrum(cfg, args=None):
    """Signal energy spectrum of the cw pair amplitude."""
    ctx = Context(cfg)
    jsa = ctx.jsa()
    sig = energy_spectrum(jsa, "signal", RELATIVE)
    cols = ["omega_s[rad/ps]", "wavelength_s[um]", "S_signal[rel]"]
    data = [sig.abscissa, 2 * math.pi * 299.792458 / sig.abscissa, sig.values]
    width = cfg["output.smoothing_rad_per_ps"]
    shown = sig
    if width > 0:
        shown = smooth_spectrum(sig, width)
        cols.append("S_signal_smoothed[rel]")
        data.append(shown.values)
    w = _safe_fwhm(shown)
    meta = {"setup": ctx.describe(), "grid": ctx.grid().describe(), "fwhm_rad_per_ps": w,
            "smoothing_rad_per_ps": width}

    def plot(path):
        from .plotting import line_plot
        curves = [("signal", sig.values / sig.values.max())]
        if shown is not sig:
            curves.append(("smoothed", shown.values / sig.values.max()))
        line_plot(path, sig.abscissa, curves, r"$\omega_s$ (rad/ps)", "S (rel.)",
                  f"N_L={ctx.n_layers}, zeta={ctx.zeta:g}")

    return Result("spectrum", csv_table(cols, zip(*data)), meta,
                  f"spectrum: {sig.values.size} points, FWHM {w:.4g} rad/ps",
                  {"fwhm": w, "peak": float(sig.values.max())}, _grid_tolerances(), plot=plot)


def _pair_scalars(ctx):
    jsa = ctx.jsa()
    rate = pair_rate(jsa)
    return jsa, {"rate": rate, "peak": float(jsa.intensity.max()), "fwhm": _safe_fwhm(
        (jsa.detunings, jsa.intensity))}


def cmd_pairs(cfg, args=None):
    """Relative pair rate, peak and spectral FWHM."""
    ctx = Context(cfg)
    jsa, sc = _pair_scalars(ctx)
    cols = ["n_layers[1]", "zeta[um^-2]", "l0[um]", "rate[rel]", "peak_intensity[rel]",
            "fwhm[rad/ps]"]
    row = [ctx.n_layers, ctx.zeta, ctx.l0, sc["rate"], sc["peak"], sc["fwhm"]]
    meta = {"setup": ctx.describe(), "grid": ctx.grid().describe(), **sc}

    def plot(path):
        from .plotting import line_plot
        line_plot(path, jsa.detunings, [("|a|^2", jsa.intensity / jsa.intensity.max())],
                  r"$\Omega_s$ (rad/ps)", r"$|a|^2$ (rel.)",
                  f"rate {sc['rate']:.4g}, N_L={ctx.n_layers}, zeta={ctx.zeta:g}")

    return Result("pairs", csv_table(cols, [row]), meta,
                  f"pairs: rate {sc['rate']:.6g} (rel), FWHM {sc['fwhm']:.4g} rad/ps", sc,
                  _grid_tolerances(), plot=plot)


def _delays(cfg):
    return np.linspace(cfg["delay.tau_min_ps"], cfg["delay.tau_max_ps"], cfg["delay.n_points"])


def _hom_scalars(ctx):
    prof = hom_dip(ctx.jsa(), _delays(ctx.cfg), workers=ctx.workers)
    return prof, {"visibility": prof.visibility, "dip_position": prof.dip_position,
                  "width": _safe_fwhm(prof),
                  "baseline_deviation": prof.metadata["baseline_tolerance"]}


def cmd_hom(cfg, args=None):
    """Hong-Ou-Mandel coincidence rate versus delay."""
    ctx = Context(cfg)
    prof, sc = _hom_scalars(ctx)
    meta = {"setup": ctx.describe(), "grid": ctx.grid().describe(), **sc}

    def plot(path):
        from .plotting import line_plot
        line_plot(path, prof.delays, [("R_n", prof.rate)], r"$\tau$ (ps)", r"$R_n$")

    return Result("hom", csv_table(["tau[ps]", "coincidence_rate[1]"],
                                   zip(prof.delays, prof.rate)), meta,
                  f"hom: visibility {sc['visibility']:.4f}, dip at {sc['dip_position']:.4g} ps, "
                  f"width {sc['width']:.4g} ps", sc, _grid_tolerances(), plot=plot)


def _schmidt_result(ctx):
    cfg = ctx.cfg
    step = cfg["schmidt.spacing"]
    n = 2 * int(round(cfg["schmidt.half_span"] / step)) + 1
    off = step * (np.arange(n) - n // 2)
    ws = ctx.ws0 + off
    wi = (ctx.wp - ctx.ws0) + off
    return quasi_cw_schmidt(ctx.domains(), ws, wi, ctx.wp, cfg["schmidt.sigma_p"], ctx.material,
                            ctx.temperature, modes=cfg["schmidt.modes"],
                            method=cfg["schmidt.method"], workers=ctx.workers), ws, wi


def _schmidt_scalars(res):
    return {"entropy": res.entropy, "cooperativity": res.cooperativity,
            "n_modes": int(res.eigenvalues.size)}


def cmd_schmidt(cfg, args=None):
    """Schmidt weights, entropy and cooperativity (quasi-cw pump)."""
    ctx = Context(cfg)
    res, ws, wi = _schmidt_result(ctx)
    sc = _schmidt_scalars(res)
    meta = {"setup": ctx.describe(), "sigma_p": cfg["schmidt.sigma_p"],
            "grid": {"signal": [float(ws[0]), float(ws[-1]), ws.size],
                     "idler": [float(wi[0]), float(wi[-1]), wi.size]},
            **res.metadata, **sc}
    extra = {}
    if res.signal_modes is not None:
        k = min(4, res.signal_modes.shape[1])
        cols = ["omega_s[rad/ps]"] + [f"{p}_psi{j}[ps^1/2]" for j in range(k) for p in ("re", "im")]
        rows = [[w] + [v for j in range(k) for v in (res.signal_modes[i, j].real,
                                                       res.signal_modes[i, j].imag)]
                for i, w in enumerate(ws)]
        extra["modes"] = csv_table(cols, rows)

    def plot(path):
        from .plotting import line_plot
        n = np.arange(res.weights.size)
        line_plot(path, n, [("lambda^2", res.weights)], "n", r"$\lambda_n^2$", logy=True,
                  markers=True)

    return Result("schmidt", res.csv_text(), meta,
                  f"schmidt: E = {sc['entropy']:.4f} bits, K = {sc['cooperativity']:.4f}, "
                  f"{sc['n_modes']} modes", sc,
                  {"truncation": TRUNCATION, "normalization": NORM_TOL}, extra, plot)


def _map_plot(amap, xlabel, ylabel, scale=(1.0, 1.0)):
    def plot(path):
        from .plotting import map_plot
        (_, a0), (_, a1) = amap.axes
        map_plot(path, a0 * scale[0], a1 * scale[1], amap.values, xlabel, ylabel)
    return plot


def cmd_angular_map(cfg, args=None):
    """Signal photon number over emission angles."""
    ctx = Context(cfg)
    setup, l0 = ctx.angular_setup(cfg["angular.half_span"], cfg["angular.n_omega"],
                                  cfg["angular.pump_waist_um"])
    thetas = np.radians(np.linspace(0.0, cfg["angular.theta_max_deg"], cfg["angular.n_theta"]))
    psis = np.radians(np.linspace(0.0, cfg["angular.psi_max_deg"], cfg["angular.n_psi"]))
    amap = photon_number_map(setup, thetas, psis, ctx.filter())
    peak = float(np.degrees(thetas[np.unravel_index(np.argmax(amap.values),
                                                    amap.values.shape)[0]]))
    meta = {"setup": ctx.describe(), "map_l0_um": l0, "peak_theta_deg": peak,
            "no_match_cells": int(amap.flags.sum()), **amap.metadata}
    extra = {"matrix": amap.matrix_csv_text()} if cfg["output.matrix"] else {}
    return Result("angular-map", amap.csv_text(), meta,
                  f"angular-map: {amap.values.size} cells, maximum at theta_s = {peak:.3g} deg",
                  {"peak_theta_deg": peak}, extra_csv=extra,
                  plot=_map_plot(amap, r"$\vartheta_s$ (deg)", r"$\psi_s$ (deg)",
                                 (180 / math.pi, 180 / math.pi)))


def cmd_angular_spectrum(cfg, args=None):
    """Signal spectra at fixed emission angles."""
    ctx = Context(cfg)
    setup, l0 = ctx.angular_setup(cfg["angular_spectrum.half_span"],
                                  cfg["angular_spectrum.n_omega"])
    thetas = np.radians(cfg["angular_spectrum.thetas_deg"])
    spectra = angular_spectrum(setup, thetas)
    width = cfg["output.smoothing_rad_per_ps"]
    if width > 0:
        spectra = [smooth_spectrum(s, width) for s in spectra]
    rows = [(t, w, v) for t, s in zip(thetas, spectra) for w, v in zip(s.abscissa, s.values)]
    bands = [count_bands(s) for s in spectra]
    meta = {"setup": ctx.describe(), "map_l0_um": l0, "smoothing_rad_per_ps": width,
            "bands": dict(zip(cfg["angular_spectrum.thetas_deg"], bands))}

    def plot(path):
        from .plotting import line_plot
        top = max(s.values.max() for s in spectra) or 1.0
        line_plot(path, spectra[0].abscissa,
                  [(f"{math.degrees(t):g} deg", s.values / top) for t, s in zip(thetas, spectra)],
                  r"$\omega_s$ (rad/ps)", "S (rel.)")

    return Result("angular-spectrum",
                  csv_table(["theta_s[rad]", "omega_s[rad/ps]", "S_signal[rel]"], rows), meta,
                  "angular-spectrum: bands per angle " + ", ".join(
                      f"{d:g} deg: {b}" for d, b in zip(cfg["angular_spectrum.thetas_deg"], bands)),
                  {"bands": bands}, plot=plot)


def _correlation(ctx):
    cfg = ctx.cfg
    setup, l0 = ctx.angular_setup(cfg["correlation.half_span"], cfg["correlation.n_omega"])
    dt = np.radians(np.linspace(-1, 1, cfg["correlation.n_d_theta"]) * cfg["correlation.d_theta_deg"])
    dp = np.radians(np.linspace(-1, 1, cfg["correlation.n_d_psi"]) * cfg["correlation.d_psi_deg"])
    ca = correlation_area(setup, math.radians(cfg["correlation.theta_s_deg"]),
                          math.radians(cfg["correlation.psi_s_deg"]),
                          cfg["correlation.pump_waist_um"], dt, dp, ctx.filter(),
                          cfg["correlation.cut_points"])
    return ca, l0


def _correlation_scalars(ca):
    return {"radial_width": ca.radial_width, "azimuthal_width": ca.azimuthal_width,
            "radial_peaks": ca.radial_peaks}


def cmd_correlation_area(cfg, args=None):
    """Conditional idler distribution around the optimum direction."""
    ctx = Context(cfg)
    ca, l0 = _correlation(ctx)
    sc = _correlation_scalars(ca)
    meta = {"setup": ctx.describe(), "map_l0_um": l0, "theta_i_opt_rad": ca.theta_i_opt,
            "lobe_widths_rad": list(ca.lobe_widths), "split": ca.split, **sc,
            "pump_waist_um": cfg["correlation.pump_waist_um"]}
    rt, rv = ca.radial_cut
    extra = {"radial_cut": csv_table(["d_theta_i[rad]", "value[rel]"], zip(rt, rv))}
    return Result("correlation-area", ca.map.csv_text(), meta,
                  f"correlation-area: radial width {math.degrees(ca.radial_width):.4g} deg, "
                  f"{ca.radial_peaks} radial maxima", sc, extra_csv=extra,
                  plot=_map_plot(ca.map, r"$\delta\vartheta_i$ (deg)", r"$\delta\psi_i$ (deg)",
                                 (180 / math.pi, 180 / math.pi)))


def cmd_chirp_sweep(cfg, args=None):
    """Rate, spectral FWHM and HOM width over a list of chirp parameters."""
    rows, out = [], []
    for z in cfg["chirp_sweep.zetas"]:
        c = cfg.with_overrides([f"poling.zeta_per_um2={z!r}"])
        ctx = Context(c)
        _, sc = _pair_scalars(ctx)
        _, hs = _hom_scalars(ctx)
        rows.append([z, ctx.n_layers * z, sc["rate"], sc["fwhm"], hs["width"]])
        out.append((sc["rate"], sc["fwhm"], hs["width"]))
    rates, widths, taus = (np.array(v) for v in zip(*out))
    trend = {"rate_decreasing": bool(np.all(np.diff(rates) < 0)),
             "fwhm_increasing": bool(np.all(np.diff(widths) > 0)),
             "hom_width_decreasing": bool(np.all(np.diff(taus) < 0))}
    meta = {"setup": Context(cfg).describe(), "zetas": cfg["chirp_sweep.zetas"], **trend}

    def plot(path):
        from .plotting import line_plot
        zs = np.array(cfg["chirp_sweep.zetas"])
        line_plot(path, zs, [("rate / max", rates / rates.max()),
                             ("FWHM / max", widths / widths.max())],
                  r"$\zeta$ ($\mu$m$^{-2}$)", "relative", markers=True)

    return Result("chirp-sweep",
                  csv_table(["zeta[um^-2]", "n_zeta[um^-2]", "rate[rel]", "fwhm[rad/ps]",
                             "hom_width[ps]"], rows), meta,
                  "chirp-sweep: " + ", ".join(f"{k}={v}" for k, v in trend.items()), trend,
                  _grid_tolerances(), plot=plot)


def cmd_temperature_scan(cfg, args=None):
    """On-axis/ring emission profile versus crystal temperature."""
    t_design = cfg["temperature.design_c"]
    ctx = Context(cfg, temperature=t_design, design_temperature=t_design)
    setup = AngularSetup(ctx.domains(), ctx.material, t_design, ctx.wp, ctx.ws0,
                         cfg["angular.half_span"], cfg["angular.n_omega"])
    temps = np.linspace(cfg["temperature.t_min_c"], cfg["temperature.t_max_c"],
                        cfg["temperature.n_points"])
    thetas = np.radians(np.linspace(0.0, cfg["temperature.theta_max_deg"],
                                    cfg["temperature.n_theta"]))
    amap = temperature_scan(setup, temps, thetas, cfg["temperature.bandwidth_thz"])
    radii = [math.degrees(ring_radius(thetas, amap.values[:, j])) for j in range(temps.size)]
    best = float(temps[int(np.argmax(amap.values[0]))])
    meta = {"setup": ctx.describe(), "design_temperature_c": t_design,
            "ring_radius_deg": dict(zip(temps.tolist(), radii)), "on_axis_optimum_c": best,
            "bandwidth_thz": cfg["temperature.bandwidth_thz"]}
    extra = {"matrix": amap.matrix_csv_text()} if cfg["output.matrix"] else {}
    return Result("temperature-scan", amap.csv_text(), meta,
                  f"temperature-scan: on-axis optimum at {best:g} C", {"on_axis_optimum": best},
                  extra_csv=extra,
                  plot=_map_plot(amap, r"$\vartheta_s$ (deg)", "T (C)", (180 / math.pi, 1.0)))


def cmd_blueprint(cfg, args=None):
    """Domain boundary/sign table for fabrication."""
    ctx = Context(cfg)
    d = ctx.domains()
    lengths = d.lengths
    meta = {"setup": ctx.describe(), "blueprint_version": BLUEPRINT_VERSION,
            "n_domains": d.n_domains, "crystal_length_um": d.total_length,
            "first_length_um": float(lengths[0]), "last_length_um": float(lengths[-1])}
    return Result("blueprint", blueprint_text(d), meta,
                  f"blueprint: {d.n_domains} domains, L = {d.total_length:.6g} um, "
                  f"layers {lengths.min():.6g}-{lengths.max():.6g} um")


COMMANDS = {
    "spectrum": cmd_spectrum,
    "pairs": cmd_pairs,
    "hom": cmd_hom,
    "schmidt": cmd_schmidt,
    "angular-map": cmd_angular_map,
    "angular-spectrum": cmd_angular_spectrum,
    "correlation-area": cmd_correlation_area,
    "chirp-sweep": cmd_chirp_sweep,
    "temperature-scan": cmd_temperature_scan,
    "blueprint": cmd_blueprint,
}


# -- sweeps ---------------------------------------------------------------

SWEEP_AXES = {
    "n_layers": ["poling.n_layers"],
    "zeta": ["poling.zeta_per_um2"],
    "T": ["crystal.temperature"],
    "w_p": ["correlation.pump_waist_um", "angular.pump_waist_um"],
}

SWEEP_INNER = {
    "pairs": (("rate", "peak", "fwhm"), lambda ctx: _pair_scalars(ctx)[1]),
    "spectrum": (("rate", "peak", "fwhm"), lambda ctx: _pair_scalars(ctx)[1]),
    "hom": (("visibility", "dip_position", "width"), lambda ctx: _hom_scalars(ctx)[1]),
    "schmidt": (("entropy", "cooperativity", "n_modes"),
                lambda ctx: _schmidt_scalars(_schmidt_result(ctx)[0])),
    "correlation-area": (("radial_width", "azimuthal_width", "radial_peaks"),
                         lambda ctx: _correlation_scalars(_correlation(ctx)[0])),
}

UNITS = {"rate": "rel", "peak": "rel", "fwhm": "rad/ps", "visibility": "1", "dip_position": "ps",
         "width": "ps", "entropy": "bit", "cooperativity": "1", "n_modes": "1",
         "radial_width": "rad", "azimuthal_width": "rad", "radial_peaks": "1"}
AXIS_UNITS = {"n_layers": "1", "zeta": "um^-2", "T": "degC", "w_p": "um"}


def parse_values(axis, text):
    items = [v.strip() for v in (text or "").replace(";", ",").split(",") if v.strip()]
    if not items:
        raise ConfigError(f"sweep: the value list for axis {axis!r} is empty")
    try:
        if axis == "n_layers":
            vals = [int(v) for v in items]
            if min(vals) < 1:
                raise ValueError
            return vals
        return [float(v) for v in items]
    except ValueError:
        raise ConfigError(f"sweep: cannot parse values {text!r} for axis {axis!r}") from None


def run_sweep(cfg, axis, values, inner, fixed_endpoint=False):
    """Stacked results of ``inner`` over ``values``; failing points become flagged rows."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis must be one of {sorted(SWEEP_AXES)}, got {axis!r}")
    if inner not in SWEEP_INNER:
        raise ConfigError(f"sweep.inner must be one of {sorted(SWEEP_INNER)}, got {inner!r}")
    if not values:
        raise ConfigError(f"sweep: the value list for axis {axis!r} is empty")
    if fixed_endpoint and axis not in ("n_layers", "zeta"):
        raise ConfigError("sweep: fixed-endpoint mode needs axis n_layers or zeta")
    names, func = SWEEP_INNER[inner]
    ref = Context(cfg)
    first = ref.domains().lengths[0] if fixed_endpoint else None
    if fixed_endpoint and ref.zeta == 0.0:
        raise ConfigError("sweep: fixed-endpoint mode needs a chirped reference (poling.zeta_per_um2 > 0)")
    rows = []
    for v in values:
        over = [f"{key}={v!r}" for key in SWEEP_AXES[axis]]
        n, z = ref.n_layers, ref.zeta
        status, err, sc = "ok", "", {}
        try:
            if axis == "n_layers":
                n = int(v)
                if fixed_endpoint:
                    z = fixed_endpoint_zeta(ref.l0, n, first, ref.zeta)
            elif axis == "zeta":
                z = float(v)
                if fixed_endpoint:
                    n = max(1, int(round(ref.n_layers * ref.zeta / z)))
            l0 = ref.l0
            if axis == "T":
                # Same crystal at another temperature: layers stretch thermally.
                m = ref.material
                l0 *= m.expansion_factor(float(v)) / m.expansion_factor(ref.temperature)
            over += [f"poling.n_layers={n}", f"poling.zeta_per_um2={z!r}", f"poling.l0_um={l0!r}"]
            sc = func(Context(cfg.with_overrides(over)))
        except (DomainError, GridTooCoarse) as exc:
            status, err = "error", f"{type(exc).__name__}: {exc}"
        rows.append([v, n, z, n * z] + [sc.get(k, float("nan")) for k in names] + [status, err])
    cols = ([f"sweep_{axis}[{AXIS_UNITS[axis]}]", "n_layers[1]", "zeta[um^-2]", "n_zeta[um^-2]"]
            + [f"{k}[{UNITS[k]}]" for k in names] + ["status", "error"])
    return cols, rows


def cmd_sweep(cfg, args):
    values = parse_values(args.axis, args.values)
    cols, rows = run_sweep(cfg, args.axis, values, args.inner, args.fixed_endpoint)
    nz = np.array([r[3] for r in rows], float)
    spread = float((nz.max() - nz.min()) / nz.mean()) if nz.mean() > 0 else 0.0
    failed = sum(r[-2] != "ok" for r in rows)
    meta = {"axis": args.axis, "values": values, "inner": args.inner,
            "fixed_endpoint": args.fixed_endpoint, "n_zeta_relative_spread": spread,
            "failed_points": failed}

    def plot(path):
        from .plotting import line_plot
        x = np.array([r[0] for r in rows], float)
        y = np.array([r[4] for r in rows], float)
        line_plot(path, x, [(cols[4], y)], cols[0], cols[4], markers=True)

    return Result(f"sweep-{args.axis}-{args.inner}", csv_table(cols, rows), meta,
                  f"sweep: {len(rows)} points over {args.axis}, {failed} failed, "
                  f"N*zeta spread {spread:.3g}", {"n_zeta_spread": spread}, plot=plot)


# -- entry point ----------------------------------------------------------

def _common_options():
    # Accepted before or after the command name.
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--config", default=argparse.SUPPRESS,
                   help="configuration file (sectioned key = value)")
    c.add_argument("--set", action="append", default=argparse.SUPPRESS,
                   metavar="SECTION.KEY=VALUE", help="override one configuration field (repeatable)")
    c.add_argument("--out", default=argparse.SUPPRESS,
                   help="output directory (overrides output.directory)")
    c.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                   help="worker threads (overrides run.workers)")
    c.add_argument("--plot", metavar="PNG", default=argparse.SUPPRESS,
                   help="also render a figure to this file")
    return c


def build_parser():
    common = _common_options()
    p = argparse.ArgumentParser(prog="ppspdc", description="Photon pairs from poled crystals.",
                                parents=[common])
    p.add_argument("--version", action="version", version=f"ppspdc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=func.__doc__)
    s = sub.add_parser("sweep", parents=[common],
                       help="run an inner computation over one parameter axis")
    s.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--inner", default="pairs", choices=sorted(SWEEP_INNER))
    s.add_argument("--fixed-endpoint", action="store_true",
                   help="hold the entrance layer length; derive zeta from N_L (or N_L from zeta)")
    sub.add_parser("defaults", help="print the default configuration")
    return p


def execute(argv):
    """Parse ``argv``, run the command and return (exit code, Result or None)."""
    args = build_parser().parse_args(argv)
    if args.command == "defaults":
        sys.stdout.write(defaults_text())
        return EXIT_OK, None
    overrides = list(getattr(args, "set", []))
    if getattr(args, "out", None):
        overrides.append(f"output.directory={args.out}")
    if getattr(args, "workers", None) is not None:
        overrides.append(f"run.workers={args.workers}")
    plot_path = getattr(args, "plot", None)
    try:
        cfg = load_config(getattr(args, "config", None), overrides)
        func = cmd_sweep if args.command == "sweep" else COMMANDS[args.command]
        res = func(cfg, args)
        res.meta["command"] = args.command
        write_artifacts(cfg["output.directory"], res.stem, res.csv, res.meta, cfg,
                        res.tolerances, res.extra_csv)
        if plot_path:
            if res.plot is None:
                raise ConfigError(f"--plot: command {args.command!r} has no figure")
            res.plot(plot_path)
    except ConfigError as exc:
        print(f"ppspdc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, None
    except GridTooCoarse as exc:
        print(f"ppspdc: resolution error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION, None
    except DomainError as exc:
        print(f"ppspdc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN, None
    except SpdcError as exc:
        print(f"ppspdc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN, None
    print(res.summary)
    return EXIT_OK, res


def main(argv=None):
    code, _ = execute(sys.argv[1:] if argv is None else argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
