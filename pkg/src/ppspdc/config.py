"""Run configuration: a sectioned key = value file with documented defaults.

A bare run reproduces the LiNbO3 fixture (752.5 nm pump, degenerate
1505 nm pairs, 1000 layers, zeta = 1e-6 um^-2).  Every key, its unit and
its default is listed in ``SCHEMA``; ``ppspdc defaults`` prints them as a
ready-to-edit file.
"""
from configparser import ConfigParser
from dataclasses import dataclass
import hashlib
import json
import math

from .errors import ConfigError
from .poling import check_energy_conservation, idler_wavelength


def _num(text):
    return float(text)


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


def _opt_num(text):
    t = text.strip().lower()
    if t in ("", "none", "auto"):
        return None
    return float(text)


def _waist(text):
    t = text.strip().lower()
    if t in ("inf", "infinity", "plane"):
        return math.inf
    v = float(text)
    if not v > 0:
        raise ValueError("must be > 0 (or inf)")
    return v


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be true or false")


def _num_list(text):
    vals = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    if not vals:
        raise ValueError("must list at least one value")
    return vals


def _text(text):
    return text.strip()


# section -> key -> (parser, default text, description)
SCHEMA = {
    "crystal": {
        "material": (_text, "LiNbO3", "built-in name (LiNbO3, LiTaO3) or path to a coefficient table"),
        "temperature": (_num, "25.0", "crystal temperature, deg C"),
    },
    "wavelengths": {
        "pump_um": (_num, "0.7525", "pump centre wavelength, um"),
        "signal_um": (_num, "1.505", "signal centre wavelength, um"),
        "idler_um": (_opt_num, "1.505", "idler centre wavelength, um (auto = from energy conservation)"),
    },
    "poling": {
        "l0_um": (_opt_num, "auto", "layer length at the crystal centre, um (auto = collinear design)"),
        "zeta_per_um2": (_num, "1e-6", "chirp parameter, um^-2 (0 = uniform poling)"),
        "n_layers": (_pos_int, "1000", "number of domains"),
        "reverse": (_bool, "false", "mirror the structure (long layers at the entrance)"),
    },
    "grid": {
        "half_span": (_num, "620.0", "signal detuning half-span, rad/ps"),
        "n_points": (_pos_int, "4097", "frequency samples"),
    },
    "delay": {
        "tau_min_ps": (_num, "-0.2", "first HOM delay, ps"),
        "tau_max_ps": (_num, "0.2", "last HOM delay, ps"),
        "n_points": (_pos_int, "1601", "delay samples"),
    },
    "schmidt": {
        "sigma_p": (_num, "1.0", "quasi-cw pump linewidth, rad/ps"),
        "spacing": (_num, "0.125", "grid spacing of both photons, rad/ps"),
        "half_span": (_num, "350.0", "half-span of both photon grids, rad/ps"),
        "method": (_text, "auto", "auto, svd or banded"),
        "modes": (_bool, "false", "also write the leading mode functions (svd only)"),
    },
    "angular": {
        "theta_max_deg": (_num, "5.0", "largest signal radial angle, deg"),
        "n_theta": (_pos_int, "26", "radial samples"),
        "psi_max_deg": (_num, "180.0", "largest signal azimuth, deg"),
        "n_psi": (_pos_int, "5", "azimuth samples (from 0)"),
        "half_span": (_num, "400.0", "frequency window half-span, rad/ps"),
        "n_omega": (_pos_int, "1601", "frequency samples in the window"),
        "pump_waist_um": (_waist, "inf", "pump waist for maps, um"),
        "optimize_l0": (_bool, "true", "uniform maps: choose l0 maximizing on-axis emission"),
    },
    "angular_spectrum": {
        "thetas_deg": (_num_list, "0,1,2,3", "signal radial angles, deg"),
        "half_span": (_num, "620.0", "frequency window half-span, rad/ps"),
        "n_omega": (_pos_int, "4961", "frequency samples"),
    },
    "filter": {
        "bandwidth_thz": (_opt_num, "none", "flat-top signal filter full width, THz (none = open)"),
        "center_um": (_opt_num, "auto", "filter centre wavelength, um (auto = signal centre)"),
        "reject": (_bool, "false", "remove the band instead of passing it"),
    },
    "correlation": {
        "theta_s_deg": (_num, "1.0", "signal radial angle, deg"),
        "psi_s_deg": (_num, "0.0", "signal azimuth, deg"),
        "pump_waist_um": (_waist, "100.0", "pump waist, um"),
        "d_theta_deg": (_num, "1.0", "half-range of idler radial offsets, deg"),
        "n_d_theta": (_pos_int, "41", "radial offset samples"),
        "d_psi_deg": (_num, "30.0", "half-range of idler azimuth offsets, deg"),
        "n_d_psi": (_pos_int, "21", "azimuth offset samples"),
        "cut_points": (_pos_int, "801", "samples along each principal cut"),
        "half_span": (_num, "400.0", "frequency window half-span, rad/ps"),
        "n_omega": (_pos_int, "1601", "frequency samples"),
    },
    "temperature": {
        "design_c": (_num, "100.0", "temperature at which the structure is designed, deg C"),
        "t_min_c": (_num, "40.0", "first scan temperature, deg C"),
        "t_max_c": (_num, "120.0", "last scan temperature, deg C"),
        "n_points": (_pos_int, "17", "temperature samples"),
        "bandwidth_thz": (_num, "14.0", "flat-top filter width about degeneracy, THz"),
        "theta_max_deg": (_num, "3.0", "largest radial angle, deg"),
        "n_theta": (_pos_int, "31", "radial samples"),
    },
    "chirp_sweep": {
        "zetas": (_num_list, "0,1e-7,3e-7,1e-6", "chirp parameters, um^-2"),
    },
    "output": {
        "directory": (_text, "out", "artifact directory"),
        "smoothing_rad_per_ps": (_num, "0", "moving-average window for spectra, rad/ps (0 = none)"),
        "matrix": (_bool, "false", "angular maps also in matrix layout"),
    },
    "run": {
        "workers": (_num, "0", "worker threads (0 = all, capped by PPSPDC_MAX_WORKERS)"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    values: dict   # {section: {key: parsed value}}
    raw: dict      # {section: {key: text}} exactly as resolved

    def __getitem__(self, dotted):
        section, key = dotted.split(".", 1)
        return self.values[section][key]

    @property
    def idler_um(self):
        v = self["wavelengths.idler_um"]
        if v is None:
            return idler_wavelength(self["wavelengths.pump_um"], self["wavelengths.signal_um"])
        return v

    @property
    def workers(self):
        w = int(self["run.workers"])
        return None if w <= 0 else w

    def with_overrides(self, overrides):
        raw = {s: dict(kv) for s, kv in self.raw.items()}
        _apply(raw, overrides)
        return _build(raw)

    def config_hash(self):
        """sha256 of the resolved configuration in canonical form."""
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def as_dict(self):
        return {s: dict(kv) for s, kv in self.raw.items()}


def _apply(raw, overrides):
    for item in overrides or ():
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        name, value = item.split("=", 1)
        section, key = name.strip().split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown configuration field {name.strip()!r}")
        raw[section][key] = value.strip()


def _build(raw):
    values = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (parse, _, doc) in keys.items():
            text = raw[section][key]
            try:
                values[section][key] = parse(text)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{section}.{key} = {text!r}: {exc} ({doc})") from None
    cfg = RunConfig(values, raw)
    validate(cfg)
    return cfg


def defaults():
    return _build({s: {k: spec[1] for k, spec in keys.items()} for s, keys in SCHEMA.items()})


def load_config(path=None, overrides=None):
    """Defaults, then the file at ``path`` (if any), then ``section.key=value`` overrides."""
    raw = {s: {k: spec[1] for k, spec in keys.items()} for s, keys in SCHEMA.items()}
    if path is not None:
        parser = ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from None
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown configuration section [{section}]")
            for key, value in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown configuration field {section}.{key}")
                raw[section][key] = value
    _apply(raw, overrides)
    return _build(raw)


def validate(cfg):
    lp, ls = cfg["wavelengths.pump_um"], cfg["wavelengths.signal_um"]
    for name in ("wavelengths.pump_um", "wavelengths.signal_um"):
        if not cfg[name] > 0:
            raise ConfigError(f"{name} must be > 0")
    if not ls > lp:
        raise ConfigError("wavelengths.signal_um must exceed wavelengths.pump_um")
    if cfg["wavelengths.idler_um"] is not None:
        try:
            check_energy_conservation(lp, ls, cfg["wavelengths.idler_um"])
        except ConfigError as exc:
            raise ConfigError(f"wavelengths.idler_um: {exc}") from None
    if cfg["poling.l0_um"] is not None and not cfg["poling.l0_um"] > 0:
        raise ConfigError("poling.l0_um must be > 0")
    for name in ("grid.half_span", "schmidt.sigma_p", "schmidt.spacing", "schmidt.half_span",
                 "angular.half_span", "angular_spectrum.half_span", "correlation.half_span"):
        if not cfg[name] > 0:
            raise ConfigError(f"{name} must be > 0")
    if cfg["delay.tau_max_ps"] <= cfg["delay.tau_min_ps"]:
        raise ConfigError("delay.tau_max_ps must exceed delay.tau_min_ps")
    if cfg["temperature.t_max_c"] < cfg["temperature.t_min_c"]:
        raise ConfigError("temperature.t_max_c must not be below temperature.t_min_c")
    for name in ("angular.theta_max_deg", "temperature.theta_max_deg"):
        if not 0 < cfg[name] <= 10.0:
            raise ConfigError(f"{name} must lie in (0, 10] deg")
    if cfg["schmidt.method"] not in ("auto", "svd", "banded"):
        raise ConfigError("schmidt.method must be auto, svd or banded")
    bw = cfg["filter.bandwidth_thz"]
    if bw is not None and not bw > 0:
        raise ConfigError("filter.bandwidth_thz must be > 0 (or none)")
    if not cfg["temperature.bandwidth_thz"] > 0:
        raise ConfigError("temperature.bandwidth_thz must be > 0")
    if cfg["output.smoothing_rad_per_ps"] < 0:
        raise ConfigError("output.smoothing_rad_per_ps must be >= 0")


def defaults_text():
    """The default configuration as an annotated file."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (_, default, doc) in keys.items():
            lines.append(f"# {doc}")
            lines.append(f"{key} = {default}")
        lines.append("")
    return "\n".join(lines)
