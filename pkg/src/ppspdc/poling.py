"""Sign-alternating chi(2) domain structures for uniform and chirped poling.

The poling phase is phi(u) = k_n0*u - zeta*u**2 with u measured from the
centre of the middle domain, so that the local layer length there equals the
uniform-poling length l0 and, for zeta > 0, layers grow from the entrance
(z = -L) toward the exit (z = 0).  Domain boundaries sit where
phi = (m + 1/2)*pi; each domain's sign is sign(cos(phi + phase_offset)) at its
midpoint, with ``phase_offset`` in {0, pi} chosen so the entrance domain is
negative (the convention under which the layer sum reproduces the textbook
closed form exactly).
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ChirpTooStrong, ConfigError, NoPhaseMatch
from .materials import EXTRAORDINARY, index_at_omega, wavevector_magnitude
from .constants import omega_from_wavelength

BLUEPRINT_VERSION = 1


@dataclass(frozen=True)
class PolingSpec:
    l0: float
    zeta: float = 0.0
    n_layers: int = 1000
    chi2_magnitude: float = 1.0
    reverse: bool = False

    def __post_init__(self):
        if not self.l0 > 0:
            raise ConfigError(f"poling.l0 must be > 0, got {self.l0}")
        if int(self.n_layers) != self.n_layers or self.n_layers < 1:
            raise ConfigError(f"poling.n_layers must be an integer >= 1, got {self.n_layers}")
        if not math.isfinite(self.zeta):
            raise ConfigError("poling.zeta must be finite")

    @property
    def k_n0(self):
        return math.pi / self.l0


@dataclass(frozen=True)
class DomainStructure:
    boundaries: np.ndarray  # strictly increasing, boundaries[0] = -L, boundaries[-1] = 0
    signs: np.ndarray       # +-1 per domain, alternating
    chi2_magnitude: float = 1.0
    # Extended-precision copy of the boundaries.  A 9 mm crystal in float64
    # carries ~1e-12 um of rounding per boundary, which is visible in the
    # layer sum near spectral nulls; phases are formed from this copy.
    exact_boundaries: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.exact_boundaries is None:
            object.__setattr__(self, "exact_boundaries", np.asarray(self.boundaries, np.longdouble))
        for arr in (self.boundaries, self.signs, self.exact_boundaries):
            arr.setflags(write=False)

    @property
    def first_sign(self):
        return int(self.signs[0])

    @property
    def total_length(self):
        return float(self.boundaries[-1] - self.boundaries[0])

    @property
    def n_domains(self):
        return len(self.signs)

    @property
    def lengths(self):
        return np.diff(self.boundaries)

    @property
    def midpoints(self):
        return 0.5 * (self.boundaries[1:] + self.boundaries[:-1])

    def scaled(self, factor):
        """Structure with every boundary multiplied by ``factor`` (thermal expansion)."""
        exact = self.exact_boundaries * np.longdouble(factor)
        return DomainStructure(exact.astype(float), self.signs.copy(), self.chi2_magnitude, exact)

    def chi2(self, z):
        """chi(2)(z) on an arbitrary array of positions; zero outside [-L, 0]."""
        z = np.asarray(z, float)
        idx = np.searchsorted(self.boundaries, z, side="right") - 1
        inside = (z >= self.boundaries[0]) & (z <= self.boundaries[-1])
        idx = np.clip(idx, 0, self.n_domains - 1)
        return np.where(inside, self.chi2_magnitude * self.signs[idx], 0.0)


def poling_phase(spec, u):
    return spec.k_n0 * u - spec.zeta * u * u


def _phase_root(k, zeta, p):
    # Root of k*u - zeta*u^2 = p on the branch continuous with u = p/k at zeta = 0.
    disc = k * k - 4 * zeta * p
    return 2 * p / (k + np.sqrt(disc))


def build_domains(spec):
    """Lay out ``spec.n_layers`` sign domains on [-L, 0]."""
    ld = np.longdouble
    n = int(spec.n_layers)
    k = np.arccos(ld(-1)) / ld(spec.l0)
    j_mid = n // 2
    j = np.arange(n + 1, dtype=ld)
    if spec.zeta == 0.0:
        z = (j - n) * ld(spec.l0)
    else:
        p = np.arccos(ld(-1)) * (j - j_mid - ld(0.5))
        disc = k * k - 4 * ld(spec.zeta) * p
        if np.any(disc <= 0.0):
            raise ChirpTooStrong(
                f"zeta={spec.zeta} makes the poling phase non-monotonic over {n} layers"
            )
        u = _phase_root(k, ld(spec.zeta), p)
        # Local spatial frequency k - 2 zeta u must stay positive across the crystal.
        if np.any(k - 2 * ld(spec.zeta) * u <= 0.0) or np.any(np.diff(u) <= 0.0):
            raise ChirpTooStrong(
                f"zeta={spec.zeta} makes the poling phase non-monotonic over {n} layers"
            )
        z = u - u[-1]
        z[-1] = 0.0
    # Domain j (entrance j=0) has sign (-1)^(j - j_mid) * cos(offset); pick the
    # offset so the entrance domain carries sign -1.
    signs = (-1.0) ** (np.arange(n) - j_mid)
    signs *= -1.0 / signs[0]
    if spec.reverse:
        # Mirror about the crystal centre: longer layers at the entrance.
        z = (z[0] - z)[::-1].copy()
        z[-1] = 0.0
        signs = signs[::-1].copy()
        signs *= -1.0 / signs[0]
    z = np.ascontiguousarray(z)
    return DomainStructure(z.astype(float), np.ascontiguousarray(signs), spec.chi2_magnitude, z)


def collinear_mismatch(material, omega_s, omega_i, temperature, omega_p=None):
    """k_p - k_s - k_i for collinear extraordinary waves propagating perpendicular to the axis."""
    if omega_p is None:
        omega_p = np.asarray(omega_s) + np.asarray(omega_i)
    kp = wavevector_magnitude(omega_p, index_at_omega(material, EXTRAORDINARY, omega_p, temperature))
    ks = wavevector_magnitude(omega_s, index_at_omega(material, EXTRAORDINARY, omega_s, temperature))
    ki = wavevector_magnitude(omega_i, index_at_omega(material, EXTRAORDINARY, omega_i, temperature))
    return kp - ks - ki


def check_energy_conservation(lambda_p0, lambda_s0, lambda_i0, rtol=1e-9):
    lhs = 1.0 / lambda_p0
    rhs = 1.0 / lambda_s0 + 1.0 / lambda_i0
    if abs(lhs - rhs) > rtol * lhs:
        raise ConfigError(
            "wavelengths violate energy conservation 1/lambda_p0 = 1/lambda_s0 + 1/lambda_i0 "
            f"(relative error {abs(lhs - rhs) / lhs:.3e} > {rtol:g})"
        )


def idler_wavelength(lambda_p0, lambda_s0):
    return 1.0 / (1.0 / lambda_p0 - 1.0 / lambda_s0)


def design_basic_layer(material, lambda_p0, lambda_s0, lambda_i0, temperature):
    """First-order QPM layer length l0 = pi / dk for the collinear design triple."""
    check_energy_conservation(lambda_p0, lambda_s0, lambda_i0)
    ws = omega_from_wavelength(lambda_s0)
    wi = omega_from_wavelength(lambda_i0)
    wp = omega_from_wavelength(lambda_p0)
    dk = collinear_mismatch(material, ws, wi, temperature, omega_p=wp)
    if not dk > 0.0:
        raise NoPhaseMatch(f"dk = {dk:.6g} rad/um <= 0; no poling period exists")
    return math.pi / dk


def fixed_endpoint_zeta(l0, n_layers, first_length, zeta_hint):
    """Chirp parameter giving an entrance layer of ``first_length`` for ``n_layers`` domains.

    Used for sweeps that hold the outermost layer lengths (and hence the
    spectral band edges) fixed while the crystal length changes.
    """
    from scipy.optimize import brentq

    def resid(zeta):
        d = build_domains(PolingSpec(l0=l0, zeta=zeta, n_layers=n_layers))
        return d.lengths[0] - first_length

    lo, hi = 0.0, zeta_hint
    while resid(hi) > 0.0:
        hi *= 2.0
    return brentq(resid, lo, hi, xtol=1e-18, rtol=1e-13)


def blueprint_text(domains):
    """Two-column CSV blueprint: boundary position (um) and sign of the domain starting there.

    The last row is the exit face and carries sign 0.  The format version
    (BLUEPRINT_VERSION) is recorded in the run metadata.
    """
    lines = ["boundary[um],sign[1]"]
    signs = list(domains.signs.astype(int)) + [0]
    for z, s in zip(domains.boundaries, signs):
        lines.append(f"{float(z)!r},{int(s):d}")
    return "\n".join(lines) + "\n"


def write_blueprint(domains, path):
    text = blueprint_text(domains)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return text


def read_blueprint(path, chi2_magnitude=1.0):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("boundary"):
                continue
            z, s = line.split(",")
            rows.append((float(z), int(s)))
    z = np.array([r[0] for r in rows])
    signs = np.array([r[1] for r in rows[:-1]], dtype=float)
    return DomainStructure(z, signs, chi2_magnitude)
