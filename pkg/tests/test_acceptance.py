"""Acceptance criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py`` to get the PASS/FAIL summary; each
criterion lists its sub-checks with the measured values.
"""
import math
import time

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from ppspdc.angular import (
    AngularSetup,
    Filter,
    angular_spectrum,
    collinear_optimized_l0,
    correlation_area,
    correlation_width_vs_chirp,
    count_bands,
    photon_number_map,
    ring_radius,
    temperature_scan,
)
from ppspdc.biphoton import COLLINEAR, FrequencyGrid, jsa_closed_form_uniform, jsa_layer_sum
from ppspdc.cli import execute, run_sweep
from ppspdc.config import defaults
from ppspdc.observables import beat_period, fwhm, hom_dip, pair_rate, smooth_spectrum, spectral_fwhm
from ppspdc.poling import PolingSpec, build_domains, design_basic_layer
from ppspdc.schmidt import cooperativity, entropy, quasi_cw_schmidt, schmidt_decompose

from conftest import LAMBDA_DEG, LAMBDA_P, deg


def _domains(l0, n, zeta=0.0):
    return build_domains(PolingSpec(l0=l0, zeta=zeta, n_layers=n))


def _jsa(material, l0, n, grid, zeta=0.0, workers=None):
    return jsa_layer_sum(_domains(l0, n, zeta), grid, COLLINEAR, material, 25.0, workers=workers)


def _strictly(values, sign):
    d = np.diff(np.asarray(values, float))
    return bool(np.all(sign * d > 0))


@pytest.mark.criterion(1, "closed-form oracle: layer sum vs closed form, uniform poling")
def test_closed_form_oracle(checks, linbo3, degenerate):
    wp, ws0, l0 = degenerate
    start = time.perf_counter()
    worst, where = 0.0, None
    for n in (1, 2, 50, 1000):
        d = _domains(l0, n)
        for half in (37.5, 150.0, 555.0):
            g = FrequencyGrid(wp, ws0, half, 2049)
            a = jsa_layer_sum(d, g, COLLINEAR, linbo3, 25.0, workers=1).amplitude
            b = jsa_closed_form_uniform(g.omega_s, g.omega_i, l0, n, linbo3, 25.0)
            sel = np.abs(b) > 1e-12 * np.abs(b).max()
            r = float(np.max(np.abs(a - b)[sel] / np.abs(b)[sel]))
            if r > worst:
                worst, where = r, (n, half)
    elapsed = time.perf_counter() - start
    checks.check("max relative deviation", worst < 1e-10,
                 f"{worst:.3g} at N_L={where[0]}, half-span {where[1]} (limit 1e-10)")
    checks.check("runtime, one worker", elapsed < 60.0, f"{elapsed:.1f} s (limit 60 s)")
    checks.verify()


@pytest.mark.criterion(2, "QPM scaling: peak ratio 4, pair-rate ratio 2")
def test_qpm_scaling(checks, linbo3, nondegenerate):
    wp, ws0, l0 = nondegenerate
    # Centre point is the phase-matched frequency, where |a|^2 peaks.
    g = FrequencyGrid(wp, ws0, 140.0, 8193)
    c = g.n_points // 2
    i500 = _jsa(linbo3, l0, 500, g).intensity
    i1000 = _jsa(linbo3, l0, 1000, g).intensity
    ratio = i1000[c] / i500[c]
    checks.check("peak |a|^2 ratio 1000/500", abs(ratio - 4.0) < 1e-9,
                 f"{float(ratio)!r} (4 +- 1e-9)")
    # Rates over a grid holding both the signal and the idler lobe.
    full = FrequencyGrid(wp, 0.5 * wp, 600.0, 16385)
    r = pair_rate(_jsa(linbo3, l0, 1000, full)) / pair_rate(_jsa(linbo3, l0, 500, full))
    checks.check("pair-rate ratio 1000/500", abs(r - 2.0) < 0.04, f"{r:.4f} (2 +- 2%)")
    checks.verify()


@pytest.mark.criterion(3, "layer-length design 8.9000 / 8.9286 um +- 0.05")
def test_layer_length(checks, degenerate, nondegenerate):
    l_deg, l_non = degenerate[2], nondegenerate[2]
    checks.check("degenerate l0", abs(l_deg - 8.9000) <= 0.05, f"{l_deg:.5f} um")
    checks.check("non-degenerate l0", abs(l_non - 8.9286) <= 0.05, f"{l_non:.5f} um")
    checks.verify()


@pytest.mark.criterion(4, "HOM: degenerate dip to zero; non-degenerate beat")
def test_hom(checks, linbo3, degenerate, nondegenerate):
    wp, ws0, l0 = degenerate
    taus = np.linspace(-0.3, 0.3, 1201)
    prof = hom_dip(_jsa(linbo3, l0, 1000, FrequencyGrid(wp, ws0, 600.0, 4097)), taus)
    r0 = prof.rate[600]
    base = max(abs(prof.rate[0] - 1.0), abs(prof.rate[-1] - 1.0))
    checks.check("degenerate R_n(0)", r0 <= 1e-3, f"{r0:.3g} (<= 1e-3)")
    checks.check("degenerate baseline", base <= 1e-3, f"|R_n - 1| = {base:.3g} at |tau| = 0.3 ps")

    wp, ws0, l0 = nondegenerate
    taus = np.linspace(-0.5, 0.5, 4001)
    prof = hom_dip(_jsa(linbo3, l0, 1000, FrequencyGrid(wp, ws0, 95.0, 8193)), taus)
    beat = abs((wp - ws0) - ws0)
    period = beat_period(prof)
    expected = 2 * math.pi / beat
    checks.check("non-degenerate visibility < 1", prof.visibility < 1.0,
                 f"V = {prof.visibility:.4f}")
    checks.check("dip shifted from tau = 0", abs(prof.dip_position) > 10 * (taus[1] - taus[0]),
                 f"dip at {prof.dip_position:.4g} ps")
    checks.check("beat period", abs(period / expected - 1.0) < 0.02,
                 f"{period:.6g} ps vs 2pi/|w_i0 - w_s0| = {expected:.6g} ps")
    checks.verify()


@pytest.mark.criterion(5, "HOM widths: up with N_L (uniform), down with zeta")
def test_hom_widths(checks, linbo3, degenerate):
    wp, ws0, l0 = degenerate
    g = FrequencyGrid(wp, ws0, 600.0, 4097)
    taus = np.linspace(-0.15, 0.15, 3001)
    by_n = [fwhm(hom_dip(_jsa(linbo3, l0, n, g), taus)) for n in (250, 500, 1000)]
    by_z = [fwhm(hom_dip(_jsa(linbo3, l0, 1000, g, z), taus)) for z in (1e-7, 3e-7, 1e-6)]
    checks.check("dtau increases with N_L 250/500/1000", _strictly(by_n, +1),
                 ", ".join(f"{w:.4g}" for w in by_n) + " ps")
    checks.check("dtau decreases with zeta 1e-7/3e-7/1e-6", _strictly(by_z, -1),
                 ", ".join(f"{w:.4g}" for w in by_z) + " ps")
    checks.verify()


def _double_gaussian(sp, sm, half=25.0, n=501):
    x = np.linspace(-half, half, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    a = np.exp(-(X + Y) ** 2 / (4 * sp * sp) - (X - Y) ** 2 / (4 * sm * sm))
    return x, a.astype(complex)


@pytest.mark.criterion(6, "Schmidt suite")
def test_schmidt_suite(checks, linbo3, degenerate):
    # Normalization and the double-Gaussian oracle K = (s_p/s_m + s_m/s_p)/2.
    sp, sm = 1.0, 5.0
    x, a = _double_gaussian(sp, sm)
    dx = x[1] - x[0]
    res = schmidt_decompose(a * dx, dx, dx, modes=False)
    k_oracle = 0.5 * (sp / sm + sm / sp)
    k = res.cooperativity
    norm = abs(float(np.sum(res.eigenvalues ** 2)) - 1.0)
    checks.check("double-Gaussian K", abs(k / k_oracle - 1) < 0.02,
                 f"{k:.6f} vs oracle {k_oracle:.6f}")

    rng = np.random.default_rng(20240917)
    worst = -np.inf
    for _ in range(100):
        w = rng.dirichlet(np.full(rng.integers(1, 60), rng.uniform(0.05, 5.0)))
        lam = np.sqrt(w)
        worst = max(worst, math.log2(cooperativity(lam)) - entropy(lam))
    checks.check("log2 K <= E on 100 random spectra", worst <= 1e-9,
                 f"max(log2 K - E) = {worst:.3g}")

    base = res.eigenvalues
    x2, a2 = _double_gaussian(1.0, 3.0, half=15.0, n=301)
    base = schmidt_decompose(a2, modes=False).eigenvalues
    dev = 0.0
    for _ in range(20):
        c = rng.normal(size=(2, 4))
        f = sum(c[0, j] * np.cos((j + 1) * x2 / 4 + c[1, j]) for j in range(4)) * 3
        g = rng.normal() * x2 ** 2 / 10 + rng.normal() * x2
        ph = np.exp(1j * (f[:, None] + g[None, :]))
        lam = schmidt_decompose(a2 * ph, modes=False).eigenvalues
        m = min(lam.size, base.size)
        dev = max(dev, float(np.max(np.abs(lam[:m] - base[:m]))),
                  float(np.max(lam[m:], initial=0)), float(np.max(base[m:], initial=0)))
    checks.check("phase invariance, 20 separable phases", dev < 1e-8, f"max |d lambda| = {dev:.3g}")

    # Chirped vs uniform at N_L = 1000, sigma_p = 1 rad/ps.
    wp, ws0, l0 = degenerate
    step, half = 0.125, 350.0
    n = 2 * int(round(half / step)) + 1
    ax = ws0 + step * (np.arange(n) - n // 2)
    out = {}
    for z in (0.0, 1e-6):
        out[z] = quasi_cw_schmidt(_domains(l0, 1000, z), ax, wp - ax[::-1], wp, 1.0, linbo3, 25.0)
        norm = max(norm, abs(float(np.sum(out[z].eigenvalues ** 2)) - 1.0))
    (eu, ku), (ec, kc) = [(out[z].entropy, out[z].cooperativity) for z in (0.0, 1e-6)]
    checks.check("sum lambda^2 = 1", norm <= 1e-10, f"max deviation {norm:.3g}")
    checks.check("E chirped > uniform", ec > eu, f"{ec:.4f} vs {eu:.4f} bits")
    checks.check("K chirped > uniform", kc > ku, f"{kc:.2f} vs {ku:.2f}")
    checks.verify()


@pytest.mark.criterion(7, "chirp trade-off and fixed-endpoint N*zeta rule")
def test_chirp_tradeoff(checks, linbo3, degenerate):
    wp, ws0, l0 = degenerate
    g = FrequencyGrid(wp, ws0, 600.0, 4097)
    rates, widths = [], []
    for z in (0.0, 1e-7, 3e-7, 1e-6):
        j = _jsa(linbo3, l0, 1000, g, z)
        rates.append(pair_rate(j))
        widths.append(spectral_fwhm(j))
    checks.check("rate strictly decreasing", _strictly(rates, -1),
                 ", ".join(f"{r:.4g}" for r in rates))
    checks.check("spectral FWHM strictly increasing", _strictly(widths, +1),
                 ", ".join(f"{w:.4g}" for w in widths) + " rad/ps")
    cols, rows = run_sweep(defaults(), "n_layers", [500, 1000, 2000], "pairs", fixed_endpoint=True)
    nz = np.array([r[3] for r in rows])
    spread = float((nz.max() - nz.min()) / nz.mean())
    checks.check("fixed-endpoint N*zeta variation over N_L 500-2000", spread < 0.2,
                 f"{spread:.3%} (< 20%)")
    checks.verify()


@pytest.mark.criterion(8, "angular suite")
def test_angular_suite(checks, linbo3, degenerate, nondegenerate):
    wp, ws0, l0 = degenerate
    lo = collinear_optimized_l0(linbo3, wp, ws0, 25.0, 1000, l0, 400.0, 1601)
    th = np.radians(np.linspace(0.0, 8.0, 81))

    def cut(z):
        s = AngularSetup(_domains(lo, 1000, z), linbo3, 25.0, wp, ws0, 400.0, 1601,
                         uniform_l0=lo if z == 0 else None)
        return photon_number_map(s, th, [0.0]).values[:, 0]

    u, c = cut(0.0), cut(1e-6)
    checks.check("collinear-optimized map peaks at theta_s = 0", int(np.argmax(u)) == 0,
                 f"maximum at {deg(th[np.argmax(u)]):.2f} deg (l0 = {lo:.5f} um)")
    flux = cumulative_trapezoid(u * np.sin(th), th, initial=0.0)
    inside = flux[50] / flux[-1]
    checks.check("support within 5 deg", inside >= 0.99, f"{inside:.4%} of flux inside 5 deg")

    def half_radius(v):
        v = v / v.max()
        return deg(th[np.nonzero(v >= 0.5)[0][-1]])

    ru, rc = half_radius(u), half_radius(c)
    on_axis = c[0] / c.max()
    checks.check("chirped cut is a plateau vs the uniform peak",
                 rc >= 2 * ru and on_axis >= 0.5,
                 f"half-max radius {rc:.2f} vs {ru:.2f} deg, chirped on-axis {on_axis:.2f} of max")

    s = AngularSetup(_domains(lo, 1000, 1e-6), linbo3, 25.0, wp, ws0, 620.0, 4961)
    sp = [smooth_spectrum(x, 25.0) for x in angular_spectrum(s, np.radians([0.0, 3.0]))]
    b0, b3 = count_bands(sp[0]), count_bands(sp[1])
    checks.check("angle-resolved spectrum single-peaked at 0 deg", b0 == 1, f"{b0} band(s)")
    checks.check("angle-resolved spectrum double-peaked at 3 deg", b3 == 2, f"{b3} band(s)")

    s = AngularSetup(_domains(lo, 1000), linbo3, 25.0, wp, ws0, 400.0, 3201, uniform_l0=lo)
    ca = correlation_area(s, math.radians(1.0), 0.0, 100.0, np.radians(np.linspace(-1, 1, 41)),
                          np.radians(np.linspace(-10, 10, 5)), cut_points=801)
    checks.check("correlation area bimodal at theta_s = 1 deg (uniform)", ca.radial_peaks == 2,
                 f"{ca.radial_peaks} radial maxima")

    wp, ws0, l0 = nondegenerate
    s = AngularSetup(_domains(l0, 1000), linbo3, 25.0, wp, ws0, 20.0, 161)
    zetas = (0.0, 1e-7, 2e-7, 5e-7, 1e-6)
    widths, mono = correlation_width_vs_chirp(
        s, zetas, l0, 1000, 0.0, 0.0, 2.0, np.radians(np.linspace(-8, 8, 17)),
        np.radians(np.linspace(-1.5, 1.5, 9)), Filter(ws0, 1.0), cut_points=3201)
    checks.check("radial correlation width increases with zeta over a decade", mono,
                 ", ".join(f"{deg(w):.3f}" for w in widths) + " deg")
    checks.verify()


@pytest.mark.criterion(9, "temperature scan: spot, growing ring, filled disc")
def test_temperature_scan(checks, linbo3):
    from ppspdc.constants import omega_from_wavelength
    t_design = 100.0
    wp = omega_from_wavelength(LAMBDA_P)
    l0 = design_basic_layer(linbo3, LAMBDA_P, LAMBDA_DEG, LAMBDA_DEG, t_design)
    temps = np.arange(40.0, 121.0, 1.0)
    th = np.radians(np.linspace(0.0, 3.0, 61))

    def scan(z):
        s = AngularSetup(_domains(l0, 1000, z), linbo3, t_design, wp, 0.5 * wp, 400.0, 1601)
        return temperature_scan(s, temps, th, 14.0).values

    v = scan(1e-7)
    k = int(np.argmax(v[0]))
    t_opt = temps[k]
    checks.check("on-axis maximum at the optimum temperature", ring_radius(th, v[:, k]) == 0.0,
                 f"T_opt = {t_opt:g} C, profile maximum at {deg(ring_radius(th, v[:, k])):.3f} deg")
    cold = list(range(k - 5, -1, -5))   # 5 C steps of detuning below the optimum
    radii = [deg(ring_radius(th, v[:, j])) for j in cold]
    checks.check("ring radius grows with |dT|", radii[0] > 0 and _strictly(radii, +1),
                 ", ".join(f"{temps[j]:g}C:{r:.3f}" for j, r in zip(cold, radii)) + " deg")

    w = scan(1e-6)
    excess = max(float(w[:, j].max() / w[0, j]) for j in cold)
    checks.check("zeta = 1e-6 gives a filled disc (off-axis <= 110% of on-axis)", excess <= 1.10,
                 f"worst off-axis / on-axis = {excess:.3f}")
    checks.verify()


@pytest.mark.criterion(10, "determinism across worker counts 1 and 4")
def test_determinism(checks, tmp_path, monkeypatch):
    runs = {
        "spectrum": [],
        "hom": [],
        "schmidt": ["--set", "schmidt.half_span=40"],
        "angular-map": ["--set", "poling.zeta_per_um2=0", "--set", "angular.n_theta=11",
                        "--set", "angular.n_psi=3"],
        "correlation-area": ["--set", "correlation.n_d_psi=5", "--set", "correlation.n_d_theta=21"],
    }
    for cmd, extra in runs.items():
        texts = []
        for w in (1, 4):
            monkeypatch.setenv("PPSPDC_MAX_WORKERS", str(w))
            out = tmp_path / f"{cmd}-{w}"
            code, res = execute(["--out", str(out), "--workers", str(w)] + extra + [cmd])
            assert code == 0
            texts.append((out / f"{res.stem}.csv").read_bytes())
        checks.check(f"{cmd} CSV identical", texts[0] == texts[1], f"{len(texts[0])} bytes")
    checks.verify()
