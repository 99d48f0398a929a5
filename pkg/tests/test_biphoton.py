import math

import numpy as np
import pytest
from scipy.integrate import quad

from ppspdc.biphoton import (
    COLLINEAR,
    Angles,
    FrequencyGrid,
    JsaSlice,
    closed_form_factor,
    jsa_closed_form_uniform,
    jsa_layer_sum,
    normalization_C,
    phase_mismatch,
    pump_line,
    quasi_cw_amplitude,
    structure_factor,
    tabulated_structure_factor,
)
from ppspdc.errors import ConfigError
from ppspdc.poling import PolingSpec, build_domains


def _quad_factor(domains, dk):
    # Direct numerical integral of chi2(z) exp(i dk z), one domain at a time.
    re = im = 0.0
    for s, a, b in zip(domains.signs, domains.boundaries[:-1], domains.boundaries[1:]):
        re += s * quad(lambda z: math.cos(dk * z), a, b, epsabs=1e-13)[0]
        im += s * quad(lambda z: math.sin(dk * z), a, b, epsabs=1e-13)[0]
    return complex(re, im)


@pytest.mark.parametrize("zeta", [0.0, 2e-4])
def test_structure_factor_matches_quadrature(zeta):
    d = build_domains(PolingSpec(l0=3.0, zeta=zeta, n_layers=9))
    for dk in (0.0, 0.4, math.pi / 3.0, 1.7):
        assert structure_factor(d, np.array([dk]))[0] == pytest.approx(_quad_factor(d, dk), abs=1e-10)


def test_closed_form_matches_layer_sum():
    l0, n = 8.9, 37
    d = build_domains(PolingSpec(l0=l0, n_layers=n))
    dk = np.linspace(math.pi / l0 - 0.05, math.pi / l0 + 0.05, 1001)
    a, b = structure_factor(d, dk), closed_form_factor(dk, l0, n)
    assert np.max(np.abs(a - b)) < 1e-10 * np.max(np.abs(b))


def test_qpm_peak_value():
    # First-order QPM: |Phi| = 2 N l0 / pi at dk = pi / l0.
    l0, n = 8.9, 1000
    d = build_domains(PolingSpec(l0=l0, n_layers=n))
    v = abs(structure_factor(d, np.array([math.pi / l0]))[0])
    assert v == pytest.approx(2 * n * l0 / math.pi, rel=1e-12)
    assert abs(closed_form_factor(math.pi / l0, l0, n)) == pytest.approx(v, rel=1e-12)


def test_grid_mirror_exact():
    g = FrequencyGrid(2500.0, 1250.0, 600.0, 4097)
    d = g.detunings
    assert np.array_equal(d, -d[::-1])
    assert d[2048] == 0.0
    assert np.allclose(g.omega_s + g.omega_i, 2500.0, rtol=0, atol=1e-12)
    assert g.spacing == pytest.approx(1200.0 / 4096)


@pytest.mark.parametrize("kw", [dict(n_points=1), dict(half_span=0.0), dict(omega_s_center=3000.0)])
def test_grid_validation(kw):
    args = dict(omega_p0=2500.0, omega_s_center=1250.0, half_span=10.0, n_points=11)
    args.update(kw)
    with pytest.raises(ConfigError):
        FrequencyGrid(**args)


def test_normalization_constant():
    c = normalization_C(1200.0, 1300.0, 2.1, 2.2)
    assert c == pytest.approx(math.pi * math.sqrt(1200 * 1300) / (1j * 299.792458 * math.sqrt(2.1 * 2.2)))


def test_jsa_layer_sum_uniform_equals_closed_form(linbo3, degenerate):
    wp, ws0, l0 = degenerate
    g = FrequencyGrid(wp, ws0, 300.0, 513)
    d = build_domains(PolingSpec(l0=l0, n_layers=200))
    j = jsa_layer_sum(d, g, COLLINEAR, linbo3, 25.0)
    b = jsa_closed_form_uniform(g.omega_s, g.omega_i, l0, 200, linbo3, 25.0)
    assert np.max(np.abs(j.amplitude - b)) < 1e-10 * np.max(np.abs(b))
    assert j.metadata["n_domains"] == 200


def test_degenerate_phase_matched_at_centre(linbo3, degenerate):
    wp, ws0, l0 = degenerate
    dk = phase_mismatch(ws0, wp - ws0, COLLINEAR, linbo3, 25.0, omega_p=wp)
    assert dk == pytest.approx(math.pi / l0, rel=1e-12)


def test_angles_reduce_to_collinear(linbo3, degenerate):
    wp, ws0, _ = degenerate
    a = phase_mismatch(ws0 + 5, wp - ws0 - 5, COLLINEAR, linbo3, 25.0)
    b = phase_mismatch(ws0 + 5, wp - ws0 - 5, Angles(0.0, 0.0, 0.0, 0.0), linbo3, 25.0)
    assert a == pytest.approx(b, rel=1e-14)


def test_tabulated_factor_accuracy():
    d = build_domains(PolingSpec(l0=8.9, zeta=1e-6, n_layers=1000))
    dk = np.sort(np.random.default_rng(3).uniform(math.pi / 8.9 - 0.02, math.pi / 8.9 + 0.02, 20000))
    exact = structure_factor(d, dk)
    approx = tabulated_structure_factor(d, dk)
    assert np.max(np.abs(approx - exact)) < 1e-7 * np.max(np.abs(exact))


def test_worker_count_bit_identical():
    d = build_domains(PolingSpec(l0=8.9, zeta=1e-6, n_layers=300))
    dk = np.linspace(0.3, 0.4, 10000)
    assert np.array_equal(structure_factor(d, dk, workers=1), structure_factor(d, dk, workers=3))


def test_pump_line_and_quasi_cw(linbo3, degenerate):
    wp, ws0, l0 = degenerate
    assert pump_line(wp + 2.0, wp, 1.0) == pytest.approx(math.exp(-1.0))
    d = build_domains(PolingSpec(l0=l0, n_layers=100))
    ax = ws0 + 0.25 * np.arange(-40, 41)
    a = quasi_cw_amplitude(d, ax, wp - ax[::-1], wp, 1.0, linbo3, 25.0)
    off = np.abs(ax[:, None] + (wp - ax[::-1])[None, :] - wp) > 7.0
    assert np.all(a[off] == 0) and np.any(a[~off] != 0)
    # On the ridge the quasi-cw amplitude equals the cw one.
    cw = jsa_layer_sum(d, FrequencyGrid(wp, ws0, 10.0, 81), COLLINEAR, linbo3, 25.0).amplitude
    assert np.allclose(np.diag(a[:, ::-1]), cw, rtol=1e-7, atol=0)


def test_slice_csv(linbo3, degenerate, tmp_path):
    wp, ws0, l0 = degenerate
    j = jsa_layer_sum(build_domains(PolingSpec(l0=l0, n_layers=10)), FrequencyGrid(wp, ws0, 5.0, 5),
                      COLLINEAR, linbo3, 25.0)
    j.write(tmp_path / "a.csv", tmp_path / "a.json")
    rows = (tmp_path / "a.csv").read_text().splitlines()
    assert rows[0] == "detuning[rad/ps],re_amplitude[rel],im_amplitude[rel]"
    back = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    assert np.array_equal(back[:, 1] + 1j * back[:, 2], j.amplitude)
    assert isinstance(j, JsaSlice) and (tmp_path / "a.json").exists()
