import math

import pytest

from ppspdc.constants import omega_from_wavelength
from ppspdc.materials import load_material
from ppspdc.poling import design_basic_layer, idler_wavelength

_CRITERIA = {}

LAMBDA_P = 0.7525
LAMBDA_DEG = 1.505
LAMBDA_S_NONDEG = 1.3921


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


class Checks:
    """Named sub-checks of one acceptance criterion; all are evaluated before asserting."""

    def __init__(self):
        self.items = []

    def check(self, name, ok, detail=""):
        self.items.append((name, bool(ok), detail))
        return bool(ok)

    def verify(self):
        bad = [f"{n}: {d}" for n, ok, d in self.items if not ok]
        assert not bad, "failed sub-checks:\n  " + "\n  ".join(bad)


@pytest.fixture
def checks(request):
    c = Checks()
    request.node.user_properties.append(("checks", c))
    return c


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        found = [v for k, v in item.user_properties if k == "checks"]
        _CRITERIA[marker.args[0]] = (marker.args[1], rep.passed, found[0].items if found else [])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, items = _CRITERIA[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
        for name, sub_ok, detail in items:
            tr.write_line(f"      [{'ok' if sub_ok else 'FAIL'}] {name}  {detail}")
    passed = sum(ok for _, ok, _ in _CRITERIA.values())
    tr.write_line(f"{passed}/{len(_CRITERIA)} acceptance criteria pass")


# -- shared physics fixtures ----------------------------------------------

@pytest.fixture(scope="session")
def linbo3():
    return load_material("LiNbO3")


@pytest.fixture(scope="session")
def degenerate(linbo3):
    """(omega_p0, omega_s0, l0) for the degenerate 1505 nm fixture at 25 C."""
    l0 = design_basic_layer(linbo3, LAMBDA_P, LAMBDA_DEG, LAMBDA_DEG, 25.0)
    return omega_from_wavelength(LAMBDA_P), omega_from_wavelength(LAMBDA_DEG), l0


@pytest.fixture(scope="session")
def nondegenerate(linbo3):
    """(omega_p0, omega_s0, l0) for the non-degenerate fixture; idler from energy conservation."""
    li = idler_wavelength(LAMBDA_P, LAMBDA_S_NONDEG)
    l0 = design_basic_layer(linbo3, LAMBDA_P, LAMBDA_S_NONDEG, li, 25.0)
    return omega_from_wavelength(LAMBDA_P), omega_from_wavelength(LAMBDA_S_NONDEG), l0


def deg(x):
    return math.degrees(x)
