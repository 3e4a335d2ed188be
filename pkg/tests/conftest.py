import pytest

from wbeuler.equilibrium import (
    constant_density_pair, isothermal_pair, nonisothermal_1d_pair, polytropic_pair,
    radial_general_pair,
)

# (label, factory) for every pair configuration the registry ships
PAIRS_1D = [
    ("isothermal-x", lambda: isothermal_pair("x", 1.0)),
    ("isothermal-x2", lambda: isothermal_pair("x2", 1.0)),
    ("isothermal-sin", lambda: isothermal_pair("sin2pix", 1.0)),
    ("polytropic-x2", lambda: polytropic_pair("x2", 1.2)),
    ("nonisothermal", nonisothermal_1d_pair),
    ("constant-density", lambda: constant_density_pair("x")),
]
PAIRS_2D = [
    ("isothermal-x+y", lambda: isothermal_pair("x+y", 1 / 1.21)),
    ("isothermal-y", lambda: isothermal_pair("y", 1 / 1.21)),
    ("isothermal-r", lambda: isothermal_pair("r", 1.0)),
    ("polytropic-x+y", lambda: polytropic_pair("x+y", 1.2)),
    ("radial", radial_general_pair),
    ("constant-density-2d", lambda: constant_density_pair("x+y")),
]


_ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criterion check")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=PAIRS_1D, ids=[p[0] for p in PAIRS_1D])
def pair_1d(request):
    return request.param[1]()


@pytest.fixture(params=PAIRS_2D, ids=[p[0] for p in PAIRS_2D])
def pair_2d(request):
    return request.param[1]()
