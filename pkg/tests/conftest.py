import math

import numpy as np
import pytest
from hypothesis import strategies as st

from mbpf.circuit import UnitCellParams

# element ranges wide enough to cover the fabricated values with margin
RANGES = {
    "c_l_farad": (0.05e-12, 5e-12),
    "l_r_henry": (0.05e-9, 30e-9),
    "c_farad": (0.1e-12, 20e-12),
    "c_r_farad": (0.5e-12, 20e-12),
    "l_l_henry": (0.5e-9, 50e-9),
}


def log_uniform(lo, hi):
    return st.floats(math.log(lo), math.log(hi)).map(math.exp)


@st.composite
def unit_cells(draw, **fixed):
    vals = {k: draw(log_uniform(*r)) for k, r in RANGES.items()}
    vals["topology"] = draw(st.sampled_from(["symmetric_t", "l_section"]))
    vals["include_series_inductor"] = draw(st.booleans())
    vals["swap_inductors"] = draw(st.booleans())
    vals.update(fixed)
    return UnitCellParams(**vals)


def random_cell(rng: np.random.Generator, **fixed) -> UnitCellParams:
    lo = np.log([r[0] for r in RANGES.values()])
    hi = np.log([r[1] for r in RANGES.values()])
    vals = dict(zip(RANGES, map(float, np.exp(rng.uniform(lo, hi)))))
    vals["topology"] = ("symmetric_t", "l_section")[int(rng.integers(2))]
    vals.update(fixed)
    return UnitCellParams(**vals)


# -- acceptance summary -------------------------------------------------------

_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome))
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
