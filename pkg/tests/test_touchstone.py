from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbpf.circuit import LISTED_CELL, sweep
from mbpf.dispersion import dispersion_curve
from mbpf.errors import TouchstoneError, UnsupportedError
from mbpf.touchstone import (
    DISPERSION_COLUMNS,
    SWEEP_COLUMNS,
    TouchstoneOptions,
    parse_touchstone,
    read_touchstone,
    write_csv,
    write_touchstone,
)
from mbpf.twoport import FrequencyGrid, SweepTable, group_delay

FIX = Path(__file__).parent / "fixtures"
SWAPPED = LISTED_CELL.with_(swap_inductors=True)
# worst-case relative error of each format's printed precision
TOL = {"RI": 1e-11, "MA": 1e-10, "DB": 1e-9}


def sample_sweep(points=401, stages=2):
    return sweep(SWAPPED, FrequencyGrid(0.3e9, 1.2e9, points), stages)


def test_option_line():
    assert TouchstoneOptions().option_line == "# GHZ S MA R 50"
    assert TouchstoneOptions("mhz", "s", "ri", 75.5).option_line == "# MHZ S RI R 75.5"
    with pytest.raises(UnsupportedError):
        TouchstoneOptions(parameter="Y")


def test_identity_row():
    f = np.array([1e9])
    sw = SweepTable(f, [0j], [1 + 0j], [1 + 0j], [0j])
    text = write_touchstone(sw, TouchstoneOptions("GHZ", "S", "RI"))
    row = text.strip().splitlines()[-1].split()
    assert row[0] == "1"
    assert [float(x) for x in row[1:]] == [0, 0, 1, 0, 1, 0, 0, 0]
    db_row = write_touchstone(sw, TouchstoneOptions("GHZ", "S", "DB")).strip().splitlines()[-1].split()
    assert db_row[3] == "0.000000000"


@pytest.mark.parametrize("fmt", ["RI", "MA", "DB"])
@pytest.mark.parametrize("unit", ["HZ", "KHZ", "MHZ", "GHZ"])
def test_roundtrip(fmt, unit):
    sw = sample_sweep()
    back, opts, warns = parse_touchstone(write_touchstone(sw, TouchstoneOptions(unit, "S", fmt)))
    assert warns == [] and opts.format == fmt and opts.frequency_unit == unit
    assert np.array_equal(back.frequency_hz, sw.frequency_hz)
    for name in ("s11", "s21", "s12", "s22"):
        a, b = getattr(sw, name), getattr(back, name)
        assert np.all(np.abs(a - b) <= TOL[fmt] * np.maximum(np.abs(a), 1e-300))


@settings(max_examples=200)
@given(st.floats(1.0, 1e12, allow_subnormal=False), st.sampled_from(["HZ", "KHZ", "MHZ", "GHZ"]))
def test_frequency_exact(f, unit):
    sw = SweepTable(np.array([f]), [0.1j], [0.9 + 0j], [0.9 + 0j], [0.1j])
    back, _, _ = parse_touchstone(write_touchstone(sw, TouchstoneOptions(unit, "S", "RI")))
    assert back.frequency_hz[0] == f


def test_reference_from_sweep():
    sw = sweep(SWAPPED, FrequencyGrid(0.5e9, 1e9, 5), 1, z0_ohm=75.0)
    text = write_touchstone(sw, TouchstoneOptions(format="RI"))
    assert "# GHZ S RI R 75" in text
    assert parse_touchstone(text)[0].z0_ohm == 75.0


def test_default_options_and_comments():
    body = "! only data\n0.7 1 0 0.5 90 0.5 90 1 0\n"
    sw, opts, _ = parse_touchstone(body)
    assert opts == TouchstoneOptions()
    assert sw.frequency_hz[0] == 0.7e9
    assert sw.s21[0] == pytest.approx(0.5j)


def test_unsorted_rows_are_sorted_with_warning():
    body = "# HZ S RI R 50\n2 0 0 1 0 1 0 0 0\n1 0.5 0 1 0 1 0 0 0\n"
    sw, _, warns = parse_touchstone(body)
    assert list(sw.frequency_hz) == [1.0, 2.0]
    assert sw.s11[0] == 0.5
    assert warns


@pytest.mark.parametrize(
    "name, line, exc",
    [
        ("short_row.s2p", 4, TouchstoneError),
        ("v2_keyword.s2p", 1, UnsupportedError),
        ("duplicate_freq.s2p", 3, TouchstoneError),
        ("nan_field.s2p", 3, TouchstoneError),
        ("two_option_lines.s2p", 3, TouchstoneError),
    ],
)
def test_malformed_fixtures(name, line, exc):
    with pytest.raises(exc) as info:
        read_touchstone(FIX / name)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_other_malformations():
    with pytest.raises(TouchstoneError):
        parse_touchstone("# GHZ S RI R 50\n")
    with pytest.raises(TouchstoneError):
        parse_touchstone("# GHZ S XX R 50\n1 0 0 1 0 1 0 0 0\n")
    with pytest.raises(TouchstoneError):
        parse_touchstone("# GHZ S RI R\n1 0 0 1 0 1 0 0 0\n")
    with pytest.raises(TouchstoneError):
        parse_touchstone("1 0 0 1 0 one 0 0 0\n")
    with pytest.raises(TouchstoneError):
        parse_touchstone("0 0 0 1 0 1 0 0 0\n")


def test_fixture_file_reads():
    sw, opts, _ = read_touchstone(FIX / "swapped_3cell.s2p")
    assert opts.format == "DB" and opts.frequency_unit == "MHZ"
    assert len(sw) == 901


def test_sweep_csv():
    sw = sample_sweep(points=51)
    lines = write_csv(sw).splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 52
    row = [float(x) for x in lines[1].split(",")]
    assert row[0] == sw.frequency_hz[0]
    assert complex(row[3], row[4]) == sw.s21[0]


def test_group_delay_csv():
    lines = write_csv(group_delay(sample_sweep(points=11))).splitlines()
    assert lines[0] == "frequency_hz,group_delay_s"
    assert len(lines) == 12


def test_dispersion_csv():
    curve = dispersion_curve(SWAPPED, FrequencyGrid(0.4e9, 1.2e9, 81))
    lines = write_csv(curve).splitlines()
    assert lines[0] == ",".join(DISPERSION_COLUMNS)
    assert len(lines) == 1 + len(curve)
    regimes = {ln.rsplit(",", 1)[1] for ln in lines[1:]}
    assert {"passband", "stopband"} <= regimes


def test_csv_rejects_unknown():
    with pytest.raises(TypeError):
        write_csv([1, 2, 3])
