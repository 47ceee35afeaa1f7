import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import unit_cells
from mbpf.circuit import LISTED_CELL, series_impedance, shunt_admittance
from mbpf.dispersion import (
    UnpairedEdgeWarning,
    classify,
    classify_g,
    closed_form_cutoffs,
    consistency_report,
    default_search_grid,
    dispersion_curve,
    find_band_edges,
    transmission_zero_closed,
    transmission_zero_numeric,
)
from mbpf.errors import NotFoundError
from mbpf.twoport import FrequencyGrid

SWAPPED = LISTED_CELL.with_(swap_inductors=True)
TWO_PI = 2 * math.pi


def reduced_edges_oracle(p):
    """Edges of the cell with no series inductor from g = +1 and g = -1.

    g = +1 needs Y = 0 (tank resonance).  g = -1 needs Z*Y = -4, which with
    Z = 1/(jwC_L) is linear in w^2.
    """
    L, C, CR, CL = p.tank_inductance_henry, p.c_farad, p.c_r_farad, p.c_l_farad
    w2_up = 1 / (L * CR)
    w2_lo = (C + 4 * CL) / (L * (C * CR + 4 * CL * C + 4 * CL * CR))
    return math.sqrt(w2_lo) / TWO_PI, math.sqrt(w2_up) / TWO_PI


def test_closed_forms_swapped():
    cf = closed_form_cutoffs(SWAPPED)
    assert cf.f_cl_hz == pytest.approx(711.08e6, rel=2e-5)
    assert cf.f_cu_hz == pytest.approx(774.48e6, rel=2e-5)
    assert transmission_zero_closed(SWAPPED) == pytest.approx(629.80e6, rel=2e-5)


def test_closed_forms_as_labeled():
    cf = closed_form_cutoffs(LISTED_CELL)
    assert cf.f_cl_hz == pytest.approx(2727.66e6, rel=2e-5)
    assert cf.f_cu_hz == pytest.approx(2970.84e6, rel=2e-5)
    assert transmission_zero_closed(LISTED_CELL) == pytest.approx(2415.88e6, rel=2e-5)


@settings(max_examples=200)
@given(unit_cells(include_series_inductor=False))
def test_closed_forms_match_reduced_oracle(p):
    lo, hi = reduced_edges_oracle(p)
    cf = closed_form_cutoffs(p)
    assert cf.f_cl_hz == pytest.approx(lo, rel=1e-12)
    assert cf.f_cu_hz == pytest.approx(hi, rel=1e-12)


def test_classify_g_values():
    pt = classify_g(2.0)
    assert pt.regime == "stopband"
    assert pt.alpha_l_neper == pytest.approx(1.3169578969248166, rel=1e-12)
    assert pt.beta_l_rad == 0.0
    pt = classify_g(-2.0)
    assert pt.regime == "stopband" and pt.beta_l_rad == math.pi
    pt = classify_g(0.5)
    assert pt.regime == "passband"
    assert pt.beta_l_rad == pytest.approx(math.pi / 3)
    assert pt.alpha_l_neper == 0.0
    assert classify_g(1.0 + 5e-10).regime == "edge"
    assert classify_g(-1.0).regime == "edge"


def test_classify_uses_cell_immittances():
    f = 740e6
    g = 1 + series_impedance(SWAPPED, f) * shunt_admittance(SWAPPED, f) / 2
    pt = classify(SWAPPED, f)
    assert pt.g == g
    assert pt.regime == "passband"


def test_numeric_edges_without_series_inductor_match_closed_forms():
    for base in (LISTED_CELL, SWAPPED):
        p = base.with_(include_series_inductor=False)
        cf = closed_form_cutoffs(p)
        bands = find_band_edges(p, FrequencyGrid(0.5 * cf.f_cl_hz, 1.2 * cf.f_cu_hz, 2001))
        assert len(bands) == 1
        assert bands[0].f_cl_hz == pytest.approx(cf.f_cl_hz, rel=1e-8)
        assert bands[0].f_cu_hz == pytest.approx(cf.f_cu_hz, rel=1e-8)


def test_numeric_edges_swapped_with_series_inductor():
    bands = find_band_edges(SWAPPED, FrequencyGrid(0.4e9, 1.2e9, 4001))
    assert len(bands) == 1
    cf = closed_form_cutoffs(SWAPPED)
    assert bands[0].f_cl_hz == pytest.approx(cf.f_cl_hz, rel=1e-3)
    assert bands[0].f_cu_hz == pytest.approx(cf.f_cu_hz, rel=1e-9)


def test_as_labeled_with_series_inductor_splits_band():
    # the series resonance at 2.863 GHz sits inside the reduced band
    bands = find_band_edges(LISTED_CELL, FrequencyGrid(1e9, 4.5e9, 8001))
    edges = [(round(b.f_cl_hz / 1e6, 1), round(b.f_cu_hz / 1e6, 1)) for b in bands]
    assert edges[0] == pytest.approx((2536.3, 2863.1), abs=0.2)
    assert edges[1][0] == pytest.approx(2970.8, abs=0.2)


def test_edges_bracket_passband_points():
    grid = FrequencyGrid(0.4e9, 1.2e9, 801)
    bands = find_band_edges(SWAPPED, grid)
    for pt in dispersion_curve(SWAPPED, grid):
        inside = any(b.f_cl_hz < pt.frequency_hz < b.f_cu_hz for b in bands)
        if pt.regime == "passband":
            assert inside
        elif pt.regime == "stopband":
            assert not inside


def test_unpaired_edge_warns():
    with pytest.warns(UnpairedEdgeWarning):
        bands = find_band_edges(SWAPPED, FrequencyGrid(0.74e9, 1.0e9, 501))
    assert bands == []


def test_edge_refinement_is_tight():
    bands = find_band_edges(SWAPPED.with_(include_series_inductor=False), FrequencyGrid(0.6e9, 0.9e9, 301))
    g_lo = classify(SWAPPED.with_(include_series_inductor=False), bands[0].f_cl_hz).re_g
    assert abs(g_lo + 1) < 1e-6


def test_transmission_zero_numeric():
    for p in (LISTED_CELL, SWAPPED):
        fz = transmission_zero_numeric(p, default_search_grid(p))
        assert fz == pytest.approx(transmission_zero_closed(p), rel=1e-8)


@settings(max_examples=100)
@given(unit_cells())
def test_transmission_zero_agrees_on_random_cells(p):
    fz = transmission_zero_numeric(p, default_search_grid(p, 2001))
    assert fz == pytest.approx(transmission_zero_closed(p), rel=1e-6)


def test_transmission_zero_not_found():
    with pytest.raises(NotFoundError):
        transmission_zero_numeric(SWAPPED, FrequencyGrid(0.7e9, 1.0e9, 101))


def test_consistency_report_swapped():
    rep = consistency_report(SWAPPED)
    assert rep.dev_f_cu < 1e-8
    assert rep.dev_f_cl < 1e-3
    assert rep.dev_f_z < 1e-8
    assert rep.sharpness_condition is False
    assert rep.closed_center_ratio == pytest.approx(1.0175, abs=5e-4)
    text = rep.to_text()
    assert "711.1 MHz" in text and "774.5 MHz" in text
    assert rep.to_dict()["closed_f_z_hz"] == rep.closed_f_z_hz


def test_consistency_report_as_labeled_flags():
    rep = consistency_report(LISTED_CELL)
    assert rep.closed_center_ratio > 3
    assert any("series inductor" in n for n in rep.notes)
    rep2 = consistency_report(LISTED_CELL.with_(include_series_inductor=False))
    assert rep2.dev_f_cl < 1e-8 and rep2.dev_f_cu < 1e-8


@settings(max_examples=50, deadline=None)
@given(unit_cells(include_series_inductor=False))
def test_numeric_and_closed_agree_without_series_inductor(p):
    cf = closed_form_cutoffs(p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnpairedEdgeWarning)
        bands = find_band_edges(p, FrequencyGrid(0.5 * cf.f_cl_hz, 1.5 * cf.f_cu_hz, 3001, "logarithmic"))
    match = [b for b in bands if abs(b.f_cu_hz - cf.f_cu_hz) < 1e-6 * cf.f_cu_hz]
    assert match
    assert match[0].f_cl_hz == pytest.approx(cf.f_cl_hz, rel=1e-6)


def test_curve_skips_pole():
    fz = transmission_zero_closed(SWAPPED)
    curve = dispersion_curve(SWAPPED, np.array([0.5e9, fz, 0.9e9]))
    assert all(np.isfinite(pt.g) for pt in curve)


def test_edge_within_one_step_of_pole():
    # f_cl sits 23 kHz above the shunt-arm pole; the scan step is ~77 kHz
    p = LISTED_CELL.with_(
        c_l_farad=math.exp(-27.0), l_r_henry=math.exp(-18.0), c_farad=math.exp(-29.5),
        c_r_farad=math.exp(-25.0), l_l_henry=math.exp(-17.0), include_series_inductor=False,
    )
    cf = closed_form_cutoffs(p)
    assert cf.f_cl_hz - transmission_zero_closed(p) < 25e3
    bands = find_band_edges(p, FrequencyGrid(0.5 * cf.f_cl_hz, 1.5 * cf.f_cu_hz, 3001, "logarithmic"))
    assert len(bands) == 1
    assert bands[0].f_cl_hz == pytest.approx(cf.f_cl_hz, rel=1e-8)
