import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbpf.circuit import LISTED_CELL, sweep
from mbpf.metrics import REFERENCE_MASK, SpecMask, compute_metrics, evaluate_mask
from mbpf.synthesis import (
    DEFAULT_BOUNDS,
    NO_BAND_PENALTY,
    PARAM_NAMES,
    Lcg64,
    SynthesisConfig,
    cost,
    nelder_mead,
    restart_points,
    synthesize,
    tightened,
)
from mbpf.twoport import FrequencyGrid

SWAPPED = LISTED_CELL.with_(swap_inductors=True)


def test_lcg_sequence():
    g = Lcg64(0)
    assert g.next_u64() == 1442695040888963407
    # second step by hand, modulo 2**64
    assert g.next_u64() == (1442695040888963407 * 6364136223846793005 + 1442695040888963407) % 2**64
    u = [Lcg64(7).uniform() for _ in range(3)]
    assert u[0] == u[1] == u[2]
    g = Lcg64(123)
    xs = [g.uniform() for _ in range(1000)]
    assert 0 <= min(xs) and max(xs) < 1
    assert abs(np.mean(xs) - 0.5) < 0.05


def test_nm_quadratic():
    r = nelder_mead(lambda x: float(np.sum((x - 3.0) ** 2)), [0.0], step=1.0, tol=1e-10)
    assert r.converged
    assert r.x[0] == pytest.approx(3.0, abs=1e-8)


def test_nm_anisotropic():
    r = nelder_mead(lambda x: x[0] ** 2 + 10 * x[1] ** 2, [2.0, -1.5], step=0.5, tol=1e-10)
    assert np.allclose(r.x, 0, atol=1e-8)


def test_nm_rosenbrock():
    def rosen(x):
        return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2

    r = nelder_mead(rosen, [-1.2, 1.0], step=0.5, tol=1e-10, max_iterations=2000)
    assert r.nit < 2000
    assert np.allclose(r.x, [1, 1], atol=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_nm_convex_quadratics(k, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(k, k))
    h = a @ a.T + k * np.eye(k)
    x_star = rng.uniform(-2, 2, size=k)

    def f(x):
        d = x - x_star
        return float(d @ h @ d)

    r = nelder_mead(f, np.zeros(k), step=0.5, tol=1e-9, max_iterations=20000)
    assert np.allclose(r.x, x_star, atol=1e-5)


def test_nm_history_monotone_and_bounds():
    r = nelder_mead(lambda x: float(np.sum(x**2)), [1.0, 1.0], step=0.5, lower=[0.5, -1], upper=[2, 2])
    assert all(b <= a for a, b in zip(r.history, r.history[1:]))
    assert r.x[0] == pytest.approx(0.5)
    assert abs(r.x[1]) < 1e-6


def test_nm_target_stops_early():
    r = nelder_mead(lambda x: float(abs(x[0])), [5.0], step=1.0, target=1.0)
    assert r.fun <= 1.0 and r.converged


def test_restart_points_deterministic_and_in_box():
    cfg = SynthesisConfig(seed=42)
    a, b = restart_points(cfg), restart_points(SynthesisConfig(seed=42))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    lo, hi = cfg.log_box()
    assert np.allclose(a[0], 0.5 * (lo + hi))
    for x in a[1:]:
        assert np.all(x >= lo) and np.all(x <= hi)
    c = restart_points(SynthesisConfig(seed=43))
    assert not np.array_equal(a[1], c[1])


def test_config_validation():
    with pytest.raises(ValueError):
        SynthesisConfig(bounds={"c_farad": (2e-12, 1e-12)})
    with pytest.raises(ValueError):
        SynthesisConfig(bounds={"nope": (1, 2)})
    assert set(SynthesisConfig().bounds) == set(PARAM_NAMES) == set(DEFAULT_BOUNDS)


def test_tightened_mask():
    t = tightened(REFERENCE_MASK, 0.5, 0.5)
    assert t.min_rl_db == 26.5
    assert [s.min_attenuation_db for s in t.stopband] == [52.5, 20.5]
    assert t.f0_tol == pytest.approx(0.005)


def test_cost_penalty_without_band():
    cfg = SynthesisConfig(grid=FrequencyGrid(0.4e9, 1.2e9, 201), stages=1)
    # as-labeled cell passes above 2.5 GHz, so nothing is bracketed here
    assert cost(LISTED_CELL, REFERENCE_MASK, cfg) >= NO_BAND_PENALTY


def test_cost_matches_mask_evaluation():
    cfg = SynthesisConfig(grid=FrequencyGrid(0.4e9, 1.2e9, 801), stages=3)
    sw = sweep(SWAPPED, cfg.grid, 3)
    _, c = evaluate_mask(sw, REFERENCE_MASK, compute_metrics(sw))
    assert cost(SWAPPED, REFERENCE_MASK, cfg) == c


def test_synthesize_meets_reachable_mask():
    grid = FrequencyGrid(0.4e9, 1.2e9, 801)
    m = compute_metrics(sweep(SWAPPED, grid, 2))
    mask = SpecMask.from_metrics(m, slack_db=3.0)
    cfg = SynthesisConfig(grid=grid, stages=2, initial=SWAPPED.with_(swap_inductors=False, c_farad=3e-12),
                          restart_count=2)
    res = synthesize(mask, cfg)
    assert res.converged and res.violations == []
    _, c = evaluate_mask(sweep(res.params, grid, 2), mask)
    assert c == 0.0 == res.cost


def test_synthesize_deterministic():
    cfg = dict(grid=FrequencyGrid(0.4e9, 1.2e9, 201), stages=1, restart_count=1, max_iterations=60, reseeds=0)
    a = synthesize(REFERENCE_MASK, SynthesisConfig(**cfg))
    b = synthesize(REFERENCE_MASK, SynthesisConfig(**cfg))
    assert a.to_json() == b.to_json()


def test_infeasible_bounds_reports_best_effort():
    # tank inductance pinned so small that no band reaches 730 MHz
    bounds = {"l_l_henry": (0.01e-9, 0.02e-9), "c_r_farad": (0.5e-12, 0.6e-12)}
    cfg = SynthesisConfig(bounds=bounds, grid=FrequencyGrid(0.4e9, 1.2e9, 201), stages=1,
                          restart_count=1, max_iterations=40, reseeds=0)
    res = synthesize(REFERENCE_MASK, cfg)
    assert not res.converged
    assert res.cost > 0
    for k in PARAM_NAMES:
        lo, hi = cfg.bounds[k]
        assert lo * (1 - 1e-12) <= getattr(res.params, k) <= hi * (1 + 1e-12)
