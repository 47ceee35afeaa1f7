"""Lumped-value synthesis against a spec mask with a restarted Nelder-Mead search.

The search runs over the natural log of the five element values, so every
proposal is positive and steps are multiplicative.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .circuit import UnitCellParams, sweep
from .errors import BandNotBracketedError, CoverageError
from .metrics import FilterMetrics, SpecMask, compute_metrics, evaluate_mask
from .twoport import FrequencyGrid, to_db

PARAM_NAMES = ("c_l_farad", "l_r_henry", "c_farad", "c_r_farad", "l_l_henry")

DEFAULT_BOUNDS = {
    "c_l_farad": (0.05e-12, 5e-12),
    "l_r_henry": (0.05e-9, 30e-9),
    "c_farad": (0.1e-12, 20e-12),
    "c_r_farad": (0.5e-12, 20e-12),
    "l_l_henry": (0.5e-9, 50e-9),
}

NO_BAND_PENALTY = 1e6

# 64-bit LCG, multiplier and increment from Knuth's MMIX
LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
# restart k is seeded with seed + k * RESTART_SEED_STEP (mod 2**64)
RESTART_SEED_STEP = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state * LCG_MULTIPLIER + LCG_INCREMENT) & _MASK64
        return self.state

    def uniform(self) -> float:
        """Float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53


@dataclass
class SynthesisConfig:
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    grid: FrequencyGrid = field(default_factory=lambda: FrequencyGrid(0.4e9, 1.2e9, 801))
    stages: int = 3
    z0_ohm: float = 50.0
    topology: str = "symmetric_t"
    include_series_inductor: bool = True
    initial: UnitCellParams | None = None
    max_iterations: int = 1500
    simplex_tol: float = 1e-6
    initial_step: float = 0.3
    restart_count: int = 6
    seed: int = 1
    margin_db: float = 0.5
    margin_rel: float = 0.5
    reseeds: int = 8
    restart_candidates: int = 64

    def __post_init__(self):
        bounds = dict(DEFAULT_BOUNDS)
        bounds.update({k: tuple(v) for k, v in self.bounds.items()})
        for k, (lo, hi) in bounds.items():
            if k not in PARAM_NAMES:
                raise ValueError(f"unknown parameter {k!r} in bounds")
            if not (0 < lo < hi):
                raise ValueError(f"bounds for {k} need 0 < lower < upper, got {(lo, hi)}")
        self.bounds = bounds
        if self.stages < 1 or self.restart_count < 0 or self.max_iterations < 1:
            raise ValueError("stages >= 1, restart_count >= 0 and max_iterations >= 1 required")
        if self.reseeds < 0 or self.restart_candidates < 1:
            raise ValueError("reseeds >= 0 and restart_candidates >= 1 required")

    def log_box(self):
        lo = np.array([math.log(self.bounds[k][0]) for k in PARAM_NAMES])
        hi = np.array([math.log(self.bounds[k][1]) for k in PARAM_NAMES])
        return lo, hi

    def params_from_log(self, x) -> UnitCellParams:
        vals = {k: float(math.exp(v)) for k, v in zip(PARAM_NAMES, x)}
        return UnitCellParams(
            **vals,
            include_series_inductor=self.include_series_inductor,
            topology=self.topology,
        )

    def to_dict(self) -> dict:
        return {
            "bounds": {k: list(v) for k, v in self.bounds.items()},
            "grid": asdict(self.grid),
            "stages": self.stages,
            "z0_ohm": self.z0_ohm,
            "topology": self.topology,
            "include_series_inductor": self.include_series_inductor,
            "initial": None if self.initial is None else self.initial.to_dict(),
            "max_iterations": self.max_iterations,
            "simplex_tol": self.simplex_tol,
            "initial_step": self.initial_step,
            "restart_count": self.restart_count,
            "seed": self.seed,
            "margin_db": self.margin_db,
            "margin_rel": self.margin_rel,
            "reseeds": self.reseeds,
            "restart_candidates": self.restart_candidates,
        }


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    nit: int
    converged: bool
    history: list


def nelder_mead(
    fun,
    x0,
    *,
    step=0.1,
    max_iterations: int = 2000,
    tol: float = 1e-8,
    lower=None,
    upper=None,
    target: float | None = None,
) -> OptimizeResult:
    """Minimise ``fun`` with the Nelder-Mead simplex method.

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    Points are clamped to ``[lower, upper]`` when given.  Stops when the
    largest vertex distance from the best vertex (max-norm) drops below
    ``tol``, when the best value reaches ``target``, or after
    ``max_iterations``.  ``history`` holds the best value after each
    iteration.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    k = x0.size
    lo = None if lower is None else np.broadcast_to(np.asarray(lower, float), (k,))
    hi = None if upper is None else np.broadcast_to(np.asarray(upper, float), (k,))

    def clamp(x):
        if lo is not None:
            x = np.maximum(x, lo)
        if hi is not None:
            x = np.minimum(x, hi)
        return x

    steps = np.broadcast_to(np.asarray(step, float), (k,))
    pts = [clamp(x0.copy())]
    for i in range(k):
        x = x0.copy()
        x[i] += steps[i]
        x = clamp(x)
        if np.array_equal(x, pts[0]):
            x = x0.copy()
            x[i] -= steps[i]
            x = clamp(x)
        pts.append(x)
    sim = np.array(pts)
    vals = np.array([float(fun(x)) for x in sim])

    history = []
    nit = 0
    converged = False
    while True:
        order = np.argsort(vals, kind="stable")
        sim, vals = sim[order], vals[order]
        if target is not None and vals[0] <= target:
            converged = True
            break
        if np.max(np.abs(sim[1:] - sim[0])) < tol:
            converged = True
            break
        if nit >= max_iterations:
            break
        nit += 1

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = clamp(centroid + (centroid - worst))
        fr = float(fun(xr))
        if fr < vals[0]:
            xe = clamp(centroid + 2.0 * (centroid - worst))
            fe = float(fun(xe))
            if fe < fr:
                sim[-1], vals[-1] = xe, fe
            else:
                sim[-1], vals[-1] = xr, fr
        elif fr < vals[-2]:
            sim[-1], vals[-1] = xr, fr
        else:
            if fr < vals[-1]:
                xc = clamp(centroid + 0.5 * (xr - centroid))
            else:
                xc = clamp(centroid + 0.5 * (worst - centroid))
            fc = float(fun(xc))
            if fc < min(fr, vals[-1]):
                sim[-1], vals[-1] = xc, fc
            else:
                for i in range(1, k + 1):
                    sim[i] = clamp(sim[0] + 0.5 * (sim[i] - sim[0]))
                    vals[i] = float(fun(sim[i]))
        history.append(float(vals.min()))

    return OptimizeResult(sim[0].copy(), float(vals[0]), nit, converged, history)


def _no_band_penalty(sw, mask: SpecMask) -> float:
    db = to_db(sw.s21)
    if db.size == 0:
        return 2 * NO_BAND_PENALTY
    k = int(np.argmax(db))
    pen = NO_BAND_PENALTY + float(db[k]) ** 2
    if mask.f0_target_hz is not None:
        pen += (100.0 * math.log(sw.frequency_hz[k] / mask.f0_target_hz)) ** 2
    return pen


def evaluate_params(params: UnitCellParams, mask: SpecMask, cfg: SynthesisConfig):
    """``(cost, metrics, violations)`` for one parameter set; metrics is None on penalty."""
    sw = sweep(params, cfg.grid, cfg.stages, cfg.z0_ohm)
    try:
        metrics = compute_metrics(sw) if mask.needs_band else None
        violations, c = evaluate_mask(sw, mask, metrics)
    except (BandNotBracketedError, CoverageError):
        return _no_band_penalty(sw, mask), None, None
    return c, metrics, violations


def cost(params: UnitCellParams, mask: SpecMask, cfg: SynthesisConfig) -> float:
    """Mask cost of ``params``; at least 1e6 when no usable pass-band is found."""
    return evaluate_params(params, mask, cfg)[0]


@dataclass
class SynthesisResult:
    params: UnitCellParams
    cost: float
    metrics: FilterMetrics | None
    violations: list
    iterations: int
    converged: bool
    simplex_tolerance_met: bool
    restarts_run: int
    best_restart: int
    history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "cost": self.cost,
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "violations": [v.to_dict() for v in self.violations],
            "iterations": self.iterations,
            "converged": self.converged,
            "simplex_tolerance_met": self.simplex_tolerance_met,
            "restarts_run": self.restarts_run,
            "best_restart": self.best_restart,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def restart_points(cfg: SynthesisConfig, objective=None) -> list[np.ndarray]:
    """Log-space start points: the initial guess (or box center), then one
    point per restart drawn from that restart's LCG stream.

    With an ``objective``, each restart draws ``cfg.restart_candidates``
    points and keeps the lowest-cost one (first on ties); uniform draws
    mostly land where no pass-band is bracketed at all.
    """
    lo, hi = cfg.log_box()
    if cfg.initial is not None:
        first = np.array([math.log(getattr(cfg.initial, k)) for k in PARAM_NAMES])
        first = np.clip(first, lo, hi)
    else:
        first = 0.5 * (lo + hi)
    starts = [first]
    n = cfg.restart_candidates if objective is not None else 1
    for r in range(1, cfg.restart_count + 1):
        rng = Lcg64((cfg.seed + r * RESTART_SEED_STEP) & _MASK64)
        cands = [lo + np.array([rng.uniform() for _ in PARAM_NAMES]) * (hi - lo) for _ in range(n)]
        starts.append(cands[0] if objective is None else min(cands, key=objective))
    return starts


def tightened(mask: SpecMask, margin_db: float, margin_rel: float) -> SpecMask:
    """``mask`` with every dB requirement raised by ``margin_db`` and the
    placement tolerances scaled by ``1 - margin_rel``."""
    stop = tuple(replace(s, min_attenuation_db=s.min_attenuation_db + margin_db) for s in mask.stopband)
    return replace(
        mask,
        max_il_db=None if mask.max_il_db is None else max(0.0, mask.max_il_db - margin_db),
        min_rl_db=None if mask.min_rl_db is None else mask.min_rl_db + margin_db,
        stopband=stop,
        f0_tol=mask.f0_tol * (1.0 - margin_rel),
        bw_tol=mask.bw_tol * (1.0 - margin_rel),
    )


def synthesize(mask: SpecMask, cfg: SynthesisConfig | None = None) -> SynthesisResult:
    """Search element values meeting ``mask``.

    Runs Nelder-Mead from each start point, rebuilding the simplex around the
    best vertex up to ``cfg.reseeds`` times while that still lowers the
    cost (the simplex tends to collapse early on this landscape).  Keeps the
    lowest cost, ties going to the earlier start, and stops once a start
    reaches zero cost.  ``converged`` means zero cost, i.e. no violations.
    """
    cfg = cfg or SynthesisConfig()
    lo, hi = cfg.log_box()
    inner = tightened(mask, cfg.margin_db, cfg.margin_rel)

    def objective(x):
        return cost(cfg.params_from_log(x), inner, cfg)

    best = None
    best_idx = -1
    total_iter = 0
    runs = 0
    for idx, x0 in enumerate(restart_points(cfg, objective)):
        res = None
        for _ in range(cfg.reseeds + 1):
            r = nelder_mead(
                objective,
                x0 if res is None else res.x,
                step=cfg.initial_step,
                max_iterations=cfg.max_iterations,
                tol=cfg.simplex_tol,
                lower=lo,
                upper=hi,
                target=0.0,
            )
            total_iter += r.nit
            improved = res is None or r.fun < res.fun
            if improved:
                if res is not None:
                    r.history = res.history + r.history
                res = r
            if res.fun == 0.0 or not improved:
                break
        runs += 1
        if best is None or res.fun < best.fun:
            best, best_idx = res, idx
        if best.fun == 0.0:
            break

    params = cfg.params_from_log(best.x)
    c, metrics, violations = evaluate_params(params, mask, cfg)
    if metrics is None and violations is not None:
        metrics = compute_metrics(sweep(params, cfg.grid, cfg.stages, cfg.z0_ohm))
    return SynthesisResult(
        params=params,
        cost=c,
        metrics=metrics,
        violations=list(violations or []),
        iterations=total_iter,
        converged=c == 0.0,
        simplex_tolerance_met=best.converged and best.fun != 0.0 or c == 0.0,
        restarts_run=runs,
        best_restart=best_idx,
        history=best.history,
    )
