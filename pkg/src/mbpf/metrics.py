"""Band-pass figures of merit, spec-mask checking and sweep comparison."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BandNotBracketedError, CoverageError, InsufficientGridError, NoOverlapError
from .twoport import SweepTable, group_delay, to_db


@dataclass(frozen=True)
class FilterMetrics:
    f0_hz: float
    bw3db_hz: float
    fbw_percent: float
    il_db: float
    rl_db_at_f0: float
    f_cl_hz: float
    f_cu_hz: float
    att_db_at_08fcl: float | None
    att_db_at_12fcu: float | None
    group_delay_s_at_f0: float | None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table_row(self, label: str = "this filter") -> str:
        return format_metrics_table([(label, self)])


TABLE_COLUMNS = (
    ("Filter", None),
    ("f0 (GHz)", lambda m: f"{m.f0_hz / 1e9:.2f}"),
    ("3-dB BW (MHz)", lambda m: f"{m.bw3db_hz / 1e6:.0f}"),
    ("FBW (%)", lambda m: f"{m.fbw_percent:.1f}"),
    ("IL (dB)", lambda m: f"{m.il_db:.1f}"),
    ("RL @ f0 (dB)", lambda m: _fmt(m.rl_db_at_f0, 0)),
    ("Att @ 0.8 f_cl (dB)", lambda m: _fmt(m.att_db_at_08fcl, 0)),
    ("Att @ 1.2 f_cu (dB)", lambda m: _fmt(m.att_db_at_12fcu, 0)),
)


def _fmt(x, digits):
    if x is None:
        return "n/a"
    if math.isinf(x):
        return "inf"
    return f"{x:.{digits}f}"


def format_metrics_table(rows) -> str:
    """Aligned text table; ``rows`` is a list of ``(label, FilterMetrics)``."""
    cells = [[name for name, _ in TABLE_COLUMNS]]
    for label, m in rows:
        cells.append([label] + [fn(m) for _, fn in TABLE_COLUMNS[1:]])
    widths = [max(len(r[i]) for r in cells) for i in range(len(TABLE_COLUMNS))]
    return "\n".join("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in cells)


def _crossing(f, db, i, j, level):
    # linear interpolation of the level crossing between samples i and j
    return float(f[i] + (level - db[i]) * (f[j] - f[i]) / (db[j] - db[i]))


def _interp_db(f, db, x):
    if x < f[0] or x > f[-1]:
        return None
    return float(np.interp(x, f, db))


def compute_metrics(sweep: SweepTable) -> FilterMetrics:
    """Extract center, 3-dB band, loss and stop-band figures from a sweep.

    The 3-dB edges are taken relative to the peak of |s21| and linearly
    interpolated in dB; the center is their arithmetic mean.  Return loss uses
    the sample nearest the center.
    """
    f = sweep.frequency_hz
    if len(f) < 2:
        raise BandNotBracketedError("lower", "a sweep needs at least two points to locate a band")
    db = to_db(sweep.s21)
    k = int(np.argmax(db))
    peak = float(db[k])
    level = peak - 3.0

    below = np.nonzero(db[:k] < level)[0]
    if below.size == 0:
        raise BandNotBracketedError("lower")
    i = int(below[-1])
    f_cl = _crossing(f, db, i, i + 1, level)

    above = np.nonzero(db[k + 1:] < level)[0]
    if above.size == 0:
        raise BandNotBracketedError("upper")
    j = k + 1 + int(above[0])
    f_cu = _crossing(f, db, j - 1, j, level)

    f0 = 0.5 * (f_cl + f_cu)
    bw = f_cu - f_cl
    near = int(np.argmin(np.abs(f - f0)))
    rl = -float(to_db(sweep.s11[near]))

    att_lo = _interp_db(f, db, 0.8 * f_cl)
    att_hi = _interp_db(f, db, 1.2 * f_cu)

    try:
        fg, tau = group_delay(sweep)
        gd = float(np.interp(f0, fg, tau))
    except InsufficientGridError:
        gd = None

    return FilterMetrics(
        f0_hz=f0,
        bw3db_hz=bw,
        fbw_percent=100.0 * bw / f0,
        il_db=max(0.0, -peak),
        rl_db_at_f0=rl,
        f_cl_hz=f_cl,
        f_cu_hz=f_cu,
        att_db_at_08fcl=None if att_lo is None else -att_lo,
        att_db_at_12fcu=None if att_hi is None else -att_hi,
        group_delay_s_at_f0=gd,
    )


# -- mask ---------------------------------------------------------------------

ANCHORS = ("f_cl", "f_cu", "f0")


@dataclass(frozen=True)
class StopbandPoint:
    """Minimum attenuation at an absolute frequency or at ``factor`` times a band edge."""

    min_attenuation_db: float
    frequency_hz: float | None = None
    relative_to: str | None = None
    factor: float = 1.0

    def __post_init__(self):
        if not self.min_attenuation_db > 0:
            raise ValueError("stop-band requirement must be positive")
        if (self.frequency_hz is None) == (self.relative_to is None):
            raise ValueError("give exactly one of frequency_hz or relative_to")
        if self.relative_to is not None and self.relative_to not in ANCHORS:
            raise ValueError(f"relative_to must be one of {ANCHORS}")
        if self.frequency_hz is not None and not self.frequency_hz > 0:
            raise ValueError("frequency_hz must be positive")
        if not self.factor > 0:
            raise ValueError("factor must be positive")

    @property
    def label(self) -> str:
        if self.frequency_hz is not None:
            return f"stop@{self.frequency_hz:.6g}Hz"
        return f"stop@{self.factor:g}*{self.relative_to}"

    def resolve(self, metrics: FilterMetrics | None) -> float:
        if self.frequency_hz is not None:
            return self.frequency_hz
        if metrics is None:
            raise ValueError("relative stop-band point needs band metrics")
        anchor = {"f_cl": metrics.f_cl_hz, "f_cu": metrics.f_cu_hz, "f0": metrics.f0_hz}[self.relative_to]
        return self.factor * anchor

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SpecMask:
    """Pass-band and stop-band requirements.

    ``max_il_db`` bounds the best (lowest) insertion loss inside
    ``passband_hz``, the same quantity as :attr:`FilterMetrics.il_db`.
    ``f0_target_hz`` / ``bw_target_hz`` are placement targets with relative
    tolerances; outside tolerance they add ``shaping_weight`` times the squared
    excess relative deviation to the cost.
    """

    passband_hz: tuple[float, float] | None = None
    max_il_db: float | None = None
    min_rl_db: float | None = None
    stopband: tuple[StopbandPoint, ...] = ()
    f0_target_hz: float | None = None
    f0_tol: float = 0.01
    bw_target_hz: float | None = None
    bw_tol: float = 0.1
    shaping_weight: float = 100.0

    def __post_init__(self):
        if self.passband_hz is not None:
            f1, f2 = self.passband_hz
            if not (0 < f1 < f2):
                raise ValueError("pass-band interval needs 0 < f1 < f2")
            object.__setattr__(self, "passband_hz", (float(f1), float(f2)))
        if self.max_il_db is not None and self.max_il_db < 0:
            raise ValueError("max_il_db must be non-negative")
        if self.min_rl_db is not None and not self.min_rl_db > 0:
            raise ValueError("min_rl_db must be positive")
        for name in ("f0_target_hz", "bw_target_hz"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not (self.f0_tol >= 0 and self.bw_tol >= 0 and self.shaping_weight >= 0):
            raise ValueError("tolerances and weight must be non-negative")
        object.__setattr__(self, "stopband", tuple(self.stopband))

    @property
    def needs_band(self) -> bool:
        return (
            self.min_rl_db is not None
            or self.f0_target_hz is not None
            or self.bw_target_hz is not None
            or any(s.relative_to is not None for s in self.stopband)
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passband_hz"] = list(self.passband_hz) if self.passband_hz else None
        d["stopband"] = [s.to_dict() for s in self.stopband]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpecMask":
        d = dict(d)
        if d.get("passband_hz") is not None:
            d["passband_hz"] = tuple(d["passband_hz"])
        d["stopband"] = tuple(StopbandPoint(**s) for s in d.get("stopband", ()))
        return cls(**d)

    @classmethod
    def from_metrics(cls, m: FilterMetrics, slack_db: float = 0.5) -> "SpecMask":
        """A mask that ``m`` meets with ``slack_db`` margin on every dB requirement."""
        stop = []
        if m.att_db_at_08fcl is not None and m.att_db_at_08fcl > slack_db:
            stop.append(StopbandPoint(m.att_db_at_08fcl - slack_db, relative_to="f_cl", factor=0.8))
        if m.att_db_at_12fcu is not None and m.att_db_at_12fcu > slack_db:
            stop.append(StopbandPoint(m.att_db_at_12fcu - slack_db, relative_to="f_cu", factor=1.2))
        return cls(
            min_rl_db=max(m.rl_db_at_f0 - slack_db, 1.0) if math.isfinite(m.rl_db_at_f0) else 40.0,
            stopband=tuple(stop),
            f0_target_hz=m.f0_hz,
            bw_target_hz=m.bw3db_hz,
        )


# Targets reported for the fabricated filter: 730 MHz center, 60 MHz 3-dB
# bandwidth, better than 26 dB return loss, more than 52 dB and 20 dB of
# rejection at 0.8*f_cl and 1.2*f_cu.
REFERENCE_MASK = SpecMask(
    min_rl_db=26.0,
    stopband=(
        StopbandPoint(52.0, relative_to="f_cl", factor=0.8),
        StopbandPoint(20.0, relative_to="f_cu", factor=1.2),
    ),
    f0_target_hz=730e6,
    f0_tol=0.01,
    bw_target_hz=60e6,
    bw_tol=0.10,
)


@dataclass(frozen=True)
class MaskViolation:
    """One failed requirement.

    ``unit`` is ``"dB"`` for loss/attenuation requirements and ``"relative"``
    for placement targets, where ``required`` is the tolerance and
    ``achieved`` the absolute relative deviation.
    """

    requirement: str
    frequency_hz: float | None
    required: float
    achieved: float
    shortfall: float
    unit: str = "dB"

    def to_dict(self) -> dict:
        return asdict(self)


def _check_in_range(f, x, what):
    if x < f[0] or x > f[-1]:
        raise CoverageError(f"{what} at {x:.6g} Hz lies outside the sweep ({f[0]:.6g} to {f[-1]:.6g} Hz)")


def evaluate_mask(sweep: SweepTable, mask: SpecMask, metrics: FilterMetrics | None = None):
    """Return ``(violations, cost)`` with ``cost = sum(shortfall**2)`` over dB
    requirements plus the weighted placement terms.

    Raises BandNotBracketedError when the mask refers to band quantities and
    the sweep has no bracketed pass-band, and CoverageError when a requirement
    falls outside the sweep.
    """
    f = sweep.frequency_hz
    db = to_db(sweep.s21)
    if metrics is None and mask.needs_band:
        metrics = compute_metrics(sweep)

    violations = []
    cost = 0.0

    def minimum(req, freq, required, achieved):
        nonlocal cost
        short = max(0.0, required - achieved)
        if short > 0:
            violations.append(MaskViolation(req, freq, required, achieved, short))
            cost += short * short

    if mask.max_il_db is not None:
        if mask.passband_hz is not None:
            f1, f2 = mask.passband_hz
            _check_in_range(f, f1, "pass-band start")
            _check_in_range(f, f2, "pass-band end")
            inside = (f >= f1) & (f <= f2)
            best = max(float(db[inside].max()) if inside.any() else -math.inf,
                       float(np.interp(f1, f, db)), float(np.interp(f2, f, db)))
            freq = None
        else:
            best = float(db.max())
            freq = float(f[int(np.argmax(db))])
        il = max(0.0, -best)
        short = max(0.0, il - mask.max_il_db)
        if short > 0:
            violations.append(MaskViolation("il", freq, mask.max_il_db, il, short))
            cost += short * short

    if mask.min_rl_db is not None:
        minimum("rl", metrics.f0_hz, mask.min_rl_db, metrics.rl_db_at_f0)

    for sp in mask.stopband:
        x = sp.resolve(metrics)
        _check_in_range(f, x, sp.label)
        minimum(sp.label, x, sp.min_attenuation_db, -float(np.interp(x, f, db)))

    for name, target, tol, value in (
        ("f0", mask.f0_target_hz, mask.f0_tol, metrics.f0_hz if metrics else None),
        ("bw", mask.bw_target_hz, mask.bw_tol, metrics.bw3db_hz if metrics else None),
    ):
        if target is None:
            continue
        dev = abs(value - target) / target
        excess = max(0.0, dev - tol)
        if excess > 0:
            violations.append(MaskViolation(name, value, tol, dev, excess, "relative"))
            cost += mask.shaping_weight * excess * excess

    return violations, cost


# -- comparison ---------------------------------------------------------------

@dataclass
class SweepComparison:
    frequency_hz: np.ndarray
    d_s21_db: np.ndarray
    d_s11_db: np.ndarray
    metric_deltas: dict | None
    notes: list = field(default_factory=list)

    @property
    def max_abs_d_s21_db(self) -> float:
        return float(np.max(np.abs(self.d_s21_db)))

    @property
    def max_abs_d_s11_db(self) -> float:
        return float(np.max(np.abs(self.d_s11_db)))

    def to_dict(self) -> dict:
        return {
            "points": int(self.frequency_hz.size),
            "overlap_hz": [float(self.frequency_hz[0]), float(self.frequency_hz[-1])],
            "max_abs_d_s21_db": self.max_abs_d_s21_db,
            "max_abs_d_s11_db": self.max_abs_d_s11_db,
            "metric_deltas": self.metric_deltas,
            "notes": list(self.notes),
        }


def _db_diff(a, b):
    with np.errstate(invalid="ignore"):
        d = b - a
    return np.where(a == b, 0.0, d)


def compare_sweeps(a: SweepTable, b: SweepTable) -> SweepComparison:
    """Differences ``b - a`` on ``a``'s grid inside the common frequency range.

    ``b`` is resampled by linear interpolation of real and imaginary parts.
    Metric deltas come from each sweep on its own grid.
    """
    lo = max(a.frequency_hz[0], b.frequency_hz[0])
    hi = min(a.frequency_hz[-1], b.frequency_hz[-1])
    if lo > hi:
        raise NoOverlapError("the two sweeps share no frequency range")
    sel = (a.frequency_hz >= lo) & (a.frequency_hz <= hi)
    if not sel.any():
        raise NoOverlapError("no frequency of the first sweep lies in the common range")
    f = a.frequency_hz[sel]

    def resample(x):
        return np.interp(f, b.frequency_hz, x.real) + 1j * np.interp(f, b.frequency_hz, x.imag)

    d21 = _db_diff(to_db(a.s21[sel]), to_db(resample(b.s21)))
    d11 = _db_diff(to_db(a.s11[sel]), to_db(resample(b.s11)))

    notes = []
    deltas = None
    try:
        ma, mb = compute_metrics(a), compute_metrics(b)
    except BandNotBracketedError as exc:
        notes.append(f"metric deltas unavailable: {exc}")
    else:
        deltas = {}
        for k, va in ma.to_dict().items():
            vb = getattr(mb, k)
            deltas[k] = None if va is None or vb is None else (0.0 if va == vb else vb - va)
    return SweepComparison(f, d21, d11, deltas, notes)
