"""Bloch analysis of the periodic unit cell.

For a reciprocal symmetric cell the Bloch condition is ``cos(beta*l) = g``
with ``g = 1 + Z*Y/2``.  Propagation needs ``|Re g| <= 1``; band edges are
the frequencies where ``g`` crosses +1 or -1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import UnitCellParams, immittances, shunt_admittance, series_impedance
from .errors import NotFoundError
from .twoport import FrequencyGrid

EDGE_TOL = 1e-9
# |g -/+ 1| allowed at a refined crossing; larger values mean the bracket held a pole
CROSSING_RESIDUAL = 1e-3
# center frequency of the fabricated filter's measured pass-band
MEASURED_CENTER_HZ = 730e6


class UnpairedEdgeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DispersionPoint:
    """One classified frequency.

    In stop-bands ``beta_l_rad`` holds the phase that accompanies the decay
    (0 when ``g > 1``, pi when ``g < -1``); in the pass-band ``alpha_l_neper``
    is 0.
    """

    frequency_hz: float
    g: complex
    beta_l_rad: float
    alpha_l_neper: float
    regime: str

    @property
    def re_g(self) -> float:
        return self.g.real


@dataclass(frozen=True)
class BandEdges:
    f_cl_hz: float
    f_cu_hz: float
    method: str = "numeric"

    def __post_init__(self):
        if not self.f_cl_hz < self.f_cu_hz:
            raise ValueError(f"lower edge {self.f_cl_hz} must be below upper edge {self.f_cu_hz}")

    @property
    def center_hz(self) -> float:
        return 0.5 * (self.f_cl_hz + self.f_cu_hz)


@dataclass
class ConsistencyReport:
    closed_f_cl_hz: float
    closed_f_cu_hz: float
    closed_f_z_hz: float
    numeric_f_cl_hz: float | None
    numeric_f_cu_hz: float | None
    numeric_f_z_hz: float | None
    dev_f_cl: float | None
    dev_f_cu: float | None
    dev_f_z: float | None
    sharpness_condition: bool
    reference_center_hz: float = MEASURED_CENTER_HZ
    closed_center_ratio: float = float("nan")
    numeric_bands: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        def mhz(x):
            return "n/a" if x is None else f"{x / 1e6:.1f} MHz"

        def pct(x):
            return "n/a" if x is None else f"{100 * x:.3f} %"

        rows = [
            ("quantity", "closed form", "numeric", "deviation"),
            ("f_cl", mhz(self.closed_f_cl_hz), mhz(self.numeric_f_cl_hz), pct(self.dev_f_cl)),
            ("f_cu", mhz(self.closed_f_cu_hz), mhz(self.numeric_f_cu_hz), pct(self.dev_f_cu)),
            ("f_z", mhz(self.closed_f_z_hz), mhz(self.numeric_f_z_hz), pct(self.dev_f_z)),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
        lines.append(
            f"sharp lower edge condition C <= 4*C_L (zero close to f_cl): {self.sharpness_condition}"
        )
        lines.append(
            f"closed-form center / measured {self.reference_center_hz / 1e6:.0f} MHz: "
            f"{self.closed_center_ratio:.3f}x"
        )
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _g_array(p: UnitCellParams, f):
    z, y = immittances(p, f)
    with np.errstate(invalid="ignore"):
        return 1.0 + z * y / 2.0


def bloch_g(p: UnitCellParams, f: float) -> complex:
    """``1 + Z*Y/2`` at ``f``; raises SingularPointError at a shunt-arm pole."""
    y = shunt_admittance(p, f)
    z = series_impedance(p, f)
    return 1.0 + z * y / 2.0


def classify_g(g: complex, frequency_hz: float = float("nan")) -> DispersionPoint:
    x = complex(g).real
    if abs(1.0 - abs(x)) <= EDGE_TOL:
        return DispersionPoint(frequency_hz, complex(g), 0.0 if x > 0 else math.pi, 0.0, "edge")
    if abs(x) < 1.0:
        return DispersionPoint(frequency_hz, complex(g), math.acos(x), 0.0, "passband")
    return DispersionPoint(
        frequency_hz, complex(g), 0.0 if x > 0 else math.pi, math.acosh(abs(x)), "stopband"
    )


def classify(p: UnitCellParams, f: float) -> DispersionPoint:
    return classify_g(bloch_g(p, f), float(f))


def dispersion_curve(p: UnitCellParams, grid) -> list[DispersionPoint]:
    """Classify every grid frequency; shunt-arm poles are left out."""
    f = grid.frequencies() if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    g = _g_array(p, f)
    return [classify_g(gi, float(fi)) for fi, gi in zip(f, g) if np.isfinite(gi)]


def _bisect(fun, lo, hi, flo, rel_tol):
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0:
            return mid, mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def _sign_change_roots(fun, f, h, rel_tol, residual):
    """Refine every sign change of ``h`` sampled on ``f``; drop pole brackets."""
    roots = []
    finite = np.isfinite(h)
    for i in range(len(f) - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        if h[i] == 0.0:
            if i > 0 and finite[i - 1] and h[i - 1] * h[i + 1] < 0:
                roots.append(float(f[i]))
            continue
        if h[i] * h[i + 1] < 0:
            lo, hi = _bisect(fun, float(f[i]), float(f[i + 1]), h[i], rel_tol)
            r = 0.5 * (lo + hi)
            if max(abs(fun(lo)), abs(fun(hi))) <= residual:
                roots.append(r)
    return roots


def edge_crossings(p: UnitCellParams, search, rel_tol: float = 1e-9) -> list[float]:
    """All frequencies in ``search`` where ``Re g`` crosses +1 or -1, ascending."""
    f = search.frequencies() if isinstance(search, FrequencyGrid) else np.asarray(search, dtype=float)
    # sample both sides of the shunt-arm pole so an edge sitting closer to it
    # than one grid step still shows up as a sign change
    fz = transmission_zero_closed(p)
    if f[0] < fz < f[-1]:
        f = np.union1d(f, [fz * (1.0 - 1e-9), fz * (1.0 + 1e-9)])
    re_g = _g_array(p, f).real
    crossings = []
    for target in (1.0, -1.0):
        def fun(x, target=target):
            return float(_g_array(p, np.asarray(x)).real) - target

        crossings += _sign_change_roots(fun, f, re_g - target, rel_tol, CROSSING_RESIDUAL)
    return sorted(crossings)


def find_band_edges(p: UnitCellParams, search, rel_tol: float = 1e-9) -> list[BandEdges]:
    """Numeric pass-bands inside ``search``.

    The scan must be dense enough that ``Re g`` is monotone between samples
    (1000+ points is usually plenty).  Each crossing is refined by bisection to
    relative width ``rel_tol``.  Adjacent crossings bound a band when ``g`` at
    their midpoint propagates; crossings left without a partner are dropped
    with an :class:`UnpairedEdgeWarning`.
    """
    xs = edge_crossings(p, search, rel_tol)
    bands = []
    used = set()
    for k in range(len(xs) - 1):
        lo, hi = xs[k], xs[k + 1]
        if hi <= lo:
            continue
        g = _g_array(p, np.asarray(0.5 * (lo + hi))).real
        if np.isfinite(g) and abs(float(g)) < 1.0:
            bands.append(BandEdges(lo, hi, "numeric"))
            used.update((k, k + 1))
    unpaired = [xs[k] for k in range(len(xs)) if k not in used]
    if unpaired:
        warnings.warn(
            "unpaired band edge(s) dropped at "
            + ", ".join(f"{x:.6g} Hz" for x in unpaired)
            + "; the scan may be under-resolved or start/end inside a band",
            UnpairedEdgeWarning,
            stacklevel=2,
        )
    return bands


def _effective_series_c(p: UnitCellParams) -> float:
    return 1.0 / (1.0 / p.c_farad + 1.0 / (4.0 * p.c_l_farad))


def closed_form_cutoffs(p: UnitCellParams) -> BandEdges:
    """Band edges of the reduced circuit with the series inductance neglected.

    ``f_cu`` is the tank resonance; ``f_cl`` adds the series combination of
    ``C`` and ``4*C_L`` to the tank capacitance.
    """
    lt = p.tank_inductance_henry
    f_cu = 1.0 / (2.0 * math.pi * math.sqrt(lt * p.c_r_farad))
    f_cl = 1.0 / (2.0 * math.pi * math.sqrt(lt * (p.c_r_farad + _effective_series_c(p))))
    return BandEdges(f_cl, f_cu, "closed_form")


def transmission_zero_closed(p: UnitCellParams) -> float:
    return 1.0 / (2.0 * math.pi * math.sqrt(p.tank_inductance_henry * (p.c_farad + p.c_r_farad)))


def _arm_reactance(p: UnitCellParams, f: float) -> float:
    # sum of reactances: line capacitor plus the parallel tank
    w = 2.0 * math.pi * f
    b_tank = 1.0 / (w * p.tank_inductance_henry) - w * p.c_r_farad
    if b_tank == 0.0:
        return math.inf
    return 1.0 / b_tank - 1.0 / (w * p.c_farad)


def transmission_zero_numeric(p: UnitCellParams, search, rel_tol: float = 1e-9) -> float:
    """Lowest series resonance of the shunt arm found in ``search``.

    Brackets a sign change of the arm reactance and bisects it; the tank's
    parallel resonance (a reactance pole) is rejected.
    """
    f = search.frequencies() if isinstance(search, FrequencyGrid) else np.asarray(search, dtype=float)
    x = np.array([_arm_reactance(p, float(fi)) for fi in f])

    for i in range(len(f) - 1):
        if not (np.isfinite(x[i]) and np.isfinite(x[i + 1])):
            continue
        if x[i] == 0.0:
            return float(f[i])
        if x[i] * x[i + 1] < 0:
            lo, hi = _bisect(lambda v: _arm_reactance(p, v), float(f[i]), float(f[i + 1]), x[i], rel_tol)
            scale = 1.0 / (2.0 * math.pi * hi * p.c_farad)
            if max(abs(_arm_reactance(p, lo)), abs(_arm_reactance(p, hi))) <= 1e-3 * scale:
                return 0.5 * (lo + hi)
    raise NotFoundError(
        f"no shunt-arm series resonance between {f[0]:.6g} and {f[-1]:.6g} Hz"
    )


def default_search_grid(p: UnitCellParams, points: int = 20001) -> FrequencyGrid:
    """Log-spaced scan wide enough to hold every closed-form frequency."""
    fz = transmission_zero_closed(p)
    cf = closed_form_cutoffs(p)
    lo = 0.25 * min(fz, cf.f_cl_hz)
    hi = 4.0 * cf.f_cu_hz
    if p.include_series_inductor:
        f_series = 1.0 / (2.0 * math.pi * math.sqrt(p.series_inductance_henry * p.c_l_farad))
        hi = max(hi, 1.5 * f_series) if f_series < 20 * hi else hi
    return FrequencyGrid(lo, hi, points, "logarithmic")


def _rel(closed, numeric):
    return None if numeric is None else abs(closed - numeric) / numeric


def consistency_report(p: UnitCellParams, search=None) -> ConsistencyReport:
    """Closed-form edges and zero next to their numeric counterparts."""
    search = search if search is not None else default_search_grid(p)
    cf = closed_form_cutoffs(p)
    fz = transmission_zero_closed(p)
    notes = []

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UnpairedEdgeWarning)
        bands = find_band_edges(p, search)
    notes.extend(str(w.message) for w in caught)

    n_cl = n_cu = None
    if bands:
        best = min(
            bands,
            key=lambda b: abs(b.f_cl_hz - cf.f_cl_hz) / cf.f_cl_hz + abs(b.f_cu_hz - cf.f_cu_hz) / cf.f_cu_hz,
        )
        n_cl, n_cu = best.f_cl_hz, best.f_cu_hz
    else:
        notes.append("no numeric pass-band found in the search range")

    try:
        n_z = transmission_zero_numeric(p, search)
    except NotFoundError as exc:
        n_z = None
        notes.append(str(exc))

    report = ConsistencyReport(
        closed_f_cl_hz=cf.f_cl_hz,
        closed_f_cu_hz=cf.f_cu_hz,
        closed_f_z_hz=fz,
        numeric_f_cl_hz=n_cl,
        numeric_f_cu_hz=n_cu,
        numeric_f_z_hz=n_z,
        dev_f_cl=_rel(cf.f_cl_hz, n_cl),
        dev_f_cu=_rel(cf.f_cu_hz, n_cu),
        dev_f_z=_rel(fz, n_z),
        sharpness_condition=p.c_farad <= 4.0 * p.c_l_farad,
        closed_center_ratio=cf.center_hz / MEASURED_CENTER_HZ,
        numeric_bands=[(b.f_cl_hz, b.f_cu_hz) for b in bands],
        notes=notes,
    )
    worst = max((d for d in (report.dev_f_cl, report.dev_f_cu) if d is not None), default=None)
    if worst is not None and worst > 0.05:
        notes.append(
            f"closed-form band edges deviate from the numeric ones by up to {100 * worst:.1f} %; "
            "the closed forms neglect the series inductor"
        )
    if abs(report.closed_center_ratio - 1.0) > 0.1:
        notes.append(
            f"closed-form band center {cf.center_hz / 1e6:.1f} MHz is "
            f"{report.closed_center_ratio:.2f}x the measured {MEASURED_CENTER_HZ / 1e6:.0f} MHz center; "
            "the element values do not place the band where it was measured"
        )
    if not report.sharpness_condition:
        notes.append(
            f"C = {p.c_farad * 1e12:.3g} pF exceeds 4*C_L = {4e12 * p.c_l_farad:.3g} pF; "
            "the transmission zero is not guaranteed to sit close to f_cl"
        )
    return report
