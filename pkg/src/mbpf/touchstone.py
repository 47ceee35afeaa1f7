"""Two-port Touchstone v1 (.s2p) reading/writing and CSV export."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np

from .errors import TouchstoneError, UnsupportedError
from .twoport import SweepTable, to_db

UNIT_SCALE = {"HZ": 1, "KHZ": 10**3, "MHZ": 10**6, "GHZ": 10**9}
FORMATS = ("RI", "MA", "DB")
PARAMETERS = ("S", "Y", "Z", "H", "G")

SWEEP_COLUMNS = (
    "frequency_hz",
    "s11_re", "s11_im", "s21_re", "s21_im", "s12_re", "s12_im", "s22_re", "s22_im",
    "s11_db", "s21_db", "s21_phase_deg",
)
DISPERSION_COLUMNS = ("frequency_hz", "re_g", "beta_l_rad", "alpha_l_neper", "regime")
GROUP_DELAY_COLUMNS = ("frequency_hz", "group_delay_s")


@dataclass(frozen=True)
class TouchstoneOptions:
    frequency_unit: str = "GHZ"
    parameter: str = "S"
    format: str = "MA"
    reference_ohm: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "frequency_unit", self.frequency_unit.upper())
        object.__setattr__(self, "format", self.format.upper())
        object.__setattr__(self, "parameter", self.parameter.upper())
        if self.frequency_unit not in UNIT_SCALE:
            raise ValueError(f"unknown frequency unit {self.frequency_unit!r}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown data format {self.format!r}")
        if self.parameter != "S":
            raise UnsupportedError(f"parameter type {self.parameter} is not supported; only S")
        if not self.reference_ohm > 0:
            raise ValueError("reference resistance must be positive")

    @property
    def option_line(self) -> str:
        return f"# {self.frequency_unit} {self.parameter} {self.format} R {_num(self.reference_ohm)}"


def _num(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def _parse_options(tokens, lineno) -> TouchstoneOptions:
    unit, param, fmt, ref = "GHZ", "S", "MA", 50.0
    i = 0
    while i < len(tokens):
        t = tokens[i].upper()
        if t in UNIT_SCALE:
            unit = t
        elif t in PARAMETERS:
            if t != "S":
                raise UnsupportedError(f"parameter type {t} is not supported; only S", lineno)
            param = t
        elif t in FORMATS:
            fmt = t
        elif t == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneError("option R needs a value", lineno)
            try:
                ref = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneError(f"bad reference resistance {tokens[i + 1]!r}", lineno) from None
            if not ref > 0:
                raise TouchstoneError("reference resistance must be positive", lineno)
            i += 1
        else:
            raise TouchstoneError(f"unknown option token {tokens[i]!r}", lineno)
        i += 1
    return TouchstoneOptions(unit, param, fmt, ref)


def _pair_to_complex(x, y, fmt):
    if fmt == "RI":
        return complex(x, y)
    mag = x if fmt == "MA" else 10.0 ** (x / 20.0)
    ang = math.radians(y)
    return complex(mag * math.cos(ang), mag * math.sin(ang))


def parse_touchstone(text: str):
    """Parse a two-port Touchstone v1 body.

    Returns ``(sweep, options, warnings)``.  Rows out of frequency order are
    sorted (stable) and reported in ``warnings``.
    """
    opts = None
    opts_line = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise UnsupportedError(
                f"Touchstone v2 keyword {line.split()[0]} is not supported; use a v1 file", lineno
            )
        if line.startswith("#"):
            if opts is not None:
                raise TouchstoneError(f"second option line (first on line {opts_line})", lineno)
            opts = _parse_options(line[1:].split(), lineno)
            opts_line = lineno
            continue
        tokens = line.split()
        if len(tokens) != 9:
            raise TouchstoneError(f"expected 9 numeric fields, found {len(tokens)}", lineno)
        try:
            nums = [float(t) for t in tokens[1:]]
            freq = Decimal(tokens[0])
        except (ValueError, ArithmeticError):
            raise TouchstoneError(f"non-numeric field in {line!r}", lineno) from None
        if not freq.is_finite() or any(math.isnan(v) for v in nums):
            raise TouchstoneError("NaN or infinite frequency in data row", lineno)
        rows.append((lineno, freq, nums))

    if opts is None:
        opts = TouchstoneOptions()
    if not rows:
        raise TouchstoneError("no data rows")

    scale = UNIT_SCALE[opts.frequency_unit]
    warnings = []
    with localcontext() as ctx:
        ctx.prec = 60
        freqs = [float(fr * scale) for _, fr, _ in rows]
    order = sorted(range(len(rows)), key=lambda k: freqs[k])
    if order != list(range(len(rows))):
        warnings.append("frequencies are not increasing; rows were sorted")
    for a, b in zip(order, order[1:]):
        if freqs[a] <= 0:
            raise TouchstoneError("frequency must be positive", rows[a][0])
        if freqs[a] == freqs[b]:
            raise TouchstoneError(f"duplicate frequency {freqs[b]:.12g} Hz", rows[b][0])
    if freqs[order[0]] <= 0:
        raise TouchstoneError("frequency must be positive", rows[order[0]][0])

    s = np.empty((len(rows), 4), dtype=complex)
    for n, k in enumerate(order):
        nums = rows[k][2]
        for j in range(4):
            s[n, j] = _pair_to_complex(nums[2 * j], nums[2 * j + 1], opts.format)
    f = np.array([freqs[k] for k in order])
    sweep = SweepTable(f, s[:, 0], s[:, 1], s[:, 2], s[:, 3], z0_ohm=opts.reference_ohm, warnings=warnings)
    return sweep, opts, warnings


def read_touchstone(path):
    with open(path, encoding="utf-8") as fh:
        return parse_touchstone(fh.read())


def _fmt_freq(f: float, scale: int) -> str:
    # exact decimal shift of the shortest repr, so parsing restores f bit for bit
    with localcontext() as ctx:
        ctx.prec = 60
        d = Decimal(repr(float(f))) / scale
    return format(d.normalize(), "f") if abs(d.adjusted()) < 20 else str(d.normalize())


def _fmt_pair(z: complex, fmt: str) -> str:
    if fmt == "RI":
        return f"{z.real: .12e} {z.imag: .12e}"
    ang = math.degrees(math.atan2(z.imag, z.real))
    if fmt == "MA":
        return f"{abs(z): .12e} {ang: .9f}"
    mag_db = 20.0 * math.log10(abs(z)) if z != 0 else -math.inf
    return f"{mag_db: .9f} {ang: .9f}"


def write_touchstone(sweep: SweepTable, opts: TouchstoneOptions | None = None, comments=()) -> str:
    """Touchstone v1 text for ``sweep``.

    Unit and data format come from ``opts``; the reference resistance is the
    sweep's own ``z0_ohm`` (no renormalisation is done).
    """
    if len(sweep) == 0:
        raise ValueError("cannot write an empty sweep")
    opts = opts or TouchstoneOptions()
    opts = TouchstoneOptions(opts.frequency_unit, "S", opts.format, sweep.z0_ohm)
    scale = UNIT_SCALE[opts.frequency_unit]
    lines = ["! generated by mbpf", "! two-port S-parameters"]
    lines += [f"! {c}" for c in comments]
    lines.append(opts.option_line)
    for f, a, b, c, d in zip(sweep.frequency_hz, sweep.s11, sweep.s21, sweep.s12, sweep.s22):
        pairs = " ".join(_fmt_pair(complex(z), opts.format) for z in (a, b, c, d))
        lines.append(f"{_fmt_freq(f, scale)} {pairs}")
    return "\n".join(lines) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _r(x) -> str:
    return repr(float(x))


def write_csv(obj) -> str:
    """CSV text for a sweep, a dispersion curve, group-delay arrays or metrics.

    Column orders:

    * sweep: ``frequency_hz, s11_re, s11_im, s21_re, s21_im, s12_re, s12_im,
      s22_re, s22_im, s11_db, s21_db, s21_phase_deg``
    * dispersion curve: ``frequency_hz, re_g, beta_l_rad, alpha_l_neper, regime``
    * ``(frequency_hz, delay_s)`` arrays: ``frequency_hz, group_delay_s``
    * metrics: ``metric, value``
    """
    from .dispersion import DispersionPoint
    from .metrics import FilterMetrics

    if isinstance(obj, SweepTable):
        if len(obj) == 0:
            raise ValueError("empty sweep")
        s11_db, s21_db = to_db(obj.s11), to_db(obj.s21)
        phase = np.degrees(np.angle(obj.s21))
        rows = []
        for i, f in enumerate(obj.frequency_hz):
            vals = [f]
            for arr in (obj.s11, obj.s21, obj.s12, obj.s22):
                vals += [arr[i].real, arr[i].imag]
            vals += [s11_db[i], s21_db[i], phase[i]]
            rows.append([_r(v) for v in vals])
        return _csv_text(SWEEP_COLUMNS, rows)
    if isinstance(obj, FilterMetrics):
        return _csv_text(("metric", "value"), [(k, "" if v is None else _r(v)) for k, v in obj.to_dict().items()])
    if isinstance(obj, tuple) and len(obj) == 2:
        f, tau = obj
        return _csv_text(GROUP_DELAY_COLUMNS, [(_r(a), _r(b)) for a, b in zip(f, tau)])
    obj = list(obj)
    if not obj:
        raise ValueError("nothing to write")
    if all(isinstance(p, DispersionPoint) for p in obj):
        return _csv_text(
            DISPERSION_COLUMNS,
            [(_r(p.frequency_hz), _r(p.re_g), _r(p.beta_l_rad), _r(p.alpha_l_neper), p.regime) for p in obj],
        )
    raise TypeError(f"cannot write {type(obj[0]).__name__} as CSV")
