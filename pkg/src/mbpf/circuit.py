"""Lumped unit cell of the CSRR-loaded band-pass line and its network response.

Series arm: interdigital capacitor ``C_L`` with optional series line
inductance.  Shunt arm: line capacitance ``C`` in series with the parallel
resonator tank ``C_R || L_tank``.  Which of the two listed inductances sits in
the tank is controlled by ``swap_inductors``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import DomainError, InvalidElementError, SingularPointError
from .twoport import (
    FrequencyGrid,
    SweepTable,
    TwoPortABCD,
    abcd_to_s_arrays,
    cascade_arrays,
)

TOPOLOGIES = ("symmetric_t", "l_section")

# |1 - w^2 L C| at or below this is taken as exact resonance
RESONANCE_SNAP = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class UnitCellParams:
    c_l_farad: float
    l_r_henry: float
    c_farad: float
    c_r_farad: float
    l_l_henry: float
    include_series_inductor: bool = True
    topology: str = "symmetric_t"
    swap_inductors: bool = False

    def __post_init__(self):
        for name in ("c_l_farad", "l_r_henry", "c_farad", "c_r_farad", "l_l_henry"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidElementError(f"{name} must be positive and finite, got {v!r}")
        if self.topology not in TOPOLOGIES:
            raise InvalidElementError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")

    @property
    def series_inductance_henry(self) -> float:
        return self.l_l_henry if self.swap_inductors else self.l_r_henry

    @property
    def tank_inductance_henry(self) -> float:
        return self.l_r_henry if self.swap_inductors else self.l_l_henry

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "UnitCellParams":
        return cls(**d)

    def with_(self, **changes) -> "UnitCellParams":
        return replace(self, **changes)


# Lumped values listed for the fabricated filter.
LISTED_CELL = UnitCellParams(
    c_l_farad=0.3e-12,
    l_r_henry=10.3e-9,
    c_farad=2.1e-12,
    c_r_farad=4.1e-12,
    l_l_henry=0.7e-9,
)


def _omega(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if np.any(~(f > 0)):
        raise DomainError("frequency must be positive")
    return 2.0 * np.pi * f


def _one_minus(w, l, c):
    x = 1.0 - w * w * l * c
    return np.where(np.abs(x) <= RESONANCE_SNAP, 0.0, x)


def _series_z(p: UnitCellParams, w):
    if p.include_series_inductor:
        return _one_minus(w, p.series_inductance_henry, p.c_l_farad) / (1j * w * p.c_l_farad)
    return 1.0 / (1j * w * p.c_l_farad)


def _shunt_y(p: UnitCellParams, w):
    # Y = jwC (1 - w^2 L C_R) / (1 - w^2 L (C + C_R)); zero at the tank
    # resonance, pole where the arm resonates in series.
    lt = p.tank_inductance_henry
    num = 1j * w * p.c_farad * _one_minus(w, lt, p.c_r_farad)
    den = _one_minus(w, lt, p.c_farad + p.c_r_farad)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den == 0.0, np.inf + 0j, num / np.where(den == 0.0, 1.0, den))


def _branch_z(p: UnitCellParams, w):
    lt = p.tank_inductance_henry
    num = _one_minus(w, lt, p.c_farad + p.c_r_farad)
    den = 1j * w * p.c_farad * _one_minus(w, lt, p.c_r_farad)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den == 0.0, np.inf + 0j, num / np.where(den == 0.0, 1.0, den))


def series_impedance(p: UnitCellParams, f: float) -> complex:
    """Series-arm impedance in ohms."""
    return complex(_series_z(p, _omega(f)))


def shunt_admittance(p: UnitCellParams, f: float) -> complex:
    """Shunt-arm admittance in siemens; exactly 0 at the tank resonance.

    Raises SingularPointError at the arm's series resonance, where the
    admittance is unbounded.
    """
    y = complex(_shunt_y(p, _omega(f)))
    if not math.isfinite(abs(y)):
        raise SingularPointError(f, "shunt admittance")
    return y


def branch_impedance(p: UnitCellParams, f: float) -> complex:
    """Impedance of the whole shunt arm (reciprocal of :func:`shunt_admittance`)."""
    z = complex(_branch_z(p, _omega(f)))
    if not math.isfinite(abs(z)):
        raise SingularPointError(f, "branch impedance")
    return z


def immittances(p: UnitCellParams, f):
    """Vectorised ``(Z, Y)`` over an array of frequencies; Y is inf at poles."""
    w = _omega(f)
    return _series_z(p, w), _shunt_y(p, w)


def _cell_arrays(p: UnitCellParams, z, y):
    one = np.ones_like(z)
    zero = np.zeros_like(z)
    shunt = (one, zero, y, one)
    if p.topology == "symmetric_t":
        half = (one, z / 2.0, zero, one)
        return cascade_arrays(half, shunt, half)
    return cascade_arrays((one, z, zero, one), shunt)


def _n_cell_arrays(p: UnitCellParams, f, n: int):
    if int(n) != n or n < 1:
        raise DomainError(f"stage count must be an integer >= 1, got {n!r}")
    z, y = immittances(p, f)
    with np.errstate(invalid="ignore"):
        cell = _cell_arrays(p, z, y)
        out = cell
        for _ in range(int(n) - 1):
            out = cascade_arrays(out, cell)
    return out


def unit_cell_abcd(p: UnitCellParams, f: float) -> TwoPortABCD:
    return n_cell_abcd(p, f, 1)


def n_cell_abcd(p: UnitCellParams, f: float, n: int = 1) -> TwoPortABCD:
    if int(n) != n or n < 1:
        raise DomainError(f"stage count must be an integer >= 1, got {n!r}")
    shunt_admittance(p, f)  # raises at the shunt-arm pole
    a, b, c, d = _n_cell_arrays(p, np.asarray(f, dtype=float), n)
    return TwoPortABCD(complex(a), complex(b), complex(c), complex(d))


def sweep(p: UnitCellParams, grid, n: int = 1, z0_ohm: float = 50.0) -> SweepTable:
    """S-parameters of ``n`` cascaded cells over ``grid``.

    ``grid`` is a :class:`FrequencyGrid` or an increasing array of Hz.
    Frequencies where the response is singular are dropped and listed in the
    table's warnings.
    """
    f = grid.frequencies() if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    a, b, c, d = _n_cell_arrays(p, f, n)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        # every block is a series or shunt element, so the determinant is exactly 1
        s11, s21, s12, s22, ok = abcd_to_s_arrays(a, b, c, d, z0_ohm, det=np.ones_like(a))
    ok &= np.isfinite(s11) & np.isfinite(s21) & np.isfinite(s12) & np.isfinite(s22)
    warnings = tuple(f"singular response at {fx:.12g} Hz; point omitted" for fx in f[~ok])
    return SweepTable(f[ok], s11[ok], s21[ok], s12[ok], s22[ok], z0_ohm=z0_ohm, warnings=warnings)
