"""Two-port chain-matrix algebra, S-parameter conversion and group delay.

Scalar operations work on :class:`TwoPortABCD`; the ``*_arrays`` helpers are
the vectorised equivalents used for frequency sweeps.  Both paths perform the
same elementwise arithmetic, so a sweep point does not depend on which other
frequencies were evaluated alongside it.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyCascadeError,
    InsufficientGridError,
    InvalidElementError,
    NonTransmissiveError,
    SingularConversionError,
)

# |a + b/z0 + c*z0 + d| below this is treated as a singular conversion
SINGULAR_DELTA = 1e-30


@dataclass(frozen=True)
class TwoPortABCD:
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> "TwoPortABCD":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "TwoPortABCD") -> "TwoPortABCD":
        return TwoPortABCD(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @classmethod
    def from_array(cls, m) -> "TwoPortABCD":
        m = np.asarray(m, dtype=complex)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    def allclose(self, other: "TwoPortABCD", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        return np.allclose(self.to_array(), other.to_array(), rtol=rtol, atol=atol)


@dataclass(frozen=True)
class FrequencyGrid:
    start_hz: float
    stop_hz: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if not (math.isfinite(self.start_hz) and math.isfinite(self.stop_hz)):
            raise ValueError("grid limits must be finite")
        if self.start_hz <= 0 or self.stop_hz <= 0:
            raise ValueError("grid limits must be positive")
        if self.start_hz >= self.stop_hz:
            raise ValueError(f"start_hz ({self.start_hz}) must be below stop_hz ({self.stop_hz})")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError("a grid needs at least 2 points")
        if self.spacing not in ("linear", "logarithmic"):
            raise ValueError(f"unknown spacing {self.spacing!r}")

    def frequencies(self) -> np.ndarray:
        if self.spacing == "linear":
            f = np.linspace(self.start_hz, self.stop_hz, int(self.points))
        else:
            f = np.geomspace(self.start_hz, self.stop_hz, int(self.points))
        # endpoints exact regardless of spacing
        f[0], f[-1] = self.start_hz, self.stop_hz
        return f


@dataclass(frozen=True)
class SParameterPoint:
    frequency_hz: float
    s11: complex
    s21: complex
    s12: complex
    s22: complex
    z0_ohm: float = 50.0


@dataclass(frozen=True, eq=False)
class SweepTable:
    """S-parameters of a two-port on an increasing frequency list.

    Frequencies where the conversion was singular are left out; the reason is
    kept in ``warnings``.
    """

    frequency_hz: np.ndarray
    s11: np.ndarray
    s21: np.ndarray
    s12: np.ndarray
    s22: np.ndarray
    z0_ohm: float = 50.0
    warnings: tuple = field(default=())

    def __post_init__(self):
        f = np.asarray(self.frequency_hz, dtype=float)
        object.__setattr__(self, "frequency_hz", f)
        for name in ("s11", "s21", "s12", "s22"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != f.shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {f.shape}")
            object.__setattr__(self, name, arr)
        if f.ndim != 1:
            raise ValueError("frequency_hz must be one-dimensional")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise ValueError("frequencies must be strictly increasing without duplicates")
        if not self.z0_ohm > 0:
            raise ValueError("z0_ohm must be positive")
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @classmethod
    def from_points(cls, points: Sequence[SParameterPoint], warnings=()) -> "SweepTable":
        if not points:
            raise ValueError("no points")
        z0 = points[0].z0_ohm
        if any(p.z0_ohm != z0 for p in points):
            raise ValueError("all points must share one reference impedance")
        return cls(
            np.array([p.frequency_hz for p in points]),
            np.array([p.s11 for p in points]),
            np.array([p.s21 for p in points]),
            np.array([p.s12 for p in points]),
            np.array([p.s22 for p in points]),
            z0_ohm=z0,
            warnings=warnings,
        )

    def __len__(self) -> int:
        return self.frequency_hz.size

    @property
    def points(self) -> list[SParameterPoint]:
        return [
            SParameterPoint(float(f), complex(a), complex(b), complex(c), complex(d), self.z0_ohm)
            for f, a, b, c, d in zip(self.frequency_hz, self.s11, self.s21, self.s12, self.s22)
        ]

    def s21_db(self) -> np.ndarray:
        return to_db(self.s21)

    def s11_db(self) -> np.ndarray:
        return to_db(self.s11)


def to_db(x) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(x))


def _check_finite(x: complex, what: str) -> complex:
    x = complex(x)
    if not (math.isfinite(x.real) and math.isfinite(x.imag)):
        raise InvalidElementError(f"{what} must be finite, got {x}")
    return x


def abcd_series(z: complex) -> TwoPortABCD:
    """Series impedance ``z`` (ohms)."""
    return TwoPortABCD(1 + 0j, _check_finite(z, "series impedance"), 0j, 1 + 0j)


def abcd_shunt(y: complex) -> TwoPortABCD:
    """Shunt admittance ``y`` (siemens)."""
    return TwoPortABCD(1 + 0j, 0j, _check_finite(y, "shunt admittance"), 1 + 0j)


def cascade(blocks: Iterable[TwoPortABCD]) -> TwoPortABCD:
    blocks = list(blocks)
    if not blocks:
        raise EmptyCascadeError("cannot cascade an empty list of blocks")
    out = blocks[0]
    for m in blocks[1:]:
        out = out @ m
    return out


def abcd_to_s(m: TwoPortABCD, z0_ohm: float = 50.0, frequency_hz: float | None = None):
    """Return ``(s11, s21, s12, s22)`` of ``m`` at real reference impedance ``z0_ohm``."""
    if not z0_ohm > 0:
        raise ValueError("z0_ohm must be positive")
    a, b, c, d = m.a, m.b, m.c, m.d
    bz = b / z0_ohm
    cz = c * z0_ohm
    delta = a + bz + cz + d
    if not abs(delta) >= SINGULAR_DELTA or not cmath.isfinite(delta):
        raise SingularConversionError(frequency_hz)
    s11 = (a + bz - cz - d) / delta
    s21 = 2.0 / delta
    s12 = 2.0 * (a * d - b * c) / delta
    s22 = (-a + bz - cz + d) / delta
    return s11, s21, s12, s22


def s_to_abcd(p: SParameterPoint) -> TwoPortABCD:
    s11, s21, s12, s22 = p.s11, p.s21, p.s12, p.s22
    if s21 == 0:
        raise NonTransmissiveError(f"s21 = 0 at {p.frequency_hz:.9g} Hz; no ABCD matrix exists")
    z0 = p.z0_ohm
    den = 2.0 * s21
    prod = s12 * s21
    return TwoPortABCD(
        ((1 + s11) * (1 - s22) + prod) / den,
        z0 * ((1 + s11) * (1 + s22) - prod) / den,
        ((1 - s11) * (1 - s22) - prod) / (den * z0),
        ((1 - s11) * (1 + s22) + prod) / den,
    )


# -- vectorised forms ---------------------------------------------------------

def cascade_arrays(*blocks):
    """Cascade ``(a, b, c, d)`` tuples of equally shaped arrays left to right."""
    if not blocks:
        raise EmptyCascadeError("cannot cascade an empty list of blocks")
    a, b, c, d = blocks[0]
    for a2, b2, c2, d2 in blocks[1:]:
        a, b, c, d = a * a2 + b * c2, a * b2 + b * d2, c * a2 + d * c2, c * b2 + d * d2
    return a, b, c, d


def abcd_to_s_arrays(a, b, c, d, z0_ohm: float = 50.0, det=None):
    """Vectorised :func:`abcd_to_s`; returns the four S arrays and a mask of usable points.

    ``det`` is the known determinant of the network, when available.  For a
    cascade of series/shunt blocks it is exactly 1, while ``a*d - b*c``
    recomputed from entries of order 1e10 and above loses most of its digits.
    """
    bz = b / z0_ohm
    cz = c * z0_ohm
    delta = a + bz + cz + d
    ok = np.isfinite(delta) & (np.abs(delta) >= SINGULAR_DELTA)
    safe = np.where(ok, delta, 1.0)
    if det is None:
        det = a * d - b * c
    s11 = (a + bz - cz - d) / safe
    s21 = 2.0 / safe
    s12 = 2.0 * det / safe
    s22 = (-a + bz - cz + d) / safe
    return s11, s21, s12, s22, ok


def group_delay(sweep: SweepTable):
    """Group delay of s21, ``-d(phase)/d(omega)``, in seconds.

    Phase is unwrapped (jumps above pi between neighbours are taken as 2*pi
    wraps), so the grid has to resolve the phase slope.  Interior points use a
    central difference, the two ends a one-sided one.

    Returns ``(frequency_hz, delay_s)`` arrays.
    """
    f = sweep.frequency_hz
    if f.size < 3:
        raise InsufficientGridError(f"group delay needs at least 3 points, got {f.size}")
    phase = np.unwrap(np.angle(sweep.s21))
    w = 2.0 * np.pi * f
    tau = np.empty_like(f)
    tau[1:-1] = -(phase[2:] - phase[:-2]) / (w[2:] - w[:-2])
    tau[0] = -(phase[1] - phase[0]) / (w[1] - w[0])
    tau[-1] = -(phase[-1] - phase[-2]) / (w[-1] - w[-2])
    return f.copy(), tau
