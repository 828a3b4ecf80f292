"""Dielectric response on the imaginary frequency axis.

Three material models are provided: the perfect reflector (formal limit of
infinite permittivity), the lossless plasma model, and tabulated data
stored directly on the imaginary axis.  Real-axis absorption data is moved
to the imaginary axis once, at ingestion, by :func:`kramers_kronig_to_imaginary_axis`.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .core import CONSTANTS

__all__ = [
    "PerfectReflector",
    "PlasmaModel",
    "TabulatedDielectric",
    "MaterialModel",
    "OpticalTableError",
    "GOLD_PLASMA_WAVELENGTH",
    "epsilon_imag",
    "kramers_kronig_to_imaginary_axis",
    "load_optical_table",
    "preset",
]

GOLD_PLASMA_WAVELENGTH = 137e-9


class OpticalTableError(ValueError):
    """Malformed optical data file; ``line`` is 1-based or None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _check_xi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if np.any(~(xi > 0)):
        raise ValueError("imaginary frequency xi must be > 0")
    return xi


@dataclass(frozen=True)
class PerfectReflector:
    name: str = "perfect"

    def epsilon(self, xi):
        _check_xi(xi)
        return np.full(np.shape(xi), np.inf) if np.ndim(xi) else math.inf

    def chi_xi2(self, xi):
        """(eps - 1) xi^2, which is infinite for a perfect reflector."""
        return np.full(np.shape(xi), np.inf) if np.ndim(xi) else math.inf


@dataclass(frozen=True)
class PlasmaModel:
    """eps(i xi) = 1 + omega_P^2 / xi^2."""

    omega_P: float
    name: str = "plasma"

    def __post_init__(self):
        if not (math.isfinite(self.omega_P) and self.omega_P > 0):
            raise ValueError(f"omega_P must be > 0, got {self.omega_P!r}")

    @classmethod
    def from_wavelength(cls, lambda_P: float, name: str = "plasma") -> "PlasmaModel":
        if not lambda_P > 0:
            raise ValueError("lambda_P must be > 0")
        return cls(2 * math.pi * CONSTANTS.c / lambda_P, name)

    @property
    def lambda_P(self) -> float:
        return 2 * math.pi * CONSTANTS.c / self.omega_P

    def epsilon(self, xi):
        xi = _check_xi(xi)
        out = 1.0 + (self.omega_P / xi) ** 2
        return float(out) if out.ndim == 0 else out

    def chi_xi2(self, xi):
        """(eps - 1) xi^2 = omega_P^2, also at xi = 0."""
        xi = np.asarray(xi, dtype=float)
        out = np.full(xi.shape, self.omega_P ** 2)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class TabulatedDielectric:
    """eps(i xi) known at nodes ``grid`` (rad/s), interpolated log-log.

    Between nodes ``ln(eps - 1)`` is linear in ``ln xi`` (linear in ``eps``
    where a node value equals 1).  Outside the grid the extrapolation tag
    ``"plasma"`` continues ``eps - 1 ~ xi^-2`` from the end node, which goes
    to the plasma-like limit below the grid and to transparency above it;
    ``"none"`` refuses to extrapolate.
    """

    grid: np.ndarray
    values: np.ndarray
    interpolation: str = "loglog"
    low_extrapolation: str = "plasma"
    high_extrapolation: str = "plasma"
    name: str = "tabulated"
    _log_ok: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length >= 2")
        if np.any(~np.isfinite(grid)) or np.any(grid <= 0):
            raise ValueError("grid frequencies must be finite and > 0")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(~np.isfinite(values)) or np.any(values < 1.0):
            raise ValueError("tabulated eps(i xi) must be real, finite and >= 1")
        if self.interpolation != "loglog":
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        for tag in (self.low_extrapolation, self.high_extrapolation):
            if tag not in ("plasma", "none"):
                raise ValueError(f"unknown extrapolation rule {tag!r}")
        if np.any(np.diff(values) > 0):
            warnings.warn("tabulated eps(i xi) is not non-increasing; "
                          "data is not a sum of Drude/Lorentz absorptions", stacklevel=2)
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_log_ok", values > 1.0)

    def _interp(self, xi: np.ndarray) -> np.ndarray:
        g, v = self.grid, self.values
        i = np.clip(np.searchsorted(g, xi) - 1, 0, g.size - 2)
        x0, x1 = np.log(g[i]), np.log(g[i + 1])
        t = (np.log(xi) - x0) / (x1 - x0)
        y0, y1 = v[i] - 1.0, v[i + 1] - 1.0
        both = self._log_ok[i] & self._log_ok[i + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            loglog = np.exp((1 - t) * np.log(y0) + t * np.log(y1))
        linear = (1 - t) * y0 + t * y1
        return np.where(both, loglog, linear)

    def _chi(self, xi: np.ndarray) -> np.ndarray:
        """eps - 1 at xi > 0 including extrapolation."""
        g, v = self.grid, self.values
        low = xi < g[0]
        high = xi > g[-1]
        if np.any(low) and self.low_extrapolation == "none":
            raise ValueError(f"xi = {xi[low].min():.6g} below tabulated range and extrapolation disabled")
        if np.any(high) and self.high_extrapolation == "none":
            raise ValueError(f"xi = {xi[high].max():.6g} above tabulated range and extrapolation disabled")
        inside = np.clip(xi, g[0], g[-1])
        out = self._interp(inside)
        out = np.where(low, (v[0] - 1.0) * (g[0] / np.where(low, xi, 1.0)) ** 2, out)
        out = np.where(high, (v[-1] - 1.0) * (g[-1] / np.where(high, xi, 1.0)) ** 2, out)
        return out

    def epsilon(self, xi):
        xi = _check_xi(xi)
        out = 1.0 + self._chi(np.atleast_1d(xi))
        return float(out[0]) if xi.ndim == 0 else out.reshape(xi.shape)

    def chi_xi2(self, xi):
        """(eps - 1) xi^2; at xi = 0 the limit of the low-end rule."""
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi)
        zero = flat == 0.0
        if np.any(zero) and self.low_extrapolation == "none":
            raise ValueError("static limit requested but low-end extrapolation is disabled")
        safe = np.where(zero, self.grid[0], flat)
        out = self._chi(safe) * safe ** 2
        out = np.where(zero, (self.values[0] - 1.0) * self.grid[0] ** 2, out)
        return float(out[0]) if xi.ndim == 0 else out.reshape(xi.shape)


MaterialModel = Union[PerfectReflector, PlasmaModel, TabulatedDielectric]


def epsilon_imag(material: MaterialModel, xi):
    """Permittivity at imaginary frequency ``xi`` (rad/s, > 0).

    A perfect reflector returns ``inf``; only the reflection module
    consumes that marker.
    """
    return material.epsilon(xi)


def preset(name: str) -> MaterialModel:
    """Built-in materials: ``gold-plasma`` (lambda_P = 137 nm) and ``perfect``."""
    key = name.strip().lower()
    if key in ("gold-plasma", "gold", "au-plasma"):
        return PlasmaModel.from_wavelength(GOLD_PLASMA_WAVELENGTH, name="gold-plasma")
    if key in ("perfect", "perfect-reflector", "ideal"):
        return PerfectReflector()
    raise KeyError(f"unknown material preset {name!r}")


# --- Kramers-Kronig -------------------------------------------------------

_LOW_TAILS = ("drude", "linear", "zero")
_HIGH_TAILS = ("drude", "zero")


def _kk_integral(omega: np.ndarray, im_eps: np.ndarray, xi: np.ndarray,
                 low_tail: str, high_tail: str) -> np.ndarray:
    """int_0^inf w Im eps(w) / (w^2 + xi^2) dw for the piecewise-linear data.

    Inside the grid the linear interpolant is integrated exactly.  Below the
    grid Im eps is continued as ``~ 1/w`` (drude), ``~ w`` (linear) or 0;
    above it as ``~ w^-3`` (drude) or 0.
    """
    x = xi[:, None]
    w0, w1 = omega[:-1][None, :], omega[1:][None, :]
    f0, f1 = im_eps[:-1][None, :], im_eps[1:][None, :]
    slope = (f1 - f0) / (w1 - w0)
    icpt = f0 - slope * w0
    # int w/(w^2+x^2) = ln(w^2+x^2)/2 ; int w^2/(w^2+x^2) = w - x atan(w/x)
    i1 = 0.5 * np.log((w1 ** 2 + x ** 2) / (w0 ** 2 + x ** 2))
    i2 = (w1 - w0) - x * np.arctan((w1 - w0) * x / (x * x + w0 * w1))
    total = np.sum(icpt * i1 + slope * i2, axis=1)

    wa, fa = omega[0], im_eps[0]
    if low_tail == "drude":
        total += fa * wa / xi * np.arctan(wa / xi)
    elif low_tail == "linear":
        z = wa / xi
        total += fa * xi / wa * _z_minus_atan(z)

    wb, fb = omega[-1], im_eps[-1]
    if high_tail == "drude":
        # int_wb^inf fb wb^3 / (w^2 (w^2 + xi^2)) dw
        y = xi / wb
        total += fb * _one_minus_atan_ratio(y) / y ** 2
    return total


def _z_minus_atan(z: np.ndarray) -> np.ndarray:
    """z - atan(z) without cancellation for small z."""
    z2 = z * z
    series = z * z2 * (1 / 3 - z2 * (1 / 5 - z2 * (1 / 7 - z2 / 9)))
    return np.where(z < 1e-2, series, z - np.arctan(z))


def _one_minus_atan_ratio(y: np.ndarray) -> np.ndarray:
    """1 - atan(y)/y without cancellation for small y."""
    y2 = y * y
    series = y2 * (1 / 3 - y2 * (1 / 5 - y2 * (1 / 7 - y2 / 9)))
    return np.where(y < 1e-2, series, 1.0 - np.arctan(y) / y)


def kramers_kronig_to_imaginary_axis(omega, im_eps, xi_grid=None, *,
                                     low_tail: str = "drude", high_tail: str = "drude",
                                     n_xi: int = 200, name: str = "tabulated") -> TabulatedDielectric:
    """Transform real-axis absorption ``Im eps(omega)`` to ``eps(i xi)``.

    eps(i xi) = 1 + (2/pi) int_0^inf w Im eps(w) / (w^2 + xi^2) dw

    The default output grid is ``n_xi`` log-spaced points spanning the input
    frequency range.
    """
    omega = np.asarray(omega, dtype=float)
    im_eps = np.asarray(im_eps, dtype=float)
    if omega.ndim != 1 or omega.size < 2 or omega.shape != im_eps.shape:
        raise ValueError("omega and im_eps must be 1-D arrays of equal length >= 2")
    if np.any(~np.isfinite(omega)) or np.any(omega <= 0):
        raise ValueError("omega grid must be finite and > 0")
    if np.any(np.diff(omega) <= 0):
        raise ValueError("omega grid must be strictly increasing")
    if np.any(~np.isfinite(im_eps)) or np.any(im_eps < 0):
        raise ValueError("absorption Im eps must be finite and >= 0")
    if low_tail not in _LOW_TAILS or high_tail not in _HIGH_TAILS:
        raise ValueError(f"tail models must be in {_LOW_TAILS} / {_HIGH_TAILS}")
    if xi_grid is None:
        xi_grid = np.geomspace(omega[0], omega[-1], n_xi)
    xi_grid = _check_xi(xi_grid)
    values = 1.0 + (2.0 / np.pi) * _kk_integral(omega, im_eps, xi_grid, low_tail, high_tail)
    # rounding can leave a vacuum value a hair below 1
    values = np.maximum(values, 1.0)
    return TabulatedDielectric(xi_grid, values, name=name)


# --- file ingestion -------------------------------------------------------

def load_optical_table(path: str | os.PathLike, format: str | None = None, **kk_options) -> TabulatedDielectric:
    """Read an optical data file.

    The file must declare ``#format: A`` (columns ``xi_rad_per_s epsilon``)
    or ``#format: B`` (columns ``omega_rad_per_s n k``); other ``#`` lines
    are comments.  Format B is converted with ``Im eps = 2 n k`` and then
    passed through :func:`kramers_kronig_to_imaginary_axis`.  ``format``,
    when given, must agree with the header.
    """
    declared = None
    rows: list[tuple[int, list[float]]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.lower().startswith("format:"):
                    tag = body.split(":", 1)[1].strip().upper()
                    if tag not in ("A", "B"):
                        raise OpticalTableError(f"unknown format tag {tag!r}", lineno)
                    declared = tag
                continue
            try:
                numbers = [float(tok) for tok in line.split()]
            except ValueError:
                raise OpticalTableError(f"non-numeric data row {line!r}", lineno) from None
            rows.append((lineno, numbers))

    if declared is None:
        raise OpticalTableError("missing mandatory '#format: A|B' header")
    if format is not None:
        wanted = {"a": "A", "b": "B", "epsilon-imag-axis": "A", "n-and-k-real-axis": "B"}.get(format.lower())
        if wanted is None:
            raise ValueError(f"unknown format {format!r}")
        if wanted != declared:
            raise OpticalTableError(f"file declares format {declared}, caller asked for {wanted}")
    ncol = 2 if declared == "A" else 3
    if len(rows) < 2:
        raise OpticalTableError("need at least two data rows")

    prev = -math.inf
    for lineno, numbers in rows:
        if len(numbers) != ncol:
            raise OpticalTableError(f"expected {ncol} columns, found {len(numbers)}", lineno)
        if not all(math.isfinite(v) for v in numbers):
            raise OpticalTableError("non-finite value", lineno)
        if numbers[0] <= 0:
            raise OpticalTableError("frequency must be > 0", lineno)
        if numbers[0] <= prev:
            raise OpticalTableError("frequency column is not strictly increasing", lineno)
        prev = numbers[0]
        if declared == "A" and numbers[1] < 1.0:
            raise OpticalTableError("eps(i xi) must be >= 1", lineno)
        if declared == "B" and (numbers[1] < 0 or numbers[2] < 0):
            raise OpticalTableError("n and k must be non-negative", lineno)

    data = np.array([r[1] for r in rows])
    name = os.path.basename(os.fspath(path))
    if declared == "A":
        return TabulatedDielectric(data[:, 0], data[:, 1], name=name)
    im_eps = 2.0 * data[:, 1] * data[:, 2]
    return kramers_kronig_to_imaginary_axis(data[:, 0], im_eps, name=name, **kk_options)
