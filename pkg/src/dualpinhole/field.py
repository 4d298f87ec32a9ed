"""Sampled scalar fields, irradiance profiles and flux bookkeeping.

Every plane in the simulation is represented by a uniform grid. 1D grids are
indexed ``values[ix]``; 2D grids are square with equal pitch on both axes and
indexed ``values[iy, ix]``. ``origin`` is the coordinate of the first sample
along each axis, so sample ``i`` sits at ``origin + i * spacing``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ComplexField",
    "IrradianceProfile",
    "GridMismatchError",
    "flux",
    "apodize",
    "combine_coherent",
    "combine_decoherent",
    "interference_term",
    "irradiance",
    "centered_grid",
]

MIN_SAMPLES = 8


class GridMismatchError(ValueError):
    """Two sampled quantities do not live on the same grid."""


def centered_grid(samples: int, extent: float) -> tuple[float, float]:
    """Return ``(origin, spacing)`` for an even grid with a sample at zero."""
    spacing = extent / samples
    return -(samples // 2) * spacing, spacing


def _check_grid(values: np.ndarray, origin: float, spacing: float) -> None:
    if values.ndim not in (1, 2):
        raise ValueError(f"only 1D and 2D grids are supported, got ndim={values.ndim}")
    if values.ndim == 2 and values.shape[0] != values.shape[1]:
        raise ValueError(f"2D grids must be square, got shape {values.shape}")
    if min(values.shape) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples per axis, got {values.shape}")
    if not (np.isfinite(spacing) and spacing > 0):
        raise ValueError(f"spacing must be positive, got {spacing}")
    if not np.isfinite(origin):
        raise ValueError("origin must be finite")


class _Grid:
    values: np.ndarray
    origin: float
    spacing: float

    @property
    def dims(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    @property
    def coords(self) -> np.ndarray:
        """Sample coordinates along one axis (m)."""
        return self.origin + self.spacing * np.arange(self.n)

    @property
    def extent(self) -> tuple[float, float]:
        c = self.coords
        return float(c[0]), float(c[-1])

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, Y)`` coordinate arrays for a 2D grid."""
        c = self.coords
        return np.meshgrid(c, c)

    def radius(self) -> np.ndarray:
        if self.dims == 1:
            return np.abs(self.coords)
        X, Y = self.mesh()
        return np.hypot(X, Y)

    def same_grid(self, other: _Grid) -> bool:
        return (
            self.values.shape == other.values.shape
            and np.isclose(self.origin, other.origin, rtol=0, atol=1e-9 * self.spacing)
            and np.isclose(self.spacing, other.spacing, rtol=1e-12, atol=0)
        )


@dataclass(frozen=True)
class ComplexField(_Grid):
    """Complex scalar amplitude sampled on a uniform grid.

    Attributes
    ----------
    values : ndarray of complex
        Amplitude per sample (arbitrary scale).
    origin : float
        Coordinate of the first sample along each axis (m).
    spacing : float
        Sample pitch (m).
    wavelength : float
        Wavelength of the field (m).
    """

    values: np.ndarray
    origin: float
    spacing: float
    wavelength: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "spacing", float(self.spacing))
        _check_grid(values, self.origin, self.spacing)
        if not (np.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite samples")

    def replace(self, values: np.ndarray) -> ComplexField:
        """Same grid, new samples."""
        return ComplexField(values, self.origin, self.spacing, self.wavelength)

    @classmethod
    def zeros(cls, samples: int, extent: float, wavelength: float, dims: int = 1) -> ComplexField:
        origin, spacing = centered_grid(samples, extent)
        shape = (samples,) * dims
        return cls(np.zeros(shape, complex), origin, spacing, wavelength)

    def norm2(self) -> float:
        """Sum of ``|value|^2 * spacing**dims`` over the whole grid."""
        return float(np.sum(np.abs(self.values) ** 2) * self.spacing**self.dims)

    def irradiance(self) -> IrradianceProfile:
        return IrradianceProfile(np.abs(self.values) ** 2, self.origin, self.spacing)


@dataclass(frozen=True)
class IrradianceProfile(_Grid):
    """Non-negative irradiance (a.u.) on a uniform grid."""

    values: np.ndarray
    origin: float
    spacing: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        _check_grid(values, self.origin, self.spacing)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("irradiance must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "spacing", float(self.spacing))

    def replace(self, values: np.ndarray) -> IrradianceProfile:
        return IrradianceProfile(values, self.origin, self.spacing)

    def integral(self) -> float:
        return flux(self)

    def cut(self) -> IrradianceProfile:
        """1D profile along x through the row holding the global maximum."""
        if self.dims == 1:
            return self
        row = np.unravel_index(np.argmax(self.values), self.values.shape)[0]
        return IrradianceProfile(self.values[row], self.origin, self.spacing)

    def marginal(self) -> IrradianceProfile:
        """1D profile along x integrated over y."""
        if self.dims == 1:
            return self
        y_weights = np.full(self.n, self.spacing)
        y_weights[[0, -1]] *= 0.5
        return IrradianceProfile(y_weights @ self.values, self.origin, self.spacing)


def irradiance(field_or_profile: ComplexField | IrradianceProfile) -> IrradianceProfile:
    if isinstance(field_or_profile, ComplexField):
        return field_or_profile.irradiance()
    return field_or_profile


def _cumulative_trapezoid(y: np.ndarray, h: float) -> np.ndarray:
    c = np.empty_like(y)
    c[0] = 0.0
    np.cumsum(0.5 * h * (y[1:] + y[:-1]), out=c[1:])
    return c


def _linear_antiderivative(x0: float, h: float, y: np.ndarray, c: np.ndarray, t: float) -> float:
    """Integral from the first sample to ``t`` of the piecewise-linear interpolant."""
    pos = (t - x0) / h
    i = int(np.clip(np.floor(pos), 0, y.size - 2))
    frac = pos - i
    y_t = y[i] + frac * (y[i + 1] - y[i])
    return float(c[i] + 0.5 * frac * h * (y[i] + y_t))


def _flux_1d(values: np.ndarray, origin: float, spacing: float, lo: float, hi: float) -> float:
    x_first = origin
    x_last = origin + spacing * (values.size - 1)
    lo, hi = max(lo, x_first), min(hi, x_last)
    if hi <= lo:
        return 0.0
    c = _cumulative_trapezoid(values, spacing)
    return _linear_antiderivative(origin, spacing, values, c, hi) - _linear_antiderivative(
        origin, spacing, values, c, lo
    )


def flux(
    field_or_profile: ComplexField | IrradianceProfile,
    range: tuple[float, float] | None = None,
) -> float:
    """Radiant flux: trapezoid integral of the irradiance.

    ``range`` limits the integral along x (for 2D grids every row is
    integrated over the x-range and the rows are then integrated over y). The
    integrand between samples is the linear interpolant, so ranges need not
    fall on sample points and the result is additive over adjacent ranges.
    Ranges wider than the grid are clamped to it.
    """
    prof = irradiance(field_or_profile)
    if range is None:
        lo, hi = prof.extent
    else:
        lo, hi = float(range[0]), float(range[1])
        if not hi > lo:
            raise ValueError(f"degenerate integration range [{lo}, {hi}]")
    if prof.dims == 1:
        return _flux_1d(prof.values, prof.origin, prof.spacing, lo, hi)
    return _flux_1d(prof.marginal().values, prof.origin, prof.spacing, lo, hi)


def apodize(field: ComplexField, s: float, center: float = 0.0) -> ComplexField:
    """Zero every sample farther than ``s`` from ``center`` (radially in 2D).

    Samples outside are set to literal zeros; samples inside are untouched.
    """
    if not s > 0:
        raise ValueError(f"apodization radius must be positive, got {s}")
    if field.dims == 1:
        outside = np.abs(field.coords - center) > s
    else:
        X, Y = field.mesh()
        outside = np.hypot(X - center, Y) > s
    values = field.values.copy()
    values[outside] = 0.0
    return field.replace(values)


def _require_same_grid(a: ComplexField, b: ComplexField) -> None:
    if not a.same_grid(b):
        raise GridMismatchError(
            f"fields live on different grids: shape {a.values.shape} origin {a.origin} "
            f"spacing {a.spacing} vs shape {b.values.shape} origin {b.origin} spacing {b.spacing}"
        )


def combine_coherent(psi1: ComplexField, psi2: ComplexField) -> IrradianceProfile:
    """``|psi1 + psi2|^2`` samplewise."""
    _require_same_grid(psi1, psi2)
    return IrradianceProfile(np.abs(psi1.values + psi2.values) ** 2, psi1.origin, psi1.spacing)


def combine_decoherent(psi1: ComplexField, psi2: ComplexField) -> IrradianceProfile:
    """``|psi1|^2 + |psi2|^2`` samplewise: no cross term."""
    _require_same_grid(psi1, psi2)
    return IrradianceProfile(
        np.abs(psi1.values) ** 2 + np.abs(psi2.values) ** 2, psi1.origin, psi1.spacing
    )


def interference_term(psi1: ComplexField, psi2: ComplexField) -> np.ndarray:
    """Signed cross term ``2 Re(conj(psi1) psi2)`` samplewise."""
    _require_same_grid(psi1, psi2)
    return 2.0 * np.real(np.conj(psi1.values) * psi2.values)
