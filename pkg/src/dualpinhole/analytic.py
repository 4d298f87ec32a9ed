"""Closed-form fringe models, wire interception and duality metrics.

The coherent irradiance of two apodized pinhole beams at the fringe plane is
``[2 cos(pi x / u) J1(beta) / beta]^2`` with ``beta = 1.22 pi x / s``
(``1.22`` taken as ``j_11 / pi`` with ``j_11`` the first zero of J1); the
decoherent (no cross term) irradiance is ``2 [J1(beta) / beta]^2``. Both are
zero beyond the apodization radius ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .field import IrradianceProfile, flux

__all__ = [
    "bessel_j1",
    "jinc_half",
    "fringe_spacing",
    "airy_radius",
    "FringeModel",
    "WireGrid",
    "DualityMetrics",
    "coherent_irradiance",
    "decoherent_irradiance",
    "coherent_profile",
    "decoherent_profile",
    "wire_loss",
    "visibility",
    "which_way_knowledge",
    "duality_sum",
    "eta",
    "AIRY_FIRST_ZERO",
]

# first zero of J1; AIRY_FACTOR is the familiar "1.22" carried to full precision
# so that beta(s) lands exactly on the envelope zero
AIRY_FIRST_ZERO = 3.8317059702075125
AIRY_FACTOR = AIRY_FIRST_ZERO / math.pi

_SERIES_LIMIT = 8.0
_SERIES_TERMS = 40

# Asymptotic rational forms for x > 5 (Cephes j1.c, Moshier), used beyond the
# power-series range.
_PP = np.array([
    7.62125616208173112003e-4, 7.31397056940917570436e-2, 1.12719608129684925192e0,
    5.11207951146807644818e0, 8.42404590141772420927e0, 5.21451598682361504063e0,
    1.00000000000000000254e0,
])
_PQ = np.array([
    5.71323128072548699714e-4, 6.88455908754495404082e-2, 1.10514232634061696926e0,
    5.07386386128601488557e0, 8.39985554327604159757e0, 5.20982848682361821619e0,
    9.99999999999999997461e-1,
])
_QP = np.array([
    5.10862594750176621635e-2, 4.98213872951233449420e0, 7.58238284132545283818e1,
    3.66779609360150777800e2, 7.10856304998926107277e2, 5.97489612400613639965e2,
    2.11688757100572135698e2, 2.52070205858023719784e1,
])
_QQ = np.array([
    1.0, 7.42373277035675149943e1, 1.05644886038262816351e3, 4.98641058337653607651e3,
    9.56231892404756170795e3, 7.99704160447350683650e3, 2.82619278517639096600e3,
    3.36093607810698293419e2,
])


def _jinc_half_series(x: np.ndarray) -> np.ndarray:
    # J1(x)/x = sum_k (-1)^k (x/2)^(2k) / (2 k! (k+1)!)
    q = -0.25 * x * x
    term = np.full_like(x, 0.5)
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + 1))
        total = total + term
    return total


def _j1_asymptotic(x: np.ndarray) -> np.ndarray:
    # x > 0 only
    w = 5.0 / x
    z = w * w
    p = np.polyval(_PP, z) / np.polyval(_PQ, z)
    q = np.polyval(_QP, z) / np.polyval(_QQ, z)
    xn = x - 0.75 * math.pi
    return math.sqrt(2.0 / math.pi) * (p * np.cos(xn) - w * q * np.sin(xn)) / np.sqrt(x)


def _as_float_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("bessel_j1 received NaN")
    return np.atleast_1d(arr), arr.ndim == 0


def bessel_j1(x):
    """Bessel function of the first kind, order one.

    Power series for ``|x| <= 8`` and the asymptotic rational form beyond;
    absolute error below 1e-10 everywhere. Accepts scalars or arrays.
    """
    arr, scalar = _as_float_array(x)
    ax = np.abs(arr)
    out = np.empty_like(arr)
    small = ax <= _SERIES_LIMIT
    out[small] = arr[small] * _jinc_half_series(arr[small])
    big = ~small
    out[big] = np.sign(arr[big]) * _j1_asymptotic(ax[big])
    return float(out[0]) if scalar else out


def jinc_half(x):
    """``J1(x) / x`` with the removable singularity filled in (value 1/2 at 0)."""
    arr, scalar = _as_float_array(x)
    ax = np.abs(arr)
    out = np.empty_like(arr)
    small = ax <= _SERIES_LIMIT
    out[small] = _jinc_half_series(arr[small])
    big = ~small
    out[big] = _j1_asymptotic(ax[big]) / ax[big]
    return float(out[0]) if scalar else out


def _positive(**kw):
    for name, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive, got {v}")


def fringe_spacing(l: float, wavelength: float, a: float) -> float:
    """Peak-to-peak fringe spacing ``u = l * wavelength / a``."""
    _positive(l=l, wavelength=wavelength, a=a)
    return l * wavelength / a


def airy_radius(l: float, wavelength: float, b: float, mode: str = "first_zero") -> float:
    """Radius of the central Airy disk at distance ``l`` from a pinhole of diameter ``b``.

    ``first_zero`` gives the first zero of the circular-aperture envelope,
    ``1.22 l wavelength / b`` (12.69 mm for the default apparatus).
    ``paper_text`` gives ``l wavelength / b`` (10.4 mm) for comparison runs.
    """
    _positive(l=l, wavelength=wavelength, b=b)
    if mode == "first_zero":
        return AIRY_FACTOR * l * wavelength / b
    if mode == "paper_text":
        return l * wavelength / b
    raise ValueError(f"unknown airy mode {mode!r}")


@dataclass(frozen=True)
class FringeModel:
    """Fringe spacing ``u``, Airy radius ``s`` and amplitude scale of the pattern."""

    u: float
    s: float
    amplitude_scale: float = 1.0

    def __post_init__(self):
        _positive(u=self.u, s=self.s, amplitude_scale=self.amplitude_scale)
        if 2 * self.s / self.u < 1:
            raise ValueError(f"fringe count 2s/u = {2 * self.s / self.u:.3g} < 1")

    @property
    def fringe_count(self) -> float:
        return 2 * self.s / self.u

    def dark_fringes(self) -> np.ndarray:
        """Positions ``(2k+1) u / 2`` of every dark fringe inside ``|x| < s``."""
        kmax = int(np.floor(self.s / self.u - 0.5))
        pos = (2 * np.arange(kmax + 1) + 1) * self.u / 2
        pos = pos[pos < self.s]
        return np.concatenate([-pos[::-1], pos])


@dataclass(frozen=True)
class WireGrid:
    """Opaque wires of thickness ``e`` centred at ``centers`` (m).

    If ``wavelength`` is given the opacity regime ``e >= 20 wavelength`` is
    enforced.
    """

    centers: tuple[float, ...]
    thickness: float
    wavelength: float | None = None

    def __post_init__(self):
        centers = tuple(sorted(float(c) for c in self.centers))
        object.__setattr__(self, "centers", centers)
        _positive(thickness=self.thickness)
        if self.wavelength is not None and self.thickness < 20 * self.wavelength:
            raise ValueError(
                f"wire thickness {self.thickness:g} m is below the opacity regime "
                f"(20 wavelengths = {20 * self.wavelength:g} m)"
            )
        gaps = np.diff(centers)
        if np.any(gaps < self.thickness):
            raise ValueError("wires overlap")

    @property
    def count(self) -> int:
        return len(self.centers)

    def intervals(self) -> list[tuple[float, float]]:
        h = 0.5 * self.thickness
        return [(c - h, c + h) for c in self.centers]

    @classmethod
    def at_dark_fringes(
        cls,
        u: float,
        count: int,
        thickness: float,
        offset: float | Sequence[float] = 0.0,
        wavelength: float | None = None,
    ) -> WireGrid:
        """``count`` wires (even) at the central dark fringes ``±(2k+1) u / 2``."""
        if count % 2:
            raise ValueError(f"wire count must be even, got {count}")
        half = (2 * np.arange(count // 2) + 1) * u / 2
        centers = np.concatenate([-half[::-1], half])
        centers = centers + np.broadcast_to(np.asarray(offset, float), centers.shape)
        return cls(tuple(centers), thickness, wavelength)


@dataclass(frozen=True)
class DualityMetrics:
    V: float
    K: float
    duality_sum: float
    eta: float | None = None


def _cospi(t: np.ndarray) -> np.ndarray:
    """cos(pi t) with exact zeros at half-integers (allowing a few ulps of slack)."""
    r = np.remainder(t + 0.5, 1.0) - 0.5  # in [-0.5, 0.5)
    n = np.rint(t - r)
    mag = np.sin(np.pi * (0.5 - np.abs(r)))
    slack = 8 * np.finfo(float).eps * np.maximum(1.0, np.abs(t))
    mag = np.where(np.abs(np.abs(r) - 0.5) <= slack, 0.0, mag)
    return np.where(np.remainder(n, 2) == 0, mag, -mag)


def _beta(x: np.ndarray, s: float) -> np.ndarray:
    return AIRY_FACTOR * np.pi * x / s


def decoherent_irradiance(x, model: FringeModel) -> np.ndarray:
    """Pointwise ``2 [J1(beta)/beta]^2 * scale^2``, zero outside ``|x| <= s``."""
    x = np.asarray(x, float)
    val = 2.0 * jinc_half(_beta(x, model.s)) ** 2 * model.amplitude_scale**2
    return np.where(np.abs(x) <= model.s, val, 0.0)


def coherent_irradiance(x, model: FringeModel) -> np.ndarray:
    """Pointwise ``[2 cos(pi x/u) J1(beta)/beta]^2 * scale^2``, zero outside ``|x| <= s``."""
    x = np.asarray(x, float)
    amp = 2.0 * _cospi(x / model.u) * jinc_half(_beta(x, model.s)) * model.amplitude_scale
    return np.where(np.abs(x) <= model.s, amp * amp, 0.0)


def _profile_on(grid, fn, model: FringeModel) -> IrradianceProfile:
    x = np.asarray(grid.coords if hasattr(grid, "coords") else grid, float)
    if x.ndim != 1:
        raise ValueError("grid must be a 1D coordinate array")
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("grid must be uniform")
    return IrradianceProfile(fn(x, model), x[0], float(h[0]))


def coherent_profile(grid, model: FringeModel) -> IrradianceProfile:
    """Coherent two-beam irradiance sampled on ``grid`` (uniform coordinates or a grid object)."""
    return _profile_on(grid, coherent_irradiance, model)


def decoherent_profile(grid, model: FringeModel) -> IrradianceProfile:
    """Decoherent irradiance sampled on ``grid``."""
    return _profile_on(grid, decoherent_irradiance, model)


# 2-point Gauss-Legendre nodes on [-1, 1]; exact for the local quadratics
_GL_NODES = np.array([-1.0, 1.0]) / math.sqrt(3.0)


def _quadratic_interval_integral(x0: float, h: float, y: np.ndarray, lo: float, hi: float) -> float:
    """Integral of the piecewise local-quadratic interpolant of ``y`` over ``[lo, hi]``.

    Each piece between consecutive breakpoints uses the parabola through the
    three samples centred on the sample nearest the piece midpoint.
    """
    n = y.size
    first = int(np.floor((lo - x0) / h)) + 1
    last = int(np.ceil((hi - x0) / h)) - 1
    nodes = x0 + h * np.arange(first, last + 1)
    breaks = np.concatenate([[lo], nodes[(nodes > lo) & (nodes < hi)], [hi]])
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (a + b)
        c = int(np.clip(np.rint((mid - x0) / h), 1, n - 2))
        t = (0.5 * (b - a) * _GL_NODES + mid - (x0 + c * h)) / h
        # Lagrange basis on nodes -1, 0, 1
        vals = (
            y[c - 1] * 0.5 * t * (t - 1)
            + y[c] * (1 - t * t)
            + y[c + 1] * 0.5 * t * (t + 1)
        )
        total += 0.5 * (b - a) * float(np.sum(vals))
    return total


def wire_loss(profile: IrradianceProfile, grid: WireGrid) -> float:
    """Flux intercepted by the wires: sum of the profile integral over each footprint.

    Footprints narrower than four samples are integrated with local quadratic
    interpolation; wider ones with the linear (trapezoid) rule of
    :func:`dualpinhole.field.flux`. 2D profiles are reduced to their y-marginal
    first (wires run along y).
    """
    prof = profile.marginal()
    lo_grid, hi_grid = prof.extent
    total = 0.0
    for lo, hi in grid.intervals():
        if lo < lo_grid or hi > hi_grid:
            raise ValueError(f"wire footprint [{lo:g}, {hi:g}] lies outside the profile grid")
        if grid.thickness < 4 * prof.spacing:
            total += _quadratic_interval_integral(prof.origin, prof.spacing, prof.values, lo, hi)
        else:
            total += flux(prof, (lo, hi))
    return max(total, 0.0)


def visibility(i_max: float, i_min: float) -> float:
    """Fringe visibility ``(I_max - I_min) / (I_max + I_min)``."""
    if i_max < 0 or i_min < 0:
        raise ValueError("intensities must be non-negative")
    if i_max + i_min == 0:
        raise ValueError("no flux: I_max + I_min = 0")
    if i_min > i_max:
        raise ValueError(f"I_min ({i_min:g}) exceeds I_max ({i_max:g})")
    return (i_max - i_min) / (i_max + i_min)


def which_way_knowledge(i_own: float, i_cross: float) -> float:
    """Path knowledge ``(I_own - I_cross) / (I_own + I_cross)`` clamped to [0, 1]."""
    total = i_own + i_cross
    if total == 0:
        raise ValueError("no flux: I_own + I_cross = 0")
    return float(np.clip((i_own - i_cross) / total, 0.0, 1.0))


def duality_sum(V: float, K: float, tolerance: float = 0.01) -> tuple[float, bool]:
    """Return ``(V^2 + K^2, V^2 + K^2 > 1 + tolerance)``."""
    for name, v in (("V", V), ("K", K)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    total = V * V + K * K
    return total, total > 1.0 + tolerance


def eta(r_tilde: float, r: float) -> float:
    """Contrast ``(R~ - R) / (R~ + R)`` of decoherent vs coherent loss (not clamped)."""
    denom = r_tilde + r
    if denom == 0:
        raise ValueError("degenerate: R~ + R = 0")
    return (r_tilde - r) / denom
