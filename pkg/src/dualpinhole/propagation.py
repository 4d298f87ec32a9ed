"""Scalar diffraction engine: free space, apertures, wires, thin lens.

Two propagators are provided. :func:`propagate_free` is the band-limited
angular-spectrum method on a fixed grid, used for short throws (fringe plane to
lens). :func:`propagate_far` evaluates the Fresnel integral as a matrix Fourier
transform onto an arbitrary output grid, which is what makes the 4 m throw
from the pinholes and the lens-to-image step cheap: the input can be sampled
finely around the apertures while the output grid is chosen independently.

The pipeline runs pinholes -> fringe plane (aperture stop, sigma0) -> wires
(sigma1) -> lens entrance -> image plane (sigma2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .analytic import AIRY_FACTOR, WireGrid
from .config import SetupConfig
from .field import ComplexField, IrradianceProfile, apodize, centered_grid, flux

__all__ = [
    "SamplingError",
    "FreeSpace",
    "AmplitudeMask",
    "ThinLens",
    "PlaneSet",
    "Masks",
    "VARIANTS",
    "propagate_free",
    "propagate_far",
    "apply_element",
    "make_masks",
    "wire_grid",
    "aperture_stop_radius",
    "run_pipeline",
    "resolution_estimate",
    "crosstalk",
    "fwhm",
    "image_centers",
    "scattered_fraction",
    "pinhole_fresnel_number",
]

VARIANTS = ("no_lens", "lens_only", "control", "decoherent_sim", "coherent_wg", "crossed_beams")
PLANES = ("source", "sigma0", "sigma1", "lens", "sigma2")


class SamplingError(ValueError):
    """The grid is too coarse for the field being propagated."""


# ---------------------------------------------------------------- elements


@dataclass(frozen=True)
class FreeSpace:
    distance: float

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError(f"free-space distance must be positive, got {self.distance}")


@dataclass(frozen=True)
class AmplitudeMask:
    """Real transmission mask in [0, 1] sampled on its own grid."""

    values: np.ndarray
    origin: float
    spacing: float
    plane: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, float)
        if np.any(v < 0) or np.any(v > 1):
            raise ValueError("mask values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def complement(self) -> AmplitudeMask:
        return AmplitudeMask(1.0 - self.values, self.origin, self.spacing, self.plane)


@dataclass(frozen=True)
class ThinLens:
    focal_length: float
    aperture_diameter: float

    def __post_init__(self):
        if self.focal_length == 0 or not np.isfinite(self.focal_length):
            raise ValueError("focal length must be finite and non-zero")
        if not self.aperture_diameter > 0:
            raise ValueError("lens aperture diameter must be positive")


# ----------------------------------------------------------- propagators


def _freqs(n: int, spacing: float) -> np.ndarray:
    return np.fft.fftfreq(n, spacing)


def _check_nyquist(field: ComplexField, threshold: float) -> None:
    spec = np.abs(np.fft.fftn(field.values)) ** 2
    total = spec.sum()
    if total == 0:
        return
    f = np.abs(_freqs(field.n, field.spacing))
    f_nyq = 0.5 / field.spacing
    edge = f > 0.9 * f_nyq
    if field.dims == 1:
        frac = spec[edge].sum() / total
    else:
        e2 = edge[:, None] | edge[None, :]
        frac = spec[e2].sum() / total
    if frac > threshold:
        raise SamplingError(
            f"{frac:.2e} of the spectral power sits within 10% of the Nyquist frequency; "
            f"required grid pitch <= {field.spacing / 2:.3e} m (current {field.spacing:.3e} m)"
        )


def propagate_free(
    field: ComplexField,
    distance: float,
    *,
    pad: bool = True,
    nyquist_threshold: float = 1e-3,
) -> ComplexField:
    """Band-limited angular-spectrum propagation over ``distance`` (m).

    The transfer function is clamped to the band in which its own sampling is
    alias-free (Matsushima-Shimobaba limit) and to propagating waves. With
    ``pad`` the field is zero-padded 2x per axis so the convolution is linear.
    """
    if distance == 0:
        return field
    _check_nyquist(field, nyquist_threshold)
    n = field.n
    m = 2 * n if pad else n
    lam = field.wavelength
    f = _freqs(m, field.spacing)
    df = 1.0 / (m * field.spacing)
    f_limit = 1.0 / (lam * math.sqrt((2 * df * distance) ** 2 + 1))
    if field.dims == 1:
        buf = np.zeros(m, complex)
        buf[:n] = field.values
        fx2 = f**2
        band = np.abs(f) <= f_limit
    else:
        buf = np.zeros((m, m), complex)
        buf[:n, :n] = field.values
        fx2 = f[None, :] ** 2 + f[:, None] ** 2
        band = (np.abs(f)[None, :] <= f_limit) & (np.abs(f)[:, None] <= f_limit)
    arg = 1.0 / lam**2 - fx2
    band &= arg > 0
    kz = 2 * np.pi * np.sqrt(np.where(band, arg, 0.0))
    # remove the carrier phase exp(i k z): irrelevant for irradiance, keeps values tame
    H = np.where(band, np.exp(1j * (kz - 2 * np.pi / lam) * distance), 0.0)
    out = np.fft.ifftn(np.fft.fftn(buf) * H)
    out = out[:n] if field.dims == 1 else out[:n, :n]
    return field.replace(out)


def _support_radius(field: ComplexField) -> float:
    nz = np.abs(field.values) > 0
    if not nz.any():
        return 0.0
    return float(np.max(field.radius()[nz]))


def propagate_far(
    field: ComplexField,
    distance: float,
    spacing: float,
    samples: int,
    *,
    fraunhofer: bool | None = None,
) -> ComplexField:
    """Fresnel (or Fraunhofer) propagation onto a new centred grid.

    Evaluates ``U2(x2) = (i lam z)^(-d/2) exp(i pi x2^2/(lam z))
    sum U1(x1) exp(i pi x1^2/(lam z)) exp(-2 pi i x1 x2/(lam z)) dx1^d`` as a
    separable matrix product, so input and output pitches are independent.
    The input chirp is dropped (single-transform Fraunhofer step) when
    ``fraunhofer`` is true, or, by default, when the Fresnel number of the
    field's support is below 0.05.
    """
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance}")
    lam = field.wavelength
    lz = lam * distance
    if fraunhofer is None:
        fraunhofer = _support_radius(field) ** 2 / lz < 0.05
    x1 = field.coords
    origin2, _ = centered_grid(samples, spacing * samples)
    x2 = origin2 + spacing * np.arange(samples)
    M = np.exp(-2j * np.pi * np.outer(x2, x1) / lz) * field.spacing
    chirp_in = np.ones_like(x1, dtype=complex) if fraunhofer else np.exp(1j * np.pi * x1**2 / lz)
    chirp_out = np.exp(1j * np.pi * x2**2 / lz)
    if field.dims == 1:
        out = (M @ (field.values * chirp_in)) * chirp_out / np.sqrt(1j * lz)
    else:
        A = field.values * chirp_in[None, :] * chirp_in[:, None]
        out = M @ A @ M.T
        out *= chirp_out[None, :] * chirp_out[:, None] / (1j * lz)
    return ComplexField(out, origin2, spacing, lam)


def _resample_mask(mask: AmplitudeMask, field: ComplexField) -> np.ndarray:
    if mask.values.shape == field.values.shape and np.isclose(mask.spacing, field.spacing) and np.isclose(
        mask.origin, field.origin, rtol=0, atol=1e-9 * field.spacing
    ):
        return mask.values
    ratio = field.spacing / mask.spacing
    if mask.values.ndim != field.dims or not (
        np.isclose(ratio, round(ratio)) or np.isclose(1 / ratio, round(1 / ratio))
    ):
        raise ValueError("mask grid is incompatible with the field grid")
    idx = np.rint((field.coords - mask.origin) / mask.spacing).astype(int)
    if idx.min() < 0 or idx.max() >= mask.values.shape[-1]:
        raise ValueError("mask grid does not cover the field grid")
    if field.dims == 1:
        return mask.values[idx]
    return mask.values[np.ix_(idx, idx)]


def apply_element(field: ComplexField, element) -> ComplexField:
    """Apply a mask, thin lens or free-space section to ``field``."""
    if isinstance(element, AmplitudeMask):
        return field.replace(field.values * _resample_mask(element, field))
    if isinstance(element, ThinLens):
        r = field.radius()
        phase = np.exp(-1j * np.pi * r**2 / (field.wavelength * element.focal_length))
        pupil = r <= element.aperture_diameter / 2
        return field.replace(np.where(pupil, field.values * phase, 0.0))
    if isinstance(element, FreeSpace):
        return propagate_free(field, element.distance)
    raise TypeError(f"unsupported element {element!r}")


# ------------------------------------------------------------------ masks


def wire_grid(config: SetupConfig) -> WireGrid | None:
    """Wire positions at the central dark fringes, including any misalignment offsets."""
    if config.wire_count == 0:
        return None
    grid = WireGrid.at_dark_fringes(
        config.u, config.wire_count, config.wire_thickness_m, config.wire_offset_m
    )
    if grid.thickness >= config.u:
        raise ValueError("wires wider than the fringe spacing")
    return grid


def aperture_stop_radius(config: SetupConfig, dims: int) -> float:
    """Radius passed by the aperture stop at the fringe plane.

    2D (circular pinholes): the configured Airy radius. 1D (slits): the first
    zero ``l lambda / b`` of the slit envelope, the 1D counterpart of the
    central Airy disk.
    """
    if dims == 2:
        return config.s
    return config.pinhole_to_sigma1_m * config.wavelength_m / config.pinhole_diameter_m


def _source_grid(config: SetupConfig, dims: int) -> tuple[int, float]:
    b = config.pinhole_diameter_m
    spacing = b / (50 if dims == 1 else 40)
    half = config.pinhole_separation_m / 2 + b
    n = 2 * int(math.ceil(half / spacing)) + 2
    return n, spacing


@dataclass(frozen=True)
class Masks:
    """Binary masks for one configuration. Pinhole 1 sits at ``-a/2``."""

    dual_pinhole: AmplitudeMask
    pinhole_1: AmplitudeMask
    pinhole_2: AmplitudeMask
    aperture_stop: AmplitudeMask
    wire_grid: AmplitudeMask

    def single_pinhole(self, which: int) -> AmplitudeMask:
        if which == 1:
            return self.pinhole_1
        if which == 2:
            return self.pinhole_2
        raise ValueError(f"pinhole index must be 1 or 2, got {which}")


def _grid_coords(n: int, spacing: float) -> tuple[float, np.ndarray]:
    origin, _ = centered_grid(n, n * spacing)
    return origin, origin + spacing * np.arange(n)


def _disk(coords: np.ndarray, dims: int, cx: float, radius: float) -> np.ndarray:
    if dims == 1:
        return (np.abs(coords - cx) <= radius).astype(float)
    X, Y = np.meshgrid(coords, coords)
    return (np.hypot(X - cx, Y) <= radius).astype(float)


def make_masks(config: SetupConfig, dims: int | None = None) -> Masks:
    """Pinhole masks on the source grid and stop/wire masks on the fringe-plane grid."""
    dims = dims or config.dims
    n_src, h_src = _source_grid(config, dims)
    o_src, x_src = _grid_coords(n_src, h_src)
    half_a, rb = config.pinhole_separation_m / 2, config.pinhole_diameter_m / 2
    p1 = _disk(x_src, dims, -half_a, rb)
    p2 = _disk(x_src, dims, +half_a, rb)

    n1, h1 = config.grid.samples, config.grid.spacing
    o1, x1 = _grid_coords(n1, h1)
    stop = _disk(x1, dims, 0.0, aperture_stop_radius(config, dims))
    wires = np.ones((n1,) * dims)
    grid = wire_grid(config)
    if grid is not None:
        if grid.centers[0] - grid.thickness / 2 < x1[0] or grid.centers[-1] + grid.thickness / 2 > x1[-1]:
            raise ValueError("wire grid extends beyond the fringe-plane grid")
        blocked = np.zeros(n1, bool)
        for lo, hi in grid.intervals():
            blocked |= (x1 >= lo) & (x1 <= hi)
        if dims == 1:
            wires[blocked] = 0.0
        else:
            wires[:, blocked] = 0.0
    return Masks(
        dual_pinhole=AmplitudeMask(p1 + p2, o_src, h_src, "source"),
        pinhole_1=AmplitudeMask(p1, o_src, h_src, "source"),
        pinhole_2=AmplitudeMask(p2, o_src, h_src, "source"),
        aperture_stop=AmplitudeMask(stop, o1, h1, "sigma0"),
        wire_grid=AmplitudeMask(wires, o1, h1, "sigma1"),
    )


# --------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class PlaneSet:
    """Fields recorded at each plane of one pipeline run, in optical order."""

    variant: str
    fields: Mapping[str, ComplexField]
    fluxes: Mapping[str, float]
    blocked_flux: float
    config: SetupConfig = field(repr=False)
    pinholes: str = "both"

    def profile(self, plane: str) -> IrradianceProfile:
        return self.fields[plane].irradiance()

    @property
    def planes(self) -> tuple[str, ...]:
        return tuple(p for p in PLANES if p in self.fields)


def _illumination(config: SetupConfig, coords: np.ndarray, dims: int) -> np.ndarray:
    if config.illumination == "uniform":
        return np.ones((coords.size,) * dims)
    w = config.illumination_waist_m
    if dims == 1:
        return np.exp(-(coords**2) / w**2)
    X, Y = np.meshgrid(coords, coords)
    return np.exp(-(X**2 + Y**2) / w**2)


def _image_grid(config: SetupConfig, dims: int) -> tuple[float, int]:
    half = max(1.2 * config.image_separation, 0.5e-3)
    samples = 2048 if dims == 1 else 512
    return 2 * half / samples, samples


def _source_field(config: SetupConfig, dims: int, pinholes: str) -> ComplexField:
    masks = make_masks(config, dims)
    mask = {"both": masks.dual_pinhole, "1": masks.pinhole_1, "2": masks.pinhole_2}[pinholes]
    coords = mask.origin + mask.spacing * np.arange(mask.values.shape[-1])
    amp = _illumination(config, coords, dims) * mask.values
    return ComplexField(amp, mask.origin, mask.spacing, config.wavelength_m)


def _crossed_source(config: SetupConfig, dims: int) -> tuple[ComplexField, ComplexField]:
    """The two tilted Gaussian beams at their crossing plane."""
    n, h = config.grid.samples, config.grid.spacing
    origin, x = _grid_coords(n, h)
    k = 2 * np.pi / config.wavelength_m
    half_angle = config.crossed_angle / 2
    w = config.crossed_beams.waist_m
    d = config.crossed_beams.crossing_offset_m / 2
    if dims == 1:
        tilt, r2 = x, 0.0
    else:
        tilt, Y = np.meshgrid(x, x)
        r2 = Y**2
    env1 = np.exp(-((tilt + d) ** 2 + r2) / w**2)
    env2 = np.exp(-((tilt - d) ** 2 + r2) / w**2)
    b1 = ComplexField(env1 * np.exp(1j * k * half_angle * tilt), origin, h, config.wavelength_m)
    b2 = ComplexField(env2 * np.exp(-1j * k * half_angle * tilt), origin, h, config.wavelength_m)
    return b1, b2


def pinhole_fresnel_number(config: SetupConfig) -> float:
    """Fresnel number of a single pinhole seen from the fringe plane."""
    return (config.pinhole_diameter_m / 2) ** 2 / (config.wavelength_m * config.pinhole_to_sigma1_m)


def _pinhole_far_field(config: SetupConfig) -> bool:
    # each pinhole is in its far field (N_F ~ 0.006 for the apparatus), so the
    # pattern of each beam is centred on the axis as in the closed-form model
    return pinhole_fresnel_number(config) < 0.05


def _finish(variant, config, fields, blocked, pinholes="both") -> PlaneSet:
    fluxes = {name: flux(f) for name, f in fields.items()}
    return PlaneSet(variant, fields, fluxes, blocked, config, pinholes)


def run_pipeline(
    config: SetupConfig,
    variant: str,
    dims: int | None = None,
    *,
    pinholes: str | None = None,
    wires: bool | None = None,
) -> PlaneSet:
    """Propagate one experimental variant through every plane.

    ``pinholes`` ("both", "1", "2") and ``wires`` override the variant's
    defaults; they are used for the single-pinhole crosstalk runs.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    dims = dims or config.dims
    if variant == "crossed_beams":
        return _run_crossed(config, dims, wires=True if wires is None else wires)

    default_pinholes = "2" if variant == "decoherent_sim" else "both"
    default_wires = variant in ("decoherent_sim", "coherent_wg")
    pinholes = pinholes or default_pinholes
    wires = default_wires if wires is None else wires
    masks = make_masks(config, dims)

    src = _source_field(config, dims, pinholes)
    n1, h1 = config.grid.samples, config.grid.spacing
    at_sigma = propagate_far(src, config.pinhole_to_sigma1_m, h1, n1, fraunhofer=_pinhole_far_field(config))
    sigma0 = apodize(at_sigma, aperture_stop_radius(config, dims))
    sigma1 = apply_element(sigma0, masks.wire_grid) if wires else sigma0
    blocked = flux(sigma0.replace(sigma0.values * masks.wire_grid.complement().values)) if wires else 0.0
    fields = {"source": src, "sigma0": sigma0, "sigma1": sigma1}
    if variant == "no_lens":
        return _finish(variant, config, fields, blocked, pinholes)

    gap = config.pinhole_to_lens_m - config.pinhole_to_sigma1_m
    at_lens = propagate_free(sigma1, gap, pad=(dims == 1))
    fields["lens"] = at_lens
    after = apply_element(at_lens, ThinLens(config.focal_length_m, config.lens_diameter_m))
    h2, n2 = _image_grid(config, dims)
    fields["sigma2"] = propagate_far(after, config.q, h2, n2, fraunhofer=False)
    return _finish(variant, config, fields, blocked, pinholes)


def _run_crossed(config: SetupConfig, dims: int, wires: bool) -> PlaneSet:
    b1, b2 = _crossed_source(config, dims)
    sigma0 = b1.replace(b1.values + b2.values)
    masks = make_masks(config, dims)
    sigma1 = apply_element(sigma0, masks.wire_grid) if wires else sigma0
    blocked = flux(sigma0.replace(sigma0.values * masks.wire_grid.complement().values)) if wires else 0.0
    z = config.crossed_beams.distance_m
    sep = config.crossed_angle * z
    w_z = config.crossed_beams.waist_m * math.hypot(1.0, z * config.wavelength_m / (math.pi * config.crossed_beams.waist_m**2))
    half = sep / 2 + 4 * w_z
    samples = 1024 if dims == 1 else 256
    sigma2 = propagate_far(sigma1, z, 2 * half / samples, samples, fraunhofer=False)
    fields = {"sigma0": sigma0, "sigma1": sigma1, "sigma2": sigma2}
    return _finish("crossed_beams", config, fields, blocked)


# ------------------------------------------------------------ image metrics


def fwhm(profile: IrradianceProfile, around: float | None = None) -> float:
    """Full width at half maximum of the peak (nearest ``around`` if given, else the brightest).

    Half-maximum crossings are located by linear interpolation.
    """
    prof = profile.cut()
    y = prof.values
    if y.max() <= 0 or np.all(y == y[0]):
        raise ValueError("flat image: no peak to measure")
    if around is None:
        i = int(np.argmax(y))
    else:
        x = prof.coords
        # brightest sample within a small window around the requested position
        win = np.abs(x - around) <= 0.25 * max(abs(around), 10 * prof.spacing)
        idx = np.flatnonzero(win)
        i = int(idx[np.argmax(y[idx])])
    half = 0.5 * y[i]
    left = i
    while left > 0 and y[left - 1] > half:
        left -= 1
    right = i
    while right < y.size - 1 and y[right + 1] > half:
        right += 1
    h = prof.spacing
    # interpolate between the last sample above and the first below half max
    if left > 0:
        xl = left - (y[left] - half) / (y[left] - y[left - 1])
    else:
        xl = 0.0
    if right < y.size - 1:
        xr = right + (y[right] - half) / (y[right] - y[right + 1])
    else:
        xr = float(y.size - 1)
    return float((xr - xl) * h)


def resolution_estimate(
    image: IrradianceProfile,
    wavelength: float,
    image_distance: float,
    lens_diameter: float,
) -> dict[str, float]:
    """FWHM of the brighter image peak and the Rayleigh limit ``1.22 lambda q / d``."""
    return {
        "fwhm": fwhm(image),
        "rayleigh": AIRY_FACTOR * wavelength * image_distance / lens_diameter,
    }


def crosstalk(image: IrradianceProfile, boundary: float = 0.0) -> float:
    """Fraction of a single channel's image flux landing across ``boundary``.

    ``image`` is the image-plane irradiance of a run with one pinhole open; the
    channel's own side is the side of ``boundary`` holding the image centroid.
    """
    prof = image.marginal()
    lo, hi = prof.extent
    if not lo <= boundary <= hi:
        raise ValueError(f"boundary {boundary:g} m lies outside the image grid [{lo:g}, {hi:g}]")
    total = flux(prof)
    if total <= 0:
        raise ValueError("image carries no flux")
    centroid = float(np.sum(prof.coords * prof.values) / np.sum(prof.values))
    if boundary in (lo, hi):
        far = 0.0
    elif centroid >= boundary:
        far = flux(prof, (lo, boundary))
    else:
        far = flux(prof, (boundary, hi))
    return far / total


def image_centers(planes: PlaneSet) -> list[float]:
    """Geometric image positions of the open pinholes (image is inverted)."""
    half = planes.config.image_separation / 2
    return {"both": [-half, half], "1": [half], "2": [-half]}[planes.pinholes]


def scattered_fraction(planes: PlaneSet, radius_factor: float = 3.0) -> float:
    """Share of the light leaving the wire plane that misses the image cores.

    A core is a window of ``radius_factor`` Rayleigh radii around each open
    image. Light diffracted by the wires lands outside the cores (or off the
    image grid altogether), so this measures diffraction by the wires
    independently of the core width.
    """
    if "sigma2" not in planes.fields:
        raise ValueError(f"variant {planes.variant!r} has no image plane")
    image = planes.profile("sigma2").marginal()
    r = radius_factor * planes.config.rayleigh
    inside = sum(flux(image, (c - r, c + r)) for c in image_centers(planes))
    return 1.0 - inside / planes.fluxes["sigma1"]
