"""Experiment geometry and run configuration.

Defaults reproduce the dual-pinhole / lens apparatus: 650 nm light, pinholes
of 250 um diameter 2 mm apart, fringe plane 4 m downstream, f = 1 m lens of
30 mm clear aperture 4.2 m from the pinholes, and six 127 um wires.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .analytic import AIRY_FACTOR, airy_radius, fringe_spacing

__all__ = ["SetupConfig", "GridSpec", "CrossedBeams", "ConfigError", "load_config"]


class ConfigError(ValueError):
    """Invalid configuration file or value."""


@dataclass(frozen=True)
class GridSpec:
    """Sampling of the fringe plane (also used at the lens)."""

    samples: int = 2048
    extent_m: float = 0.03072

    @property
    def spacing(self) -> float:
        return self.extent_m / self.samples


@dataclass(frozen=True)
class CrossedBeams:
    """Two tilted Gaussian beams crossing at the wire plane (no lens).

    ``crossing_offset_m`` separates the two beam centres at the wire plane
    (0: they cross exactly there). ``angle_rad`` of ``None`` picks the angle whose fringe period equals the
    dual-pinhole fringe spacing ``u``, so the same wire grid applies.
    """

    angle_rad: float | None = None
    waist_m: float = 2.0e-3
    distance_m: float = 100.0
    crossing_offset_m: float = 0.0


@dataclass(frozen=True)
class SetupConfig:
    wavelength_m: float = 650e-9
    pinhole_separation_m: float = 2.0e-3
    pinhole_diameter_m: float = 250e-6
    pinhole_to_sigma1_m: float = 4.0
    pinhole_to_lens_m: float = 4.2
    focal_length_m: float = 1.0
    lens_diameter_m: float = 30e-3
    image_distance_mode: str = "thin_lens"
    image_distance_m: float = 1.38
    wire_thickness_m: float = 127e-6
    wire_count: int = 6
    wire_offset_m: float | tuple[float, ...] = 0.0
    airy_mode: str = "first_zero"
    fringe_spacing_override_m: float | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    dims: int = 1
    noise_pct: float = 0.0
    seed: int = 42
    illumination: str = "uniform"
    illumination_waist_m: float = 5.0e-3
    crossed_beams: CrossedBeams = field(default_factory=CrossedBeams)

    def __post_init__(self):
        lengths = {
            "wavelength_m": self.wavelength_m,
            "pinhole_separation_m": self.pinhole_separation_m,
            "pinhole_diameter_m": self.pinhole_diameter_m,
            "pinhole_to_sigma1_m": self.pinhole_to_sigma1_m,
            "pinhole_to_lens_m": self.pinhole_to_lens_m,
            "focal_length_m": self.focal_length_m,
            "lens_diameter_m": self.lens_diameter_m,
            "image_distance_m": self.image_distance_m,
            "wire_thickness_m": self.wire_thickness_m,
            "illumination_waist_m": self.illumination_waist_m,
            "grid.extent_m": self.grid.extent_m,
            "crossed_beams.waist_m": self.crossed_beams.waist_m,
            "crossed_beams.distance_m": self.crossed_beams.distance_m,
        }
        if self.fringe_spacing_override_m is not None:
            lengths["fringe_spacing_override_m"] = self.fringe_spacing_override_m
        if self.crossed_beams.angle_rad is not None:
            lengths["crossed_beams.angle_rad"] = self.crossed_beams.angle_rad
        for name, v in lengths.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise ConfigError(f"{name}: must be a positive number, got {v!r}")
        if self.image_distance_mode not in ("thin_lens", "pinned"):
            raise ConfigError(f"image_distance_mode: expected thin_lens|pinned, got {self.image_distance_mode!r}")
        if self.airy_mode not in ("first_zero", "paper_text"):
            raise ConfigError(f"airy_mode: expected first_zero|paper_text, got {self.airy_mode!r}")
        if self.illumination not in ("uniform", "gaussian"):
            raise ConfigError(f"illumination: expected uniform|gaussian, got {self.illumination!r}")
        if self.dims not in (1, 2):
            raise ConfigError(f"dims: expected 1 or 2, got {self.dims!r}")
        if not isinstance(self.wire_count, int) or self.wire_count < 0 or self.wire_count % 2:
            raise ConfigError(f"wire_count: must be a non-negative even integer, got {self.wire_count!r}")
        if not isinstance(self.grid.samples, int) or self.grid.samples < 64 or self.grid.samples % 2:
            raise ConfigError(f"grid.samples: must be an even integer >= 64, got {self.grid.samples!r}")
        if self.noise_pct < 0:
            raise ConfigError(f"noise_pct: must be >= 0, got {self.noise_pct}")
        if self.pinhole_to_lens_m <= self.pinhole_to_sigma1_m:
            raise ConfigError("pinhole_to_lens_m: lens must sit downstream of the fringe plane")
        if self.image_distance_mode == "thin_lens" and self.pinhole_to_lens_m <= self.focal_length_m:
            raise ConfigError("focal_length_m: object inside the focal length forms no real image")
        if not self.wire_thickness_m < self.u:
            raise ConfigError(
                f"wire_thickness_m: e < u violated (e = {self.wire_thickness_m:g} m, u = {self.u:g} m)"
            )
        if self.pinhole_diameter_m >= self.pinhole_separation_m:
            raise ConfigError("pinhole_diameter_m: pinholes overlap")

    # derived geometry ---------------------------------------------------

    @property
    def u(self) -> float:
        """Fringe spacing at the fringe plane (m)."""
        if self.fringe_spacing_override_m is not None:
            return self.fringe_spacing_override_m
        return fringe_spacing(self.pinhole_to_sigma1_m, self.wavelength_m, self.pinhole_separation_m)

    @property
    def s(self) -> float:
        """Apodization (Airy) radius at the fringe plane (m)."""
        return airy_radius(self.pinhole_to_sigma1_m, self.wavelength_m, self.pinhole_diameter_m, self.airy_mode)

    @property
    def q(self) -> float:
        """Lens-to-image distance (m)."""
        if self.image_distance_mode == "pinned":
            return self.image_distance_m
        p, f = self.pinhole_to_lens_m, self.focal_length_m
        return p * f / (p - f)

    @property
    def magnification(self) -> float:
        return self.q / self.pinhole_to_lens_m

    @property
    def image_separation(self) -> float:
        return self.pinhole_separation_m * self.magnification

    @property
    def rayleigh(self) -> float:
        return AIRY_FACTOR * self.wavelength_m * self.q / self.lens_diameter_m

    @property
    def crossed_angle(self) -> float:
        if self.crossed_beams.angle_rad is not None:
            return self.crossed_beams.angle_rad
        return self.wavelength_m / self.u

    def replace(self, **changes) -> SetupConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        if isinstance(d["wire_offset_m"], tuple):
            d["wire_offset_m"] = list(d["wire_offset_m"])
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SetupConfig:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        kwargs = dict(data)
        if "grid" in kwargs:
            kwargs["grid"] = _nested(GridSpec, kwargs["grid"], "grid")
        if "crossed_beams" in kwargs:
            kwargs["crossed_beams"] = _nested(CrossedBeams, kwargs["crossed_beams"], "crossed_beams")
        if isinstance(kwargs.get("wire_offset_m"), list):
            kwargs["wire_offset_m"] = tuple(float(v) for v in kwargs["wire_offset_m"])
            if len(kwargs["wire_offset_m"]) != kwargs.get("wire_count", cls.wire_count):
                raise ConfigError("wire_offset_m: list length must equal wire_count")
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _nested(klass, value, name):
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name for f in dataclasses.fields(klass)}
    unknown = sorted(set(value) - known)
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {', '.join(unknown)}")
    return klass(**value)


def load_config(path: str | Path) -> SetupConfig:
    """Read a JSON configuration; absent keys take the apparatus defaults."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return SetupConfig.from_dict(data)
