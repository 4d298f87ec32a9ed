"""File emission: CSV profiles, 16-bit PGM images and JSON.

Floats are written with ``repr``, the shortest decimal string that reads back
to the same binary64 value.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .field import ComplexField, IrradianceProfile

__all__ = ["write_csv", "write_profile", "write_pgm", "read_pgm", "write_json"]

PGM_MAXVAL = 65535


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str | Path, header: list[str], columns: list) -> Path:
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    if len({c.shape[0] for c in cols}) > 1:
        raise ValueError("CSV columns differ in length")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    return path


def write_pgm(path: str | Path, image: np.ndarray, sidecar: dict | None = None) -> Path:
    """Binary PGM (P5), 16-bit big-endian, scaled so the maximum is 65535.

    ``sidecar`` (if given) is written next to the image as ``<name>.json``
    together with the scale factor.
    """
    path = Path(path)
    img = np.asarray(image, float)
    if img.ndim != 2:
        raise ValueError("PGM images must be 2D")
    if np.any(img < 0) or not np.all(np.isfinite(img)):
        raise ValueError("PGM images must be finite and non-negative")
    peak = float(img.max())
    scale = PGM_MAXVAL / peak if peak > 0 else 0.0
    data = np.rint(img * scale).astype(">u2")
    h, w = data.shape
    with path.open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n{PGM_MAXVAL}\n".encode("ascii"))
        fh.write(data.tobytes())
    if sidecar is not None:
        meta = dict(sidecar)
        meta["value_per_count"] = 1.0 / scale if scale else 0.0
        write_json(path.with_suffix(".json"), meta)
    return path


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a 16-bit P5 file written by :func:`write_pgm`."""
    raw = Path(path).read_bytes()
    # header: four whitespace-separated tokens, then exactly one whitespace byte
    parts = raw[:64].split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != PGM_MAXVAL:
        raise ValueError("only 16-bit PGM supported")
    n = 2 * w * h
    if len(raw) < n:
        raise ValueError("truncated PGM")
    return np.frombuffer(raw[len(raw) - n:], dtype=">u2").reshape(h, w)


def write_profile(path: str | Path, obj: IrradianceProfile | ComplexField) -> Path:
    """1D: CSV ``x_m,irradiance_au``. 2D: PGM plus ``{origin_m, spacing_m}`` sidecar."""
    prof = obj.irradiance() if isinstance(obj, ComplexField) else obj
    path = Path(path)
    if prof.dims == 1:
        return write_csv(path.with_suffix(".csv"), ["x_m", "irradiance_au"], [prof.coords, prof.values])
    return write_pgm(
        path.with_suffix(".pgm"),
        prof.values,
        {"origin_m": prof.origin, "spacing_m": prof.spacing},
    )


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path: str | Path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_default) + "\n")
    return path
