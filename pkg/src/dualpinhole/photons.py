"""Monte Carlo photon arrivals and coherent-versus-decoherent discrimination.

Each detected photon is one draw from the normalized irradiance. Draws use
exact inversion of the cumulative trapezoid table: between samples the
density is the linear interpolant, so within a cell the CDF is quadratic and
is inverted in closed form.

Whether a dot pattern came from the coherent or the decoherent source is
decided by the sign of the log-likelihood ratio

    Lambda = sum_i ln(p_coh(x_i) / p_dec(x_i)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import analytic as an
from .config import SetupConfig
from .field import IrradianceProfile, flux

__all__ = [
    "PhotonSample",
    "BuildupTable",
    "sample",
    "log_likelihood_ratio",
    "buildup_study",
    "source_profiles",
    "single_photon_accuracy",
    "kl_divergence",
    "DENSITY_FLOOR",
    "GENERATOR",
]

DENSITY_FLOOR = 1e-12
GENERATOR = "numpy.random.Generator(PCG64)"
SOURCES = ("coherent", "decoherent")
PROFILE_SAMPLES = 20001


@dataclass(frozen=True)
class PhotonSample:
    positions: np.ndarray
    source: str
    seed: int | tuple | None
    count: int

    def __post_init__(self):
        pos = np.asarray(self.positions, float)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if pos.shape[0] != self.count:
            raise ValueError(f"count {self.count} does not match {pos.shape[0]} positions")


def _cdf_table(y: np.ndarray, h: float) -> np.ndarray:
    c = np.empty_like(y)
    c[0] = 0.0
    np.cumsum(0.5 * h * (y[1:] + y[:-1]), out=c[1:])
    return c


def _invert(u: np.ndarray, x0: float, h: float, y: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Positions where the piecewise-quadratic CDF equals ``u * total``."""
    target = u * c[-1]
    i = np.searchsorted(c, target, side="right") - 1
    i = np.clip(i, 0, y.size - 2)
    # side="right" skips zero-mass cells sharing a CDF value with the next cell
    y0, y1 = y[i], y[i + 1]
    m = target - c[i]
    slope = y1 - y0
    # solve h*y0*t + h*slope*t^2/2 = m for t in [0, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.sqrt(np.maximum(y0 * y0 + 2.0 * slope * m / h, 0.0))
        t_quad = 2.0 * m / (h * (y0 + disc))
        t_lin = m / (h * y0)
    t = np.where(np.abs(slope) > 1e-12 * np.maximum(y0, y1), t_quad, t_lin)
    t = np.clip(np.nan_to_num(t, nan=0.5), 0.0, 1.0)
    return x0 + h * (i + t)


def sample(
    profile: IrradianceProfile,
    n: int,
    seed: int | tuple | np.random.Generator | None = None,
    source: str = "unknown",
) -> PhotonSample:
    """Draw ``n`` independent arrival positions from ``profile``.

    1D profiles give an array of x; 2D profiles give ``(n, 2)`` rows of
    ``(x, y)``, drawing y from the marginal and then x from the nearest row.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    total = flux(profile)
    if not total > 0:
        raise ValueError("cannot sample a zero-flux profile")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    seed_tag = None if isinstance(seed, np.random.Generator) else seed
    h, x0 = profile.spacing, profile.origin
    if profile.dims == 1:
        y = profile.values
        pos = _invert(rng.random(n), x0, h, y, _cdf_table(y, h)) if n else np.empty(0)
        return PhotonSample(pos, source, seed_tag, n)
    rows = profile.values
    marg = profile.marginal().values  # integrated over y, function of x
    # marginal over x as a function of y for the first coordinate draw
    ymarg = rows.sum(axis=1) * h
    yy = _invert(rng.random(n), x0, h, ymarg, _cdf_table(ymarg, h))
    iy = np.clip(np.rint((yy - x0) / h).astype(int), 0, rows.shape[0] - 1)
    xx = np.empty(n)
    u = rng.random(n)
    for r in np.unique(iy):
        sel = iy == r
        row = rows[r] if rows[r].any() else marg
        xx[sel] = _invert(u[sel], x0, h, row, _cdf_table(row, h))
    return PhotonSample(np.column_stack([xx, yy]), source, seed_tag, n)


def _density(profile: IrradianceProfile, x: np.ndarray) -> np.ndarray:
    return np.interp(x, profile.coords, profile.values, left=0.0, right=0.0) / flux(profile)


def log_likelihood_ratio(
    positions: PhotonSample | np.ndarray,
    coherent: IrradianceProfile,
    decoherent: IrradianceProfile,
    floor: float = DENSITY_FLOOR,
) -> float:
    """``Lambda`` for 1D positions; positive favours the coherent source.

    Both profiles are normalized to unit integral here. Densities are floored
    at ``floor`` times the uniform density over the profile extent, so a dot
    on an exact zero costs a large but finite penalty.
    """
    x = np.asarray(positions.positions if isinstance(positions, PhotonSample) else positions, float)
    if x.size == 0:
        return 0.0
    lo, hi = coherent.extent
    if x.min() < lo or x.max() > hi:
        raise ValueError("positions outside the profile support")
    f = floor / (hi - lo)
    pc = np.maximum(_density(coherent, x), f)
    pd = np.maximum(_density(decoherent, x), f)
    return float(np.sum(np.log(pc / pd)))


def source_profiles(config: SetupConfig, samples: int = PROFILE_SAMPLES) -> tuple[IrradianceProfile, IrradianceProfile]:
    """Closed-form coherent and decoherent irradiance on ``[-s, s]``."""
    model = an.FringeModel(config.u, config.s)
    x = np.linspace(-config.s, config.s, samples)
    return an.coherent_profile(x, model), an.decoherent_profile(x, model)


def single_photon_accuracy(coherent: IrradianceProfile, decoherent: IrradianceProfile) -> dict[str, float]:
    """Exact accuracy of the sign test for one photon, by quadrature.

    A single dot is classified coherent where ``p_coh > p_dec``, so the
    accuracy for each source is its probability mass on its own region.
    """
    x = coherent.coords
    pc = _density(coherent, x)
    pd = _density(decoherent, x)
    h = coherent.spacing
    own_c = np.where(pc > pd, pc, 0.0)
    own_d = np.where(pd > pc, pd, 0.0)
    return {
        "coherent": float(np.trapezoid(own_c, dx=h)),
        "decoherent": float(np.trapezoid(own_d, dx=h)),
    }


def kl_divergence(
    p: IrradianceProfile, q: IrradianceProfile, floor: float = DENSITY_FLOOR
) -> float:
    """``KL(p || q)`` by trapezoid quadrature with the same floor as ``Lambda``."""
    x = p.coords
    f = floor / (x[-1] - x[0])
    pp = _density(p, x)
    pq = np.maximum(_density(q, x), f)
    integrand = np.where(pp > 0, pp * np.log(np.maximum(pp, f) / pq), 0.0)
    return float(np.trapezoid(integrand, dx=p.spacing))


@dataclass
class BuildupTable:
    counts: tuple[int, ...]
    trials: int
    seed: int
    accuracy: dict[str, dict[int, float]]
    mean_lambda: dict[str, dict[int, float]]
    generator: str = GENERATOR
    dots: dict[tuple[str, int], np.ndarray] = field(default_factory=dict, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "counts": list(self.counts),
            "trials": self.trials,
            "seed": self.seed,
            "generator": self.generator,
            "accuracy": {s: {str(n): a for n, a in d.items()} for s, d in self.accuracy.items()},
            "mean_lambda": {s: {str(n): a for n, a in d.items()} for s, d in self.mean_lambda.items()},
        }


def buildup_study(
    config: SetupConfig | None = None,
    counts=(30, 300, 3000),
    trials: int = 500,
    seed: int = 42,
    profiles: tuple[IrradianceProfile, IrradianceProfile] | None = None,
) -> BuildupTable:
    """Classification accuracy of the ``Lambda`` sign test per source and count.

    Trial ``t`` for source ``j`` and count ``N`` uses the generator seeded with
    ``(seed, j, N, t)``, so trials are independent and order-free. One extra
    sample per (source, N), seeded ``(seed, j, N)``, is kept as the dot plot.
    """
    if trials < 100:
        raise ValueError("trials must be >= 100")
    config = config or SetupConfig()
    coh, dec = profiles or source_profiles(config)
    table_acc: dict[str, dict[int, float]] = {}
    table_lam: dict[str, dict[int, float]] = {}
    dots = {}
    for j, src in enumerate(SOURCES):
        prof = coh if src == "coherent" else dec
        sign = 1.0 if src == "coherent" else -1.0
        table_acc[src], table_lam[src] = {}, {}
        for n in counts:
            n = int(n)
            lams = np.empty(trials)
            for t in range(trials):
                s = sample(prof, n, (seed, j, n, t), src)
                lams[t] = log_likelihood_ratio(s, coh, dec)
            table_acc[src][n] = float(np.mean(sign * lams > 0))
            table_lam[src][n] = float(np.mean(lams))
            dots[(src, n)] = sample(prof, n, (seed, j, n), src).positions
    return BuildupTable(tuple(int(n) for n in counts), trials, seed, table_acc, table_lam, dots=dots)
