"""Control, decoherent-simulation and coherent wire-grid runs, and the verdict.

Flux losses are normalized to the control flux of image 2' (the image of the
pinhole at ``+a/2``, which lands at negative ``x`` on the image plane):

* decoherent run (pinhole 1 closed, wires in): ``R~ = 100 delta~_2 / Phi_C``
* coherent run (both open, wires in): ``R = 100 delta_2 / Phi_C``

``mode="analytic"`` takes the intercepted fluxes from the closed-form fringe
profiles; ``mode="numeric"`` from the wire-plane masks of the propagation
pipeline. Image resolution, crosstalk and visibility always come from the
pipeline.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic as an
from .config import SetupConfig
from .field import IrradianceProfile, flux
from .propagation import PlaneSet, crosstalk, fwhm, run_pipeline, wire_grid

__all__ = [
    "FluxReport",
    "ComplementarityVerdict",
    "run_control",
    "run_decoherent",
    "run_coherent",
    "full_report",
    "crossed_beams_report",
    "eta_interval",
    "analytic_losses",
    "channel_fluxes",
    "DegenerateError",
]

ANALYTIC_SAMPLES = 40001
DUALITY_TOLERANCE = 0.01
ETA_VIOLATION = 0.9


class DegenerateError(ValueError):
    """No interception in either run: eta is 0/0."""


@dataclass(frozen=True)
class FluxReport:
    """Flux bookkeeping of one run.

    ``phi_control`` is the control flux of image 2'. ``delta_blocked`` is the
    flux intercepted by the wires that is charged to image 2'.
    """

    variant: str
    mode: str
    phi_control: float
    phi_after_wg: float
    delta_blocked: float
    r_pct: float
    phi_images: tuple[float, float]
    resolution_fwhm: float | None = None
    crosstalk: float | None = None
    r_pct_measured: float | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.phi_control > 0:
            raise ValueError("phi_control must be positive")
        if not 0 <= self.phi_after_wg <= self.phi_control * (1 + 1e-6):
            raise ValueError(
                f"phi_after_wg = {self.phi_after_wg:g} outside [0, phi_control = {self.phi_control:g}]"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["phi_images"] = list(self.phi_images)
        return d


@dataclass(frozen=True)
class ComplementarityVerdict:
    V: float
    K: float
    eta: float
    duality_sum: float
    violation: bool
    r_pct: float
    r_tilde_pct: float
    phi_c: float
    v_inferred: float
    resolution_control_m: float
    resolution_decoherent_m: float
    resolution_coherent_m: float
    crosstalk: float
    pc_prediction_eta: float = 0.0
    reports: dict = field(default_factory=dict, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "phi_c": self.phi_c,
            "r_pct": self.r_pct,
            "r_tilde_pct": self.r_tilde_pct,
            "eta": self.eta,
            "v": self.V,
            "k": self.K,
            "duality_sum": self.duality_sum,
            "violation": self.violation,
            "resolution_control_m": self.resolution_control_m,
            "resolution_decoherent_m": self.resolution_decoherent_m,
            "resolution_coherent_m": self.resolution_coherent_m,
            "crosstalk": self.crosstalk,
            "v_inferred": self.v_inferred,
            "pc_prediction_eta": self.pc_prediction_eta,
        }


# ----------------------------------------------------------- analytic path


def _model(config: SetupConfig) -> an.FringeModel:
    return an.FringeModel(config.u, config.s)


def _analytic_grid(config: SetupConfig) -> np.ndarray:
    return np.linspace(-config.s, config.s, ANALYTIC_SAMPLES)


def analytic_losses(config: SetupConfig) -> dict[str, float]:
    """Closed-form fluxes and wire interceptions at the fringe plane.

    Returns ``phi_c`` (flux of one image channel in the control run),
    ``delta_tilde_2`` (single open pinhole, wires in) and ``delta_2`` (half of
    the coherent two-beam interception).
    """
    model = _model(config)
    x = _analytic_grid(config)
    coherent = an.coherent_profile(x, model)
    single = an.decoherent_profile(x, model).replace(0.5 * an.decoherent_irradiance(x, model))
    phi_12 = flux(coherent)
    grid = wire_grid(config)
    if grid is None:
        d12 = d2_tilde = 0.0
    else:
        d12 = an.wire_loss(coherent, grid)
        d2_tilde = an.wire_loss(single, grid)
    return {
        "phi_12": phi_12,
        "phi_c": 0.5 * phi_12,
        "phi_single": flux(single),
        "delta_12": d12,
        "delta_2": 0.5 * d12,
        "delta_tilde_2": d2_tilde,
    }


# ------------------------------------------------------------ numeric path


def channel_fluxes(image: IrradianceProfile) -> tuple[float, float]:
    """``(Phi(1'), Phi(2'))``: image-plane flux at ``x > 0`` and ``x < 0``."""
    prof = image.marginal()
    lo, hi = prof.extent
    return flux(prof, (0.0, hi)), flux(prof, (lo, 0.0))


def _measure(config: SetupConfig, r_pct: float, salt: int) -> float | None:
    if config.noise_pct == 0:
        return None
    rng = np.random.default_rng([config.seed, salt])
    return float(r_pct + rng.normal(0.0, config.noise_pct))


def _pipeline(config, variant, dims, cache):
    key = (variant, dims)
    if cache is not None and key in cache:
        return cache[key]
    ps = run_pipeline(config, variant, dims)
    if cache is not None:
        cache[key] = ps
    return ps


def _image_fwhm(ps: PlaneSet, config: SetupConfig) -> float:
    return fwhm(ps.profile("sigma2"), around=-config.image_separation / 2)


def run_control(config: SetupConfig, mode: str = "analytic", dims: int | None = None, _cache=None) -> FluxReport:
    """Both pinholes open, no wires. Establishes ``Phi_C`` and the resolution baseline."""
    dims = dims or config.dims
    ps = _pipeline(config, "control", dims, _cache)
    phi_images = channel_fluxes(ps.profile("sigma2"))
    if mode == "analytic":
        phi_c = analytic_losses(config)["phi_c"]
    elif mode == "numeric":
        phi_c = phi_images[1]
    else:
        raise ValueError(f"mode must be analytic or numeric, got {mode!r}")
    return FluxReport(
        variant="control",
        mode=mode,
        phi_control=phi_c,
        phi_after_wg=phi_c,
        delta_blocked=0.0,
        r_pct=0.0,
        phi_images=phi_images,
        resolution_fwhm=_image_fwhm(ps, config),
        extras={
            "phi_sigma0": ps.fluxes["sigma0"],
            "phi_sigma2": ps.fluxes["sigma2"],
        },
    )


def _wire_run(config, variant, mode, dims, cache, salt) -> FluxReport:
    dims = dims or config.dims
    ps = _pipeline(config, variant, dims, cache)
    phi_images = channel_fluxes(ps.profile("sigma2"))
    if mode == "analytic":
        losses = analytic_losses(config)
        phi_c = losses["phi_c"]
        delta = losses["delta_tilde_2"] if variant == "decoherent_sim" else losses["delta_2"]
    elif mode == "numeric":
        control = _pipeline(config, "control", dims, cache)
        phi_c = channel_fluxes(control.profile("sigma2"))[1]
        # blocked fraction of the light reaching the wires, charged to one
        # channel (all of it in the decoherent run, half of two equal beams
        # in the coherent run: the same fraction either way)
        delta = ps.blocked_flux / ps.fluxes["sigma0"] * phi_c
    else:
        raise ValueError(f"mode must be analytic or numeric, got {mode!r}")
    r_pct = 100.0 * delta / phi_c
    return FluxReport(
        variant=variant,
        mode=mode,
        phi_control=phi_c,
        phi_after_wg=phi_c - delta,
        delta_blocked=delta,
        r_pct=r_pct,
        phi_images=phi_images,
        resolution_fwhm=_image_fwhm(ps, config),
        r_pct_measured=_measure(config, r_pct, salt),
        extras={
            "phi_sigma0": ps.fluxes["sigma0"],
            "phi_sigma1": ps.fluxes["sigma1"],
            "blocked_sigma0": ps.blocked_flux,
            "phi_sigma2": ps.fluxes["sigma2"],
        },
    )


def run_decoherent(config: SetupConfig, mode: str = "analytic", dims: int | None = None, _cache=None) -> FluxReport:
    """Pinhole 1 closed, wires in place: the decoherent distribution at the wires."""
    return _wire_run(config, "decoherent_sim", mode, dims, _cache, salt=1)


def run_coherent(config: SetupConfig, mode: str = "analytic", dims: int | None = None, _cache=None) -> FluxReport:
    """Both pinholes open, wires at the dark fringes."""
    return _wire_run(config, "coherent_wg", mode, dims, _cache, salt=2)


# ----------------------------------------------------------------- verdict


def _visibility(ps: PlaneSet, config: SetupConfig) -> float:
    """Visibility from the centre bright fringe and the valley at ``u/2``.

    Read from the pattern incident on the wires (sigma0), so the wires
    themselves cannot fake a dark valley.
    """
    prof = ps.profile("sigma0").cut()
    x, y = prof.coords, prof.values
    u = config.u
    centre = np.abs(x) <= u / 4
    valley = np.abs(x - u / 2) <= u / 4
    return an.visibility(float(y[centre].max()), float(y[valley].min()))


def _crosstalk(config: SetupConfig, dims: int) -> float:
    values = []
    for which in ("1", "2"):
        ps = run_pipeline(config, "lens_only", dims, pinholes=which)
        values.append(crosstalk(ps.profile("sigma2"), 0.0))
    return max(values)


def full_report(config: SetupConfig, mode: str = "analytic", dims: int | None = None) -> ComplementarityVerdict:
    """Run all three variants and assemble ``R``, ``R~``, ``eta``, ``V``, ``K`` and the verdict."""
    dims = dims or config.dims
    cache: dict = {}
    control = run_control(config, mode, dims, cache)
    decoherent = run_decoherent(config, mode, dims, cache)
    coherent = run_coherent(config, mode, dims, cache)
    r_tilde = decoherent.r_pct_measured if decoherent.r_pct_measured is not None else decoherent.r_pct
    r = coherent.r_pct_measured if coherent.r_pct_measured is not None else coherent.r_pct
    if r_tilde + r == 0:
        raise DegenerateError("degenerate: no interception in either run")
    eta = an.eta(r_tilde, r)
    V = _visibility(cache[("coherent_wg", dims)], config)
    xt = _crosstalk(config, dims)
    K = an.which_way_knowledge(1.0 - xt, xt)
    total, _ = an.duality_sum(V, K, DUALITY_TOLERANCE)
    violation = total > 1.0 + DUALITY_TOLERANCE and eta > ETA_VIOLATION
    return ComplementarityVerdict(
        V=V,
        K=K,
        eta=eta,
        duality_sum=total,
        violation=bool(violation),
        r_pct=r,
        r_tilde_pct=r_tilde,
        phi_c=control.phi_control,
        v_inferred=1.0 - r / r_tilde if r_tilde else float("nan"),
        resolution_control_m=control.resolution_fwhm,
        resolution_decoherent_m=decoherent.resolution_fwhm,
        resolution_coherent_m=coherent.resolution_fwhm,
        crosstalk=xt,
        reports={"control": control, "decoherent": decoherent, "coherent": coherent},
    )


def eta_interval(
    r_tilde: float,
    r: float,
    sigma_pct: float,
    resamples: int = 1000,
    seed: int = 0,
    coverage: float = 0.95,
) -> tuple[float, float, np.ndarray]:
    """Monte Carlo interval of ``eta`` under Gaussian noise on both losses.

    Returns the central ``coverage`` interval and the resampled values.
    """
    rng = np.random.default_rng(seed)
    rt = r_tilde + rng.normal(0.0, sigma_pct, resamples)
    rr = r + rng.normal(0.0, sigma_pct, resamples)
    samples = (rt - rr) / (rt + rr)
    tail = 50.0 * (1.0 - coverage)
    lo, hi = np.percentile(samples, [tail, 100.0 - tail])
    return float(lo), float(hi), samples


# ------------------------------------------------------------ crossed beams


def _centroid(prof: IrradianceProfile, side: int) -> float:
    x, y = prof.coords, prof.values
    sel = x > 0 if side > 0 else x < 0
    return float(np.sum(x[sel] * y[sel]) / np.sum(y[sel]))


def crossed_beams_report(config: SetupConfig, dims: int | None = None, wire_shift: float = 0.0) -> FluxReport:
    """Two beams crossing at the wire plane, no lens.

    Wires sit at the interference minima of the crossing region (shifted by
    ``wire_shift``). Reports the intercepted fraction and the shift of the
    downstream beam centroids relative to a wire-free run.
    """
    dims = dims or config.dims
    if wire_shift:
        offsets = np.broadcast_to(np.asarray(config.wire_offset_m, float), (config.wire_count,)) + wire_shift
        config = config.replace(wire_offset_m=tuple(float(v) for v in offsets))
    _check_overlap(config, dims)
    with_wires = run_pipeline(config, "crossed_beams", dims)
    free = run_pipeline(config, "crossed_beams", dims, wires=False)
    p_free = free.profile("sigma2").marginal()
    p_wire = with_wires.profile("sigma2").marginal()
    c_free = (_centroid(p_free, -1), _centroid(p_free, +1))
    c_wire = (_centroid(p_wire, -1), _centroid(p_wire, +1))
    separation = c_free[1] - c_free[0]
    shift = max(abs(a - b) for a, b in zip(c_free, c_wire))
    phi0 = with_wires.fluxes["sigma0"]
    delta = with_wires.blocked_flux
    expected = config.crossed_angle * config.crossed_beams.distance_m
    return FluxReport(
        variant="crossed_beams",
        mode="numeric",
        phi_control=phi0,
        phi_after_wg=phi0 - delta,
        delta_blocked=delta,
        r_pct=100.0 * delta / phi0,
        phi_images=channel_fluxes(with_wires.profile("sigma2"))[::-1],
        extras={
            "blocked_fraction": delta / phi0,
            "centroids_free_m": c_free,
            "centroids_wires_m": c_wire,
            "ray_optics_separation_m": expected,
            "separation_m": separation,
            "centroid_shift_fraction": shift / separation,
        },
    )


def _check_overlap(config: SetupConfig, dims: int) -> None:
    from .propagation import _crossed_source

    b1, b2 = _crossed_source(config, dims)
    a1, a2 = np.abs(b1.values), np.abs(b2.values)
    overlap = np.sum(a1 * a2) / np.sqrt(np.sum(a1**2) * np.sum(a2**2))
    if overlap < 0.5:
        raise ValueError("beams do not overlap at the crossing plane")
