"""Gaussian wave packet against a perfectly reflecting obstacle (2D, hbar = m = 1).

Lengths are measured in de Broglie wavelengths, so ``k0 = 2 pi``. Arrays are
indexed ``values[iz, ix]``: the packet travels towards +z, the obstacle is a
rectangle of width ``e`` along x and height ``h`` along z whose cells are
held at zero (Dirichlet). The domain edges are Dirichlet as well.

Time stepping is a Strang splitting of Cayley (Crank-Nicolson) factors,
``C_x(dt/2) C_z(dt) C_x(dt/2)``, with ``C(tau) = (1 + i tau H/2)^-1 (1 - i tau H/2)``.
``H`` is the real symmetric 3-point lattice kinetic operator with obstacle
rows and columns removed, so every factor is exactly unitary, the product is
palindromic (hence time-reversible) and obstacle cells never acquire amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg.lapack import zgttrf as _gttrf, zgttrs as _gttrs

from .config import ConfigError
from .field import ComplexField

__all__ = [
    "Obstacle",
    "WavepacketConfig",
    "PacketState",
    "PacketTrajectory",
    "AttenuationReport",
    "InstabilityError",
    "OverlapError",
    "Propagator",
    "init_gaussian",
    "step",
    "run_scenario",
    "run_state",
    "attenuation_report",
    "theorem1_check",
    "lobe_score",
    "superpose",
    "SCENARIOS",
    "MAX_DT_FACTOR",
]

SCENARIOS = ("hit", "graze", "miss")
MAX_DT_FACTOR = 1.0  # accuracy bound: dt <= MAX_DT_FACTOR * spacing**2
INSTABILITY_DRIFT = 1e-4
INIT_OVERLAP = 1e-10
THEOREM1_EPS = 1e-3
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


class InstabilityError(RuntimeError):
    """Norm drift in one step exceeded the instability threshold."""


class OverlapError(ValueError):
    """Initial packet overlaps the obstacle."""


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned Dirichlet rectangle.

    ``center`` is ``(x, z)``; ``width`` spans x, ``height`` spans z.
    """

    center: tuple[float, float]
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("obstacle width and height must be positive")

    @property
    def front(self) -> float:
        return self.center[1] - self.height / 2

    @property
    def back(self) -> float:
        return self.center[1] + self.height / 2

    @property
    def x_range(self) -> tuple[float, float]:
        return self.center[0] - self.width / 2, self.center[0] + self.width / 2

    def mask(self, coords: np.ndarray) -> np.ndarray:
        # half-sample slack keeps the cell count symmetric under round-off
        slack = 1e-9 * (coords[1] - coords[0])
        inx = np.abs(coords - self.center[0]) <= self.width / 2 + slack
        inz = np.abs(coords - self.center[1]) <= self.height / 2 + slack
        return inz[:, None] & inx[None, :]


@dataclass(frozen=True)
class WavepacketConfig:
    """Desk-scale defaults: 512 x 512, packet FWHM 8, obstacle e = 30 (units of wavelength)."""

    samples: int = 512
    points_per_wavelength: float = 5.0
    packet_fwhm: float = 8.0
    obstacle_width: float = 30.0
    obstacle_height: float = 4.0
    dt_factor: float = 0.25
    start_clearance_sigma: float = 7.0
    graze_clearance_sigma: float = 1.0
    miss_clearance_sigma: float = 6.0
    record_every: int = 10

    def __post_init__(self):
        if self.samples < 16 or self.samples % 2:
            raise ValueError("samples must be an even integer >= 16")
        if not 0 < self.dt_factor <= MAX_DT_FACTOR:
            raise ValueError(f"dt_factor must lie in (0, {MAX_DT_FACTOR}]")

    @property
    def spacing(self) -> float:
        return 1.0 / self.points_per_wavelength

    @property
    def k0(self) -> float:
        return 2.0 * math.pi

    @property
    def sigma(self) -> float:
        """rms width of |psi|^2 along each axis."""
        return self.packet_fwhm * FWHM_TO_SIGMA

    @property
    def dt(self) -> float:
        return self.dt_factor * self.spacing**2

    @property
    def group_velocity(self) -> float:
        """Lattice group velocity d omega/dk at k0."""
        h = self.spacing
        return math.sin(self.k0 * h) / h

    def coords(self) -> np.ndarray:
        n = self.samples
        return (np.arange(n) - n // 2) * self.spacing

    def obstacle_offset(self, scenario: str) -> float:
        """Transverse position of the obstacle centre for a scenario."""
        if scenario == "hit":
            return 0.0
        if scenario == "graze":
            return self.obstacle_width / 2 + self.graze_clearance_sigma * self.sigma
        if scenario == "miss":
            return self.obstacle_width / 2 + self.miss_clearance_sigma * self.sigma
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")

    def obstacle(self, offset: float) -> Obstacle:
        return Obstacle((offset, 0.0), self.obstacle_width, self.obstacle_height)

    def start_z(self) -> float:
        return -self.obstacle_height / 2 - self.start_clearance_sigma * self.sigma


@dataclass(frozen=True)
class PacketState:
    field: ComplexField
    time: float = 0.0
    obstacle: Obstacle | None = None

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def spacing(self) -> float:
        return self.field.spacing

    @property
    def coords(self) -> np.ndarray:
        return self.field.coords

    def norm(self) -> float:
        return self.field.norm2()

    def obstacle_mask(self) -> np.ndarray:
        if self.obstacle is None:
            return np.zeros(self.values.shape, bool)
        return self.obstacle.mask(self.coords)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def expectation_position(self) -> tuple[float, float]:
        """``(<x>, <z>)``."""
        p = self.density()
        c = self.coords
        w = p.sum()
        return float(p.sum(axis=0) @ c / w), float(p.sum(axis=1) @ c / w)

    def expectation_momentum(self) -> tuple[float, float]:
        """``(<kx>, <kz>)`` from the discrete spectrum."""
        spec = np.abs(np.fft.fft2(self.values)) ** 2
        k = 2 * np.pi * np.fft.fftfreq(self.values.shape[0], self.spacing)
        w = spec.sum()
        return float(spec.sum(axis=0) @ k / w), float(spec.sum(axis=1) @ k / w)


def init_gaussian(
    center: tuple[float, float],
    widths: tuple[float, float],
    k0: tuple[float, float] | float,
    coords: np.ndarray,
    obstacle: Obstacle | None = None,
    wavelength: float = 1.0,
) -> PacketState:
    """Normalized Gaussian packet.

    Parameters
    ----------
    center : (x, z)
    widths : (sigma_x, sigma_z)
        rms widths of ``|psi|^2``.
    k0 : (kx, kz) or float
        Mean wave vector; a scalar means motion along +z.
    coords : ndarray
        Axis coordinates of the square grid (uniform, shared by x and z).
    """
    if np.isscalar(k0):
        k0 = (0.0, float(k0))
    x = np.asarray(coords, float)
    h = x[1] - x[0]
    sx, sz = widths
    gx = np.exp(-((x - center[0]) ** 2) / (4 * sx**2) + 1j * k0[0] * x)
    gz = np.exp(-((x - center[1]) ** 2) / (4 * sz**2) + 1j * k0[1] * x)
    psi = gz[:, None] * gx[None, :]
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * h * h)
    f = ComplexField(psi, x[0], h, wavelength)
    state = PacketState(f, 0.0, obstacle)
    if obstacle is not None:
        m = state.obstacle_mask()
        overlap = float(np.sum(np.abs(psi[m]) ** 2) * h * h)
        if overlap >= INIT_OVERLAP:
            raise OverlapError(f"initial packet overlaps the obstacle (norm {overlap:.3g} >= {INIT_OVERLAP:g})")
        psi = psi.copy()
        psi[m] = 0.0
        psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * h * h)
        state = PacketState(f.replace(psi), 0.0, obstacle)
    return state


# ---------------------------------------------------------------- stepping


class _LineCayley:
    """Cayley factor of the 3-point kinetic operator along the last axis.

    Runs of consecutive rows sharing an obstacle pattern share one
    tridiagonal LU factorization (LAPACK ``gttrf``) and are solved together
    as many right-hand sides.
    """

    def __init__(self, blocked: np.ndarray, h: float, tau: float):
        free = ~blocked
        a = 0.5j * tau
        link = free[:, :-1] & free[:, 1:]
        # B = 1 - a H applied as a stencil; H has 1/h^2 on free cells and
        # -1/(2h^2) on links between free neighbours
        self.centre = 1.0 - a * np.where(free, 1.0 / h**2, 0.0)
        self.side = np.where(link, 0.5 * a / h**2, 0.0)
        self.runs = []
        start = 0
        for i in range(1, blocked.shape[0] + 1):
            if i == blocked.shape[0] or not np.array_equal(blocked[i], blocked[start]):
                pf = free[start]
                off = np.where(pf[:-1] & pf[1:], -0.5 * a / h**2, 0.0).astype(complex)
                d = (1.0 + a * np.where(pf, 1.0 / h**2, 0.0)).astype(complex)
                dl, d, du, du2, ipiv, info = _gttrf(off.copy(), d, off.copy())
                if info != 0:
                    raise np.linalg.LinAlgError(f"tridiagonal factorization failed (info={info})")
                self.runs.append((slice(start, i), (dl, d, du, du2, ipiv)))
                start = i

    def __call__(self, v: np.ndarray) -> np.ndarray:
        rhs = self.centre * v
        rhs[:, :-1] += self.side * v[:, 1:]
        rhs[:, 1:] += self.side * v[:, :-1]
        out = np.empty_like(rhs)
        for rows, lu in self.runs:
            x, info = _gttrs(*lu, rhs[rows].T)
            if info != 0:
                raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
            out[rows] = x.T
        return out


class Propagator:
    """Factored split-step operator for a fixed grid, obstacle mask and ``dt``."""

    def __init__(self, shape: tuple[int, int], spacing: float, dt: float, blocked: np.ndarray | None = None):
        if not dt > 0:
            raise ValueError("dt must be positive")
        if dt > MAX_DT_FACTOR * spacing**2 * (1 + 1e-9):
            raise ValueError(
                f"dt = {dt:g} exceeds the accuracy bound {MAX_DT_FACTOR:g} * spacing^2 = {MAX_DT_FACTOR * spacing**2:g}"
            )
        self.shape = shape
        self.dt = dt
        self.blocked = np.zeros(shape, bool) if blocked is None else np.asarray(blocked, bool)
        self.cx = _LineCayley(self.blocked, spacing, dt / 2)
        self.cz = _LineCayley(self.blocked.T, spacing, dt)

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        v = self.cx(np.asarray(psi, complex))
        v = self.cz(np.ascontiguousarray(v.T)).T
        v = self.cx(np.ascontiguousarray(v))
        v[self.blocked] = 0.0
        return v


def _check_drift(n0: float, n1: float) -> None:
    drift = abs(n1 - n0) / n0
    if not drift <= INSTABILITY_DRIFT:
        raise InstabilityError(f"norm drift {drift:.3g} in one step exceeds {INSTABILITY_DRIFT:g}")


def step(state: PacketState, dt: float, propagator: Propagator | None = None) -> PacketState:
    """Advance one time step. Pass a prebuilt ``propagator`` to reuse its factorization."""
    if propagator is None:
        propagator = Propagator(state.values.shape, state.spacing, dt, state.obstacle_mask())
    elif not math.isclose(propagator.dt, dt, rel_tol=1e-12):
        raise ValueError("propagator was built for a different dt")
    psi = propagator(state.values)
    new = PacketState(state.field.replace(psi), state.time + dt, state.obstacle)
    _check_drift(state.norm(), new.norm())
    return new


# -------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class AttenuationReport:
    norm_initial: float
    norm_final: float
    norm_transmitted: float
    norm_reflected: float
    norm_residual: float
    footprint_overlap: float
    lobe_score: float
    max_step_drift: float
    max_obstacle_amplitude: float

    @property
    def attenuation(self) -> float:
        return 1.0 - self.norm_transmitted / self.norm_initial


@dataclass
class PacketTrajectory:
    times: np.ndarray
    norm_total: np.ndarray
    norm_reflected: np.ndarray
    norm_transmitted: np.ndarray
    norm_residual: np.ndarray
    footprint: np.ndarray
    initial: PacketState
    final: PacketState
    closest_time: float
    closest_footprint: float
    max_step_drift: float
    max_obstacle_amplitude: float
    k_width: tuple[float, float]
    k0: tuple[float, float]
    frames: list = field(default_factory=list, repr=False)
    scenario: str | None = None

    @property
    def report(self) -> AttenuationReport:
        return attenuation_report(self)


def _regions(state: PacketState, obstacle: Obstacle | None) -> tuple[float, float, float]:
    p = state.density().sum(axis=1) * state.spacing**2  # per z row
    z = state.coords
    if obstacle is None:
        return 0.0, float(p.sum()), 0.0
    refl = float(p[z < obstacle.front].sum())
    trans = float(p[z > obstacle.back].sum())
    resid = float(p.sum()) - refl - trans
    return refl, trans, resid


def _footprint(state: PacketState, obstacle: Obstacle | None) -> float:
    if obstacle is None:
        return 0.0
    lo, hi = obstacle.x_range
    x = state.coords
    marg = state.density().sum(axis=0) * state.spacing**2
    return float(marg[(x >= lo) & (x <= hi)].sum())


def lobe_score(state: PacketState, z_min: float, k0: tuple[float, float], k_width: tuple[float, float]) -> float:
    """High-angle spectral fraction of the field beyond ``z_min``.

    Power outside the ellipse of 3x the initial spectrum's 1/e^2 half-widths
    ``k_width`` (per axis) around ``k0``.
    """
    psi = state.values.copy()
    psi[state.coords <= z_min, :] = 0.0
    spec = np.abs(np.fft.fft2(psi)) ** 2
    total = spec.sum()
    if total == 0:
        return 0.0
    k = 2 * np.pi * np.fft.fftfreq(psi.shape[0], state.spacing)
    KZ, KX = np.meshgrid(k, k, indexing="ij")
    r2 = ((KX - k0[0]) / k_width[0]) ** 2 + ((KZ - k0[1]) / k_width[1]) ** 2
    return float(spec[r2 > 9.0].sum() / total)


def run_state(
    state: PacketState,
    dt: float,
    steps: int,
    *,
    k0: tuple[float, float],
    k_width: tuple[float, float],
    closest_time: float | None = None,
    record_every: int = 10,
    frames: int = 0,
    scenario: str | None = None,
) -> PacketTrajectory:
    """Evolve ``state`` for ``steps`` steps, recording region norms."""
    obstacle = state.obstacle
    prop = Propagator(state.values.shape, state.spacing, dt, state.obstacle_mask())
    mask = state.obstacle_mask()
    frame_at = set(np.linspace(0, steps, frames).round().astype(int).tolist()) if frames else set()
    closest_step = None if closest_time is None else int(round(closest_time / dt))
    rec: dict[str, list] = {k: [] for k in ("t", "n", "r", "tr", "res", "fp")}
    snaps = []
    max_drift = 0.0
    max_obst = 0.0
    closest_fp = _footprint(state, obstacle)
    initial = state
    norm_prev = state.norm()
    for i in range(steps + 1):
        if i % record_every == 0 or i == steps:
            r, tr, res = _regions(state, obstacle)
            rec["t"].append(state.time)
            rec["n"].append(r + tr + res)
            rec["r"].append(r)
            rec["tr"].append(tr)
            rec["res"].append(res)
            rec["fp"].append(_footprint(state, obstacle))
        if i in frame_at:
            snaps.append((state.time, state.density()))
        if closest_step is not None and i == closest_step:
            closest_fp = _footprint(state, obstacle)
        if i == steps:
            break
        state = PacketState(state.field.replace(prop(state.values)), state.time + dt, obstacle)
        norm = state.norm()
        _check_drift(norm_prev, norm)
        max_drift = max(max_drift, abs(norm - norm_prev))
        norm_prev = norm
        if mask.any():
            max_obst = max(max_obst, float(np.abs(state.values[mask]).max()))
    return PacketTrajectory(
        times=np.array(rec["t"]),
        norm_total=np.array(rec["n"]),
        norm_reflected=np.array(rec["r"]),
        norm_transmitted=np.array(rec["tr"]),
        norm_residual=np.array(rec["res"]),
        footprint=np.array(rec["fp"]),
        initial=initial,
        final=state,
        closest_time=closest_time if closest_time is not None else float("nan"),
        closest_footprint=closest_fp,
        max_step_drift=max_drift,
        max_obstacle_amplitude=max_obst,
        k_width=k_width,
        k0=k0,
        frames=snaps,
        scenario=scenario,
    )


def attenuation_report(traj: PacketTrajectory) -> AttenuationReport:
    obstacle = traj.final.obstacle
    z_back = obstacle.back if obstacle is not None else -np.inf
    return AttenuationReport(
        norm_initial=traj.initial.norm(),
        norm_final=traj.final.norm(),
        norm_transmitted=float(traj.norm_transmitted[-1]),
        norm_reflected=float(traj.norm_reflected[-1]),
        norm_residual=float(traj.norm_residual[-1]),
        footprint_overlap=traj.closest_footprint,
        lobe_score=lobe_score(traj.final, z_back, traj.k0, traj.k_width),
        max_step_drift=traj.max_step_drift,
        max_obstacle_amplitude=traj.max_obstacle_amplitude,
    )


def run_scenario(
    scenario: str,
    config: WavepacketConfig | None = None,
    *,
    frames: int = 0,
    offset: float | None = None,
) -> PacketTrajectory:
    """Packet launched along the axis at an obstacle displaced transversely.

    The run lasts twice the free-flight time to the obstacle centre, so the
    transmitted part ends as far beyond the obstacle as it started before it.
    ``offset`` overrides the scenario's obstacle position (for scans).
    """
    config = config or WavepacketConfig()
    x = config.coords()
    off = config.obstacle_offset(scenario) if offset is None else offset
    obstacle = config.obstacle(off)
    sigma = config.sigma
    z0 = config.start_z()
    margin = config.start_clearance_sigma * sigma
    if z0 - margin < x[0] or -z0 + margin > x[-1]:
        raise ConfigError(
            f"domain half-width {x[-1]:.3g} too small for a start at z = {z0:.3g} "
            f"with {config.start_clearance_sigma:g} sigma clearance; raise samples or points_per_wavelength"
        )
    state = init_gaussian((0.0, z0), (sigma, sigma), config.k0, x, obstacle)
    dt = config.dt
    t_closest = (obstacle.center[1] - z0) / config.group_velocity
    steps = int(math.ceil(2 * t_closest / dt))
    kw = 1.0 / sigma  # 1/e^2 half-width of |psi~|^2 for rms width sigma
    return run_state(
        state,
        dt,
        steps,
        k0=(0.0, config.k0),
        k_width=(kw, kw),
        closest_time=t_closest,
        record_every=config.record_every,
        frames=frames,
        scenario=scenario,
    )


def theorem1_check(traj: PacketTrajectory, eps: float = THEOREM1_EPS) -> dict:
    """Attenuation-iff-overlap biconditional at tolerance ``eps``.

    ``attenuation`` is ``|1 - N_forward / N_initial|``; ``footprint_overlap`` is
    the packet norm over the obstacle's transverse extent at closest approach.
    """
    rep = attenuation_report(traj)
    att = abs(1.0 - rep.norm_transmitted / rep.norm_initial)
    small_att = att < eps
    small_overlap = rep.footprint_overlap < eps
    return {
        "holds": bool(small_att == small_overlap),
        "attenuation": att,
        "footprint_overlap": rep.footprint_overlap,
    }


def superpose(states: list[PacketState], weights: list[complex]) -> PacketState:
    """Normalized linear combination of packets on a shared grid and obstacle."""
    base = states[0]
    psi = sum(w * s.values for s, w in zip(states, weights))
    psi = np.asarray(psi, complex).copy()
    psi[base.obstacle_mask()] = 0.0
    norm = math.sqrt(np.sum(np.abs(psi) ** 2) * base.spacing**2)
    if norm == 0:
        raise ValueError("superposition vanishes identically")
    return PacketState(base.field.replace(psi / norm), base.time, base.obstacle)
