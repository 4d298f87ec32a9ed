"""Command-line front end.

Subcommands: ``analytic``, ``simulate``, ``report``, ``wavepacket``, ``photons``.
Every run writes into ``--out``: its products, ``config.resolved.json`` and
``run.json`` (tool version and arguments).

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 64 usage.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analytic as an
from . import experiment as ex
from . import photons as ph
from . import wavepacket as wp
from .config import ConfigError, SetupConfig, load_config
from .export import write_csv, write_json, write_pgm, write_profile
from .propagation import VARIANTS, SamplingError, run_pipeline, wire_grid

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", type=Path, help="JSON configuration (absent keys take defaults)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dualpinhole", description="Dual-pinhole wire-grid interferometry simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("analytic", help="closed-form fringe profiles and loss metrics")
    _common(p)
    p.add_argument("--samples", type=int, default=4001, help="profile samples over [-s, s]")

    p = sub.add_parser("simulate", help="propagate one variant through every plane")
    _common(p)
    p.add_argument("--variant", choices=VARIANTS, default="control")
    p.add_argument("--dims", type=int, choices=(1, 2), default=None)

    p = sub.add_parser("report", help="control, decoherent and coherent runs plus the verdict")
    _common(p)
    p.add_argument("--mode", choices=("analytic", "numeric"), default="analytic")
    p.add_argument("--dims", type=int, choices=(1, 2), default=None)
    p.add_argument("--resamples", type=int, default=1000, help="eta interval resamples when noise_pct > 0")

    p = sub.add_parser("wavepacket", help="Gaussian packet against a reflecting obstacle")
    _common(p, config=False)
    p.add_argument("--scenario", choices=wp.SCENARIOS, default="hit")
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--samples", type=int, default=512, help="grid points per axis")

    p = sub.add_parser("photons", help="photon buildup and source discrimination")
    _common(p)
    p.add_argument("--counts", default="30,300,3000", help="comma-separated photon counts")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=None, help="defaults to the config seed")
    return parser


# ---------------------------------------------------------------- commands


def _config(args) -> SetupConfig:
    return load_config(args.config) if args.config else SetupConfig()


def _prepare(args, config: SetupConfig | None, extra: dict | None = None) -> Path:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    if config is not None:
        write_json(out / "config.resolved.json", config.to_dict())
    argv = {k: str(v) if isinstance(v, Path) else v for k, v in vars(args).items()}
    meta = {"tool": "dualpinhole", "version": __version__, "command": args.command, "arguments": argv}
    if extra:
        meta.update(extra)
    write_json(out / "run.json", meta)
    return out


def cmd_analytic(args) -> int:
    config = _config(args)
    out = _prepare(args, config)
    model = an.FringeModel(config.u, config.s)
    x = np.linspace(-config.s, config.s, args.samples)
    coh = an.coherent_irradiance(x, model)
    dec = an.decoherent_irradiance(x, model)
    write_csv(out / "profiles.csv", ["x_m", "coherent_au", "decoherent_au"], [x, coh, dec])
    losses = ex.analytic_losses(config)
    r_tilde = 100 * losses["delta_tilde_2"] / losses["phi_c"]
    r = 100 * losses["delta_2"] / losses["phi_c"]
    grid = wire_grid(config)
    metrics = {
        "u_m": config.u,
        "s_m": config.s,
        "fringe_count": model.fringe_count,
        "wire_centers_m": [] if grid is None else list(grid.centers),
        "phi_coherent": losses["phi_12"],
        "phi_decoherent": 2 * losses["phi_single"],
        "coherent_decoherent_gap": abs(losses["phi_12"] - 2 * losses["phi_single"]) / (2 * losses["phi_single"]),
        "r_pct": r,
        "r_tilde_pct": r_tilde,
        "eta": an.eta(r_tilde, r) if r_tilde + r else None,
    }
    write_json(out / "metrics.json", metrics)
    print(f"R~ = {r_tilde:.3f} %  R = {r:.4f} %  eta = {metrics['eta']:.4f}")
    return EXIT_OK


def _write_planes(directory: Path, planes) -> dict:
    directory.mkdir(parents=True, exist_ok=True)
    for name in planes.planes:
        write_profile(directory / name, planes.fields[name])
    fluxes = dict(planes.fluxes)
    fluxes["blocked"] = planes.blocked_flux
    write_json(directory / "fluxes.json", fluxes)
    return fluxes


def cmd_simulate(args) -> int:
    config = _config(args)
    out = _prepare(args, config)
    planes = run_pipeline(config, args.variant, args.dims)
    fluxes = _write_planes(out, planes)
    print(", ".join(f"{k}: {v:.6g}" for k, v in fluxes.items()))
    return EXIT_OK


def cmd_report(args) -> int:
    config = _config(args)
    out = _prepare(args, config)
    verdict = ex.full_report(config, mode=args.mode, dims=args.dims)
    data = verdict.to_json_dict()
    pinned = config.replace(image_distance_mode="pinned")
    data["rayleigh_m"] = config.rayleigh
    data["rayleigh_pinned_q_m"] = pinned.rayleigh
    data["image_distance_m"] = config.q
    data["lens_equation_note"] = (
        f"stated q = {config.image_distance_m} m does not satisfy 1/p + 1/q = 1/f for "
        f"p = {config.pinhole_to_lens_m} m, f = {config.focal_length_m} m; thin-lens q = "
        f"{config.replace(image_distance_mode='thin_lens').q:.6g} m"
    )
    if config.noise_pct > 0:
        lo, hi, _ = ex.eta_interval(
            verdict.r_tilde_pct, verdict.r_pct, config.noise_pct, args.resamples, config.seed
        )
        data["eta_interval"] = [lo, hi]
    write_json(out / "report.json", data)
    dims = args.dims or config.dims
    for variant in ("control", "decoherent_sim", "coherent_wg"):
        _write_planes(out / variant, run_pipeline(config, variant, dims))
    print(
        f"R~ = {verdict.r_tilde_pct:.3f} %  R = {verdict.r_pct:.4f} %  eta = {verdict.eta:.4f}  "
        f"V = {verdict.V:.4f}  K = {verdict.K:.6f}  violation = {verdict.violation}"
    )
    return EXIT_OK


def cmd_wavepacket(args) -> int:
    config = wp.WavepacketConfig(samples=args.samples)
    out = _prepare(args, None, {"wavepacket": dataclasses.asdict(config)})
    traj = wp.run_scenario(args.scenario, config, frames=max(args.frames, 0))
    origin = float(traj.initial.coords[0])
    for i, (t, dens) in enumerate(traj.frames):
        write_pgm(out / f"frame_{i:04d}.pgm", dens, {"origin": origin, "spacing": config.spacing, "time": t})
    write_csv(
        out / "trajectory.csv",
        ["t", "norm_total", "norm_reflected", "norm_transmitted", "norm_residual", "footprint"],
        [traj.times, traj.norm_total, traj.norm_reflected, traj.norm_transmitted, traj.norm_residual, traj.footprint],
    )
    rep = dataclasses.asdict(traj.report)
    rep["scenario"] = args.scenario
    rep["theorem1"] = wp.theorem1_check(traj)
    write_json(out / "report.json", rep)
    print(
        f"{args.scenario}: transmitted {rep['norm_transmitted']:.6f}  lobe_score {rep['lobe_score']:.3g}  "
        f"overlap {rep['footprint_overlap']:.3g}"
    )
    return EXIT_OK


def cmd_photons(args) -> int:
    config = _config(args)
    try:
        counts = tuple(int(c) for c in args.counts.split(",") if c.strip())
    except ValueError:
        raise UsageError(f"--counts: expected comma-separated integers, got {args.counts!r}") from None
    if not counts or min(counts) < 0:
        raise UsageError("--counts: need at least one non-negative count")
    if args.trials < 100:
        raise UsageError("--trials: must be >= 100")
    seed = config.seed if args.seed is None else args.seed
    out = _prepare(args, config, {"generator": ph.GENERATOR})
    table = ph.buildup_study(config, counts, args.trials, seed)
    for (src, n), pos in table.dots.items():
        write_csv(out / f"dots_{src}_{n}.csv", ["x_m"], [pos])
    write_json(out / "accuracy.json", table.to_json_dict())
    for src, acc in table.accuracy.items():
        print(src, " ".join(f"N={n}: {a:.3f}" for n, a in acc.items()))
    return EXIT_OK


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "report": cmd_report,
    "wavepacket": cmd_wavepacket,
    "photons": cmd_photons,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SamplingError, wp.InstabilityError, ex.DegenerateError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
