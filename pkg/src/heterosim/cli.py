"""Command-line interface.

Subcommands cover time integration, steady states, dispersal sweeps,
nonspatial continuation, the two-parameter regime scan, the instability map,
arealization runs, the named presets, and rendering binary artifacts to P6
images.  On failure the process exits nonzero after printing a single
machine-readable line ``error kind=<ExceptionType> message="..."`` to
stderr.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .arealization import simulate_areal, turing_heatmap
from .bifurcation import (
    Stability,
    build_grassforest_spatial,
    build_sl4_spatial,
    continue_branch,
    find_equilibria,
    grassforest_system,
    scan_two_parameter,
    sl4_system,
    spatial_steady_state,
    sweep_dispersal,
)
from .config import RunConfig, parse_config
from .errors import HeterosimError
from .outputs import (
    read_spacetime_binary,
    render_heatmap,
    write_branch_csv,
    write_field_csv,
    write_two_param_csv,
)
from .presets import (
    PRESET_NAMES,
    RunContext,
    _save_run,
    areal_params_from_config,
    boundary_condition,
    fig2_ensemble,
    gradients_from_config,
    grid_from_config,
    initial_condition,
    run_preset,
    sl_params_from_config,
)
from .savanna import euler_simulate


def _load_config(args) -> RunConfig:
    if args.config:
        config = parse_config(Path(args.config).read_text())
    else:
        config = RunConfig()
    if args.seed is not None:
        config.seed = args.seed
        config.ic_seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    config.validate()
    return config


def _build_system(config: RunConfig, grid):
    if config.model == "GrassForest":
        alpha, _ = gradients_from_config(config)
        return build_grassforest_spatial(grid, config.sigma_w, alpha,
                                         boundary_condition(config))
    if config.model == "SL4":
        return build_sl4_spatial(grid, sl_params_from_config(config))
    raise HeterosimError("this subcommand handles the vegetation models; "
                         "use areal-sim for the arealization model")


def cmd_simulate(args) -> int:
    config = _load_config(args)
    ctx = RunContext("simulate", config, Path(config.out_dir))
    grid = grid_from_config(config)
    system = _build_system(config, grid)
    run = euler_simulate(system.rhs, initial_condition(config, grid), config.step,
                         config.t_end, snapshot_stride=config.snapshot_stride,
                         track_simplex=(config.model == "SL4"))
    _save_run(ctx, "field", grid, run)
    ctx.diagnostics["steps"] = run.manifest["steps"]
    ctx.finish()
    return 0


def cmd_steady(args) -> int:
    config = _load_config(args)
    ctx = RunContext("steady", config, Path(config.out_dir))
    grid = grid_from_config(config)
    system = _build_system(config, grid)
    run = euler_simulate(system.rhs, initial_condition(config, grid), config.step,
                         min(config.t_end, 300.0), snapshot_stride=10 ** 9)
    sol = spatial_steady_state(system, run.final_state, "auto")
    fields = sol.fields if sol.fields.ndim == 2 else sol.fields[None, :]
    write_field_csv(ctx.path("steady_state.csv"), grid.nodes,
                    np.arange(fields.shape[0], dtype=float), fields)
    ctx.diagnostics.update({"residual": sol.residual, "stable": sol.stable,
                            "l1_grass": sol.l1_grass})
    ctx.finish()
    return 0


def cmd_sweep_dispersal(args) -> int:
    config = _load_config(args)
    ctx = RunContext("sweep-dispersal", config, Path(config.out_dir))
    grid = grid_from_config(config)
    alpha, _ = gradients_from_config(config)
    sigmas = np.linspace(args.sigma_min, args.sigma_max, args.sigma_count)
    branches = sweep_dispersal(sigmas, fig2_ensemble(grid), alpha, grid,
                               bc=boundary_condition(config))
    for i, branch in enumerate(branches):
        write_branch_csv(ctx.path(f"branch_{i:02d}.csv"), branch, grid)
    ctx.diagnostics["branches"] = len(branches)
    ctx.finish()
    return 0


def cmd_bifurcate(args) -> int:
    config = _load_config(args)
    ctx = RunContext("bifurcate", config, Path(config.out_dir))
    alpha, beta = gradients_from_config(config)
    if config.model == "GrassForest":
        system = grassforest_system(alpha)
    else:
        system = sl4_system(alpha, beta, sl_params_from_config(config))
    equilibria = find_equilibria(system, args.at, n_starts=30, seed=config.seed)
    count = 0
    for eq in equilibria:
        if args.stable_only and eq.stability is not Stability.STABLE:
            continue
        branch = continue_branch(system, (config.x_min, config.x_max), eq)
        write_branch_csv(ctx.path(f"branch_{count:02d}.csv"), branch)
        count += 1
    ctx.diagnostics["branches"] = count
    ctx.finish()
    return 0


def cmd_two_param(args) -> int:
    config = _load_config(args)
    ctx = RunContext("two-param", config, Path(config.out_dir))
    result = scan_two_parameter((args.alpha_min, args.alpha_max),
                                (args.beta_min, args.beta_max),
                                args.resolution, sl_params_from_config(config),
                                seed=config.seed)
    write_two_param_csv(ctx.path("two_param_map.csv"), result)
    render_heatmap(ctx.path("stable_count.ppm"), result.stable_count.astype(float))
    render_heatmap(ctx.path("oscillating.ppm"), result.oscillating.astype(float))
    ctx.diagnostics["oscillating_cells"] = int(result.oscillating.sum())
    ctx.finish()
    return 0


def cmd_turing_map(args) -> int:
    config = _load_config(args)
    ctx = RunContext("turing-map", config, Path(config.out_dir))
    params = areal_params_from_config(config)
    heatmap = turing_heatmap((args.rho_min, args.rho_max),
                             (args.rho_min, args.rho_max),
                             args.resolution, params)
    write_field_csv(ctx.path("growth_map.csv"), heatmap.rho_n, heatmap.rho_e,
                    heatmap.growth)
    render_heatmap(ctx.path("growth_map.ppm"), heatmap.growth)
    finite = heatmap.growth[np.isfinite(heatmap.growth)]
    ctx.diagnostics["positive_fraction"] = float((finite > 0).mean())
    ctx.finish()
    return 0


def cmd_areal_sim(args) -> int:
    config = _load_config(args)
    ctx = RunContext("areal-sim", config, Path(config.out_dir))
    grid = grid_from_config(config)
    params = areal_params_from_config(config)
    run = simulate_areal(params, grid, config.step, config.t_end,
                         seed=config.ic_seed, noise_amplitude=config.ic_noise,
                         snapshot_stride=config.snapshot_stride)
    _save_run(ctx, "marker_e", grid, run, component_index=0)
    write_field_csv(ctx.path("final_fields.csv"), grid.nodes,
                    np.arange(4, dtype=float), run.final_state)
    ctx.finish()
    return 0


def cmd_preset(args) -> int:
    out = Path(args.out) if args.out else Path("runs") / args.name
    if args.threads > 1 and args.name == "all":
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            futures = {name: pool.submit(run_preset, name, Path(args.out or "runs") / name,
                                         args.seed or 0)
                       for name in PRESET_NAMES}
            for name, fut in futures.items():
                fut.result()
        return 0
    if args.name == "all":
        for name in PRESET_NAMES:
            run_preset(name, Path(args.out or "runs") / name, args.seed or 0)
        return 0
    run_preset(args.name, out, args.seed or 0, threads=args.threads)
    return 0


def cmd_render(args) -> int:
    block = read_spacetime_binary(args.artifact)
    out = args.out or (str(args.artifact) + ".ppm")
    render_heatmap(out, block)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heterosim",
        description="Simulation and bifurcation analysis of spatially "
                    "heterogeneous vegetation and arealization models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to an INI run configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="64-bit run seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker pool size for parallel sweeps")

    p = sub.add_parser("simulate", help="time-integrate a vegetation model")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("steady", help="converge a steady state from the configured IC")
    common(p)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("sweep-dispersal", help="steady-state branches over kernel width")
    common(p)
    p.add_argument("--sigma-min", type=float, default=0.005)
    p.add_argument("--sigma-max", type=float, default=0.2)
    p.add_argument("--sigma-count", type=int, default=20)
    p.set_defaults(func=cmd_sweep_dispersal)

    p = sub.add_parser("bifurcate", help="continue nonspatial equilibria along x")
    common(p)
    p.add_argument("--at", type=float, default=0.5,
                   help="position whose equilibria seed the branches")
    p.add_argument("--stable-only", action="store_true")
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("two-param", help="regime map over birth-rate space")
    common(p)
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=2.0)
    p.add_argument("--beta-min", type=float, default=0.0)
    p.add_argument("--beta-max", type=float, default=2.5)
    p.add_argument("--resolution", type=int, default=50)
    p.set_defaults(func=cmd_two_param)

    p = sub.add_parser("turing-map", help="instability map over morphogen space")
    common(p)
    p.add_argument("--rho-min", type=float, default=0.0)
    p.add_argument("--rho-max", type=float, default=0.5)
    p.add_argument("--resolution", type=int, default=50)
    p.set_defaults(func=cmd_turing_map)

    p = sub.add_parser("areal-sim", help="run the arealization model")
    common(p)
    p.set_defaults(func=cmd_areal_sim)

    p = sub.add_parser("preset", help="run a named reference experiment")
    common(p)
    p.add_argument("name", choices=PRESET_NAMES + ("all",))
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("render", help="render a binary space-time artifact to P6")
    common(p)
    p.add_argument("artifact", help="path to a .bin artifact with its .meta sidecar")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HeterosimError as exc:
        message = str(exc).replace('"', "'")
        print(f'error kind={type(exc).__name__} message="{message}"', file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        message = str(exc).replace('"', "'")
        print(f'error kind={type(exc).__name__} message="{message}"', file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
