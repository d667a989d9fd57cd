"""Command-line entry point for the sweep experiments and checks."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .baselines import BaselineKind, build_scenario_pack, make_problem_context
from .harness import SweepSpec, emit_plot_script, sweep, write_results
from .optimizer import brute_force_joint, run
from .scenario import (
    STREAM_PSO,
    ConfigError,
    DeploymentGeometry,
    SystemConfig,
    default_config,
    parse_config,
    rng_stream,
    validate,
)

DEFAULT_POWERS = (0.0, 10.0, 20.0, 30.0, 40.0)
DEFAULT_ELEMENTS = (16, 36, 64, 100)
DEFAULT_UE_POSITIONS = ((60.0, 90.0, 2.0), (70.0, 85.0, 2.0), (85.0, 75.0, 2.0))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="flat key/value config file overriding defaults")
    parser.add_argument("--seed", type=int, default=None, help="override rng_seed")
    parser.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--baselines", type=str, default=None,
                        help="comma-separated kinds (default: all six)")
    parser.add_argument("--dump-channels", type=Path, default=None, metavar="DIR",
                        help="dump per-trial channel matrices under DIR")
    parser.add_argument("--pso-particles", type=int, default=None, help="swarm size override")
    parser.add_argument("--pso-iters", type=int, default=None, help="swarm iterations override")
    parser.add_argument("--pso-seed", type=int, default=None,
                        help="re-key only the swarm search streams (channel trials keep --seed)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="movable-ris",
        description="Movable-RIS mmWave link simulator and baseline comparisons",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-power", help="achievable rate vs transmit power")
    p.add_argument("--powers", type=str, default=None,
                   help="comma-separated P_T values in dBm")
    _add_common(p)

    p = sub.add_parser("sweep-elements", help="achievable rate vs RIS element count")
    p.add_argument("--elements", type=str, default=None,
                   help="comma-separated element counts (perfect squares)")
    p.add_argument("--power-dbm", type=float, default=30.0)
    _add_common(p)

    p = sub.add_parser("ue-scenarios", help="compare schemes across UE positions")
    p.add_argument("--ue-positions", type=str, default=None,
                   help="semicolon-separated x,y,z triples")
    p.add_argument("--power-dbm", type=float, default=30.0)
    _add_common(p)

    p = sub.add_parser("single-run", help="one baseline at one operating point")
    p.add_argument("--baseline", type=str, default=BaselineKind.MOVABLE_RIS_JOINT.value)
    p.add_argument("--power-dbm", type=float, default=30.0)
    _add_common(p)

    p = sub.add_parser("oracle-check", help="swarm search vs exhaustive grid on a tiny instance")
    p.add_argument("--seeds", type=int, default=50, help="number of independent seeds")
    p.add_argument("--ratio", type=float, default=0.98,
                   help="required fraction of the oracle value")
    p.add_argument("--position-steps", type=int, default=4)
    p.add_argument("--phase-steps", type=int, default=8)
    _add_common(p)

    return parser


def _load_scenario(args) -> tuple[SystemConfig, DeploymentGeometry]:
    config, geometry = default_config()
    if args.config is not None:
        config, geometry = parse_config(Path(args.config).read_text(), (config, geometry))
    if args.seed is not None:
        config = replace(config, rng_seed=args.seed)
    if args.trials is not None:
        config = replace(config, monte_carlo_trials=args.trials)
    pso = config.pso
    if args.pso_particles is not None:
        pso = replace(pso, swarm_size=args.pso_particles)
    if args.pso_iters is not None:
        pso = replace(pso, iterations=args.pso_iters)
    if pso is not config.pso:
        config = replace(config, pso=pso)
    errors = validate(config, geometry)
    if errors:
        raise ConfigError("invalid configuration: " + "; ".join(errors))
    return config, geometry


def _parse_baselines(text: str | None) -> tuple[BaselineKind, ...]:
    if text is None:
        return tuple(BaselineKind)
    kinds = []
    for token in text.split(","):
        token = token.strip()
        try:
            kinds.append(BaselineKind(token))
        except ValueError:
            valid = ", ".join(k.value for k in BaselineKind)
            raise ConfigError(f"unknown baseline {token!r}; valid: {valid}") from None
    return tuple(kinds)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_positions(text: str) -> tuple[tuple[float, float, float], ...]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        coords = tuple(float(tok) for tok in chunk.split(","))
        if len(coords) != 3:
            raise ConfigError(f"UE position needs 3 coordinates: {chunk!r}")
        out.append(coords)
    return tuple(out)


def _run_sweep(args, kind: str, values: tuple, out_name: str) -> int:
    config, geometry = _load_scenario(args)
    power = getattr(args, "power_dbm", None)
    if power is not None:
        config = replace(config, tx_power_dbm=power)
    spec = SweepSpec(
        kind=kind,
        values=values,
        baselines=_parse_baselines(args.baselines),
        trials=args.trials if args.trials is not None else config.monte_carlo_trials,
        seed=config.rng_seed,
        pso_seed=args.pso_seed,
    )
    out_dir = args.out if args.out is not None else Path("results") / out_name
    results = sweep(spec, config, geometry, dump_dir=args.dump_channels)
    csv_path, meta_path = write_results(results, out_dir, config, geometry)
    script_path = emit_plot_script(results, Path(out_dir) / "plot_results.py", geometry)
    for r in results:
        flag = "  [FLAGGED]" if r.point_flagged else ""
        print(f"{r.swept_value:>24}  {r.baseline.value:<26} "
              f"{r.mean_rate:8.3f} +- {r.stderr:.3f} bps/Hz{flag}")
    print(f"wrote {csv_path}\nwrote {meta_path}\nwrote {script_path}")
    return 0


def _cmd_single_run(args) -> int:
    try:
        kind = BaselineKind(args.baseline)
    except ValueError:
        valid = ", ".join(k.value for k in BaselineKind)
        raise ConfigError(f"unknown baseline {args.baseline!r}; valid: {valid}") from None
    args.baselines = kind.value
    return _run_sweep(args, "single", (args.power_dbm,), "single-run")


def _cmd_oracle_check(args) -> int:
    config, geometry = _load_scenario(args)
    config = replace(
        config,
        tx_antennas=(2, 2),
        rx_antennas=(2, 2),
        ris_elements=(1, 2),
        num_streams=2,
        pso=replace(config.pso, swarm_size=10, iterations=50),
    )
    pso_seed = args.pso_seed if args.pso_seed is not None else config.rng_seed
    pack = build_scenario_pack(config, geometry, config.rng_seed)
    hits = 0
    worst = float("inf")
    for s in range(args.seeds):
        context = make_problem_context(pack, s)
        _, oracle_val = brute_force_joint(context, args.position_steps, args.phase_steps)
        rng = rng_stream(pso_seed, s, STREAM_PSO, 0)
        _, pso_val, _ = run(context, config.pso, rng)
        ratio = pso_val / oracle_val if oracle_val > 0 else 1.0
        worst = min(worst, ratio)
        if ratio >= args.ratio:
            hits += 1
    frac = hits / args.seeds
    print(f"swarm reached >= {args.ratio:.0%} of the grid oracle on "
          f"{hits}/{args.seeds} seeds ({frac:.0%}); worst ratio {worst:.4f}")
    ok = frac >= 0.9
    print("oracle-check:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep-power":
            powers = _parse_floats(args.powers) if args.powers else DEFAULT_POWERS
            return _run_sweep(args, "power", powers, "sweep-power")
        if args.command == "sweep-elements":
            elements = (
                tuple(int(v) for v in _parse_floats(args.elements))
                if args.elements
                else DEFAULT_ELEMENTS
            )
            return _run_sweep(args, "elements", elements, "sweep-elements")
        if args.command == "ue-scenarios":
            positions = (
                _parse_positions(args.ue_positions) if args.ue_positions else DEFAULT_UE_POSITIONS
            )
            return _run_sweep(args, "ue_scenarios", positions, "ue-scenarios")
        if args.command == "single-run":
            return _cmd_single_run(args)
        if args.command == "oracle-check":
            return _cmd_oracle_check(args)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
