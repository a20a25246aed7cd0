"""Command-line entry point of the laboratory."""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from src.config import settings
from src.errors import ConfigError, ResilienceLabError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _configure_logging(level: str) -> None:
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, force=True)


def _print_json(tree) -> None:
    print(json.dumps(tree, indent=2, sort_keys=True))


def _out_dir(args, name: str) -> Path:
    root = Path(args.out) if args.out else settings.output_path
    return root / name


def _assembly(args):
    from src.scenario import assemble, load_config

    return assemble(load_config(args.config), args.seed, args.steps)


def _realization(model) -> dict:
    return {
        "A": model.A.tolist(),
        "B": model.B.tolist(),
        "C": model.C.tolist(),
        "D": model.D.tolist(),
        "Ts": model.Ts,
    }


def cmd_simulate(args) -> int:
    from src.scenario import emit_outputs, load_config, run_scenario

    cfg = load_config(args.config)
    log = run_scenario(cfg, args.seed, args.steps)
    out = Path(args.out) if args.out else settings.output_path / cfg.name
    emit_outputs(log, out)
    print(f"{cfg.name}: {log.steps} steps, {len(log.verdicts)} verdicts written to {out}")
    return 0


def cmd_reproduce(args) -> int:
    from src.scenario import EXPERIMENTS
    from src.services import RunLogService, ExperimentExecutor

    requested = [e.upper() for e in args.experiments]
    if "ALL" in requested:
        requested = list(EXPERIMENTS)
    unknown = [e for e in requested if e not in EXPERIMENTS]
    if unknown:
        raise ConfigError(f"unknown experiment(s) {', '.join(unknown)}; choose from {', '.join(EXPERIMENTS)} or all")

    run_log = RunLogService()
    executor = ExperimentExecutor(run_log)
    out = Path(args.out) if args.out else settings.output_path
    results = executor.execute_many(requested, args.seed, out, args.workers)
    run_log.dump(out / "runs.json")

    code = 0
    for key, (status, summary, error) in results.items():
        if summary is not None:
            print(summary.to_text())
        print(f"{key}: {status.value}" + (f" ({error})" if error else ""))
        if summary is None:
            code = max(code, 2)
        elif not summary.passed:
            code = max(code, 1)
    return code


def cmd_factorize(args) -> int:
    from src.sscore.norms import spectral_radius

    asm = _assembly(args)
    factors = asm.factors
    tree = {
        "plant": {"states": asm.model.n, "inputs": asm.model.inputs, "outputs": asm.model.outputs},
        "F": factors.F.tolist(),
        "L": factors.L.tolist(),
        "factors": {},
    }
    for name, sys_ in factors.items():
        rho = spectral_radius(sys_.A) if sys_.n else 0.0
        tree["factors"][name] = {
            "states": sys_.n,
            "inputs": sys_.inputs,
            "outputs": sys_.outputs,
            "spectral_radius": rho,
            "stability_margin": 1.0 - rho,
        }
    _print_json(tree)
    return 0


def cmd_verify_bezout(args) -> int:
    from src.factory import verify_bezout

    asm = _assembly(args)
    deviation = verify_bezout(asm.factors)
    print(f"max Bezout deviation = {deviation:.6e}")
    return 0


def cmd_design_postfilter(args) -> int:
    asm = _assembly(args)
    if asm.mc is None:
        raise ConfigError("design-postfilter needs the modified configuration")
    _print_json({
        "R": _realization(asm.mc.R),
        "Rbar": _realization(asm.mc.Rbar),
        "Sigma_ry": np.asarray(asm.Sigma_ry).tolist(),
    })
    return 0


def cmd_check_performance(args) -> int:
    from src.mcstation import resilient_performance_check

    asm = _assembly(args)
    if asm.mc is None:
        raise ConfigError("check-performance needs the modified configuration")
    report = resilient_performance_check(asm.factors, asm.mc, target_theta_a=args.target_theta_a,
                                         target_ry=args.target_ry)
    print(report.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per laboratory operation."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="64-bit run seed (overrides RESLAB_SEED)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--steps", type=int, default=None, help="run length in steps (overrides duration)")
    common.add_argument("--log-level", default=None, help="logging level, e.g. DEBUG")

    parser = argparse.ArgumentParser(prog="reslab", description="Resilient cyber-physical control laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run one scenario and emit its outputs")
    p.add_argument("config", help="scenario JSON file or preset name")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", parents=[common], help="reproduce experiments E1..E6")
    p.add_argument("experiments", nargs="+", help="experiment ids or 'all'")
    p.add_argument("--workers", type=int, default=None, help="concurrent experiments")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("factorize", parents=[common], help="print factor dimensions and stability margins")
    p.add_argument("config")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("verify-bezout", parents=[common], help="print the largest Bezout identity deviation")
    p.add_argument("config")
    p.set_defaults(func=cmd_verify_bezout)

    p = sub.add_parser("design-postfilter", parents=[common], help="print the post-filter realization")
    p.add_argument("config")
    p.set_defaults(func=cmd_design_postfilter)

    p = sub.add_parser("check-performance", parents=[common], help="print the performance indices")
    p.add_argument("config")
    p.add_argument("--target-theta-a", type=float, default=None)
    p.add_argument("--target-ry", type=float, default=None)
    p.set_defaults(func=cmd_check_performance)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run the CLI; returns the process exit code."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level or settings.log_level)
    try:
        return args.func(args)
    except ResilienceLabError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
