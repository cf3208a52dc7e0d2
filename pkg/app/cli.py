"""Command-line entry point: python -m app.cli <command> ..."""

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional, Sequence

import mpmath

from app.config import get_settings
from app.models.schemas import DefectConfig, SweepSpec, SWEEP_LAWS
from app.services.equilibrium import equilibrium_service
from app.services.asymptotics import asymptotic_service
from app.services.closed_forms import closed_form_service
from app.services.oracle import oracle_service
from app.services.verification import SUITES, verification_service
from app.services.export_service import export_service
from app.services.lattice import region_name
from app.utils.errors import NonConvergenceError, exit_code_for

logger = logging.getLogger(__name__)

SWEEP_PARAMS = ("alpha", "beta", "gamma", "delta", "eps")


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _config_from_args(args: argparse.Namespace) -> DefectConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            return DefectConfig.model_validate_json(fh.read())
    if args.n is None:
        raise ValueError("either --n or --config is required")
    cfg = DefectConfig(n=args.n, holes=args.holes, seps=args.seps)
    if args.width_extra is not None and args.width_extra != cfg.k - cfg.l:
        raise ValueError(f"--width-extra {args.width_extra} does not match k-l = {cfg.k - cfg.l}")
    return cfg


def cmd_count(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    bar = closed_form_service.as_bar_config(cfg)
    if bar is not None and cfg.n > get_settings().exact_path_max_n:
        print(f"log {mpmath.nstr(closed_form_service.bars_log_count(bar), 20)}")
        print("path: bars-log")
        return 0
    count = closed_form_service.count_exact(cfg)
    print(count.value)
    print(f"path: {count.path}")
    return 0


def cmd_corr(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    if cfg.k != cfg.l:
        raise ValueError(f"correlations need as many holes as separations, got k={cfg.k}, l={cfg.l}")
    dipoles = closed_form_service.dipole_decomposition(cfg)
    if dipoles is not None:
        value, path = closed_form_service.dipole_family_corr(cfg.n, dipoles), "dipoles"
    else:
        value, path = oracle_service.corr_finite(cfg), "oracle"
    logger.info(f"{region_name(cfg)}: correlation via {path}")
    print(value.as_fraction() if value.is_rational() else value)
    print(f"~ {mpmath.nstr(value.to_mpf(), 15)}")
    print(f"path: {path}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    results = verification_service.run_suite(args.suite, args.max_n)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{status}  {r.name:<48} {r.cases:>6}"
        if r.counterexample:
            line += f"  {r.counterexample}"
        print(line)
    verification_service.ensure_passed(results)
    return 0


def _sweep_params(args: argparse.Namespace) -> Dict[str, float]:
    params = {name: getattr(args, name) for name in SWEEP_PARAMS if getattr(args, name) is not None}
    if args.opposite:
        params["opposite"] = 1.0
    return params


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = args.n or args.d
    if grid is None:
        raise ValueError("a grid is required: --n start:stop:step (or --d for slit-limit)")
    spec = SweepSpec(
        law=args.law, params=_sweep_params(args), grid=grid, output=args.output,
        format="xlsx" if args.xlsx else "csv",
    )
    exact, predicted = asymptotic_service.law_evaluators(spec.law, spec.params)
    record = asymptotic_service.convergence_probe(spec.law, exact, predicted, spec.grid_values())
    if spec.format == "xlsx":
        result = export_service.export_record_xlsx(record, spec.params, spec.output)
        print(result["file_path"])
    elif spec.output:
        export_service.export_record_csv(record, spec.output)
        print(spec.output)
    else:
        sys.stdout.write(export_service.record_csv(record))
    return 0


def cmd_equilibrium(args: argparse.Namespace) -> int:
    report = equilibrium_service.find_equilibrium(args.gammas, args.displace)
    if args.xlsx:
        export_service.export_equilibrium_xlsx(report, args.xlsx)
    if args.output:
        export_service.write_json(report, args.output)
    print(report.model_dump_json(by_alias=True, indent=2))
    return 0


def cmd_constants(args: argparse.Namespace) -> int:
    print(json.dumps(asymptotic_service.constants(), indent=2))
    return 0


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="Half-height: the region is AR_{2n,2n+k-l}")
    p.add_argument("--holes", type=_int_list, default=[], help="Comma-separated hole labels")
    p.add_argument("--seps", type=_int_list, default=[], help="Comma-separated separation labels")
    p.add_argument("--width-extra", type=int, help="k-l, checked against the defect lists")
    p.add_argument("--config", help="JSON file holding a DefectConfig")


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="aztec-defects", description=settings.app_name)
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level (stderr)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="Exact number of perfect matchings")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_count)

    p = sub.add_parser("corr", help="Finite-size correlation for k = l")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_corr)

    p = sub.add_parser("verify", help="Run an invariant battery")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--max-n", type=int, default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sweep", help="Exact-versus-asymptotic convergence table")
    p.add_argument("law", choices=SWEEP_LAWS)
    p.add_argument("--n", help="Grid start:stop:step")
    p.add_argument("--d", help="Gap grid start:stop:step (slit-limit)")
    for name in SWEEP_PARAMS:
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--opposite", action="store_true", help="Opposite slit orientation")
    p.add_argument("--output", help="Write the table here instead of stdout")
    p.add_argument("--xlsx", action="store_true", help="Write a styled workbook")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("equilibrium", help="Most likely placement of bars of charge")
    p.add_argument("--gammas", type=_float_list, required=True, help="Comma-separated bar lengths")
    p.add_argument("--displace", type=_float_list, help="Offset added to the equilibrium gaps")
    p.add_argument("--output", help="Also write the JSON report here")
    p.add_argument("--xlsx", help="Also write a styled workbook here")
    p.set_defaults(handler=cmd_equilibrium)

    p = sub.add_parser("constants", help="Print the asymptotic constants")
    p.set_defaults(handler=cmd_constants)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (ValueError, NonConvergenceError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except Exception as e:
        logger.exception(f"Unexpected error in {args.command}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
