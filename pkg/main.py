# main.py - Command-line front end
#
# Subcommands: metric, pack, net, bounds, estimate, verify, koebe.
# Exit status: 0 success, 1 property violation (verify), 2 usage/validation error.

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from config import METRIC_PRESETS, metric_preset, resolve_metric_config
from constructions import (
    MAX_ENUMERATED_MEMBERS,
    PACKING_FAMILIES,
    RHO_HORIZON,
    NetUnderflowError,
    RhoSearchError,
    compute_rho,
    curves_consistent,
    iter_packing_members,
    koebe_sandwich,
    lower_bound_curve,
    net_upper_point,
    packing_certificate,
    quantize_to_net,
    schlicht_bounds,
    upper_bound_curve,
)
from crash_log import (
    configure_logging,
    install_global_excepthook,
    log_current_exception,
    logger,
)
from domain.models import ClassId, MetricConfig, SampleSpec
from estimator import DEFAULT_LADDER, estimate, sample_a2_slice, sample_class
from function_classes import koebe
from metric import metric_d
from services import report_service
from services.verification_service import RATE_DEGREES, SUITE_CHOICES, run_suite

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

USAGE_ERRORS = (
    ValueError,
    OSError,
    json.JSONDecodeError,
    RhoSearchError,
    NetUnderflowError,
)


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        )
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        )
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _seed(text: str) -> int:
    value = int(text)
    if not (0 <= value < 2**64):
        raise argparse.ArgumentTypeError(
            f"seed must be a 64-bit unsigned integer, got {text}"
        )
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        type=Path,
        help="JSON config file (lambda, alpha, metric_terms, circle_samples)",
    )
    common.add_argument(
        "--preset",
        choices=sorted(METRIC_PRESETS),
        default="default",
        help="metric parameters before --config and flags (default J=60, M=4096)",
    )
    common.add_argument(
        "--lambda", dest="lam", type=float, help="metric weight base, 0 < lambda < 1"
    )
    common.add_argument("--alpha", type=float, help="radius exponent, alpha > 0")
    common.add_argument("--metric-terms", type=int, help="number J of metric terms")
    common.add_argument("--circle-samples", type=int, help="samples M per circle")
    common.add_argument("--seed", type=_seed, default=0, help="random seed (default 0)")
    common.add_argument("--out", type=Path, help="output file (default stdout)")
    common.add_argument(
        "--workers", type=int, default=1, help="threads for pairwise distances"
    )
    common.add_argument("--log-file", type=Path, help="also write log records here")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="covering-numbers",
        description=(
            "Metric entropy of holomorphic function classes: "
            "certified bounds and estimates."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", parents=[common], help="certified d(f, g) interval")
    p.add_argument("f", type=Path, help="coefficient file")
    p.add_argument("g", type=Path, help="coefficient file")

    p = sub.add_parser(
        "pack", parents=[common], help="packing certificate for the class-A family"
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--family", choices=PACKING_FAMILIES, default="A")
    p.add_argument(
        "--enumerate",
        action="store_true",
        help=f"list members (count <= {MAX_ENUMERATED_MEMBERS})",
    )

    p = sub.add_parser(
        "net", parents=[common], help="net certificate, or quantize a polynomial"
    )
    p.add_argument("--n", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--quantize", type=Path, help="coefficient file to quantize")

    p = sub.add_parser("bounds", parents=[common], help="bound curves as CSV")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=20)

    p = sub.add_parser(
        "estimate", parents=[common], help="empirical pack/cover counts on a sample"
    )
    p.add_argument(
        "--class", dest="class_name", default="A", help="A, B, B-littlewood or convex"
    )
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument(
        "--slice", action="store_true", help="sample z + a2 z^2, |a2| <= 1/2 instead"
    )
    p.add_argument(
        "--ladder",
        type=_float_list,
        default=list(DEFAULT_LADDER),
        help="comma-separated deltas",
    )

    p = sub.add_parser("verify", parents=[common], help="run a property suite")
    p.add_argument("--suite", choices=SUITE_CHOICES, required=True)
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser(
        "koebe", parents=[common], help="Koebe coefficients and the sharpness sandwich"
    )
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--sharpness", action="store_true", help="include the sandwich")
    p.add_argument("--n-values", type=_int_list, default=list(RATE_DEGREES))
    return parser


def _metric_config(args: argparse.Namespace) -> MetricConfig:
    overrides = {
        "lam": args.lam,
        "alpha": args.alpha,
        "metric_terms": args.metric_terms,
        "circle_samples": args.circle_samples,
    }
    base = metric_preset(args.preset)
    return resolve_metric_config(args.config, overrides, base=base)


def cmd_metric(args, cfg, stdout) -> int:
    f = report_service.read_poly(args.f)
    g = report_service.read_poly(args.g)
    interval = metric_d(f, g, cfg)
    payload = report_service.provenance(cfg, f=str(args.f), g=str(args.g))
    payload.update(interval.to_dict())
    report_service.emit_json(payload, args.out, stdout)
    return EXIT_OK


def cmd_pack(args, cfg, stdout) -> int:
    cert = packing_certificate(args.n, args.K, cfg, args.family)
    payload = report_service.provenance(cfg)
    payload["certificate"] = cert.to_dict()
    if args.enumerate:
        if cert.count > MAX_ENUMERATED_MEMBERS:
            raise ValueError(
                f"Refusing to enumerate {cert.count} members "
                f"(limit {MAX_ENUMERATED_MEMBERS})"
            )
        members = iter_packing_members(args.n, args.K, args.family)
        payload["members"] = [m.to_dict()["coeffs"] for m in members]
    report_service.emit_json(payload, args.out, stdout)
    return EXIT_OK


def cmd_net(args, cfg, stdout) -> int:
    if args.quantize is not None:
        p = report_service.read_poly(args.quantize)
        n = args.n if args.n is not None else p.degree
        K = args.K if args.K is not None else net_upper_point(n, cfg).K
        q, errors = quantize_to_net(p, n, K)
        payload = report_service.provenance(cfg, n=n, K=K, input=str(args.quantize))
        payload["center"] = q.to_dict()["coeffs"]
        payload["coefficient_errors"] = [float(e) for e in errors]
        payload["distance"] = metric_d(p, q, cfg).to_dict()
    else:
        if args.n is None:
            raise ValueError("net needs --n (or --quantize PATH)")
        cert = net_upper_point(args.n, cfg)
        payload = report_service.provenance(cfg)
        payload["certificate"] = cert.to_dict()
    report_service.emit_json(payload, args.out, stdout)
    return EXIT_OK


def cmd_bounds(args, cfg, stdout) -> int:
    rho = compute_rho(cfg, max(args.n_max, RHO_HORIZON))
    lower = lower_bound_curve(cfg, args.n_min, args.n_max, rho)
    upper = upper_bound_curve(cfg, args.n_min, args.n_max)
    rows = report_service.bounds_rows(lower, upper)
    meta = report_service.provenance(cfg, n_min=args.n_min, n_max=args.n_max)
    meta["rho"] = rho.to_dict()
    meta["schlicht"] = [schlicht_bounds(lo, up) for lo, up in zip(lower, upper)]
    conflicts = curves_consistent(lower, upper)
    if conflicts:
        logger.warning("Bound curves conflict at (n_lower, n_upper) %s", conflicts)
    meta["curve_conflicts"] = [list(pair) for pair in conflicts]
    report_service.emit_csv(report_service.BOUNDS_HEADER, rows, meta, args.out, stdout)
    return EXIT_OK


def cmd_estimate(args, cfg, stdout) -> int:
    if args.slice:
        points = sample_a2_slice(args.count, args.seed)
        sample = {"slice": "a2", "count": args.count, "seed": args.seed}
    else:
        class_id = ClassId.from_cli(args.class_name)
        spec = SampleSpec(class_id, args.degree, args.count, args.seed)
        points = sample_class(spec)
        sample = spec.to_dict()
    meta = report_service.provenance(cfg, sample=sample, ladder=list(args.ladder))
    report = estimate(points, args.ladder, cfg, workers=args.workers, provenance=meta)
    if args.out is None:
        report_service.emit_json(report.to_dict(), None, stdout)
    else:
        report_service.emit_csv(
            report_service.ESTIMATE_HEADER,
            report_service.estimate_rows(report),
            report.to_dict(),
            args.out,
            stdout,
        )
    return EXIT_OK


def cmd_verify(args, cfg, stdout) -> int:
    results = run_suite(args.suite, cfg, args.trials, args.seed)
    meta = report_service.provenance(
        cfg, suite=args.suite, seed=args.seed, trials=args.trials
    )
    report_service.emit_header(meta, stdout)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        stdout.write(
            f"{result.name}: {status} "
            f"({result.checks} checks, {len(result.violations)} violations)\n"
        )
        for violation in result.violations:
            stdout.write(f"  {violation}\n")
    if args.out is not None:
        payload = dict(meta)
        payload["suites"] = [r.to_dict() for r in results]
        report_service.emit_json(payload, args.out, stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


def cmd_koebe(args, cfg, stdout) -> int:
    payload = report_service.provenance(cfg, n=args.n)
    payload["coeffs"] = koebe(args.n).to_dict()["coeffs"]
    if args.sharpness:
        rows = [koebe_sandwich(n, cfg) for n in args.n_values]
        payload["sandwich"] = [{**asdict(row), "holds": row.holds()} for row in rows]
    report_service.emit_json(payload, args.out, stdout)
    return EXIT_OK


COMMANDS = {
    "metric": cmd_metric,
    "pack": cmd_pack,
    "net": cmd_net,
    "bounds": cmd_bounds,
    "estimate": cmd_estimate,
    "verify": cmd_verify,
    "koebe": cmd_koebe,
}


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.verbose, args.log_file)
    logger.info("Command %s started", args.command)
    try:
        if args.workers < 1:
            raise ValueError(f"--workers must be >= 1, got {args.workers}")
        cfg = _metric_config(args)
        status = COMMANDS[args.command](args, cfg, stdout)
    except USAGE_ERRORS as e:
        stderr.write(f"error: {e}\n")
        logger.info("Command %s failed: %s", args.command, e)
        return EXIT_USAGE
    except Exception:
        log_current_exception(f"the {args.command} command")
        raise
    logger.info("Command %s finished with status %d", args.command, status)
    return status


if __name__ == "__main__":
    install_global_excepthook()
    sys.exit(main())
