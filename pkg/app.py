
# app.py

import argparse
import logging
import sys

from config import LOG_LEVEL, RECORD_RUNS, load_run_config
from database import init_db
from services.audit_logging import create_audit_log, get_audit_logs, get_run, get_run_checks, get_runs, record_report
from services.errors import ConfigError, WorkbenchError
from services.reports import ReportDocument
from services.suites import COMMANDS

logger = logging.getLogger("harnack")


def run_suite(args):
    """Runs one verification command, writes its report and records the run."""
    try:
        cfg = load_run_config(args.command, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if RECORD_RUNS and not getattr(args, "no_record", False):
            init_db()
            create_audit_log(None, "Usage Error", f"{args.command}: {exc}")
        return 2

    try:
        report = COMMANDS[args.command](cfg)
    except (WorkbenchError, OSError) as exc:
        logger.error("%s aborted: %s", args.command, exc)
        report = ReportDocument(args.command, cfg.echo(), error=f"{type(exc).__name__}: {exc}")

    try:
        paths = report.write(cfg.out_dir)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 2
    if cfg.record:
        init_db()
        run = record_report(report)
        print(f"Recorded run {run.id}.")

    summary = report.summary()
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: {check.value:.6g} (tolerance {check.tolerance:.3g})")
    if report.error:
        print(f"error: {report.error}", file=sys.stderr)
    print(f"{summary['passed']}/{summary['total']} checks passed; report: {paths[0]}")
    return report.exit_code()


def list_runs_cmd(args):
    """Lists recorded verification runs."""
    init_db()
    runs = get_runs(args.command_filter)
    for run in runs:
        print(f"- #{run.id} {run.command} seed={run.seed} provider={run.provider} {run.passed}/{run.total} exit={run.exit_code} ({run.created_at})")
    return 0


def show_run_cmd(args):
    """Shows the checks of a recorded run."""
    init_db()
    run = get_run(args.run_id)
    if not run:
        print(f"Run with ID {args.run_id} not found.")
        return 2
    print(f"Run #{run.id}: {run.command} seed={run.seed} provider={run.provider}")
    for check in get_run_checks(run.id):
        status = "PASS" if check.passed else "FAIL"
        print(f"  [{status}] {check.name}: {check.value:.6g} (tolerance {check.tolerance:.3g}) - {check.anchor}")
    return 0


def list_audit_logs_cmd(args):
    """Lists audit log entries."""
    init_db()
    logs = get_audit_logs(args.run_id)
    for log in logs:
        print(f"- [{log.timestamp}] {log.action}: {log.details} (Run ID: {log.run_id})")
    return 0


def add_run_arguments(parser, with_dims=False, with_mode=False, with_provider=False):
    parser.add_argument("--config", help="KEY=VALUE config file (SEED, DIMS, PROVIDER, SAMPLES, INSTANCES, OUT, MODE, TOL_<NAME>).")
    parser.add_argument("--seed", type=int, help="Random seed.")
    parser.add_argument("--out", help="Output directory for JSON/CSV reports.")
    parser.add_argument("--tol", action="append", metavar="NAME=VALUE", help="Tolerance override (repeatable).")
    parser.add_argument("--samples", type=int, help="Sample points per axis.")
    parser.add_argument("--instances", type=int, help="Random instances per dimension.")
    parser.add_argument("--no-record", action="store_true", help="Do not store the run in the database.")
    if with_dims:
        parser.add_argument("--dims", help="Comma-separated dimensions, e.g. 3,4,5.")
    if with_provider:
        parser.add_argument("--provider", help="sphere:n=3,r0=1 | flat:n=3 | cigar | warped:<snapshot> | warped:n=3,ns=41,t_end=0.05")
    if with_mode:
        parser.add_argument("--mode", help="with_1_over_t | ancient (harnack-scan), expanding | steady (soliton-detect).")
    parser.set_defaults(func=run_suite)


def main(argv=None):
    """The main function of the application."""
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(description="Harnack Workbench")
    subparsers = parser.add_subparsers(dest="command")

    # Verification Commands
    identity_parser = subparsers.add_parser("identity-suite", help="Algebraic identities of Q and boundary tuples of K.")
    add_run_arguments(identity_parser, with_dims=True)

    cone_parser = subparsers.add_parser("cone-check", help="Cone membership and certificates.")
    add_run_arguments(cone_parser, with_dims=True)

    ode_parser = subparsers.add_parser("ode-invariance", help="Invariance of K under dS/dt = Q(S).")
    add_run_arguments(ode_parser, with_dims=True)

    evolution_parser = subparsers.add_parser("verify-evolution", help="Space-time evolution residuals on a provider.")
    add_run_arguments(evolution_parser, with_provider=True)

    harnack_parser = subparsers.add_parser("harnack-scan", help="Harnack forms over a provider's sample grid.")
    add_run_arguments(harnack_parser, with_mode=True, with_provider=True)

    soliton_parser = subparsers.add_parser("soliton-detect", help="Soliton detection and equality cases.")
    add_run_arguments(soliton_parser, with_mode=True, with_provider=True)

    # Run History Commands
    list_runs_parser = subparsers.add_parser("list-runs", help="Lists recorded runs.")
    list_runs_parser.add_argument("--command", dest="command_filter", help="Only runs of this command.", required=False)
    list_runs_parser.set_defaults(func=list_runs_cmd)

    show_run_parser = subparsers.add_parser("show-run", help="Shows the checks of a recorded run.")
    show_run_parser.add_argument("run_id", type=int, help="The ID of the run.")
    show_run_parser.set_defaults(func=show_run_cmd)

    list_audit_logs_parser = subparsers.add_parser("list-audit-logs", help="Lists audit log entries.")
    list_audit_logs_parser.add_argument("--run-id", type=int, help="The ID of the run to filter by.", required=False)
    list_audit_logs_parser.set_defaults(func=list_audit_logs_cmd)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0

    if hasattr(args, "func"):
        return args.func(args)
    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
