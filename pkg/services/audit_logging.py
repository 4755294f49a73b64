# audit_logging.py

import json

from database import SessionLocal, AuditLog, VerificationRun, CheckResult


def create_audit_log(run_id, action, details):
    """Creates a new audit log entry."""
    db = SessionLocal()
    audit_log = AuditLog(run_id=run_id, action=action, details=details)
    db.add(audit_log)
    db.commit()
    db.refresh(audit_log)
    db.close()
    return audit_log


def get_audit_logs(run_id=None):
    """Gets all audit log entries, optionally filtered by run."""
    db = SessionLocal()
    if run_id:
        logs = db.query(AuditLog).filter(AuditLog.run_id == run_id).order_by(AuditLog.id).all()
    else:
        logs = db.query(AuditLog).order_by(AuditLog.id).all()
    db.close()
    return logs


def record_report(report):
    """Stores a ReportDocument with its checks and events; returns the run."""
    db = SessionLocal()
    summary = report.summary()
    run = VerificationRun(
        command=report.command,
        seed=report.config.get("seed"),
        provider=report.config.get("provider"),
        config=json.dumps(report.config, sort_keys=True),
        total=summary["total"],
        passed=summary["passed"],
        exit_code=report.exit_code(),
    )
    for check in report.checks:
        run.checks.append(
            CheckResult(
                name=check.name,
                value=check.value,
                tolerance=check.tolerance,
                kind=check.kind,
                anchor=check.anchor,
                passed=check.passed,
            )
        )
    db.add(run)
    db.commit()
    db.refresh(run)
    run_id = run.id
    db.close()

    create_audit_log(run_id, "Run Completed", f"{report.command}: {summary['passed']}/{summary['total']} checks passed")
    for check in report.failed:
        create_audit_log(run_id, "Check Failed", f"{check.name}: value {check.value:.6g}, tolerance {check.tolerance:.3g}")
    for message in report.events:
        create_audit_log(run_id, "Event", message)
    if report.error:
        create_audit_log(run_id, "Run Error", report.error)
    return get_run(run_id)


def get_runs(command=None):
    """Gets all verification runs, optionally filtered by command."""
    db = SessionLocal()
    query = db.query(VerificationRun)
    if command:
        query = query.filter(VerificationRun.command == command)
    runs = query.order_by(VerificationRun.id).all()
    db.close()
    return runs


def get_run(run_id):
    """Gets a single run by its ID."""
    db = SessionLocal()
    run = db.query(VerificationRun).filter(VerificationRun.id == run_id).first()
    db.close()
    return run


def get_run_checks(run_id):
    """Gets the check results of a run."""
    db = SessionLocal()
    checks = db.query(CheckResult).filter(CheckResult.run_id == run_id).order_by(CheckResult.id).all()
    db.close()
    return checks
