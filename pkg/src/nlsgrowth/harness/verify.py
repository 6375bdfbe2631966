"""Run the registered checks and assemble the verification report."""

from __future__ import annotations

import json
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema

from .checks import CHECKS, REGISTRY, CheckContext
from .config import SCHEMA_VERSION, ConfigError, SuiteConfig, load_schema


def _run_one(name: str, ctx: CheckContext) -> dict:
    check = CHECKS[name]
    entry = {"name": name, "hard": check.hard}
    try:
        passed, details = check.run(ctx)
        entry.update(passed=bool(passed), details=_jsonable(details))
    except Exception as exc:  # a crashing check is a failing check
        entry.update(passed=False, details={}, error="".join(
            traceback.format_exception_only(type(exc), exc)).strip())
    return entry


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def verify_claims(suite: SuiteConfig) -> dict:
    """Run the selected checks; the report lists them in registry order."""
    names = [c.name for c in REGISTRY] if suite.checks is None else list(suite.checks)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError("checks", f"unknown check(s): {', '.join(unknown)}")
    order = [c.name for c in REGISTRY if c.name in names]
    ctx = CheckContext(mutation=suite.mutation, monitoring=dict(suite.monitoring))
    if suite.workers > 1 and len(order) > 1:
        with ProcessPoolExecutor(suite.workers) as pool:
            entries = list(pool.map(_run_one, order, [ctx] * len(order)))
    else:
        entries = [_run_one(n, ctx) for n in order]
    report = {
        "schema_version": SCHEMA_VERSION,
        "passed": all(e["passed"] for e in entries if e["hard"]),
        "mutation": suite.mutation,
        "checks": entries,
    }
    jsonschema.validate(report, load_schema("report"))
    return report


def write_report(report: dict, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
