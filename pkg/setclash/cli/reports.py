"""JSON reports and CSV traces written by the ``setclash`` command."""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from altproj.rates import decrease_terms
from common.exceptions import ReportError

logger = logging.getLogger(__name__)

STEP_COLUMNS = ["step_norm", "decrease_lhs", "decrease_rhs", "rate_ratio"]


def format_float(value):
    """17 significant digits; empty for missing values."""
    return "" if value is None else "%.17g" % value


def trace_header(dim):
    return ["iter", "set"] + [f"x{i}" for i in range(dim)] + STEP_COLUMNS


def trace_rows(trace, params=None):
    """One row per iterate.

    ``decrease_lhs``/``decrease_rhs`` are filled on even iterates when
    ``params`` (a HolderParams) is given; ``rate_ratio`` is the same-parity
    ratio ``step_k / step_{k-2}``.
    """
    steps = trace.step_norms
    for k, (x, label) in enumerate(zip(trace.iterates, trace.labels)):
        step = steps[k - 1] if k >= 1 else None
        lhs = rhs = ratio = None
        if params is not None and k >= 2 and k % 2 == 0:
            lhs, rhs = decrease_terms(steps[k - 2], steps[k - 1], params.q, params.delta)
        if k >= 3 and steps[k - 3] > 0:
            ratio = steps[k - 1] / steps[k - 3]
        yield [str(k), str(label)] + [format_float(v) for v in x] + [format_float(v) for v in (step, lhs, rhs, ratio)]


def emit_trace_csv(trace, path, params=None):
    """Write ``trace`` as CSV to ``path``.

    Raises:
        ReportError: The file cannot be written.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(trace_header(trace.a_set.dim))
            writer.writerows(trace_rows(trace, params))
    except OSError as exc:
        raise ReportError(f"Cannot write trace {path}: {exc}") from exc
    logger.info(f"Wrote {len(trace)} iterates to {path}")
    return path


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return str(value)


def write_report(report, out_dir, name):
    """Write ``<out_dir>/<name>.report.json`` and return its path.

    Raises:
        ReportError: The file cannot be written.
    """
    path = Path(out_dir) / f"{name}.report.json"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report, default=_jsonable, indent=2), encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"Cannot write report {path}: {exc}") from exc
    logger.info(f"Wrote report {path}")
    return path


def iter_checks(report):
    """Yield every serialized inequality check (a dict with ``tag`` and ``pass``) in ``report``."""
    if isinstance(report, dict):
        if "tag" in report and "pass" in report:
            yield report
            return
        for value in report.values():
            yield from iter_checks(value)
    elif isinstance(report, list):
        for value in report:
            yield from iter_checks(value)


def failed_checks(report):
    """Failing checks of ``report``, one per tag, in report order."""
    failures = {}
    for check in iter_checks(report):
        if not check["pass"] and check["tag"] not in failures:
            failures[check["tag"]] = check
    return list(failures.values())


def describe_failures(failures):
    return "; ".join(f"{check['tag']} violated, residual={check['residual']}" for check in failures)
