"""Dispatch of ``setclash`` subcommands to the library apps."""

from dataclasses import dataclass, field
import logging
from io import StringIO

from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError

from altproj.rates import (
    DEFAULT_PAIR_SAMPLES,
    HolderParams,
    classify_termination,
    estimate_delta,
    verify_decrease,
    verify_linear_rate,
)
from altproj.trace import run_ap
from common.conf import get_setting
from conditions.certificates import dual_certificate, holder_certificate, primal_certificate, reverify
from conditions.choices import DualVariant, PrimalVariant
from conditions.index import index_report, nonintersect_index
from conditions.probe import stationarity_probe

from .choices import ExitCode, Subcommand
from .demos import demo_scenario
from .reports import emit_trace_csv, failed_checks, write_report
from .schemas import load_scenario

logger = logging.getLogger(__name__)

SAMPLING = {Subcommand.PRIMAL, Subcommand.DUAL, Subcommand.HOLDER, Subcommand.PROBE, Subcommand.DELTA}


@dataclass
class RunResult:
    name: str
    subcommand: str
    report: dict
    files: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def status(self):
        return self.report.get("status")

    @property
    def exit_code(self):
        return ExitCode.VERIFY_FAILED if self.failures else ExitCode.OK


def _require(params, *names):
    missing = [name for name in names if getattr(params, name) is None]
    if missing:
        raise ValidationError(f"Scenario params are missing {', '.join(missing)}")


def _choice(choices, value, default):
    try:
        return choices(value if value is not None else default)
    except ValueError as exc:
        raise ValidationError(f"{value!r} is not one of {', '.join(choices.values)}") from exc


def _pair(scenario):
    sets = scenario.build_sets()
    if len(sets) != 2:
        raise ValidationError(f"This subcommand needs exactly two sets, got {len(sets)}")
    return sets


def _region(params):
    return params.region.build() if params.region is not None else None


def _box(params):
    region = _region(params)
    if region is None:
        return None
    return region.center - region.radius, region.center + region.radius


def _certificate_options(params):
    options = {
        "index_method": params.index_method,
        "h": params.grid_h,
        "budget": params.budget,
        "seed": params.seed,
        "slope_directions": params.slope_directions,
        "tol": params.tol,
    }
    return {key: value for key, value in options.items() if value is not None}


def _pair_distance(sets, params):
    return nonintersect_index(sets, params.index_method, h=params.grid_h, budget=params.budget, box=_box(params))


def run_ap_scenario(scenario):
    """Alternating projections from ``params.x0``; decrease and rate checks when ``params.delta`` is set."""
    params = scenario.params
    _require(params, "x0")
    a_set, b_set = _pair(scenario)
    trace = run_ap(a_set, b_set, params.x0, max_iter=params.max_iter, tol=params.tol)
    dist = _pair_distance([a_set, b_set], params)
    termination = classify_termination(trace, dist=dist, tol=params.tol)
    report = {
        "status": termination["kind"],
        "trace": {
            "status": str(trace.status),
            "projections": len(trace) - 1,
            "last": trace.last.tolist(),
            "monotone": trace.is_monotone(),
        },
        "termination": termination,
    }
    holder = None
    if params.delta is not None:
        holder = HolderParams(params.q or 1.0, params.delta)
        report["decrease"] = verify_decrease(trace, holder, dist=dist, tol=params.tol).as_dict()
        if holder.q == 1.0:
            report["linear_rate"] = verify_linear_rate(trace, holder.delta, tol=params.tol).as_dict()
        report["warnings"] = holder.warnings
    return report, trace, holder


def run_index_scenario(scenario):
    params = scenario.params
    sets = scenario.build_collection().translated_sets() if scenario.shifts else scenario.build_sets()
    return index_report(sets, params.index_method, h=params.grid_h, budget=params.budget, box=_box(params))


def _with_reverify(certificate):
    report = certificate.as_dict()
    report["reverified"] = reverify(certificate).as_dict() == report["residuals"]
    return report


def run_primal_scenario(scenario):
    params = scenario.params
    _require(params, "eps", "lam", "eta")
    certificate = primal_certificate(
        scenario.build_collection(),
        scenario.gauge.build(),
        params.eps,
        params.lam,
        params.eta,
        variant=_choice(PrimalVariant, params.variant, PrimalVariant.T12),
        rho=params.rho,
        **_certificate_options(params),
    )
    return _with_reverify(certificate)


def run_dual_scenario(scenario):
    params = scenario.params
    _require(params, "eps", "lam", "eta")
    certificate = dual_certificate(
        scenario.build_collection(),
        scenario.gauge.build(),
        params.eps,
        params.lam,
        params.eta,
        tau=params.tau or 0.99,
        variant=_choice(DualVariant, params.variant, DualVariant.T17),
        rho=params.rho,
        weights=params.weights,
        **_certificate_options(params),
    )
    return _with_reverify(certificate)


def run_holder_scenario(scenario):
    params = scenario.params
    _require(params, "eps", "lam", "eta")
    certificate = holder_certificate(
        scenario.build_collection(),
        params.q or scenario.gauge.q,
        params.alpha or scenario.gauge.alpha,
        params.eps,
        params.lam,
        params.eta,
        tau=params.tau or 0.99,
        variant=_choice(DualVariant, params.variant, DualVariant.T17),
        rho=params.rho,
        **_certificate_options(params),
    )
    return _with_reverify(certificate)


def run_probe_scenario(scenario):
    params = scenario.params
    _require(params, "eps_list")
    return stationarity_probe(
        scenario.build_collection(),
        params.eps_list,
        region=_region(params),
        h=params.grid_h or 0.05,
        rho=params.rho,
        samples=params.count or 4,
        seed=params.seed,
    )


def run_delta_scenario(scenario):
    """Sampled pair-condition estimate; with ``params.x0`` the estimate is also checked on an AP trace."""
    params = scenario.params
    a_set, b_set = _pair(scenario)
    q = params.q or 1.0
    dist = _pair_distance([a_set, b_set], params)
    delta = estimate_delta(
        a_set, b_set, q=q, region=_region(params), count=params.count or DEFAULT_PAIR_SAMPLES, seed=params.seed, dist=dist
    )
    report = {"delta": delta, "q": q, "dist": dist, "scope": "sampled upper bound"}
    if params.x0 is not None:
        holder = HolderParams(q, delta)
        trace = run_ap(a_set, b_set, params.x0, max_iter=params.max_iter, tol=params.tol)
        report["decrease"] = verify_decrease(trace, holder, dist=dist, tol=params.tol).as_dict()
        report["warnings"] = holder.warnings
    return report


HANDLERS = {
    Subcommand.INDEX: run_index_scenario,
    Subcommand.PRIMAL: run_primal_scenario,
    Subcommand.DUAL: run_dual_scenario,
    Subcommand.HOLDER: run_holder_scenario,
    Subcommand.PROBE: run_probe_scenario,
    Subcommand.DELTA: run_delta_scenario,
}


def execute(subcommand, target, out=None, tol=None, max_iter=None, seed=None):
    """Run one subcommand on a scenario file (or a builtin demo) and write its files.

    Returns:
        RunResult with the report, written paths and failing checks.

    Raises:
        ValidationError, pydantic.ValidationError, OSError: Bad input.
        PreconditionError: A hypothesis of the requested check failed.
        ReportError: An output file could not be written.
    """
    subcommand = _choice(Subcommand, subcommand, None)
    scenario = demo_scenario(target) if subcommand == Subcommand.DEMO else load_scenario(target)
    scenario = scenario.with_overrides(tol=tol, max_iter=max_iter, seed=seed)
    if subcommand in SAMPLING and scenario.params.seed is None:
        raise ValidationError(f"{subcommand} samples points; set params.seed or pass --seed")
    out = out or get_setting("SETCLASH_OUT")
    logger.info(f"Running {subcommand} on scenario {scenario.name}")

    files = []
    if subcommand in (Subcommand.AP, Subcommand.DEMO):
        result, trace, holder = run_ap_scenario(scenario)
        files.append(emit_trace_csv(trace, f"{out}/{scenario.name}.trace.csv", holder))
    else:
        result = HANDLERS[subcommand](scenario)
    report = {"name": scenario.name, "subcommand": str(subcommand), **result, "scenario": scenario.to_dict()}
    files.insert(0, write_report(report, out, scenario.name))
    failures = failed_checks(report)
    if failures:
        logger.warning(f"{scenario.name}: {len(failures)} checks failed")
    return RunResult(scenario.name, str(subcommand), report, files, failures)


def run_command(argv, stdout=None, stderr=None):
    """Run ``setclash`` with ``argv`` and return its exit code."""
    stdout = stdout if stdout is not None else StringIO()
    stderr = stderr if stderr is not None else StringIO()
    try:
        call_command("setclash", *[str(arg) for arg in argv], stdout=stdout, stderr=stderr)
    except CommandError as exc:
        stderr.write(f"{exc}\n")
        return exc.returncode if exc.returncode in ExitCode.values else int(ExitCode.INPUT)
    return int(ExitCode.OK)
