"""Primal (slope) and dual (normal-cone) non-intersection certificates.

Every variant is reduced to one working problem: closed sets
``Omega_i - c_i`` sharing the origin, asymmetric shifts ``a_i`` and the
max-gap function ``phi(max_{i<n} ||u_i - a_i - u_n||)``. The centres
``c_i`` are the common point (repeated) or the caller's base points; the
ball-augmented variants append ``B_eta(x_bar)`` as an extra last set.
Ekeland search on the working problem from the origin yields the points
``omega_i``, and the subdifferential of the max-gap function there yields
the dual vectors. All residuals are evaluated in original coordinates from
stored data only, so :func:`reverify` reproduces them exactly.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from django.core.exceptions import ValidationError

from common.checks import CheckList, equal, less_equal, strict_less
from common.choices import CheckStatus
from common.conf import get_setting, resolve
from common.exceptions import PreconditionError, UnsupportedMethodError
from core.gauges import Gauge
from core.norms import ProductNorm
from core.vectors import as_tuple, flatten
from sets.descriptors import Ball, Translate
from varcalc.ekeland import ProductDomain, ekeland_search
from varcalc.maxgap import MaxGapInstance, maxgap_subdiff
from varcalc.slopes import chain_rule_slope, local_slope, nonlocal_slope

from .choices import DualVariant, IndexMethod, PrimalVariant
from .collection import asymmetric_reduce, recentre
from .index import DEFAULT_GRID_STEP, default_method, nonintersect_index

logger = logging.getLogger(__name__)

SLOPE_DIRECTIONS = 64

PRIMAL_TAGS = {
    PrimalVariant.T12: {"pre": "T12-1", "disjoint": "P10-1", "slope": "T12-2", "bounds": "T12-3", "local": "T12-4", "chain": "T12-5"},
    PrimalVariant.T14: {"pre": "T14-1", "disjoint": "D1-3", "slope": "T14-2", "bounds": "T14-3", "local": "T14-4", "chain": "T14-5"},
    PrimalVariant.P16: {"pre": "ZN-1", "disjoint": "empty-intersection", "slope": "T12-2", "bounds": "P16-3", "local": "T12-4", "chain": "T12-5"},
    "P21": {"pre": "T12-1", "disjoint": "P10-1", "slope": "T12-2", "bounds": "P21-3", "local": "T12-4", "chain": "T12-5"},
}

DUAL_TAGS = {
    DualVariant.T17: {"norm": "T17-1", "main": "T17-2", "support": "T17-3", "window": "T17-4", "relaxed": "T17-5", "holder": "C4.5-2"},
    DualVariant.T19: {"norm": "T19-1", "main": "T19-2", "support": "T19-3", "window": "T19-4", "relaxed": "T19-5", "holder": "C4.10-2"},
    DualVariant.P21: {"norm": "T17-1", "main": "P21-4", "support": "T17-3", "window": "T17-4", "relaxed": "T17-5", "holder": "C4.5-2"},
    DualVariant.ZHNG: {"norm": "T17-1", "main": "ZN-2", "support": "T17-3", "window": "ZN-4", "relaxed": "T17-5", "holder": "C4.5-2"},
}

DUAL_LAYOUT = {
    DualVariant.T17: PrimalVariant.T12,
    DualVariant.T19: PrimalVariant.T14,
    DualVariant.P21: "P21",
    DualVariant.ZHNG: PrimalVariant.P16,
}


@dataclass
class Layout:
    """Sets in original coordinates, their centres and the working shifts."""

    kind: str
    sets: list
    centers: tuple
    shifts: tuple
    augmented: bool = False

    @property
    def count(self):
        return len(self.sets)

    @property
    def dim(self):
        return self.sets[0].dim

    def working_sets(self):
        return recentre(self.sets, self.centers)

    def original_shifts(self):
        """Shifts ``a_i + c_i - c_n`` that give the same gaps in original coordinates."""
        return asymmetric_reduce(self.shifts, self.centers)

    def shift_bound(self):
        return max(float(np.linalg.norm(a)) for a in self.shifts)


def build_layout(coll, kind, eta=None, rho=None):
    """Reduce a collection to the working problem of a certificate variant.

    Raises:
        PreconditionError: Missing common point or base points, or
            ``eta >= rho`` for the ball-augmented layout.
    """
    kind = PrimalVariant(kind) if kind != "P21" else kind
    if kind in (PrimalVariant.T12, PrimalVariant.T14):
        if coll.common_point is None:
            raise PreconditionError(f"Variant {kind} needs a common point of the sets", tag="common-point")
        xbar = coll.common_point
        if kind == PrimalVariant.T12:
            return Layout(kind, coll.sets, (xbar,) * coll.n, coll.asymmetric_shifts())
        rho = math.inf if rho is None else float(rho)
        if not eta < rho:
            raise PreconditionError(f"Ball radius eta={eta} must be below rho={rho}", tag="T14")
        sets = coll.sets + [Ball(xbar, eta)]
        return Layout(kind, sets, (xbar,) * (coll.n + 1), coll.symmetric_shifts(), augmented=True)
    if coll.base_points is None:
        raise PreconditionError(f"Variant {kind} needs base points", tag="base-points")
    points = coll.base_points
    if kind == PrimalVariant.P16:
        shifts = tuple(points[-1] - w for w in points[:-1])
    else:
        shifts = coll.asymmetric_shifts()
    return Layout(kind, coll.sets, points, shifts)


def _translated_working_sets(layout):
    working = layout.working_sets()
    return [Translate(s, a) for s, a in zip(working[:-1], layout.shifts)] + [working[-1]]


def _disjointness_threshold(method, h, dim, tol):
    if method == IndexMethod.EXACT2:
        return tol
    if method == IndexMethod.GRID:
        return h * math.sqrt(dim)
    raise UnsupportedMethodError("cyclic index values are upper bounds and cannot certify non-intersection")


def _slope_inputs(layout, shifts, gauge, norm):
    domain = ProductDomain(layout.sets)
    metric = norm.flat_distance(layout.dim)
    return MaxGapInstance(shifts).flat_function(gauge), domain.project, metric


@dataclass
class PrimalCertificate:
    variant: str
    omegas: tuple
    gap: float
    index: float
    eps_prime: float
    params: dict
    checks: CheckList
    layout: Layout
    ekeland: dict = field(default_factory=dict)

    @property
    def status(self):
        if self.checks.passed:
            return CheckStatus.PASSED
        if self.ekeland.get("budget_exhausted"):
            return CheckStatus.PARTIAL
        return CheckStatus.FAILED

    def as_dict(self):
        return {
            "kind": "primal",
            "variant": str(self.variant),
            "status": str(self.status),
            "omegas": [w.tolist() for w in self.omegas],
            "gap": self.gap,
            "index": self.index,
            "eps_prime": self.eps_prime,
            "shifts": [a.tolist() for a in self.layout.original_shifts()],
            "params": self.params,
            "residuals": self.checks.as_dict(),
            "ekeland": self.ekeland,
        }


def primal_checks(layout, omegas, gauge, eps, lam, eta, index, seed=0, slope_directions=SLOPE_DIRECTIONS, tol=None):
    """Evaluate every recorded primal inequality at ``omegas``."""
    tol = resolve(tol, "SETCLASH_TOL")
    margin = get_setting("SETCLASH_STRICT_MARGIN")
    tags = PRIMAL_TAGS[layout.kind]
    shifts = layout.original_shifts()
    norm = ProductNorm(lam, eta, layout.count)
    inst = MaxGapInstance(shifts)
    gap = inst.evaluate(omegas)
    bound = layout.shift_bound()
    checks = CheckList()
    checks.add(strict_less(tags["pre"], gauge.value(bound), gauge.value(index) + eps, margin))
    membership = max(s.dist(w) for s, w in zip(layout.sets, omegas))
    checks.add(less_equal("M-omega", membership, 0.0, tol))
    checks.add(strict_less("M-ball", norm.distance(omegas, layout.centers), 1.0, margin))
    checks.add(strict_less(f"{tags['bounds']}.lower", 0.0, gap, margin))
    checks.add(less_equal(f"{tags['bounds']}.upper", gap, bound, 1e-12))

    fn, project, metric = _slope_inputs(layout, shifts, gauge, norm)
    point = flatten(omegas)
    centre = flatten(layout.centers)
    global_slope = nonlocal_slope(
        fn, point, budget=slope_directions, seed=seed, metric=metric, project=project, extra_points=[centre]
    )
    checks.add(strict_less(tags["slope"], global_slope.value, eps, margin, note="sampled supremum"))
    slope = local_slope(fn, point, budget=slope_directions, seed=seed, metric=metric, project=project)
    checks.add(strict_less(tags["local"], slope.value, eps, margin, note="sampled"))
    if gauge.is_differentiable_at(gap):
        plain, _, _ = _slope_inputs(layout, shifts, None, norm)
        plain_slope = local_slope(plain, point, budget=slope_directions, seed=seed, metric=metric, project=project)
        lhs = chain_rule_slope(gauge, gap, plain_slope.value)
        checks.add(strict_less(tags["chain"], lhs, eps, margin, note="sampled"))
    return checks, gap


def _validate_params(eps, lam, eta):
    if not (eps > 0 and lam > 0 and eta > 0):
        raise ValidationError(f"Certificates need eps, lam, eta > 0, got {eps}, {lam}, {eta}")


def _build_primal(
    coll, kind, gauge, eps, lam, eta, rho=None, index_method=None, h=None, budget=None, seed=0,
    slope_directions=SLOPE_DIRECTIONS, tol=None,
):
    _validate_params(eps, lam, eta)
    tol = resolve(tol, "SETCLASH_TOL")
    gauge = gauge or Gauge.identity()
    layout = build_layout(coll, kind, eta=eta, rho=rho)
    tags = PRIMAL_TAGS[layout.kind]

    translated = _translated_working_sets(layout)
    method = IndexMethod(index_method) if index_method else default_method(translated)
    h = h or DEFAULT_GRID_STEP
    index = nonintersect_index(translated, method, h=h, budget=budget)
    if not index > _disjointness_threshold(method, h, layout.dim, tol):
        raise PreconditionError(
            f"Translated sets are not certified disjoint (index {index:.3e} via {method})", tag=tags["disjoint"]
        )
    bound = layout.shift_bound()
    lhs, rhs = gauge.value(bound), gauge.value(index) + eps
    if not lhs < rhs:
        raise PreconditionError(f"phi(max ||a_i||)={lhs:.6g} is not below phi(d) + eps={rhs:.6g}", tag=tags["pre"])
    eps_prime = ((lhs - gauge.value(index)) + eps) / 2.0

    norm = ProductNorm(lam, eta, layout.count)
    start = tuple(np.zeros(layout.dim) for _ in range(layout.count))
    result = ekeland_search(
        MaxGapInstance(layout.shifts).flat_function(gauge),
        layout.working_sets(),
        start,
        eps=eps_prime,
        lam=1.0,
        norm=norm,
        inf_estimate=gauge.value(index),
        budget=budget,
        seed=seed,
        tol=tol,
    )
    omegas = tuple(y + c for y, c in zip(result.point, layout.centers))
    checks, gap = primal_checks(layout, omegas, gauge, eps, lam, eta, index, seed, slope_directions, tol)
    params = {
        "eps": eps,
        "lam": lam,
        "eta": eta,
        "rho": rho,
        "gauge": gauge.to_dict(),
        "index_method": str(method),
        "seed": seed,
        "slope_directions": slope_directions,
    }
    ekeland = {
        "moves": result.iterations,
        "evaluations": result.evaluations,
        "distance_to_start": result.distance_to_start,
        **result.certificate.as_dict(),
    }
    return PrimalCertificate(layout.kind, omegas, gap, index, eps_prime, params, checks, layout, ekeland)


def primal_certificate(coll, gauge, eps, lam, eta, variant=PrimalVariant.T12, rho=None, **options):
    """Build and check a slope certificate for the non-intersection of ``coll``.

    Args:
        coll: Collection; ``T12`` and ``T14`` need a common point, ``P16``
            needs base points.
        gauge: Gauge ``phi`` (identity when None).
        eps: Slack of the gauge precondition and of the slope bounds.
        lam: Radius for the first ``n - 1`` points (``n`` for ``T14``).
        eta: Radius for the last point (the ball point for ``T14``).
        variant: ``T12``, ``T14`` (needs ``rho > eta``) or ``P16``.
        rho: Localization radius of ``T14``; infinite when None.
        **options: ``index_method``, ``h``, ``budget``, ``seed``,
            ``slope_directions`` and ``tol``.

    Returns:
        PrimalCertificate with named residuals.

    Raises:
        PreconditionError: Sets not certified disjoint after translation, or
            the gauge precondition fails; the tag names the inequality.
    """
    certificate = _build_primal(coll, PrimalVariant(variant), gauge, eps, lam, eta, rho=rho, **options)
    logger.info(
        f"Primal certificate {certificate.variant}: status {certificate.status}, gap {certificate.gap:.6g}, "
        f"index {certificate.index:.6g}"
    )
    return certificate


@dataclass
class DualCertificate:
    variant: str
    omegas: tuple
    duals: tuple
    gap: float
    tau: float
    checks: CheckList
    primal: PrimalCertificate
    holder: dict = None

    @property
    def status(self):
        if self.checks.passed:
            return CheckStatus.PASSED
        if self.primal.ekeland.get("budget_exhausted"):
            return CheckStatus.PARTIAL
        return CheckStatus.FAILED

    def as_dict(self):
        return {
            "kind": "dual",
            "variant": str(self.variant),
            "status": str(self.status),
            "omegas": [w.tolist() for w in self.omegas],
            "duals": [x.tolist() for x in self.duals],
            "gap": self.gap,
            "tau": self.tau,
            "holder": self.holder,
            "residuals": self.checks.as_dict(),
            "primal": self.primal.as_dict(),
        }


def dual_checks(variant, layout, omegas, duals, gauge, eps, lam, eta, tau, index, holder=None, tol=None):
    """Evaluate every recorded dual inequality for ``duals`` at ``omegas``."""
    tol = resolve(tol, "SETCLASH_TOL")
    margin = get_setting("SETCLASH_STRICT_MARGIN")
    tags = DUAL_TAGS[variant]
    shifts = layout.original_shifts()
    gaps = [omegas[-1] + a - w for a, w in zip(shifts, omegas[:-1])]
    gap = max(float(np.linalg.norm(g)) for g in gaps)
    leading = duals[:-1]
    checks = CheckList()
    if not layout.augmented:
        checks.add(equal(f"{tags['norm']}.sum", float(np.linalg.norm(np.sum(duals, axis=0))), 0.0, 1e-12))
    checks.add(equal(f"{tags['norm']}.norm", sum(float(np.linalg.norm(x)) for x in leading), 1.0, 1e-12))

    cone_gaps = [s.normal_cone_dist(w, x, tol) for s, w, x in zip(layout.sets[:-1], omegas[:-1], leading)]
    if layout.augmented:
        last_term = float(np.linalg.norm(np.sum(leading, axis=0)))
    else:
        last_term = layout.sets[-1].normal_cone_dist(omegas[-1], duals[-1], tol)
    weighted = lam * sum(cone_gaps) + eta * last_term
    checks.add(strict_less(tags["main"], gauge.derivative(gap) * weighted, eps, margin))
    if holder is not None:
        factor = holder["q"] * gap ** (holder["q"] - 1.0)
        checks.add(strict_less(tags["holder"], factor * weighted, holder["alpha"] * eps, margin))

    pairing = float(sum(np.dot(x, g) for x, g in zip(leading, gaps)))
    checks.add(equal(tags["support"], pairing, gap, tol))
    checks.add(strict_less(tags["window"], gap, gauge.inverse(gauge.value(index) + eps), margin))
    checks.add(strict_less(tags["relaxed"], tau * gap, pairing, margin))
    return checks, gap


def _build_dual(coll, variant, gauge, eps, lam, eta, tau, rho=None, weights=None, holder=None, **options):
    variant = DualVariant(variant)
    if not 0 < tau < 1:
        raise ValidationError(f"tau must lie in (0, 1), got {tau}")
    gauge = gauge or Gauge.identity()
    primal = _build_primal(coll, DUAL_LAYOUT[variant], gauge, eps, lam, eta, rho=rho, **options)
    layout = primal.layout
    inst = MaxGapInstance(layout.original_shifts())
    subgradient = maxgap_subdiff(inst, primal.omegas, weights)
    duals = tuple(-x for x in subgradient)
    tol = resolve(options.get("tol"), "SETCLASH_TOL")
    checks, gap = dual_checks(
        variant, layout, primal.omegas, duals, gauge, eps, lam, eta, tau, primal.index, holder, tol
    )
    for check in primal.checks:
        if check.tag in ("M-omega", "M-ball") or check.tag.startswith(PRIMAL_TAGS[layout.kind]["bounds"]):
            checks.add(check)
    certificate = DualCertificate(variant, primal.omegas, duals, gap, tau, checks, primal, holder)
    for failure in checks.failures():
        logger.warning(f"{failure.tag} violated, residual={failure.residual:.3e}")
    logger.info(f"Dual certificate {variant}: status {certificate.status}, gap {gap:.6g}")
    return certificate


def dual_certificate(coll, gauge, eps, lam, eta, tau=0.99, variant=DualVariant.T17, rho=None, weights=None, **options):
    """Build and check a dual (generalized separation) certificate.

    The primal certificate of the matching layout supplies ``omega``; the
    dual vectors are the negated max-gap subgradient there (uniform weights
    over active gaps unless ``weights`` are given).

    Raises:
        ValidationError: ``tau`` outside ``(0, 1)`` or invalid weights.
        PreconditionError: As for :func:`primal_certificate`.
    """
    return _build_dual(coll, variant, gauge, eps, lam, eta, tau, rho=rho, weights=weights, **options)


def holder_certificate(coll, q, alpha, eps, lam, eta, tau=0.99, variant=DualVariant.T17, rho=None, **options):
    """Dual certificate for ``phi(t) = t**q / alpha`` with the Hölder residual
    ``q gap**(q-1) * (weighted cone distances) < alpha * eps``."""
    gauge = Gauge.holder(q, alpha)
    return _build_dual(
        coll, variant, gauge, eps, lam, eta, tau, rho=rho, holder={"q": float(q), "alpha": float(alpha)}, **options
    )


def reverify(certificate, collection=None):
    """Recompute every residual of ``certificate`` from its stored points.

    When ``collection`` is given the sets are rebuilt from it rather than
    taken from the certificate.

    Returns:
        The recomputed CheckList.
    """
    primal = certificate.primal if isinstance(certificate, DualCertificate) else certificate
    layout = primal.layout
    if collection is not None:
        layout = build_layout(collection, layout.kind, eta=primal.params["eta"], rho=primal.params["rho"])
    params = primal.params
    gauge = Gauge.from_dict(params["gauge"])
    omegas = as_tuple(primal.omegas)
    if isinstance(certificate, DualCertificate):
        checks, _ = dual_checks(
            certificate.variant, layout, omegas, certificate.duals, gauge, params["eps"], params["lam"],
            params["eta"], certificate.tau, primal.index, certificate.holder,
        )
        for check in primal_checks(
            layout, omegas, gauge, params["eps"], params["lam"], params["eta"], primal.index,
            params["seed"], params["slope_directions"],
        )[0]:
            if check.tag in certificate.checks and check.tag not in checks:
                checks.add(check)
        return checks
    checks, _ = primal_checks(
        layout, omegas, gauge, params["eps"], params["lam"], params["eta"], primal.index,
        params["seed"], params["slope_directions"],
    )
    return checks
