"""Dual certificate for a translated pair ``(A - u, B)`` with a Hölder gauge."""

from dataclasses import dataclass
import logging

import numpy as np

from common.checks import CheckList, strict_less
from common.choices import CheckStatus
from common.conf import get_setting, resolve
from conditions.certificates import holder_certificate
from conditions.choices import DualVariant
from conditions.collection import Collection

logger = logging.getLogger(__name__)


@dataclass
class TwoSetCertificate:
    a: np.ndarray
    b: np.ndarray
    gap: float
    checks: CheckList
    dual: object

    @property
    def status(self):
        if not self.checks.passed:
            return CheckStatus.FAILED
        return self.dual.status

    def as_dict(self):
        return {
            "status": str(self.status),
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "gap": self.gap,
            "residuals": self.checks.as_dict(),
            "dual": self.dual.as_dict(),
        }


def two_set_certificate(a_set, b_set, xbar, u, eps, q, lam, eta, tau=0.99, tol=None, **options):
    """Points ``a`` in A near ``xbar`` and ``b`` in B near ``xbar`` with a short
    translated gap ``g = b - a + u`` and small normal-cone deviations.

    Records ``0 < ||g||``, ``||g||^q < d^q(A - u, B) + eps`` and
    ``q ||g||^(q-2) (lam d(g, N_A(a)) + eta d(-g, N_B(b))) < eps``.

    Raises:
        PreconditionError: ``(A - u)`` meets B, or ``||u||^q`` is not below
            ``d^q(A - u, B) + eps``; the tag names the failed condition.
    """
    tol = resolve(tol, "SETCLASH_TOL")
    margin = get_setting("SETCLASH_STRICT_MARGIN")
    coll = Collection([a_set, b_set], shifts=[u], common_point=xbar)
    dual = holder_certificate(coll, q, 1.0, eps, lam, eta, tau=tau, variant=DualVariant.T17, tol=tol, **options)
    a, b = dual.omegas
    g = b - a + coll.shifts[0]
    gap = float(np.linalg.norm(g))
    dist = dual.primal.index
    checks = CheckList()
    checks.add(strict_less("P5.1-2.lower", 0.0, gap, margin))
    checks.add(strict_less("P5.1-2.upper", gap**q, dist**q + eps, margin))
    deviation = lam * a_set.normal_cone_dist(a, g, tol) + eta * b_set.normal_cone_dist(b, -g, tol)
    checks.add(strict_less("P5.1-3", q * gap ** (q - 2.0) * deviation, eps, margin))
    certificate = TwoSetCertificate(a, b, gap, checks, dual)
    logger.info(f"Two-set certificate: status {certificate.status}, gap {gap:.6g}")
    return certificate
