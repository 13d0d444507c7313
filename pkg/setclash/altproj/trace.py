"""Alternating projections ``x_{2n-1} = P_B(x_{2n-2})``, ``x_{2n} = P_A(x_{2n-1})``."""

from dataclasses import dataclass, field
import logging

import numpy as np

from common.conf import resolve
from core.vectors import as_vector

from .choices import TraceSet, TraceStatus

logger = logging.getLogger(__name__)


@dataclass
class APTrace:
    """Iterates of one alternating projections run.

    ``labels[k]`` names the set ``x_k`` was projected onto; ``x_0`` is
    labelled ``x0``.
    """

    a_set: object
    b_set: object
    iterates: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    status: str = TraceStatus.RUNNING

    def __len__(self):
        return len(self.iterates)

    @property
    def step_norms(self):
        """``[||x_1 - x_0||, ||x_2 - x_1||, ...]``; entry ``k - 1`` belongs to ``x_k``."""
        return [float(np.linalg.norm(b - a)) for a, b in zip(self.iterates, self.iterates[1:])]

    @property
    def last(self):
        return self.iterates[-1]

    def cycles(self):
        """Yield ``(n, s_in, s_out)`` with ``s_in = ||x_{2n-1} - x_{2n-2}||`` and ``s_out = ||x_{2n} - x_{2n-1}||``."""
        steps = self.step_norms
        for n in range(1, len(steps) // 2 + 1):
            yield n, steps[2 * n - 2], steps[2 * n - 1]

    def is_monotone(self, tol=1e-9):
        """Step norms never grow, from the second step on (from the first when ``x_0`` is in A)."""
        steps = self.step_norms
        first = 1 if self.a_set.contains(self.iterates[0], tol) else 2
        return all(steps[k] <= steps[k - 1] + tol for k in range(max(first, 1), len(steps)))

    def residuals_normal(self, tol=1e-9):
        """Largest distance of ``x_{k-1} - x_k`` from the normal cone at ``x_k``."""
        worst = 0.0
        for k in range(1, len(self.iterates)):
            target = self.b_set if self.labels[k] == TraceSet.B else self.a_set
            v = self.iterates[k - 1] - self.iterates[k]
            worst = max(worst, target.normal_cone_dist(self.iterates[k], v, tol))
        return worst


def run_ap(a_set, b_set, x0, max_iter=None, tol=None):
    """Alternate projections onto ``b_set`` and ``a_set`` starting from ``x0``.

    The run stops at a fixed point (status ``converged-to-intersection``),
    when the next projection returns to ``x_{k-1}`` within ``tol`` times the
    last step (a two-cycle: status ``distance-attained``), or after
    ``max_iter`` projections. The returning projection is not appended.
    """
    max_iter = resolve(max_iter, "SETCLASH_AP_MAX_ITER")
    tol = resolve(tol, "SETCLASH_TOL")
    x = as_vector(x0, a_set.dim)
    trace = APTrace(a_set, b_set, [x], [TraceSet.START])
    for k in range(1, max_iter + 1):
        onto, label = (b_set, TraceSet.B) if k % 2 else (a_set, TraceSet.A)
        y = onto.project(x)
        if float(np.linalg.norm(y - x)) <= tol:
            trace.iterates.append(y)
            trace.labels.append(label)
            trace.status = TraceStatus.CONVERGED
            break
        if len(trace) >= 2:
            step = float(np.linalg.norm(x - trace.iterates[-2]))
            # Returning to x_{k-1} relative to the step length.
            if float(np.linalg.norm(y - trace.iterates[-2])) <= tol * step:
                trace.status = TraceStatus.DISTANCE_ATTAINED if step > tol else TraceStatus.CONVERGED
                break
        trace.iterates.append(y)
        trace.labels.append(label)
        logger.debug(f"AP iterate {k} on {label}: step {float(np.linalg.norm(y - x)):.3e}")
        x = y
    else:
        trace.status = TraceStatus.MAX_ITER
        logger.warning(f"Alternating projections stopped after {max_iter} projections")
    logger.info(f"Alternating projections: {len(trace) - 1} projections, status {trace.status}")
    return trace
