"""Builtin scenarios runnable as ``setclash demo <name>``."""

import math

from django.core.exceptions import ValidationError

from .choices import Demo
from .schemas import Scenario

THETA = math.pi / 6

DEMOS = {
    # Halfplane v <= 0 against the epigraph v >= |u| + 1; d(A, B) = 1.
    Demo.EXAMPLE_5_5: {
        "name": "example-5.5",
        "sets": [
            {"type": "halfspace", "normal": [0.0, 1.0], "offset": 0.0},
            {"type": "abs_epigraph", "shift": 1.0},
        ],
        "params": {"x0": [2.0, 0.0]},
    },
    Demo.TWO_LINES: {
        "name": "two-lines",
        "sets": [
            {"type": "affine", "point": [0.0, 0.0], "basis": [[1.0, 0.0]]},
            {"type": "affine", "point": [0.0, 0.0], "basis": [[math.cos(THETA), math.sin(THETA)]]},
        ],
        "params": {"x0": [1.0, 0.0], "q": 1.0, "delta": math.sin(THETA / 2)},
    },
}


def demo_scenario(name):
    """The builtin scenario called ``name``.

    Raises:
        ValidationError: Unknown demo.
    """
    try:
        demo = Demo(name)
    except ValueError as exc:
        raise ValidationError(f"Unknown demo {name!r}; choose from {', '.join(Demo.values)}") from exc
    return Scenario.model_validate(DEMOS[demo])
