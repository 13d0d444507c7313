"""JSON forms of set descriptors."""

from django.core.exceptions import ValidationError

from .choices import SetVariant
from .descriptors import (
    AbsEpigraph,
    AffineSubspace,
    Ball,
    BallRestriction,
    Box,
    FinitePointSet,
    Halfspace,
    Hyperplane,
    Polytope,
    Translate,
)


def descriptor_from_dict(data):
    """Build a descriptor from its ``to_dict`` form.

    Raises:
        ValidationError: Unknown type or missing fields.
    """
    try:
        variant = SetVariant(data["type"])
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"Unknown set type in {data!r}") from exc
    try:
        if variant == SetVariant.HALFSPACE:
            return Halfspace(data["normal"], data["offset"])
        if variant == SetVariant.HYPERPLANE:
            return Hyperplane(data["normal"], data["offset"])
        if variant == SetVariant.AFFINE:
            return AffineSubspace(data["point"], data.get("basis", []))
        if variant == SetVariant.BALL:
            return Ball(data["center"], data["radius"])
        if variant == SetVariant.BOX:
            return Box(data["lo"], data["hi"])
        if variant == SetVariant.POLYTOPE:
            return Polytope([Halfspace(h["normal"], h["offset"]) for h in data["halfspaces"]])
        if variant == SetVariant.ABS_EPIGRAPH:
            return AbsEpigraph(data.get("shift", 0.0))
        if variant == SetVariant.POINTS:
            return FinitePointSet(data["points"])
        if variant == SetVariant.TRANSLATE:
            return Translate(descriptor_from_dict(data["inner"]), data["by"])
        return BallRestriction(descriptor_from_dict(data["inner"]), data["center"], data["radius"])
    except KeyError as exc:
        raise ValidationError(f"Set of type {variant} is missing field {exc}") from exc


def descriptor_to_dict(descriptor):
    return descriptor.to_dict()
