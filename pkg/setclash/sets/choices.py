from django.db import models


class SetVariant(models.TextChoices):
    HALFSPACE = "halfspace", "Halfspace"
    HYPERPLANE = "hyperplane", "Hyperplane"
    AFFINE = "affine", "Affine subspace"
    BALL = "ball", "Closed ball"
    BOX = "box", "Box"
    POLYTOPE = "polytope", "Polytope"
    ABS_EPIGRAPH = "abs_epigraph", "Epigraph of |u| + shift"
    POINTS = "points", "Finite point set"
    TRANSLATE = "translate", "Translate"
    BALL_RESTRICTION = "ball_restriction", "Ball restriction"
