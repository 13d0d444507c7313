from django.db import models


class IndexMethod(models.TextChoices):
    EXACT2 = "exact2", "Alternating projections to a fixed point (two convex sets)"
    GRID = "grid", "Lattice oracle"
    CYCLIC = "cyclic", "Block-coordinate descent (upper bound)"


class GridOutcome(models.TextChoices):
    CERTIFIED_DISJOINT = "certified-disjoint", "Certified disjoint"
    WITNESS = "intersection-witness", "Intersection witness"
    INCONCLUSIVE = "inconclusive", "Inconclusive"


class PrimalVariant(models.TextChoices):
    T12 = "T12", "Common point, asymmetric shifts"
    T14 = "T14", "Common point, ball-augmented"
    P16 = "P16", "Recentred at base points"


class DualVariant(models.TextChoices):
    T17 = "T17", "Common point, asymmetric shifts"
    T19 = "T19", "Common point, ball-augmented"
    P21 = "P21", "Base points with shifts"
    ZHNG = "ZhNg", "Base points, empty intersection"


class ExtremalProperty(models.TextChoices):
    EXTREMAL = "extremal", "Extremal"
    LOCALLY_EXTREMAL = "locally-extremal", "Locally extremal"
    STATIONARY = "stationary", "Stationary"
    APPROXIMATELY_STATIONARY = "approximately-stationary", "Approximately stationary"
