from django.db import models


class TraceStatus(models.TextChoices):
    RUNNING = "running", "Running"
    DISTANCE_ATTAINED = "distance-attained", "Distance attained"
    CONVERGED = "converged-to-intersection", "Converged to the intersection"
    MAX_ITER = "max-iter", "Iteration cap reached"


class TraceSet(models.TextChoices):
    START = "x0", "Starting point"
    A = "A", "First set"
    B = "B", "Second set"


class TerminationKind(models.TextChoices):
    FINITE_ATTAINMENT = "finite-attainment", "Distance attained at a finite step"
    VANISHING_STEPS = "vanishing-steps", "Step norms tend to zero"
    UNDETERMINED = "undetermined", "Undetermined"
