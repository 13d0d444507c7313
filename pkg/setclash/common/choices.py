from django.db import models


class Relation(models.TextChoices):
    LESS = "<", "Strictly less"
    LESS_EQUAL = "<=", "Less or equal"
    EQUAL = "==", "Equal within tolerance"


class CheckStatus(models.TextChoices):
    PASSED = "passed", "Passed"
    FAILED = "failed", "Failed"
    PARTIAL = "partial", "Partial"
