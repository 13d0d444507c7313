from django.db import models


class Subcommand(models.TextChoices):
    AP = "ap", "Alternating projections trace"
    INDEX = "index", "Nonintersect index"
    PRIMAL = "primal", "Primal slope certificate"
    DUAL = "dual", "Dual separation certificate"
    HOLDER = "holder", "Hölder dual certificate"
    PROBE = "probe", "Stationarity probe"
    DELTA = "delta", "Pair condition estimate"
    DEMO = "demo", "Builtin demo"


class Demo(models.TextChoices):
    EXAMPLE_5_5 = "example-5.5", "Halfplane and absolute-value epigraph"
    TWO_LINES = "two-lines", "Two lines at pi/6"


class ExitCode(models.IntegerChoices):
    OK = 0, "All checks passed"
    VERIFY_FAILED = 2, "A verification inequality failed"
    PRECONDITION = 3, "A precondition failed"
    INPUT = 4, "Input or schema error"
