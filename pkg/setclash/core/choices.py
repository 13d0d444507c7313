from django.db import models


class GaugeKind(models.TextChoices):
    IDENTITY = "identity", "Identity"
    HOLDER = "holder", "Hölder"
    CUSTOM = "custom", "Custom"
