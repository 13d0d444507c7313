from django.apps import AppConfig


class AltprojConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'altproj'
    verbose_name = 'Alternating projections and convergence checks'
