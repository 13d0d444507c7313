from django.apps import AppConfig


class VarcalcConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'varcalc'
    verbose_name = 'Max-gap function, slopes and Ekeland search'
