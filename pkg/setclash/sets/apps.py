from django.apps import AppConfig


class SetsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sets'
    verbose_name = 'Closed set descriptors'
