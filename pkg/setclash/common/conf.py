from django.conf import settings

DEFAULTS = {
    "SETCLASH_OUT": "reports",
    "SETCLASH_TOL": 1e-9,
    "SETCLASH_STRICT_MARGIN": 1e-12,
    "SETCLASH_SLOPE_RADII": [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
    "SETCLASH_SLOPE_DIRECTIONS": 512,
    "SETCLASH_EKELAND_BUDGET": 10000,
    "SETCLASH_AP_MAX_ITER": 1000,
    "SETCLASH_PROBE_ASYNC": False,
}


def get_setting(name):
    """Read a SETCLASH_* setting, falling back to the library default."""
    return getattr(settings, name, DEFAULTS[name])


def resolve(value, name):
    """Return ``value`` unless it is None, in which case read ``name``."""
    return get_setting(name) if value is None else value
