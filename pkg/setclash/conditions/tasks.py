from celery import shared_task
import logging

from sets.sampling import Region

from .collection import Collection
from .probe import probe_at_epsilon

logger = logging.getLogger(__name__)


@shared_task
def probe_epsilon(payload):
    """One ``eps`` of the stationarity probe, from a JSON payload."""
    coll = Collection.from_dict(payload["collection"])
    logger.info(f"Probing eps={payload['eps']} on {coll.n} sets")
    return probe_at_epsilon(
        coll,
        payload["eps"],
        Region.from_dict(payload["region"]),
        payload["h"],
        payload["rho"],
        directions=payload.get("directions", 8),
        samples=payload.get("samples", 4),
        seed=payload.get("seed", 0),
    )
