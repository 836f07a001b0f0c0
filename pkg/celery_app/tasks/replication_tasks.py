import logging
from typing import Optional

from celery_app import celery_app
from simulation.ctmc_sim import simulate_replication
from utils.errors import ReceptionError

logger = logging.getLogger(__name__)


@celery_app.task(bind=True, max_retries=3)
def run_replication(
    self,
    payload: dict,
    seed: int,
    index: int,
    max_events: int,
    warmup_events: int,
    trajectory_path: Optional[str] = None,
):
    """Simulate replication `index` of the chain in `payload` and return its summary."""
    logger.info(f"Starting replication {index} (seed={seed}, events={max_events})")
    try:
        summary = simulate_replication(payload, seed, index, max_events, warmup_events, trajectory_path)
    except ReceptionError:
        # the same inputs would fail again
        raise
    except Exception as e:
        logger.error(f"Error in replication {index}: {str(e)}")
        raise self.retry(exc=e, countdown=10)

    logger.info(f"Replication {index} complete: final state {summary.final_state}")
    return summary.model_dump()
