from .replication_tasks import run_replication
