# Celery settings for distributed simulation replications
import os

broker_url = os.getenv("RECEPTION_BROKER_URL", "redis://localhost:6379/0")
result_backend = os.getenv("RECEPTION_RESULT_BACKEND", broker_url)

# Replication summaries travel as plain JSON dicts
task_serializer = "json"
result_serializer = "json"
accept_content = ["json"]

timezone = "UTC"
enable_utc = True

# One long replication per task; workers take one at a time
task_track_started = True
task_time_limit = int(os.getenv("RECEPTION_TASK_TIME_LIMIT", "3600"))
worker_prefetch_multiplier = 1
result_expires = 24 * 3600

# Replications are seeded and idempotent
task_acks_late = True
task_reject_on_worker_lost = True
