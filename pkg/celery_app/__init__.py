import os

from celery import Celery

from celery_app import celery_config

# Create Celery instance with broker URL
celery_app = Celery(
    "reception",
    broker=celery_config.broker_url,
    backend=celery_config.result_backend,
)

celery_app.config_from_object(celery_config)

# Run tasks in-process when no worker pool is available
celery_app.conf.task_always_eager = os.getenv("RECEPTION_CELERY_EAGER", "0") == "1"
celery_app.conf.task_eager_propagates = True

# Auto-discover tasks in tasks package
celery_app.autodiscover_tasks(["celery_app.tasks"])
