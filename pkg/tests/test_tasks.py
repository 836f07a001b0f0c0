import pytest
from celery.exceptions import TimeoutError as CeleryTimeoutError

from celery_app.tasks import run_replication
from schemas import ReplicationSummary, SimConfig
from simulation.ctmc_sim import RESULT_WAIT_MARGIN, simulate, simulate_replication
from utils.errors import BackendError, DomainError


def test_task_returns_replication_summary(eager_celery, three_state):
    payload = three_state.as_payload()
    result = run_replication.apply_async(args=[payload, 4, 2, 5_000, 500]).get()
    summary = ReplicationSummary.model_validate(result)
    local = simulate_replication(payload, 4, 2, 5_000, 500)
    assert summary.occupancy == local.occupancy
    assert summary.counts == local.counts
    assert summary.index == 2


def test_task_does_not_retry_domain_errors(eager_celery):
    payload = {"lam": 1.0, "mu": 0.0, "gamma": 0.0, "Nr": 1, "Nm": 2}
    with pytest.raises(DomainError, match="absorbing"):
        run_replication.apply_async(args=[payload, 0, 0, 100, 10]).get()


def test_task_uses_json_serialization():
    from celery_app import celery_app

    assert celery_app.conf.task_serializer == "json"
    assert celery_app.conf.result_serializer == "json"
    assert celery_app.conf.worker_prefetch_multiplier == 1


class UnansweredResult:
    def __init__(self):
        self.timeouts = []

    def get(self, timeout=None):
        self.timeouts.append(timeout)
        raise CeleryTimeoutError("no result")


def test_missing_worker_is_reported(monkeypatch, three_state):
    from celery_app import celery_app

    pending = UnansweredResult()
    monkeypatch.setattr(run_replication, "apply_async", lambda *args, **kwargs: pending)
    config = SimConfig(chain=three_state, max_events=1_000, seed=0, replications=2)
    with pytest.raises(BackendError, match="Celery worker") as excinfo:
        simulate(config, backend="celery")
    assert excinfo.value.exit_code == 2
    assert pending.timeouts == [celery_app.conf.task_time_limit + RESULT_WAIT_MARGIN]
