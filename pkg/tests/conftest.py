import json

import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from database import init_db
from reception.params import params_from_mapping
from reception.queue import ChainSpec

REFERENCE = {
    "D_um2_per_s": 100,
    "R_um": 10,
    "Q": 1e8,
    "dt_s": 1e-4,
    "mu_per_s": 1000,
    "Kplus": 0.5,
    "Nr": 400,
    "Rr_nm": 2,
    "Re_nm": 2.3,
    "Ra_nm": 0.01,
    "alpha": 0.3,
    "f": 0.2,
}


@pytest.fixture
def reference_config():
    return dict(REFERENCE)


@pytest.fixture
def reference():
    return params_from_mapping(REFERENCE)


@pytest.fixture
def write_config(tmp_path):
    """Write a config (reference set plus overrides) and return its path as a string."""

    def _write(name="config.json", **overrides):
        path = tmp_path / name
        path.write_text(json.dumps({**REFERENCE, **overrides}))
        return str(path)

    return _write


@pytest.fixture
def single_receptor():
    # M/M/1/1 with lambda=2, mu=1
    return ChainSpec.from_rates(2.0, 1.0, Nr=1, Nm=1)


@pytest.fixture
def three_state():
    # Nr=1, Nm=2, lambda=mu=1
    return ChainSpec.from_rates(1.0, 1.0, Nr=1, Nm=2)


@pytest.fixture
def eager_celery():
    from celery_app import celery_app

    previous = celery_app.conf.task_always_eager
    celery_app.conf.task_always_eager = True
    yield celery_app
    celery_app.conf.task_always_eager = previous


@pytest.fixture
def ledger():
    """Session factory bound to a fresh in-memory run ledger."""
    engine = create_engine(
        "sqlite://",
        connect_args={"check_same_thread": False},
        poolclass=StaticPool,
    )
    init_db(bind=engine)
    yield sessionmaker(autocommit=False, autoflush=False, bind=engine)
    engine.dispose()
