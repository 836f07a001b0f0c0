#!/usr/bin/env python3
"""
System health check script.
Verifies environment, libraries, run ledger, broker and a configuration.
"""
import os
import sys
from dotenv import load_dotenv

load_dotenv()

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

ENV_VARS = (
    "RECEPTION_SEED",
    "RECEPTION_LOG_LEVEL",
    "RECEPTION_LOG_FILE",
    "RECEPTION_DATABASE_URL",
    "RECEPTION_BROKER_URL",
    "RECEPTION_RESULT_BACKEND",
    "RECEPTION_TASK_TIME_LIMIT",
    "RECEPTION_CELERY_EAGER",
    "RECEPTION_MAX_STATES",
)
LIBRARIES = ("numpy", "scipy", "pydantic", "sqlalchemy", "celery", "redis", "dotenv")


def check_environment():
    print("Checking environment variables...")
    for name in ENV_VARS:
        value = os.getenv(name)
        if value:
            print(f"  ✓ {name} = {value}")
        else:
            print(f"  - {name} not set (default used)")
    print()


def check_libraries():
    print("Checking libraries...")
    import importlib

    missing = []
    for name in LIBRARIES:
        try:
            module = importlib.import_module(name)
            print(f"  ✓ {name} {getattr(module, '__version__', '')}".rstrip())
        except ImportError:
            missing.append(name)
            print(f"  ✗ {name} is NOT installed")
    print()
    return not missing


def check_database():
    print("Checking run ledger...")
    from sqlalchemy import inspect
    from database import SessionLocal, engine, init_db
    from models import RunRecord

    try:
        init_db()
        tables = inspect(engine).get_table_names()
        print(f"  ✓ Database tables: {', '.join(tables)}")

        db = SessionLocal()
        try:
            runs = db.query(RunRecord).order_by(RunRecord.id.desc()).limit(5).all()
            print(f"  ✓ Recent runs: {len(runs)}")
            for run in runs:
                print(f"    - #{run.id} {run.command} seed={run.seed} passed={run.passed}")
        finally:
            db.close()
        print("  ✓ Database connection successful")
        return True
    except Exception as e:
        print(f"  ✗ Database error: {str(e)}")
        return False
    finally:
        print()


def check_broker():
    print("Checking Celery broker...")
    import socket
    from urllib.parse import urlparse
    from celery_app.celery_config import broker_url

    if os.getenv("RECEPTION_CELERY_EAGER") == "1":
        print("  ✓ Eager mode: replications run in-process")
        print()
        return True

    target = urlparse(broker_url)
    host, port = target.hostname or "localhost", target.port or 6379
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.settimeout(1.0)
        reachable = s.connect_ex((host, port)) == 0
    if reachable:
        print(f"  ✓ Broker reachable at {host}:{port}")
    else:
        print(f"  ✗ Broker NOT reachable at {host}:{port} (only --backend celery needs it)")
    print()
    return reachable


def check_config(path):
    print(f"Checking configuration {path}...")
    from reception.dosage import dose_interval
    from reception.params import load_params_file
    from reception.queue import build_chain
    from utils.errors import ReceptionError

    try:
        params = load_params_file(path)
        chain = build_chain(params)
        print(f"  ✓ lambda={chain.lam:.6g}/s gamma={chain.gamma:.6g}/s Nm={chain.Nm}")
        bounds = dose_interval(params)
        print(f"  ✓ dose interval [{bounds.q_min_rate:.6g}, {bounds.q_max_rate:.6g}]/s: {bounds.verdict}")
        return True
    except ReceptionError as e:
        print(f"  ✗ {e.detail}")
        return False
    finally:
        print()


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    print("=" * 60)
    print("Reception System Health Check")
    print("=" * 60)
    print()

    check_environment()
    healthy = check_libraries()
    healthy = check_database() and healthy
    check_broker()
    if argv:
        healthy = check_config(argv[0]) and healthy

    print("=" * 60)
    print("Health check complete!" if healthy else "Health check found problems")
    print("=" * 60)
    return 0 if healthy else 1


if __name__ == "__main__":
    sys.exit(main())
