from datetime import datetime, timezone

from sqlalchemy import Column, Integer, String, Boolean, Float, DateTime, JSON
from database import Base


def _utcnow():
    return datetime.now(timezone.utc)


class RunRecord(Base):
    """SQLAlchemy model for the simulate/validate run ledger."""

    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)

    command = Column(String(20), nullable=False, index=True)
    # "simulate", "validate"

    seed = Column(String(20), nullable=False)
    # stored as text: seeds span the full unsigned 64-bit range

    replications = Column(Integer, nullable=False)
    events = Column(Integer, nullable=False)
    states = Column(Integer, nullable=False)

    tv_distance = Column(Float, nullable=True)
    passed = Column(Boolean, nullable=True)
    # only set for "validate"

    report = Column(JSON, nullable=True)

    created_at = Column(DateTime, default=_utcnow, nullable=False)
