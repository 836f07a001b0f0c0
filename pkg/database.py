import os

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, declarative_base

# SQLite database URL (creates a file called reception_runs.db)
DATABASE_URL = os.getenv("RECEPTION_DATABASE_URL", "sqlite:///./reception_runs.db")

# Create the SQLAlchemy engine
engine = create_engine(
    DATABASE_URL,
    connect_args={"check_same_thread": False} if DATABASE_URL.startswith("sqlite") else {}
)

# Create a session factory
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

# Base class for our models
Base = declarative_base()


def init_db(bind=None):
    """Create the ledger tables if they do not exist yet."""
    import models  # noqa: F401  registers the tables on Base

    Base.metadata.create_all(bind=bind or engine)
