from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from grafl.config import get_settings

Base = declarative_base()


def make_engine(url: str) -> Engine:
    # Registry access stays on the main thread; the flag only lifts sqlite3's same-thread check for pooled connections.
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    return create_engine(url, echo=False, future=True, connect_args=connect_args)


def init_db(engine: Engine) -> None:
    """Create tables if not present."""
    from grafl.db import models  # noqa: F401  (registers the tables)

    Base.metadata.create_all(bind=engine)


def open_session(url: Optional[str] = None) -> Optional[Session]:
    """Session on the run registry, or None when no registry URL is configured."""
    url = url if url is not None else get_settings().DB_URL
    if not url:
        return None
    engine = make_engine(url)
    init_db(engine)
    factory = sessionmaker(bind=engine, autoflush=False, autocommit=False, expire_on_commit=False, future=True)
    return factory()
