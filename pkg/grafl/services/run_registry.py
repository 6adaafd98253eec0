from __future__ import annotations

from typing import Optional, Tuple

import structlog
from sqlalchemy import select
from sqlalchemy.exc import IntegrityError
from sqlalchemy.orm import Session

from grafl.db.models import Run
from grafl.schemas.manifest import RunManifest

log = structlog.get_logger()


def record_run(db: Session, manifest: RunManifest) -> Tuple[Run, bool]:
    """
    Persist a run; recording the same run_id again returns the stored row
    instead (idempotent behaviour).

    Returns:
        (run_obj, created_bool)
    """
    run = Run(
        run_id=manifest.run_id,
        command=manifest.command,
        fingerprint=manifest.fingerprint(),
        seed=manifest.seed,
        total_seconds=manifest.total_seconds,
        created_at=manifest.created_at.replace(tzinfo=None),
    )
    run.manifest = manifest.model_dump(mode="json")

    db.add(run)
    try:
        db.commit()
        db.refresh(run)
    except IntegrityError:
        # Unique constraint hit: fetch the existing row and return it
        db.rollback()
        stmt = select(Run).where(Run.run_id == manifest.run_id).limit(1)
        existing = db.execute(stmt).scalar_one_or_none()
        if existing:
            log.info("run_duplicate_returning_existing", run_id=existing.run_id)
            return existing, False
        raise

    log.info("run_recorded", run_id=run.run_id, command=run.command)
    return run, True


def list_runs(db: Session, command: Optional[str] = None, limit: int = 20) -> list[Run]:
    """Most recent runs first."""
    stmt = select(Run)
    if command:
        stmt = stmt.where(Run.command == command)
    stmt = stmt.order_by(Run.created_at.desc(), Run.id.desc()).limit(limit)
    return list(db.execute(stmt).scalars())


def runs_with_fingerprint(db: Session, fingerprint: str) -> list[Run]:
    stmt = select(Run).where(Run.fingerprint == fingerprint).order_by(Run.id)
    return list(db.execute(stmt).scalars())
