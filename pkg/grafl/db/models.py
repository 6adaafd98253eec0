from datetime import datetime
import json

from sqlalchemy import Column, DateTime, Float, Integer, String, Text

from grafl.db.session import Base


class Run(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    created_at = Column(DateTime, nullable=False, default=datetime.utcnow)

    # Idempotency key: one row per run
    run_id = Column(String(64), nullable=False, unique=True)
    command = Column(String(32), nullable=False, index=True)
    # sha256 over command, config, inputs and seed; equal runs share it
    fingerprint = Column(String(64), nullable=False, index=True)
    seed = Column(Integer, nullable=True)
    total_seconds = Column(Float, nullable=False, default=0.0)
    # Full manifest as JSON text (SQLite has no native JSON type)
    manifest_json = Column("manifest", Text, nullable=False)

    @property
    def manifest(self) -> dict:
        try:
            return json.loads(self.manifest_json) if self.manifest_json else {}
        except json.JSONDecodeError:
            return {}

    @manifest.setter
    def manifest(self, value: dict) -> None:
        self.manifest_json = json.dumps(value or {}, sort_keys=True, default=str)
