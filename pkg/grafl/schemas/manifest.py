from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional
from uuid import uuid4

from pydantic import BaseModel, ConfigDict, Field, field_validator


class RunManifest(BaseModel):
    run_id: str = Field(default_factory=lambda: uuid4().hex, description="Unique id of the run")
    command: str = Field(..., min_length=1, description="CLI command that produced the outputs")
    config: Dict[str, Any] = Field(default_factory=dict, description="Effective configuration values")
    inputs: List[str] = Field(default_factory=list, description="Input file paths")
    seed: Optional[int] = Field(None, description="Seed every random draw flows from")
    timings: Dict[str, float] = Field(default_factory=dict, description="Seconds per phase")
    outputs: List[str] = Field(default_factory=list, description="Output file paths")
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    model_config = ConfigDict(extra="forbid")

    @field_validator("timings")
    @classmethod
    def _non_negative(cls, value: Dict[str, float]) -> Dict[str, float]:
        for phase, seconds in value.items():
            if seconds < 0:
                raise ValueError(f"timing of {phase} is negative")
        return value

    @property
    def total_seconds(self) -> float:
        return float(sum(self.timings.values()))

    def fingerprint(self) -> str:
        """Deterministic hash of what the run computed (timings and ids excluded)."""
        payload = json.dumps(
            {"command": self.command, "config": self.config, "inputs": self.inputs, "seed": self.seed},
            sort_keys=True,
            default=str,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()
