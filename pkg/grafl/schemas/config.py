from __future__ import annotations

import math
from typing import Any, List, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

OperatorTag = Literal["hadamard", "mean", "sum", "max", "weighted-lp", "rbf"]
Family = Literal["degree", "kcore", "egonet", "orbit", "attribute", "lifted-attribute"]

ALL_OPERATORS: tuple[str, ...] = ("hadamard", "mean", "sum", "max", "weighted-lp", "rbf")
DEFAULT_FAMILIES: tuple[str, ...] = ("degree", "kcore", "egonet", "orbit", "attribute", "lifted-attribute")


class ConfigError(ValueError):
    """Invalid run configuration; raised before any computation starts."""


def _config_error(exc: ValidationError) -> ConfigError:
    first = exc.errors()[0]
    field = ".".join(str(p) for p in first.get("loc", ())) or "config"
    return ConfigError(f"{field}: {first.get('msg', 'invalid value')}")


class OperatorSpec(BaseModel):
    tag: OperatorTag
    p: float = Field(1.0, ge=1.0, description="Exponent of weighted-lp")
    sigma: float = Field(1.0, gt=0.0, description="Bandwidth of rbf")

    model_config = ConfigDict(extra="forbid", frozen=True)


class DiffusionConfig(BaseModel):
    method: Literal["row-stochastic", "laplacian"] = "row-stochastic"
    theta: float = Field(0.5, ge=0.0, le=1.0, description="Retention weight (laplacian only)")
    iterations: int = Field(10, ge=1, description="Maximum number of steps T")
    tol: float = Field(1e-9, ge=0.0, description="A step changing no value by tol or more is not applied")
    attach: Literal["replace", "append"] = "append"

    model_config = ConfigDict(extra="forbid", frozen=True)

    @classmethod
    def parse(cls, data: Mapping[str, Any]) -> "DiffusionConfig":
        try:
            return cls.model_validate(dict(data))
        except ValidationError as exc:
            raise _config_error(exc) from None


class LearnConfig(BaseModel):
    kind: Literal["node", "edge"] = "node"
    operators: List[OperatorSpec] = Field(
        default_factory=lambda: [OperatorSpec(tag=t) for t in ALL_OPERATORS]
    )
    criterion: Literal["agreement", "mutual-information"] = "agreement"
    lam: float = Field(0.7, ge=0.0, description="Dependence threshold lambda")
    alpha: float = Field(0.5, gt=0.0, lt=1.0, description="Logarithmic binning fraction")
    max_layers: int = Field(3, ge=1)
    hops: int = Field(1, ge=1, description="Neighbourhood distance l")
    families: List[Family] = Field(default_factory=lambda: list(DEFAULT_FAMILIES))
    combinators: List[Literal["plus", "times"]] = Field(default_factory=list)
    diffusion: Optional[DiffusionConfig] = None
    selection: Literal["unsupervised", "supervised"] = "unsupervised"
    beta: float = Field(1.0, ge=0.0, description="Redundancy weight in supervised selection")
    budget: int = Field(10, ge=1, description="Features kept per layer in supervised selection")
    workers: Optional[int] = None

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("operators")
    @classmethod
    def _operators_non_empty(cls, value: List[OperatorSpec]) -> List[OperatorSpec]:
        if not value:
            raise ValueError("operator set must not be empty")
        tags = [op.tag for op in value]
        if len(set(tags)) != len(tags):
            raise ValueError("operator tags must be unique")
        return value

    @field_validator("families")
    @classmethod
    def _families_non_empty(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one base-feature family is required")
        return list(dict.fromkeys(value))

    @model_validator(mode="after")
    def _lambda_range(self) -> "LearnConfig":
        if self.criterion == "agreement" and not self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1] for the agreement criterion")
        if math.isnan(self.lam):
            raise ValueError("lam must be a number")
        return self

    @classmethod
    def parse(cls, data: Mapping[str, Any]) -> "LearnConfig":
        """Validate a plain mapping, mapping pydantic errors onto ConfigError."""
        try:
            return cls.model_validate(dict(data))
        except ValidationError as exc:
            raise _config_error(exc) from None

    def operator_tags(self) -> list[str]:
        return [op.tag for op in self.operators]
