# grafl/features/function_set.py
from __future__ import annotations

from dataclasses import dataclass

from grafl.features.functions import RelationalFunction
from grafl.features.operators import RelationalOperator
from grafl.schemas.config import LearnConfig


@dataclass(frozen=True)
class FunctionSet:
    """Learned functions grouped by layer (layer 1 = base features), plus the config they were learned with."""

    kind: str
    layers: tuple[tuple[RelationalFunction, ...], ...]
    config: LearnConfig

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        if any(not layer for layer in self.layers):
            raise ValueError("every retained layer must hold at least one function")

    def __len__(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def functions(self) -> list[RelationalFunction]:
        return [f for layer in self.layers for f in layer]

    def layer_numbers(self) -> list[int]:
        return [i + 1 for i, layer in enumerate(self.layers) for _ in layer]

    def operators(self) -> dict[str, RelationalOperator]:
        return {spec.tag: RelationalOperator.from_spec(spec) for spec in self.config.operators}

    def locate(self) -> dict[tuple, tuple[int, int]]:
        """Signature -> (layer position, index) of its first occurrence."""
        where: dict[tuple, tuple[int, int]] = {}
        for li, layer in enumerate(self.layers):
            for i, f in enumerate(layer):
                where.setdefault(f.signature(), (li, i))
        return where
