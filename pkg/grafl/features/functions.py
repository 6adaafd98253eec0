# grafl/features/functions.py
"""
Relational functions: a base feature followed by operator applications, the
transferable definition of a learned feature, and the evaluator that turns
them into (binned) columns on any graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Union

import numpy as np
import structlog

from grafl.core.graph import Graph, NeighborhoodSelector, neighborhood_matrix
from grafl.features.base import TransferError, base_column, missing_support
from grafl.features.binning import bin_count, check_alpha, log_bin
from grafl.features.descriptors import BaseFeatureDescriptor
from grafl.features.operators import RelationalOperator, apply_matrix

log = structlog.get_logger()

COMBINATORS = ("plus", "times")

__all__ = [
    "BinTransform",
    "ChainStep",
    "Combinator",
    "DiffusionStep",
    "Evaluator",
    "RelationalFunction",
    "TransferError",
    "evaluate_function",
]


@dataclass(frozen=True)
class DiffusionStep:
    """Diffusion recorded inside a function so it replays on other graphs."""

    method: str = "row-stochastic"
    theta: float = 0.5
    iterations: int = 10
    tol: float = 1e-9
    tag: str = field(default="diffuse", init=False)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "method": self.method, "theta": self.theta,
                "iterations": self.iterations, "tol": self.tol}


@dataclass(frozen=True)
class ChainStep:
    op: Union[RelationalOperator, DiffusionStep]
    selector: Optional[NeighborhoodSelector] = None

    @property
    def is_diffusion(self) -> bool:
        return isinstance(self.op, DiffusionStep)

    def label(self) -> str:
        if self.is_diffusion:
            return f"diffuse[{self.op.method}]"
        return f"{self.op.tag}[{self.selector.direction},{self.selector.hops}]"


@dataclass(frozen=True)
class BinTransform:
    alpha: Optional[float] = None  # None: values are used unbinned
    bins: Optional[int] = None  # bin count seen when the function was learned


@dataclass(frozen=True)
class Combinator:
    kind: str
    other: "RelationalFunction"

    def __post_init__(self) -> None:
        if self.kind not in COMBINATORS:
            raise ValueError(f"unknown combinator: {self.kind!r}")


@dataclass(frozen=True)
class RelationalFunction:
    """
    leaf -> chain -> (combinator with another function) -> post.

    ``post`` only exists on combined functions and holds the steps applied to
    the combined column (diffusion, in practice).
    """

    leaf: BaseFeatureDescriptor
    chain: tuple[ChainStep, ...] = ()
    combinator: Optional[Combinator] = None
    transform: BinTransform = BinTransform()
    post: tuple[ChainStep, ...] = ()

    def __post_init__(self) -> None:
        if self.post and self.combinator is None:
            raise ValueError("post-combinator steps need a combinator")

    @property
    def operator_steps(self) -> int:
        return sum(1 for s in self.chain + self.post if not s.is_diffusion)

    @property
    def depth(self) -> int:
        if self.combinator is not None:
            base = replace(self, combinator=None, post=())
            combined = max(base.depth, self.combinator.other.depth) + 1
            return combined + sum(1 for s in self.post if not s.is_diffusion)
        return 1 + self.operator_steps

    @property
    def terminal(self) -> bool:
        """Combined functions are not extended by later layers."""
        return self.combinator is not None

    def extend(self, step: ChainStep) -> "RelationalFunction":
        transform = BinTransform(self.transform.alpha)
        if self.combinator is not None:
            return replace(self, post=self.post + (step,), transform=transform)
        return RelationalFunction(self.leaf, self.chain + (step,), None, transform)

    def combine(self, kind: str, other: "RelationalFunction") -> "RelationalFunction":
        return RelationalFunction(self.leaf, self.chain, Combinator(kind, other), BinTransform(self.transform.alpha))

    def with_bins(self, bins: int) -> "RelationalFunction":
        return replace(self, transform=BinTransform(self.transform.alpha, bins))

    def signature(self) -> tuple:
        """Identity of the computed column (ignores the recorded bin count)."""
        comb = None if self.combinator is None else (self.combinator.kind, self.combinator.other.signature())
        return (self.leaf, self.chain, comb, self.post, self.transform.alpha)

    def prefix(self) -> "RelationalFunction":
        if self.post:
            return replace(self, post=self.post[:-1], transform=BinTransform(self.transform.alpha))
        return RelationalFunction(self.leaf, self.chain[:-1], None, BinTransform(self.transform.alpha))

    def name(self) -> str:
        parts = [self.leaf.key] + [s.label() for s in self.chain]
        text = "|".join(parts)
        if self.combinator is not None:
            sym = "+" if self.combinator.kind == "plus" else "*"
            text = f"({text}){sym}({self.combinator.other.name()})"
        if self.post:
            text = "|".join([f"({text})"] + [s.label() for s in self.post])
        return text


class Evaluator:
    """
    Memoised evaluation of relational functions on one graph.

    Columns are binned after each step with the function's own alpha, so a
    function evaluated here reproduces the column it had during learning.
    """

    def __init__(
        self,
        g: Graph,
        kind: str,
        operators: Mapping[str, RelationalOperator],
        workers: Optional[int] = None,
    ):
        self.g = g
        self.kind = kind
        self.operators = dict(operators)
        self.workers = workers
        self._columns: dict[tuple, np.ndarray] = {}

    def raw_base(self, desc: BaseFeatureDescriptor) -> np.ndarray:
        return base_column(self.g, self.kind, desc, self.operators, self.workers)

    def check(self, f: RelationalFunction) -> None:
        missing = missing_support(self.g, self.kind, f.leaf, self.operators)
        if missing is not None:
            raise TransferError(f"graph does not support base feature family: {missing}")
        if f.combinator is not None:
            self.check(f.combinator.other)

    def column(self, f: RelationalFunction) -> np.ndarray:
        key = f.signature()
        cached = self._columns.get(key)
        if cached is not None:
            return cached
        alpha = f.transform.alpha

        if f.post:
            parent = self.column(f.prefix())
            raw = self.apply_step(f.post[-1], parent)
        elif f.combinator is not None:
            left = self.column(replace(f, combinator=None, post=(), transform=BinTransform(alpha)))
            right = self.column(f.combinator.other)
            raw = left + right if f.combinator.kind == "plus" else left * right
        elif not f.chain:
            raw = self.raw_base(f.leaf)
        else:
            parent = self.column(f.prefix())
            raw = self.apply_step(f.chain[-1], parent)

        col = raw if alpha is None else log_bin(raw, check_alpha(alpha)).astype(np.float64)
        self._columns[key] = col
        return col

    def apply_step(self, step: ChainStep, x: np.ndarray) -> np.ndarray:
        if step.is_diffusion:
            from grafl.features.diffusion import diffuse_column, diffusion_operator

            op = diffusion_operator(self.g, self.kind, step.op.method)
            return diffuse_column(op, x, step.op)
        M = neighborhood_matrix(self.g, self.kind, step.selector)
        return apply_matrix(step.op, M, x)

    def store(self, f: RelationalFunction, column: np.ndarray) -> None:
        self._columns[f.signature()] = column

    def forget(self, f: RelationalFunction) -> None:
        self._columns.pop(f.signature(), None)

    def bins_of(self, f: RelationalFunction) -> int:
        return bin_count(self.column(f).astype(np.int64))


def evaluate_function(
    g: Graph,
    f: RelationalFunction,
    kind: str = "node",
    operators: Optional[Mapping[str, RelationalOperator]] = None,
) -> np.ndarray:
    """Column of ``f`` on ``g`` (binned when its transform records alpha); raises TransferError when a base family is missing."""
    ops = dict(operators or {})
    pending = [f]
    while pending:
        h = pending.pop()
        for step in h.chain + h.post:
            if not step.is_diffusion:
                ops.setdefault(step.op.tag, step.op)
        if h.combinator is not None:
            pending.append(h.combinator.other)
    ev = Evaluator(g, kind, ops)
    ev.check(f)
    return ev.column(f)
