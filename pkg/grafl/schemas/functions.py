# grafl/schemas/functions.py
"""
Function file (JSON) schema.

{
  "version": 1,
  "kind": "node",
  "config": {"alpha": 0.5, "lambda": 0.7, "ell": 1, "operators": [{"tag": "sum"}, ...], ...},
  "layers": [
    [{"leaf": {"family": "degree", "variant": "total"},
      "chain": [{"op": {"tag": "sum"}, "sel": {"dir": "all", "hops": 1}}],
      "combinator": {"kind": "plus", "ref": {"layer": 0, "index": 2}},
      "post": [{"op": {"tag": "diffuse", "method": "laplacian", ...}}],
      "transform": {"alpha": 0.5, "bins": 4}}]
  ]
}

``ref.layer`` is the 0-based position in ``layers`` and must precede the
layer holding the reference. ``post`` lists the steps applied after the
combinator and is only written for combined functions. Diffusion steps carry ``{"tag": "diffuse",
"method", "theta", "iterations", "tol"}`` and no ``sel``.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from grafl.core.graph import NeighborhoodSelector
from grafl.core.io import atomic_write
from grafl.features.descriptors import BaseFeatureDescriptor
from grafl.features.function_set import FunctionSet
from grafl.features.functions import BinTransform, ChainStep, Combinator, DiffusionStep, RelationalFunction
from grafl.features.operators import RelationalOperator
from grafl.schemas.config import ConfigError, DiffusionConfig, Family, LearnConfig, OperatorSpec

log = structlog.get_logger()

FUNCTION_FILE_VERSION = 1


class FunctionFileError(ValueError):
    """A function file that cannot be read back; the message names the field."""


class LeafDoc(BaseModel):
    family: Family
    variant: str = Field(..., min_length=1)
    model_config = ConfigDict(extra="forbid")


class SelectorDoc(BaseModel):
    dir: Literal["out", "in", "all"]
    hops: int = Field(1, ge=1)
    model_config = ConfigDict(extra="forbid")


class OpDoc(BaseModel):
    tag: Literal["hadamard", "mean", "sum", "max", "weighted-lp", "rbf", "diffuse"]
    p: Optional[float] = Field(None, ge=1.0)
    sigma: Optional[float] = Field(None, gt=0.0)
    method: Optional[Literal["row-stochastic", "laplacian"]] = None
    theta: Optional[float] = Field(None, ge=0.0, le=1.0)
    iterations: Optional[int] = Field(None, ge=1)
    tol: Optional[float] = Field(None, ge=0.0)
    model_config = ConfigDict(extra="forbid")


class StepDoc(BaseModel):
    op: OpDoc
    sel: Optional[SelectorDoc] = None
    model_config = ConfigDict(extra="forbid")


class RefDoc(BaseModel):
    layer: int = Field(..., ge=0)
    index: int = Field(..., ge=0)


class CombinatorDoc(BaseModel):
    kind: Literal["plus", "times"]
    ref: RefDoc


class TransformDoc(BaseModel):
    alpha: Optional[float] = Field(None, gt=0.0, lt=1.0)
    bins: Optional[int] = Field(None, ge=0)


class FunctionDoc(BaseModel):
    leaf: LeafDoc
    chain: List[StepDoc] = Field(default_factory=list)
    combinator: Optional[CombinatorDoc] = None
    post: List[StepDoc] = Field(default_factory=list)
    transform: TransformDoc = Field(default_factory=TransformDoc)
    model_config = ConfigDict(extra="forbid")


class ConfigDoc(BaseModel):
    alpha: float
    lam: float = Field(..., alias="lambda")
    ell: int
    operators: List[OperatorSpec]
    criterion: Literal["agreement", "mutual-information"] = "agreement"
    max_layers: int = 3
    families: List[Family] = Field(default_factory=list)
    combinators: List[Literal["plus", "times"]] = Field(default_factory=list)
    diffusion: Optional[DiffusionConfig] = None
    selection: Literal["unsupervised", "supervised"] = "unsupervised"
    beta: float = 1.0
    budget: int = 10
    model_config = ConfigDict(populate_by_name=True)


class FunctionFileDoc(BaseModel):
    version: int
    kind: Literal["node", "edge"]
    config: ConfigDoc
    layers: List[List[FunctionDoc]]


# ---------- FunctionSet -> document ----------
def _step_doc(step: ChainStep) -> dict:
    if step.is_diffusion:
        return {"op": step.op.to_dict()}
    return {"op": step.op.to_dict(), "sel": {"dir": step.selector.direction, "hops": step.selector.hops}}


def _function_doc(f: RelationalFunction, where: dict[tuple, tuple[int, int]]) -> dict:
    doc: dict = {
        "leaf": {"family": f.leaf.family, "variant": f.leaf.variant},
        "chain": [_step_doc(s) for s in f.chain],
    }
    if f.combinator is not None:
        layer, index = where[f.combinator.other.signature()]
        doc["combinator"] = {"kind": f.combinator.kind, "ref": {"layer": layer, "index": index}}
    if f.post:
        doc["post"] = [_step_doc(s) for s in f.post]
    doc["transform"] = {"alpha": f.transform.alpha, "bins": f.transform.bins}
    return doc


def function_set_to_dict(fs: FunctionSet) -> dict:
    cfg = fs.config
    config = {
        "alpha": cfg.alpha,
        "lambda": cfg.lam,
        "ell": cfg.hops,
        "operators": [op.model_dump() for op in cfg.operators],
        "criterion": cfg.criterion,
        "max_layers": cfg.max_layers,
        "families": list(cfg.families),
        "combinators": list(cfg.combinators),
        "diffusion": cfg.diffusion.model_dump() if cfg.diffusion else None,
        "selection": cfg.selection,
        "beta": cfg.beta,
        "budget": cfg.budget,
    }
    where = fs.locate()
    return {
        "version": FUNCTION_FILE_VERSION,
        "kind": fs.kind,
        "config": config,
        "layers": [[_function_doc(f, where) for f in layer] for layer in fs.layers],
    }


# ---------- document -> FunctionSet ----------
def _field_error(exc: ValidationError) -> FunctionFileError:
    first = exc.errors()[0]
    field = ".".join(str(p) for p in first.get("loc", ())) or "document"
    return FunctionFileError(f"{field}: {first.get('msg', 'invalid value')}")


def _step(doc: StepDoc, where: str) -> ChainStep:
    op = doc.op
    if op.tag == "diffuse":
        if op.method is None:
            raise FunctionFileError(f"{where}.op.method: required for a diffusion step")
        defaults = DiffusionStep()
        return ChainStep(DiffusionStep(
            method=op.method,
            theta=defaults.theta if op.theta is None else op.theta,
            iterations=defaults.iterations if op.iterations is None else op.iterations,
            tol=defaults.tol if op.tol is None else op.tol,
        ))
    if doc.sel is None:
        raise FunctionFileError(f"{where}.sel: required for operator {op.tag!r}")
    operator = RelationalOperator(op.tag, p=op.p or 1.0, sigma=op.sigma or 1.0)
    return ChainStep(operator, NeighborhoodSelector(doc.sel.dir, doc.sel.hops))


def function_set_from_dict(data: dict) -> FunctionSet:
    if not isinstance(data, dict):
        raise FunctionFileError("document: expected a JSON object")
    version = data.get("version")
    if version != FUNCTION_FILE_VERSION:
        raise FunctionFileError(f"version: unsupported function file version {version!r} (expected {FUNCTION_FILE_VERSION})")
    try:
        doc = FunctionFileDoc.model_validate(data)
    except ValidationError as exc:
        raise _field_error(exc) from None

    c = doc.config
    settings = {
        "kind": doc.kind,
        "operators": [op.model_dump() for op in c.operators],
        "criterion": c.criterion,
        "lam": c.lam,
        "alpha": c.alpha,
        "max_layers": c.max_layers,
        "hops": c.ell,
        "combinators": c.combinators,
        "diffusion": c.diffusion.model_dump() if c.diffusion else None,
        "selection": c.selection,
        "beta": c.beta,
        "budget": c.budget,
    }
    if c.families:
        settings["families"] = c.families
    try:
        config = LearnConfig.parse(settings)
    except ConfigError as exc:
        raise FunctionFileError(f"config.{exc}") from None

    layers: list[list[RelationalFunction]] = []
    for li, layer_doc in enumerate(doc.layers):
        if not layer_doc:
            raise FunctionFileError(f"layers.{li}: a layer must hold at least one function")
        layer: list[RelationalFunction] = []
        for i, fdoc in enumerate(layer_doc):
            where = f"layers.{li}.{i}"
            try:
                leaf = BaseFeatureDescriptor(fdoc.leaf.family, fdoc.leaf.variant)
                chain = tuple(_step(s, f"{where}.chain.{k}") for k, s in enumerate(fdoc.chain))
                post = tuple(_step(s, f"{where}.post.{k}") for k, s in enumerate(fdoc.post))
            except FunctionFileError:
                raise
            except ValueError as exc:
                raise FunctionFileError(f"{where}: {exc}") from None
            combinator = None
            if fdoc.combinator is not None:
                ref = fdoc.combinator.ref
                if ref.layer >= li or ref.index >= len(doc.layers[ref.layer]):
                    raise FunctionFileError(f"{where}.combinator.ref: must point to a function of an earlier layer")
                combinator = Combinator(fdoc.combinator.kind, layers[ref.layer][ref.index])
            elif post:
                raise FunctionFileError(f"{where}.post: steps after a combinator need a combinator")
            transform = BinTransform(fdoc.transform.alpha, fdoc.transform.bins)
            layer.append(RelationalFunction(leaf, chain, combinator, transform, post))
        layers.append(layer)
    return FunctionSet(doc.kind, tuple(tuple(layer) for layer in layers), config)


# ---------- Files ----------
def save_functions(fs: FunctionSet, path: str | Path) -> None:
    text = json.dumps(function_set_to_dict(fs), indent=2)
    with atomic_write(path) as fh:
        fh.write(text + "\n")
    log.info("functions_saved", path=str(path), functions=len(fs), layers=len(fs.layers))


def load_functions(path: str | Path) -> FunctionSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FunctionFileError(f"document: not valid JSON (line {exc.lineno}, column {exc.colno})") from None
    fs = function_set_from_dict(data)
    log.info("functions_loaded", path=str(path), functions=len(fs), layers=len(fs.layers))
    return fs
