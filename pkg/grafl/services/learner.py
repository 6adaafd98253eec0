# grafl/services/learner.py
"""
Layer-wise feature learning and transfer extraction.

fit():  base layer (binned, never pruned) -> repeat { candidate layer, bin,
        prune (or supervised select), optional diffusion } until a layer comes
        back empty or ``max_layers`` layers exist.
extract(): replays a FunctionSet on any graph with the same base families.
"""
from __future__ import annotations

import time
from contextlib import contextmanager
from typing import Iterator, Optional

import numpy as np
import structlog

from grafl.core.graph import Graph
from grafl.core.parallel import parallel_map, resolve_workers
from grafl.features.binning import bin_count
from grafl.features.descriptors import base_descriptors
from grafl.features.diffusion import step_from_config
from grafl.features.function_set import FunctionSet
from grafl.features.functions import BinTransform, ChainStep, Evaluator, RelationalFunction
from grafl.features.layer import feature_layer
from grafl.features.matrix import FeatureMatrix
from grafl.features.operators import RelationalOperator
from grafl.schemas.config import ConfigError, LearnConfig
from grafl.selection.pruning import EvaluationCriterion, prune_layer
from grafl.selection.supervised import supervised_select

log = structlog.get_logger()

PHASES = ("base_features", "search", "scoring_pruning", "diffusion")


class Learner:
    """Learns a FunctionSet on one graph; ``timings`` holds seconds per phase of the last fit."""

    def __init__(self, cfg: LearnConfig):
        self.cfg = cfg
        self.timings: dict[str, float] = {p: 0.0 for p in PHASES}
        self.operators = [RelationalOperator.from_spec(spec) for spec in cfg.operators]
        self.criterion = EvaluationCriterion(cfg.criterion, cfg.lam)

    @contextmanager
    def _phase(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] += time.perf_counter() - start

    def _check_inputs(self, g: Graph, labels: Optional[np.ndarray]) -> Optional[np.ndarray]:
        kind = self.cfg.kind
        if g.size(kind) == 0:
            raise ValueError(f"graph has no {kind}s to learn features for")
        if self.cfg.selection == "supervised":
            if labels is None:
                raise ConfigError("selection: supervised learning needs labels")
            labels = np.asarray(labels)
            if len(labels) != g.size(kind):
                raise ValueError(f"expected {g.size(kind)} labels, got {len(labels)}")
            if not (labels >= 0).any():
                raise ValueError("no labeled elements")
        return labels

    def _select(self, cand: np.ndarray, hist: np.ndarray, labels: Optional[np.ndarray]) -> list[int]:
        cfg = self.cfg
        if cfg.selection == "supervised":
            return supervised_select(cand, labels, beta=cfg.beta, k=cfg.budget, history=hist, min_score=0.0)
        return prune_layer(cand, hist, self.criterion, cfg.workers)

    def _diffused(self, ev: Evaluator, layer: list[RelationalFunction]) -> list[RelationalFunction]:
        step = ChainStep(step_from_config(self.cfg.diffusion))
        functions = [f.extend(step) for f in layer]
        cols = parallel_map(ev.column, functions, resolve_workers(self.cfg.workers))
        functions = [f.with_bins(bin_count(c.astype(np.int64))) for f, c in zip(functions, cols)]
        if self.cfg.diffusion.attach == "replace":
            return functions
        return layer + functions

    def fit(self, g: Graph, labels: Optional[np.ndarray] = None) -> tuple[FeatureMatrix, FunctionSet]:
        cfg = self.cfg
        labels = self._check_inputs(g, labels)
        self.timings = {p: 0.0 for p in PHASES}
        kind = cfg.kind
        ev = Evaluator(g, kind, {op.tag: op for op in self.operators}, cfg.workers)

        with self._phase("base_features"):
            descs = base_descriptors(g, kind, list(cfg.families), cfg.operator_tags())
            if not descs:
                raise ConfigError("families: no base feature of the enabled families exists on this graph")
            base = [RelationalFunction(d, transform=BinTransform(cfg.alpha)) for d in descs]
            base = [f.with_bins(ev.bins_of(f)) for f in base]
        log.info("base_features_done", kind=kind, features=len(base), seconds=round(self.timings["base_features"], 4))

        layer = base
        if cfg.diffusion is not None:
            with self._phase("diffusion"):
                layer = self._diffused(ev, layer)
        layers: list[list[RelationalFunction]] = [layer]
        history = [ev.column(f) for f in layer]

        stop = "max_layers"
        while len(layers) < cfg.max_layers:
            with self._phase("search"):
                cand, cand_cols = feature_layer(ev, layer, self.operators, cfg.hops, cfg.combinators, cfg.workers)
            if not cand:
                stop = "no_candidates"
                break
            with self._phase("scoring_pruning"):
                kept = self._select(cand_cols, np.column_stack(history), labels)
                for i in set(range(len(cand))) - set(kept):
                    ev.forget(cand[i])
            if not kept:
                stop = "empty_layer"
                break
            layer = [cand[i].with_bins(bin_count(cand_cols[:, i].astype(np.int64))) for i in kept]
            if cfg.diffusion is not None:
                with self._phase("diffusion"):
                    layer = self._diffused(ev, layer)
            layers.append(layer)
            history += [ev.column(f) for f in layer]
            log.info("layer_retained", layer=len(layers), features=len(layer))

        fs = FunctionSet(kind, tuple(tuple(layer) for layer in layers), cfg)
        X = FeatureMatrix(kind, np.column_stack(history), tuple(fs.functions()), tuple(fs.layer_numbers()))
        log.info("learn_stopped", reason=stop, layers=len(layers), features=len(fs), **{
            f"{p}_seconds": round(self.timings[p], 4) for p in PHASES
        })
        return X, fs


def learn(g: Graph, cfg: LearnConfig, labels: Optional[np.ndarray] = None) -> tuple[FeatureMatrix, FunctionSet]:
    return Learner(cfg).fit(g, labels)


def extract(g: Graph, fs: FunctionSet, workers: Optional[int] = None) -> FeatureMatrix:
    """
    Evaluate every function of ``fs`` on ``g`` in layer order (no learning, no pruning).
    Support for all base families is checked before anything is computed.
    """
    ev = Evaluator(g, fs.kind, fs.operators(), workers if workers is not None else fs.config.workers)
    functions = fs.functions()
    for f in functions:
        ev.check(f)
    rows = g.size(fs.kind)
    cols = []
    for layer in fs.layers:
        cols += parallel_map(ev.column, list(layer), resolve_workers(ev.workers))
    X = FeatureMatrix.from_columns(fs.kind, rows, functions, cols, fs.layer_numbers())
    log.info("transfer_extract_done", kind=fs.kind, rows=rows, features=len(functions))
    return X
