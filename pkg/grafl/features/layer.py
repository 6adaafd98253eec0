# grafl/features/layer.py
"""Candidate feature layer: every retained function extended by every (selector, operator)."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
import structlog

from grafl.core.graph import DIRECTIONS, NeighborhoodSelector, neighborhood_matrix
from grafl.core.parallel import parallel_map, resolve_workers
from grafl.features.functions import ChainStep, Evaluator, RelationalFunction
from grafl.features.operators import RelationalOperator

log = structlog.get_logger()


def candidate_functions(
    parents: Sequence[RelationalFunction],
    operators: Sequence[RelationalOperator],
    hops: int = 1,
    combinators: Sequence[str] = (),
) -> list[RelationalFunction]:
    """
    Definitions of the next layer, ordered by (feature, selector, operator)
    with selectors out, in, all. Combined pairs (i < j) follow, plus before times.
    Combined parents are terminal and produce nothing.
    """
    plain = [f for f in parents if not f.terminal]
    selectors = [NeighborhoodSelector(d, hops) for d in DIRECTIONS]
    out = [f.extend(ChainStep(op, sel)) for f in plain for sel in selectors for op in operators]
    for kind in ("plus", "times"):
        if kind not in combinators:
            continue
        out += [plain[i].combine(kind, plain[j]) for i in range(len(plain)) for j in range(i + 1, len(plain))]
    return out


def feature_layer(
    ev: Evaluator,
    parents: Sequence[RelationalFunction],
    operators: Sequence[RelationalOperator],
    hops: int = 1,
    combinators: Sequence[str] = (),
    workers: Optional[int] = None,
) -> tuple[list[RelationalFunction], np.ndarray]:
    """Evaluate every candidate of the next layer; returns definitions and an (elements x candidates) matrix."""
    functions = candidate_functions(parents, operators, hops, combinators)
    rows = ev.g.size(ev.kind)
    if not functions:
        return [], np.zeros((rows, 0))

    # build shared neighbourhood matrices once, before threads read them
    for d in DIRECTIONS:
        neighborhood_matrix(ev.g, ev.kind, NeighborhoodSelector(d, hops))
    for f in parents:
        ev.column(f)

    cols = parallel_map(ev.column, functions, resolve_workers(workers))
    log.info("layer_candidates", parents=len(parents), candidates=len(functions), kind=ev.kind)
    return functions, np.column_stack(cols) if cols else np.zeros((rows, 0))
