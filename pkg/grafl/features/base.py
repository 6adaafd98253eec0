# grafl/features/base.py
"""
Base feature layer: degrees, k-core numbers, egonet counts, orbit counts and
attributes (copied or lifted from the other element kind).
"""
from __future__ import annotations

from typing import Mapping, Optional

import numpy as np
import structlog
from scipy import sparse

from grafl.core.graph import Graph
from grafl.core.kcore import edge_kcore_numbers, kcore_numbers
from grafl.features.descriptors import (
    EDGE_ORBITS,
    EGONET_VARIANTS,
    LIFT_OPERATORS,
    NODE_ORBITS,
    WEIGHTED_PREFIX,
    BaseFeatureDescriptor,
    base_descriptors,
    degree_descriptors,
)
from grafl.features.operators import RelationalOperator, apply_matrix
from grafl.features.orbits import edge_orbit_counts, node_orbit_counts

log = structlog.get_logger()

_EGO_BLOCK = 65536


class TransferError(ValueError):
    """The graph lacks a base-feature family (or attribute) a function needs."""


# ---------- Degree ----------
def _node_degree(g: Graph, variant: str) -> np.ndarray:
    weighted = variant.startswith(WEIGHTED_PREFIX)
    name = variant[len(WEIGHTED_PREFIX):] if weighted else variant
    if name == "in":
        return g.in_degree(weighted)
    if name == "out":
        return g.out_degree(weighted)
    return g.total_degree(weighted)


def _combine(a: np.ndarray, b: np.ndarray, op: str) -> np.ndarray:
    return a + b if op == "+" else a * b


def _edge_degree(g: Graph, variant: str) -> np.ndarray:
    weighted = variant.startswith(WEIGHTED_PREFIX)
    body = variant[len(WEIGHTED_PREFIX):] if weighted else variant
    op = "+" if "+" in body else "*"
    left, right = body.split(op)
    d_out = g.out_degree(weighted)
    d_in = g.in_degree(weighted)
    per_node = {"out": d_out, "in": d_in, "total": _combine(d_out, d_in, op)}
    return _combine(per_node[left][g.src], per_node[right][g.dst], op)


def node_degree_features(g: Graph) -> tuple[list[BaseFeatureDescriptor], np.ndarray]:
    """In/out/total degree (plus weighted variants) and the k-core column."""
    descs = degree_descriptors("node", g.weighted) + [BaseFeatureDescriptor("kcore", "core")]
    cols = [base_column(g, "node", d) for d in descs]
    return descs, np.column_stack(cols) if cols else np.zeros((g.n, 0))


def edge_degree_features(g: Graph) -> tuple[list[BaseFeatureDescriptor], np.ndarray]:
    """The five endpoint-degree pairings for each combiner (+, *), weighted variants too."""
    descs = degree_descriptors("edge", g.weighted)
    cols = [base_column(g, "edge", d) for d in descs]
    return descs, np.column_stack(cols) if cols else np.zeros((g.m, 0))


# ---------- Egonet ----------
def _within_arcs(ego: sparse.csr_matrix, A: sparse.csr_matrix) -> np.ndarray:
    """Arcs with both endpoints inside each row's node set (row blocks bound memory)."""
    out = np.zeros(ego.shape[0], dtype=np.float64)
    for lo in range(0, ego.shape[0], _EGO_BLOCK):
        block = ego[lo:lo + _EGO_BLOCK]
        out[lo:lo + block.shape[0]] = np.asarray((block @ A).multiply(block).sum(axis=1)).ravel()
    return out


def _egonet_block(g: Graph, kind: str) -> dict[str, np.ndarray]:
    A = g.step_matrix("node", "out")  # binary arcs, self-loops dropped
    S = g.step_matrix("node", "all")
    outdeg = np.diff(A.indptr).astype(np.float64)
    indeg = np.asarray(A.sum(axis=0)).ravel()

    if kind == "node":
        ego = (S + sparse.identity(g.n, format="csr")).tocsr()
        ego.data[:] = 1.0
        within = _within_arcs(ego, A)
        into, out = indeg, outdeg
        among = within - into - out
    else:
        m = g.m
        e = np.arange(m)
        ends = sparse.csr_matrix(
            (np.ones(2 * m), (np.concatenate([e, e]), np.concatenate([g.src, g.dst]))), shape=(m, g.n)
        )
        ego = (ends @ S + ends).tocsr()
        ego.data[:] = 1.0
        within = _within_arcs(ego, A)
        loop = g.src == g.dst
        if m:
            vu = np.asarray(A[g.src, g.dst]).ravel()
            uv = np.asarray(A[g.dst, g.src]).ravel()
        else:
            vu = uv = np.zeros(0)
        internal = np.where(loop, 0.0, vu + uv)
        into = np.where(loop, indeg[g.src], indeg[g.src] + indeg[g.dst] - internal)
        out = np.where(loop, outdeg[g.src], outdeg[g.src] + outdeg[g.dst] - internal)
        among = within - into - out - internal

    leaving = np.asarray(ego @ outdeg).ravel() - within
    entering = np.asarray(ego @ indeg).ravel() - within
    values = (into, out, among, leaving, entering)
    return {name: np.asarray(v, dtype=np.float64) for name, v in zip(EGONET_VARIANTS, values)}


def egonet_features(g: Graph, kind: str) -> tuple[list[BaseFeatureDescriptor], np.ndarray]:
    """
    Five arc counts around each egonet (the element plus its 1-hop neighbours):
    arcs into the centre, out of the centre and among neighbours (within), then
    arcs leaving and entering the egonet (external). For an edge the centre is
    both endpoints and arcs between them are not counted.
    """
    block = g.cached(("egonet", kind), lambda: _egonet_block(g, kind))
    descs = [BaseFeatureDescriptor("egonet", v) for v in EGONET_VARIANTS]
    return descs, np.column_stack([block[v] for v in EGONET_VARIANTS])


# ---------- Orbits ----------
def orbit_counts(g: Graph, kind: str, workers: Optional[int] = None) -> tuple[list[BaseFeatureDescriptor], np.ndarray]:
    counts = node_orbit_counts(g, workers) if kind == "node" else edge_orbit_counts(g, workers)
    descs = [BaseFeatureDescriptor("orbit", str(i)) for i in range(counts.shape[1])]
    return descs, counts.astype(np.float64)


# ---------- Attributes ----------
def _incidence(g: Graph) -> sparse.csr_matrix:
    """n x m: node v, edge e -> 1 when v is an endpoint of e."""
    def build():
        e = np.arange(g.m)
        mat = sparse.csr_matrix(
            (np.ones(2 * g.m), (np.concatenate([g.src, g.dst]), np.concatenate([e, e]))), shape=(g.n, g.m)
        )
        mat.sum_duplicates()
        mat.data[:] = 1.0
        mat.sort_indices()
        return mat
    return g.cached("incidence", build)


def _lift(g: Graph, kind: str, name: str, op: RelationalOperator) -> np.ndarray:
    if kind == "node":
        return apply_matrix(op, _incidence(g), g.edge_attrs[name])
    x = g.node_attrs[name]
    if op.needs_self:
        diff = x[g.src] - x[g.dst]
        if op.tag == "weighted-lp":
            return np.abs(diff) ** op.p
        return np.exp(-(diff ** 2) / op.sigma ** 2)
    return apply_matrix(op, _incidence(g).T.tocsr(), x)


def lift_attributes(
    g: Graph, kind: str, operators: Mapping[str, RelationalOperator]
) -> tuple[list[BaseFeatureDescriptor], np.ndarray]:
    """Same-kind attributes copied, other-kind attributes lifted through each operator."""
    descs = base_descriptors(g, kind, ["attribute", "lifted-attribute"], list(operators))
    cols = [base_column(g, kind, d, operators) for d in descs]
    size = g.size(kind)
    return descs, np.column_stack(cols) if cols else np.zeros((size, 0))


# ---------- Dispatch ----------
def missing_support(
    g: Graph, kind: str, desc: BaseFeatureDescriptor, operators: Optional[Mapping[str, RelationalOperator]] = None
) -> Optional[str]:
    """Name of what ``g`` lacks to compute ``desc``, or None when supported."""
    if desc.family == "degree" and desc.weighted and not g.weighted:
        return "degree (edge weights)"
    if desc.family == "orbit":
        limit = NODE_ORBITS if kind == "node" else EDGE_ORBITS
        if not desc.variant.isdigit() or int(desc.variant) >= limit:
            return f"orbit {desc.variant}"
    if desc.family == "egonet" and desc.variant not in EGONET_VARIANTS:
        return f"egonet {desc.variant}"
    if desc.family == "attribute":
        attrs = g.node_attrs if kind == "node" else g.edge_attrs
        if desc.variant not in attrs:
            return f"attribute {desc.variant}"
    if desc.family == "lifted-attribute":
        source, name, tag = desc.variant.split(".", 2) if desc.variant.count(".") >= 2 else ("", "", "")
        attrs = g.edge_attrs if source == "edge" else g.node_attrs
        if source != ("edge" if kind == "node" else "node") or name not in attrs:
            return f"lifted-attribute {desc.variant}"
        if tag not in LIFT_OPERATORS or (operators is not None and tag not in operators):
            return f"lifted-attribute operator {tag}"
    return None


def base_column(
    g: Graph,
    kind: str,
    desc: BaseFeatureDescriptor,
    operators: Optional[Mapping[str, RelationalOperator]] = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Raw (unbinned) values of one base feature over all elements of ``kind``."""
    missing = missing_support(g, kind, desc, operators)
    if missing is not None:
        raise TransferError(f"graph does not support base feature family: {missing}")

    if desc.family == "degree":
        return _node_degree(g, desc.variant) if kind == "node" else _edge_degree(g, desc.variant)
    if desc.family == "kcore":
        core = kcore_numbers(g) if kind == "node" else edge_kcore_numbers(g)
        return core.astype(np.float64)
    if desc.family == "egonet":
        block = g.cached(("egonet", kind), lambda: _egonet_block(g, kind))
        return block[desc.variant]
    if desc.family == "orbit":
        counts = node_orbit_counts(g, workers) if kind == "node" else edge_orbit_counts(g, workers)
        return counts[:, int(desc.variant)].astype(np.float64)
    if desc.family == "attribute":
        attrs = g.node_attrs if kind == "node" else g.edge_attrs
        return np.asarray(attrs[desc.variant], dtype=np.float64)

    _, name, tag = desc.variant.split(".", 2)
    op = (operators or {}).get(tag) or RelationalOperator(tag)
    return g.cached(("lifted", kind, desc.variant, op), lambda: _lift(g, kind, name, op))
