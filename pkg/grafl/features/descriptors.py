# grafl/features/descriptors.py
"""Identifiers of base features: (family, variant) pairs."""
from __future__ import annotations

from dataclasses import dataclass

from grafl.core.graph import Graph

FAMILIES = ("degree", "kcore", "egonet", "orbit", "attribute", "lifted-attribute")

NODE_DEGREE_VARIANTS = ("in", "out", "total")
# (left endpoint degree, right endpoint degree) for edge (v, u)
EDGE_DEGREE_PAIRS = (("out", "out"), ("in", "in"), ("in", "out"), ("out", "in"), ("total", "total"))
EDGE_COMBINERS = ("+", "*")
EGONET_VARIANTS = ("within-into", "within-out", "within-among", "external-leaving", "external-entering")
NODE_ORBITS = 15
EDGE_ORBITS = 12
LIFT_OPERATORS = ("sum", "mean", "max", "hadamard", "weighted-lp", "rbf")
WEIGHTED_PREFIX = "w:"


@dataclass(frozen=True, order=True)
class BaseFeatureDescriptor:
    family: str
    variant: str

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown base-feature family: {self.family!r}")

    @property
    def key(self) -> str:
        return f"{self.family}:{self.variant}"

    @property
    def weighted(self) -> bool:
        return self.family == "degree" and self.variant.startswith(WEIGHTED_PREFIX)


def degree_descriptors(kind: str, weighted: bool) -> list[BaseFeatureDescriptor]:
    if kind == "node":
        variants = list(NODE_DEGREE_VARIANTS)
    else:
        variants = [f"{a}{op}{b}" for op in EDGE_COMBINERS for a, b in EDGE_DEGREE_PAIRS]
    if weighted:
        variants += [WEIGHTED_PREFIX + v for v in variants]
    return [BaseFeatureDescriptor("degree", v) for v in variants]


def orbit_descriptors(kind: str) -> list[BaseFeatureDescriptor]:
    count = NODE_ORBITS if kind == "node" else EDGE_ORBITS
    return [BaseFeatureDescriptor("orbit", str(i)) for i in range(count)]


def lifted_descriptors(g: Graph, kind: str, operator_tags: list[str]) -> list[BaseFeatureDescriptor]:
    """
    Attributes of the other element kind pushed through each operator.

    Edge attributes reach nodes over incident edges, which have no value of the
    node itself, so weighted-lp and rbf are only offered for node-to-edge lifting.
    """
    if kind == "node":
        source, names = "edge", sorted(g.edge_attrs)
        tags = [t for t in LIFT_OPERATORS if t in operator_tags and t not in ("weighted-lp", "rbf")]
    else:
        source, names = "node", sorted(g.node_attrs)
        tags = [t for t in LIFT_OPERATORS if t in operator_tags]
    return [BaseFeatureDescriptor("lifted-attribute", f"{source}.{name}.{tag}") for name in names for tag in tags]


def base_descriptors(
    g: Graph, kind: str, families: list[str], operator_tags: list[str]
) -> list[BaseFeatureDescriptor]:
    """Every base feature available on ``g`` for the enabled families, in a fixed order."""
    out: list[BaseFeatureDescriptor] = []
    for family in FAMILIES:
        if family not in families:
            continue
        if family == "degree":
            out += degree_descriptors(kind, g.weighted)
        elif family == "kcore":
            out.append(BaseFeatureDescriptor("kcore", "core"))
        elif family == "egonet":
            out += [BaseFeatureDescriptor("egonet", v) for v in EGONET_VARIANTS]
        elif family == "orbit":
            out += orbit_descriptors(kind)
        elif family == "attribute":
            attrs = g.node_attrs if kind == "node" else g.edge_attrs
            out += [BaseFeatureDescriptor("attribute", name) for name in sorted(attrs)]
        elif family == "lifted-attribute":
            out += lifted_descriptors(g, kind, operator_tags)
    return out
