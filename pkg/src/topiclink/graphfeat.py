"""Structure of the subgraph induced by a hashtag's earliest adopters."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .corpus import AdoptionTrace, AffiliationIndex, GraphView, ViewKind
from .errors import InsufficientAdopters, UndefinedDensity

STRUCTURAL_FEATURES = ("edges", "singletons", "components", "max_component")
VIEW_ORDER = (ViewKind.FULL, ViewKind.SOCIAL, ViewKind.INFORMATIONAL)


def _feature_columns(view: ViewKind, feature: str) -> list[str]:
    base = f"{view.value}.{feature}"
    cols = [base, base + "_log"]
    if feature != "edges":
        cols.append(base + "_mid")
    return cols


GROWTH_FEATURE_NAMES = tuple(
    c for v in VIEW_ORDER for f in STRUCTURAL_FEATURES for c in _feature_columns(v, f)
)


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def component_sizes(self) -> list[int]:
        return [self.size[i] for i in range(len(self.parent)) if self.parent[i] == i]


@dataclass(frozen=True)
class InducedSubgraph:
    members: np.ndarray
    kind: ViewKind
    src: np.ndarray
    dst: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.src.size)


@dataclass(frozen=True)
class StructuralFeatures:
    edges: int
    singletons: int
    components: int
    max_component: int

    def values(self) -> tuple:
        return astuple(self)


def induce(trace: AdoptionTrace, k: int, view: GraphView) -> InducedSubgraph:
    if k < 1 or len(trace) < k:
        raise InsufficientAdopters(
            f"hashtag {trace.hashtag} has {len(trace)} adopters, {k} required")
    members = trace.users[:k]
    src, dst = view.internal_edges(members)
    return InducedSubgraph(members, view.kind, src, dst)


def induce_members(members, view: GraphView) -> InducedSubgraph:
    members = np.asarray(members, dtype=np.int64)
    src, dst = view.internal_edges(members)
    return InducedSubgraph(members, view.kind, src, dst)


def structural_features(sub: InducedSubgraph) -> StructuralFeatures:
    members = sub.members.tolist()
    n = len(members)
    if n == 0:
        return StructuralFeatures(sub.edge_count, 0, 0, 0)
    local = {u: i for i, u in enumerate(members)}
    uf = UnionFind(n)
    touched = [False] * n
    for a, b in zip(sub.src.tolist(), sub.dst.tolist()):
        i, j = local[a], local[b]
        touched[i] = touched[j] = True
        uf.union(i, j)
    return StructuralFeatures(
        edges=sub.edge_count,
        singletons=n - sum(touched),
        components=uf.count,
        max_component=max(uf.component_sizes()),
    )


def expand_growth(per_view: dict, k: int) -> np.ndarray:
    """Lay out per-view StructuralFeatures in GROWTH_FEATURE_NAMES order."""
    out = []
    for kind in VIEW_ORDER:
        feats = per_view[kind]
        for name, value in zip(STRUCTURAL_FEATURES, feats.values()):
            out.append(float(value))
            out.append(math.log1p(value))
            if name != "edges":
                out.append(abs(value - k / 2))
    return np.array(out, dtype=float)


def view_features(trace: AdoptionTrace, k: int, views) -> dict:
    """StructuralFeatures of the first ``k`` adopters in each view."""
    views = _as_view_map(views)
    return {kind: structural_features(induce(trace, k, views[kind])) for kind in VIEW_ORDER}


def growth_features(trace: AdoptionTrace, k: int, views) -> np.ndarray:
    """33-entry vector: per view, (v, ln(1+v)) for each feature plus |v - k/2|
    for every feature except edges."""
    return expand_growth(view_features(trace, k, views), k)


def _as_view_map(views) -> dict:
    if isinstance(views, dict):
        return views
    return {v.kind: v for v in views}


def hashtag_density(h: int, index: AffiliationIndex, view: GraphView) -> float:
    members = index.users_of(h)
    n = len(members)
    if n < 2:
        raise UndefinedDensity(f"hashtag {h} has {n} user(s); density needs at least 2")
    arcs = view.internal_edge_count(members) * (1 if view.directed else 2)
    return arcs / (n * (n - 1))
