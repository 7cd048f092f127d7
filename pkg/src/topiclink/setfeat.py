"""Common-hashtag similarity features for a pair of users."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .corpus import AffiliationIndex, GraphView
from .errors import NoCommonHashtag

BASE_FEATURES = (
    "num_common",
    "smallest_size",
    "largest_size",
    "average_size",
    "sum_inverse",
    "adamic_adar",
)
EDGE_FEATURE = "smallest_edges"
TRANSFORMS = ("", "_log", "_inv")


def transform_names(base: str) -> list[str]:
    return [base + t for t in TRANSFORMS]


PAIR_FEATURE_NAMES = tuple(n for b in BASE_FEATURES for n in transform_names(b))
PAIR_FEATURE_NAMES_WITH_EDGES = PAIR_FEATURE_NAMES + tuple(transform_names(EDGE_FEATURE))


@dataclass(frozen=True)
class SimilarityFeatures:
    num_common: int
    smallest_size: int
    largest_size: int
    average_size: float
    sum_inverse: float
    adamic_adar: float

    def values(self) -> tuple:
        return astuple(self)


def merge_intersection(a, b) -> list[int]:
    """Intersection of two ascending duplicate-free sequences by linear merge."""
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return out


def common_hashtags(u: int, v: int, index: AffiliationIndex) -> list[int]:
    return merge_intersection(index.tags_of(u), index.tags_of(v))


def pair_features(u: int, v: int, index: AffiliationIndex, common=None) -> SimilarityFeatures:
    if common is None:
        common = common_hashtags(u, v, index)
    if not common:
        raise NoCommonHashtag(f"users {u} and {v} share no hashtag")
    sizes = [int(index.tag_sizes[h]) for h in common]
    total = 0
    inv = 0.0
    aa = 0.0
    for s in sizes:
        total += s
        inv += 1.0 / s
        aa += 1.0 / math.log(s)
    return SimilarityFeatures(
        num_common=len(sizes),
        smallest_size=min(sizes),
        largest_size=max(sizes),
        average_size=total / len(sizes),
        sum_inverse=inv,
        adamic_adar=aa,
    )


def smallest_common_hashtag(u: int, v: int, index: AffiliationIndex, common=None) -> int:
    """Common hashtag with fewest users; ties go to the lowest hashtag id."""
    if common is None:
        common = common_hashtags(u, v, index)
    if not common:
        raise NoCommonHashtag(f"users {u} and {v} share no hashtag")
    sizes = index.tag_sizes
    best = common[0]
    for h in common[1:]:
        if sizes[h] < sizes[best]:
            best = h
    return best


def smallest_common_edges(u: int, v: int, index: AffiliationIndex, view: GraphView,
                          exclude_incident: bool = False, common=None, cache=None) -> int:
    """Edges of ``view`` inside the smallest common hashtag, ignoring the pair itself.

    By default only edges whose endpoint set is exactly {u, v} are
    dropped. ``exclude_incident=True`` drops every edge touching u or v.
    ``cache`` (a dict) memoises per-hashtag internal edge totals.
    """
    h = smallest_common_hashtag(u, v, index, common)
    members = index.users_of(h)
    if exclude_incident:
        src, dst = view.internal_edges(members)
        keep = (src != u) & (src != v) & (dst != u) & (dst != v)
        return int(keep.sum())
    if cache is not None:
        total = cache.get(h)
        if total is None:
            total = cache[h] = view.internal_edge_count(members)
    else:
        total = view.internal_edge_count(members)
    return total - view.pair_edge_count(u, v)


def transform(value: float) -> tuple[float, float, float]:
    """(v, ln(1+v), 1/(1+v)); total for every v >= 0."""
    v = float(value)
    return v, math.log1p(v), 1.0 / (1.0 + v)


def expand_transforms(features: SimilarityFeatures, corrected_edges=None) -> np.ndarray:
    """Feature vector in PAIR_FEATURE_NAMES(_WITH_EDGES) order."""
    bases = list(features.values())
    if corrected_edges is not None:
        bases.append(corrected_edges)
    return np.array([t for b in bases for t in transform(b)], dtype=float)


def pair_feature_matrix(pairs, index: AffiliationIndex, view: GraphView | None = None,
                        exclude_incident: bool = False) -> np.ndarray:
    """Rows of expanded features for ``pairs``; with a view, 21 columns, else 18."""
    cache: dict = {}
    width = len(PAIR_FEATURE_NAMES_WITH_EDGES if view is not None else PAIR_FEATURE_NAMES)
    out = np.empty((len(pairs), width))
    for i, (u, v) in enumerate(pairs):
        u, v = int(u), int(v)
        common = common_hashtags(u, v, index)
        feats = pair_features(u, v, index, common)
        edges = None
        if view is not None:
            edges = smallest_common_edges(u, v, index, view, exclude_incident, common, cache)
        out[i] = expand_transforms(feats, edges)
    return out
