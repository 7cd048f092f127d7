"""Ingestion of edge lists and adoption logs, graph views, corpus statistics.

Users and hashtags carry arbitrary string labels externally. Internally
they are dense integers assigned in sorted label order (numeric labels
sort numerically), so the same set of input lines always produces the
same structures regardless of line order.
"""

from __future__ import annotations

import enum
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, UnknownIdError, ValidationError

log = logging.getLogger(__name__)


def _label_key(label: str):
    try:
        return (0, int(label), label)
    except ValueError:
        return (1, 0, label)


class IdMap:
    """Immutable bijection between external labels and dense ids."""

    def __init__(self, labels: Sequence[str] = ()):
        self.labels: tuple[str, ...] = tuple(labels)
        self._ids = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._ids) != len(self.labels):
            raise ValidationError("duplicate labels in IdMap")

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "IdMap":
        return cls(sorted(set(labels), key=_label_key))

    def extended(self, labels: Iterable[str]) -> "IdMap":
        """Return a map with unseen labels appended in sorted order."""
        new = {lab for lab in labels if lab not in self._ids}
        if not new:
            return self
        return IdMap(self.labels + tuple(sorted(new, key=_label_key)))

    def id(self, label: str) -> int:
        try:
            return self._ids[label]
        except KeyError:
            raise UnknownIdError(f"unknown label {label!r}") from None

    def label(self, i: int) -> str:
        return self.labels[i]

    def __contains__(self, label) -> bool:
        return label in self._ids

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, IdMap) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)


# ----------------------------------------------------------------------
# graphs
# ----------------------------------------------------------------------


def _csr(n: int, src: np.ndarray, dst: np.ndarray):
    order = np.lexsort((dst, src))
    indices = dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


class DirectedWeightedGraph:
    """Directed graph with integer arc weights over a user id space.

    Arcs are stored sorted by (src, dst); there are no self-loops and no
    duplicate arcs.
    """

    def __init__(self, users: IdMap, src, dst, weight, skipped_self_loops: int = 0):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.int64)
        n = len(users)
        if not (src.shape == dst.shape == weight.shape):
            raise ValidationError("arc arrays must have equal length")
        if src.size:
            if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n:
                raise ValidationError("arc endpoint outside the user id space")
            if np.any(src == dst):
                raise ValidationError("self-loops are not allowed")
            if np.any(weight < 0):
                raise ValidationError("negative arc weight")
        order = np.lexsort((dst, src))
        src, dst, weight = src[order], dst[order], weight[order]
        keys = src * n + dst
        if keys.size > 1 and np.any(keys[1:] == keys[:-1]):
            raise ValidationError("duplicate arcs")
        self.users = users
        self.src, self.dst, self.weight = src, dst, weight
        self.keys = keys
        self.skipped_self_loops = skipped_self_loops
        for a in (self.src, self.dst, self.weight, self.keys):
            a.flags.writeable = False
        self._out = None
        self._in = None

    @property
    def node_count(self) -> int:
        return len(self.users)

    @property
    def arc_count(self) -> int:
        return int(self.src.size)

    def arcs(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def arc_weights(self) -> dict[tuple[int, int], int]:
        return dict(zip(zip(self.src.tolist(), self.dst.tolist()), self.weight.tolist()))

    def out_neighbors(self, u: int) -> np.ndarray:
        if self._out is None:
            self._out = _csr(self.node_count, self.src, self.dst)
        indptr, indices = self._out
        return indices[indptr[u]:indptr[u + 1]]

    def in_neighbors(self, u: int) -> np.ndarray:
        if self._in is None:
            self._in = _csr(self.node_count, self.dst, self.src)
        indptr, indices = self._in
        return indices[indptr[u]:indptr[u + 1]]

    def weight_of(self, u: int, v: int) -> int:
        key = u * self.node_count + v
        i = np.searchsorted(self.keys, key)
        if i < self.keys.size and self.keys[i] == key:
            return int(self.weight[i])
        return 0


class ViewKind(str, enum.Enum):
    FULL = "full"
    SOCIAL = "social"
    INFORMATIONAL = "informational"


class GraphView:
    """Edges of a base graph filtered by weight threshold and reciprocity.

    FULL and INFORMATIONAL hold directed arcs; SOCIAL holds undirected
    edges stored once with ``src < dst``.
    """

    def __init__(self, base: DirectedWeightedGraph, kind: ViewKind | str, threshold: int = 1):
        kind = ViewKind(kind)
        if int(threshold) < 1:
            raise ValidationError("view threshold must be >= 1")
        self.base = base
        self.kind = kind
        self.threshold = int(threshold)
        n = base.node_count
        keep = base.weight >= self.threshold
        src, dst = base.src[keep], base.dst[keep]
        keys = src * n + dst
        recip = np.isin(dst * n + src, keys)
        if kind is ViewKind.SOCIAL:
            sel = recip & (src < dst)
        elif kind is ViewKind.INFORMATIONAL:
            sel = ~recip
        else:
            sel = np.ones(src.size, dtype=bool)
        self.src = src[sel]
        self.dst = dst[sel]
        self.keys = self.src * n + self.dst
        for a in (self.src, self.dst, self.keys):
            a.flags.writeable = False
        if kind is ViewKind.SOCIAL:
            a = np.concatenate([self.src, self.dst])
            b = np.concatenate([self.dst, self.src])
        else:
            a, b = self.src, self.dst
        self._indptr, self._indices = _csr(n, a, b)

    @property
    def directed(self) -> bool:
        return self.kind is not ViewKind.SOCIAL

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    @property
    def arc_count(self) -> int:
        """Edge count with each SOCIAL edge counted as two arcs."""
        return self.edge_count * (1 if self.directed else 2)

    def edges(self) -> set:
        pairs = zip(self.src.tolist(), self.dst.tolist())
        if self.directed:
            return set(pairs)
        return {frozenset(p) for p in pairs}

    def neighbors(self, u: int) -> np.ndarray:
        """Out-neighbours for directed views, all neighbours for SOCIAL."""
        return self._indices[self._indptr[u]:self._indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if not self.directed and u > v:
            u, v = v, u
        key = u * self.base.node_count + v
        i = np.searchsorted(self.keys, key)
        return bool(i < self.keys.size and self.keys[i] == key)

    def pair_edge_count(self, u: int, v: int) -> int:
        """Number of view edges whose endpoint set is exactly {u, v}."""
        if u == v:
            return 0
        if self.directed:
            return int(self.has_edge(u, v)) + int(self.has_edge(v, u))
        return int(self.has_edge(u, v))

    def internal_edges(self, members) -> tuple[np.ndarray, np.ndarray]:
        """Edges with both endpoints in ``members``, walking member adjacency."""
        members = np.unique(np.asarray(members, dtype=np.int64))
        if members.size == 0:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        starts = self._indptr[members]
        lengths = self._indptr[members + 1] - starts
        total = int(lengths.sum())
        src = np.repeat(members, lengths)
        # flat CSR positions: each member's run starts at its indptr offset
        first = np.cumsum(lengths) - lengths
        dst = self._indices[np.repeat(starts - first, lengths) + np.arange(total)]
        pos = np.minimum(np.searchsorted(members, dst), members.size - 1)
        keep = members[pos] == dst
        if not self.directed:
            keep &= src < dst
        return src[keep], dst[keep]

    def internal_edge_count(self, members) -> int:
        return int(self.internal_edges(members)[0].size)


def derive_view(graph: DirectedWeightedGraph, kind: ViewKind | str, threshold: int = 1) -> GraphView:
    return GraphView(graph, kind, threshold)


def all_views(graph: DirectedWeightedGraph, threshold: int = 1) -> dict[ViewKind, GraphView]:
    return {k: GraphView(graph, k, threshold) for k in ViewKind}


# ----------------------------------------------------------------------
# affiliation index and traces
# ----------------------------------------------------------------------


class AffiliationIndex:
    """Bipartite user/hashtag incidence with both directions sorted."""

    def __init__(self, users: IdMap, tags: IdMap, incidences: Iterable[tuple[int, int]]):
        self.users = users
        self.tags = tags
        ut = defaultdict(set)
        tu = defaultdict(set)
        for u, h in incidences:
            ut[u].add(h)
            tu[h].add(u)
        self.user_tags: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(ut.get(u, ()))) for u in range(len(users))
        )
        self.tag_users: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(tu.get(h, ()))) for h in range(len(tags))
        )
        self.tag_sizes = np.array([len(m) for m in self.tag_users], dtype=np.int64)
        self.tag_sizes.flags.writeable = False

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @property
    def incidence_count(self) -> int:
        return int(self.tag_sizes.sum())

    def tags_of(self, u: int) -> tuple[int, ...]:
        if not 0 <= u < len(self.user_tags):
            raise UnknownIdError(f"unknown user id {u}")
        return self.user_tags[u]

    def users_of(self, h: int) -> tuple[int, ...]:
        if not 0 <= h < len(self.tag_users):
            raise UnknownIdError(f"unknown hashtag id {h}")
        return self.tag_users[h]


@dataclass(frozen=True)
class AdoptionTrace:
    hashtag: int
    users: np.ndarray
    times: np.ndarray

    def __len__(self) -> int:
        return int(self.users.size)

    def first(self, k: int) -> np.ndarray:
        return self.users[:k]


# ----------------------------------------------------------------------
# file ingestion
# ----------------------------------------------------------------------


def _records(path, comments: bool = True):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or (comments and line.startswith("#")):
                continue
            yield lineno, line.split("\t")


def _is_int(text) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True


def _parse_int(text, path, lineno, what):
    try:
        return int(text)
    except ValueError:
        raise ParseError(path, lineno, f"{what} is not an integer: {text!r}") from None


def read_edge_records(path) -> list[tuple[str, str, int, int]]:
    """Parse an edge file into ``(src, dst, weight, lineno)`` records."""
    out = []
    for lineno, fields in _records(path):
        if len(fields) not in (2, 3) or not fields[0] or not fields[1]:
            raise ParseError(path, lineno, "expected 'src<TAB>dst[<TAB>weight]'")
        w = 1
        if len(fields) == 3:
            w = _parse_int(fields[2], path, lineno, "weight")
            if w < 0:
                raise ParseError(path, lineno, f"negative weight {w}")
        out.append((fields[0], fields[1], w, lineno))
    return out


def read_adoption_records(path) -> list[tuple[str, str, int]]:
    """Parse an adoption file into ``(hashtag, user, timestamp)`` records.

    Hashtags usually start with ``#``, so a ``#`` line is a comment only
    when it is not a well-formed record.
    """
    out = []
    for lineno, fields in _records(path, comments=False):
        if fields[0].startswith("#") and not (len(fields) == 3 and fields[1]
                                              and _is_int(fields[2])):
            continue
        if len(fields) != 3 or not fields[0] or not fields[1]:
            raise ParseError(path, lineno, "expected 'hashtag<TAB>user<TAB>timestamp'")
        t = _parse_int(fields[2], path, lineno, "timestamp")
        out.append((fields[0], fields[1], t))
    return out


def build_graph(records, users: IdMap, threshold: int = 1) -> DirectedWeightedGraph:
    """Sum duplicate arcs, drop self-loops, keep arcs with summed weight >= threshold."""
    if int(threshold) < 1:
        raise ValidationError("threshold must be a positive integer")
    totals: dict[tuple[int, int], int] = defaultdict(int)
    loops = 0
    for rec in records:
        s, d, w = rec[0], rec[1], rec[2]
        if s == d:
            loops += 1
            continue
        totals[(users.id(s), users.id(d))] += w
    if loops:
        log.warning("skipped %d self-loop record(s)", loops)
    kept = [(s, d, w) for (s, d), w in totals.items() if w >= threshold]
    if kept:
        src, dst, wt = map(list, zip(*kept))
    else:
        src, dst, wt = [], [], []
    return DirectedWeightedGraph(users, src, dst, wt, skipped_self_loops=loops)


def load_edges(path, threshold: int = 1, users: IdMap | None = None) -> DirectedWeightedGraph:
    """Load a tab-separated edge file.

    When ``users`` is given, its ids are preserved and labels first seen
    in this file are appended; otherwise the id space is exactly the
    labels of the file.
    """
    records = read_edge_records(path)
    labels = [r[0] for r in records] + [r[1] for r in records]
    users = IdMap.from_labels(labels) if users is None else users.extended(labels)
    return build_graph(records, users, threshold)


def build_adoptions(records, users: IdMap, tags: IdMap):
    first: dict[tuple[int, int], int] = {}
    for tag, user, t in records:
        key = (tags.id(tag), users.id(user))
        if key not in first or t < first[key]:
            first[key] = t
    index = AffiliationIndex(users, tags, ((u, h) for h, u in first))
    per_tag = defaultdict(list)
    for (h, u), t in first.items():
        per_tag[h].append((t, u))
    traces = {}
    for h in range(len(tags)):
        rows = sorted(per_tag.get(h, ()))
        traces[h] = AdoptionTrace(
            h,
            np.array([u for _, u in rows], dtype=np.int64),
            np.array([t for t, _ in rows], dtype=np.int64),
        )
    return index, traces


def load_adoptions(path, users: IdMap | None = None):
    """Load an adoption log into ``(AffiliationIndex, {hashtag id: AdoptionTrace})``."""
    records = read_adoption_records(path)
    labels = [r[1] for r in records]
    users = IdMap.from_labels(labels) if users is None else users.extended(labels)
    tags = IdMap.from_labels(r[0] for r in records)
    return build_adoptions(records, users, tags)


@dataclass(frozen=True)
class Corpus:
    """Everything one run needs: ids, affiliation index, traces and a graph."""

    users: IdMap
    tags: IdMap
    index: AffiliationIndex
    traces: dict
    graph: DirectedWeightedGraph | None = None
    meta: dict = field(default_factory=dict)

    def trace_lengths(self) -> np.ndarray:
        return np.array([len(self.traces[h]) for h in range(len(self.tags))], dtype=np.int64)


def load_corpus(adoptions_path, edges_path=None, threshold: int = 1) -> Corpus:
    """Load an adoption log and optional edge file over one shared id space."""
    adoptions = read_adoption_records(adoptions_path)
    edges = read_edge_records(edges_path) if edges_path is not None else []
    users = IdMap.from_labels(
        [r[1] for r in adoptions] + [r[0] for r in edges] + [r[1] for r in edges]
    )
    tags = IdMap.from_labels(r[0] for r in adoptions)
    index, traces = build_adoptions(adoptions, users, tags)
    graph = build_graph(edges, users, threshold) if edges_path is not None else None
    meta = {"adoptions": str(adoptions_path), "edges": None if edges_path is None else str(edges_path),
            "threshold": int(threshold)}
    return Corpus(users, tags, index, traces, graph, meta)


def corpus_from_records(adoptions, edges=(), threshold: int = 1) -> Corpus:
    """In-memory counterpart of :func:`load_corpus`; records use string labels."""
    adoptions = [(str(h), str(u), int(t)) for h, u, t in adoptions]
    edges = [(str(e[0]), str(e[1]), int(e[2]) if len(e) > 2 else 1) for e in edges]
    users = IdMap.from_labels(
        [r[1] for r in adoptions] + [r[0] for r in edges] + [r[1] for r in edges]
    )
    tags = IdMap.from_labels(r[0] for r in adoptions)
    index, traces = build_adoptions(adoptions, users, tags)
    graph = build_graph(edges, users, threshold)
    return Corpus(users, tags, index, traces, graph, {"threshold": int(threshold)})


# ----------------------------------------------------------------------
# statistics
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusStats:
    user_count: int
    hashtag_count: int
    incidence_count: int
    mean_users_per_hashtag: float
    mean_hashtags_per_user: float
    registered_users: int = 0
    arc_counts: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "user_count": self.user_count,
            "hashtag_count": self.hashtag_count,
            "incidence_count": self.incidence_count,
            "mean_users_per_hashtag": self.mean_users_per_hashtag,
            "mean_hashtags_per_user": self.mean_hashtags_per_user,
            "registered_users": self.registered_users,
        }
        for name, n in self.arc_counts.items():
            d[f"arcs.{name}"] = n
        return d


def corpus_stats(index: AffiliationIndex, graphs=None) -> CorpusStats:
    """Counts and means over users that used at least one hashtag.

    ``graphs`` is a mapping name -> graph (or a list, named by position).
    """
    if graphs is None:
        graphs = {}
    elif not isinstance(graphs, dict):
        graphs = {f"graph{i}": g for i, g in enumerate(graphs)}
    inc = index.incidence_count
    n_users = sum(1 for t in index.user_tags if t)
    n_tags = sum(1 for m in index.tag_users if m)
    return CorpusStats(
        user_count=n_users,
        hashtag_count=n_tags,
        incidence_count=inc,
        mean_users_per_hashtag=inc / n_tags if n_tags else 0.0,
        mean_hashtags_per_user=inc / n_users if n_users else 0.0,
        registered_users=index.n_users,
        arc_counts={name: g.arc_count for name, g in graphs.items()},
    )
