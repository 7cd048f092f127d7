"""Experiment protocols: link prediction, growth prediction, horizons, curves."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import learn
from .corpus import Corpus, GraphView, ViewKind, all_views, derive_view
from .errors import (DegenerateLabels, FitError, InsufficientAdopters, SamplingError,
                     ValidationError, WindowError)
from .graphfeat import (GROWTH_FEATURE_NAMES, STRUCTURAL_FEATURES, VIEW_ORDER, expand_growth,
                        hashtag_density, view_features)
from .learn import Dataset, Metrics
from .setfeat import (BASE_FEATURES, EDGE_FEATURE, PAIR_FEATURE_NAMES,
                      PAIR_FEATURE_NAMES_WITH_EDGES, common_hashtags, pair_feature_matrix,
                      smallest_common_hashtag, transform_names)

log = logging.getLogger(__name__)

LINK_FEATURE_SETS = {"all": PAIR_FEATURE_NAMES}
LINK_FEATURE_SETS.update({b: tuple(transform_names(b)) for b in BASE_FEATURES})
LINK_FEATURE_SETS["all+edges"] = PAIR_FEATURE_NAMES_WITH_EDGES
LINK_FEATURE_SETS[EDGE_FEATURE] = tuple(transform_names(EDGE_FEATURE))

GROWTH_FEATURE_SETS = {"all": GROWTH_FEATURE_NAMES}
for _kind in VIEW_ORDER:
    GROWTH_FEATURE_SETS[_kind.value] = tuple(
        n for n in GROWTH_FEATURE_NAMES if n.startswith(_kind.value + "."))
for _kind in VIEW_ORDER:
    for _f in STRUCTURAL_FEATURES:
        _base = f"{_kind.value}.{_f}"
        GROWTH_FEATURE_SETS[_base] = tuple(
            n for n in GROWTH_FEATURE_NAMES if n == _base or n.startswith(_base + "_"))


def _check_sets(names, table):
    unknown = [n for n in names if n not in table]
    if unknown:
        raise ValidationError(f"unknown feature set(s): {', '.join(unknown)}")


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------


@dataclass
class TaskReport:
    task: str
    spec: dict
    rows: list                      # [(feature set, Metrics)]
    baselines: dict                 # name -> Metrics
    n_rows: int = 0
    n_positive: int = 0
    notes: list = field(default_factory=list)

    def metrics(self, feature_set: str) -> Metrics:
        for name, m in self.rows:
            if name == feature_set:
                return m
        raise KeyError(feature_set)


@dataclass(frozen=True)
class Series:
    x: np.ndarray
    y: np.ndarray
    kind: str = "curve"             # curve: x strictly increasing; window: non-decreasing; scatter: any
    labels: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValidationError("series x and y must be 1-D of equal length")
        if self.kind not in ("curve", "window", "scatter"):
            raise ValidationError(f"unknown series kind {self.kind!r}")
        dx = np.diff(x)
        if (self.kind == "curve" and np.any(dx <= 0)) or (self.kind == "window" and np.any(dx < 0)):
            raise ValidationError(f"{self.kind} series x values out of order")
        if self.labels and len(self.labels) != x.size:
            raise ValidationError("one label per point required")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass
class CurveReport:
    name: str
    series: dict
    meta: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# link prediction
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LinkTaskSpec:
    graph: str = "follow"
    threshold: int = 1
    mutual: bool = False
    sample_size: int = 20000
    feature_sets: tuple = tuple(LINK_FEATURE_SETS)
    seed: int = 0
    folds: int = 10
    lam: float = learn.DEFAULT_LAMBDA
    exclude_incident: bool = False
    shuffle_labels: bool = False

    def __post_init__(self):
        if self.graph not in ("follow", "at"):
            raise ValidationError("graph must be 'follow' or 'at'")
        if self.threshold < 1:
            raise ValidationError("threshold must be >= 1")
        object.__setattr__(self, "feature_sets", tuple(self.feature_sets))
        _check_sets(self.feature_sets, LINK_FEATURE_SETS)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["feature_sets"] = list(self.feature_sets)
        return d


def _require_graph(corpus: Corpus):
    if corpus.graph is None:
        raise ValidationError("this task needs an edge file")
    return corpus.graph


def link_view(corpus: Corpus, threshold: int, mutual: bool) -> GraphView:
    """View whose edges define 'connected': SOCIAL for mutual ties, else FULL."""
    kind = ViewKind.SOCIAL if mutual else ViewKind.FULL
    return derive_view(_require_graph(corpus), kind, threshold)


def is_connected(view: GraphView, u: int, v: int) -> bool:
    if view.directed:
        return view.has_edge(u, v) or view.has_edge(v, u)
    return view.has_edge(u, v)


def connected_coinciding_pairs(corpus: Corpus, view: GraphView) -> np.ndarray:
    """Unordered connected pairs (u < v) sharing at least one hashtag."""
    a = np.minimum(view.src, view.dst)
    b = np.maximum(view.src, view.dst)
    pairs = np.unique(np.column_stack([a, b]), axis=0)
    index = corpus.index
    keep = [bool(common_hashtags(int(u), int(v), index)) for u, v in pairs.tolist()]
    return pairs[np.array(keep, dtype=bool)] if len(keep) else pairs.reshape(0, 2)


class CoincidingPairSampler:
    """Uniform draws from the set of user pairs sharing at least one hashtag.

    A hashtag is picked with probability proportional to its number of
    user pairs, then a pair inside it; accepting with probability
    1/(number of common hashtags) removes the bias towards pairs that
    share many hashtags.
    """

    def __init__(self, index, rng: np.random.Generator):
        self.index = index
        self.rng = rng
        sizes = index.tag_sizes.astype(float)
        w = sizes * (sizes - 1) / 2
        if w.sum() <= 0:
            raise SamplingError("no hashtag has two users; no coinciding pairs exist", "negative")
        self.p = w / w.sum()

    def draw_many(self, n: int) -> tuple[np.ndarray, list]:
        """Draw ``n`` pairs (with replacement); returns pairs and their common lists."""
        rng, index = self.rng, self.index
        pairs, commons = [], []
        while len(pairs) < n:
            m = max(64, 2 * (n - len(pairs)))
            tags = rng.choice(self.p.size, size=m, p=self.p)
            r = rng.random((m, 3))
            for t, (x, y, acc) in zip(tags.tolist(), r.tolist()):
                members = index.tag_users[t]
                s = len(members)
                i = int(x * s)
                j = int(y * (s - 1))
                if j >= i:
                    j += 1
                u, v = sorted((members[i], members[j]))
                common = common_hashtags(u, v, index)
                if acc * len(common) < 1.0:
                    pairs.append((u, v))
                    commons.append(common)
                    if len(pairs) == n:
                        break
        return np.array(pairs, dtype=np.int64).reshape(-1, 2), commons


def sample_negative_pairs(corpus: Corpus, view: GraphView, n: int, rng) -> np.ndarray:
    """``n`` distinct coinciding pairs that are not connected in ``view``."""
    sampler = CoincidingPairSampler(corpus.index, rng)
    found: dict[tuple[int, int], None] = {}
    attempts = 0
    budget = 100 * n + 10000
    while len(found) < n:
        batch, _ = sampler.draw_many(min(n - len(found) + 64, 100000))
        for u, v in batch.tolist():
            attempts += 1
            if (u, v) not in found and not is_connected(view, u, v):
                found[(u, v)] = None
                if len(found) == n:
                    break
        if attempts > budget:
            raise SamplingError(
                f"only {len(found)} of {n} unconnected coinciding pairs found", "negative")
    return np.array(list(found), dtype=np.int64).reshape(-1, 2)


def link_dataset(spec: LinkTaskSpec, corpus: Corpus):
    """Balanced labelled pairs and their 21-column feature matrix."""
    view = link_view(corpus, spec.threshold, spec.mutual)
    half = spec.sample_size // 2
    if spec.sample_size <= 0 or spec.sample_size % 2:
        raise ValidationError("sample size must be a positive even number")
    positives = connected_coinciding_pairs(corpus, view)
    if len(positives) < half:
        raise SamplingError(
            f"positive class has {len(positives)} candidates, {half} required", "positive")
    rng = np.random.default_rng(spec.seed)
    negatives = sample_negative_pairs(corpus, view, half, rng)
    pool = np.concatenate([positives, negatives])
    labels = np.concatenate([np.ones(len(positives), int), np.zeros(len(negatives), int)])
    pairs, labels = learn.balanced_sample(pool, labels, spec.sample_size, rng)
    if spec.shuffle_labels:
        labels = rng.permutation(labels)
    X = pair_feature_matrix(pairs, corpus.index, view, spec.exclude_incident)
    if not np.all(X[:, 0] >= 1):
        raise AssertionError("sampled a pair with no common hashtag")
    return pairs, Dataset(X, labels, PAIR_FEATURE_NAMES_WITH_EDGES)


def run_link_task(spec: LinkTaskSpec, corpus: Corpus, threads: int = 1,
                  model: learn.Model | None = None) -> TaskReport:
    """Balanced link prediction; one cross-validated row per feature set.

    With ``model`` given, the pretrained model is scored on the sampled
    pairs instead of cross-validating.
    """
    pairs, data = link_dataset(spec, corpus)
    rows = []
    if model is not None:
        sub = data.select(model.names)
        rows.append(("loaded-model", learn.metrics(learn.predict(model, sub.X), sub.y)))
    else:
        for name in spec.feature_sets:
            cv = learn.kfold(data.select(LINK_FEATURE_SETS[name]), spec.folds, spec.seed,
                             spec.lam, threads=threads)
            rows.append((name, cv.mean))
    return TaskReport("link", spec.as_dict(), rows,
                      {"majority": learn.baseline_majority(data.y)},
                      n_rows=len(data), n_positive=int(data.y.sum()))


# ----------------------------------------------------------------------
# growth prediction
# ----------------------------------------------------------------------

DEFAULT_GROWTH_SETS = ("all", "social", "full", "informational") + tuple(
    f"{v.value}.{f}" for v in VIEW_ORDER for f in STRUCTURAL_FEATURES)


@dataclass(frozen=True)
class GrowthTaskSpec:
    k: int = 20
    target: str = "double"
    horizon: int | None = None
    graph: str = "follow"
    threshold: int = 1
    feature_sets: tuple = DEFAULT_GROWTH_SETS
    seed: int = 0
    folds: int = 10
    lam: float = learn.DEFAULT_LAMBDA
    shuffle_labels: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be positive")
        if self.target not in ("double", "horizon"):
            raise ValidationError("target must be 'double' or 'horizon'")
        if self.target == "horizon" and (self.horizon is None or self.horizon <= self.k):
            raise ValidationError("horizon target needs M > k")
        if self.graph not in ("follow", "at"):
            raise ValidationError("graph must be 'follow' or 'at'")
        object.__setattr__(self, "feature_sets", tuple(self.feature_sets))
        _check_sets(self.feature_sets, GROWTH_FEATURE_SETS)

    @property
    def target_size(self) -> int:
        return 2 * self.k if self.target == "double" else int(self.horizon)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["feature_sets"] = list(self.feature_sets)
        return d


@dataclass(frozen=True)
class GrowthData:
    k: int
    tags: np.ndarray            # hashtag ids, ascending
    structural: dict            # ViewKind -> (n, 4) int array
    X: np.ndarray               # (n, 33)
    final: np.ndarray           # final adopter counts

    def labels(self, target: int) -> np.ndarray:
        return (self.final >= target).astype(np.int64)


def growth_data(corpus: Corpus, k: int, threshold: int = 1) -> GrowthData:
    """Growth features of every hashtag with at least ``k`` adopters."""
    views = all_views(_require_graph(corpus), threshold)
    lengths = corpus.trace_lengths()
    tags = np.flatnonzero(lengths >= k)
    if tags.size == 0:
        raise InsufficientAdopters(f"no hashtag has at least {k} adopters")
    rows, struct = [], {kind: [] for kind in VIEW_ORDER}
    for h in tags.tolist():
        per_view = view_features(corpus.traces[h], k, views)
        for kind in VIEW_ORDER:
            struct[kind].append(per_view[kind].values())
        rows.append(expand_growth(per_view, k))
    return GrowthData(k, tags, {kd: np.array(v, dtype=np.int64) for kd, v in struct.items()},
                      np.array(rows), lengths[tags])


def run_growth_task(spec: GrowthTaskSpec, corpus: Corpus, threads: int = 1,
                    model: learn.Model | None = None, data: GrowthData | None = None) -> TaskReport:
    """Unbalanced growth prediction against the majority-vote baseline."""
    if data is None:
        data = growth_data(corpus, spec.k, spec.threshold)
    y = data.labels(spec.target_size)
    if spec.shuffle_labels:
        y = np.random.default_rng(spec.seed).permutation(y)
    if np.unique(y).size < 2:
        raise DegenerateLabels(
            f"all {y.size} eligible hashtags fall in one class for target {spec.target_size}")
    ds = Dataset(data.X, y, GROWTH_FEATURE_NAMES)
    rows = []
    if model is not None:
        sub = ds.select(model.names)
        rows.append(("loaded-model", learn.metrics(learn.predict(model, sub.X), sub.y)))
    else:
        for name in spec.feature_sets:
            cv = learn.kfold(ds.select(GROWTH_FEATURE_SETS[name]), spec.folds, spec.seed,
                             spec.lam, threads=threads)
            rows.append((name, cv.mean))
    return TaskReport("growth", spec.as_dict(), rows,
                      {"majority": learn.baseline_majority(y)},
                      n_rows=len(ds), n_positive=int(y.sum()))


def growth_model(spec: GrowthTaskSpec, corpus: Corpus, feature_set: str = "all",
                 data: GrowthData | None = None) -> learn.Model:
    if data is None:
        data = growth_data(corpus, spec.k, spec.threshold)
    ds = Dataset(data.X, data.labels(spec.target_size), GROWTH_FEATURE_NAMES)
    return learn.train(ds.select(GROWTH_FEATURE_SETS[feature_set]), spec.lam)


def link_model(spec: LinkTaskSpec, corpus: Corpus, feature_set: str = "all+edges") -> learn.Model:
    _, data = link_dataset(spec, corpus)
    return learn.train(data.select(LINK_FEATURE_SETS[feature_set]), spec.lam)


def horizon_sweep(corpus: Corpus, k: int, horizons, folds: int = 5, seed=0,
                  threshold: int = 1, lam: float = learn.DEFAULT_LAMBDA,
                  threads: int = 1, data: GrowthData | None = None) -> CurveReport:
    """Model, majority and random metrics as a function of the horizon M.

    Horizons where every hashtag falls in one class get baseline points
    only and are listed in ``meta['degenerate']``.
    """
    horizons = sorted(set(int(m) for m in horizons))
    if not horizons or horizons[0] < k:
        raise ValidationError("horizons must be >= k")
    if data is None:
        data = growth_data(corpus, k, threshold)
    ds = Dataset(data.X, np.zeros(len(data.tags), int), GROWTH_FEATURE_NAMES)
    pts: dict[str, list] = {}
    degenerate = []

    def add(name, m, value):
        pts.setdefault(name, []).append((m, value))

    for m in horizons:
        y = data.labels(m)
        rate = float(y.mean())
        add("fraction_reaching", m, rate)
        base = {"majority": learn.baseline_majority(y),
                "random": learn.baseline_random(y, rate, seed)}
        if np.unique(y).size == 2 and min(int(y.sum()), int(y.size - y.sum())) >= folds:
            base["model"] = learn.kfold(ds.with_labels(y), folds, seed, lam, threads=threads).mean
        else:
            degenerate.append(m)
        for method, met in base.items():
            for metric in ("accuracy", "precision", "recall", "f1"):
                add(f"{method}.{metric}", m, getattr(met, metric))
    series = {name: Series(np.array([p[0] for p in v], float), np.array([p[1] for p in v]))
              for name, v in pts.items()}
    return CurveReport("horizon", series, {"k": k, "folds": folds, "seed": seed,
                                           "threshold": threshold, "n_hashtags": int(data.tags.size),
                                           "degenerate": degenerate})


# ----------------------------------------------------------------------
# figure curves
# ----------------------------------------------------------------------


def fit_linkage_exponent(sizes, connected, bins: int = 20, min_count: int = 20):
    """Bin pairs by smallest-common-hashtag size and fit y ~ x**(-a).

    Bins are log-spaced; a bin sits at the harmonic mean of its sizes,
    which makes the binned estimate exact for y = c/x. Least squares on
    (ln x, ln y) over bins with at least ``min_count`` pairs and y > 0.
    Returns ``(x, y, counts, a)``.
    """
    sizes = np.asarray(sizes, dtype=float)
    connected = np.asarray(connected, dtype=float)
    if sizes.size == 0:
        raise FitError("no pairs to bin")
    lo, hi = sizes.min(), sizes.max()
    edges = np.geomspace(lo, hi + 1, bins + 1) if hi > lo else np.array([lo, lo + 1])
    which = np.clip(np.digitize(sizes, edges) - 1, 0, len(edges) - 2)
    xs, ys, ns = [], [], []
    for b in range(len(edges) - 1):
        sel = which == b
        n = int(sel.sum())
        if n < min_count:
            continue
        xs.append(1.0 / np.mean(1.0 / sizes[sel]))
        ys.append(connected[sel].mean())
        ns.append(n)
    xs, ys, ns = np.array(xs), np.array(ys), np.array(ns)
    if xs.size < 2:
        raise FitError(f"{xs.size} populated bin(s); at least 2 needed")
    pos = ys > 0
    if pos.sum() < 2:
        raise FitError("fewer than two bins with nonzero link probability")
    slope, _ = np.polyfit(np.log(xs[pos]), np.log(ys[pos]), 1)
    return xs, ys, ns, float(-slope)


def linkage_probability_curve(corpus: Corpus, threshold: int = 1, mutual: bool = False,
                              bins: int = 20, n_pairs: int = 100000, seed=0,
                              min_count: int = 20):
    """Link probability versus smallest common hashtag size over uniformly
    sampled coinciding pairs, with the fitted power-law exponent."""
    view = link_view(corpus, threshold, mutual)
    rng = np.random.default_rng(seed)
    pairs, commons = CoincidingPairSampler(corpus.index, rng).draw_many(n_pairs)
    sizes = corpus.index.tag_sizes
    smallest = np.array([sizes[smallest_common_hashtag(u, v, corpus.index, c)]
                         for (u, v), c in zip(pairs.tolist(), commons)])
    linked = np.array([is_connected(view, u, v) for u, v in pairs.tolist()])
    xs, ys, ns, a = fit_linkage_exponent(smallest, linked, bins, min_count)
    report = CurveReport("fig1", {"link_probability": Series(xs, ys)},
                         {"exponent": a, "bins": bins, "n_pairs": n_pairs, "seed": seed,
                          "min_count": min_count, "threshold": threshold, "mutual": mutual,
                          "bin_counts": ns.tolist()})
    return report, a


def density_scatter(corpus: Corpus, kind: ViewKind | str = ViewKind.FULL, threshold: int = 1,
                    top_n: int = 200) -> CurveReport:
    """(size, edge density) for the ``top_n`` most used hashtags."""
    view = derive_view(_require_graph(corpus), kind, threshold)
    sizes = corpus.index.tag_sizes
    eligible = np.flatnonzero(sizes >= 2)
    order = eligible[np.lexsort((eligible, -sizes[eligible]))][:top_n]
    order = order[np.lexsort((order, sizes[order]))]
    dens = np.array([hashtag_density(int(h), corpus.index, view) for h in order])
    labels = tuple(corpus.tags.label(int(h)) for h in order)
    return CurveReport("fig2", {"density": Series(sizes[order].astype(float), dens, "scatter", labels)},
                       {"view": ViewKind(kind).value, "threshold": threshold, "top_n": top_n})


def _feature_order(data: GrowthData, feature: str, kind: ViewKind):
    if feature not in STRUCTURAL_FEATURES:
        raise ValidationError(f"unknown structural feature {feature!r}")
    vals = data.structural[kind][:, STRUCTURAL_FEATURES.index(feature)]
    order = np.lexsort((data.tags, vals))
    return vals[order], data.final[order]


def _windows(values, final, window):
    if window < 1 or window % 2 == 0:
        raise ValidationError("window must be a positive odd number")
    if values.size < window:
        raise WindowError(f"{values.size} hashtags, window of {window} needs more")
    centers = values[window // 2: values.size - window // 2].astype(float)
    return centers, sliding_window_view(final, window)


def sliding_median_curves(corpus: Corpus, k: int, feature: str = "edges", window: int = 101,
                          threshold: int = 1, kind: ViewKind = ViewKind.FULL,
                          data: GrowthData | None = None) -> CurveReport:
    """Median final size over a sliding window of hashtags sorted by ``feature``."""
    data = growth_data(corpus, k, threshold) if data is None else data
    vals, final = _feature_order(data, feature, ViewKind(kind))
    x, win = _windows(vals, final, window)
    y = np.median(win, axis=1)
    return CurveReport(f"fig3-median-{feature}", {"median_final": Series(x, y, "window")},
                       {"k": k, "feature": feature, "window": window, "stride": 1,
                        "view": ViewKind(kind).value, "threshold": threshold})


def exceed_probability_curves(corpus: Corpus, k: int, K_list, feature: str = "edges",
                              window: int = 101, threshold: int = 1,
                              kind: ViewKind = ViewKind.FULL,
                              data: GrowthData | None = None) -> CurveReport:
    """Fraction of windowed hashtags whose final size reaches each K."""
    data = growth_data(corpus, k, threshold) if data is None else data
    vals, final = _feature_order(data, feature, ViewKind(kind))
    x, win = _windows(vals, final, window)
    series = {f"K={K}": Series(x, (win >= K).mean(axis=1), "window") for K in sorted(K_list)}
    return CurveReport(f"fig3-exceed-{feature}", series,
                       {"k": k, "feature": feature, "window": window, "stride": 1,
                        "K": sorted(int(K) for K in K_list), "view": ViewKind(kind).value,
                        "threshold": threshold})


def decile_medians(corpus: Corpus, k: int, feature: str = "edges", threshold: int = 1,
                   kind: ViewKind = ViewKind.FULL, data: GrowthData | None = None):
    """Median final size in the bottom, middle (45-55%) and top deciles of ``feature``."""
    data = growth_data(corpus, k, threshold) if data is None else data
    _, final = _feature_order(data, feature, ViewKind(kind))
    n = final.size
    lo = final[: max(1, n // 10)]
    mid = final[int(0.45 * n): max(int(0.45 * n) + 1, int(0.55 * n))]
    hi = final[n - max(1, n // 10):]
    return float(np.median(lo)), float(np.median(mid)), float(np.median(hi))


def ccdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted values and the fraction of samples >= each."""
    v = np.sort(np.asarray(values))
    xs, first = np.unique(v, return_index=True)
    return xs.astype(float), (v.size - first) / v.size


def feature_ccdf(corpus: Corpus, k_list, threshold: int = 1,
                 kind: ViewKind = ViewKind.FULL) -> CurveReport:
    series = {}
    counts = {}
    for k in sorted(k_list):
        data = growth_data(corpus, k, threshold)
        counts[int(k)] = int(data.tags.size)
        for j, f in enumerate(STRUCTURAL_FEATURES):
            x, y = ccdf(data.structural[ViewKind(kind)][:, j])
            series[f"k={k}.{f}"] = Series(x, y)
    return CurveReport("fig4", series, {"k": sorted(int(k) for k in k_list), "counts": counts,
                                        "view": ViewKind(kind).value, "threshold": threshold})
