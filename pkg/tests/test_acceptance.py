"""Acceptance criteria, each at its stated tolerance.

Every test appends one PASS/FAIL line to the session summary. Criterion
8 is a reported diagnostic and never fails the run.
"""

import math
import time
from collections import deque

import numpy as np
import pytest

from topiclink.cli import main
from topiclink.corpus import GraphView, ViewKind, all_views, corpus_from_records
from topiclink.graphfeat import induce, induce_members, structural_features, view_features
from topiclink.learn import binomial_halfwidth, logistic_gradient, logistic_loss
from topiclink.setfeat import pair_features, smallest_common_edges
from topiclink.synth import SynthSpec, generate, power_law_corpus
from topiclink.tasks import (GrowthTaskSpec, LinkTaskSpec, decile_medians,
                             linkage_probability_curve, run_growth_task, run_link_task)

from conftest import ACCEPTANCE_LINES, random_corpus

LINK_SETS = ("all", "smallest_size", "largest_size", "all+edges")
GROWTH_SETS = ("all", "full", "social")


def record(n, title, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n}. [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
    return ok


# ----------------------------------------------------------------------
# shared corpora and runs
# ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def random_corpora():
    rng = np.random.default_rng(2024)
    out = []
    for _ in range(50):
        n_users = int(rng.integers(2, 51))
        n_tags = int(rng.integers(1, 31))
        out.append(random_corpus(rng, n_users, n_tags, p_tag=float(rng.uniform(0.05, 0.4)),
                                 p_edge=float(rng.uniform(0.0, 0.3))))
    return out


@pytest.fixture(scope="module")
def link_run():
    t0 = time.perf_counter()
    corpus = generate(SynthSpec(seed=7, n_users=5000)).to_corpus()
    spec = LinkTaskSpec(sample_size=20000, feature_sets=LINK_SETS, seed=7, folds=10)
    report = run_link_task(spec, corpus)
    return corpus, report, time.perf_counter() - t0


@pytest.fixture(scope="module")
def growth_corpus():
    return generate(SynthSpec(seed=11)).to_corpus()


@pytest.fixture(scope="module")
def growth_run(growth_corpus):
    spec = GrowthTaskSpec(k=20, feature_sets=GROWTH_SETS, seed=11, folds=10)
    return run_growth_task(spec, growth_corpus)


# ----------------------------------------------------------------------
# oracles
# ----------------------------------------------------------------------


def brute_features(u, v, index):
    common = [h for h in range(index.n_tags)
              if u in index.users_of(h) and v in index.users_of(h)]
    sizes = [len(index.users_of(h)) for h in common]
    return (len(sizes), min(sizes), max(sizes), sum(sizes) / len(sizes),
            sum(1 / s for s in sizes), sum(1 / math.log(s) for s in sizes)), common


def brute_edges(u, v, index, arcs, common, exclude_incident):
    """Count view edges among the smallest common hashtag's members by
    testing every member pair against the view's arc set."""
    h = min(common, key=lambda t: (len(index.users_of(t)), t))
    members = index.users_of(h)
    n = 0
    for a in members:
        for b in members:
            if (a, b) not in arcs:
                continue
            if exclude_incident and {a, b} & {u, v}:
                continue
            if not exclude_incident and {a, b} == {u, v}:
                continue
            n += 1
    return n


def arc_set(view):
    """Directed arcs of a view; an undirected edge is kept once (a < b)."""
    if view.kind is ViewKind.SOCIAL:
        return {tuple(sorted(e)) for e in view.edges()}
    return set(view.edges())


def bfs_components(members, src, dst):
    adj = {m: [] for m in members}
    for a, b in zip(src, dst):
        adj[a].append(b)
        adj[b].append(a)
    seen, sizes = set(), []
    for m in members:
        if m in seen:
            continue
        seen.add(m)
        q, n = deque([m]), 0
        while q:
            x = q.popleft()
            n += 1
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    q.append(y)
        sizes.append(n)
    return len(sizes), max(sizes)


def central_difference(theta, X, y, lam, h=1e-6):
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (logistic_loss(theta + e, X, y, lam) - logistic_loss(theta - e, X, y, lam)) / (2 * h)
    return g


# ----------------------------------------------------------------------
# criteria
# ----------------------------------------------------------------------


def test_criterion_01_oracle_equivalence(random_corpora):
    t0 = time.perf_counter()
    worst, checked, mismatches = 0.0, 0, 0
    for c in random_corpora:
        idx = c.index
        views = [(v, arc_set(v)) for v in (GraphView(c.graph, k) for k in ViewKind)]
        for u in range(idx.n_users):
            for v in range(u + 1, idx.n_users):
                if not set(idx.tags_of(u)) & set(idx.tags_of(v)):
                    continue
                want, common = brute_features(u, v, idx)
                got = pair_features(u, v, idx).values()
                worst = max(worst, max(abs(a - b) for a, b in zip(got, want)))
                for view, arcs in views:
                    for excl in (False, True):
                        mismatches += (smallest_common_edges(u, v, idx, view, excl)
                                       != brute_edges(u, v, idx, arcs, common, excl))
                checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and mismatches == 0 and elapsed < 10 and checked > 0
    record(1, "oracle equivalence", ok,
           f"{checked} pairs, max abs diff {worst:.1e}, {mismatches} edge mismatches, {elapsed:.1f}s")
    assert ok


def test_criterion_02_component_oracle():
    rng = np.random.default_rng(99)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 201))
        p = float(rng.uniform(0, min(1.0, 3.0 / n)))
        a = rng.integers(0, n, size=rng.binomial(n * (n - 1), p))
        b = rng.integers(0, n, size=a.size)
        keep = a != b
        edges = [(str(x), str(y)) for x, y in zip(a[keep].tolist(), b[keep].tolist())]
        c = corpus_from_records([("h", str(u), 0) for u in range(n)], edges)
        view = GraphView(c.graph, ViewKind(rng.choice([k.value for k in ViewKind])))
        m = int(rng.integers(1, n + 1))
        members = rng.choice(n, size=m, replace=False)
        sub = induce_members(members, view)
        f = structural_features(sub)
        ref = bfs_components(members.tolist(), sub.src.tolist(), sub.dst.tolist())
        bad += (f.components, f.max_component) != ref
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 10
    record(2, "component oracle", ok, f"100 subgraphs, {bad} mismatches, {elapsed:.1f}s")
    assert ok


def test_criterion_03_view_identity(random_corpora, link_run, growth_corpus):
    violations = checked = 0
    for c in random_corpora:
        views = all_views(c.graph)
        for tr in c.traces.values():
            for k in range(1, len(tr) + 1):
                f = view_features(tr, k, views)
                checked += 1
                violations += f[ViewKind.FULL].edges != (f[ViewKind.INFORMATIONAL].edges
                                                         + 2 * f[ViewKind.SOCIAL].edges)
    for c in (link_run[0], growth_corpus):
        views = all_views(c.graph)
        for tr in c.traces.values():
            for k in (1, 2, 5, 10, 20, 40):
                if len(tr) >= k:
                    f = view_features(tr, k, views)
                    checked += 1
                    violations += f[ViewKind.FULL].edges != (f[ViewKind.INFORMATIONAL].edges
                                                             + 2 * f[ViewKind.SOCIAL].edges)
    ok = violations == 0
    record(3, "view identity", ok, f"{checked} induced subgraphs, {violations} violations")
    assert ok


def test_criterion_04_gradient_check():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        n, d = int(rng.integers(2, 51)), int(rng.integers(1, 21))
        X = rng.normal(size=(n, d)) * rng.uniform(0.1, 3)
        y = (rng.random(n) < 0.5).astype(float)
        theta = rng.normal(size=d + 1)
        lam = float(rng.uniform(0, 1))
        g = logistic_gradient(theta, X, y, lam)
        fd = central_difference(theta, X, y, lam)
        worst = max(worst, np.linalg.norm(g - fd) / max(np.linalg.norm(g), np.linalg.norm(fd), 1e-12))
    ok = worst <= 1e-6
    record(4, "gradient check", ok, f"100 instances, max relative error {worst:.2e}")
    assert ok


def test_criterion_05_planted_link_signal(link_run):
    _, report, elapsed = link_run
    acc = {name: report.metrics(name).accuracy for name in LINK_SETS}
    ok = (acc["all"] >= 0.5 + 0.15 and acc["largest_size"] < acc["smallest_size"]
          and elapsed < 120)
    record(5, "planted link signal", ok,
           f"all {acc['all']:.3f} (baseline 0.5), largest {acc['largest_size']:.3f} < "
           f"smallest {acc['smallest_size']:.3f}, {elapsed:.1f}s")
    assert ok


def test_criterion_06_edge_correction_lift(link_run):
    _, report, _ = link_run
    base, plus = report.metrics("all").accuracy, report.metrics("all+edges").accuracy
    ok = plus >= base - 0.01
    record(6, "edge-correction lift", ok, f"+edges {plus:.3f} vs all {base:.3f}")
    assert ok


def test_criterion_07_planted_growth_signal(growth_run):
    acc = {name: growth_run.metrics(name).accuracy for name in GROWTH_SETS}
    major = growth_run.baselines["majority"].accuracy
    ok = acc["all"] >= major + 0.05 and acc["social"] <= acc["full"] + 0.02
    record(7, "planted growth signal", ok,
           f"all {acc['all']:.3f} vs majority {major:.3f}; social {acc['social']:.3f} "
           f"vs full {acc['full']:.3f} ({growth_run.n_rows} hashtags)")
    assert ok


def test_criterion_08_interior_minimum(growth_corpus):
    low, mid, high = decile_medians(growth_corpus, 20, "edges")
    ok = mid < low and mid < high
    record(8, "interior minimum (diagnostic)", ok,
           f"median final size by edge decile: low {low:g}, middle {mid:g}, high {high:g}")


def test_criterion_09_power_law_refit():
    corpus = power_law_corpus(n_users=200000, exponent=1.0, seed=0)
    _, a = linkage_probability_curve(corpus, n_pairs=1000000, seed=0)
    ok = abs(a - 1.0) <= 0.02
    record(9, "power-law refit", ok, f"fitted exponent {a:.4f} (target 1.00 +/- 0.02)")
    assert ok


def test_criterion_10_null_signal(link_run, growth_corpus):
    corpus = link_run[0]
    link = run_link_task(LinkTaskSpec(sample_size=20000, feature_sets=("all",), seed=7,
                                      folds=10, shuffle_labels=True), corpus)
    growth = run_growth_task(GrowthTaskSpec(k=20, feature_sets=("all",), seed=11, folds=10,
                                            shuffle_labels=True), growth_corpus)
    la = link.metrics("all").accuracy
    lb = link.baselines["majority"].accuracy
    lw = binomial_halfwidth(link.n_rows, 0.5)
    ga = growth.metrics("all").accuracy
    gb = growth.baselines["majority"].accuracy
    gw = binomial_halfwidth(growth.n_rows, gb)
    ok = abs(la - lb) <= lw and abs(ga - gb) <= gw
    record(10, "null-signal guard", ok,
           f"link {la:.3f} vs {lb:.3f} (+/-{lw:.3f}); growth {ga:.3f} vs {gb:.3f} (+/-{gw:.3f})")
    assert ok


def test_criterion_11_determinism(tmp_path):
    data = tmp_path / "data"
    assert main(["synth", "--seed", "5", "--n-users", "1000", "--n-tags", "200",
                 "--out", str(data)]) == 0
    files = ["--adoptions", str(data / "adoptions.tsv"), "--edges", str(data / "edges.tsv")]
    runs = {
        "synth": ["synth", "--seed", "6", "--n-users", "300", "--n-tags", "20"],
        "stats": ["stats"] + files,
        "link-predict": ["link-predict", "--sample", "2000", "--folds", "5", "--seed", "3"] + files,
        "growth-predict": ["growth-predict", "--k", "10", "--folds", "5"] + files,
        "horizon": ["horizon", "--k", "10", "--horizons", "15", "20", "40", "80"] + files,
        "curves fig1": ["curves", "fig1", "--pairs", "20000", "--bins", "10"] + files,
        "curves fig2": ["curves", "fig2"] + files,
        "curves fig3": ["curves", "fig3", "--k", "10", "--window", "21"] + files,
        "curves fig4": ["curves", "fig4", "--k-list", "10", "20"] + files,
    }
    differing = []
    for name, argv in runs.items():
        first = tmp_path / name.replace(" ", "_") / "a"
        second = first.parent / "b"
        codes = (main(argv + ["--out", str(first)]),
                 main(["replay", str(first / "replay.json"), "--out", str(second)]))
        names_a = sorted(p.name for p in first.iterdir())
        names_b = sorted(p.name for p in second.iterdir())
        same = codes == (0, 0) and names_a == names_b and all(
            (first / n).read_bytes() == (second / n).read_bytes() for n in names_a)
        if not same:
            differing.append(name)
    ok = not differing
    record(11, "determinism", ok,
           f"{len(runs)} runs replayed, differing: {', '.join(differing) or 'none'}")
    assert ok
