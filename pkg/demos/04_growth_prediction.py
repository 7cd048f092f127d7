"""
Will a hashtag double? Reading the graph of its first adopters
==============================================================

For every hashtag with at least k adopters we take the first k, look at
the follow edges among them in the full, social and informational
views, and summarise each induced subgraph by its edge count,
singletons, components and largest component. A logistic model then
predicts whether the hashtag reaches 2k adopters.
"""

import numpy as np

from topiclink.synth import SynthSpec, generate
from topiclink.tasks import GrowthTaskSpec, decile_medians, growth_data, horizon_sweep, run_growth_task

synth = generate(SynthSpec(seed=11))
corpus = synth.to_corpus()
k = 20

data = growth_data(corpus, k)
print(f"{data.tags.size} hashtags have at least {k} adopters")

spec = GrowthTaskSpec(k=k, seed=11, feature_sets=("all", "full", "social", "informational"))
report = run_growth_task(spec, corpus, data=data)
print(f"doubling rate {report.n_positive / report.n_rows:.3f}")
for name, m in report.rows:
    print(f"  {name:14s} accuracy {m.accuracy:.3f}")
print(f"  {'majority':14s} accuracy {report.baselines['majority'].accuracy:.3f}")

# Growth is not monotone in early connectivity: tags spread along follow
# arcs and tags adopted at random both grow, while tags stuck in one
# community stall. The middle of the edge-count range is the slow part.
low, mid, high = decile_medians(corpus, k, "edges", data=data)
print(f"median final size by early-edge decile: low {low:g}, middle {mid:g}, high {high:g}")

# Sweeping an absolute target M instead of 2k.
sweep = horizon_sweep(corpus, k, [30, 40, 60, 80], data=data)
frac = sweep.series["fraction_reaching"]
acc = dict(zip(sweep.series["model.accuracy"].x.tolist(), sweep.series["model.accuracy"].y))
for m, f in zip(frac.x.astype(int).tolist(), frac.y):
    print(f"  M={m:3d}: {f:.2f} reach it, model accuracy {acc.get(float(m), np.nan):.3f}")
