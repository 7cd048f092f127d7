"""
How link probability falls with hashtag size
============================================

For pairs drawn uniformly among users who share a hashtag, we bin by the
size x of their smallest shared hashtag and fit P(link) ~ x^-a on a
log-log scale. On a corpus built so that pairs inside a hashtag of size
x link with probability 1/x, the fit should return a close to 1.
"""

import numpy as np

from topiclink.synth import power_law_corpus
from topiclink.tasks import linkage_probability_curve

corpus = power_law_corpus(n_users=100000, exponent=1.0, max_size=500, seed=0)
print(f"{corpus.index.n_tags} hashtags, {corpus.graph.arc_count} follow arcs")

report, a = linkage_probability_curve(corpus, n_pairs=300000, bins=15, seed=0)
s = report.series["link_probability"]
print(f"fitted exponent a = {a:.3f}")
print("   size   P(link)   x*P(link)")
for x, y in zip(s.x, s.y):
    print(f"{x:7.1f}  {y:8.5f}  {x * y:8.3f}")

# x*P(link) hovering near 1 across the bins is the same statement as a = 1.
print("spread of x*P(link):", np.round(np.ptp(s.x * s.y), 3))
