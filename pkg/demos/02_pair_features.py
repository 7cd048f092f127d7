"""
Similarity of two users from the hashtags they share
====================================================

Two users who share a small hashtag are more alike than two who share
only a huge one. The six pair features summarise the sizes of the
shared hashtags; each is then expanded with log and inverse transforms.
"""

import numpy as np

from topiclink import (PAIR_FEATURE_NAMES_WITH_EDGES, GraphView, expand_transforms,
                       pair_features, smallest_common_edges)
from topiclink.corpus import corpus_from_records

# hashtags a..d with nested audiences
audiences = {"a": "12", "b": "1234", "c": "123456", "d": "35"}
records = [(tag, u, 0) for tag, users in audiences.items() for u in users]
follows = [("1", "2"), ("1", "3"), ("2", "3")]
corpus = corpus_from_records(records, follows)
index = corpus.index
uid = corpus.users.id

for u, v in [("1", "2"), ("3", "5"), ("5", "6")]:
    f = pair_features(uid(u), uid(v), index)
    print(f"users {u},{v}: shared {f.num_common}, smallest {f.smallest_size}, "
          f"largest {f.largest_size}, sum 1/size {f.sum_inverse:.4f}, "
          f"Adamic-Adar {f.adamic_adar:.4f}")

# Inside the smallest shared hashtag, count follow edges between *other*
# members: the pair's own edge would leak the label we want to predict.
view = GraphView(corpus.graph, "full")
edges = smallest_common_edges(uid("2"), uid("3"), index, view)
print("edges in smallest common hashtag of 2,3 (own edge removed):", edges)

vec = expand_transforms(pair_features(uid("2"), uid("3"), index), edges)
for name, value in zip(PAIR_FEATURE_NAMES_WITH_EDGES, np.round(vec, 4)):
    print(f"  {name:22s} {value}")
