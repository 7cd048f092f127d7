"""
Loading a corpus and splitting the follow graph into views
==========================================================

A corpus is two tab-separated files: who follows whom, and who used
which hashtag when. Here we write a tiny one by hand, load it, and look
at the three graph views and the user-hashtag index.
"""

import tempfile
from pathlib import Path

from topiclink import GraphView, ViewKind, corpus_stats, load_corpus

work = Path(tempfile.mkdtemp())

# follow arcs: src follows dst, optional weight (duplicates are summed)
(work / "edges.tsv").write_text(
    "alice\tbob\n"
    "bob\talice\n"
    "carol\tdave\t2\n"
    "dave\tdave\n"            # self-loops are skipped and counted
)
# hashtag, user, unix time; only a user's first use of a hashtag counts
(work / "adoptions.tsv").write_text(
    "#jazz\talice\t100\n"
    "#jazz\tbob\t130\n"
    "#jazz\tcarol\t160\n"
    "#rain\tcarol\t90\n"
    "#rain\tdave\t95\n"
    "#jazz\talice\t400\n"
)

corpus = load_corpus(work / "adoptions.tsv", work / "edges.tsv")
print("users:", corpus.users.labels)
print("self-loops skipped:", corpus.graph.skipped_self_loops)

# The full view keeps every arc, the social view only reciprocated pairs
# (as undirected edges), the informational view the one-way arcs.
lab = corpus.users.label
for kind in ViewKind:
    view = GraphView(corpus.graph, kind)
    shown = sorted(tuple(sorted(map(lab, e))) if not view.directed else (lab(e[0]), lab(e[1]))
                   for e in view.edges())
    print(f"{kind.value:>13s}: {shown}")

# Each hashtag's adoption trace is its users in order of first use.
jazz = corpus.traces[corpus.tags.id("#jazz")]
print("#jazz trace:", [(lab(u), t) for u, t in zip(jazz.users.tolist(), jazz.times.tolist())])

stats = corpus_stats(corpus.index, {"follow": corpus.graph})
for k, v in stats.as_dict().items():
    print(f"  {k} = {v}")
