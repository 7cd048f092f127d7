"""Link prediction from shared hashtags and hashtag growth prediction from
the structure of early adopters."""

from .corpus import (AdoptionTrace, AffiliationIndex, Corpus, CorpusStats, DirectedWeightedGraph,
                     GraphView, IdMap, ViewKind, all_views, corpus_stats, derive_view,
                     load_adoptions, load_corpus, load_edges)
from .errors import TopicLinkError
from .graphfeat import (GROWTH_FEATURE_NAMES, StructuralFeatures, UnionFind, growth_features,
                        hashtag_density, induce, structural_features)
from .learn import (Dataset, Metrics, Model, baseline_majority, baseline_random, balanced_sample,
                    kfold, metrics, predict, train)
from .setfeat import (PAIR_FEATURE_NAMES, PAIR_FEATURE_NAMES_WITH_EDGES, SimilarityFeatures,
                      common_hashtags, expand_transforms, pair_features, smallest_common_edges)
from .synth import SynthCorpus, SynthSpec, generate, power_law_corpus, power_law_pairs

__version__ = "0.1.0"
