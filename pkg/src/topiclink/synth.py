"""Seeded synthetic corpora with planted homophily and adoption mechanisms.

Users are split into equal-size communities (user ``u`` belongs to
community ``u // community_size``). Each hashtag follows one of three
mechanisms:

viral
    cascade along follow arcs: when B adopts, every follower A of B
    gains one exposure, and the next adopter is drawn with weight
    ``(1 - (1 - cascade_p)**e) * e**viral_focus`` for ``e`` exposures, so
    users already surrounded by adopters go first. Early adopters are
    tightly knit.
exogenous
    adopters are drawn uniformly from all users. Early adopters are
    almost disconnected.
intermediate
    adoption stays inside one community, mostly uniformly, sometimes by
    cascade with ``intermediate_cascade_p``. Moderate connectivity and a
    final size capped by the community.

Viral and exogenous tags get a large final size, intermediate tags a
small one, so growth is non-monotone in early connectivity.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, corpus_from_records
from .errors import ValidationError

MECHANISMS = ("viral", "exogenous", "intermediate")


@dataclass(frozen=True)
class SynthSpec:
    n_users: int = 5000
    n_tags: int = 600
    community_size: int = 50
    p_intra: float = 0.15
    p_reciprocate: float = 0.5
    p_inter: float = 0.0004
    mechanism_weights: tuple = (0.3, 0.3, 0.4)
    cascade_p: float = 0.5
    viral_focus: float = 4.0
    intermediate_cascade_p: float = 0.1
    exogenous_rate: float = 0.05
    base_size: int = 20
    growth_multipliers: tuple = (3.0, 3.0, 1.4)
    size_noise: float = 0.35
    seed: int = 7

    def __post_init__(self):
        for name in ("p_intra", "p_reciprocate", "p_inter", "cascade_p",
                     "intermediate_cascade_p", "exogenous_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name}={v} is not a probability")
        if min(self.n_users, self.n_tags, self.community_size, self.base_size) < 1:
            raise ValidationError("counts must be positive")
        if self.community_size > self.n_users:
            raise ValidationError("community size exceeds the user count")
        w = self.mechanism_weights
        if len(w) != 3 or min(w) < 0 or abs(sum(w) - 1.0) > 1e-9:
            raise ValidationError("mechanism_weights must be three nonnegative numbers summing to 1")
        if len(self.growth_multipliers) != 3 or min(self.growth_multipliers) <= 0:
            raise ValidationError("growth_multipliers must be three positive numbers")
        if self.viral_focus < 0:
            raise ValidationError("viral_focus must be nonnegative")
        if self.size_noise < 0:
            raise ValidationError("size_noise must be nonnegative")

    @property
    def n_communities(self) -> int:
        return -(-self.n_users // self.community_size)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["mechanism_weights"] = list(self.mechanism_weights)
        d["growth_multipliers"] = list(self.growth_multipliers)
        return d


@dataclass
class SynthCorpus:
    spec: SynthSpec
    arcs: np.ndarray            # (m, 2) follow arcs, src follows dst
    adoptions: list             # (tag label, user label, timestamp)
    mechanisms: list            # per tag index
    final_sizes: list
    community: np.ndarray = field(repr=False, default=None)

    @staticmethod
    def tag_label(i: int) -> str:
        return f"t{i:04d}"

    def manifest(self) -> list:
        return [(self.tag_label(i), m, s)
                for i, (m, s) in enumerate(zip(self.mechanisms, self.final_sizes))]

    def to_corpus(self, threshold: int = 1) -> Corpus:
        edges = [(str(a), str(b)) for a, b in self.arcs.tolist()]
        return corpus_from_records(self.adoptions, edges, threshold)

    def write(self, out_dir) -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "edges": out / "edges.tsv",
            "adoptions": out / "adoptions.tsv",
            "manifest": out / "manifest.tsv",
        }
        with open(paths["edges"], "w", encoding="utf-8") as fh:
            fh.write("# src\tdst (src follows dst)\n")
            fh.writelines(f"{a}\t{b}\n" for a, b in self.arcs.tolist())
        with open(paths["adoptions"], "w", encoding="utf-8") as fh:
            fh.write("# hashtag\tuser\ttimestamp\n")
            fh.writelines(f"{h}\t{u}\t{t}\n" for h, u, t in self.adoptions)
        with open(paths["manifest"], "w", encoding="utf-8") as fh:
            fh.write("# tag\tmechanism\tfinal_size\n")
            fh.writelines(f"{h}\t{m}\t{s}\n" for h, m, s in self.manifest())
        return paths


def _follow_graph(spec: SynthSpec, rng: np.random.Generator):
    n, c = spec.n_users, spec.community_size
    community = np.arange(n) // c
    pairs = []
    # intra-community: each unordered pair is linked with p_intra
    for start in range(0, n, c):
        members = np.arange(start, min(start + c, n))
        if members.size < 2:
            continue
        iu, ju = np.triu_indices(members.size, 1)
        hit = rng.random(iu.size) < spec.p_intra
        pairs.append(np.column_stack([members[iu[hit]], members[ju[hit]]]))
    # inter-community: per user, a binomial number of random outside partners
    if spec.p_inter > 0:
        counts = rng.binomial(n - c, spec.p_inter, size=n)
        src = np.repeat(np.arange(n), counts)
        dst = rng.integers(0, n, size=src.size)
        ok = community[src] != community[dst]
        pairs.append(np.column_stack([src[ok], dst[ok]]))
    pairs = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    recip = rng.random(len(pairs)) < spec.p_reciprocate
    flip = rng.random(len(pairs)) < 0.5
    one_way = np.where(flip[:, None], pairs[:, ::-1], pairs)
    arcs = np.concatenate([pairs[recip], pairs[recip][:, ::-1], one_way[~recip]])
    arcs = np.unique(arcs, axis=0)
    return arcs, community


def _followers(n: int, arcs: np.ndarray):
    order = np.argsort(arcs[:, 1], kind="stable")
    src = arcs[order, 0]
    counts = np.bincount(arcs[:, 1], minlength=n)
    indptr = np.concatenate([[0], np.cumsum(counts)])
    return [src[indptr[i]:indptr[i + 1]] for i in range(n)]


def _viral_from(rng, spec, followers, seed_pool, size):
    adopted = [int(seed_pool[rng.integers(seed_pool.size)])]
    seen = {adopted[0]}
    exposure: dict[int, int] = {}
    everyone = spec.n_users

    def expose(u):
        for a in followers[u].tolist():
            if a not in seen:
                exposure[a] = exposure.get(a, 0) + 1

    expose(adopted[0])
    while len(adopted) < size:
        if exposure and rng.random() >= spec.exogenous_rate:
            users = np.fromiter(exposure.keys(), dtype=np.int64, count=len(exposure))
            e = np.fromiter(exposure.values(), dtype=float, count=len(exposure))
            w = (1.0 - (1.0 - spec.cascade_p) ** e) * e ** spec.viral_focus
            u = int(users[rng.choice(users.size, p=w / w.sum())])
        else:
            u = int(rng.integers(everyone))
            if u in seen:
                continue
        adopted.append(u)
        seen.add(u)
        exposure.pop(u, None)
        expose(u)
    return adopted


def _intermediate(rng, spec, followers, community, size):
    c = int(rng.integers(spec.n_communities))
    pool = np.flatnonzero(community == c)
    size = min(size, pool.size)
    in_pool = set(pool.tolist())
    adopted: list[int] = []
    seen = set()
    exposure: dict[int, int] = {}
    while len(adopted) < size:
        r = rng.random()
        if r < spec.exogenous_rate:
            u = int(rng.integers(spec.n_users))
        elif exposure and r < spec.exogenous_rate + spec.intermediate_cascade_p:
            users = np.fromiter(exposure.keys(), dtype=np.int64, count=len(exposure))
            e = np.fromiter(exposure.values(), dtype=float, count=len(exposure))
            u = int(users[rng.choice(users.size, p=e / e.sum())])
        else:
            u = int(pool[rng.integers(pool.size)])
        if u in seen:
            continue
        adopted.append(u)
        seen.add(u)
        exposure.pop(u, None)
        for a in followers[u].tolist():
            if a in in_pool and a not in seen:
                exposure[a] = exposure.get(a, 0) + 1
    return adopted


def _exogenous(rng, spec, size):
    return rng.choice(spec.n_users, size=min(size, spec.n_users), replace=False).tolist()


def generate(spec: SynthSpec) -> SynthCorpus:
    rng = np.random.default_rng(spec.seed)
    arcs, community = _follow_graph(spec, rng)
    followers = _followers(spec.n_users, arcs)
    kinds = rng.choice(3, size=spec.n_tags, p=list(spec.mechanism_weights))
    adoptions, mechanisms, finals = [], [], []
    for i, kind in enumerate(kinds.tolist()):
        mult = spec.growth_multipliers[kind]
        size = int(round(spec.base_size * mult * rng.lognormal(0.0, spec.size_noise)))
        size = max(2, min(size, spec.n_users))
        if kind == 0:
            c = int(rng.integers(spec.n_communities))
            users = _viral_from(rng, spec, followers, np.flatnonzero(community == c), size)
        elif kind == 1:
            users = _exogenous(rng, spec, size)
        else:
            users = _intermediate(rng, spec, followers, community, size)
        t = int(rng.integers(1_262_304_000, 1_264_982_400))  # January 2010
        gaps = rng.integers(1, 3600, size=len(users))
        times = t + np.cumsum(gaps)
        tag = SynthCorpus.tag_label(i)
        adoptions.extend((tag, str(u), int(s)) for u, s in zip(users, times.tolist()))
        mechanisms.append(MECHANISMS[kind])
        finals.append(len(users))
    return SynthCorpus(spec, arcs, adoptions, mechanisms, finals, community)


def power_law_pairs(n_pairs: int, exponent: float = 1.0, scale: float = 1.0,
                    min_size: int = 2, max_size: int = 2000, seed: int = 0):
    """Pairs with a smallest-common-hashtag size and a link drawn with
    probability ``min(1, scale * size**-exponent)``.

    Sizes are log-uniform integers in ``[min_size, max_size]``. Returns
    ``(sizes, linked)``.
    """
    if not 2 <= min_size <= max_size:
        raise ValidationError("need 2 <= min_size <= max_size")
    rng = np.random.default_rng(seed)
    sizes = np.floor(np.exp(rng.uniform(np.log(min_size), np.log(max_size + 1), n_pairs)))
    sizes = np.clip(sizes, min_size, max_size).astype(np.int64)
    p = np.minimum(1.0, scale * sizes.astype(float) ** -exponent)
    return sizes, rng.random(n_pairs) < p


def power_law_corpus(n_users: int = 200000, exponent: float = 1.0, scale: float = 1.0,
                     min_size: int = 2, max_size: int = 1000, seed: int = 0) -> Corpus:
    """Corpus of disjoint hashtags whose member pairs are linked with
    probability ``min(1, scale * size**-exponent)``.

    Every user holds exactly one hashtag, so a coinciding pair's smallest
    common hashtag is the one they share. Hashtag counts fall off as
    ``size**-2``, which gives each log-spaced size band about the same
    number of users. A linked pair gets one arc in a random direction.
    """
    if not 2 <= min_size <= max_size:
        raise ValidationError("need 2 <= min_size <= max_size")
    rng = np.random.default_rng(seed)
    sizes = np.arange(min_size, max_size + 1)
    per_band = n_users / np.log((max_size + 1) / min_size)
    expected = per_band / sizes.astype(float) ** 2
    counts = np.floor(expected).astype(np.int64)
    counts += rng.random(sizes.size) < expected - counts
    adoptions, src, dst = [], [], []
    start = 0
    tag = 0
    for s, n in zip(sizes.tolist(), counts.tolist()):
        iu, ju = np.triu_indices(s, 1)
        p = min(1.0, scale * s ** -exponent)
        for _ in range(n):
            hit = rng.random(iu.size) < p
            a, b = iu[hit] + start, ju[hit] + start
            flip = rng.random(a.size) < 0.5
            src.append(np.where(flip, b, a))
            dst.append(np.where(flip, a, b))
            label = f"p{tag:05d}"
            adoptions.extend((label, str(u), t) for t, u in enumerate(range(start, start + s)))
            start += s
            tag += 1
    src = np.concatenate(src) if src else np.zeros(0, np.int64)
    dst = np.concatenate(dst) if dst else np.zeros(0, np.int64)
    return corpus_from_records(adoptions, zip(map(str, src.tolist()), map(str, dst.tolist())))
