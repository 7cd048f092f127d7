"""Command-line entry point: ``topiclink <subcommand> [options]``.

Every run writes its reports plus ``replay.json`` into ``--out``;
``topiclink replay replay.json --out DIR`` reruns it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import learn, reporting, tasks
from .corpus import ViewKind, corpus_stats, derive_view, load_corpus
from .errors import TopicLinkError
from .graphfeat import GROWTH_FEATURE_NAMES
from .reporting import write_feature_table
from .setfeat import PAIR_FEATURE_NAMES_WITH_EDGES
from .synth import SynthSpec, generate

log = logging.getLogger("topiclink")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

# arguments that never influence report content
_NOT_REPLAYED = {"out", "verbose", "func", "command"}


def _common(p: argparse.ArgumentParser, corpus: bool = True, edges_required: bool = True):
    p.add_argument("--out", required=True, help="output directory (created if missing)")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv",
                   help="report format (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: %(default)s)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for fold training (default: %(default)s)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    if corpus:
        p.add_argument("--adoptions", required=True, help="hashtag<TAB>user<TAB>timestamp file")
        p.add_argument("--edges", required=edges_required, help="src<TAB>dst[<TAB>weight] file")
        p.add_argument("--graph", choices=("follow", "at"), default="follow",
                       help="what the edge file holds (default: %(default)s)")
        p.add_argument("--threshold", type=int, default=1,
                       help="minimum summed arc weight (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topiclink", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="corpus statistics")
    _common(p, edges_required=False)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("link-predict", help="predict links from common hashtags")
    _common(p)
    p.add_argument("--mutual", action="store_true", help="label pairs by reciprocated ties")
    p.add_argument("--sample", type=int, default=20000, help="balanced sample size (default: %(default)s)")
    p.add_argument("--feature-sets", nargs="+", default=list(tasks.LINK_FEATURE_SETS),
                   choices=list(tasks.LINK_FEATURE_SETS), metavar="SET",
                   help="feature sets to evaluate (default: all of %(choices)s)")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds (default: %(default)s)")
    p.add_argument("--lam", type=float, nargs="+", default=[learn.DEFAULT_LAMBDA],
                   help="L2 strength; several values evaluate a grid (default: %(default)s)")
    p.add_argument("--exclude-incident", action="store_true",
                   help="edge feature ignores every edge touching either user")
    p.add_argument("--shuffle-labels", action="store_true", help="null-signal control")
    p.add_argument("--save-model", metavar="NAME", help="also fit all+edges model; save as --out/NAME")
    p.add_argument("--load-model", metavar="PATH", help="score a saved model instead of CV")
    p.add_argument("--export-features", action="store_true", help="write features.tsv")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("growth-predict", help="predict hashtag growth from early adopters")
    _common(p)
    p.add_argument("--k", type=int, default=20, help="initial adopters (default: %(default)s)")
    p.add_argument("--target", choices=("double", "horizon"), default="double")
    p.add_argument("--horizon", type=int, help="M for --target horizon")
    p.add_argument("--feature-sets", nargs="+", default=list(tasks.DEFAULT_GROWTH_SETS),
                   choices=list(tasks.GROWTH_FEATURE_SETS), metavar="SET",
                   help="feature sets to evaluate (choices: %(choices)s)")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds (default: %(default)s)")
    p.add_argument("--lam", type=float, nargs="+", default=[learn.DEFAULT_LAMBDA],
                   help="L2 strength; several values evaluate a grid (default: %(default)s)")
    p.add_argument("--shuffle-labels", action="store_true", help="null-signal control")
    p.add_argument("--save-model", metavar="NAME", help="also fit the all-features model; save as --out/NAME")
    p.add_argument("--load-model", metavar="PATH", help="score a saved model instead of CV")
    p.add_argument("--export-features", action="store_true", help="write features.tsv")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("horizon", help="metrics versus absolute horizon M")
    _common(p)
    p.add_argument("--k", type=int, default=20, help="initial adopters (default: %(default)s)")
    p.add_argument("--horizons", type=int, nargs="+", required=True, help="values of M")
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds (default: %(default)s)")
    p.add_argument("--lam", type=float, default=learn.DEFAULT_LAMBDA)
    p.set_defaults(func=cmd_horizon)

    p = sub.add_parser("curves", help="figure data: fig1 linkage, fig2 density, fig3 windows, fig4 CCDFs")
    p.add_argument("figure", choices=("fig1", "fig2", "fig3", "fig4"))
    _common(p)
    p.add_argument("--mutual", action="store_true", help="fig1: reciprocated ties only")
    p.add_argument("--bins", type=int, default=20, help="fig1: log-spaced bins (default: %(default)s)")
    p.add_argument("--pairs", type=int, default=100000, help="fig1: sampled pairs (default: %(default)s)")
    p.add_argument("--min-count", type=int, default=20, help="fig1: pairs per fitted bin (default: %(default)s)")
    p.add_argument("--view", choices=[k.value for k in ViewKind], default="full",
                   help="fig2/fig3/fig4 graph view (default: %(default)s)")
    p.add_argument("--top-n", type=int, default=200, help="fig2: most used hashtags (default: %(default)s)")
    p.add_argument("--k", type=int, default=20, help="fig3: initial adopters (default: %(default)s)")
    p.add_argument("--feature", choices=("edges", "singletons"), default="edges",
                   help="fig3: sort key (default: %(default)s)")
    p.add_argument("--window", type=int, default=101, help="fig3: sliding window (default: %(default)s)")
    p.add_argument("--K", type=int, nargs="+", dest="K_list",
                   help="fig3: final-size thresholds (default: 1.5k 2k 3k 4k)")
    p.add_argument("--k-list", type=int, nargs="+", default=[20, 40, 80],
                   help="fig4: initial adopter counts (default: %(default)s)")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    _common(p, corpus=False)
    defaults = SynthSpec()
    for name, value in defaults.as_dict().items():
        if name == "seed":
            continue
        flag = "--" + name.replace("_", "-")
        if isinstance(value, list):
            p.add_argument(flag, type=float, nargs=3, default=value,
                           help="(default: %(default)s)")
        else:
            p.add_argument(flag, type=type(value), default=value, help="(default: %(default)s)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("replay", help="rerun a recorded replay.json")
    p.add_argument("replay_file")
    p.add_argument("--out", required=True)
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.set_defaults(func=cmd_replay)
    return parser


# ----------------------------------------------------------------------


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _inside(out: Path, name: str) -> Path:
    return out / Path(name).name


def _corpus(args):
    return load_corpus(args.adoptions, args.edges, args.threshold)


def _write_replay(args, out: Path):
    recorded = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_REPLAYED}
    for k in ("adoptions", "edges", "load_model"):
        if recorded.get(k):
            recorded[k] = str(Path(recorded[k]).resolve())
    payload = {"command": args.command, "args": recorded}
    (out / "replay.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")


def cmd_stats(args):
    out = _out(args)
    corpus = _corpus(args)
    graphs = {args.graph: corpus.graph} if corpus.graph is not None else {}
    stats = corpus_stats(corpus.index, graphs).as_dict()
    if corpus.graph is not None:
        stats["skipped_self_loops"] = corpus.graph.skipped_self_loops
        for kind in ViewKind:
            stats[f"view.{kind.value}.edges"] = derive_view(corpus.graph, kind, args.threshold).edge_count
    reporting.write_stats(stats, out, args.format)
    _write_replay(args, out)
    for k, v in stats.items():
        print(f"{k}\t{v}")


def _merge_grid(reports, lams):
    if len(reports) == 1:
        return reports[0]
    base = reports[0]
    rows = [(f"{name}[lam={lam:g}]", m) for rep, lam in zip(reports, lams) for name, m in rep.rows]
    spec = dict(base.spec, lam=list(lams))
    return tasks.TaskReport(base.task, spec, rows, base.baselines, base.n_rows, base.n_positive)


def cmd_link(args):
    out = _out(args)
    corpus = _corpus(args)
    spec = tasks.LinkTaskSpec(graph=args.graph, threshold=args.threshold, mutual=args.mutual,
                              sample_size=args.sample, feature_sets=tuple(args.feature_sets),
                              seed=args.seed, folds=args.folds, lam=args.lam[0],
                              exclude_incident=args.exclude_incident,
                              shuffle_labels=args.shuffle_labels)
    model = learn.load_model(args.load_model) if args.load_model else None
    if model is not None:
        report = tasks.run_link_task(spec, corpus, args.threads, model=model)
    else:
        report = _merge_grid([tasks.run_link_task(replace(spec, lam=lam), corpus, args.threads)
                              for lam in args.lam], args.lam)
    reporting.write_task_report(report, out, args.format)
    if args.save_model:
        learn.save_model(tasks.link_model(spec, corpus), _inside(out, args.save_model))
    if args.export_features:
        pairs, data = tasks.link_dataset(spec, corpus)
        ids = [(corpus.users.label(u), corpus.users.label(v)) for u, v in pairs.tolist()]
        write_feature_table(out / "features.tsv", ids, PAIR_FEATURE_NAMES_WITH_EDGES, data.X, data.y)
    _write_replay(args, out)
    print(reporting.format_task_summary(report), end="")


def cmd_growth(args):
    out = _out(args)
    corpus = _corpus(args)
    spec = tasks.GrowthTaskSpec(k=args.k, target=args.target, horizon=args.horizon,
                                graph=args.graph, threshold=args.threshold,
                                feature_sets=tuple(args.feature_sets), seed=args.seed,
                                folds=args.folds, lam=args.lam[0],
                                shuffle_labels=args.shuffle_labels)
    data = tasks.growth_data(corpus, spec.k, spec.threshold)
    model = learn.load_model(args.load_model) if args.load_model else None
    if model is not None:
        report = tasks.run_growth_task(spec, corpus, args.threads, model=model, data=data)
    else:
        report = _merge_grid([tasks.run_growth_task(replace(spec, lam=lam), corpus, args.threads,
                                                    data=data) for lam in args.lam], args.lam)
    reporting.write_task_report(report, out, args.format)
    if args.save_model:
        learn.save_model(tasks.growth_model(spec, corpus, data=data), _inside(out, args.save_model))
    if args.export_features:
        ids = [corpus.tags.label(int(h)) for h in data.tags]
        write_feature_table(out / "features.tsv", ids, GROWTH_FEATURE_NAMES + ("final_size",),
                            [list(r) + [f] for r, f in zip(data.X.tolist(), data.final.tolist())],
                            data.labels(spec.target_size), id_columns=("hashtag",))
    _write_replay(args, out)
    print(reporting.format_task_summary(report), end="")


def cmd_horizon(args):
    out = _out(args)
    corpus = _corpus(args)
    report = tasks.horizon_sweep(corpus, args.k, args.horizons, args.folds, args.seed,
                                 args.threshold, args.lam, args.threads)
    reporting.write_curve(report, out, args.format)
    _write_replay(args, out)
    if report.meta["degenerate"]:
        print(f"single-class horizons (baselines only): {report.meta['degenerate']}")
    acc = report.series.get("model.accuracy")
    if acc is not None:
        for m, a in zip(acc.x.tolist(), acc.y.tolist()):
            print(f"M={int(m)}\taccuracy={a:.3f}")


def cmd_curves(args):
    out = _out(args)
    corpus = _corpus(args)
    view = ViewKind(args.view)
    if args.figure == "fig1":
        report, a = tasks.linkage_probability_curve(corpus, args.threshold, args.mutual, args.bins,
                                                    args.pairs, args.seed, args.min_count)
        print(f"fitted exponent a = {a:.4f}")
        reports = [report]
    elif args.figure == "fig2":
        reports = [tasks.density_scatter(corpus, view, args.threshold, args.top_n)]
    elif args.figure == "fig3":
        data = tasks.growth_data(corpus, args.k, args.threshold)
        K_list = args.K_list or [int(args.k * f) for f in (1.5, 2, 3, 4)]
        reports = [
            tasks.sliding_median_curves(corpus, args.k, args.feature, args.window,
                                        args.threshold, view, data=data),
            tasks.exceed_probability_curves(corpus, args.k, K_list, args.feature, args.window,
                                            args.threshold, view, data=data),
        ]
    else:
        reports = [tasks.feature_ccdf(corpus, args.k_list, args.threshold, view)]
    for r in reports:
        reporting.write_curve(r, out, args.format)
        print(f"wrote {r.name} ({sum(s.x.size for s in r.series.values())} points)")
    _write_replay(args, out)


def cmd_synth(args):
    out = _out(args)
    fields = SynthSpec().as_dict()
    kwargs = {name: getattr(args, name) for name in fields if name != "seed"}
    for name in ("mechanism_weights", "growth_multipliers"):
        kwargs[name] = tuple(kwargs[name])
    spec = SynthSpec(seed=args.seed, **kwargs)
    corpus = generate(spec)
    paths = corpus.write(out)
    (out / "synth_spec.json").write_text(json.dumps(spec.as_dict(), indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    _write_replay(args, out)
    for name, path in paths.items():
        print(f"{name}\t{path}")


def cmd_replay(args):
    payload = json.loads(Path(args.replay_file).read_text(encoding="utf-8"))
    parser = build_parser()
    ns = parser.parse_args([payload["command"]] + _replay_argv(payload, args.out))
    ns.verbose = args.verbose
    return ns.func(ns)


def _replay_argv(payload, out) -> list[str]:
    """Rebuild a flag list from recorded arguments (dest names map 1:1 to flags)."""
    argv = []
    recorded = dict(payload["args"])
    if payload["command"] == "curves":
        argv.append(recorded.pop("figure"))
    if payload["command"] == "replay":
        raise TopicLinkError("cannot replay a replay")
    flags = {"K_list": "--K"}
    for dest, value in recorded.items():
        flag = flags.get(dest, "--" + dest.replace("_", "-"))
        if value is None or value is False:
            continue
        if value is True:
            argv.append(flag)
        elif isinstance(value, list):
            argv.append(flag)
            argv.extend(str(v) for v in value)
        else:
            argv.extend([flag, str(value)])
    argv.extend(["--out", str(out)])
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (TopicLinkError, OSError) as exc:
        print(f"topiclink {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
