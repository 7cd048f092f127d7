"""Serialisation of task reports, curves, stats and feature tables."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tasks import CurveReport, TaskReport

METRIC_COLUMNS = ("accuracy", "precision", "recall", "f1", "tp", "fp", "tn", "fn")


def _num(v):
    if isinstance(v, (bool, np.bool_, int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def task_rows(report: TaskReport) -> list[dict]:
    rows = [{"model": name, **m.as_dict()} for name, m in report.rows]
    rows += [{"model": f"baseline:{name}", **m.as_dict()} for name, m in report.baselines.items()]
    return rows


def write_task_report(report: TaskReport, out_dir, fmt: str = "tsv") -> list[Path]:
    out = Path(out_dir)
    rows = task_rows(report)
    if fmt == "json":
        path = out / "report.json"
        path.write_text(_json({"task": report.task, "spec": report.spec, "rows": rows,
                               "n_rows": report.n_rows, "n_positive": report.n_positive}),
                        encoding="utf-8")
    else:
        path = out / "report.tsv"
        lines = [f"# task: {report.task}",
                 f"# spec: {json.dumps(report.spec, sort_keys=True)}",
                 f"# rows: {report.n_rows}\tpositive: {report.n_positive}",
                 "\t".join(("model",) + METRIC_COLUMNS)]
        for r in rows:
            lines.append("\t".join([r["model"]] + [_num(r[c]) for c in METRIC_COLUMNS]))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary = out / "summary.txt"
    summary.write_text(format_task_summary(report), encoding="utf-8")
    return [path, summary]


def format_task_summary(report: TaskReport) -> str:
    lines = [f"{report.task} prediction: {report.n_rows} rows, {report.n_positive} positive", ""]
    lines.append(f"{'model':32s} {'acc':>7s} {'prec':>7s} {'rec':>7s} {'f1':>7s}")
    for r in task_rows(report):
        lines.append(f"{r['model']:32s} {r['accuracy']:7.3f} {r['precision']:7.3f} "
                     f"{r['recall']:7.3f} {r['f1']:7.3f}")
    seed = report.spec.get("seed")
    lines += ["", f"seed: {seed}"]
    return "\n".join(lines) + "\n"


def write_curve(report: CurveReport, out_dir, fmt: str = "tsv") -> list[Path]:
    out = Path(out_dir)
    if fmt == "json":
        path = out / f"{report.name}.json"
        payload = {"name": report.name, "meta": report.meta, "series": {
            k: {"kind": s.kind, "x": s.x.tolist(), "y": s.y.tolist(), "labels": list(s.labels)}
            for k, s in report.series.items()}}
        path.write_text(_json(payload), encoding="utf-8")
    else:
        path = out / f"{report.name}.tsv"
        lines = [f"# curve: {report.name}",
                 f"# meta: {json.dumps(report.meta, sort_keys=True, default=_default)}",
                 "series\tx\ty\tlabel"]
        for name, s in report.series.items():
            labels = s.labels or ("",) * s.x.size
            for x, y, lab in zip(s.x.tolist(), s.y.tolist(), labels):
                lines.append(f"{name}\t{_num(x)}\t{_num(y)}\t{lab}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [path]


def write_stats(stats: dict, out_dir, fmt: str = "tsv") -> list[Path]:
    out = Path(out_dir)
    if fmt == "json":
        path = out / "stats.json"
        path.write_text(_json(stats), encoding="utf-8")
    else:
        path = out / "stats.tsv"
        path.write_text("".join(f"{k}\t{_num(v)}\n" for k, v in stats.items()), encoding="utf-8")
    return [path]


def write_feature_table(path, ids, names, X, labels=None, id_columns=("u", "v")) -> Path:
    """Tabular feature export: id columns, one column per feature, optional label."""
    path = Path(path)
    header = list(id_columns) + list(names) + (["label"] if labels is not None else [])
    lines = ["\t".join(header)]
    for i, row in enumerate(np.asarray(X).tolist()):
        idv = ids[i] if isinstance(ids[i], (tuple, list)) else (ids[i],)
        cells = [str(x) for x in idv] + [_num(v) for v in row]
        if labels is not None:
            cells.append(str(int(labels[i])))
        lines.append("\t".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path

