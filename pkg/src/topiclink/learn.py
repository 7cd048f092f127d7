"""L2-regularised logistic regression, stratified k-fold evaluation, baselines."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateLabels, SamplingError, StratificationError, ValidationError

EPS = 1e-12
DEFAULT_LAMBDA = 1e-3
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 5000


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise ValidationError("feature matrix must be 2-D")
        if y.shape != (X.shape[0],):
            raise ValidationError("one label per row required")
        if y.size and not np.all((y == 0) | (y == 1)):
            raise ValidationError("labels must be 0 or 1")
        names = tuple(self.names) or tuple(f"x{i}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValidationError("one name per column required")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y.astype(np.int64))
        object.__setattr__(self, "names", names)

    def __len__(self):
        return self.X.shape[0]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.X[rows], self.y[rows], self.names)

    def select(self, names) -> "Dataset":
        cols = [self.names.index(n) for n in names]
        return Dataset(self.X[:, cols], self.y, tuple(names))

    def with_labels(self, y) -> "Dataset":
        return Dataset(self.X, y, self.names)


@dataclass(frozen=True)
class Model:
    names: tuple
    weights: np.ndarray
    intercept: float
    lam: float
    mean: np.ndarray
    scale: np.ndarray
    iterations: int = 0
    grad_norm: float = 0.0
    converged: bool = True

    @property
    def width(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @classmethod
    def from_confusion(cls, tp, fp, tn, fn) -> "Metrics":
        total = tp + fp + tn + fn
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        acc = (tp + tn) / total if total else 0.0
        return cls(acc, p, r, f1, int(tp), int(fp), int(tn), int(fn))

    @classmethod
    def average(cls, folds) -> "Metrics":
        """Unweighted mean of the rates; confusion counts are summed."""
        folds = list(folds)
        return cls(
            float(np.mean([m.accuracy for m in folds])),
            float(np.mean([m.precision for m in folds])),
            float(np.mean([m.recall for m in folds])),
            float(np.mean([m.f1 for m in folds])),
            sum(m.tp for m in folds), sum(m.fp for m in folds),
            sum(m.tn for m in folds), sum(m.fn for m in folds),
        )

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall,
                "f1": self.f1, "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


# ----------------------------------------------------------------------
# fitting
# ----------------------------------------------------------------------


def standardization(X: np.ndarray):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(theta: np.ndarray, X: np.ndarray, y: np.ndarray, lam: float) -> float:
    """Mean logistic loss + (lam/2)|w|^2; ``theta = [w..., intercept]``."""
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * (w @ w))


def logistic_gradient(theta: np.ndarray, X: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    w, b = theta[:-1], theta[-1]
    r = sigmoid(X @ w + b) - y
    g = np.empty_like(theta)
    g[:-1] = X.T @ r / X.shape[0] + lam * w
    g[-1] = r.mean()
    return g


def _hessian(theta, X, lam):
    w, b = theta[:-1], theta[-1]
    p = sigmoid(X @ w + b)
    s = p * (1 - p)
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    H = (Xa * s[:, None]).T @ Xa / X.shape[0]
    H[np.arange(len(w)), np.arange(len(w))] += lam
    return H


def _check_trainable(data: Dataset):
    if len(data) < 2:
        raise ValidationError("need at least two rows to train")
    if not np.all(np.isfinite(data.X)):
        raise ValidationError("non-finite feature value")
    if np.unique(data.y).size < 2:
        raise DegenerateLabels("training labels contain a single class")


def train(data: Dataset, lam: float = DEFAULT_LAMBDA, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER, init=None) -> Model:
    """Fit on z-scored features by damped Newton steps with Armijo backtracking.

    The intercept is not penalised. Deterministic for a given row order.
    """
    _check_trainable(data)
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    mean, scale = standardization(data.X)
    X = (data.X - mean) / scale
    y = data.y.astype(float)
    theta = np.zeros(X.shape[1] + 1) if init is None else np.array(init, dtype=float)
    loss = logistic_loss(theta, X, y, lam)
    g = logistic_gradient(theta, X, y, lam)
    it = 0
    while it < max_iter and np.linalg.norm(g) > tol:
        it += 1
        H = _hessian(theta, X, lam)
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(H, g, rcond=None)[0]
        slope = g @ step
        if not np.isfinite(slope) or slope >= 0:
            step, slope = -g, -(g @ g)
        t = 1.0
        while True:
            cand = theta + t * step
            new = logistic_loss(cand, X, y, lam)
            if new <= loss + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if t < 1e-12 and new >= loss:
            break
        theta, loss = cand, new
        g = logistic_gradient(theta, X, y, lam)
    gn = float(np.linalg.norm(g))
    return Model(data.names, theta[:-1].copy(), float(theta[-1]), float(lam), mean, scale,
                 iterations=it, grad_norm=gn, converged=gn <= tol)


def training_loss(model: Model, data: Dataset) -> float:
    X = (data.X - model.mean) / model.scale
    theta = np.append(model.weights, model.intercept)
    return logistic_loss(theta, X, data.y.astype(float), model.lam)


def predict(model: Model, rows) -> np.ndarray | float:
    """Probabilities clamped to [1e-12, 1 - 1e-12]; scalar in, scalar out."""
    rows = np.asarray(rows, dtype=float)
    single = rows.ndim == 1
    X = rows[None, :] if single else rows
    if X.shape[1] != model.width:
        raise ValidationError(f"row width {X.shape[1]} != model width {model.width}")
    z = ((X - model.mean) / model.scale) @ model.weights + model.intercept
    p = np.clip(sigmoid(z), EPS, 1 - EPS)
    return float(p[0]) if single else p


def metrics(predictions, labels, threshold: float = 0.5) -> Metrics:
    p = np.asarray(predictions, dtype=float)
    y = np.asarray(labels)
    if p.shape != y.shape:
        raise ValidationError("predictions and labels differ in length")
    yhat = p >= threshold
    pos = y == 1
    return Metrics.from_confusion(
        int(np.sum(yhat & pos)), int(np.sum(yhat & ~pos)),
        int(np.sum(~yhat & ~pos)), int(np.sum(~yhat & pos)),
    )


# ----------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------


def stratified_folds(y, k: int, seed) -> np.ndarray:
    """Fold id per row; each class is permuted and dealt round-robin."""
    y = np.asarray(y)
    if k < 2:
        raise StratificationError("need k >= 2 folds")
    rng = np.random.default_rng(seed)
    fold = np.empty(y.size, dtype=np.int64)
    offset = 0
    for c in (0, 1):
        idx = np.flatnonzero(y == c)
        if idx.size < k:
            raise StratificationError(
                f"class {c} has {idx.size} rows; {k} folds need at least {k}")
        perm = rng.permutation(idx)
        fold[perm] = (offset + np.arange(perm.size)) % k
        offset = (offset + perm.size) % k
    return fold


@dataclass(frozen=True)
class CVResult:
    mean: Metrics
    folds: tuple
    models: tuple = field(default=(), repr=False)


def kfold(data: Dataset, k: int = 10, seed=0, lam: float = DEFAULT_LAMBDA,
          tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
          threshold: float = 0.5, threads: int = 1) -> CVResult:
    """Stratified k-fold CV; standardisation is refit on every training fold."""
    fold = stratified_folds(data.y, k, seed)

    def run(i):
        model = train(data.subset(fold != i), lam, tol, max_iter)
        test = data.subset(fold == i)
        return model, metrics(predict(model, test.X), test.y, threshold)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, range(k)))
    else:
        results = [run(i) for i in range(k)]
    per_fold = tuple(m for _, m in results)
    return CVResult(Metrics.average(per_fold), per_fold, tuple(mod for mod, _ in results))


def balanced_sample(items, labels, size: int, seed):
    """Draw ``size/2`` items of each class without replacement.

    Returns ``(items, labels)`` in a seeded shuffled order.
    """
    items = np.asarray(items)
    labels = np.asarray(labels)
    if size <= 0 or size % 2:
        raise ValidationError("sample size must be a positive even number")
    half = size // 2
    rng = np.random.default_rng(seed)
    chosen = []
    for c, name in ((1, "positive"), (0, "negative")):
        idx = np.flatnonzero(labels == c)
        if idx.size < half:
            raise SamplingError(
                f"{name} class has {idx.size} candidates, {half} required", name)
        chosen.append(rng.choice(idx, half, replace=False))
    sel = rng.permutation(np.concatenate(chosen))
    return items[sel], labels[sel]


def baseline_majority(labels) -> Metrics:
    """Predict the modal label everywhere; a tie predicts positive."""
    y = np.asarray(labels)
    if y.size == 0:
        raise ValidationError("no labels")
    guess = 1.0 if 2 * int(np.sum(y == 1)) >= y.size else 0.0
    return metrics(np.full(y.size, guess), y)


def baseline_random(labels, positive_rate: float, seed) -> Metrics:
    """Predict positive for a seeded uniform subset of size round(rate * n)."""
    y = np.asarray(labels)
    if y.size == 0:
        raise ValidationError("no labels")
    if not 0 <= positive_rate <= 1:
        raise ValidationError("positive_rate must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    pred = np.zeros(y.size)
    pred[rng.choice(y.size, int(round(positive_rate * y.size)), replace=False)] = 1.0
    return metrics(pred, y)


def binomial_halfwidth(n: int, p: float = 0.5, sigmas: float = 3.0) -> float:
    """``sigmas`` standard deviations of an accuracy estimate over n rows."""
    return sigmas * math.sqrt(p * (1 - p) / n)


# ----------------------------------------------------------------------
# persistence
# ----------------------------------------------------------------------


def save_model(model: Model, path) -> None:
    lines = [
        "# topiclink logistic model",
        f"lambda\t{model.lam!r}",
        f"intercept\t{model.intercept!r}",
        f"iterations\t{model.iterations}",
        f"grad_norm\t{model.grad_norm!r}",
        f"converged\t{int(model.converged)}",
        "#feature\tweight\tmean\tscale",
    ]
    for n, w, m, s in zip(model.names, model.weights, model.mean, model.scale):
        lines.append(f"{n}\t{float(w)!r}\t{float(m)!r}\t{float(s)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> Model:
    head = {}
    names, cols = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 2:
            head[parts[0]] = parts[1]
        elif len(parts) == 4:
            names.append(parts[0])
            cols.append([float(x) for x in parts[1:]])
        else:
            raise ValidationError(f"malformed model line: {line!r}")
    arr = np.array(cols, dtype=float).reshape(-1, 3)
    return Model(tuple(names), arr[:, 0], float(head["intercept"]), float(head["lambda"]),
                 arr[:, 1], arr[:, 2], int(head.get("iterations", 0)),
                 float(head.get("grad_norm", 0.0)), head.get("converged", "1") == "1")
