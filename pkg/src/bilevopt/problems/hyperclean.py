"""Synthetic data hyper-cleaning task.

Half of the training labels are corrupted.  The upper variable x holds one
logit per training sample; sigma(x_i) weights that sample's cross-entropy
term in the lower-level training loss, while the upper objective is the
unweighted cross-entropy on a cleanly labeled validation set:

    f(x, y) = sum_tr  sigma(x_i) * CE(y, u_i, v_i)
    F(x, y) = sum_val CE(y, u_i, v_i)

Learning x therefore amounts to learning which samples to trust.  A sample
is declared contaminated when its learned weight satisfies x_i <= 0.

Two classifier architectures are supported.  "linear" uses a single weight
matrix (convex lower level); "two-layer-linear" factors the logits through
a hidden layer, logits = W2 @ W1 @ u, which makes f non-convex in y.

Data are Gaussian class clusters with unit variance and pairwise mean
separation 3.0, class balanced in every split.  Everything is generated
from ``numpy.random.default_rng(seed)`` (PCG64) with draws in a fixed
order (train noise, validation noise, test noise, corruption indices,
replacement labels), so datasets are bit-reproducible for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DimensionError
from .base import Problem

MEAN_SEPARATION = 3.0
DEFAULT_HIDDEN = 16


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _cross_entropy(logits, labels):
    # per-sample CE: logsumexp(logits) - logits[label]
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1)) + logits.max(axis=1)
    return lse - logits[np.arange(len(labels)), labels]


@dataclass(frozen=True)
class HyperCleanProblem(Problem):
    U_tr: np.ndarray = field(kw_only=True, default=None)
    v_tr: np.ndarray = field(kw_only=True, default=None)
    U_val: np.ndarray = field(kw_only=True, default=None)
    v_val: np.ndarray = field(kw_only=True, default=None)
    U_test: np.ndarray = field(kw_only=True, default=None)
    v_test: np.ndarray = field(kw_only=True, default=None)
    # ground-truth corruption mask; used only for evaluation, never by oracles
    corruption_mask: np.ndarray = field(kw_only=True, default=None)
    arch: str = field(kw_only=True, default="linear")
    classes: int = field(kw_only=True, default=2)
    hidden: int = field(kw_only=True, default=DEFAULT_HIDDEN)
    seed: int = field(kw_only=True, default=0)

    def unpack(self, y):
        """Split the flat parameter vector into weight matrices."""
        d = self.U_tr.shape[1]
        c, h = self.classes, self.hidden
        if self.arch == "linear":
            return (y.reshape(c, d),)
        w2 = y[: c * h].reshape(c, h)
        w1 = y[c * h:].reshape(h, d)
        return (w2, w1)

    def logits(self, y, U):
        if self.arch == "linear":
            (w,) = self.unpack(y)
            return U @ w.T
        w2, w1 = self.unpack(y)
        return (U @ w1.T) @ w2.T

    def accuracy(self, y, split: str = "val") -> float:
        U, v = {"train": (self.U_tr, self.v_tr),
                "val": (self.U_val, self.v_val),
                "test": (self.U_test, self.v_test)}[split]
        pred = self.logits(y, U).argmax(axis=1)
        return float(np.mean(pred == v))

    def sample_losses(self, y, split: str = "train") -> np.ndarray:
        U, v = {"train": (self.U_tr, self.v_tr),
                "val": (self.U_val, self.v_val),
                "test": (self.U_test, self.v_test)}[split]
        return _cross_entropy(self.logits(y, U), v)


def _balanced_labels(n, classes):
    per, rem = divmod(n, classes)
    counts = [per + (1 if c < rem else 0) for c in range(classes)]
    return np.repeat(np.arange(classes), counts)


def make_hyperclean(d: int = 20, classes: int = 3, n_tr: int = 300,
                    n_val: int = 300, n_test: int = 600,
                    arch: str = "linear", hidden: int = DEFAULT_HIDDEN,
                    seed: int = 0) -> HyperCleanProblem:
    """Generate a seeded hyper-cleaning instance.

    Exactly ``n_tr // 2`` training labels are replaced by a uniformly chosen
    different label.  ``dim_x`` equals ``n_tr``; ``dim_y`` depends on the
    architecture.  Gradients are analytic (softmax cross-entropy chain rule);
    no second-order oracles are attached, so this problem also exercises the
    first-order-only code paths.
    """
    if d < 1 or classes < 2 or n_tr < 1 or n_val < 1:
        raise DimensionError("need d >= 1, classes >= 2 and nonempty splits")
    if classes > d:
        raise DimensionError("cluster construction requires classes <= d")
    if arch not in ("linear", "two-layer-linear"):
        raise ValueError(f"unknown architecture {arch!r}")

    rng = np.random.default_rng(seed)
    # pairwise mean distance is exactly MEAN_SEPARATION
    means = np.zeros((classes, d))
    means[np.arange(classes), np.arange(classes)] = MEAN_SEPARATION / np.sqrt(2)

    def draw(n):
        labels = _balanced_labels(n, classes)
        return means[labels] + rng.standard_normal((n, d)), labels

    U_tr, v_clean = draw(n_tr)
    U_val, v_val = draw(n_val)
    U_test, v_test = draw(n_test)

    n_bad = n_tr // 2
    bad_idx = rng.choice(n_tr, size=n_bad, replace=False)
    v_tr = v_clean.copy()
    # replace with a label different from the original, uniformly
    shift = rng.integers(1, classes, size=n_bad)
    v_tr[bad_idx] = (v_clean[bad_idx] + shift) % classes
    mask = np.zeros(n_tr, dtype=bool)
    mask[bad_idx] = True

    dim_y = classes * d if arch == "linear" else classes * hidden + hidden * d

    # closures capture only immutable arrays
    def _tr_logits(y):
        if arch == "linear":
            return U_tr @ y.reshape(classes, d).T
        w2 = y[: classes * hidden].reshape(classes, hidden)
        w1 = y[classes * hidden:].reshape(hidden, d)
        return (U_tr @ w1.T) @ w2.T

    def _val_logits(y):
        if arch == "linear":
            return U_val @ y.reshape(classes, d).T
        w2 = y[: classes * hidden].reshape(classes, hidden)
        w1 = y[classes * hidden:].reshape(hidden, d)
        return (U_val @ w1.T) @ w2.T

    def _grad_y_from_logit_grad(G, U, y):
        # G: (n, classes) gradient wrt logits; returns flat gradient wrt y
        if arch == "linear":
            return (G.T @ U).ravel()
        w2 = y[: classes * hidden].reshape(classes, hidden)
        w1 = y[classes * hidden:].reshape(hidden, d)
        H = U @ w1.T
        g2 = G.T @ H
        g1 = w2.T @ G.T @ U
        return np.concatenate([g2.ravel(), g1.ravel()])

    def eval_f(x, y):
        ce = _cross_entropy(_tr_logits(y), v_tr)
        return float(_sigmoid(x) @ ce)

    def eval_F(x, y):
        return float(_cross_entropy(_val_logits(y), v_val).sum())

    def grad_f_y(x, y):
        logits = _tr_logits(y)
        G = _softmax(logits)
        G[np.arange(n_tr), v_tr] -= 1.0
        G *= _sigmoid(x)[:, None]
        return _grad_y_from_logit_grad(G, U_tr, y)

    def grad_f_x(x, y):
        ce = _cross_entropy(_tr_logits(y), v_tr)
        s = _sigmoid(x)
        return s * (1.0 - s) * ce

    def grad_F_y(x, y):
        logits = _val_logits(y)
        G = _softmax(logits)
        G[np.arange(n_val), v_val] -= 1.0
        return _grad_y_from_logit_grad(G, U_val, y)

    def grad_F_x(x, y):
        return np.zeros(n_tr)

    return HyperCleanProblem(
        dim_x=n_tr, dim_y=dim_y,
        eval_F=eval_F, eval_f=eval_f,
        grad_F_x=grad_F_x, grad_F_y=grad_F_y,
        grad_f_x=grad_f_x, grad_f_y=grad_f_y,
        name=f"hyperclean(d={d},classes={classes},arch={arch},seed={seed})",
        U_tr=U_tr, v_tr=v_tr, U_val=U_val, v_val=v_val,
        U_test=U_test, v_test=v_test,
        corruption_mask=mask, arch=arch, classes=classes,
        hidden=hidden, seed=seed,
    )


def _sigmoid(x):
    out = np.empty_like(np.asarray(x, dtype=float))
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def detection_f1(x: np.ndarray, mask: np.ndarray):
    """Precision/recall/F1 of the rule "sample i is contaminated iff x_i <= 0".

    Returns zeros for degenerate cases (no predictions against a nonempty
    mask, or no true positives).
    """
    x = np.asarray(x)
    mask = np.asarray(mask, dtype=bool)
    if x.shape != mask.shape:
        raise DimensionError("weights and mask must have the same length")
    pred = x <= 0
    tp = int(np.sum(pred & mask))
    fp = int(np.sum(pred & ~mask))
    fn = int(np.sum(~pred & mask))
    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return precision, recall, f1


def train_classifier(problem: HyperCleanProblem, x: np.ndarray,
                     steps: int = 400, lr: float = 0.05) -> np.ndarray:
    """Minimize the weighted training loss f(x, .) by Adam from zero weights.

    Used to compare classifiers trained under learned versus uniform sample
    weights with an identical optimization budget.
    """
    y = np.zeros(problem.dim_y)
    if problem.arch == "two-layer-linear":
        # zero init is a saddle of the factored net; break symmetry deterministically
        rng = np.random.default_rng(problem.seed + 1)
        y = 0.1 * rng.standard_normal(problem.dim_y)
    m = np.zeros_like(y)
    v = np.zeros_like(y)
    for t in range(1, steps + 1):
        g = problem.grad_f_y(x, y)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        mhat = m / (1.0 - 0.9 ** t)
        vhat = v / (1.0 - 0.999 ** t)
        y = y - lr * mhat / (np.sqrt(vhat) + 1e-8)
    return y
