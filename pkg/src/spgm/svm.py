"""Hinge-loss l2-regularized SVM on bag-of-words features.

The composite split is f(w; xi) = (lam/2)||w||^2 for every sample and
h(w; xi) = max(0, 1 - y_xi x_xi' w), a hinge composition with a_xi =
-y_xi x_xi, so L_f = sigma_f = lam and the batch prox is an N-dimensional
box QP over [0,1]^N.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .problem import (
    Array,
    CompositeProblem,
    hinge_composition,
    sample_minibatch,
)
from .prox import build_dual, solve_dual_fast_gradient, solve_dual_prox_gradient

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric run."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


@dataclass(frozen=True)
class SvmDataset:
    """Count features X (m x n), labels y in {-1,+1}, and a train/test split.

    scaled holds the label-scaled matrix with column i = y_i * x_i, the form
    the specialized step works with.
    """

    features: Array            # (m, n)
    labels: Array              # (m,)
    train_indices: Array
    test_indices: Array
    vocabulary: tuple[str, ...] | None = None
    split_ratio: float = 0.8

    def __post_init__(self):
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("feature rows and labels disagree")

    @property
    def scaled(self) -> Array:
        """(n, m) matrix whose column i is y_i * x_i."""
        return (self.features * self.labels[:, None]).T

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def train_features(self) -> Array:
        return self.features[self.train_indices]

    def train_labels(self) -> Array:
        return self.labels[self.train_indices]


def _split_indices(m: int, ratio: float, rng: np.random.Generator | None):
    """First ceil(ratio*m) rows train unless an rng shuffles the order."""
    order = np.arange(m)
    if rng is not None:
        order = rng.permutation(m)
    cut = int(np.ceil(ratio * m))
    return order[:cut], order[cut:]


def build_bow_features(corpus: list[tuple[str, int]], vocab_size: int,
                       split_ratio: float = 0.8,
                       rng: np.random.Generator | None = None) -> SvmDataset:
    """Bag-of-words ingestion: count every word over the whole corpus, keep
    the vocab_size most frequent (ties broken lexicographically), and fill
    X[i, j] with the count of vocabulary word j in text i.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    if vocab_size < 1:
        raise ValueError("vocab_size must be at least 1")
    counts: dict[str, int] = {}
    tokenized = []
    for text, _ in corpus:
        toks = tokenize(text)
        tokenized.append(toks)
        for t in toks:
            counts[t] = counts.get(t, 0) + 1
    if len(counts) < vocab_size:
        raise ValueError(
            f"vocabulary too small: {len(counts)} distinct words < {vocab_size}")
    vocab = sorted(counts, key=lambda word: (-counts[word], word))[:vocab_size]
    index = {word: j for j, word in enumerate(vocab)}

    m = len(corpus)
    features = np.zeros((m, vocab_size))
    labels = np.empty(m)
    for i, ((_, label), toks) in enumerate(zip(corpus, tokenized)):
        labels[i] = label
        for t in toks:
            j = index.get(t)
            if j is not None:
                features[i, j] += 1.0
    train, test = _split_indices(m, split_ratio, rng)
    return SvmDataset(features=features, labels=labels,
                      train_indices=train, test_indices=test,
                      vocabulary=tuple(vocab), split_ratio=split_ratio)


def load_labeled_corpus(path) -> list[tuple[str, int]]:
    """One sample per line: a +1/-1 label token, a tab, then the text."""
    corpus = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                label_tok, text = line.split("\t", 1)
                label = int(label_tok)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad corpus line") from exc
            if label not in (-1, 1):
                raise ValueError(f"{path}:{lineno}: label must be +1 or -1")
            corpus.append((text, label))
    if not corpus:
        raise ValueError(f"{path}: empty corpus")
    return corpus


def load_sparse_dataset(path, n_features: int | None = None,
                        split_ratio: float = 0.8,
                        rng: np.random.Generator | None = None) -> SvmDataset:
    """Sparse numeric rows: "label idx:value idx:value ..." with 0-based idx."""
    rows: list[dict[int, float]] = []
    labels: list[int] = []
    max_idx = -1
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                label = int(parts[0])
                entries = {}
                for chunk in parts[1:]:
                    idx_s, val_s = chunk.split(":", 1)
                    entries[int(idx_s)] = float(val_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad sparse line") from exc
            if label not in (-1, 1):
                raise ValueError(f"{path}:{lineno}: label must be +1 or -1")
            if entries:
                max_idx = max(max_idx, max(entries))
            rows.append(entries)
            labels.append(label)
    if not rows:
        raise ValueError(f"{path}: empty dataset")
    n = n_features if n_features is not None else max_idx + 1
    features = np.zeros((len(rows), n))
    for i, entries in enumerate(rows):
        for j, val in entries.items():
            if j >= n:
                raise ValueError(f"{path}: feature index {j} out of range")
            features[i, j] = val
    train, test = _split_indices(len(rows), split_ratio, rng)
    return SvmDataset(features=features, labels=np.asarray(labels, dtype=float),
                      train_indices=train, test_indices=test,
                      split_ratio=split_ratio)


def build_svm_problem(dataset: SvmDataset, lam: float) -> CompositeProblem:
    """Composite problem over the training split."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    x_train = dataset.train_features()
    y_train = dataset.train_labels()
    hinge = hinge_composition(-(x_train * y_train[:, None]))

    def value(w, xi):
        return 0.5 * lam * float(w @ w)

    def grad(w, xi):
        return lam * w

    return CompositeProblem(
        dimension=dataset.n_features,
        sample_count=x_train.shape[0],
        smooth_value=value,
        smooth_grad=grad,
        nonsmooth=hinge,
        lipschitz_L=lam,
        strong_convexity=lam,
    )


def svm_spgm_step(dataset: SvmDataset, w: Array, mu: float, batch_size: int,
                  rng: np.random.Generator, lam: float, accuracy: float = 1e-9,
                  solver: str = "fast_gradient") -> Array:
    """Specialized SPG-M step: v = (1 - lam mu) w, then the hinge batch dual
    u in [0,1]^N maximizing -(mu/2N)||X~ u||^2 + u'(e - X~'v), recovered as
    w+ = v + (mu/N) X~ u with the label-scaled columns X~."""
    if not 0 < lam * mu < 1:
        raise ValueError("need 0 < lam*mu < 1")
    x_train = dataset.train_features()
    y_train = dataset.train_labels()
    batch = sample_minibatch(rng, x_train.shape[0], batch_size)
    v = (1.0 - lam * mu) * np.asarray(w, dtype=float)

    hinge = hinge_composition(-(x_train * y_train[:, None]))
    dual = build_dual(hinge, v, batch, mu)
    solve = solve_dual_fast_gradient if solver == "fast_gradient" else solve_dual_prox_gradient
    result = solve(dual, accuracy)
    # recover(u) = v + (mu/N) * X~_batch @ u since a_i = -y_i x_i
    return result.primal


@dataclass(frozen=True)
class SvmMetrics:
    accuracy: float
    hinge_loss: float
    error: float | None


def svm_metrics(dataset: SvmDataset, w: Array,
                w_ref: Array | None = None) -> SvmMetrics:
    """Test accuracy (sign(0) counts as +1), mean hinge over the training
    set, and squared distance to the reference weights when given."""
    w = np.asarray(w, dtype=float)
    x_test = dataset.features[dataset.test_indices]
    y_test = dataset.labels[dataset.test_indices]
    if len(y_test):
        predicted = np.where(x_test @ w >= 0.0, 1.0, -1.0)
        accuracy = float(np.mean(predicted == y_test))
    else:
        accuracy = float("nan")
    margins = dataset.train_labels() * (dataset.train_features() @ w)
    hinge_loss = float(np.mean(np.maximum(0.0, 1.0 - margins)))
    error = None
    if w_ref is not None:
        diff = w - np.asarray(w_ref, dtype=float)
        error = float(diff @ diff)
    return SvmMetrics(accuracy=accuracy, hinge_loss=hinge_loss, error=error)


def make_separable_corpus(n_samples: int, vocab_size: int,
                          rng: np.random.Generator) -> list[tuple[str, int]]:
    """Synthetic linearly separable text corpus with a thin margin.

    The vocabulary splits into a positive and a negative half. Each document
    mixes words from both halves but always contains strictly more from its
    own half, so the block weight vector (+1 on the first half, -1 on the
    second) separates the classes with margin >= 1 word. Most documents sit
    within a word or two of that margin, which makes the last percent of
    accuracy require balanced per-word weights rather than one crude step.
    """
    if vocab_size < 4:
        raise ValueError("need at least 4 vocabulary words")
    words = [f"w{j:03d}" for j in range(vocab_size)]
    half = vocab_size // 2
    own_pool = {1: words[:half], -1: words[half:]}
    corpus = []
    for _ in range(n_samples):
        label = 1 if rng.random() < 0.5 else -1
        n_against = int(rng.integers(0, 6))
        # margin mostly 1, occasionally larger
        margin = 1 + int(rng.geometric(0.6)) - 1
        n_for = n_against + 1 + margin
        toks = list(rng.choice(own_pool[label], size=n_for))
        if n_against:
            toks += list(rng.choice(own_pool[-label], size=n_against))
        rng.shuffle(toks)
        corpus.append((" ".join(toks), label))
    return corpus
