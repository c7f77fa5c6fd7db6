"""Toy fine-tuning loop: embeddings stay frozen, only the span encoder and a
linear classifier head are trained with Adam + decoupled weight decay and a
linear warmup/decay schedule."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import encoder as enc
from .errors import EmptyInputError, NumericError, ParseError, ShapeError
from .ngrams import NgramDictionary
from .segment import (
    identity_alignment,
    normalize_and_tokenize,
    project_to_subwords,
    segment_greedy,
    segment_random,
)
from .toyenc import ToyEncoderConfig, toy_encode

CLS_ONLY = "cls_only"


@dataclass(frozen=True)
class LabeledExample:
    label: int
    text: str = ""
    text_b: str | None = None


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    warmup_ratio: float = 0.1
    weight_decay: float = 0.01
    batch_size: int = 32
    max_epochs: int = 5
    seed: int = 42
    variant: str = "cnn_cnn"  # encoder variant, or "cls_only" baseline
    r: int = 16
    l: int = 8
    k: int = 3
    segmentation: str = "greedy"  # greedy | random
    random_max_len: int = 3

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0.0 <= self.warmup_ratio < 1.0):
            raise ValueError("warmup_ratio must be in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def cross_entropy(logits: np.ndarray, label: int):
    """Softmax cross-entropy; returns (loss, gradient on logits)."""
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise NumericError("logits contain non-finite values")
    if not (0 <= label < logits.shape[0]):
        raise ValueError(f"label {label} out of range for {logits.shape[0]} classes")
    z = logits - logits.max()
    ez = np.exp(z)
    p = ez / ez.sum()
    loss = -float(np.log(p[label]))
    grad = p.copy()
    grad[label] -= 1.0
    return loss, grad


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: dict,
    step: int,
    lr: float,
    weight_decay: float = 0.0,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """In-place Adam update with bias correction and decoupled weight decay."""
    if step < 1:
        raise ValueError("step must be >= 1")
    for name, theta in params.items():
        g = grads[name]
        if name not in state:
            state[name] = (np.zeros_like(theta), np.zeros_like(theta))
        m, v = state[name]
        m[:] = beta1 * m + (1.0 - beta1) * g
        v[:] = beta2 * v + (1.0 - beta2) * g * g
        mhat = m / (1.0 - beta1**step)
        vhat = v / (1.0 - beta2**step)
        theta -= lr * mhat / (np.sqrt(vhat) + eps)
        if weight_decay:
            theta -= lr * weight_decay * theta


def lr_at_step(step: int, total_steps: int, base_lr: float, warmup_ratio: float) -> float:
    """Linear warmup to base_lr, then linear decay to zero at total_steps."""
    if not (0 <= step <= total_steps):
        raise ValueError("step must be in [0, total_steps]")
    warmup = warmup_ratio * total_steps
    if warmup > 0 and step < warmup:
        return base_lr * step / warmup
    if total_steps == warmup:
        return base_lr
    return base_lr * (total_steps - step) / (total_steps - warmup)


# ---------------------------------------------------------------------------
# dataset I/O


def load_dataset(path) -> list[LabeledExample]:
    """JSON-lines: {"text": str, "label": int} or
    {"text_a": str, "text_b": str, "label": int}."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                label = int(rec["label"])
                if "text" in rec:
                    out.append(LabeledExample(label, str(rec["text"])))
                else:
                    out.append(LabeledExample(label, str(rec["text_a"]), str(rec["text_b"])))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise ParseError(lineno, "expected {'text'|'text_a','text_b', 'label'}") from None
    return out


# ---------------------------------------------------------------------------
# training


def _prepare(example: LabeledExample, dictionary: NgramDictionary, enc_cfg: ToyEncoderConfig, cfg: TrainConfig):
    """Freeze everything input-side: tokens, spans, embeddings, boundaries.

    Sentence pairs are segmented independently and their span sequences
    concatenated in order over the concatenated word sequence.
    """
    words_a = normalize_and_tokenize(example.text)

    def seg(words, salt):
        if cfg.segmentation == "random":
            return segment_random(words, cfg.seed + salt, cfg.random_max_len)
        return segment_greedy(dictionary, words)

    spans = list(seg(words_a, 0).spans)
    words = list(words_a.words)
    if example.text_b is not None:
        words_b = normalize_and_tokenize(example.text_b)
        off = len(words)
        spans += [(s + off, e + off) for s, e in seg(words_b, 1).spans]
        words += list(words_b.words)
    T = toy_encode(words, enc_cfg)
    from .segment import SpanPartition

    boundaries = project_to_subwords(
        SpanPartition(tuple(spans)), identity_alignment(len(words), cls_offset=1)
    )
    return T, boundaries


def _head_forward(head_w: np.ndarray, head_b: np.ndarray, feat: np.ndarray) -> np.ndarray:
    if head_w.shape[0] != feat.shape[0]:
        raise ShapeError(f"head expects width {head_w.shape[0]}, got {feat.shape[0]}")
    return feat @ head_w + head_b


@dataclass
class TrainResult:
    enc_params: enc.EncoderParams | None
    head_w: np.ndarray
    head_b: np.ndarray
    history: list[dict] = field(default_factory=list)


def train(
    train_set: list[LabeledExample],
    dev_set: list[LabeledExample],
    dictionary: NgramDictionary,
    enc_cfg: ToyEncoderConfig,
    cfg: TrainConfig,
    num_labels: int = 2,
) -> TrainResult:
    """Train encoder + head on frozen toy embeddings; returns params and a
    per-epoch history of train loss and dev accuracy."""
    if not train_set:
        raise EmptyInputError("training set is empty")
    d = enc_cfg.d
    rng = np.random.default_rng(cfg.seed)
    cls_only = cfg.variant == CLS_ONLY

    prepared = [_prepare(ex, dictionary, enc_cfg, cfg) for ex in train_set]
    prepared_dev = [_prepare(ex, dictionary, enc_cfg, cfg) for ex in dev_set]

    enc_params = None if cls_only else enc.EncoderParams.init(d, cfg.k, rng)
    feat_width = d if cls_only else 2 * d
    head_w = rng.uniform(-0.05, 0.05, (feat_width, num_labels))
    head_b = rng.uniform(-0.05, 0.05, num_labels)

    trainables: dict[str, np.ndarray] = {"head_w": head_w, "head_b": head_b}
    if enc_params is not None:
        trainables.update(enc_params.arrays())
    state: dict = {}
    steps_per_epoch = -(-len(train_set) // cfg.batch_size)
    total_steps = steps_per_epoch * cfg.max_epochs
    step = 0
    history: list[dict] = []

    def example_forward(T, boundaries):
        if cls_only:
            return np.asarray(T[0], dtype=np.float64), None
        return enc.forward(T, boundaries, enc_params, cfg.variant, cfg.r, cfg.l)

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(train_set))
        epoch_loss = 0.0
        for b0 in range(0, len(order), cfg.batch_size):
            batch = order[b0 : b0 + cfg.batch_size]
            gsum = {name: np.zeros_like(arr) for name, arr in trainables.items()}
            for idx in batch:  # fixed order for reproducible accumulation
                T, boundaries = prepared[idx]
                feat, cache = example_forward(T, boundaries)
                logits = _head_forward(head_w, head_b, feat)
                loss, dlogits = cross_entropy(logits, train_set[idx].label)
                epoch_loss += loss
                gsum["head_w"] += np.outer(feat, dlogits)
                gsum["head_b"] += dlogits
                if not cls_only:
                    dfeat = head_w @ dlogits
                    g = enc.backward(cache, dfeat)
                    for name in enc_params.arrays():
                        gsum[name] += g[name]
            scale = 1.0 / len(batch)
            for name in gsum:
                gsum[name] *= scale
            step += 1
            lr = lr_at_step(step, total_steps, cfg.learning_rate, cfg.warmup_ratio)
            adam_step(trainables, gsum, state, step, lr, cfg.weight_decay)
        dev_acc = None
        if dev_set:
            preds = _predict_prepared(prepared_dev, example_forward, head_w, head_b)
            dev_acc = float(np.mean([p == ex.label for p, ex in zip(preds, dev_set)]))
        history.append(
            {"epoch": epoch, "train_loss": epoch_loss / len(train_set), "dev_accuracy": dev_acc}
        )
    return TrainResult(enc_params, head_w, head_b, history)


def _predict_prepared(prepared, example_forward, head_w, head_b):
    preds = []
    for T, boundaries in prepared:
        feat, _ = example_forward(T, boundaries)
        logits = _head_forward(head_w, head_b, feat)
        preds.append(int(np.argmax(logits)))  # ties go to the first index
    return preds


def predict(
    result: TrainResult,
    examples: list[LabeledExample],
    dictionary: NgramDictionary,
    enc_cfg: ToyEncoderConfig,
    cfg: TrainConfig,
):
    """Deterministic argmax predictions; returns (labels, logits)."""
    cls_only = result.enc_params is None
    labels = []
    all_logits = []
    for ex in examples:
        T, boundaries = _prepare(ex, dictionary, enc_cfg, cfg)
        if cls_only:
            feat = np.asarray(T[0], dtype=np.float64)
        else:
            feat, _ = enc.forward(T, boundaries, result.enc_params, cfg.variant, cfg.r, cfg.l)
        logits = _head_forward(result.head_w, result.head_b, feat)
        all_logits.append(logits)
        labels.append(int(np.argmax(logits)))
    return labels, all_logits
