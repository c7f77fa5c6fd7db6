"""Classification metrics and the McNemar paired significance test."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateInputError, EmptyInputError, ValidationError

EXACT_THRESHOLD = 25  # discordant-pair count below which the exact test is used


def _check_pair(a, b):
    if len(a) != len(b):
        raise ValidationError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise EmptyInputError("metrics need at least one example")


def _confusion(preds, labels):
    tp = fp = tn = fn = 0
    for p, y in zip(preds, labels):
        if p == 1 and y == 1:
            tp += 1
        elif p == 1 and y == 0:
            fp += 1
        elif p == 0 and y == 0:
            tn += 1
        elif p == 0 and y == 1:
            fn += 1
        else:
            raise ValidationError(f"non-binary value in preds/labels: ({p}, {y})")
    return tp, fp, tn, fn


def classification_metrics(preds, labels) -> dict[str, float]:
    """Accuracy and binary F1 (positive class 1; F1 = 0 when P + R = 0)."""
    _check_pair(preds, labels)
    acc = sum(p == y for p, y in zip(preds, labels)) / len(preds)
    tp, fp, _, fn = _confusion(preds, labels)
    denom = 2 * tp + fp + fn
    f1 = 2 * tp / denom if denom else 0.0
    return {"accuracy": acc, "f1": f1}


def matthews_corr(preds, labels) -> float:
    _check_pair(preds, labels)
    tp, fp, tn, fn = _confusion(preds, labels)
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def pearson_corr(x, y) -> float:
    _check_pair(x, y)
    n = len(x)
    if n < 2:
        raise DegenerateInputError("pearson_corr needs at least two points")
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInputError("zero variance input")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class McNemarResult:
    b: int  # a correct, b wrong
    c: int  # a wrong, b correct
    p_value: float
    method: str  # "exact" or "chi2"


def mcnemar_exact_p(b: int, c: int) -> float:
    """Two-sided exact binomial p-value on the discordant pairs."""
    n = b + c
    if n == 0:
        return 1.0
    tail = sum(math.comb(n, k) for k in range(min(b, c) + 1)) * 0.5**n
    return min(1.0, 2.0 * tail)


def mcnemar_chi2_p(b: int, c: int) -> float:
    """Chi-square approximation with continuity correction, 1 dof."""
    n = b + c
    if n == 0:
        return 1.0
    stat = (abs(b - c) - 1.0) ** 2 / n
    return math.erfc(math.sqrt(stat / 2.0))


def mcnemar_counts(labels, preds_a, preds_b) -> tuple[int, int]:
    _check_pair(preds_a, preds_b)
    _check_pair(labels, preds_a)
    b = c = 0
    for y, pa, pb in zip(labels, preds_a, preds_b):
        if y not in (0, 1):
            raise ValidationError("McNemar requires binary labels")
        if pa == y and pb != y:
            b += 1
        elif pa != y and pb == y:
            c += 1
    return b, c


def mcnemar_test(labels=None, preds_a=None, preds_b=None, *, b: int | None = None, c: int | None = None) -> McNemarResult:
    """Exact binomial test when b + c < 25, else corrected chi-square."""
    if b is None or c is None:
        b, c = mcnemar_counts(labels, preds_a, preds_b)
    if b < 0 or c < 0:
        raise ValidationError("discordant counts must be non-negative")
    if b + c < EXACT_THRESHOLD:
        return McNemarResult(b, c, mcnemar_exact_p(b, c), "exact")
    return McNemarResult(b, c, mcnemar_chi2_p(b, c), "chi2")
