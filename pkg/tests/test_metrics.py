import itertools
import math

import pytest

from spanseg.errors import DegenerateInputError, EmptyInputError, ValidationError
from spanseg.metrics import (
    classification_metrics,
    matthews_corr,
    mcnemar_chi2_p,
    mcnemar_exact_p,
    mcnemar_test,
    pearson_corr,
)


def test_classification_perfect():
    rep = classification_metrics([0, 1, 1], [0, 1, 1])
    assert rep == {"accuracy": 1.0, "f1": 1.0}


def test_f1_degenerate_all_negative():
    rep = classification_metrics([0, 0, 0], [0, 1, 1])
    assert rep["f1"] == 0.0


def test_f1_two_thirds():
    # TP=2, FP=1, FN=1
    preds = [1, 1, 1, 0, 0]
    labels = [1, 1, 0, 1, 0]
    assert classification_metrics(preds, labels)["f1"] == pytest.approx(2 / 3)


def test_empty_rejected():
    with pytest.raises(EmptyInputError):
        classification_metrics([], [])


def test_matthews_extremes():
    assert matthews_corr([0, 1, 0, 1], [0, 1, 0, 1]) == pytest.approx(1.0)
    assert matthews_corr([1, 0, 1, 0], [0, 1, 0, 1]) == pytest.approx(-1.0)
    # TP=TN=FP=FN=1
    assert matthews_corr([1, 1, 0, 0], [1, 0, 0, 1]) == pytest.approx(0.0)
    assert matthews_corr([1, 1], [1, 1]) == 0.0  # zero-factor convention


def test_matthews_symmetry():
    preds = [1, 0, 1, 1, 0, 0, 1]
    labels = [1, 1, 0, 1, 0, 1, 0]
    assert matthews_corr(preds, labels) == pytest.approx(matthews_corr(labels, preds))


def test_pearson_cases():
    x = [1.0, 2.0, 3.0, 4.0]
    assert pearson_corr(x, [2 * v for v in x]) == pytest.approx(1.0)
    assert pearson_corr(x, list(reversed(x))) == pytest.approx(-1.0)
    assert pearson_corr([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)
    with pytest.raises(DegenerateInputError):
        pearson_corr([1, 1, 1], [1, 2, 3])


def test_mcnemar_golden():
    res = mcnemar_test(b=10, c=2)
    assert res.method == "exact"
    assert res.p_value == pytest.approx(158 / 4096, abs=1e-12)
    assert mcnemar_test(b=5, c=5).p_value == 1.0
    assert mcnemar_test(b=0, c=0).p_value == 1.0


def test_mcnemar_swap_symmetry():
    for b, c in [(10, 2), (3, 7), (0, 4), (30, 12)]:
        assert mcnemar_test(b=b, c=c).p_value == pytest.approx(mcnemar_test(b=c, c=b).p_value)


def test_mcnemar_counts_from_predictions():
    labels = [1, 1, 0, 0, 1]
    preds_a = [1, 1, 0, 1, 0]  # correct on 0,1,2
    preds_b = [1, 0, 1, 1, 1]  # correct on 0,4
    res = mcnemar_test(labels, preds_a, preds_b)
    assert (res.b, res.c) == (2, 1)
    with pytest.raises(ValidationError):
        mcnemar_test([2, 1], [1, 1], [0, 1])


def test_exact_branch_equals_brute_force_enumeration():
    """Enumerate all 2^n equally likely discordance patterns; the p-value is
    the probability of a split at least as extreme (two-sided) as observed."""
    for n in range(0, 13):
        for b in range(n + 1):
            c = n - b
            lo = min(b, c)
            extreme = sum(
                1
                for pattern in itertools.product([0, 1], repeat=n)
                if min(sum(pattern), n - sum(pattern)) <= lo
            )
            expected = extreme / 2**n if n else 1.0
            assert mcnemar_exact_p(b, c) == pytest.approx(expected, abs=1e-12)


def test_chi2_branch_used_for_large_counts():
    res = mcnemar_test(b=20, c=10)
    assert res.method == "chi2"
    stat = (abs(20 - 10) - 1) ** 2 / 30
    assert res.p_value == pytest.approx(math.erfc(math.sqrt(stat / 2)))
    assert mcnemar_chi2_p(0, 0) == 1.0


def test_permutation_invariance():
    import random

    preds = [1, 0, 1, 1, 0, 0, 1, 1]
    labels = [1, 1, 0, 1, 0, 1, 0, 1]
    base_acc = classification_metrics(preds, labels)["accuracy"]
    base_mcc = matthews_corr(preds, labels)
    rng = random.Random(0)
    idx = list(range(len(preds)))
    rng.shuffle(idx)
    p2 = [preds[i] for i in idx]
    l2 = [labels[i] for i in idx]
    assert classification_metrics(p2, l2)["accuracy"] == pytest.approx(base_acc)
    assert matthews_corr(p2, l2) == pytest.approx(base_mcc)
