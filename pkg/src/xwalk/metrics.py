"""Frame-level metrics, the instance-level temporal metric, and the paired
t-test used for model comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    EmptyEvaluation,
    IncompleteSequence,
    MismatchedPredictions,
)

SIGNIFICANCE_P = 1e-4
CLASSIFICATION_THRESHOLD = 0.5


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def p(self) -> int:
        return self.tp + self.fn

    @property
    def n(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.p + self.n


@dataclass(frozen=True)
class InstanceSpan:
    sequence_id: str
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.start_frame > self.end_frame:
            raise ValueError("start_frame after end_frame")

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame + 1


@dataclass(frozen=True)
class EvalReport:
    counts: ConfusionCounts
    accuracy: float
    f1: float
    precision: float
    recall: float
    positive_accuracy: float
    negative_accuracy: float
    instance_accuracy: Optional[float] = None


def confusion(
    preds: Sequence[Tuple[str, float]],
    truth: Sequence[Tuple[str, str]],
    threshold: float = CLASSIFICATION_THRESHOLD,
) -> ConfusionCounts:
    """Tally a confusion matrix; a prediction is positive iff prob > threshold."""
    pred_map = dict(preds)
    truth_map = dict(truth)
    if set(pred_map) != set(truth_map) or len(pred_map) != len(preds) or len(
        truth_map
    ) != len(truth):
        raise MismatchedPredictions("prediction and truth id sets differ")
    tp = tn = fp = fn = 0
    for sample_id, prob in pred_map.items():
        predicted_positive = prob > threshold
        actually_positive = truth_map[sample_id] == "positive"
        if predicted_positive and actually_positive:
            tp += 1
        elif predicted_positive:
            fp += 1
        elif actually_positive:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def accuracy(c: ConfusionCounts) -> float:
    if c.total == 0:
        raise EmptyEvaluation("no evaluated samples")
    return (c.tp + c.tn) / c.total


def precision(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fp) if c.tp + c.fp > 0 else 0.0


def recall(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fn) if c.tp + c.fn > 0 else 0.0


def f1_degenerate(c: ConfusionCounts) -> bool:
    return c.tp + c.fp == 0 or c.tp + c.fn == 0 or c.tp == 0


def f1(c: ConfusionCounts) -> float:
    """Harmonic mean of precision and recall; 0 in degenerate cases."""
    p = precision(c)
    r = recall(c)
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def evaluate(
    preds: Sequence[Tuple[str, float]],
    truth: Sequence[Tuple[str, str]],
    threshold: float = CLASSIFICATION_THRESHOLD,
    instance_acc: Optional[float] = None,
) -> EvalReport:
    c = confusion(preds, truth, threshold)
    return EvalReport(
        counts=c,
        accuracy=accuracy(c),
        f1=f1(c),
        precision=precision(c),
        recall=recall(c),
        positive_accuracy=c.tp / c.p if c.p else 0.0,
        negative_accuracy=c.tn / c.n if c.n else 0.0,
        instance_accuracy=instance_acc,
    )


def instance_accuracy(
    preds: Dict[str, Dict[int, bool]],
    spans: Sequence[InstanceSpan],
    inclusive: bool = False,
) -> float:
    """Fraction of instances predicted positive on a majority of their frames.

    The majority is strict (more than half) by default; ``inclusive``
    switches to at-least-half.
    """
    if not spans:
        raise EmptyEvaluation("no instance spans")
    hits = 0
    for span in spans:
        frames = preds.get(span.sequence_id)
        if frames is None:
            raise IncompleteSequence(f"no predictions for sequence {span.sequence_id}")
        correct = 0
        for frame in range(span.start_frame, span.end_frame + 1):
            if frame not in frames:
                raise IncompleteSequence(
                    f"sequence {span.sequence_id} missing frame {frame}"
                )
            if frames[frame]:
                correct += 1
        half = span.length / 2.0
        if correct > half or (inclusive and correct >= half):
            hits += 1
    return hits / len(spans)


# -- paired t-test ---------------------------------------------------------


@dataclass(frozen=True)
class TTestResult:
    t: float
    p_two_sided: float
    significant: bool
    degenerate: bool = False


def paired_t_test(
    a: Sequence[float], b: Sequence[float], alpha: float = SIGNIFICANCE_P
) -> TTestResult:
    """Two-sided paired t-test on per-run metric pairs."""
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 pairs")
    d = [x - y for x, y in zip(a, b)]
    mean = sum(d) / n
    var = sum((x - mean) ** 2 for x in d) / (n - 1)
    if var == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, p_two_sided=1.0, significant=False, degenerate=True)
        t = math.inf if mean > 0 else -math.inf
        return TTestResult(t=t, p_two_sided=0.0, significant=True, degenerate=True)
    t = mean / math.sqrt(var / n)
    p = student_t_sf_two_sided(t, n - 1)
    return TTestResult(t=t, p_two_sided=p, significant=p < alpha)


def student_t_sf_two_sided(t: float, dof: int) -> float:
    """Two-sided tail probability of Student's t with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1")
    x = dof / (dof + t * t)
    return regularized_incomplete_beta(dof / 2.0, 0.5, x)


def regularized_incomplete_beta(a: float, b: float, x: float, tol: float = 1e-12) -> float:
    """Regularized incomplete beta I_x(a, b) by Lentz continued fraction."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    # Use the symmetry relation where the continued fraction converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x, tol) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x, tol) / b


def _beta_cf(a: float, b: float, x: float, tol: float) -> float:
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


# -- file formats ----------------------------------------------------------


def write_predictions(path, preds: Sequence[Tuple[str, float]]) -> None:
    """One record per line: ``sample_id<TAB>prob_positive`` with 6 decimals."""
    with open(path, "w", encoding="utf-8") as fh:
        for sample_id, prob in preds:
            fh.write(f"{sample_id}\t{prob:.6f}\n")


def read_predictions(path) -> List[Tuple[str, float]]:
    preds = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected sample_id<TAB>prob")
            sample_id, prob_text = parts
            try:
                prob = float(prob_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad probability {prob_text!r}") from exc
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"{path}:{lineno}: probability out of [0,1]: {prob}")
            preds.append((sample_id, prob))
    return preds


def read_spans(path) -> List[InstanceSpan]:
    """One record per line: ``sequence_id<TAB>start_frame<TAB>end_frame``."""
    spans = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected sequence_id<TAB>start<TAB>end")
            spans.append(
                InstanceSpan(
                    sequence_id=parts[0],
                    start_frame=int(parts[1]),
                    end_frame=int(parts[2]),
                )
            )
    return spans
