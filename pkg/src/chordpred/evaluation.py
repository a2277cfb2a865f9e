"""Metrics over predicted chord distributions.

All metric functions take a prediction tensor (windows, 8, alphabet) whose
rows are probability distributions, and an integer target matrix
(windows, 8).  Accuracies are percentages; distances are measured between
pitch-class vectors, so harmonically close mistakes cost less than remote
ones.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .chords import Alphabet, pitch_class_vector
from .corpus import WINDOW

log = logging.getLogger(__name__)


class ZeroProbability(ValueError):
    """A realized chord was assigned probability zero or less."""


class Misaligned(ValueError):
    """Predictions and targets disagree in shape or labeling."""


class EmptyDataset(ValueError):
    """No windows to evaluate."""


def _check(predictions: np.ndarray, targets: np.ndarray) -> None:
    if predictions.ndim != 3 or targets.ndim != 2:
        raise Misaligned("expected (n, positions, alphabet) and (n, positions)")
    if predictions.shape[:2] != targets.shape:
        raise Misaligned(f"{predictions.shape} vs {targets.shape}")
    if predictions.shape[0] == 0:
        raise EmptyDataset("no windows")


def _realized(predictions: np.ndarray, targets: np.ndarray) -> np.ndarray:
    n, positions = targets.shape
    return predictions[np.arange(n)[:, None], np.arange(positions), targets]


def accuracy(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Percentage of positions whose most probable chord is the target.

    Ties resolve to the lowest alphabet index.
    """
    _check(predictions, targets)
    return float((predictions.argmax(axis=2) == targets).mean() * 100.0)


def perplexity(predictions: np.ndarray, targets: np.ndarray) -> float:
    """exp of the mean negative log probability of the realized chords."""
    _check(predictions, targets)
    p = _realized(predictions, targets)
    if (p <= 0.0).any():
        raise ZeroProbability("a realized chord has zero probability")
    return float(np.exp(-np.log(p).mean()))


def mean_rank(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean rank of the realized chord, counting only strictly higher
    probabilities, so a tie for first place still ranks 1."""
    _check(predictions, targets)
    p = _realized(predictions, targets)
    higher = (predictions > p[:, :, None]).sum(axis=2)
    return float((1.0 + higher).mean())


def pitch_matrix(a: Alphabet) -> np.ndarray:
    """Rows of pitch-class vectors in alphabet order."""
    return np.stack([pitch_class_vector(symbol) for symbol in a])


def probabilistic_distance(predictions: np.ndarray, targets: np.ndarray,
                           a: Alphabet) -> float:
    """Mean distance between the expected pitch-class vector under the
    prediction and the target's pitch-class vector."""
    _check(predictions, targets)
    pitches = pitch_matrix(a)
    expected = predictions @ pitches
    diff = expected - pitches[targets]
    return float(np.sqrt((diff * diff).sum(axis=2)).mean())


def binary_distance(predictions: np.ndarray, targets: np.ndarray,
                    a: Alphabet) -> float:
    """Mean pitch-class distance between the argmax chord and the target."""
    _check(predictions, targets)
    pitches = pitch_matrix(a)
    diff = pitches[predictions.argmax(axis=2)] - pitches[targets]
    return float(np.sqrt((diff * diff).sum(axis=2)).mean())


def downbeat_matrix(predictions: np.ndarray, targets: np.ndarray,
                    downbeats) -> dict[int, dict]:
    """Per-position accuracy grouped by the window's downbeat position.

    Returns {downbeat: {"accuracy": [... or None], "count": [...]}} with one
    entry per prediction position, for observed downbeat positions only.
    """
    _check(predictions, targets)
    downbeats = np.asarray(downbeats)
    if downbeats.shape != (targets.shape[0],):
        raise Misaligned("one downbeat position per window expected")
    hits = predictions.argmax(axis=2) == targets
    matrix: dict[int, dict] = {}
    for d in sorted(set(int(v) for v in downbeats)):
        rows = hits[downbeats == d]
        count = rows.shape[0]
        matrix[d] = {
            "accuracy": [float(column.mean() * 100.0) if count else None
                         for column in rows.T],
            "count": [count] * targets.shape[1],
        }
    return matrix


@dataclass
class EvalReport:
    """One model's metrics on one evaluation set."""

    model: str
    alphabet: str
    fold: int | None
    window_count: int
    accuracy: float
    perplexity: float | None
    mean_rank: float
    probabilistic_distance: float
    binary_distance: float
    downbeat: dict[int, dict]

    METRIC_FIELDS = ("accuracy", "perplexity", "mean_rank",
                     "probabilistic_distance", "binary_distance")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        data = dict(data)
        data["downbeat"] = {int(k): v for k, v in data["downbeat"].items()}
        return cls(**data)


def evaluate(predictor, pairs, fold: int | None = None) -> EvalReport:
    """Run a predictor over window pairs and compute every metric.

    A model that zeroes out a realized chord has no finite perplexity; that
    is reported as None rather than an error so the remaining metrics still
    come through.
    """
    if not pairs:
        raise EmptyDataset("no windows")
    a = predictor.alphabet
    predictions = predictor.predict_batch(pairs)
    targets = np.array([[a.index_of(chord) for chord in pair.target]
                        for pair in pairs])
    downbeats = [pair.downbeat_position for pair in pairs]
    try:
        complexity = perplexity(predictions, targets)
    except ZeroProbability:
        log.warning("model %s assigns zero probability to realized chords; "
                    "perplexity omitted", predictor.kind)
        complexity = None
    return EvalReport(
        model=predictor.kind,
        alphabet=a.level,
        fold=fold,
        window_count=len(pairs),
        accuracy=accuracy(predictions, targets),
        perplexity=complexity,
        mean_rank=mean_rank(predictions, targets),
        probabilistic_distance=probabilistic_distance(predictions, targets, a),
        binary_distance=binary_distance(predictions, targets, a),
        downbeat=downbeat_matrix(predictions, targets, downbeats),
    )


def aggregate_reports(reports) -> EvalReport:
    """Unweighted mean of fold reports; window and downbeat counts are
    summed.  Perplexity averages only if every fold has one."""
    reports = list(reports)
    if not reports:
        raise EmptyDataset("no reports")
    first = reports[0]
    if any(r.model != first.model or r.alphabet != first.alphabet
           for r in reports):
        raise Misaligned("reports mix models or alphabets")

    def mean(field):
        values = [getattr(r, field) for r in reports]
        if any(v is None for v in values):
            return None
        return float(np.mean(values))

    downbeat: dict[int, dict] = {}
    for d in sorted({key for r in reports for key in r.downbeat}):
        cells = [r.downbeat[d] for r in reports if d in r.downbeat]
        accuracies = []
        for position in range(WINDOW):
            values = [c["accuracy"][position] for c in cells
                      if c["accuracy"][position] is not None]
            accuracies.append(float(np.mean(values)) if values else None)
        counts = [sum(c["count"][position] for c in cells)
                  for position in range(WINDOW)]
        downbeat[d] = {"accuracy": accuracies, "count": counts}

    return EvalReport(
        model=first.model,
        alphabet=first.alphabet,
        fold=None,
        window_count=sum(r.window_count for r in reports),
        accuracy=mean("accuracy"),
        perplexity=mean("perplexity"),
        mean_rank=mean("mean_rank"),
        probabilistic_distance=mean("probabilistic_distance"),
        binary_distance=mean("binary_distance"),
        downbeat=downbeat,
    )
