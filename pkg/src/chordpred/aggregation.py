"""Multi-scale temporal aggregation of chord windows.

An 8-beat window is first one-hot encoded beat by beat (scale 1).  Coarser
views sum adjacent pairs of vectors, so the vector at index i of scale 2n
is the sum of vectors 2i and 2i+1 of scale n.  Entries stay raw occurrence
counts; nothing is normalized, so total mass is conserved across scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chords import Alphabet
from .corpus import WINDOW


class OddLength(ValueError):
    """Sequence cannot be pairwise aggregated."""


@dataclass(eq=False)
class ScaleSequence:
    """Count vectors over an alphabet at one temporal scale.

    ``vectors`` has shape (8 / scale, alphabet size); each row sums to the
    scale, the number of beats it covers.
    """

    scale: int
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")

    def flat(self) -> np.ndarray:
        """Row-major flattening used as network input."""
        return self.vectors.reshape(-1)


def one_hot_window(window, a: Alphabet) -> ScaleSequence:
    """Scale-1 view of an 8-chord window: one one-hot row per beat."""
    if len(window) != WINDOW:
        raise ValueError(f"expected {WINDOW} chords, got {len(window)}")
    vectors = np.zeros((WINDOW, len(a)))
    for row, chord in enumerate(window):
        vectors[row, a.index_of(chord)] = 1.0
    return ScaleSequence(1, vectors)


def aggregate(s: ScaleSequence) -> ScaleSequence:
    """Halve the temporal resolution by summing adjacent vector pairs."""
    count = s.vectors.shape[0]
    if count % 2 != 0:
        raise OddLength(f"cannot pair {count} vectors")
    vectors = s.vectors.reshape(count // 2, 2, -1).sum(axis=1)
    return ScaleSequence(s.scale * 2, vectors)


def scale_stack(window, a: Alphabet) -> dict[int, ScaleSequence]:
    """The three views used by the multi-scale predictor: scales 1, 2 and 4."""
    s1 = one_hot_window(window, a)
    s2 = aggregate(s1)
    return {1: s1, 2: s2, 4: aggregate(s2)}
