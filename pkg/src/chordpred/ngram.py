"""Interpolated Kneser-Ney chord model with beam-search sequence prediction.

The model is trained on whole tracks as index sequences and queried with
beat contexts.  The highest order uses raw counts; every lower order uses
continuation counts (the number of distinct symbols seen immediately before
the gram), and the unigram interpolates with the uniform distribution over
the alphabet, so every conditional probability is strictly positive.

A single start symbol stands in for everything before the first beat of a
track.  Because nothing ever precedes it, grams led by the start symbol have
zero continuation count and short start-anchored contexts simply fall
through to their start-free suffix.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .chords import Alphabet, parse_chord, reduce_chord, render_chord
from .chords import alphabet as canonical_alphabet
from .corpus import BeatTrack, WindowPair

START = -1
START_LABEL = "<s>"
DEFAULT_ORDER = 9
DEFAULT_BEAM_WIDTH = 100

_EMPTY = -2  # left-fill for histories shorter than the context length
_MEMO_LIMIT = 50_000


class _Level:
    """Counts for one order: context -> symbol -> count, with aggregates."""

    __slots__ = ("contexts", "totals", "types")

    def __init__(self):
        self.contexts: dict[tuple, dict[int, int]] = {}
        self.totals: dict[tuple, int] = {}
        self.types: dict[tuple, int] = {}

    def add(self, context: tuple, symbol: int, count: int) -> None:
        by_symbol = self.contexts.setdefault(context, {})
        by_symbol[symbol] = by_symbol.get(symbol, 0) + count

    def finalize(self) -> None:
        for context, by_symbol in self.contexts.items():
            self.totals[context] = sum(by_symbol.values())
            self.types[context] = len(by_symbol)

    def discount(self) -> float:
        # absolute discount n1 / (n1 + 2 n2); 0.5 when the histogram is
        # too thin to estimate (no singletons or no doubletons)
        ones = twos = 0
        for by_symbol in self.contexts.values():
            for count in by_symbol.values():
                if count == 1:
                    ones += 1
                elif count == 2:
                    twos += 1
        if ones == 0 or twos == 0:
            return 0.5
        return ones / (ones + 2.0 * twos)


class KneserNeyModel:
    """Interpolated Kneser-Ney over a chord alphabet, default order 9."""

    def __init__(self, alphabet: Alphabet, order: int = DEFAULT_ORDER):
        if order < 2:
            raise ValueError(f"order must be at least 2, got {order}")
        self.alphabet = alphabet
        self.order = int(order)
        self._levels: list[_Level] = [_Level() for _ in range(self.order)]
        self._discounts: list[float] = [0.5] * self.order
        self._memo: dict[tuple, np.ndarray] = {}

    # ------------------------------------------------------------------
    # training

    def fit(self, sequences) -> "KneserNeyModel":
        """Count grams over index sequences; a start symbol is prepended."""
        size = len(self.alphabet)
        raw: list[Counter] = [Counter() for _ in range(self.order + 1)]
        for sequence in sequences:
            track = [START]
            for symbol in sequence:
                if not 0 <= symbol < size:
                    raise ValueError(f"symbol {symbol} outside alphabet")
                track.append(int(symbol))
            for n in range(1, self.order + 1):
                counts = raw[n]
                for i in range(len(track) - n + 1):
                    counts[tuple(track[i:i + n])] += 1

        levels = [_Level() for _ in range(self.order)]
        for gram, count in raw[self.order].items():
            levels[self.order - 1].add(gram[:-1], gram[-1], count)
        for n in range(1, self.order):
            # continuation counts: one per distinct left extension
            level = levels[n - 1]
            for gram in raw[n + 1]:
                level.add(gram[1:-1], gram[-1], 1)
        for level in levels:
            level.finalize()
        self._levels = levels
        self._discounts = [level.discount() for level in levels]
        self._memo = {}
        return self

    # ------------------------------------------------------------------
    # probabilities

    def conditional(self, context) -> np.ndarray:
        """P(next symbol | context) over the alphabet; sums to one.

        The context is a sequence of alphabet indices, optionally led by
        START, and is trimmed to the last ``order - 1`` entries.
        """
        key = tuple(int(s) for s in context)[-(self.order - 1):]
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        vector = self._estimate(key)
        vector.flags.writeable = False
        if len(self._memo) >= _MEMO_LIMIT:
            self._memo.clear()
        self._memo[key] = vector
        return vector

    def _estimate(self, context: tuple) -> np.ndarray:
        size = len(self.alphabet)
        if not context:
            level = self._levels[0]
            uniform = np.full(size, 1.0 / size)
            by_symbol = level.contexts.get(())
            if not by_symbol:
                return uniform
            total = level.totals[()]
            discount = self._discounts[0]
            vector = np.zeros(size)
            for symbol, count in by_symbol.items():
                vector[symbol] = max(count - discount, 0.0) / total
            backoff = discount * level.types[()] / total
            return vector + backoff * uniform
        level = self._levels[len(context)]
        by_symbol = level.contexts.get(context)
        if not by_symbol:
            return self.conditional(context[1:]).copy()
        total = level.totals[context]
        discount = self._discounts[len(context)]
        vector = np.zeros(size)
        for symbol, count in by_symbol.items():
            vector[symbol] = max(count - discount, 0.0) / total
        backoff = discount * level.types[context] / total
        return vector + backoff * self.conditional(context[1:])

    # ------------------------------------------------------------------
    # beam search

    def beam_predict(self, context, steps: int = 8,
                     beam_width: int = DEFAULT_BEAM_WIDTH,
                     trace: list | None = None) -> np.ndarray:
        """Marginal distribution of each of the next ``steps`` symbols.

        Maintains up to ``beam_width`` continuation histories in the log
        domain.  After each step the survivors are renormalized, so every
        returned row sums to one.  Ties at the cut are broken by history,
        lexicographically, which keeps runs reproducible.  When ``trace``
        is given, one dict of selection diagnostics is appended per step.
        """
        if beam_width < 1:
            raise ValueError("beam width must be positive")
        size = len(self.alphabet)
        span = self.order - 1
        trimmed = tuple(int(s) for s in context)[-span:]
        histories = np.full((1, span), _EMPTY, dtype=np.int64)
        if trimmed:
            histories[0, -len(trimmed):] = trimmed
        log_probs = np.zeros(1)
        marginals = np.zeros((steps, size))

        for step in range(steps):
            rows = []
            for history in histories:
                key = tuple(int(s) for s in history if s != _EMPTY)
                rows.append(np.log(self.conditional(key)))
            candidates = log_probs[:, None] + np.asarray(rows)
            flat = candidates.reshape(-1)
            next_histories = np.concatenate(
                [np.repeat(histories[:, 1:], size, axis=0),
                 np.tile(np.arange(size, dtype=np.int64), len(histories))[:, None]],
                axis=1)
            keep = min(beam_width, flat.size)
            # primary key: probability, descending; then history columns
            keys = tuple(next_histories[:, column]
                         for column in range(span - 1, -1, -1)) + (-flat,)
            order = np.lexsort(keys)
            kept, dropped = order[:keep], order[keep:]
            if trace is not None:
                trace.append({
                    "step": step,
                    "candidates": int(flat.size),
                    "kept": int(keep),
                    "lowest_kept": float(flat[kept[-1]]),
                    "highest_dropped": float(flat[dropped[0]]) if dropped.size else None,
                })
            histories = next_histories[kept]
            log_probs = flat[kept]
            shift = log_probs.max()
            log_probs -= shift + np.log(np.exp(log_probs - shift).sum())
            marginals[step] = np.bincount(histories[:, -1],
                                          weights=np.exp(log_probs),
                                          minlength=size)
        return marginals

    # ------------------------------------------------------------------
    # serialization

    def to_dict(self) -> dict:
        def label(symbol: int) -> str:
            if symbol == START:
                return START_LABEL
            return render_chord(self.alphabet.symbol_at(symbol))

        levels = []
        for level in self._levels:
            table = {}
            for context, by_symbol in level.contexts.items():
                key = "|".join(label(s) for s in context)
                table[key] = {label(s): c for s, c in by_symbol.items()}
            levels.append(table)
        return {
            "order": self.order,
            "alphabet": self.alphabet.level,
            "discounts": list(self._discounts),
            "levels": levels,
        }

    @classmethod
    def from_dict(cls, data: dict, alphabet: Alphabet | None = None) -> "KneserNeyModel":
        if alphabet is None:
            alphabet = canonical_alphabet(data["alphabet"])
        model = cls(alphabet, order=data["order"])

        def index(label: str) -> int:
            if label == START_LABEL:
                return START
            return alphabet.index_of(parse_chord(label))

        levels = []
        for table in data["levels"]:
            level = _Level()
            for key, by_symbol in table.items():
                context = tuple(index(part) for part in key.split("|")) if key else ()
                for label, count in by_symbol.items():
                    level.add(context, index(label), count)
            level.finalize()
            levels.append(level)
        if len(levels) != model.order:
            raise ValueError("level count disagrees with model order")
        model._levels = levels
        model._discounts = [float(d) for d in data["discounts"]]
        return model


# ----------------------------------------------------------------------
# corpus adapters


def track_indices(track: BeatTrack, alphabet: Alphabet) -> list[int]:
    """A track as alphabet indices, chords reduced to the alphabet."""
    return [alphabet.index_of(reduce_chord(c, alphabet)) for c in track.chords]


def window_context(pair: WindowPair, alphabet: Alphabet) -> list[int]:
    """A window's input as a model context; the pad run becomes START."""
    indices = [alphabet.index_of(reduce_chord(c, alphabet)) for c in pair.input]
    if pair.pad_count:
        return [START] + indices[pair.pad_count:]
    return indices
