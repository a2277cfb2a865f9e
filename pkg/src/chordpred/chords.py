"""Chord symbols, pitch-class vectors, and the three nested chord alphabets.

Labels follow the ``root:quality`` convention (``A:min``, ``C#:maj7``) with
``N`` for no-chord and an implicit ``maj`` when the quality is omitted.
Arbitrary corpus labels are folded onto a closed set of 14 qualities at parse
time.  Three alphabets of increasing detail are built from that set:

* A1: major/minor triads plus no-chord (25 symbols)
* A2: adds dim, aug and the three common sevenths (85 symbols)
* A3: all 14 qualities (169 symbols)

Every quality has a single reduction path towards A1 (seventh chords drop to
their triad, dim/aug to the triad sharing their third, suspensions to
no-chord), so reducing via A2 or directly to A1 gives the same answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class ChordError(ValueError):
    """Base class for chord syntax failures."""


class MalformedLabel(ChordError):
    """Label text does not match the chord grammar."""


class UnknownQuality(ChordError):
    """Root parsed but the quality suffix is not recognized."""


class NotInAlphabet(ChordError):
    """Symbol is not a member of the alphabet."""


# Semitone offsets of the natural note letters.
_LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

# Canonical, sharps-only spellings used when rendering.
PITCH_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")

NO_CHORD_TOKENS = ("N", "NC", "N.C.")

# The 14 canonical qualities with their interval sets.  Insertion order is
# the fixed quality order: it ranks subset-match ties and fixes alphabet
# symbol enumeration, so it must never change.
QUALITY_INTERVALS: dict[str, frozenset[int]] = {
    "maj": frozenset({0, 4, 7}),
    "min": frozenset({0, 3, 7}),
    "dim": frozenset({0, 3, 6}),
    "aug": frozenset({0, 4, 8}),
    "maj6": frozenset({0, 4, 7, 9}),
    "min6": frozenset({0, 3, 7, 9}),
    "maj7": frozenset({0, 4, 7, 11}),
    "min7": frozenset({0, 3, 7, 10}),
    "minmaj7": frozenset({0, 3, 7, 11}),
    "7": frozenset({0, 4, 7, 10}),
    "dim7": frozenset({0, 3, 6, 9}),
    "hdim7": frozenset({0, 3, 6, 10}),
    "sus2": frozenset({0, 2, 7}),
    "sus4": frozenset({0, 5, 7}),
}

QUALITY_ORDER: tuple[str, ...] = tuple(QUALITY_INTERVALS)

# Which third each quality carries; suspensions carry none.
TRIAD_FAMILY = {
    "maj": "major-third", "aug": "major-third", "maj6": "major-third",
    "maj7": "major-third", "7": "major-third",
    "min": "minor-third", "dim": "minor-third", "min6": "minor-third",
    "min7": "minor-third", "minmaj7": "minor-third", "dim7": "minor-third",
    "hdim7": "minor-third",
    "sus2": "other", "sus4": "other",
}

ALPHABET_QUALITIES = {
    "A1": ("maj", "min"),
    "A2": ("maj", "min", "dim", "aug", "maj7", "min7", "7"),
    "A3": QUALITY_ORDER,
}

# One reduction step per quality, towards A1.  None means the quality has no
# triad ancestor and collapses to no-chord.  maj and min are terminal.
_REDUCTION_PARENT: dict[str, str | None] = {
    "maj6": "maj", "maj7": "maj", "7": "maj",
    "min6": "min", "min7": "min", "minmaj7": "min",
    "dim7": "dim", "hdim7": "dim",
    "dim": "min", "aug": "maj",
    "sus2": None, "sus4": None,
}

# Corpus spellings accepted on input in addition to the canonical names.
QUALITY_ALIASES = {
    "M": "maj", "m": "min", "M7": "maj7", "m7": "min7", "dom7": "7",
    "m7b5": "hdim7", "o": "dim", "o7": "dim7", "+": "aug", "sus": "sus4",
    "6": "maj6", "m6": "min6", "mM7": "minmaj7", "minMaj7": "minmaj7",
}

# Interval sets for extended qualities that fold onto a canonical quality
# through the largest-subset rule.  An empty base (pure degree list such as
# "(1,5)") starts from the root alone.
_EXTENDED_BASES: dict[str, frozenset[int]] = {
    "": frozenset({0}),
    "1": frozenset({0}),
    "5": frozenset({0, 7}),
    "9": frozenset({0, 2, 4, 7, 10}),
    "maj9": frozenset({0, 2, 4, 7, 11}),
    "M9": frozenset({0, 2, 4, 7, 11}),
    "min9": frozenset({0, 2, 3, 7, 10}),
    "m9": frozenset({0, 2, 3, 7, 10}),
    "11": frozenset({0, 2, 4, 5, 7, 10}),
    "min11": frozenset({0, 2, 3, 5, 7, 10}),
    "m11": frozenset({0, 2, 3, 5, 7, 10}),
    "13": frozenset({0, 2, 4, 7, 9, 10}),
    "maj13": frozenset({0, 2, 4, 7, 9, 11}),
    "min13": frozenset({0, 2, 3, 7, 9, 10}),
    "69": frozenset({0, 2, 4, 7, 9}),
    "6/9": frozenset({0, 2, 4, 7, 9}),
    "aug7": frozenset({0, 4, 8, 10}),
    "+7": frozenset({0, 4, 8, 10}),
    "add9": frozenset({0, 2, 4, 7}),
    "madd9": frozenset({0, 2, 3, 7}),
    "7sus4": frozenset({0, 5, 7, 10}),
}

# Scale-degree to semitone table used when reading degree lists like "(b9)".
_DEGREE_SEMITONES = {
    "1": 0, "2": 2, "3": 4, "4": 5, "5": 7, "6": 9, "7": 11,
    "8": 0, "9": 2, "10": 4, "11": 5, "12": 7, "13": 9,
}


@dataclass(frozen=True)
class ChordSymbol:
    """A chord as root pitch class plus canonical quality, or no-chord.

    The no-chord symbol normalizes ``root`` and ``quality`` to ``None`` so
    that equality and hashing ignore whatever was passed in.
    """

    root: int | None
    quality: str | None
    is_nochord: bool = False

    def __post_init__(self):
        if self.is_nochord:
            object.__setattr__(self, "root", None)
            object.__setattr__(self, "quality", None)
            return
        if self.root is None or not 0 <= int(self.root) <= 11:
            raise ChordError(f"root pitch class out of range: {self.root!r}")
        if self.quality not in QUALITY_INTERVALS:
            raise UnknownQuality(f"not a canonical quality: {self.quality!r}")

    def __str__(self) -> str:
        return render_chord(self)


NO_CHORD = ChordSymbol(None, None, is_nochord=True)


def parse_chord(label: str) -> ChordSymbol:
    """Parse a textual chord label into a :class:`ChordSymbol`.

    The grammar is ``<root>[:<quality>][/<bass>]`` where the root is a letter
    A..G (any case) with optional ``#``/``b`` accidentals, a bare root means
    major, and ``N``/``NC``/``N.C.`` is the no-chord symbol.  Slash basses
    are dropped.  Qualities outside the canonical 14 are read as interval
    sets (aliases, tensions, degree lists) and folded onto the canonical
    quality whose interval set is the largest subset, preferring tetrachords
    and then the fixed quality order on ties.
    """
    text = label.strip()
    if not text:
        raise MalformedLabel("empty chord label")
    if text.upper() in NO_CHORD_TOKENS:
        return NO_CHORD
    letter = text[0].upper()
    if letter not in _LETTER_PC:
        raise MalformedLabel(f"bad root letter in {label!r}")
    pc = _LETTER_PC[letter]
    rest = text[1:]
    while rest[:1] in ("#", "b"):
        pc += 1 if rest[0] == "#" else -1
        rest = rest[1:]
    pc %= 12
    rest = rest.split("/", 1)[0]
    if rest == "":
        return ChordSymbol(pc, "maj")
    if not rest.startswith(":"):
        raise MalformedLabel(f"expected ':' before quality in {label!r}")
    quality = _resolve_quality(rest[1:], label)
    if quality is None:
        return NO_CHORD
    return ChordSymbol(pc, quality)


def _resolve_quality(text: str, label: str) -> str | None:
    if text == "":
        raise MalformedLabel(f"empty quality after ':' in {label!r}")
    if text in QUALITY_INTERVALS:
        return text
    if text in QUALITY_ALIASES:
        return QUALITY_ALIASES[text]
    return _best_canonical(_intervals_of(text, label))


def _intervals_of(text: str, label: str) -> frozenset[int]:
    """Interval set of an extension-bearing quality string."""
    base, mods = text, ""
    if "(" in text:
        base, _, mods = text.partition("(")
        if not mods.endswith(")"):
            raise MalformedLabel(f"unclosed degree list in {label!r}")
        mods = mods[:-1]
    if base in QUALITY_INTERVALS:
        intervals = set(QUALITY_INTERVALS[base])
    elif base in QUALITY_ALIASES:
        intervals = set(QUALITY_INTERVALS[QUALITY_ALIASES[base]])
    elif base in _EXTENDED_BASES:
        intervals = set(_EXTENDED_BASES[base])
    else:
        raise UnknownQuality(f"unknown quality {text!r} in {label!r}")
    for token in mods.split(","):
        token = token.strip()
        if not token:
            continue
        if token.startswith("*"):
            intervals.discard(_degree_semitone(token[1:], label))
        else:
            intervals.add(_degree_semitone(token, label))
    intervals.add(0)
    return frozenset(intervals)


def _degree_semitone(token: str, label: str) -> int:
    shift = 0
    while token[:1] in ("#", "b"):
        shift += 1 if token[0] == "#" else -1
        token = token[1:]
    if token not in _DEGREE_SEMITONES:
        raise UnknownQuality(f"unknown degree {token!r} in {label!r}")
    return (_DEGREE_SEMITONES[token] + shift) % 12


def _best_canonical(intervals: frozenset[int]) -> str | None:
    """Largest-subset canonical quality, or None when nothing fits."""
    best_key, best_name = None, None
    for rank, (name, ref) in enumerate(QUALITY_INTERVALS.items()):
        if ref <= intervals:
            key = (-len(ref), rank)
            if best_key is None or key < best_key:
                best_key, best_name = key, name
    return best_name


def render_chord(c: ChordSymbol) -> str:
    """Canonical textual form: sharps-only root plus explicit quality."""
    if c.is_nochord:
        return "N"
    return f"{PITCH_NAMES[c.root]}:{c.quality}"


def pitch_class_vector(c: ChordSymbol) -> np.ndarray:
    """Binary 12-vector of the pitch classes the chord contains (all zero for N)."""
    vec = np.zeros(12)
    if not c.is_nochord:
        for interval in QUALITY_INTERVALS[c.quality]:
            vec[(c.root + interval) % 12] = 1.0
    return vec


@dataclass(frozen=True)
class Alphabet:
    """An ordered closed set of chord symbols with a stable index mapping."""

    level: str
    symbols: tuple[ChordSymbol, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})
        if len(self._index) != len(self.symbols):
            raise ChordError("duplicate symbols in alphabet")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, c: ChordSymbol) -> bool:
        return c in self._index

    def index_of(self, c: ChordSymbol) -> int:
        try:
            return self._index[c]
        except KeyError:
            raise NotInAlphabet(f"{render_chord(c)} not in alphabet {self.level}") from None

    def symbol_at(self, index: int) -> ChordSymbol:
        return self.symbols[index]


@lru_cache(maxsize=None)
def alphabet(level: str) -> Alphabet:
    """The shared A1/A2/A3 instances.

    Symbols are enumerated no-chord first (index 0), then quality-major in
    the fixed quality order with roots 0..11 inside each quality.
    """
    if level not in ALPHABET_QUALITIES:
        raise ChordError(f"unknown alphabet level {level!r}")
    symbols = [NO_CHORD]
    for quality in ALPHABET_QUALITIES[level]:
        symbols.extend(ChordSymbol(root, quality) for root in range(12))
    return Alphabet(level, tuple(symbols))


def reduce_chord(c: ChordSymbol, a: Alphabet) -> ChordSymbol:
    """Map a chord onto alphabet ``a``.

    Members pass through unchanged.  Other qualities walk their reduction
    chain until they hit a quality present in ``a``; qualities with no triad
    ancestor (suspensions) collapse to no-chord.
    """
    if c.is_nochord or c in a:
        return NO_CHORD if c.is_nochord else c
    allowed = {s.quality for s in a.symbols if not s.is_nochord}
    quality = c.quality
    while quality not in allowed:
        quality = _REDUCTION_PARENT.get(quality)
        if quality is None:
            return NO_CHORD
    reduced = ChordSymbol(c.root, quality)
    if reduced not in a:
        raise NotInAlphabet(f"{render_chord(reduced)} not in alphabet {a.level}")
    return reduced
