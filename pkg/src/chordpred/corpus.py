"""Corpora of beat-aligned chord tracks.

Covers xlab file ingestion, a JSONL interchange format, sliding prediction
windows, seeded train/validation/test splits, and a seeded Markov-chain
generator whose corpora have closed-form optimal predictors (used as test
oracles).
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from .chords import (
    NO_CHORD,
    Alphabet,
    ChordError,
    ChordSymbol,
    parse_chord,
    reduce_chord,
    render_chord,
)

log = logging.getLogger(__name__)

# Input and target length of one prediction window, in beats.
WINDOW = 8


class CorpusError(Exception):
    """Base class for corpus failures."""


class MalformedXlab(CorpusError):
    """An xlab file could not be parsed."""


class TrackTooShort(CorpusError):
    """Track is shorter than the minimum windowable length (9 beats)."""


class TooFewSongs(CorpusError):
    """Not enough songs to build the requested splits."""


class InvalidSpec(CorpusError):
    """Synthetic generator specification is inconsistent."""


@dataclass(frozen=True)
class BeatTrack:
    """One song as a beat-aligned chord sequence with bar positions."""

    song_id: str
    chords: tuple[ChordSymbol, ...]
    bar_position: tuple[int, ...]

    def __post_init__(self):
        if len(self.chords) != len(self.bar_position) or not self.chords:
            raise CorpusError(f"{self.song_id}: chords and bar positions misaligned")
        if any(p < 1 for p in self.bar_position):
            raise CorpusError(f"{self.song_id}: bar positions must be >= 1")

    def __len__(self) -> int:
        return len(self.chords)


@dataclass(frozen=True)
class WindowPair:
    """An 8-beat input window and the 8 beats that follow it.

    The input ends at some beat p of the track and is left-padded with
    no-chords when p < 8; the target covers beats p+1..p+8.
    ``downbeat_position`` is the bar position of the input's first beat,
    extrapolated backwards through the padding at song starts.
    ``pad_count`` records how many leading input symbols are padding rather
    than played no-chords.
    """

    input: tuple[ChordSymbol, ...]
    target: tuple[ChordSymbol, ...]
    downbeat_position: int
    song_id: str
    pad_count: int = 0

    def __post_init__(self):
        if len(self.input) != WINDOW or len(self.target) != WINDOW:
            raise CorpusError("window input and target must both span 8 beats")


def ingest_xlab(path) -> BeatTrack:
    """Read one xlab file: whitespace-separated rows of
    ``start_time end_time beat_in_bar chord_label`` (extra columns ignored)."""
    path = Path(path)
    chords, positions = [], []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 4:
            raise MalformedXlab(f"{path.name}:{lineno}: expected 4 columns, got {len(parts)}")
        try:
            float(parts[0]), float(parts[1])
            position = float(parts[2])
        except ValueError as exc:
            raise MalformedXlab(f"{path.name}:{lineno}: {exc}") from None
        if position != int(position) or position < 1:
            raise MalformedXlab(f"{path.name}:{lineno}: bad beat position {parts[2]!r}")
        try:
            chords.append(parse_chord(parts[3]))
        except ChordError as exc:
            raise MalformedXlab(f"{path.name}:{lineno}: {exc}") from None
        positions.append(int(position))
    if not chords:
        raise MalformedXlab(f"{path.name}: no chord rows")
    return BeatTrack(path.stem, tuple(chords), tuple(positions))


def ingest_directory(directory) -> tuple[list[BeatTrack], list[str]]:
    """Ingest every ``*.xlab``/``*.lab``/``*.txt`` file in a directory.

    Malformed files and tracks shorter than 9 beats are skipped with a
    warning.  Returns the tracks sorted by song id plus the skipped names.
    """
    directory = Path(directory)
    tracks, skipped = [], []
    paths = sorted(p for p in directory.iterdir()
                   if p.is_file() and p.suffix in (".xlab", ".lab", ".txt"))
    for path in paths:
        try:
            track = ingest_xlab(path)
        except MalformedXlab as exc:
            log.warning("skipping %s: %s", path.name, exc)
            skipped.append(path.name)
            continue
        if len(track) < WINDOW + 1:
            log.warning("skipping %s: only %d beats", path.name, len(track))
            skipped.append(path.name)
            continue
        tracks.append(track)
    tracks.sort(key=lambda t: t.song_id)
    return tracks, skipped


def save_corpus(tracks, path) -> None:
    """Write tracks as JSONL, one document per track, sorted by song id."""
    with open(path, "w") as handle:
        for track in sorted(tracks, key=lambda t: t.song_id):
            doc = {
                "song_id": track.song_id,
                "chords": [render_chord(c) for c in track.chords],
                "bar_position": list(track.bar_position),
            }
            handle.write(json.dumps(doc, sort_keys=True) + "\n")


def load_corpus(path) -> list[BeatTrack]:
    """Read a JSONL corpus written by :func:`save_corpus`."""
    tracks = []
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                tracks.append(BeatTrack(
                    doc["song_id"],
                    tuple(parse_chord(label) for label in doc["chords"]),
                    tuple(int(p) for p in doc["bar_position"]),
                ))
            except (KeyError, ValueError, ChordError) as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
    return tracks


def make_windows(track: BeatTrack, a: Alphabet) -> list[WindowPair]:
    """Enumerate all prediction windows of a track, reduced into alphabet ``a``.

    Inputs slide with stride 1 and end at beats 1..L-8, left-padded with
    no-chords before the song start, so a track of length L yields L-8 pairs:
    the first is ([N x7, chord 1], chords 2..9) and the last one targets the
    final 8 chords.
    """
    if len(track) < WINDOW + 1:
        raise TrackTooShort(f"{track.song_id}: {len(track)} beats, need {WINDOW + 1}")
    reduced = [reduce_chord(c, a) for c in track.chords]
    bar = track.bar_position
    bar_length = max(bar)
    pairs = []
    for end in range(len(track) - WINDOW):
        pad = max(0, WINDOW - 1 - end)
        window = tuple([NO_CHORD] * pad + reduced[max(0, end - WINDOW + 1):end + 1])
        target = tuple(reduced[end + 1:end + 1 + WINDOW])
        start = end - WINDOW + 1
        if start >= 0:
            downbeat = bar[start]
        else:
            # Extrapolate the bar cycle backwards through the padding.
            downbeat = (bar[0] - 1 + start) % bar_length + 1
        pairs.append(WindowPair(window, target, downbeat, track.song_id, pad))
    return pairs


def windows_for_tracks(tracks, a: Alphabet) -> list[WindowPair]:
    """Windows for a track collection; too-short tracks are skipped with a warning."""
    pairs = []
    for track in tracks:
        try:
            pairs.extend(make_windows(track, a))
        except TrackTooShort as exc:
            log.warning("skipping %s", exc)
    return pairs


@dataclass(frozen=True)
class SplitSpec:
    """Parameters of the per-fold song shuffles."""

    seed: int
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
    fold_count: int = 5

    def __post_init__(self):
        if abs(sum(self.fractions) - 1.0) > 1e-9 or any(f <= 0 for f in self.fractions):
            raise InvalidSpec(f"fractions must be positive and sum to 1: {self.fractions}")
        if self.fold_count < 1:
            raise InvalidSpec("fold_count must be >= 1")


@dataclass(frozen=True)
class Fold:
    train: tuple[BeatTrack, ...]
    validation: tuple[BeatTrack, ...]
    test: tuple[BeatTrack, ...]


def split_songs(tracks, spec: SplitSpec) -> list[Fold]:
    """Shuffle whole songs into train/validation/test once per fold.

    Songs are sorted by id before shuffling so the result is a pure function
    of the corpus content and the seed.  Each fold reshuffles with its own
    stream; split sizes follow ``spec.fractions`` rounded to whole songs.
    """
    songs = sorted(tracks, key=lambda t: t.song_id)
    n = len(songs)
    if n < spec.fold_count:
        raise TooFewSongs(f"{n} songs cannot fill {spec.fold_count} folds")
    n_test = max(1, round(spec.fractions[2] * n))
    n_val = max(1, round(spec.fractions[1] * n))
    if n_test + n_val >= n:
        raise TooFewSongs(f"{n} songs leave no training split")
    folds = []
    for fold_index in range(spec.fold_count):
        rng = random.Random(f"split:{spec.seed}:{fold_index}")
        shuffled = songs[:]
        rng.shuffle(shuffled)
        folds.append(Fold(
            train=tuple(shuffled[n_test + n_val:]),
            validation=tuple(shuffled[n_test:n_test + n_val]),
            test=tuple(shuffled[:n_test]),
        ))
    return folds


@dataclass(frozen=True)
class SynthSpec:
    """A first-order Markov chord generator over explicit chord labels.

    Chords change only every ``harmonic_rhythm`` beats; each segment draws
    the next chord from ``transitions`` (rows must sum to 1).  ``initial``
    defaults to uniform over the states.
    """

    song_count: int
    length_min: int
    length_max: int
    transitions: dict = field(default_factory=dict)
    initial: dict | None = None
    bar_length: int = 4
    harmonic_rhythm: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.song_count < 1 or self.length_min < 1 or self.length_max < self.length_min:
            raise InvalidSpec("song_count and length range must be positive and ordered")
        if self.bar_length < 1 or self.harmonic_rhythm < 1:
            raise InvalidSpec("bar_length and harmonic_rhythm must be >= 1")
        if not self.transitions:
            raise InvalidSpec("transitions table is empty")
        states = set(self.transitions)
        for state, row in self.transitions.items():
            if not row or set(row) - states:
                raise InvalidSpec(f"row {state!r} references unknown states")
            if any(p < 0 for p in row.values()) or abs(sum(row.values()) - 1.0) > 1e-9:
                raise InvalidSpec(f"row {state!r} is not a probability distribution")
        if self.initial is not None:
            if set(self.initial) - states or abs(sum(self.initial.values()) - 1.0) > 1e-9:
                raise InvalidSpec("initial distribution is inconsistent with the states")
        for label in states:
            try:
                parse_chord(label)
            except ChordError as exc:
                raise InvalidSpec(f"bad state label {label!r}: {exc}") from None

    @property
    def states(self) -> tuple[str, ...]:
        return tuple(sorted(self.transitions))

    def to_dict(self) -> dict:
        return {
            "song_count": self.song_count,
            "length_min": self.length_min,
            "length_max": self.length_max,
            "transitions": self.transitions,
            "initial": self.initial,
            "bar_length": self.bar_length,
            "harmonic_rhythm": self.harmonic_rhythm,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthSpec":
        try:
            return cls(**doc)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None


def _weighted_choice(rng: random.Random, row: dict) -> str:
    pick = rng.random()
    acc = 0.0
    items = sorted(row.items())
    for label, prob in items:
        acc += prob
        if pick < acc:
            return label
    return items[-1][0]


def synth_corpus(spec: SynthSpec) -> list[BeatTrack]:
    """Generate a deterministic corpus from a generator spec and its seed."""
    initial = spec.initial or {s: 1.0 / len(spec.states) for s in spec.states}
    symbols = {label: parse_chord(label) for label in spec.states}
    tracks = []
    for song in range(spec.song_count):
        rng = random.Random(f"synth:{spec.seed}:{song}")
        length = rng.randint(spec.length_min, spec.length_max)
        state = _weighted_choice(rng, initial)
        chords = []
        while len(chords) < length:
            chords.extend([symbols[state]] * min(spec.harmonic_rhythm, length - len(chords)))
            state = _weighted_choice(rng, spec.transitions[state])
        positions = tuple(i % spec.bar_length + 1 for i in range(length))
        tracks.append(BeatTrack(f"synth-{song:04d}", tuple(chords), positions))
    return tracks
