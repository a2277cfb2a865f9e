"""Beat-aligned chord sequence prediction toolkit.

The package splits into a chord-symbol layer (parsing, alphabets,
reduction), a corpus layer (ingestion, windowing, splits, synthesis), the
predictors (baselines, an interpolated Kneser-Ney beam model and two
encoder-decoder networks) and an evaluation layer producing per-fold
reports.  The command line in :mod:`chordpred.cli` wires the stages
together.
"""

from .chords import (
    NO_CHORD,
    Alphabet,
    ChordError,
    ChordSymbol,
    alphabet,
    parse_chord,
    pitch_class_vector,
    reduce_chord,
    render_chord,
)
from .config import ConfigError, TrainConfig, load_config, seed_stream
from .corpus import (
    WINDOW,
    BeatTrack,
    CorpusError,
    Fold,
    SplitSpec,
    SynthSpec,
    WindowPair,
    ingest_directory,
    ingest_xlab,
    load_corpus,
    make_windows,
    save_corpus,
    split_songs,
    synth_corpus,
    windows_for_tracks,
)
from .evaluation import EvalReport, aggregate_reports, evaluate
from .model_io import (
    AlphabetMismatch,
    ModelFormatError,
    ModelHeader,
    check_consistent,
    load_predictor,
    read_header,
    save_predictor,
)
from .ngram import KneserNeyModel, track_indices, window_context
from .predictors import (
    KINDS,
    MlpEdPredictor,
    MsEdPredictor,
    NGramPredictor,
    Predictor,
    RandomPredictor,
    RepeatPredictor,
    train_predictor,
)

__version__ = "0.1.0"

__all__ = [
    "NO_CHORD",
    "WINDOW",
    "Alphabet",
    "AlphabetMismatch",
    "BeatTrack",
    "ChordError",
    "ChordSymbol",
    "ConfigError",
    "CorpusError",
    "EvalReport",
    "Fold",
    "KINDS",
    "KneserNeyModel",
    "MlpEdPredictor",
    "ModelFormatError",
    "ModelHeader",
    "MsEdPredictor",
    "NGramPredictor",
    "Predictor",
    "RandomPredictor",
    "RepeatPredictor",
    "SplitSpec",
    "SynthSpec",
    "TrainConfig",
    "WindowPair",
    "aggregate_reports",
    "alphabet",
    "check_consistent",
    "evaluate",
    "ingest_directory",
    "ingest_xlab",
    "load_config",
    "load_corpus",
    "load_predictor",
    "make_windows",
    "parse_chord",
    "pitch_class_vector",
    "read_header",
    "reduce_chord",
    "render_chord",
    "save_corpus",
    "save_predictor",
    "seed_stream",
    "split_songs",
    "synth_corpus",
    "track_indices",
    "train_predictor",
    "window_context",
    "windows_for_tracks",
]
