"""Model files: one JSON document wrapping a predictor payload.

The header records everything needed to rebuild the training context:
predictor kind, alphabet level, fold index and fold count, and the full
resolved configuration (including the seed, from which the song splits are
reconstructed at evaluation time).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .chords import alphabet as canonical_alphabet
from .config import TrainConfig
from .predictors import PREDICTOR_CLASSES, Predictor

HEADER_KEYS = ("kind", "alphabet", "fold", "folds", "config", "payload")


class ModelFormatError(ValueError):
    """Model file is missing fields or names an unknown predictor."""


class AlphabetMismatch(ValueError):
    """Model files disagree on alphabet or training context."""


@dataclass(frozen=True)
class ModelHeader:
    kind: str
    alphabet: str
    fold: int
    folds: int
    config: TrainConfig


def save_predictor(path, predictor: Predictor, fold: int, folds: int,
                   config: TrainConfig) -> None:
    doc = {
        "kind": predictor.kind,
        "alphabet": predictor.alphabet.level,
        "fold": int(fold),
        "folds": int(folds),
        "config": config.to_mapping(),
        "payload": predictor.payload(),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True))


def _read_document(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ModelFormatError(f"{path}: not a JSON model file: {err}") from err
    missing = [key for key in HEADER_KEYS if key not in doc]
    if missing:
        raise ModelFormatError(f"{path}: missing fields {missing}")
    if doc["kind"] not in PREDICTOR_CLASSES:
        raise ModelFormatError(f"{path}: unknown predictor kind {doc['kind']!r}")
    return doc


def _header_of(doc: dict) -> ModelHeader:
    fold, folds = int(doc["fold"]), int(doc["folds"])
    if not 0 <= fold < folds:
        raise ModelFormatError(f"fold {fold} out of range for {folds} folds")
    return ModelHeader(kind=doc["kind"], alphabet=doc["alphabet"],
                       fold=fold, folds=folds,
                       config=TrainConfig.from_mapping(doc["config"]))


def read_header(path) -> ModelHeader:
    """Parse and validate a model file's header."""
    return _header_of(_read_document(path))


def load_predictor(path) -> tuple[Predictor, ModelHeader]:
    doc = _read_document(path)
    header = _header_of(doc)
    predictor = PREDICTOR_CLASSES[header.kind].from_payload(
        doc["payload"], canonical_alphabet(header.alphabet))
    return predictor, header


def check_consistent(headers) -> None:
    """Model files evaluated together must share one training context."""
    headers = list(headers)
    if not headers:
        raise ModelFormatError("no model files")
    first = headers[0]
    for header in headers[1:]:
        if header.alphabet != first.alphabet:
            raise AlphabetMismatch(
                f"alphabets differ: {header.alphabet} vs {first.alphabet}")
        if (header.kind != first.kind or header.folds != first.folds
                or header.config != first.config):
            raise AlphabetMismatch("model files mix training contexts")
    folds = [h.fold for h in headers]
    if len(set(folds)) != len(folds):
        raise AlphabetMismatch(f"duplicate fold indices: {sorted(folds)}")
