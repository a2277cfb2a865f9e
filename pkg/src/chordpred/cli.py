"""Command line orchestration of the prediction pipeline.

Subcommands mirror the pipeline stages: ingest, synth, train, eval and
predict.  Every run writes its fully resolved configuration next to its
outputs and is deterministic given that configuration; folds can train and
evaluate in parallel worker processes without changing any output byte.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import functools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import click

from .chords import NO_CHORD, ChordError, parse_chord, reduce_chord, render_chord
from .chords import alphabet as canonical_alphabet
from .config import (
    ALPHABET_LEVELS,
    ConfigError,
    TrainConfig,
    load_config,
    write_config,
)
from .corpus import (
    WINDOW,
    CorpusError,
    InvalidSpec,
    SplitSpec,
    SynthSpec,
    WindowPair,
    ingest_directory,
    load_corpus,
    save_corpus,
    split_songs,
    synth_corpus,
    windows_for_tracks,
)
from .evaluation import (
    EmptyDataset,
    EvalReport,
    Misaligned,
    ZeroProbability,
    aggregate_reports,
    evaluate,
)
from .model_io import (
    AlphabetMismatch,
    ModelFormatError,
    check_consistent,
    load_predictor,
    read_header,
    save_predictor,
)
from .predictors import KINDS, train_predictor
from .report import (
    plot_curves,
    plot_downbeat,
    write_curves_csv,
    write_downbeat_csv,
    write_metrics_csv,
)

click.UsageError.exit_code = 1


class _Failure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _guard(fn):
    """Map library errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (ConfigError, InvalidSpec) as err:
            raise _Failure(str(err), 1) from err
        except (ChordError, CorpusError, AlphabetMismatch, ModelFormatError,
                Misaligned, EmptyDataset, ZeroProbability, OSError) as err:
            raise _Failure(str(err), 2) from err
        except Exception as err:  # pragma: no cover - defensive
            raise _Failure(f"internal error: {type(err).__name__}: {err}", 3) from err

    return wrapper


def _ensure_dir(path) -> Path:
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _check_jobs(jobs: int) -> None:
    if jobs < 1:
        raise click.BadParameter("--jobs must be at least 1")


def _run_tasks(worker, tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, tasks))
    return [worker(task) for task in tasks]


@click.group()
def main():
    """Beat-aligned chord sequence prediction toolkit."""


# ----------------------------------------------------------------------
# ingest


@main.command()
@click.argument("source", type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="output directory")
@_guard
def ingest(source, out):
    """Ingest a directory of xlab files into a corpus file."""
    tracks, skipped = ingest_directory(source)
    if not tracks:
        raise CorpusError(f"no usable tracks in {source}")
    out_dir = _ensure_dir(out)
    corpus_path = out_dir / "corpus.jsonl"
    save_corpus(tracks, corpus_path)
    write_config(out_dir / "run_config.txt",
                 {"command": "ingest", "source": source, "out": str(out_dir)})
    message = f"ingested {len(tracks)} tracks into {corpus_path}"
    if skipped:
        message += f" (skipped {len(skipped)})"
    click.echo(message)


# ----------------------------------------------------------------------
# synth


@main.command()
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON generator specification")
@click.option("--seed", type=int, default=None,
              help="override the seed in the generator spec file")
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="output directory")
@_guard
def synth(spec_path, seed, out):
    """Generate a synthetic corpus from a Markov generator spec."""
    try:
        doc = json.loads(Path(spec_path).read_text())
    except json.JSONDecodeError as err:
        raise InvalidSpec(f"{spec_path}: not valid JSON: {err}") from err
    if seed is not None:
        doc["seed"] = seed
    spec = SynthSpec.from_dict(doc)
    tracks = synth_corpus(spec)
    out_dir = _ensure_dir(out)
    corpus_path = out_dir / "corpus.jsonl"
    save_corpus(tracks, corpus_path)
    (out_dir / "synth_spec.json").write_text(
        json.dumps(spec.to_dict(), sort_keys=True, indent=2) + "\n")
    write_config(out_dir / "run_config.txt",
                 {"command": "synth", "spec": spec_path, "seed": spec.seed,
                  "out": str(out_dir)})
    click.echo(f"generated {len(tracks)} songs into {corpus_path}")


# ----------------------------------------------------------------------
# train


def _train_fold_task(task):
    corpus_path, kind, config, folds, fold, out_dir = task
    tracks = load_corpus(corpus_path)
    split = split_songs(tracks, SplitSpec(seed=config.seed, fold_count=folds))
    part = split[fold]
    a = canonical_alphabet(config.alphabet)
    predictor, curve = train_predictor(kind, list(part.train),
                                       list(part.validation), a, config,
                                       fold=fold)
    model_path = Path(out_dir) / f"model_fold{fold}.json"
    save_predictor(model_path, predictor, fold, folds, config)
    if curve:
        write_curves_csv(Path(out_dir) / f"curves_fold{fold}.csv", curve)
        plot_curves(Path(out_dir) / f"curves_fold{fold}.png", curve)
    count = predictor.parameter_count() if hasattr(predictor, "parameter_count") else None
    return fold, count, str(model_path)


@main.command()
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", required=True, type=click.Choice(KINDS),
              help="predictor to train")
@click.option("--alphabet", type=click.Choice(ALPHABET_LEVELS), default=None,
              help="chord alphabet (overrides --config)")
@click.option("--seed", type=int, default=None,
              help="run seed (overrides --config)")
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="parallel fold workers")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="key = value configuration file")
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="output directory")
@_guard
def train(corpus, kind, alphabet, seed, folds, jobs, config_path, out):
    """Train one predictor kind on every corpus fold."""
    _check_jobs(jobs)
    config = load_config(config_path) if config_path else TrainConfig()
    overrides = {}
    if alphabet is not None:
        overrides["alphabet"] = alphabet
    if seed is not None:
        overrides["seed"] = seed
    if overrides:
        config = replace(config, **overrides)
    out_dir = _ensure_dir(out)
    tasks = [(corpus, kind, config, folds, fold, str(out_dir))
             for fold in range(folds)]
    results = _run_tasks(_train_fold_task, tasks, jobs)
    write_config(out_dir / "run_config.txt",
                 {"command": "train", "corpus": corpus, "kind": kind,
                  "folds": folds, "jobs": jobs, "out": str(out_dir),
                  **config.to_mapping()})
    for fold, count, path in results:
        message = f"fold {fold}: saved {path}"
        if count is not None:
            message += f" ({count:,} parameters)"
        click.echo(message)


# ----------------------------------------------------------------------
# eval


def _model_paths(arguments) -> list[Path]:
    paths: list[Path] = []
    for argument in arguments:
        path = Path(argument)
        if path.is_dir():
            found = sorted(path.glob("model_fold*.json"))
            if not found:
                raise ModelFormatError(f"no model_fold*.json files in {path}")
            paths.extend(found)
        else:
            paths.append(path)
    return paths


def _eval_model_task(task):
    corpus_path, model_path = task
    predictor, header = load_predictor(model_path)
    tracks = load_corpus(corpus_path)
    split = split_songs(tracks, SplitSpec(seed=header.config.seed,
                                          fold_count=header.folds))
    pairs = windows_for_tracks(list(split[header.fold].test),
                               predictor.alphabet)
    return evaluate(predictor, pairs, fold=header.fold).to_dict()


@main.command(name="eval")
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.argument("models", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--jobs", type=int, default=1, show_default=True,
              help="parallel model workers")
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="output directory")
@_guard
def cmd_eval(corpus, models, jobs, out):
    """Evaluate trained model files on their held-out test folds."""
    _check_jobs(jobs)
    paths = _model_paths(models)
    check_consistent([read_header(path) for path in paths])
    out_dir = _ensure_dir(out)
    docs = _run_tasks(_eval_model_task,
                      [(corpus, str(path)) for path in paths], jobs)
    reports = sorted((EvalReport.from_dict(doc) for doc in docs),
                     key=lambda r: r.fold)
    for report in reports:
        path = out_dir / f"report_fold{report.fold}.json"
        path.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=2)
                        + "\n")
    merged = aggregate_reports(reports)
    (out_dir / "report_mean.json").write_text(
        json.dumps(merged.to_dict(), sort_keys=True, indent=2) + "\n")
    write_metrics_csv(out_dir / "metrics.csv", [*reports, merged])
    write_downbeat_csv(out_dir / "downbeat.csv", merged)
    plot_downbeat(out_dir / "downbeat_accuracy.png", merged)
    write_config(out_dir / "run_config.txt",
                 {"command": "eval", "corpus": corpus,
                  "models": ",".join(str(p) for p in paths), "jobs": jobs,
                  "out": str(out_dir)})
    for report in reports:
        click.echo(f"fold {report.fold}: accuracy {report.accuracy:.2f}")
    click.echo(f"mean accuracy {merged.accuracy:.2f} "
               f"({merged.model} on {merged.alphabet})")


# ----------------------------------------------------------------------
# predict


@main.command()
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.argument("labels", nargs=-1, required=True)
@click.option("--full", is_flag=True, help="print all probability rows")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="optional directory for the run record")
@_guard
def predict(model, labels, full, out):
    """Predict the 8 beats after an 8-chord history."""
    if len(labels) != WINDOW:
        raise click.UsageError(
            f"need exactly {WINDOW} chord labels, got {len(labels)}")
    predictor, _ = load_predictor(model)
    a = predictor.alphabet
    window = tuple(reduce_chord(parse_chord(label), a) for label in labels)
    pair = WindowPair(window, (NO_CHORD,) * WINDOW, downbeat_position=1,
                      song_id="cli", pad_count=0)
    rows = predictor.predict(pair)
    argmax = [a.symbol_at(int(index)) for index in rows.argmax(axis=1)]
    click.echo(" ".join(render_chord(symbol) for symbol in argmax))
    if full:
        for row in rows:
            click.echo(" ".join(f"{p:.17g}" for p in row))
    if out is not None:
        out_dir = _ensure_dir(out)
        write_config(out_dir / "run_config.txt",
                     {"command": "predict", "model": model,
                      "labels": " ".join(labels), "full": full})


if __name__ == "__main__":
    main()
