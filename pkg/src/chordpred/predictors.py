"""Chord continuation predictors and their training procedures.

All predictors share one contract: given an 8-beat input window they return
a (8, alphabet) matrix whose row p is the predicted distribution of the
chord p + 1 beats past the window.

Two baselines (uniform and repeat-last), an n-gram wrapper, and two neural
encoder-decoders: a single-scale network over the one-hot window, and a
multi-scale variant that concatenates codes from three temporal resolutions,
the coarser two produced by autoencoders pretrained on aggregated counts
and frozen afterwards.
"""

from __future__ import annotations

import numpy as np

from .aggregation import one_hot_window, scale_stack
from .chords import Alphabet
from .config import TrainConfig, seed_stream
from .corpus import WINDOW, BeatTrack, WindowPair, windows_for_tracks
from .neural import (
    Adam,
    DenseNet,
    grouped_cross_entropy,
    mse_loss,
    net_from_dict,
    net_to_dict,
    softmax,
)
from .ngram import KneserNeyModel, track_indices, window_context

HIDDEN = 500
CODE = 50

KINDS = ("random", "repeat", "ngram", "mlp-ed", "ms-ed")


class Predictor:
    """Base contract: distributions over the next 8 beats."""

    kind = ""

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def predict(self, pair: WindowPair) -> np.ndarray:
        return self.predict_batch([pair])[0]

    def predict_batch(self, pairs) -> np.ndarray:
        raise NotImplementedError

    def payload(self) -> dict:
        return {}

    @classmethod
    def from_payload(cls, payload: dict, alphabet: Alphabet) -> "Predictor":
        return cls(alphabet)


class RandomPredictor(Predictor):
    """Uniform distribution at every position."""

    kind = "random"

    def predict_batch(self, pairs) -> np.ndarray:
        size = len(self.alphabet)
        return np.full((len(pairs), WINDOW, size), 1.0 / size)


class RepeatPredictor(Predictor):
    """All mass on the last input chord at every position."""

    kind = "repeat"

    def predict_batch(self, pairs) -> np.ndarray:
        size = len(self.alphabet)
        out = np.zeros((len(pairs), WINDOW, size))
        for row, pair in enumerate(pairs):
            out[row, :, self.alphabet.index_of(pair.input[-1])] = 1.0
        return out


class NGramPredictor(Predictor):
    """Kneser-Ney model rolled forward with a beam."""

    kind = "ngram"

    def __init__(self, model: KneserNeyModel, beam_width: int = 100):
        super().__init__(model.alphabet)
        self.model = model
        self.beam_width = int(beam_width)

    def predict_batch(self, pairs) -> np.ndarray:
        return np.stack([
            self.model.beam_predict(window_context(pair, self.alphabet),
                                    steps=WINDOW, beam_width=self.beam_width)
            for pair in pairs])

    def payload(self) -> dict:
        return {"model": self.model.to_dict(), "beam_width": self.beam_width}

    @classmethod
    def from_payload(cls, payload: dict, alphabet: Alphabet) -> "NGramPredictor":
        model = KneserNeyModel.from_dict(payload["model"], alphabet=alphabet)
        return cls(model, beam_width=payload["beam_width"])


class MlpEdPredictor(Predictor):
    """Single-scale encoder-decoder over the one-hot window."""

    kind = "mlp-ed"

    def __init__(self, net: DenseNet, alphabet: Alphabet):
        super().__init__(alphabet)
        self.net = net

    def predict_batch(self, pairs) -> np.ndarray:
        inputs, _ = window_matrices(pairs, self.alphabet)
        logits, _ = self.net.forward(inputs[1])
        return _group_softmax(logits, len(self.alphabet))

    def parameter_count(self) -> int:
        return self.net.parameter_count()

    def payload(self) -> dict:
        return {"net": net_to_dict(self.net)}

    @classmethod
    def from_payload(cls, payload: dict, alphabet: Alphabet) -> "MlpEdPredictor":
        return cls(net_from_dict(payload["net"]), alphabet)


class MsEdPredictor(Predictor):
    """Multi-scale encoder-decoder over scales 1, 2 and 4.

    Holds the two pretrained autoencoders whole; only their encoder halves
    run at prediction time.
    """

    kind = "ms-ed"

    def __init__(self, ed2: DenseNet, ed4: DenseNet, enc1: DenseNet,
                 decoder: DenseNet, alphabet: Alphabet):
        super().__init__(alphabet)
        self.ed2 = ed2
        self.ed4 = ed4
        self.enc1 = enc1
        self.decoder = decoder

    def _encoders(self):
        return (self.enc1,
                DenseNet(self.ed2.layers[:3]),
                DenseNet(self.ed4.layers[:3]))

    def predict_batch(self, pairs) -> np.ndarray:
        inputs, _ = window_matrices(pairs, self.alphabet)
        enc1, enc2, enc4 = self._encoders()
        codes = np.concatenate([enc1.forward(inputs[1])[0],
                                enc2.forward(inputs[2])[0],
                                enc4.forward(inputs[4])[0]], axis=1)
        logits, _ = self.decoder.forward(codes)
        return _group_softmax(logits, len(self.alphabet))

    def parameter_count(self) -> int:
        return (self.ed2.parameter_count() + self.ed4.parameter_count()
                + self.enc1.parameter_count() + self.decoder.parameter_count())

    def payload(self) -> dict:
        return {"ed2": net_to_dict(self.ed2), "ed4": net_to_dict(self.ed4),
                "enc1": net_to_dict(self.enc1),
                "decoder": net_to_dict(self.decoder)}

    @classmethod
    def from_payload(cls, payload: dict, alphabet: Alphabet) -> "MsEdPredictor":
        return cls(net_from_dict(payload["ed2"]), net_from_dict(payload["ed4"]),
                   net_from_dict(payload["enc1"]),
                   net_from_dict(payload["decoder"]), alphabet)


PREDICTOR_CLASSES = {cls.kind: cls for cls in
                     (RandomPredictor, RepeatPredictor, NGramPredictor,
                      MlpEdPredictor, MsEdPredictor)}


def _group_softmax(logits: np.ndarray, size: int) -> np.ndarray:
    grouped = logits.reshape(logits.shape[0], WINDOW, size)
    return softmax(grouped, axis=2)


def window_matrices(pairs, alphabet: Alphabet):
    """Dense views of window pairs: inputs at scales 1, 2, 4 and targets."""
    size = len(alphabet)
    inputs = {scale: np.zeros((len(pairs), (WINDOW // scale) * size))
              for scale in (1, 2, 4)}
    targets = np.zeros((len(pairs), WINDOW * size))
    for row, pair in enumerate(pairs):
        stack = scale_stack(pair.input, alphabet)
        for scale in (1, 2, 4):
            inputs[scale][row] = stack[scale].flat()
        targets[row] = one_hot_window(pair.target, alphabet).flat()
    return inputs, targets


def _snapshot(params) -> list:
    return [p.copy() for p in params]


def _restore(params, saved) -> None:
    for p, s in zip(params, saved):
        p[...] = s


def _fit_network(net, x, t, vx, vt, loss, config: TrainConfig, tag: str,
                 phase: str) -> list[dict]:
    """Minibatch ADAM with early stopping; restores the best-validation
    weights before returning the per-epoch loss curve."""
    opt = Adam(net.parameters(), learning_rate=config.learning_rate)
    shuffle = np.random.default_rng(seed_stream(config.seed, tag + ":shuffle"))
    masks = np.random.default_rng(seed_stream(config.seed, tag + ":dropout"))
    best = _snapshot(net.parameters())
    best_val = np.inf
    stale = 0
    curve = []
    for epoch in range(config.max_epochs):
        order = shuffle.permutation(len(x))
        total = 0.0
        for lo in range(0, len(x), config.batch_size):
            rows = order[lo:lo + config.batch_size]
            out, cache = net.forward(x[rows], train=True, rng=masks)
            value, grad = loss(out, t[rows])
            _, grads = net.backward(cache, grad)
            opt.step(grads)
            total += value * len(rows)
        val_value, _ = loss(net.forward(vx)[0], vt)
        curve.append({"phase": phase, "epoch": epoch,
                      "train_loss": total / len(x), "val_loss": float(val_value)})
        if val_value < best_val:
            best_val = val_value
            best = _snapshot(net.parameters())
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    _restore(net.parameters(), best)
    return curve


def _stage2_batch(enc1, decoder, x1, frozen, t, size, dropout, rng):
    """Composed forward/backward through encoder, code concat and decoder.

    The concatenated code layer is a hidden layer of the composed network,
    so dropout is applied across all of it (including the frozen part).
    Returns (loss, gradients aligned with enc1.parameters() +
    decoder.parameters()).
    """
    train = dropout > 0.0
    z1, cache1 = enc1.forward(x1, train=train, rng=rng)
    codes = np.concatenate([z1, frozen], axis=1)
    mask = None
    if train:
        keep = 1.0 - dropout
        mask = (rng.random(codes.shape) < keep) / keep
        codes = codes * mask
    logits, cache2 = decoder.forward(codes, train=train, rng=rng)
    value, grad = grouped_cross_entropy(logits, t, size)
    grad_codes, decoder_grads = decoder.backward(cache2, grad)
    if mask is not None:
        grad_codes = grad_codes * mask
    _, enc1_grads = enc1.backward(cache1, grad_codes[:, :z1.shape[1]])
    return value, enc1_grads + decoder_grads


def _fit_stage2(enc1, decoder, x1, frozen, t, vx1, vfrozen, vt,
                config: TrainConfig, tag: str, size: int) -> list[dict]:
    """Train the scale-1 encoder and final decoder around fixed codes."""
    params = enc1.parameters() + decoder.parameters()
    opt = Adam(params, learning_rate=config.learning_rate)
    shuffle = np.random.default_rng(seed_stream(config.seed, tag + ":shuffle"))
    masks = np.random.default_rng(seed_stream(config.seed, tag + ":dropout"))
    best = _snapshot(params)
    best_val = np.inf
    stale = 0
    curve = []

    def eval_loss():
        codes = np.concatenate([enc1.forward(vx1)[0], vfrozen], axis=1)
        value, _ = grouped_cross_entropy(decoder.forward(codes)[0], vt, size)
        return float(value)

    for epoch in range(config.max_epochs):
        order = shuffle.permutation(len(x1))
        total = 0.0
        for lo in range(0, len(x1), config.batch_size):
            rows = order[lo:lo + config.batch_size]
            value, grads = _stage2_batch(enc1, decoder, x1[rows],
                                         frozen[rows], t[rows], size,
                                         config.dropout, masks)
            opt.step(grads)
            total += value * len(rows)
        val_value = eval_loss()
        curve.append({"phase": "stage2", "epoch": epoch,
                      "train_loss": total / len(x1), "val_loss": val_value})
        if val_value < best_val:
            best_val = val_value
            best = _snapshot(params)
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    _restore(params, best)
    return curve


def train_mlp_ed(train_pairs, val_pairs, alphabet: Alphabet,
                 config: TrainConfig, fold: int = 0):
    size = len(alphabet)
    inputs, targets = window_matrices(train_pairs, alphabet)
    val_inputs, val_targets = window_matrices(val_pairs, alphabet)
    tag = f"mlp-ed:fold{fold}"
    net = DenseNet.create(
        [WINDOW * size, HIDDEN, HIDDEN, CODE, HIDDEN, HIDDEN, WINDOW * size],
        ["relu", "relu", "linear", "relu", "relu", "linear"],
        dropout_rate=config.dropout, seed=seed_stream(config.seed, tag + ":init"))

    def loss(out, target):
        return grouped_cross_entropy(out, target, size)

    curve = _fit_network(net, inputs[1], targets, val_inputs[1], val_targets,
                         loss, config, tag, phase="mlp-ed")
    return MlpEdPredictor(net, alphabet), curve


def _pretrain_autoencoder(x, vx, width: int, config: TrainConfig, tag: str,
                          phase: str):
    net = DenseNet.create(
        [width, HIDDEN, HIDDEN, CODE, HIDDEN, HIDDEN, width],
        ["relu", "relu", "linear", "relu", "relu", "linear"],
        dropout_rate=config.dropout, seed=seed_stream(config.seed, tag + ":init"))
    curve = _fit_network(net, x, x, vx, vx, mse_loss, config, tag, phase)
    return net, curve


def train_ms_ed(train_pairs, val_pairs, alphabet: Alphabet,
                config: TrainConfig, fold: int = 0):
    size = len(alphabet)
    inputs, targets = window_matrices(train_pairs, alphabet)
    val_inputs, val_targets = window_matrices(val_pairs, alphabet)
    tag = f"ms-ed:fold{fold}"

    ed2, curve2 = _pretrain_autoencoder(inputs[2], val_inputs[2],
                                        (WINDOW // 2) * size, config,
                                        tag + ":scale2", phase="scale2")
    ed4, curve4 = _pretrain_autoencoder(inputs[4], val_inputs[4],
                                        (WINDOW // 4) * size, config,
                                        tag + ":scale4", phase="scale4")

    enc2 = DenseNet(ed2.layers[:3])
    enc4 = DenseNet(ed4.layers[:3])
    frozen = np.concatenate([enc2.forward(inputs[2])[0],
                             enc4.forward(inputs[4])[0]], axis=1)
    val_frozen = np.concatenate([enc2.forward(val_inputs[2])[0],
                                 enc4.forward(val_inputs[4])[0]], axis=1)

    enc1 = DenseNet.create(
        [WINDOW * size, HIDDEN, HIDDEN, CODE], ["relu", "relu", "linear"],
        dropout_rate=config.dropout,
        seed=seed_stream(config.seed, tag + ":enc1:init"))
    decoder = DenseNet.create(
        [3 * CODE, HIDDEN, HIDDEN, WINDOW * size], ["relu", "relu", "linear"],
        dropout_rate=config.dropout,
        seed=seed_stream(config.seed, tag + ":decoder:init"))
    curve = _fit_stage2(enc1, decoder, inputs[1], frozen, targets,
                        val_inputs[1], val_frozen, val_targets,
                        config, tag + ":stage2", size)
    return MsEdPredictor(ed2, ed4, enc1, decoder, alphabet), curve2 + curve4 + curve


def train_predictor(kind: str, train_tracks, val_tracks, alphabet: Alphabet,
                    config: TrainConfig, fold: int = 0):
    """Train any predictor kind; returns (predictor, loss curve)."""
    if kind == "random":
        return RandomPredictor(alphabet), []
    if kind == "repeat":
        return RepeatPredictor(alphabet), []
    if kind == "ngram":
        sequences = [track_indices(track, alphabet)
                     for track in [*train_tracks, *val_tracks]]
        model = KneserNeyModel(alphabet).fit(sequences)
        return NGramPredictor(model, beam_width=config.beam_width), []
    train_pairs = windows_for_tracks(train_tracks, alphabet)
    val_pairs = windows_for_tracks(val_tracks, alphabet)
    if kind == "mlp-ed":
        return train_mlp_ed(train_pairs, val_pairs, alphabet, config, fold)
    if kind == "ms-ed":
        return train_ms_ed(train_pairs, val_pairs, alphabet, config, fold)
    raise ValueError(f"unknown predictor kind {kind!r}")
