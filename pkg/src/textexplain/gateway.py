"""Uniform access to black-box classifiers.

Two concrete gateways share one duck-typed surface (``info`` / ``predict`` /
``embed``): a deterministic in-process reference model used by the test
fixtures and demos, and a line-delimited-JSON client driving an external
model process over stdin/stdout.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import textprep
from .errors import (
    EmptyInput,
    ModelUnavailable,
    ProtocolViolation,
    RemoteModelError,
)

_PROB_SUM_TOL = 1e-6


@dataclass(frozen=True)
class ModelInfo:
    class_names: tuple[str, ...]
    num_layers: int
    embed_dim: int

    def __post_init__(self):
        if len(self.class_names) < 2 or len(set(self.class_names)) != len(self.class_names):
            raise ValueError("class names must be unique and at least two")
        if any(not name for name in self.class_names):
            raise ValueError("class names must be non-empty")
        if self.num_layers < 1 or self.embed_dim < 1:
            raise ValueError("num_layers and embed_dim must be positive")


@dataclass(frozen=True)
class PredictionVector:
    probs: tuple[float, ...]

    def __post_init__(self):
        if any(not (0.0 <= p <= 1.0) or math.isnan(p) for p in self.probs):
            raise ValueError(f"probabilities out of [0,1]: {self.probs}")
        if abs(sum(self.probs) - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")

    def label_index(self) -> int:
        """Index of the predicted class.

        Exact ties go to the later class, so a perturbation that wipes out all
        class evidence (uniform output) registers as a change of label rather
        than silently keeping the original one.
        """
        best = max(self.probs)
        return max(i for i, p in enumerate(self.probs) if p == best)


@dataclass(frozen=True)
class LayeredEmbeddings:
    pieces: tuple[str, ...]
    piece_to_token: tuple[int, ...]
    tokens: tuple[str, ...]
    layers: tuple[np.ndarray, ...]  # each (wp x d)

    def __post_init__(self):
        wp = len(self.pieces)
        if len(self.piece_to_token) != wp:
            raise ValueError("piece_to_token length mismatch")
        t = len(self.tokens)
        covered = tuple(sorted(set(self.piece_to_token)))
        if list(self.piece_to_token) != sorted(self.piece_to_token) or covered != tuple(range(t)):
            raise ValueError("piece_to_token must be non-decreasing and cover every token")
        shapes = {layer.shape for layer in self.layers}
        if len(shapes) != 1 or next(iter(shapes))[0] != wp:
            raise ValueError("all layers must share the shape (wp x d)")
        if any(not np.all(np.isfinite(layer)) for layer in self.layers):
            raise ValueError("embeddings must be finite")


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


def ref_hash_feature(piece: str, component: int) -> float:
    """Platform-independent pseudo-random feature in [-1, 1] via FNV-1a-64."""
    h = _FNV_OFFSET
    for byte in f"{piece}:{component}".encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _FNV_MASK
    return ((h % 2001) - 1000) / 1000.0


class ReferenceModel:
    """Deterministic bag-of-words linear classifier with synthetic embeddings.

    Logits are the sum of per-token weight vectors plus a bias; probabilities
    come from a stable softmax.  Embeddings put hash noise in the leading
    components and a layer-scaled copy of the token's weight vector in the
    trailing ``|C|`` components, so tokens with similar class influence end up
    close in embedding space and clustering can rediscover planted features.
    """

    NUM_LAYERS = 4
    EMBED_DIM = 32
    PIECE_SPLIT_LEN = 6
    # Hash-noise amplitude.  Must stay well below the weight-tail magnitude:
    # with noise at full [-1,1] scale the ~30 noise components dominate
    # Euclidean distances and influence-similar tokens no longer co-cluster.
    NOISE_SCALE = 0.1

    def __init__(self, classes, weights, bias=None,
                 num_layers: int = NUM_LAYERS, embed_dim: int = EMBED_DIM):
        self._classes = tuple(classes)
        n = len(self._classes)
        if n < 2:
            raise ValueError("reference model needs at least two classes")
        self._weights = {str(k).lower(): tuple(float(x) for x in v) for k, v in weights.items()}
        for tok, vec in self._weights.items():
            if len(vec) != n:
                raise ValueError(f"weight vector for {tok!r} has wrong length")
        self._bias = tuple(float(x) for x in (bias if bias is not None else [0.0] * n))
        if len(self._bias) != n:
            raise ValueError("bias length must match class count")
        if embed_dim <= n:
            raise ValueError("embed_dim must exceed the class count")
        self._num_layers = num_layers
        self._embed_dim = embed_dim

    @classmethod
    def from_file(cls, path: str | Path) -> "ReferenceModel":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(payload["classes"], payload.get("weights", {}), payload.get("bias"))

    def info(self) -> ModelInfo:
        return ModelInfo(self._classes, self._num_layers, self._embed_dim)

    def _logits(self, token_texts) -> np.ndarray:
        logits = np.array(self._bias, dtype=float)
        for text in token_texts:
            w = self._weights.get(text.lower())
            if w is not None:
                logits += w
        return logits

    def predict(self, text: str) -> PredictionVector:
        logits = self._logits(tok.text for tok in textprep.tokenize(text))
        shifted = np.exp(logits - logits.max())
        return PredictionVector(tuple(float(p) for p in shifted / shifted.sum()))

    def predict_many(self, texts) -> list[PredictionVector]:
        return [self.predict(text) for text in texts]

    def _pieces(self, token_text: str) -> list[str]:
        if len(token_text) > self.PIECE_SPLIT_LEN:
            cut = (len(token_text) + 1) // 2
            return [token_text[:cut], token_text[cut:]]
        return [token_text]

    def embed(self, text: str) -> LayeredEmbeddings:
        tokens = textprep.tokenize(text)
        if not tokens:
            raise EmptyInput("cannot embed an empty document")
        pieces: list[str] = []
        piece_to_token: list[int] = []
        for tok in tokens:
            for piece in self._pieces(tok.text):
                pieces.append(piece)
                piece_to_token.append(tok.position)
        d, n_classes = self._embed_dim, len(self._classes)
        noise = np.empty((len(pieces), d - n_classes))
        for i, piece in enumerate(pieces):
            for k in range(d - n_classes):
                noise[i, k] = self.NOISE_SCALE * ref_hash_feature(piece, k)
        tails = np.array(
            [self._weights.get(tokens[t].text.lower(), (0.0,) * n_classes) for t in piece_to_token]
        )
        layers = []
        for layer in range(1, self._num_layers + 1):
            mat = np.empty((len(pieces), d))
            mat[:, : d - n_classes] = noise
            mat[:, d - n_classes :] = (layer / self._num_layers) * tails
            layers.append(mat)
        return LayeredEmbeddings(
            pieces=tuple(pieces),
            piece_to_token=tuple(piece_to_token),
            tokens=tuple(tok.text for tok in tokens),
            layers=tuple(layers),
        )

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class ExternalModel:
    """Client for a model served over newline-delimited JSON on stdin/stdout.

    Requests carry monotonically increasing ids; replies are matched by id, so
    an adapter may answer out of order.  The transport lock makes the handle
    safe to share across threads.
    """

    def __init__(self, command: str):
        self._command = command
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise ModelUnavailable(f"cannot start model process: {exc}") from exc
        self._lock = threading.Lock()
        self._next_id = 0
        self._pending: dict[int, dict] = {}

    def _read_reply(self, want_id: int) -> dict:
        while True:
            if want_id in self._pending:
                return self._pending.pop(want_id)
            line = self._proc.stdout.readline()
            if line == "":
                raise ModelUnavailable(f"model process closed its stdout ({self._command})")
            line = line.strip()
            if not line:
                continue
            try:
                reply = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProtocolViolation(f"reply is not valid JSON: {line[:200]!r}") from exc
            if not isinstance(reply, dict) or "id" not in reply:
                raise ProtocolViolation(f"reply carries no id: {line[:200]!r}")
            self._pending[reply["id"]] = reply

    def _request(self, payload: dict) -> dict:
        with self._lock:
            if self._proc.poll() is not None:
                raise ModelUnavailable("model process has exited")
            request_id = self._next_id
            self._next_id += 1
            payload = {"id": request_id, **payload}
            try:
                self._proc.stdin.write(json.dumps(payload) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ModelUnavailable(f"model process pipe broken: {exc}") from exc
            reply = self._read_reply(request_id)
        if "error" in reply:
            raise RemoteModelError(str(reply["error"]))
        return reply

    def info(self) -> ModelInfo:
        reply = self._request({"op": "info"})
        try:
            return ModelInfo(
                class_names=tuple(reply["classes"]),
                num_layers=int(reply["num_layers"]),
                embed_dim=int(reply["embed_dim"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolViolation(f"malformed info reply: {exc}") from exc

    def predict(self, text: str) -> PredictionVector:
        reply = self._request({"op": "predict", "text": text})
        try:
            return PredictionVector(tuple(float(p) for p in reply["probabilities"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolViolation(f"malformed predict reply: {exc}") from exc

    def predict_many(self, texts) -> list[PredictionVector]:
        return [self.predict(text) for text in texts]

    def embed(self, text: str) -> LayeredEmbeddings:
        reply = self._request({"op": "embed", "text": text})
        try:
            layers = tuple(np.asarray(layer, dtype=float) for layer in reply["layers"])
            return LayeredEmbeddings(
                pieces=tuple(reply["pieces"]),
                piece_to_token=tuple(int(i) for i in reply["piece_to_token"]),
                tokens=tuple(reply["tokens"]),
                layers=layers,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolViolation(f"malformed embed reply: {exc}") from exc

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def open_model(spec: str):
    """Build a gateway from a model spec: ``ref:<weights.json>`` or ``cmd:<argv>``."""
    if spec.startswith("ref:"):
        return ReferenceModel.from_file(spec[len("ref:") :])
    if spec.startswith("cmd:"):
        return ExternalModel(spec[len("cmd:") :])
    raise ValueError(f"model spec must start with 'ref:' or 'cmd:', got {spec!r}")
