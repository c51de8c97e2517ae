"""Serve a text classifier over newline-delimited JSON on stdin/stdout.

One request object per line; every reply carries the request's id. Malformed
requests get an error reply (id null if unparseable), never silence. Requests
are handled one at a time, in arrival order.

    -> {"id": 0, "op": "info"}
    <- {"id": 0, "classes": ["neg", "pos"], "num_layers": 4, "embed_dim": 12}
    -> {"id": 1, "op": "predict", "text": "..."}
    <- {"id": 1, "probabilities": [0.98, 0.02]}
    -> {"id": 2, "op": "embed", "text": "..."}
    <- {"id": 2, "pieces": [...], "piece_to_token": [...], "tokens": [...],
        "layers": [[[...], ...], ...]}        (layers, then pieces, then components)

Two backends:

* ``--stub config.json`` — a deterministic keyword scorer with synthetic
  embeddings; no third-party dependencies.  Used for protocol-conformance
  tests and as a wiring example.
* ``--model name-or-path`` — a transformers sequence classifier; class
  probabilities from the classification head, per-wordpiece hidden states
  from the selected layers (``--layers``, default the last four).
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")  # same word/punctuation rule as the explainer

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


class AdapterError(Exception):
    """Turned into an error reply for the offending request."""


def _fnv_unit(key: str) -> float:
    """Deterministic pseudo-random value in [-1, 1] from a string key."""
    h = _FNV_OFFSET
    for byte in key.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return ((h % 2001) - 1000) / 1000.0


def _softmax(logits):
    top = max(logits)
    exp = [math.exp(x - top) for x in logits]
    total = sum(exp)
    return [x / total for x in exp]


class StubModel:
    """Keyword-weight scorer with synthetic layered embeddings.

    Embeddings carry faint hash noise in the leading components and the
    token's weight vector (scaled by layer depth) in the trailing ones, so
    embedding-cluster extraction finds influence structure to work with.
    """

    NOISE = 0.1

    def __init__(self, config: dict):
        self.classes = [str(c) for c in config["classes"]]
        if len(self.classes) < 2:
            raise ValueError("stub config needs at least two classes")
        self.num_layers = int(config.get("num_layers", 4))
        self.embed_dim = int(config.get("embed_dim", 12))
        if self.embed_dim <= len(self.classes):
            raise ValueError("embed_dim must exceed the class count")
        self.bias = [float(x) for x in config.get("bias", [0.0] * len(self.classes))]
        self.weights = {
            str(token).lower(): [float(x) for x in vector]
            for token, vector in config.get("weights", {}).items()
        }

    def info(self) -> dict:
        return {
            "classes": self.classes,
            "num_layers": self.num_layers,
            "embed_dim": self.embed_dim,
        }

    def predict(self, text: str) -> list[float]:
        logits = list(self.bias)
        for token in _TOKEN_RE.findall(text):
            weight = self.weights.get(token.lower())
            if weight:
                logits = [a + b for a, b in zip(logits, weight)]
        return _softmax(logits)

    def embed(self, text: str) -> dict:
        tokens = _TOKEN_RE.findall(text)
        if not tokens:
            raise AdapterError("cannot embed empty input")
        n_classes = len(self.classes)
        zero = [0.0] * n_classes
        layers = []
        for layer in range(1, self.num_layers + 1):
            scale = layer / self.num_layers
            matrix = []
            for token in tokens:
                head = [
                    self.NOISE * _fnv_unit(f"{token}|{k}")
                    for k in range(self.embed_dim - n_classes)
                ]
                tail = [scale * w for w in self.weights.get(token.lower(), zero)]
                matrix.append(head + tail)
            layers.append(matrix)
        return {
            "pieces": tokens,
            "piece_to_token": list(range(len(tokens))),
            "tokens": tokens,
            "layers": layers,
        }


class TransformerModel:
    """transformers-backed classifier exporting selected hidden-state layers."""

    def __init__(self, model_path: str, layer_indices=None, device: str = "cpu"):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_path, use_fast=True)
        if not self.tokenizer.is_fast:
            raise ValueError("a fast tokenizer is required for wordpiece alignment")
        self.model = (
            AutoModelForSequenceClassification
            .from_pretrained(model_path, output_hidden_states=True)
            .to(device)
            .eval()
        )
        self.device = device
        id2label = self.model.config.id2label
        self.classes = [str(id2label[i]) for i in range(len(id2label))]
        total = self.model.config.num_hidden_layers
        if layer_indices is None:
            layer_indices = list(range(max(1, total - 3), total + 1))
        bad = [i for i in layer_indices if not 1 <= i <= total]
        if bad:
            raise ValueError(f"layer indices {bad} outside 1..{total}")
        self.layer_indices = list(layer_indices)
        self.embed_dim = self.model.config.hidden_size

    def info(self) -> dict:
        return {
            "classes": self.classes,
            "num_layers": len(self.layer_indices),
            "embed_dim": self.embed_dim,
        }

    def _encode(self, text: str):
        return self.tokenizer(text, return_tensors="pt", truncation=True).to(self.device)

    def predict(self, text: str) -> list[float]:
        with self._torch.no_grad():
            logits = self.model(**self._encode(text)).logits[0]
        return _softmax([float(x) for x in logits])

    def embed(self, text: str) -> dict:
        encoded = self.tokenizer(text, return_tensors="pt", truncation=True)
        word_ids = encoded.word_ids(0)
        keep = [i for i, word in enumerate(word_ids) if word is not None]
        if not keep:
            raise AdapterError("cannot embed empty input")
        with self._torch.no_grad():
            hidden = self.model(**encoded.to(self.device)).hidden_states
        input_ids = encoded["input_ids"][0].tolist()
        pieces = self.tokenizer.convert_ids_to_tokens([input_ids[i] for i in keep])
        piece_to_token = [word_ids[i] for i in keep]
        # word strings, one per distinct word id, in order
        spans = self.tokenizer(text, return_offsets_mapping=True, truncation=True)
        bounds: dict[int, list[int]] = {}
        for i, word in enumerate(spans.word_ids(0)):
            if word is None:
                continue
            start, end = spans["offset_mapping"][i]
            lo, hi = bounds.get(word, [start, end])
            bounds[word] = [min(lo, start), max(hi, end)]
        tokens = [text[bounds[w][0]:bounds[w][1]] for w in sorted(bounds)]
        layers = [
            hidden[index][0, keep, :].tolist()  # hidden[0] is the embedding layer
            for index in self.layer_indices
        ]
        return {
            "pieces": pieces,
            "piece_to_token": piece_to_token,
            "tokens": tokens,
            "layers": layers,
        }


def handle_line(model, line: str) -> dict:
    request_id = None
    try:
        request = json.loads(line)
        if not isinstance(request, dict):
            raise AdapterError("request must be a JSON object")
        request_id = request.get("id")
        op = request.get("op")
        if op == "info":
            return {"id": request_id, **model.info()}
        if op == "predict":
            return {"id": request_id, "probabilities": model.predict(str(request.get("text", "")))}
        if op == "embed":
            return {"id": request_id, **model.embed(str(request.get("text", "")))}
        raise AdapterError(f"unknown op {op!r}")
    except AdapterError as exc:
        return {"id": request_id, "error": str(exc)}
    except json.JSONDecodeError as exc:
        return {"id": None, "error": f"malformed request: {exc}"}
    except Exception as exc:  # keep serving; report the failure to the caller
        return {"id": request_id, "error": f"{type(exc).__name__}: {exc}"}


def serve(model, stdin=None, stdout=None):
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(json.dumps(handle_line(model, line)) + "\n")
        stdout.flush()


def build_model(args):
    if args.stub:
        with open(args.stub, "r", encoding="utf-8") as fh:
            return StubModel(json.load(fh))
    if args.model:
        layers = None
        if args.layers:
            layers = [int(part) for part in args.layers.split(",") if part.strip()]
        return TransformerModel(args.model, layers, args.device)
    raise ValueError("either --stub or --model is required")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", help="transformers model name or local path")
    parser.add_argument("--layers", help="comma-separated 1-based layer indices (default: last four)")
    parser.add_argument("--stub", help="stub-mode config JSON (overrides --model)")
    parser.add_argument("--device", default="cpu", help="torch device for --model mode")
    args = parser.parse_args(argv)
    try:
        model = build_model(args)
    except Exception as exc:
        print(f"model-adapter: startup failed: {exc}", file=sys.stderr)
        return 1
    serve(model)
    return 0


if __name__ == "__main__":
    sys.exit(main())
