"""Protocol conformance of the stub-mode adapter, driven as a subprocess."""

import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
ADAPTER = HERE.parent / "src" / "model_adapter.py"
STUB_CONFIG = HERE / "stub_config.json"


@pytest.fixture()
def adapter():
    proc = subprocess.Popen(
        [sys.executable, str(ADAPTER), "--stub", str(STUB_CONFIG)],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        encoding="utf-8",
    )
    yield proc
    proc.stdin.close()
    proc.wait(timeout=10)


def ask(proc, line: str) -> str:
    proc.stdin.write(line + "\n")
    proc.stdin.flush()
    return proc.stdout.readline().rstrip("\n")


def ask_json(proc, **payload) -> dict:
    return json.loads(ask(proc, json.dumps(payload)))


class TestGoldenTranscript:
    def test_replayed_byte_identically(self, adapter):
        transcript = json.loads((HERE / "golden_transcript.json").read_text())
        for entry in transcript:
            assert ask(adapter, entry["send"]) == entry["expect"]


class TestProtocolInvariants:
    def test_every_reply_echoes_the_request_id(self, adapter):
        for request_id in (7, 123, 0, 999999):
            reply = ask_json(adapter, id=request_id, op="info")
            assert reply["id"] == request_id

    def test_malformed_request_gets_error_not_silence(self, adapter):
        reply = json.loads(ask(adapter, "{broken"))
        assert reply["id"] is None
        assert "error" in reply

    def test_unknown_op_error_carries_id(self, adapter):
        reply = ask_json(adapter, id=42, op="train")
        assert reply["id"] == 42
        assert "error" in reply

    def test_predictions_form_a_simplex(self, adapter):
        texts = ["", "awful", "awful bad", "x y z!", "this film was awful," * 10]
        for i, text in enumerate(texts):
            reply = ask_json(adapter, id=i, op="predict", text=text)
            probs = reply["probabilities"]
            assert all(0.0 <= p <= 1.0 for p in probs)
            assert math.isclose(sum(probs), 1.0, abs_tol=1e-6)

    def test_embed_covers_all_tokens_in_order(self, adapter):
        reply = ask_json(adapter, id=1, op="embed", text="This film was awful. bad!")
        mapping = reply["piece_to_token"]
        assert mapping == sorted(mapping)
        assert sorted(set(mapping)) == list(range(len(reply["tokens"])))
        assert len(reply["layers"]) == 4
        for layer in reply["layers"]:
            assert len(layer) == len(reply["pieces"])
            assert all(len(row) == 12 for row in layer)

    def test_layer_count_matches_info_for_all_inputs(self, adapter):
        layers = ask_json(adapter, id=0, op="info")["num_layers"]
        for i, text in enumerate(["a", "a b c", "awful bad awful bad"]):
            reply = ask_json(adapter, id=i + 1, op="embed", text=text)
            assert len(reply["layers"]) == layers

    def test_startup_failure_exits_nonzero(self, tmp_path):
        missing = tmp_path / "nope.json"
        result = subprocess.run(
            [sys.executable, str(ADAPTER), "--stub", str(missing)],
            capture_output=True, text=True, timeout=30,
        )
        assert result.returncode == 1
        assert "startup failed" in result.stderr
