"""Drive an out-of-process model through the line-delimited JSON protocol.

Any executable that answers info/predict/embed requests on stdin/stdout can be
explained; here we launch the bundled adapter in stub mode. The same wiring
works for the adapter's transformer mode (see adapter/README.md). Run with:

    python demos/04_external_model.py
"""

import json
import shlex
import sys
import tempfile
from pathlib import Path

import textexplain as tx

ADAPTER = Path(__file__).resolve().parent.parent / "adapter" / "src" / "model_adapter.py"

REVIEW = "This film was very awful. I have never seen such a bad movie."

stub_config = {
    "classes": ["neg", "pos"],
    "num_layers": 4,
    "embed_dim": 12,
    "bias": [0.0, 0.0],
    "weights": {"awful": [2.0, -2.0], "bad": [1.5, -1.5]},
}

with tempfile.TemporaryDirectory() as tmp:
    stub_path = Path(tmp) / "stub.json"
    stub_path.write_text(json.dumps(stub_config))
    command = f"{shlex.quote(sys.executable)} {shlex.quote(str(ADAPTER))} --stub {shlex.quote(str(stub_path))}"
    print(f"launching: {command}\n")

    with tx.ExternalModel(command) as model:
        info = model.info()
        print(f"adapter reports: classes={info.class_names} "
              f"layers={info.num_layers} dim={info.embed_dim}")

        config = tx.RunConfig(model=f"cmd:{command}").validate()
        lexicons = tx.load_lexicons()
        result = tx.explain_document(REVIEW, model, config, lexicons, "wire-demo")

        print(f"predicted: {result.class_names[result.label_o]}  p={result.p_o}")
        print("\ninformative features found through the wire:")
        for explanation in tx.most_informative(result):
            tokens = [result.tokens[p].text for p in explanation.feature.token_positions]
            print(f"  {explanation.feature.label} ({explanation.kind}): {tokens} "
                  f"-> nPIR {explanation.npir[result.label_o]:.4f}")
