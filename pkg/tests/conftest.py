import json

import pytest

import textexplain as tx

# Two-sentence toy review used across the suite; 15 tokens including periods.
TOY_TEXT = "This film was very awful. I have never seen such a bad movie."
PLANTED_WEIGHTS = {"awful": [2.0, -2.0], "bad": [1.5, -1.5]}
CLASSES = ("neg", "pos")


@pytest.fixture(scope="session")
def lexicons():
    return tx.load_lexicons()


@pytest.fixture()
def reference_model():
    return tx.ReferenceModel(CLASSES, PLANTED_WEIGHTS)


@pytest.fixture()
def run_config(tmp_path):
    weights_path = tmp_path / "weights.json"
    weights_path.write_text(json.dumps({
        "classes": list(CLASSES),
        "bias": [0.0, 0.0],
        "weights": PLANTED_WEIGHTS,
    }))
    return tx.RunConfig(model=f"ref:{weights_path}", out=str(tmp_path / "out")).validate()


@pytest.fixture()
def toy_tokens(lexicons):
    return tx.pos_tag(tx.tokenize(TOY_TEXT), lexicons)
