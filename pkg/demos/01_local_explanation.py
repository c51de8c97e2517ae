"""Walk through one local explanation, start to finish.

A tiny bag-of-words sentiment model is planted with two negative words. The
engine perturbs POS groups, sentences, and embedding clusters, and reports how
much each feature drove the prediction. Run with:

    python demos/01_local_explanation.py
"""

from pathlib import Path

import textexplain as tx
from textexplain import report

OUT = Path(__file__).parent / "output"

REVIEW = "This film was very awful. I have never seen such a bad movie."

# The model: "awful" pushes hard toward class neg, "bad" a bit less.
model = tx.ReferenceModel(["neg", "pos"], {"awful": [2.0, -2.0], "bad": [1.5, -1.5]})
config = tx.RunConfig(model="ref:planted-demo").validate()
lexicons = tx.load_lexicons()

prediction = model.predict(REVIEW)
print(f"review: {REVIEW!r}")
print(f"model says: neg={prediction.probs[0]:.4f} pos={prediction.probs[1]:.4f}\n")

result = tx.explain_document(REVIEW, model, config, lexicons, document_id="demo-review")

# The quantitative explanation: one row per perturbation trial.
print(f"{'feature':<24}{'perturbation':<14}{'after':<7}{'nPIR(neg)':>10}  informative")
for explanation in result.all_explanations():
    after = result.class_names[explanation.label_f]
    value = explanation.npir[result.label_o]
    flag = "yes" if explanation.informative else ""
    print(f"{explanation.feature.label:<24}{explanation.kind:<14}{after:<7}{value:>10.4f}  {flag}")

# Only a few trials matter; this is what a report surfaces first.
print("\nmost informative features:")
for explanation in tx.most_informative(result):
    tokens = [result.tokens[p].text for p in explanation.feature.token_positions]
    print(f"  {explanation.feature.label} ({explanation.kind}): {tokens} "
          f"-> nPIR {explanation.npir[result.label_o]:.4f}")

OUT.mkdir(exist_ok=True)
payload = report.local_report(result, config)
report.write_bytes(OUT / "demo-review.explanation.json", report.emit_local(payload, "json"))
report.write_bytes(OUT / "demo-review.explanation.html", report.emit_local(payload, "html"))
print(f"\nwrote {OUT / 'demo-review.explanation.json'}")
print(f"wrote {OUT / 'demo-review.explanation.html'}  (open in a browser)")
