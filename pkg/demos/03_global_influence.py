"""Aggregate local explanations into per-class global lemma scores.

Every document contributes its single most influential embedding cluster per
class; positive influences are summed per lemma (so "films" and "film" merge).
The absolute score (GAI) says "this lemma drives class c somewhere in the
corpus"; the relative score (GRI) keeps only what exceeds all other classes
combined. Run with:

    python demos/03_global_influence.py
"""

import textexplain as tx

CORPUS = {
    "r1": "This film was very awful. I have never seen such a bad movie.",
    "r2": "An awful story. The film was bad and the music was bad.",
    "r3": "I love this film. It was wonderful and the story was great.",
    "r4": "A good movie with a great cast. I love it.",
    "r5": "The plot was bad. Still a good film with great music!",
}

model = tx.ReferenceModel(
    ["neg", "pos"],
    {
        "awful": [2.0, -2.0], "bad": [1.5, -1.5],
        "wonderful": [-2.0, 2.0], "great": [-1.5, 1.5],
        "good": [-1.0, 1.0], "love": [-1.0, 1.0],
    },
)
config = tx.RunConfig(model="ref:planted-demo").validate()
lexicons = tx.load_lexicons()

documents = []
for document_id, text in sorted(CORPUS.items()):
    result = tx.explain_document(text, model, config, lexicons, document_id)
    predicted = result.class_names[result.label_o]
    print(f"{document_id}: predicted {predicted:<4} {text!r}")
    documents.append(tx.corpus_document(result))

scores = tx.aggregate_corpus(documents, ["neg", "pos"], lexicons.lemma_exceptions)

for index, name in enumerate(scores.class_names):
    print(f"\nclass {name}: lemma influence (absolute / relative)")
    rows = sorted(scores.gai[index].items(), key=lambda kv: (-kv[1], kv[0]))
    for lemma, value in rows[:8]:
        relative = scores.gri[index].get(lemma, 0.0)
        bar = "#" * int(round(8 * value / max(1e-9, rows[0][1])))
        print(f"  {lemma:<10} gai={value:5.2f} gri={relative:5.2f} {bar}")

print("\nlemmas with gri=0 influence both classes; high gri marks class-specific concepts.")
