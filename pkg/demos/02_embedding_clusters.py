"""Look inside the embedding-cluster feature extraction.

Token embeddings are summed over layers, averaged over wordpieces, reduced
with PCA, then clustered for every K in [2, k_max]. Each partition gets a
score: the spread of size-normalized influences of its clusters. The widest
spread wins, which favors small, sharply influential clusters. Run with:

    python demos/02_embedding_clusters.py
"""

import textexplain as tx

REVIEW = "This film was very awful. I have never seen such a bad movie."

model = tx.ReferenceModel(["neg", "pos"], {"awful": [2.0, -2.0], "bad": [1.5, -1.5]})
lexicons = tx.load_lexicons()
tokens = tx.pos_tag(tx.tokenize(REVIEW), lexicons)

embeddings = model.embed(REVIEW)
print(f"{len(embeddings.pieces)} wordpieces over {len(embeddings.tokens)} tokens, "
      f"{len(embeddings.layers)} layers of dim {embeddings.layers[0].shape[1]}")

aggregated = tx.aggregate_layers(embeddings)
reduced = tx.pca_reduce(aggregated)
kept = len(reduced.eigenvalues)
print(f"PCA kept {kept} components "
      f"({100 * sum(reduced.explained_variance_ratio):.1f}% of the variance)\n")

prediction = model.predict(REVIEW)
label = prediction.label_index()

k_top = tx.k_max(len(tokens))
print(f"trying K = 2 .. {k_top}")
scored = []
for k in range(2, k_top + 1):
    partition = tx.kmeans(reduced.matrix, k, seed=42)
    influences = []
    for cluster in partition.clusters:
        variant = tx.perturb_removal(tokens, cluster)
        perturbed = model.predict(variant.text)
        influences.append((tx.npir(prediction.probs[label], perturbed.probs[label]),
                           cluster.size))
    score = tx.k_score(influences)
    scored.append((partition, score))
    print(f"  K={partition.k}: score={score:.4f}")
    for cluster, (value, size) in zip(partition.clusters, influences):
        members = [tokens[p].text for p in cluster.token_positions]
        print(f"     {cluster.label:<12} npir={value:+.4f} size={size:<3} {members}")

best = tx.select_best_partition(scored)
print(f"\nselected partition: K={best.k} (ties go to the smallest K)")
print("the small cluster isolating the planted words is exactly what we want:")
for cluster in best.clusters:
    members = [tokens[p].text for p in cluster.token_positions]
    print(f"  {cluster.label}: {members}")
