"""Per-document explanation: perturb every feature, score it with nPIR.

The influence index compares the class probability before and after a
perturbation.  With u = P_f/P_o it reduces to
softsign(P_o * (1/u + u - u^2 - 1)): positive when the perturbation lowered
the probability (the feature supported the class), negative when it raised it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from . import mlwe, perturb, textprep
from .config import RunConfig
from .errors import DegenerateInput, EmptyDocument, ProtocolViolation
from .features import (
    METHOD_COMBINED,
    METHOD_MLWE,
    METHOD_ORDER,
    METHOD_POS,
    METHOD_SENTENCE,
    InterpretableFeature,
    combine_pairwise,
    extract_pos_features,
    extract_sentence_features,
)
from .gateway import PredictionVector
from .textprep import Lexicons, Token

NPIR_EPS = 1e-9
DEFAULT_THRESHOLD = 0.5


def npir(p_o_c: float, p_f_c: float) -> float:
    """Perturbation influence of a feature on one class, squashed to (-1, 1)."""
    p_o = min(max(float(p_o_c), NPIR_EPS), 1.0)
    p_f = min(max(float(p_f_c), NPIR_EPS), 1.0)
    a = 1.0 - p_o / p_f
    b = 1.0 - p_f / p_o
    pir = p_f * b - p_o * a
    return pir / (1.0 + abs(pir))


def npir_vector(p_o: PredictionVector, p_f: PredictionVector) -> tuple[float, ...]:
    if len(p_o.probs) != len(p_f.probs):
        raise ProtocolViolation(
            f"prediction sizes disagree: {len(p_o.probs)} vs {len(p_f.probs)} classes"
        )
    return tuple(npir(o, f) for o, f in zip(p_o.probs, p_f.probs))


@dataclass(frozen=True)
class LocalExplanation:
    """Outcome of one perturbation trial."""

    document_id: str
    feature: InterpretableFeature
    kind: str
    p_o: tuple[float, ...]
    p_f: tuple[float, ...]
    label_o: int
    label_f: int
    npir: tuple[float, ...]
    informative: bool
    replaced: tuple[tuple[int, str, str], ...] = ()
    mlwe_k: int | None = None
    mlwe_cluster: int | None = None


@dataclass(frozen=True)
class MlweMeta:
    seed: int
    k: int | None = None
    k_scores: tuple[tuple[int, float], ...] = ()
    skipped: bool = False
    reason: str | None = None


@dataclass(frozen=True)
class ExplanationSet:
    document_id: str
    text: str
    class_names: tuple[str, ...]
    tokens: tuple[Token, ...]
    p_o: tuple[float, ...]
    label_o: int
    explanations: dict[str, tuple[LocalExplanation, ...]]
    mlwe_meta: MlweMeta

    def all_explanations(self) -> Iterator[LocalExplanation]:
        for method in METHOD_ORDER:
            yield from self.explanations.get(method, ())


def _score_feature(document_id, tokens, feature, kinds, model, p_o, label_o,
                   threshold, antonyms, k=None, cluster=None):
    """One LocalExplanation per enabled perturbation kind (substitution may skip)."""
    out = []
    for kind in perturb.KIND_ORDER:
        if kind not in kinds:
            continue
        if kind == perturb.KIND_REMOVAL:
            variant = perturb.perturb_removal(tokens, feature)
        else:
            variant = perturb.perturb_substitution(tokens, feature, antonyms)
            if variant is None:
                continue
        p_f = model.predict(variant.text)
        scores = npir_vector(p_o, p_f)
        out.append(
            LocalExplanation(
                document_id=document_id,
                feature=feature,
                kind=kind,
                p_o=p_o.probs,
                p_f=p_f.probs,
                label_o=label_o,
                label_f=p_f.label_index(),
                npir=scores,
                informative=scores[label_o] >= threshold,
                replaced=variant.replaced,
                mlwe_k=k,
                mlwe_cluster=cluster,
            )
        )
    return out


def _mlwe_partitions(tokens, model, text, config):
    """Cluster token embeddings for every K in [2, k_max]; dedup capped Ks."""
    embeddings = model.embed(text)
    if len(embeddings.tokens) != len(tokens):
        raise ProtocolViolation(
            f"model tokenization ({len(embeddings.tokens)} tokens) does not align "
            f"with the document's {len(tokens)} tokens"
        )
    aggregated = mlwe.aggregate_layers(embeddings)
    reduced = mlwe.pca_reduce(aggregated, config.pca_components)
    partitions = {}
    for k in range(2, mlwe.k_max(len(tokens)) + 1):
        partition = mlwe.kmeans(reduced.matrix, k, config.seed)
        if partition.k not in partitions:
            partitions[partition.k] = partition
    return partitions


def explain_document(text: str, model, config: RunConfig, lexicons: Lexicons,
                     document_id: str = "doc") -> ExplanationSet:
    """Run every enabled feature-extraction method and perturbation kind."""
    tokens = tuple(textprep.pos_tag(textprep.tokenize(text), lexicons))
    if not tokens:
        raise EmptyDocument(f"document {document_id!r} has no tokens")
    info = model.info()
    p_o = model.predict(text)
    if len(p_o.probs) != len(info.class_names):
        raise ProtocolViolation(
            f"model reports {len(info.class_names)} classes but predicted "
            f"{len(p_o.probs)} probabilities"
        )
    label_o = p_o.label_index()
    threshold = config.threshold
    kinds = config.perturbations
    antonyms = lexicons.antonyms

    def score(feature, k=None, cluster=None):
        return _score_feature(document_id, tokens, feature, kinds, model, p_o,
                              label_o, threshold, antonyms, k, cluster)

    buckets: dict[str, list[LocalExplanation]] = {m: [] for m in METHOD_ORDER}
    combinable: list[list[InterpretableFeature]] = []

    if METHOD_POS in config.methods:
        pos_features = extract_pos_features(tokens)
        for feature in pos_features:
            buckets[METHOD_POS].extend(score(feature))
        if config.combine_pos:
            combinable.append(pos_features)
    if METHOD_SENTENCE in config.methods:
        sentence_features = extract_sentence_features(textprep.split_sentences(tokens, text))
        for feature in sentence_features:
            buckets[METHOD_SENTENCE].extend(score(feature))
        if config.combine_sentence:
            combinable.append(sentence_features)

    meta = MlweMeta(seed=config.seed, skipped=True, reason="method disabled")
    if METHOD_MLWE in config.methods:
        if len(tokens) < 2:
            meta = MlweMeta(seed=config.seed, skipped=True, reason="document too short")
        else:
            try:
                partitions = _mlwe_partitions(tokens, model, text, config)
            except DegenerateInput as exc:
                partitions = {}
                meta = MlweMeta(seed=config.seed, skipped=True, reason=str(exc))
            scored = []
            removal_by_k = {}
            for k in sorted(partitions):
                partition = partitions[k]
                removals = [
                    _score_feature(document_id, tokens, cluster, (perturb.KIND_REMOVAL,),
                                   model, p_o, label_o, threshold, antonyms, k, j)[0]
                    for j, cluster in enumerate(partition.clusters)
                ]
                removal_by_k[k] = removals
                score_k = float(mlwe.k_score(
                    [(e.npir[label_o], e.feature.size) for e in removals]
                ))
                scored.append((partition, score_k))
            if scored:
                best = mlwe.select_best_partition(scored)
                meta = MlweMeta(
                    seed=config.seed,
                    k=best.k,
                    k_scores=tuple((p.k, float(s)) for p, s in scored),
                )
                for j, cluster in enumerate(best.clusters):
                    buckets[METHOD_MLWE].append(removal_by_k[best.k][j])
                    if perturb.KIND_SUBSTITUTION in kinds:
                        buckets[METHOD_MLWE].extend(
                            _score_feature(document_id, tokens, cluster,
                                           (perturb.KIND_SUBSTITUTION,), model, p_o,
                                           label_o, threshold, antonyms, best.k, j)
                        )
                if config.combine_mlwe:
                    combinable.append(list(best.clusters))

    for group in combinable:
        for feature in combine_pairwise(group):
            buckets[METHOD_COMBINED].extend(score(feature))

    return ExplanationSet(
        document_id=document_id,
        text=text,
        class_names=info.class_names,
        tokens=tokens,
        p_o=p_o.probs,
        label_o=label_o,
        explanations={m: tuple(v) for m, v in buckets.items()},
        mlwe_meta=meta,
    )


def most_informative(explanation_set: ExplanationSet,
                     class_index: int | None = None,
                     threshold: float = DEFAULT_THRESHOLD) -> list[LocalExplanation]:
    """Explanations meeting the threshold for the class of interest, best first.

    Ties prefer smaller features, then the fixed method order, then the label.
    """
    c = explanation_set.label_o if class_index is None else class_index
    survivors = [e for e in explanation_set.all_explanations() if e.npir[c] >= threshold]
    survivors.sort(
        key=lambda e: (
            -e.npir[c],
            e.feature.size,
            METHOD_ORDER.index(e.feature.method),
            e.feature.label,
        )
    )
    return survivors
