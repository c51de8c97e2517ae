"""Corpus-level lemma influence: absolute (GAI) and class-differentiating (GRI).

For every class, each document contributes its single strongest
embedding-cluster explanation; the positive part of that influence is summed
per lemma over the corpus.  A lemma's relative score keeps only the influence
it has for one class beyond all others combined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import EmptyCorpus
from .features import METHOD_MLWE
from .local import ExplanationSet
from .perturb import KIND_REMOVAL
from .textprep import lemmatize


@dataclass(frozen=True)
class ClusterRecord:
    """The slice of one MLWE cluster explanation that aggregation needs."""

    npir: tuple[float, ...]
    k: int
    cluster: int
    token_texts: tuple[str, ...]


@dataclass(frozen=True)
class CorpusDocument:
    document_id: str
    records: tuple[ClusterRecord, ...]


@dataclass(frozen=True)
class GlobalScores:
    class_names: tuple[str, ...]
    corpus_size: int
    skipped_documents: int
    gai: tuple[dict[str, float], ...]  # one lemma -> score map per class
    gri: tuple[dict[str, float], ...]


def corpus_document(explanation_set: ExplanationSet) -> CorpusDocument:
    """Project an in-memory explanation set onto the aggregation schema.

    Only single-cluster removal explanations participate; substitution trials
    and pairwise combinations stay local.
    """
    records = []
    for exp in explanation_set.explanations.get(METHOD_MLWE, ()):
        if exp.kind != KIND_REMOVAL or exp.mlwe_k is None:
            continue
        token_texts = tuple(
            explanation_set.tokens[position].text
            for position in exp.feature.token_positions
        )
        records.append(
            ClusterRecord(
                npir=exp.npir,
                k=exp.mlwe_k,
                cluster=exp.mlwe_cluster,
                token_texts=token_texts,
            )
        )
    return CorpusDocument(explanation_set.document_id, tuple(records))


def _best_record(records: Sequence[ClusterRecord], class_index: int) -> ClusterRecord:
    return max(records, key=lambda r: (r.npir[class_index], -r.k, -r.cluster))


def gai(documents: Iterable[CorpusDocument], class_names: Sequence[str],
        lemma_exceptions: Mapping[str, str]) -> tuple[tuple[dict[str, float], ...], int, int]:
    """Per-class lemma -> summed positive influence of each document's best cluster.

    Documents with no cluster explanations are skipped (and counted).  Lemmas
    contribute once per token occurrence.  Returns (maps, used, skipped).
    """
    docs = sorted(documents, key=lambda d: d.document_id)
    usable = [d for d in docs if d.records]
    if not usable:
        raise EmptyCorpus("no documents carry embedding-cluster explanations")
    maps: tuple[dict[str, float], ...] = tuple({} for _ in class_names)
    for class_index in range(len(class_names)):
        scores = maps[class_index]
        for doc in usable:
            best = _best_record(doc.records, class_index)
            contribution = max(0.0, best.npir[class_index])
            for text in best.token_texts:
                lemma = lemmatize(text, lemma_exceptions)
                scores[lemma] = scores.get(lemma, 0.0) + contribution
    return maps, len(usable), len(docs) - len(usable)


def gri(gai_maps: Sequence[Mapping[str, float]]) -> tuple[dict[str, float], ...]:
    """Relative influence: a class's GAI minus every other class's, floored at 0.

    Defined over the union of all classes' lemmas, so absent entries read as 0.
    """
    lemmas = sorted({lemma for scores in gai_maps for lemma in scores})
    out = []
    for class_index in range(len(gai_maps)):
        own = gai_maps[class_index]
        rest = [gai_maps[i] for i in range(len(gai_maps)) if i != class_index]
        out.append({
            lemma: max(
                0.0,
                own.get(lemma, 0.0) - sum(other.get(lemma, 0.0) for other in rest),
            )
            for lemma in lemmas
        })
    return tuple(out)


def aggregate_corpus(documents: Iterable[CorpusDocument], class_names: Sequence[str],
                     lemma_exceptions: Mapping[str, str]) -> GlobalScores:
    maps, used, skipped = gai(documents, class_names, lemma_exceptions)
    return GlobalScores(
        class_names=tuple(class_names),
        corpus_size=used,
        skipped_documents=skipped,
        gai=maps,
        gri=gri(maps),
    )
