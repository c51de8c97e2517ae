"""Interpretable feature extraction: POS groups, sentences, pairwise unions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .textprep import POS_TAGS, SentenceSpan, Token

METHOD_POS = "pos"
METHOD_SENTENCE = "sentence"
METHOD_MLWE = "mlwe"
METHOD_COMBINED = "combined"
METHOD_ORDER = (METHOD_POS, METHOD_SENTENCE, METHOD_MLWE, METHOD_COMBINED)


@dataclass(frozen=True)
class InterpretableFeature:
    """A named, position-anchored set of token occurrences."""

    method: str
    label: str
    token_positions: tuple[int, ...]
    parent_labels: tuple[str, str] | None = None

    def __post_init__(self):
        if not self.token_positions:
            raise ValueError(f"feature {self.label!r} has no token positions")
        if list(self.token_positions) != sorted(set(self.token_positions)):
            raise ValueError(f"feature {self.label!r} positions must be sorted and unique")

    @property
    def size(self) -> int:
        return len(self.token_positions)


def extract_pos_features(tokens: Sequence[Token]) -> list[InterpretableFeature]:
    """One feature per non-empty POS group, in fixed ADJ/NOUN/VERB/ADV/OTHER order."""
    groups: dict[str, list[int]] = {tag: [] for tag in POS_TAGS}
    for tok in tokens:
        groups[tok.pos].append(tok.position)
    return [
        InterpretableFeature(METHOD_POS, tag, tuple(positions))
        for tag in POS_TAGS
        if (positions := groups[tag])
    ]


def extract_sentence_features(sentences: Sequence[SentenceSpan]) -> list[InterpretableFeature]:
    """One feature per sentence; labels are 1-based for readability."""
    return [
        InterpretableFeature(
            METHOD_SENTENCE,
            f"sentence-{span.index + 1}",
            tuple(range(span.token_range[0], span.token_range[1])),
        )
        for span in sentences
    ]


def combine_pairwise(features: Sequence[InterpretableFeature]) -> list[InterpretableFeature]:
    """Union every unordered pair of same-method features.

    Combinations whose position set duplicates an input feature or an earlier
    combination are dropped, so perturbation never scores the same token set
    twice.  Output is sorted by label.
    """
    if len(features) < 2:
        return []
    methods = {f.method for f in features}
    if len(methods) != 1:
        raise ValueError(f"cannot combine features of mixed methods: {sorted(methods)}")
    seen = {f.token_positions for f in features}
    combined = []
    for i in range(len(features)):
        for j in range(i + 1, len(features)):
            a, b = features[i], features[j]
            positions = tuple(sorted(set(a.token_positions) | set(b.token_positions)))
            if positions in seen:
                continue
            seen.add(positions)
            combined.append(
                InterpretableFeature(
                    METHOD_COMBINED,
                    f"{a.label}+{b.label}",
                    positions,
                    parent_labels=(a.label, b.label),
                )
            )
    combined.sort(key=lambda f: f.label)
    return combined
