"""Perturbed text variants: feature removal and antonym substitution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InvalidFeature
from .features import InterpretableFeature
from .textprep import Token, detokenize

KIND_REMOVAL = "removal"
KIND_SUBSTITUTION = "substitution"
KIND_ORDER = (KIND_REMOVAL, KIND_SUBSTITUTION)


@dataclass(frozen=True)
class PerturbedVariant:
    feature: InterpretableFeature
    kind: str
    text: str
    replaced: tuple[tuple[int, str, str], ...] = ()  # (position, original, replacement)


def _check_positions(tokens: Sequence[Token], feature: InterpretableFeature):
    if not feature.token_positions:
        raise InvalidFeature(f"feature {feature.label!r} is empty")
    if feature.token_positions[-1] >= len(tokens) or feature.token_positions[0] < 0:
        raise InvalidFeature(
            f"feature {feature.label!r} positions {feature.token_positions} "
            f"exceed the document's {len(tokens)} tokens"
        )


def perturb_removal(tokens: Sequence[Token], feature: InterpretableFeature) -> PerturbedVariant:
    """Drop the feature's tokens and re-join the rest."""
    _check_positions(tokens, feature)
    drop = set(feature.token_positions)
    kept = [tok.text for tok in tokens if tok.position not in drop]
    return PerturbedVariant(feature=feature, kind=KIND_REMOVAL, text=detokenize(kept))


def perturb_substitution(
    tokens: Sequence[Token],
    feature: InterpretableFeature,
    antonyms: Mapping[str, Sequence[str]],
) -> PerturbedVariant | None:
    """Replace each feature token that has an antonym with its first-listed one.

    Tokens without an antonym stay in place so the variant isolates the
    semantic inversion from the absence effect.  Returns None (skip) when no
    token is replaceable; an all-noun feature typically has no antonyms.
    """
    _check_positions(tokens, feature)
    targets = set(feature.token_positions)
    texts = []
    replaced = []
    for tok in tokens:
        if tok.position in targets:
            options = antonyms.get(tok.text.lower())
            if options:
                replacement = options[0]
                replaced.append((tok.position, tok.text, replacement))
                texts.append(replacement)
                continue
        texts.append(tok.text)
    if not replaced:
        return None
    return PerturbedVariant(
        feature=feature,
        kind=KIND_SUBSTITUTION,
        text=detokenize(texts),
        replaced=tuple(replaced),
    )
