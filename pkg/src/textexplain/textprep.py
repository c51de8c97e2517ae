"""Deterministic tokenization, sentence segmentation, POS tagging and lemmatization.

Every downstream feature is anchored to token positions produced here, so all
operations are rule-based and reproducible: no statistical models, no state.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import MissingLexicon

POS_TAGS = ("ADJ", "NOUN", "VERB", "ADV", "OTHER")

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_SENTENCE_TERMINATORS = frozenset({".", "!", "?"})

# Suffix heuristics applied to words missing from the POS lexicon.  A rule
# fires only when the remaining stem keeps at least _MIN_STEM characters.
_POS_SUFFIX_RULES = (
    ("ly", "ADV"),
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("ive", "ADJ"),
    ("ness", "NOUN"),
    ("tion", "NOUN"),
    ("ment", "NOUN"),
)
_MIN_STEM = 3

_DATA_DIR_ENV = "EBANO_DATA_DIR"
_DEFAULT_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class Token:
    """A single word or punctuation occurrence in a document."""

    text: str
    position: int
    char_span: tuple[int, int]
    pos: str = ""
    lemma: str = ""


@dataclass(frozen=True)
class SentenceSpan:
    index: int
    token_range: tuple[int, int]  # half-open range of token positions
    text: str


@dataclass(frozen=True)
class Lexicons:
    """Immutable bundle of the rule lexicons; safe to share across threads."""

    pos: Mapping[str, str]
    closed_class: frozenset[str]
    lemma_exceptions: Mapping[str, str]
    antonyms: Mapping[str, tuple[str, ...]] = field(default_factory=dict)


def data_dir() -> Path:
    """Default lexicon directory, overridable via the EBANO_DATA_DIR env var."""
    override = os.environ.get(_DATA_DIR_ENV)
    return Path(override) if override else _DEFAULT_DATA_DIR


def _load_json(path: Path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MissingLexicon(f"cannot load lexicon {path}: {exc}") from exc


def load_lexicons(
    pos_path: str | Path | None = None,
    lemma_path: str | Path | None = None,
    antonyms_path: str | Path | None = None,
) -> Lexicons:
    """Load the shipped lexicons, honoring per-file overrides."""
    base = data_dir()
    pos = _load_json(Path(pos_path) if pos_path else base / "pos_lexicon.json")
    closed = _load_json(base / "closed_class.json")
    lemma = _load_json(Path(lemma_path) if lemma_path else base / "lemma_exceptions.json")
    anton = _load_json(Path(antonyms_path) if antonyms_path else base / "antonyms.json")
    if not isinstance(pos, dict) or not isinstance(lemma, dict) or not isinstance(anton, dict):
        raise MissingLexicon("lexicon files must contain JSON objects")
    bad = {t for t in pos.values() if t not in POS_TAGS}
    if bad:
        raise MissingLexicon(f"pos lexicon contains unknown tags: {sorted(bad)}")
    return Lexicons(
        pos=dict(pos),
        closed_class=frozenset(closed),
        lemma_exceptions=dict(lemma),
        antonyms={k: tuple(v) for k, v in anton.items()},
    )


def tokenize(text: str) -> list[Token]:
    """Split on whitespace and punctuation boundaries; punctuation stands alone.

    Character spans always slice the original text back to the token text.
    """
    tokens = []
    for i, match in enumerate(_TOKEN_RE.finditer(text)):
        tokens.append(Token(text=match.group(), position=i, char_span=match.span()))
    return tokens


def detokenize(texts: Iterable[str]) -> str:
    """Join token texts: single spaces, none before closing or after opening marks."""
    joined = " ".join(texts)
    joined = re.sub(r" ([.,!?;:')\]])", r"\1", joined)
    joined = re.sub(r"([(\[]) ", r"\1", joined)
    return joined


def split_sentences(tokens: Sequence[Token], text: str) -> list[SentenceSpan]:
    """Cut after . ! ? when followed by whitespace or end-of-text."""
    spans: list[SentenceSpan] = []
    start = 0
    for tok in tokens:
        end_of_text = tok.char_span[1] >= len(text)
        followed_by_space = not end_of_text and text[tok.char_span[1]].isspace()
        if tok.text in _SENTENCE_TERMINATORS and (end_of_text or followed_by_space):
            spans.append(_make_span(tokens, text, len(spans), start, tok.position + 1))
            start = tok.position + 1
    if start < len(tokens):
        spans.append(_make_span(tokens, text, len(spans), start, len(tokens)))
    return spans


def _make_span(tokens: Sequence[Token], text: str, index: int, lo: int, hi: int) -> SentenceSpan:
    return SentenceSpan(
        index=index,
        token_range=(lo, hi),
        text=text[tokens[lo].char_span[0] : tokens[hi - 1].char_span[1]],
    )


def _tag_word(word: str, lexicons: Lexicons) -> str:
    lower = word.lower()
    tag = lexicons.pos.get(lower)
    if tag is not None:
        return tag
    for suffix, stag in _POS_SUFFIX_RULES:
        if lower.endswith(suffix) and len(lower) - len(suffix) >= _MIN_STEM:
            return stag
    if not any(ch.isalnum() for ch in word) or lower in lexicons.closed_class:
        return "OTHER"
    return "NOUN"


def pos_tag(tokens: Sequence[Token], lexicons: Lexicons) -> list[Token]:
    """Assign one of the five group tags to every token."""
    return [replace(tok, pos=_tag_word(tok.text, lexicons)) for tok in tokens]


def _strip_once(word: str) -> str:
    n = len(word)
    if word.endswith("ies") and n - 3 >= _MIN_STEM:
        return word[:-3] + "y"
    if word.endswith("es") and n - 2 >= _MIN_STEM:
        stem = word[:-2]
        if stem.endswith(("ch", "sh", "ss", "x", "z", "o")):
            return stem
        return word[:-1]
    if word.endswith("s") and not word.endswith("ss") and n - 1 >= _MIN_STEM:
        return word[:-1]
    for suffix in ("ing", "ed"):
        if word.endswith(suffix) and n - len(suffix) >= _MIN_STEM:
            stem = word[: -len(suffix)]
            if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in "ls":
                stem = stem[:-1]
            return stem
    return word


def lemmatize(token_text: str, exceptions: Mapping[str, str]) -> str:
    """Lowercase, look up irregulars, then strip suffixes until a fixed point.

    Stripping to a fixed point keeps the function idempotent on its own
    outputs, which global aggregation relies on when merging inflections.
    """
    word = token_text.lower()
    hit = exceptions.get(word)
    if hit is not None:
        return hit
    while True:
        stripped = _strip_once(word)
        if stripped == word:
            return word
        word = stripped
        hit = exceptions.get(word)
        if hit is not None:
            return hit


def lemmatize_tokens(tokens: Sequence[Token], lexicons: Lexicons) -> list[Token]:
    return [replace(tok, lemma=lemmatize(tok.text, lexicons.lemma_exceptions)) for tok in tokens]
