"""POS-group, sentence, and pairwise-combination feature extraction."""

import pytest

import textexplain as tx
from textexplain.features import (
    METHOD_COMBINED,
    METHOD_POS,
    combine_pairwise,
    extract_pos_features,
    extract_sentence_features,
)

from conftest import TOY_TEXT


def tagged(text, lexicons):
    return tx.pos_tag(tx.tokenize(text), lexicons)


class TestPosFeatures:
    def test_toy_adjective_group(self, toy_tokens):
        features = extract_pos_features(toy_tokens)
        by_label = {f.label: f for f in features}
        texts = [toy_tokens[p].text for p in by_label["ADJ"].token_positions]
        assert texts == ["awful", "bad"]

    def test_all_punctuation_single_other_group(self, lexicons):
        features = extract_pos_features(tagged("! ? .", lexicons))
        assert [f.label for f in features] == ["OTHER"]

    def test_repeated_word_collects_both_positions(self, lexicons):
        features = extract_pos_features(tagged("good good", lexicons))
        assert features[0].label == "ADJ"
        assert features[0].token_positions == (0, 1)

    def test_partition_of_token_set(self, toy_tokens):
        features = extract_pos_features(toy_tokens)
        seen = [p for f in features for p in f.token_positions]
        assert sorted(seen) == list(range(len(toy_tokens)))
        assert len(seen) == len(set(seen))

    def test_fixed_group_order(self, toy_tokens):
        assert [f.label for f in extract_pos_features(toy_tokens)] == [
            "ADJ", "NOUN", "VERB", "ADV", "OTHER",
        ]

    def test_no_tokens_no_features(self):
        assert extract_pos_features([]) == []


class TestSentenceFeatures:
    def test_toy_two_features(self, toy_tokens):
        spans = tx.split_sentences(toy_tokens, TOY_TEXT)
        features = extract_sentence_features(spans)
        assert [f.label for f in features] == ["sentence-1", "sentence-2"]
        assert features[0].token_positions == tuple(range(0, 6))
        assert features[1].token_positions == tuple(range(6, 15))

    def test_single_sentence_covers_all(self, lexicons):
        text = "just one sentence"
        tokens = tagged(text, lexicons)
        features = extract_sentence_features(tx.split_sentences(tokens, text))
        assert len(features) == 1
        assert features[0].token_positions == tuple(range(len(tokens)))

    def test_three_sentences_partition(self, lexicons):
        text = "One two. Three four! Five?"
        tokens = tagged(text, lexicons)
        features = extract_sentence_features(tx.split_sentences(tokens, text))
        assert len(features) == 3
        seen = [p for f in features for p in f.token_positions]
        assert sorted(seen) == list(range(len(tokens)))


class TestCombinePairwise:
    def make(self, *position_sets):
        return [
            tx.InterpretableFeature(METHOD_POS, f"g{i}", positions)
            for i, positions in enumerate(position_sets)
        ]

    def test_five_groups_ten_pairs(self):
        features = self.make((0,), (1,), (2,), (3,), (4,))
        assert len(combine_pairwise(features)) == 10

    def test_union_of_positions(self, toy_tokens):
        pos = extract_pos_features(toy_tokens)
        by_label = {f.label: f for f in pos}
        combos = combine_pairwise([by_label["ADJ"], by_label["NOUN"]])
        assert len(combos) == 1
        texts = {toy_tokens[p].text for p in combos[0].token_positions}
        assert texts == {"awful", "bad", "film", "movie"}
        assert combos[0].method == METHOD_COMBINED
        assert combos[0].parent_labels == ("ADJ", "NOUN")

    def test_single_feature_no_pairs(self):
        assert combine_pairwise(self.make((0, 1))) == []

    def test_duplicate_position_sets_dropped(self):
        # every pair unions to (0,1), which is already feature g2
        assert combine_pairwise(self.make((0,), (1,), (0, 1))) == []
        combos = combine_pairwise(self.make((0,), (1,), (2,), (0, 1)))
        assert {c.label for c in combos} == {"g0+g2", "g1+g2", "g2+g3"}

    def test_combined_size_dominates_parents(self):
        features = self.make((0, 5), (1, 2, 3), (4,))
        for combo in combine_pairwise(features):
            parents = [f for f in features if f.label in combo.parent_labels]
            assert combo.size >= max(p.size for p in parents)
            union = set(parents[0].token_positions) | set(parents[1].token_positions)
            assert set(combo.token_positions) == union

    def test_mixed_methods_rejected(self):
        a = tx.InterpretableFeature(METHOD_POS, "ADJ", (0,))
        b = tx.InterpretableFeature("sentence", "sentence-1", (1,))
        with pytest.raises(ValueError):
            combine_pairwise([a, b])

    def test_lexicographic_order(self):
        features = self.make((0,), (1,), (2,))
        assert [c.label for c in combine_pairwise(features)] == ["g0+g1", "g0+g2", "g1+g2"]
