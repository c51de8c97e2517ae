"""The influence index and the per-document explanation orchestrator."""

import numpy as np
import pytest

import textexplain as tx
from textexplain.errors import EmptyDocument
from textexplain.features import METHOD_MLWE
from textexplain.local import NPIR_EPS, most_informative
from textexplain.perturb import KIND_REMOVAL

from conftest import CLASSES, TOY_TEXT


def npir_oracle(p_o, p_f):
    """Straight transcription of the two defining equations."""
    a = 1 - p_o / p_f
    b = 1 - p_f / p_o
    pir = p_f * b - p_o * a
    return pir / (1 + abs(pir))


class TestNpir:
    def test_unchanged_probability_is_zero(self):
        assert tx.npir(0.9, 0.9) == 0.0

    def test_point_value_drop(self):
        # hand evaluation: a=-8, b=8/9, PIR=328/45, softsign -> 328/373
        assert tx.npir(0.9, 0.1) == pytest.approx(328 / 373, abs=1e-12)

    def test_point_value_rise_antisymmetric(self):
        assert tx.npir(0.1, 0.9) == pytest.approx(-328 / 373, abs=1e-12)

    def test_point_value_strong_drop(self):
        # hand evaluation: PIR = 960596/9900, softsign -> 960596/970496
        assert tx.npir(0.99, 0.01) == pytest.approx(960596 / 970496, abs=1e-12)

    def test_matches_direct_transcription(self):
        rng = np.random.default_rng(53)
        for _ in range(2000):
            p_o, p_f = rng.uniform(1e-6, 1.0, size=2)
            assert tx.npir(p_o, p_f) == pytest.approx(npir_oracle(p_o, p_f), abs=1e-12)

    def test_open_interval_range(self):
        rng = np.random.default_rng(59)
        for _ in range(2000):
            p_o, p_f = rng.uniform(0.0, 1.0, size=2)
            assert -1.0 < tx.npir(p_o, p_f) < 1.0

    def test_zero_fixed_point(self):
        for p in [NPIR_EPS, 1e-6, 0.25, 0.5, 1.0]:
            assert tx.npir(p, p) == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(61)
        for _ in range(2000):
            x, y = rng.uniform(NPIR_EPS, 1.0, size=2)
            assert abs(tx.npir(x, y) + tx.npir(y, x)) < 1e-12

    def test_strictly_decreasing_in_perturbed_probability(self):
        rng = np.random.default_rng(67)
        for _ in range(200):
            p_o = rng.uniform(0.05, 1.0)
            grid = np.sort(rng.uniform(1e-6, 1.0, size=12))
            values = [tx.npir(p_o, p_f) for p_f in grid]
            assert all(earlier > later for earlier, later in zip(values, values[1:]))

    def test_saturation_toward_one(self):
        assert tx.npir(0.5, 1e-12) > 0.999
        assert tx.npir(0.5, 0.0) > 0.999  # clamped, not a division error

    def test_zero_inputs_clamped(self):
        assert -1.0 < tx.npir(0.0, 0.0) < 1.0
        assert tx.npir(0.0, 1.0) == pytest.approx(-1.0, abs=1e-6)


class TestExplainDocument:
    def test_toy_adjective_removal_flips_label(self, reference_model, run_config, lexicons):
        result = tx.explain_document(TOY_TEXT, reference_model, run_config, lexicons, "toy")
        assert result.class_names[result.label_o] == "neg"
        adj = next(
            e for e in result.explanations["pos"]
            if e.feature.label == "ADJ" and e.kind == KIND_REMOVAL
        )
        assert result.class_names[adj.label_f] == "pos"
        assert adj.npir[result.label_o] >= 0.5
        assert adj.informative

    def test_zero_weight_document_all_neutral(self, run_config, lexicons):
        model = tx.ReferenceModel(CLASSES, {})
        result = tx.explain_document(
            "plain words with no charge at all. nothing here.", model, run_config, lexicons
        )
        for explanation in result.all_explanations():
            assert explanation.npir == pytest.approx((0.0, 0.0), abs=1e-12)
            assert not explanation.informative

    def test_one_token_document_skips_clustering(self, reference_model, run_config, lexicons):
        result = tx.explain_document("awful", reference_model, run_config, lexicons)
        assert result.explanations["pos"]
        assert result.explanations["sentence"]
        assert result.explanations["mlwe"] == ()
        assert result.mlwe_meta.skipped
        assert result.mlwe_meta.reason == "document too short"

    def test_identical_tokens_skip_clustering_as_degenerate(
        self, reference_model, run_config, lexicons
    ):
        # identical token texts embed identically; nothing to cluster
        result = tx.explain_document("film film film film", reference_model,
                                     run_config, lexicons)
        assert result.explanations["mlwe"] == ()
        assert result.mlwe_meta.skipped
        assert "identical" in result.mlwe_meta.reason

    def test_mismatched_prediction_size_rejected(self, run_config, lexicons):
        class BrokenModel(tx.ReferenceModel):
            def predict(self, text):
                return tx.PredictionVector((0.2, 0.3, 0.5))

        broken = BrokenModel(("neg", "pos"), {})
        with pytest.raises(tx.ProtocolViolation):
            tx.explain_document("a film", broken, run_config, lexicons)

    def test_empty_document_rejected(self, reference_model, run_config, lexicons):
        with pytest.raises(EmptyDocument):
            tx.explain_document("   ", reference_model, run_config, lexicons)

    def test_mlwe_records_carry_cluster_identity(self, reference_model, run_config, lexicons):
        result = tx.explain_document(TOY_TEXT, reference_model, run_config, lexicons)
        chosen = result.mlwe_meta.k
        assert chosen is not None
        for explanation in result.explanations["mlwe"]:
            assert explanation.mlwe_k == chosen
            assert explanation.feature.label.startswith(f"mlwe-K{chosen}-c")

    def test_mlwe_clusters_partition_document(self, reference_model, run_config, lexicons):
        result = tx.explain_document(TOY_TEXT, reference_model, run_config, lexicons)
        removals = [e for e in result.explanations["mlwe"] if e.kind == KIND_REMOVAL]
        positions = sorted(p for e in removals for p in e.feature.token_positions)
        assert positions == list(range(len(result.tokens)))

    def test_disabled_methods_are_skipped(self, reference_model, run_config, lexicons):
        from dataclasses import replace

        config = replace(run_config, methods=("pos",), perturbations=("removal",),
                         combine_pos=False)
        result = tx.explain_document(TOY_TEXT, reference_model, config, lexicons)
        assert result.explanations["sentence"] == ()
        assert result.explanations["mlwe"] == ()
        assert result.explanations["combined"] == ()
        assert all(e.kind == KIND_REMOVAL for e in result.explanations["pos"])

    def test_pos_combinations_follow_their_method(self, reference_model, run_config, lexicons):
        from dataclasses import replace

        config = replace(run_config, methods=("pos",), perturbations=("removal",))
        result = tx.explain_document(TOY_TEXT, reference_model, config, lexicons)
        combined = result.explanations["combined"]
        assert combined
        pos_labels = {"ADJ", "NOUN", "VERB", "ADV", "OTHER"}
        for explanation in combined:
            assert set(explanation.feature.parent_labels) <= pos_labels

    def test_deterministic_repeat_runs(self, reference_model, run_config, lexicons):
        a = tx.explain_document(TOY_TEXT, reference_model, run_config, lexicons, "d")
        b = tx.explain_document(TOY_TEXT, reference_model, run_config, lexicons, "d")
        assert a == b


class TestMostInformative:
    def fake_set(self, npirs_sizes):
        explanations = []
        for i, (value, size) in enumerate(npirs_sizes):
            feature = tx.InterpretableFeature(METHOD_MLWE, f"mlwe-K9-c{i}", tuple(range(size)))
            explanations.append(
                tx.LocalExplanation(
                    document_id="d", feature=feature, kind=KIND_REMOVAL,
                    p_o=(0.9, 0.1), p_f=(0.5, 0.5), label_o=0, label_f=1,
                    npir=(value, -value), informative=value >= 0.5,
                )
            )
        return tx.ExplanationSet(
            document_id="d", text="x", class_names=CLASSES, tokens=(),
            p_o=(0.9, 0.1), label_o=0,
            explanations={"mlwe": tuple(explanations)},
            mlwe_meta=tx.local.MlweMeta(seed=42),
        )

    def test_threshold_filter_and_order(self):
        result = most_informative(self.fake_set([(0.998, 2), (0.000, 3), (0.984, 2)]))
        assert [e.npir[0] for e in result] == [0.998, 0.984]

    def test_all_below_threshold(self):
        assert most_informative(self.fake_set([(0.2, 1), (0.49, 2)])) == []

    def test_tie_prefers_smaller_feature(self):
        result = most_informative(self.fake_set([(0.7, 4), (0.7, 1)]))
        assert [e.feature.size for e in result] == [1, 4]
