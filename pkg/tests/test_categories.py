"""Taxonomy collapsing and conditioned-input construction."""

import json

import pytest
from hypothesis import given, strategies as st

from podsum.categories import (
    CategoryTaxonomy,
    build_conditioned_input,
    category_token,
    collapse_category,
    default_taxonomy,
    emit_training_file,
    load_taxonomy,
    make_special_tokens,
    write_generation_config,
)
from podsum.corpus import tokenize
from podsum.errors import ValidationError
from podsum.synth import make_synthetic_corpus

from conftest import make_episode


class TestTaxonomy:
    def test_default_has_22_canonical_labels(self):
        tax = default_taxonomy()
        assert len(tax.canonical) == 22
        assert "Sports" in tax.canonical
        assert "Kids & Family" in tax.canonical

    def test_published_collapse_pair(self):
        tax = default_taxonomy()
        assert collapse_category("Sports & Recreation", tax) == "Sports"

    def test_canonical_labels_are_fixed_points(self):
        tax = default_taxonomy()
        for label in tax.canonical:
            assert collapse_category(label, tax) == label

    def test_unknown_label_passes_through_and_counts(self):
        tax = default_taxonomy()
        assert collapse_category("Astrology", tax) == "Astrology"
        assert collapse_category("Astrology", tax) == "Astrology"
        assert tax.unknown_seen["Astrology"] == 2

    def test_collapse_is_idempotent_for_mapped_labels(self):
        tax = default_taxonomy()
        for raw in tax.mapping:
            once = collapse_category(raw, tax)
            assert collapse_category(once, tax) == once

    def test_load_skips_comments_and_blanks(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("# comment\n\nComedy\tComedy\nStandup\tComedy\n")
        tax = load_taxonomy(path)
        assert tax.canonical == frozenset({"Comedy"})
        assert collapse_category("Standup", tax) == "Comedy"

    def test_load_rejects_malformed_row(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("Comedy only one column\n")
        with pytest.raises(ValidationError, match="line 1"):
            load_taxonomy(path)

    def test_load_rejects_non_canonical_target(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("Comedy\tComedy\nStandup\tHumor\n")
        with pytest.raises(ValidationError, match="Humor"):
            load_taxonomy(path)

    def test_load_rejects_conflicting_duplicate(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("Comedy\tComedy\nArts\tArts\nStandup\tComedy\nStandup\tArts\n")
        with pytest.raises(ValidationError, match="conflicting"):
            load_taxonomy(path)


class TestSpecialTokens:
    def test_slug_rule(self):
        assert category_token("Comedy") == "<cat:comedy>"
        assert category_token("Kids & Family") == "<cat:kids___family>"
        assert category_token("TV & Film") == "<cat:tv___film>"

    def test_sorted_output(self):
        assert make_special_tokens({"Sports", "Comedy"}) == ["<cat:comedy>", "<cat:sports>"]

    def test_empty_set(self):
        assert make_special_tokens(set()) == []

    def test_duplicates_collapse(self):
        assert make_special_tokens(["Comedy", "Comedy"]) == ["<cat:comedy>"]

    @given(st.lists(st.sampled_from(["Arts", "Comedy", "Sports", "News", "Music"]), max_size=8))
    def test_permutation_invariant_sorted_unique(self, labels):
        tokens = make_special_tokens(labels)
        assert tokens == sorted(tokens)
        assert len(tokens) == len(set(tokens))
        assert make_special_tokens(list(reversed(labels))) == tokens


def _long_episode(n_tokens, categories=("Comedy",)):
    words = " ".join(f"w{i}" for i in range(n_tokens))
    return make_episode(categories=categories, texts=(words,))


class TestBuildConditionedInput:
    def test_budget_shared_with_category_tokens(self):
        ci = build_conditioned_input(_long_episode(2000), default_taxonomy())
        assert len(ci.special_tokens) == 1
        assert len(ci.body) == 1023
        assert ci.body[0] == "w0"

    def test_short_transcript_unchanged(self):
        ci = build_conditioned_input(_long_episode(500), default_taxonomy())
        assert len(ci.body) == 500

    def test_no_categories_uses_full_budget(self):
        ci = build_conditioned_input(_long_episode(2000, categories=()), default_taxonomy())
        assert ci.special_tokens == ()
        assert len(ci.body) == 1024

    def test_budget_too_small_for_categories(self):
        ep = _long_episode(50, categories=("Comedy", "Arts"))
        with pytest.raises(ValidationError, match="max_input_tokens"):
            build_conditioned_input(ep, default_taxonomy(), max_input_tokens=2)

    def test_collapse_applied_before_tokenizing(self):
        ep = _long_episode(10, categories=("Sports & Recreation",))
        ci = build_conditioned_input(ep, default_taxonomy())
        assert ci.special_tokens == ("<cat:sports>",)

    def test_target_is_description_verbatim(self):
        ep = make_episode(description="  Exact text, kept as-is.  ")
        ci = build_conditioned_input(ep, default_taxonomy())
        assert ci.target == "  Exact text, kept as-is.  "


class TestEmitTrainingFile:
    def build(self, episodes, **kw):
        tax = default_taxonomy()
        return [build_conditioned_input(e, tax, **kw) for e in episodes]

    def test_line_order_matches_input(self, tmp_path):
        inputs = self.build([make_episode(f"e{i}") for i in range(3)])
        path = tmp_path / "train.jsonl"
        emit_training_file(inputs, path)
        ids = [json.loads(line)["id"] for line in path.read_text().splitlines()]
        assert ids == ["e0", "e1", "e2"]

    def test_round_trip_sources_identical(self, tmp_path):
        inputs = self.build([make_episode(f"e{i}") for i in range(3)])
        path = tmp_path / "train.jsonl"
        emit_training_file(inputs, path)
        sources = [json.loads(line)["source"] for line in path.read_text().splitlines()]
        assert sources == [ci.source for ci in inputs]

    def test_empty_target_rejected_and_names_id(self, tmp_path):
        inputs = self.build([make_episode("bad", description="   ")])
        with pytest.raises(ValidationError, match="bad"):
            emit_training_file(inputs, tmp_path / "train.jsonl")
        assert not (tmp_path / "train.jsonl").exists()

    def test_inference_mode_allows_empty_target(self, tmp_path):
        inputs = self.build([make_episode("ok", description="")])
        path = tmp_path / "infer.jsonl"
        emit_training_file(inputs, path, require_targets=False)
        assert json.loads(path.read_text())["target"] == ""

    def test_source_token_counts_respect_budget(self, tmp_path):
        corpus = make_synthetic_corpus(
            n_episodes=40, n_shows=5, tokens_per_episode=1500, seed=5
        )
        inputs = self.build(corpus.episodes, max_input_tokens=256)
        path = tmp_path / "train.jsonl"
        emit_training_file(inputs, path)
        for line in path.read_text().splitlines():
            source = json.loads(line)["source"]
            assert len(source.split()) <= 256

    def test_category_tokens_form_a_prefix(self, tmp_path):
        corpus = make_synthetic_corpus(n_episodes=40, n_shows=5, tokens_per_episode=120, seed=6)
        inputs = self.build(corpus.episodes)
        for ci in inputs:
            tokens = ci.source.split()
            in_prefix = True
            for tok in tokens:
                if tok.startswith("<cat:"):
                    assert in_prefix, f"category token after body in {ci.episode_id}"
                else:
                    in_prefix = False


class TestGenerationConfig:
    def test_contents(self, tmp_path):
        path = tmp_path / "gen.json"
        write_generation_config(path, max_input_tokens=512)
        obj = json.loads(path.read_text())
        assert obj == {
            "max_input_tokens": 512,
            "min_summary_tokens": 50,
            "max_summary_tokens": 250,
        }

    def test_rejects_bad_bounds(self, tmp_path):
        with pytest.raises(ValidationError):
            write_generation_config(tmp_path / "gen.json", min_summary_tokens=300)
