"""Corpus parsing, label normalization, and statistics."""

from __future__ import annotations

import io
import json

import numpy as np
import pytest

from labelshift.corpus import (
    CONLL_BIO,
    JSONL_SPANS,
    Corpus,
    EvalLabelSet,
    LabelStats,
    Sentence,
    Span,
    eval_labels_from_corpus,
    label_stats,
    label_stats_from_json,
    label_stats_to_json,
    load_eval_labels,
    load_label_stats,
    merge_label_stats,
    normalize_label,
    parse_conll,
    parse_jsonl_spans,
    write_conll,
    write_corpus,
    write_jsonl_spans,
)
from labelshift.errors import ParseError


class TestNormalizeLabel:
    def test_lowercases(self):
        assert normalize_label("Person") == "person"

    def test_separators_and_trim(self):
        assert normalize_label("  ASTRONOMICAL_Object ") == "astronomical object"

    def test_hyphens(self):
        assert normalize_label("sub-genre") == "sub genre"

    def test_unicode_preserved(self):
        assert normalize_label("élection") == "élection"
        assert normalize_label("Élection") == "élection"

    def test_whitespace_collapsed(self):
        assert normalize_label("a \t  b") == "a b"

    def test_empty_result_rejected(self):
        with pytest.raises(ValueError, match="empty label"):
            normalize_label("  _- ")

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        alphabet = list("aB _-Çé\t")
        for _ in range(200):
            raw = "".join(rng.choice(alphabet, size=rng.integers(1, 12)))
            try:
                once = normalize_label(raw)
            except ValueError:
                continue
            assert normalize_label(once) == once


class TestParseJsonlSpans:
    def test_minimal_line(self):
        line = '{"tokenized_text":["Dylan","sang"],"ner":[[0,0,"musician"]]}'
        parsed = parse_jsonl_spans(io.StringIO(line))
        assert len(parsed.sentences) == 1
        assert parsed.sentences[0].entities == (Span(0, 0, "musician"),)
        assert parsed.source_format == JSONL_SPANS

    def test_span_out_of_range(self):
        line = '{"tokenized_text":["a"],"ner":[[0,5,"x"]]}'
        with pytest.raises(ParseError, match=r"out of range"):
            parse_jsonl_spans(io.StringIO(line), source="bad.jsonl")

    def test_error_names_file_and_line(self):
        text = '{"tokenized_text":["a"],"ner":[]}\nnot json\n'
        with pytest.raises(ParseError, match=r"bad\.jsonl:2"):
            parse_jsonl_spans(io.StringIO(text), source="bad.jsonl")

    def test_blank_lines_skipped(self):
        text = '\n{"tokenized_text":["a"],"ner":[]}\n\n'
        assert len(parse_jsonl_spans(io.StringIO(text)).sentences) == 1

    def test_spellings_merge_through_stats(self):
        lines = [
            '{"tokenized_text":["x"],"ner":[[0,0,"Person"]]}',
            '{"tokenized_text":["y"],"ner":[[0,0,"person"]]}',
            '{"tokenized_text":["z"],"ner":[[0,0,"PLACE"]]}',
        ]
        stats = label_stats(parse_jsonl_spans(io.StringIO("\n".join(lines))))
        assert stats.counts == {"person": 2, "place": 1}
        assert stats.total_mentions == 3

    def test_no_normalize_keeps_raw(self):
        line = '{"tokenized_text":["x"],"ner":[[0,0,"Person"]]}'
        parsed = parse_jsonl_spans(io.StringIO(line), normalize=False)
        assert parsed.sentences[0].entities[0].label == "Person"

    def test_non_object_line(self):
        with pytest.raises(ParseError, match="not a JSON object"):
            parse_jsonl_spans(io.StringIO("[1,2]"))

    def test_missing_token_field(self):
        with pytest.raises(ParseError, match="token field"):
            parse_jsonl_spans(io.StringIO('{"ner":[]}'))

    def test_malformed_entity_triple(self):
        line = '{"tokenized_text":["a"],"ner":[[0,"x"]]}'
        with pytest.raises(ParseError, match="triple"):
            parse_jsonl_spans(io.StringIO(line))

    def test_custom_field_names(self):
        line = '{"toks":["a"],"spans":[[0,0,"thing"]]}'
        parsed = parse_jsonl_spans(io.StringIO(line), token_field="toks", entity_field="spans")
        assert parsed.sentences[0].entities[0].label == "thing"

    def test_missing_entity_field_means_no_entities(self):
        parsed = parse_jsonl_spans(io.StringIO('{"tokenized_text":["a"]}'))
        assert parsed.sentences[0].entities == ()

    def test_empty_label_rejected(self):
        line = '{"tokenized_text":["a"],"ner":[[0,0,"  "]]}'
        with pytest.raises(ParseError, match="empty label"):
            parse_jsonl_spans(io.StringIO(line))


CONLL_SIMPLE = """John B-person
works O

New B-location
York I-location
"""


class TestParseConll:
    def test_single_token_span(self):
        parsed = parse_conll(io.StringIO(CONLL_SIMPLE))
        assert parsed.sentences[0].entities == (Span(0, 0, "person"),)
        assert parsed.source_format == CONLL_BIO

    def test_multi_token_span(self):
        parsed = parse_conll(io.StringIO(CONLL_SIMPLE))
        assert parsed.sentences[1].entities == (Span(0, 1, "location"),)

    def test_orphan_continuation_repaired(self):
        parsed = parse_conll(io.StringIO("York I-location\n"))
        assert parsed.sentences[0].entities == (Span(0, 0, "location"),)
        assert parsed.bio_repairs == 1

    def test_type_switch_inside_span_repairs(self):
        text = "a B-person\nb I-place\n"
        parsed = parse_conll(io.StringIO(text))
        assert parsed.sentences[0].entities == (Span(0, 0, "person"), Span(1, 1, "place"))
        assert parsed.bio_repairs == 1

    def test_docstart_skipped(self):
        text = "-DOCSTART- O\n\nJohn B-person\n"
        parsed = parse_conll(io.StringIO(text))
        assert len(parsed.sentences) == 1

    def test_tag_taken_from_last_column(self):
        text = "John NNP B-person\n"
        parsed = parse_conll(io.StringIO(text))
        assert parsed.sentences[0].entities == (Span(0, 0, "person"),)

    def test_bad_tag(self):
        with pytest.raises(ParseError, match="not a BIO tag"):
            parse_conll(io.StringIO("John X-person\n"))

    def test_single_column_line(self):
        with pytest.raises(ParseError, match="token and tag"):
            parse_conll(io.StringIO("John\n"))

    def test_adjacent_spans_b_after_b(self):
        text = "a B-x\nb B-x\n"
        parsed = parse_conll(io.StringIO(text))
        assert parsed.sentences[0].entities == (Span(0, 0, "x"), Span(1, 1, "x"))


class TestRoundTrip:
    def test_conll_round_trip(self):
        parsed = parse_conll(io.StringIO(CONLL_SIMPLE))
        buffer = io.StringIO()
        write_conll(parsed, buffer)
        again = parse_conll(io.StringIO(buffer.getvalue()))
        assert again == parsed

    def test_jsonl_round_trip(self):
        lines = [
            '{"tokenized_text":["a","b"],"ner":[[0,1,"Person"]]}',
            '{"tokenized_text":["c"],"ner":[]}',
        ]
        parsed = parse_jsonl_spans(io.StringIO("\n".join(lines)))
        buffer = io.StringIO()
        write_jsonl_spans(parsed, buffer)
        assert parse_jsonl_spans(io.StringIO(buffer.getvalue())) == parsed

    def test_write_corpus_dispatches_on_source_format(self):
        parsed = parse_conll(io.StringIO(CONLL_SIMPLE))
        buffer = io.StringIO()
        write_corpus(parsed, buffer)
        assert "B-person" in buffer.getvalue()

    def test_write_conll_rejects_overlap(self):
        sentence = Sentence(tokens=("a", "b"), entities=(Span(0, 1, "x"), Span(1, 1, "y")))
        overlapping = Corpus(sentences=(sentence,), source_format=CONLL_BIO)
        with pytest.raises(ValueError, match="overlapping"):
            write_conll(overlapping, io.StringIO())


class TestLabelStats:
    def test_counts_and_total(self):
        line = '{"tokenized_text":["a","b","c"],"ner":[[0,0,"person"],[1,1,"person"],[2,2,"place"]]}'
        stats = label_stats(parse_jsonl_spans(io.StringIO(line)))
        assert stats.counts == {"person": 2, "place": 1}
        assert stats.total_mentions == 3

    def test_empty_corpus(self):
        stats = label_stats(parse_jsonl_spans(io.StringIO("")))
        assert stats.counts == {}
        assert stats.total_mentions == 0

    def test_large_synthetic_corpus_matches_scan_oracle(self):
        # independent count kept while generating the file
        rng = np.random.default_rng(2024)
        labels = [f"type {i}" for i in range(40)]
        expected: dict[str, int] = {}
        lines = []
        for _ in range(10_000):
            n_tokens = int(rng.integers(1, 6))
            n_spans = int(rng.integers(0, 3))
            spans = []
            for _ in range(n_spans):
                start = int(rng.integers(0, n_tokens))
                label = labels[int(rng.integers(0, len(labels)))]
                spans.append([start, start, label])
                expected[label] = expected.get(label, 0) + 1
            lines.append(json.dumps({"tokenized_text": ["w"] * n_tokens, "ner": spans}))
        stats = label_stats(parse_jsonl_spans(io.StringIO("\n".join(lines))))
        assert stats.counts == expected
        assert stats.total_mentions == sum(expected.values())

    def test_merge(self):
        a = LabelStats.from_counts({"x": 1, "y": 2})
        b = LabelStats.from_counts({"y": 3})
        merged = merge_label_stats([a, b])
        assert merged.counts == {"x": 1, "y": 5}
        assert merged.total_mentions == 6

    def test_from_counts_validation(self):
        with pytest.raises(ValueError):
            LabelStats.from_counts({"x": 0})
        with pytest.raises(ValueError):
            LabelStats.from_counts({"": 3})

    def test_fingerprint_is_key_order_independent(self):
        a = LabelStats.from_counts({"x": 1, "y": 2})
        b = LabelStats.from_counts({"y": 2, "x": 1})
        assert a.fingerprint() == b.fingerprint()
        assert a.fingerprint() != LabelStats.from_counts({"x": 1, "y": 3}).fingerprint()


class TestStatsJson:
    def test_round_trip(self):
        stats = LabelStats.from_counts({"b": 2, "a": 5})
        again = label_stats_from_json(label_stats_to_json(stats))
        assert again.counts == stats.counts

    def test_keys_sorted(self):
        payload = label_stats_to_json(LabelStats.from_counts({"b": 2, "a": 5}))
        assert list(payload["labels"]) == ["a", "b"]

    def test_spellings_merge_on_load(self):
        loaded = label_stats_from_json({"labels": {"Person": 2, "person": 3}})
        assert loaded.counts == {"person": 5}

    def test_bad_count(self):
        with pytest.raises(ParseError, match="positive integer"):
            label_stats_from_json({"labels": {"x": 0}})

    def test_missing_labels_key(self):
        with pytest.raises(ParseError, match='"labels"'):
            load_label_stats(io.StringIO('{"counts": {}}'))

    def test_malformed_json(self):
        with pytest.raises(ParseError, match="malformed JSON"):
            load_label_stats(io.StringIO("{"))


class TestEvalLabelSet:
    def test_union_invariant_enforced(self):
        with pytest.raises(ValueError, match="union"):
            EvalLabelSet(labels=("a",), per_benchmark={"b1": ("a", "b")})

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            EvalLabelSet(labels=("a", "a"))

    def test_from_benchmarks_first_seen_order(self):
        labels = EvalLabelSet.from_benchmarks({"b1": ["x", "y"], "b2": ["y", "z"]})
        assert labels.labels == ("x", "y", "z")
        assert labels.per_benchmark == {"b1": ("x", "y"), "b2": ("y", "z")}

    def test_load_text_lines(self):
        loaded = load_eval_labels(io.StringIO("Person\n\nplace\nperson\n"))
        assert loaded.labels == ("person", "place")

    def test_load_labels_json(self):
        loaded = load_eval_labels(io.StringIO('{"labels": ["A", "b"]}'))
        assert loaded.labels == ("a", "b")

    def test_load_per_benchmark_json(self):
        text = '{"per_benchmark": {"b1": ["x"], "b2": ["x", "Y"]}}'
        loaded = load_eval_labels(io.StringIO(text))
        assert loaded.labels == ("x", "y")
        assert loaded.per_benchmark["b2"] == ("x", "y")

    def test_load_empty_errors(self):
        with pytest.raises(ParseError, match="no evaluation labels"):
            load_eval_labels(io.StringIO("  \n"))

    def test_load_unknown_json_shape(self):
        with pytest.raises(ParseError, match="per_benchmark"):
            load_eval_labels(io.StringIO('{"stuff": 1}'))

    def test_eval_labels_from_corpus_order(self):
        lines = [
            '{"tokenized_text":["a"],"ner":[[0,0,"zeta"]]}',
            '{"tokenized_text":["b"],"ner":[[0,0,"alpha"],[0,0,"zeta"]]}',
        ]
        parsed = parse_jsonl_spans(io.StringIO("\n".join(lines)))
        assert eval_labels_from_corpus(parsed) == ["zeta", "alpha"]
