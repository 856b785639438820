import random

import pytest
from hypothesis import given, strategies as st

from nextphrase.corpus import (
    DatasetStats,
    RatioSumInvalid,
    assign_splits,
    compute_stats,
    detokenize,
    format_stats_table,
    iter_documents,
    iter_sentence_records,
    load_guard_list,
    partition,
    split_sentences,
    tokenize,
)


def test_split_on_terminator_before_capital():
    assert split_sentences("The sky is blue. It rains.") == [
        "The sky is blue.",
        "It rains.",
    ]


def test_guard_blocks_abbreviations():
    assert split_sentences("Dr. Smith arrived. He sat down.") == [
        "Dr. Smith arrived.",
        "He sat down.",
    ]
    assert split_sentences("See Fig. 2. It works.") == ["See Fig. 2.", "It works."]
    assert split_sentences("We use e.g. Apples and pears.") == [
        "We use e.g. Apples and pears."
    ]


def test_no_split_before_lowercase():
    text = "the server failed. retry was scheduled"
    assert split_sentences(text) == [text]


def test_split_at_end_of_line():
    assert split_sentences("It rains.\nbut it stays warm.") == [
        "It rains.",
        "but it stays warm.",
    ]


def test_single_sentence_stays_whole():
    text = "Building large OCR databases is a time consuming and tedious work."
    assert split_sentences(text) == [text]


def test_question_and_exclamation():
    assert split_sentences("Really? Yes! Fine.") == ["Really?", "Yes!", "Fine."]


def test_blank_input():
    assert split_sentences("") == []
    assert split_sentences("   \n ") == []


def test_custom_guard_list(tmp_path):
    path = tmp_path / "guards.txt"
    path.write_text("# comment\nfoo.\n\nbar.\n", encoding="utf-8")
    guards = load_guard_list(path)
    assert guards == ("foo.", "bar.")
    assert split_sentences("Take foo. Then stop.", guards) == ["Take foo. Then stop."]
    assert split_sentences("Take Dr. Who away.", guards) == [
        "Take Dr.",
        "Who away.",
    ]


def test_tokenize_detaches_terminal_punctuation():
    assert tokenize("eat pie.") == ["eat", "pie", "."]
    assert tokenize("However, we left!") == ["However", ",", "we", "left", "!"]
    assert tokenize("so: this; that?") == ["so", ":", "this", ";", "that", "?"]


def test_tokenize_keeps_internal_punctuation():
    assert tokenize("3.14 is pi") == ["3.14", "is", "pi"]
    assert tokenize("e.g. this") == ["e.g", ".", "this"]


def test_tokenize_lone_punctuation():
    assert tokenize(".") == ["."]
    assert tokenize("wait...") == ["wait", ".", ".", "."]


@given(
    st.lists(
        st.text(
            alphabet=st.characters(
                whitelist_categories=("Ll", "Lu", "Nd"), max_codepoint=0x7F
            ),
            min_size=1,
            max_size=8,
        ),
        min_size=1,
        max_size=20,
    )
)
def test_tokenize_detokenize_round_trip(tokens):
    assert tokenize(detokenize(tokens)) == tokens


def test_partition_sizes_floor_remainder_to_train():
    records = list(range(10))
    train, dev, test = partition(records, (0.8, 0.1, 0.1), seed=0)
    assert (len(train), len(dev), len(test)) == (8, 1, 1)
    assert sorted(train + dev + test) == records


def test_partition_remainder_goes_to_train():
    train, dev, test = partition(list(range(6)), (0.8, 0.1, 0.1), seed=3)
    assert (len(train), len(dev), len(test)) == (6, 0, 0)


def test_partition_deterministic():
    records = list(range(50))
    first = partition(records, (0.8, 0.1, 0.1), seed=9)
    second = partition(records, (0.8, 0.1, 0.1), seed=9)
    assert first == second
    other = partition(records, (0.8, 0.1, 0.1), seed=10)
    assert first != other


def test_partition_close_to_exact_products():
    n = 1000
    train, dev, test = partition(list(range(n)), (0.8, 0.1, 0.1), seed=1)
    for size, ratio in zip((len(train), len(dev), len(test)), (0.8, 0.1, 0.1)):
        assert abs(size - n * ratio) < 1


def test_partition_rejects_bad_ratios():
    with pytest.raises(RatioSumInvalid):
        partition([1, 2, 3], (0.5, 0.2, 0.2), seed=0)
    with pytest.raises(ValueError):
        partition([1, 2, 3], (1.2, -0.1, -0.1), seed=0)
    partition([1, 2, 3], (0.8, 0.1, 0.1 + 1e-12), seed=0)


def test_assign_splits_agrees_with_partition():
    records = list(range(37))
    ratios = (0.6, 0.2, 0.2)
    train, dev, test = partition(records, ratios, seed=4)
    assignment = assign_splits(len(records), ratios, seed=4)
    by_split = {0: set(), 1: set(), 2: set()}
    for record, split in zip(records, assignment):
        by_split[split].add(record)
    assert by_split[0] == set(train)
    assert by_split[1] == set(dev)
    assert by_split[2] == set(test)


def test_compute_stats_totals():
    stats = compute_stats({"train": range(8), "dev": range(1), "test": range(1)})
    assert stats.counts == {"train": 8, "dev": 1, "test": 1}
    assert stats.total == 10


def test_stats_table_shape():
    rows = [
        ("emails", DatasetStats({"train": 156998, "dev": 13474, "test": 15030})),
        ("reviews", DatasetStats({"train": 74010, "dev": 9283, "test": 9317})),
    ]
    table = format_stats_table(rows)
    lines = table.splitlines()
    assert len(lines) == 3
    assert lines[0].split() == ["Dataset", "Train", "Dev", "Test"]
    assert lines[1].split() == ["emails", "156998", "13474", "15030"]
    assert lines[2].split() == ["reviews", "74010", "9283", "9317"]


def test_iter_documents_dir_sorted(tmp_path):
    (tmp_path / "b.txt").write_text("Second doc.", encoding="utf-8")
    (tmp_path / "a.txt").write_text("First doc.", encoding="utf-8")
    (tmp_path / "ignored.md").write_text("nope", encoding="utf-8")
    docs = list(iter_documents(tmp_path, "dir"))
    assert docs == [(0, "First doc."), (1, "Second doc.")]


def test_iter_documents_lines(tmp_path):
    path = tmp_path / "docs.txt"
    path.write_text("One doc here.\n\nAnother doc.\n", encoding="utf-8")
    assert list(iter_documents(path, "lines")) == [
        (0, "One doc here."),
        (1, "Another doc."),
    ]
    with pytest.raises(ValueError):
        list(iter_documents(path, "paragraphs"))


def test_iter_sentence_records(tmp_path):
    path = tmp_path / "docs.txt"
    path.write_text("It rains. We hide.\nDogs bark.\n", encoding="utf-8")
    records = list(iter_sentence_records(path, "lines"))
    assert [r.sentence_id for r in records] == [
        "docs:000000:0000",
        "docs:000000:0001",
        "docs:000001:0000",
    ]
    assert records[0].tokens == ("It", "rains", ".")
    assert records[2].text == "Dogs bark."


def test_pair_recount_matches_token_lengths(tmp_path):
    from nextphrase.instances import build_completion_pairs

    path = tmp_path / "docs.txt"
    path.write_text("It rains hard. We hide.\nDogs bark.\n", encoding="utf-8")
    records = list(iter_sentence_records(path, "lines"))
    total = sum(len(build_completion_pairs(r.tokens, r.sentence_id)) for r in records)
    assert total == sum(len(r.tokens) - 1 for r in records)
