"""Plain-text corpus handling: sentence split, tokenize, split into sets.

The sentence splitter is rule-based: a sentence ends at ``.``, ``!`` or
``?`` when followed by whitespace and a capital letter, or by the end
of a line, unless the word containing the terminator is on the
abbreviation guard list.  The tokenizer splits on whitespace and then
detaches trailing ``. , ! ? ; :`` characters into their own tokens.
Both are deliberately simple so that runs are reproducible; swap the
guard list via a config file when the domain needs it.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

DEFAULT_GUARDS = (
    "e.g.", "i.e.", "etc.", "cf.", "vs.", "al.", "ca.",
    "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "St.",
    "Fig.", "Figs.", "Eq.", "Eqs.", "Sec.", "Ref.", "Refs.",
    "No.", "Vol.", "pp.",
)

_TERMINATORS = ".!?"
_DETACH = ".,!?;:"

SPLIT_NAMES = ("train", "dev", "test")


class RatioSumInvalid(ValueError):
    """Split ratios do not sum to 1."""


def load_guard_list(path) -> tuple[str, ...]:
    """Read one guard per line; blank lines and # comments are skipped."""
    guards = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            guards.append(line)
    return tuple(guards)


def _guarded(text: str, dot: int, guards: frozenset[str]) -> bool:
    start = dot
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:dot + 1].lstrip("([{'\"")
    return word.lower() in guards


def split_sentences(text: str, guards: Sequence[str] = DEFAULT_GUARDS) -> list[str]:
    """Deterministic rule-based sentence segmentation."""
    guard_set = frozenset(g.lower() for g in guards)
    sentences: list[str] = []
    begin = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINATORS:
            # absorb a run like "?!" or "..."
            while i + 1 < n and text[i + 1] in _TERMINATORS:
                i += 1
            j = i + 1
            while j < n and text[j] in (" ", "\t"):
                j += 1
            at_eol = j >= n or text[j] == "\n"
            capital_next = j > i + 1 and j < n and text[j].isupper()
            if (at_eol or capital_next) and not _guarded(text, i, guard_set):
                chunk = text[begin:i + 1].strip()
                if chunk:
                    sentences.append(chunk)
                begin = i + 1
        i += 1
    tail = text[begin:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def tokenize(sentence: str) -> list[str]:
    """Whitespace tokens with trailing punctuation detached."""
    tokens: list[str] = []
    for chunk in sentence.split():
        detached: list[str] = []
        while len(chunk) > 1 and chunk[-1] in _DETACH:
            detached.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.append(chunk)
        tokens.extend(reversed(detached))
    return tokens


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: str
    text: str
    tokens: tuple[str, ...]


def make_sentence_id(corpus: str, doc_index: int, sent_index: int) -> str:
    return f"{corpus}:{doc_index:06d}:{sent_index:04d}"


def iter_documents(path, mode: str) -> Iterator[tuple[int, str]]:
    """Documents from a directory of .txt files or a one-per-line file."""
    root = Path(path)
    if mode == "dir":
        if not root.is_dir():
            raise FileNotFoundError(f"not a directory: {root}")
        for index, name in enumerate(sorted(root.glob("*.txt"))):
            yield index, name.read_text(encoding="utf-8")
    elif mode == "lines":
        with open(root, encoding="utf-8") as handle:
            index = 0
            for line in handle:
                line = line.strip()
                if line:
                    yield index, line
                    index += 1
    else:
        raise ValueError(f"unknown input mode: {mode!r}")


def iter_sentence_records(
    path,
    mode: str,
    corpus_name: str | None = None,
    guards: Sequence[str] = DEFAULT_GUARDS,
) -> Iterator[SentenceRecord]:
    name = corpus_name if corpus_name is not None else Path(path).stem
    for doc_index, document in iter_documents(path, mode):
        for sent_index, sentence in enumerate(split_sentences(document, guards)):
            yield SentenceRecord(
                sentence_id=make_sentence_id(name, doc_index, sent_index),
                text=sentence,
                tokens=tuple(tokenize(sentence)),
            )


def _check_ratios(ratios: Sequence[float]) -> None:
    if any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be positive, got {tuple(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise RatioSumInvalid(f"ratios sum to {sum(ratios)!r}, expected 1")


def _split_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    # floor each share, leftover rows go to train
    sizes = [int(n * r) for r in ratios]
    sizes[0] += n - sum(sizes)
    return sizes


def assign_splits(n: int, ratios: Sequence[float], seed: int) -> list[int]:
    """Split index (0=train, 1=dev, 2=test) per record position.

    Matches partition(): shuffle positions with the seed, then cut the
    shuffled order into contiguous train/dev/test slices.
    """
    _check_ratios(ratios)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    sizes = _split_sizes(n, ratios)
    assignment = [0] * n
    at = 0
    for split_index, size in enumerate(sizes):
        for position in order[at:at + size]:
            assignment[position] = split_index
        at += size
    return assignment


def partition(
    records: Sequence, ratios: Sequence[float], seed: int
) -> tuple[list, list, list]:
    """Deterministic shuffle then contiguous train/dev/test slices."""
    _check_ratios(ratios)
    shuffled = list(records)
    random.Random(seed).shuffle(shuffled)
    sizes = _split_sizes(len(shuffled), ratios)
    train = shuffled[:sizes[0]]
    dev = shuffled[sizes[0]:sizes[0] + sizes[1]]
    test = shuffled[sizes[0] + sizes[1]:]
    return train, dev, test


@dataclass(frozen=True)
class DatasetStats:
    counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def compute_stats(splits: Mapping[str, Sequence]) -> DatasetStats:
    return DatasetStats({name: len(records) for name, records in splits.items()})


def format_stats_table(
    rows: Sequence[tuple[str, DatasetStats]],
    split_names: Sequence[str] = SPLIT_NAMES,
) -> str:
    """Aligned table, one dataset per row, one column per split."""
    header = ["Dataset"] + [name.capitalize() for name in split_names]
    body = [
        [name] + [str(stats.counts.get(split, 0)) for split in split_names]
        for name, stats in rows
    ]
    widths = [
        max(len(line[col]) for line in [header] + body)
        for col in range(len(header))
    ]
    lines = []
    for line in [header] + body:
        cells = [line[0].ljust(widths[0])]
        cells += [cell.rjust(width) for cell, width in zip(line[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)
