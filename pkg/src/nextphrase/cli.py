"""Command line entry points.

    nextphrase build-npp TREES --out DIR [--seed N] [--min-group-size K]
    nextphrase build-nsp CORPUS --out DIR [--distractors N]
    nextphrase build-pairs CORPUS --out DIR [--ratios 0.8,0.1,0.1]
    nextphrase evaluate --candidates FILE --references FILE --report FILE
    nextphrase stats INPUT [INPUT ...]
    nextphrase debug-phrases TREES

Every build run writes its outputs plus ``stats.json`` and
``manifest.json`` (config snapshot, input digests, counts, skip
histogram) into ``--out``.  Re-running with the same config and inputs
reproduces every output byte for byte; only the manifest timestamp
moves.  Exit codes: 0 ok, 1 usage or config error, 2 input I/O error,
3 data contract violation (malformed tree, mismatched eval files).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import functools
import hashlib
import json
import logging
import os
import random
import sys
from dataclasses import asdict, dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import __version__
from .corpus import (
    DEFAULT_GUARDS,
    DatasetStats,
    RatioSumInvalid,
    SentenceRecord,
    assign_splits,
    detokenize,
    format_stats_table,
    iter_documents,
    iter_sentence_records,
    load_guard_list,
    make_sentence_id,
    split_sentences,
)
from .instances import (
    MoreChoicesThanLetters,
    Skip,
    TEMPLATES,
    build_completion_pairs,
    build_npp_instance,
    build_nsp_instance,
    record_rng,
    serialize_npp,
    serialize_nsp,
)
from .metrics import (
    CountMismatch,
    SingleSegmentCorpus,
    evaluate,
    load_segments,
    render_report,
    report_to_json,
)
from .phrases import extract_phrases
from .treebank import TreebankError, parse_ptb, read_treebank

log = logging.getLogger("nextphrase")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    min_group_size: int = 2
    distractors: int = 1
    ratios: tuple[float, ...] = (0.8, 0.1, 0.1)
    template: str = "lettered"
    input_mode: str = "lines"
    guard_list: str | None = None
    sample: int | None = None
    workers: int = 1
    pool_cap: int = 10000


def load_config_file(path) -> dict[str, str]:
    """key=value lines; blank lines and # comments allowed."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _parse_ratios(text: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"bad ratios: {text!r}") from None
    if len(parts) != 3:
        raise UsageError(f"need three ratios, got {text!r}")
    return parts


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """CLI flag beats config file beats default."""
    file_cfg: dict[str, str] = {}
    if getattr(args, "config", None):
        file_cfg = load_config_file(args.config)
    known = set(PipelineConfig.__dataclass_fields__)
    for key in file_cfg:
        if key not in known:
            raise UsageError(f"unknown config key: {key!r}")

    def pick(key: str, cast, default):
        flag = getattr(args, key, None)
        if flag is not None:
            return flag
        if key in file_cfg:
            try:
                return cast(file_cfg[key])
            except ValueError:
                raise UsageError(
                    f"bad config value for {key}: {file_cfg[key]!r}"
                ) from None
        return default

    config = PipelineConfig(
        seed=pick("seed", int, 0),
        min_group_size=pick("min_group_size", int, 2),
        distractors=pick("distractors", int, 1),
        ratios=pick("ratios", _parse_ratios, (0.8, 0.1, 0.1)),
        template=pick("template", str, "lettered"),
        input_mode=pick("input_mode", str, "lines"),
        guard_list=pick("guard_list", str, None),
        sample=pick("sample", int, None),
        workers=pick("workers", int, 1),
        pool_cap=pick("pool_cap", int, 10000),
    )
    if config.template not in TEMPLATES:
        raise UsageError(f"unknown template: {config.template!r}")
    if config.workers < 1:
        raise UsageError("workers must be >= 1")
    if config.min_group_size < 1:
        raise UsageError("min-group-size must be >= 1")
    return config


def _guards(config: PipelineConfig) -> tuple[str, ...]:
    if config.guard_list:
        return load_guard_list(config.guard_list)
    return DEFAULT_GUARDS


# ------------------------------------------------------------ plumbing


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def input_digests(path, mode: str) -> dict[str, str]:
    root = Path(path)
    if mode == "dir":
        return {str(p): file_sha256(p) for p in sorted(root.glob("*.txt"))}
    return {str(root): file_sha256(root)}


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.parent / (path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    os.replace(tmp, path)


def write_manifest(
    out_dir: Path,
    command: str,
    config: PipelineConfig,
    digests: dict[str, str],
    counts: dict,
) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": asdict(config),
        "inputs": digests,
        "counts": counts,
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    atomic_write_text(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def write_stats(out_dir: Path, stats: dict) -> None:
    atomic_write_text(out_dir / "stats.json", json.dumps(stats, indent=2) + "\n")


def _map_records(fn, items: Iterable, workers: int) -> Iterator:
    """Apply fn to each item, in order; fan out when workers > 1."""
    if workers <= 1:
        for item in items:
            yield fn(item)
        return
    with Pool(workers) as pool:
        yield from pool.imap(fn, items, chunksize=32)


def _iter_tree_lines(path) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as handle:
        for index, line in enumerate(handle):
            if line.strip():
                yield index, line


def _reservoir(items: Iterable, k: int, rng: random.Random) -> list:
    chosen: list = []
    for seen, item in enumerate(items):
        if seen < k:
            chosen.append(item)
        else:
            slot = rng.randrange(seen + 1)
            if slot < k:
                chosen[slot] = item
    return chosen


def _sentence_records(
    path, mode: str, name: str, guards: Sequence[str]
) -> Iterator[SentenceRecord]:
    if mode == "treebank":
        for line_index, tree in read_treebank(path):
            yield SentenceRecord(
                sentence_id=f"{name}:{line_index:08d}",
                text=detokenize(tree.tokens),
                tokens=tree.tokens,
            )
    else:
        yield from iter_sentence_records(path, mode, name, guards)


# ---------------------------------------------------------- subcommands


def _npp_record(
    item: tuple[int, str], seed: int, min_size: int, name: str
) -> tuple[str, str]:
    line_index, line = item
    sentence_id = f"{name}:{line_index:08d}"
    try:
        tree = parse_ptb(line)
    except TreebankError as exc:
        raise type(exc)(f"line {line_index + 1}: {exc}") from None
    groups = extract_phrases(tree)
    rng = record_rng(seed, sentence_id)
    built = build_npp_instance(tree, groups, rng, sentence_id, min_size)
    if isinstance(built, Skip):
        return "skip", built.reason.value
    prompt, target = serialize_npp(built)
    record = {"id": sentence_id, "input": prompt, "target": target}
    return "ok", json.dumps(record, ensure_ascii=False)


def cmd_build_npp(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = Path(args.input).stem
    counts: dict = {"sentences_read": 0, "instances_written": 0, "skips": {}}
    items: Iterable[tuple[int, str]] = _iter_tree_lines(args.input)
    if config.sample is not None:
        scanned = 0

        def counting(source):
            nonlocal scanned
            for entry in source:
                scanned += 1
                yield entry

        picked = _reservoir(counting(items), config.sample, random.Random(config.seed))
        picked.sort(key=lambda entry: entry[0])
        items = picked
        counts["sentences_scanned"] = scanned
    worker = functools.partial(
        _npp_record, seed=config.seed, min_size=config.min_group_size, name=name
    )
    tmp = out_dir / "instances.jsonl.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as sink:
        for kind, payload in _map_records(worker, items, config.workers):
            counts["sentences_read"] += 1
            if kind == "skip":
                counts["skips"][payload] = counts["skips"].get(payload, 0) + 1
            else:
                sink.write(payload + "\n")
                counts["instances_written"] += 1
    os.replace(tmp, out_dir / "instances.jsonl")
    write_stats(out_dir, counts)
    write_manifest(out_dir, "build-npp", config, input_digests(args.input, "file"), counts)
    log.info(
        "build-npp: %d sentences -> %d instances (%d skipped)",
        counts["sentences_read"],
        counts["instances_written"],
        sum(counts["skips"].values()),
    )
    return EXIT_OK


def _pairs_record(item: tuple[int, SentenceRecord]) -> tuple[int, list[str]]:
    index, record = item
    lines = [
        json.dumps(
            {
                "id": f"{pair.sentence_id}#{pair.split_point}",
                "p": detokenize(pair.p),
                "q": detokenize(pair.q),
            },
            ensure_ascii=False,
        )
        for pair in build_completion_pairs(record.tokens, record.sentence_id)
    ]
    return index, lines


def cmd_build_pairs(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = args.name or Path(args.input).stem
    guards = _guards(config)

    total = sum(1 for _ in _sentence_records(args.input, config.input_mode, name, guards))
    assignment = assign_splits(total, config.ratios, config.seed)
    split_names = ("train", "dev", "test")
    sentence_counts = {split: 0 for split in split_names}
    pair_counts = {split: 0 for split in split_names}
    sinks = {}
    tmp_paths = {}
    try:
        for split in split_names:
            tmp_paths[split] = out_dir / f"pairs_{split}.jsonl.tmp"
            sinks[split] = open(tmp_paths[split], "w", encoding="utf-8", newline="\n")
        records = enumerate(_sentence_records(args.input, config.input_mode, name, guards))
        for index, lines in _map_records(_pairs_record, records, config.workers):
            split = split_names[assignment[index]]
            sentence_counts[split] += 1
            for line in lines:
                sinks[split].write(line + "\n")
            pair_counts[split] += len(lines)
    finally:
        for handle in sinks.values():
            handle.close()
    for split in split_names:
        os.replace(tmp_paths[split], out_dir / f"pairs_{split}.jsonl")

    row = DatasetStats(sentence_counts)
    print(format_stats_table([(name, row)]))
    counts = {
        "sentences_read": total,
        "pairs_written": sum(pair_counts.values()),
        "sentences": sentence_counts,
        "pairs": pair_counts,
    }
    write_stats(out_dir, {"dataset": name, **counts, "total_sentences": row.total})
    write_manifest(
        out_dir, "build-pairs", config, input_digests(args.input, config.input_mode), counts
    )
    log.info("build-pairs: %d sentences -> %d pairs", total, counts["pairs_written"])
    return EXIT_OK


def cmd_build_nsp(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if config.distractors < 1:
        raise UsageError("distractors must be >= 1")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = Path(args.input).stem
    guards = _guards(config)
    if config.input_mode not in ("lines", "dir"):
        raise UsageError("build-nsp reads raw text (input mode lines or dir)")

    def doc_sentences() -> Iterator[tuple[int, list[str]]]:
        for doc_index, document in iter_documents(args.input, config.input_mode):
            yield doc_index, split_sentences(document, guards)

    pool_rng = random.Random(config.seed)
    pool = _reservoir(
        (
            (doc_index, sentence)
            for doc_index, sentences in doc_sentences()
            for sentence in sentences
        ),
        config.pool_cap,
        pool_rng,
    )

    counts: dict = {"contexts_read": 0, "instances_written": 0, "skips": {}}
    tmp = out_dir / "instances.jsonl.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as sink:
        for doc_index, sentences in doc_sentences():
            others = [s for d, s in pool if d != doc_index]
            for position in range(len(sentences) - 1):
                counts["contexts_read"] += 1
                sentence_id = make_sentence_id(name, doc_index, position)
                built = build_nsp_instance(
                    sentences,
                    position,
                    others,
                    record_rng(config.seed, sentence_id),
                    sentence_id,
                    config.distractors,
                )
                if isinstance(built, Skip):
                    key = built.reason.value
                    counts["skips"][key] = counts["skips"].get(key, 0) + 1
                    continue
                prompt, target = serialize_nsp(built)
                record = {"id": sentence_id, "input": prompt, "target": target}
                sink.write(json.dumps(record, ensure_ascii=False) + "\n")
                counts["instances_written"] += 1
    os.replace(tmp, out_dir / "instances.jsonl")
    write_stats(out_dir, counts)
    write_manifest(
        out_dir, "build-nsp", config, input_digests(args.input, config.input_mode), counts
    )
    log.info(
        "build-nsp: %d contexts -> %d instances (%d skipped)",
        counts["contexts_read"],
        counts["instances_written"],
        sum(counts["skips"].values()),
    )
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    segments = load_segments(args.candidates, args.references)
    report = evaluate(segments)
    text = render_report(report)
    print(text)
    report_path = Path(args.report)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(report_path, text + "\n")
    atomic_write_text(
        report_path.with_name(report_path.name + ".json"), report_to_json(report)
    )
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    guards = _guards(config)
    rows = []
    for path in args.inputs:
        name = Path(path).stem
        total = sum(1 for _ in _sentence_records(path, config.input_mode, name, guards))
        assignment = assign_splits(total, config.ratios, config.seed)
        counts = {
            "train": assignment.count(0),
            "dev": assignment.count(1),
            "test": assignment.count(2),
        }
        rows.append((name, DatasetStats(counts)))
    print(format_stats_table(rows))
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = {
            name: {"counts": dict(stats.counts), "total": stats.total}
            for name, stats in rows
        }
        write_stats(out_dir, payload)
    return EXIT_OK


def cmd_debug_phrases(args: argparse.Namespace) -> int:
    for _, tree in read_treebank(args.input):
        groups = extract_phrases(tree)
        for kind, spans in groups.items():
            for span in spans:
                print(f"{kind}\t{span.start}\t{span.end}\t{span.text}")
    return EXIT_OK


# --------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1, not argparse's default 2
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    parser.add_argument("--seed", type=int, help="global random seed (default 0)")
    parser.add_argument("--workers", type=int, help="parallel workers (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nextphrase", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-npp", help="next-phrase instances from a treebank")
    p.add_argument("input", help="bracketed trees, one per line")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--min-group-size", dest="min_group_size", type=int)
    p.add_argument("--template", choices=TEMPLATES)
    p.add_argument("--sample", type=int, metavar="N", help="keep N random sentences")
    _add_common(p)
    p.set_defaults(func=cmd_build_npp)

    p = sub.add_parser("build-nsp", help="next-sentence instances from raw text")
    p.add_argument("input")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--distractors", type=int, metavar="N")
    p.add_argument("--input-mode", dest="input_mode", choices=("lines", "dir"))
    p.add_argument("--pool-cap", dest="pool_cap", type=int)
    p.add_argument("--guard-list", dest="guard_list", metavar="FILE")
    p.add_argument("--template", choices=TEMPLATES)
    _add_common(p)
    p.set_defaults(func=cmd_build_nsp)

    p = sub.add_parser("build-pairs", help="prefix/remainder pairs, three-way split")
    p.add_argument("input")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--ratios", type=_parse_ratios, metavar="A,B,C")
    p.add_argument("--input-mode", dest="input_mode", choices=("lines", "dir", "treebank"))
    p.add_argument("--guard-list", dest="guard_list", metavar="FILE")
    p.add_argument("--name", help="dataset name for the stats table")
    _add_common(p)
    p.set_defaults(func=cmd_build_pairs)

    p = sub.add_parser("evaluate", help="score candidates against references")
    p.add_argument("--candidates", required=True, metavar="FILE")
    p.add_argument("--references", required=True, metavar="FILE")
    p.add_argument("--report", required=True, metavar="FILE")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="split-size table for one or more corpora")
    p.add_argument("inputs", nargs="+", metavar="INPUT")
    p.add_argument("--ratios", type=_parse_ratios, metavar="A,B,C")
    p.add_argument("--input-mode", dest="input_mode", choices=("lines", "dir", "treebank"))
    p.add_argument("--guard-list", dest="guard_list", metavar="FILE")
    p.add_argument("--out", metavar="DIR", help="also write stats.json here")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("debug-phrases", help="dump extracted phrases as TSV")
    p.add_argument("input", help="bracketed trees, one per line")
    p.set_defaults(func=cmd_debug_phrases)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, RatioSumInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TreebankError, CountMismatch, SingleSegmentCorpus, MoreChoicesThanLetters) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
