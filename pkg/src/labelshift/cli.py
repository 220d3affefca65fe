"""Command-line front end for label-shift measurement.

Subcommands:

* stats: count entity mentions per label in a corpus.
* familiarity: score evaluation labels against training statistics.
* overlap: exact string overlap between evaluation and training labels.
* split: select a training subset of controlled transfer difficulty.
* correlate: join a familiarity report with per-label F1 scores.

Every run is seed-free and deterministic: identical inputs produce
byte-identical outputs, and each output embeds the run configuration
plus sha256 fingerprints of every input file.

Exit codes: 0 success, 1 computation error, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from . import analysis, corpus, embed, metric, splits
from .errors import LabelShiftError

log = logging.getLogger(__name__)

WEIGHTING_BY_FLAG = {"zipf": "zipf", "linear": "linear_decay", "none": "unweighted"}
METHOD_BY_FLAG = {"max": splits.MAX_SIM, "entropy": splits.ENTROPY}
DIFFICULTY_BY_FLAG = {
    "low": splits.LOW_SHIFT,
    "medium": splits.MEDIUM_SHIFT,
    "high": splits.HIGH_SHIFT,
}

TOKEN_ENV = "LABELSHIFT_TOKEN"


class UsageError(Exception):
    """Bad flag combination or uninferrable input; exits with code 2."""


@dataclass(frozen=True)
class RunConfig:
    """What went into a run: command, result-relevant options, input hashes."""

    command: str
    options: Mapping[str, object]
    inputs: Mapping[str, str]  # path -> sha256 of file bytes
    deterministic: bool = True  # no sampling anywhere; always true

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "options": {k: v for k, v in self.options.items() if v is not None},
            "inputs": dict(self.inputs),
            "deterministic": self.deterministic,
        }


def _read_text(path: str) -> tuple[str, str]:
    data = Path(path).read_bytes()
    return data.decode("utf-8"), hashlib.sha256(data).hexdigest()


def _write_output(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def _run_line(run: RunConfig) -> str:
    """One-line form for embedding into CSV output as a comment."""
    return "# run " + json.dumps(
        run.to_json(), ensure_ascii=False, sort_keys=True, separators=(",", ":")
    )


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {raw}")
    return value


def _positive_float(raw: str) -> float:
    value = float(raw)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {raw}")
    return value


def _infer_corpus_format(path: str, flag: str) -> str:
    if flag != "auto":
        return flag
    suffix = Path(path).suffix.lower()
    if suffix == ".jsonl":
        return "jsonl"
    if suffix in (".conll", ".bio", ".iob"):
        return "conll"
    if suffix == ".json":
        return "stats"
    raise UsageError(f"cannot infer format of {path!r}; pass --format")


def _load_train(args, fingerprints: dict[str, str]) -> tuple[corpus.LabelStats, corpus.Corpus | None, str]:
    """Read the training-label source: a corpus or a label-stats file."""
    text, digest = _read_text(args.input)
    fingerprints[args.input] = digest
    fmt = _infer_corpus_format(args.input, args.format)
    if fmt == "jsonl":
        parsed = corpus.parse_jsonl_spans(
            io.StringIO(text),
            token_field=args.token_field,
            entity_field=args.entity_field,
            normalize=args.normalize,
            source=args.input,
        )
        return corpus.label_stats(parsed), parsed, fmt
    if fmt == "conll":
        parsed = corpus.parse_conll(io.StringIO(text), normalize=args.normalize, source=args.input)
        return corpus.label_stats(parsed), parsed, fmt
    stats = corpus.load_label_stats(io.StringIO(text), normalize=args.normalize, source=args.input)
    return stats, None, fmt


def _load_eval(args, fingerprints: dict[str, str]) -> corpus.EvalLabelSet:
    """Read evaluation labels from one file per benchmark.

    Text files hold one label per line; JSON files hold {"labels": [...]}
    or {"per_benchmark": {...}}; corpus files contribute their distinct
    entity labels. Benchmark names default to the file stem.
    """
    per_benchmark: dict[str, tuple[str, ...]] = {}

    def add(name: str, labels) -> None:
        if name in per_benchmark:
            raise UsageError(f"duplicate benchmark name {name!r} across --eval-labels files")
        per_benchmark[name] = tuple(labels)

    for path in args.eval_labels:
        text, digest = _read_text(path)
        fingerprints[path] = digest
        stem = Path(path).stem
        suffix = Path(path).suffix.lower()
        if suffix == ".jsonl":
            parsed = corpus.parse_jsonl_spans(
                io.StringIO(text),
                token_field=getattr(args, "token_field", corpus.DEFAULT_TOKEN_FIELD),
                entity_field=getattr(args, "entity_field", corpus.DEFAULT_ENTITY_FIELD),
                normalize=args.normalize,
                source=path,
            )
            add(stem, corpus.eval_labels_from_corpus(parsed))
        elif suffix in (".conll", ".bio", ".iob"):
            parsed = corpus.parse_conll(io.StringIO(text), normalize=args.normalize, source=path)
            add(stem, corpus.eval_labels_from_corpus(parsed))
        else:
            loaded = corpus.load_eval_labels(io.StringIO(text), normalize=args.normalize, source=path)
            if loaded.per_benchmark:
                for name, labels in loaded.per_benchmark.items():
                    add(name, labels)
            else:
                add(stem, loaded.labels)
    return corpus.EvalLabelSet.from_benchmarks(per_benchmark)


def _infer_embeddings_format(path: str, flag: str, text: str) -> str:
    if flag == "tsv":
        return embed.LABELED_TSV
    if flag == "word2vec":
        return embed.WORD2VEC_TEXT
    suffix = Path(path).suffix.lower()
    if suffix == ".tsv":
        return embed.LABELED_TSV
    if suffix in (".vec", ".w2v", ".txt"):
        return embed.WORD2VEC_TEXT
    first = next((line for line in text.splitlines() if line.strip()), "")
    return embed.LABELED_TSV if "\t" in first else embed.WORD2VEC_TEXT


def _resolve_store(
    args, needed_labels: list[str], fingerprints: dict[str, str]
) -> embed.EmbeddingStore:
    if args.embeddings:
        text, digest = _read_text(args.embeddings)
        fingerprints[args.embeddings] = digest
        fmt = _infer_embeddings_format(args.embeddings, args.embeddings_format, text)
        store = embed.load_vector_file(io.StringIO(text), fmt, source=args.embeddings)
    else:
        store = embed.fetch_remote_embeddings(
            args.endpoint,
            needed_labels,
            batch_size=args.batch_size,
            auth=os.environ.get(TOKEN_ENV),
        )
    if args.save_embeddings:
        with open(args.save_embeddings, "w", encoding="utf-8") as handle:
            embed.save_labeled_tsv(store, handle)
    return store


def _needed_labels(stats: corpus.LabelStats, eval_set: corpus.EvalLabelSet) -> list[str]:
    ordered = sorted(stats.counts)
    ordered.extend(l for l in eval_set.labels if l not in stats.counts)
    return ordered


def _embedding_options(args) -> dict:
    return {
        "embeddings": args.embeddings,
        "embeddings_format": args.embeddings_format if args.embeddings else None,
        "endpoint": args.endpoint,
        "batch_size": args.batch_size if args.endpoint else None,
    }


def _sweep_path(out: str, k: int) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}.k{k}{p.suffix}"))


def _parse_sweep(raw: str) -> list[int]:
    try:
        ks = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --sweep-k value {raw!r}: {exc}") from exc
    if not ks or any(k < 1 for k in ks):
        raise UsageError(f"--sweep-k needs positive integers, got {raw!r}")
    return ks


def _parse_quantiles(raw: str) -> tuple[float, float]:
    parts = raw.split(",")
    if len(parts) != 2:
        raise UsageError(f"--quantiles needs LO,HI, got {raw!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise UsageError(f"bad --quantiles value {raw!r}: {exc}") from exc
    if not 0.0 <= lo <= hi <= 1.0:
        raise UsageError(f"--quantiles needs 0 <= LO <= HI <= 1, got {raw!r}")
    return lo, hi


def cmd_stats(args) -> None:
    fingerprints: dict[str, str] = {}
    stats, parsed, fmt = _load_train(args, fingerprints)
    run = RunConfig(
        command="stats",
        options={
            "in": args.input,
            "format": fmt,
            "normalize": args.normalize,
            "token_field": args.token_field if fmt == "jsonl" else None,
            "entity_field": args.entity_field if fmt == "jsonl" else None,
            "out": args.out,
        },
        inputs=fingerprints,
    )
    payload = corpus.label_stats_to_json(stats)
    payload["total_mentions"] = stats.total_mentions
    if parsed is not None:
        payload["sentences"] = len(parsed.sentences)
        payload["bio_repairs"] = parsed.bio_repairs
    payload["run"] = run.to_json()
    _write_output(args.out, _dump_json(payload))


def cmd_familiarity(args) -> None:
    fingerprints: dict[str, str] = {}
    stats, _, fmt = _load_train(args, fingerprints)
    eval_set = _load_eval(args, fingerprints)
    store = _resolve_store(args, _needed_labels(stats, eval_set), fingerprints)
    weighting = WEIGHTING_BY_FLAG[args.weighting]
    ks = _parse_sweep(args.sweep_k) if args.sweep_k else [args.k]
    if len(ks) > 1 and args.out == "-":
        raise UsageError("--sweep-k writes one file per K; --out must be a path")
    for k in ks:
        config = metric.FamiliarityConfig(k=k, weighting=weighting, provider_id=store.provider_id)
        report = metric.familiarity(eval_set, stats, store, config, threads=args.threads)
        out_path = _sweep_path(args.out, k) if len(ks) > 1 else args.out
        run = RunConfig(
            command="familiarity",
            options={
                "in": args.input,
                "format": fmt,
                "eval_labels": list(args.eval_labels),
                "normalize": args.normalize,
                "k": k,
                "weighting": weighting,
                "per_benchmark": args.per_benchmark,
                "out": out_path,
                "out_format": args.out_format,
                **_embedding_options(args),
            },
            inputs=fingerprints,
        )
        if args.out_format == "csv":
            text = _run_line(run) + "\n" + metric.report_to_csv(report)
        else:
            payload = metric.report_to_json(report)
            if not args.per_benchmark:
                payload.pop("per_benchmark", None)
            payload["run"] = run.to_json()
            text = _dump_json(payload)
        _write_output(out_path, text)


def cmd_overlap(args) -> None:
    fingerprints: dict[str, str] = {}
    stats, _, fmt = _load_train(args, fingerprints)
    eval_set = _load_eval(args, fingerprints)
    run = RunConfig(
        command="overlap",
        options={
            "in": args.input,
            "format": fmt,
            "eval_labels": list(args.eval_labels),
            "normalize": args.normalize,
            "out": args.out,
        },
        inputs=fingerprints,
    )
    overlapping, zero_shot = analysis.partition_eval_labels(eval_set, stats)
    payload: dict = {
        "overall": metric.exact_overlap(eval_set, stats),
        "overlapping": list(overlapping),
        "zero_shot": list(zero_shot),
        "run": run.to_json(),
    }
    if eval_set.per_benchmark:
        payload["per_benchmark"] = {
            name: metric.exact_overlap(corpus.EvalLabelSet(labels=labels), stats)
            for name, labels in eval_set.per_benchmark.items()
        }
    _write_output(args.out, _dump_json(payload))


def cmd_split(args) -> None:
    fingerprints: dict[str, str] = {}
    stats, parsed, fmt = _load_train(args, fingerprints)
    if args.write_filtered and parsed is None:
        raise UsageError("--write-filtered needs a corpus input, not a stats file")
    eval_set = _load_eval(args, fingerprints)
    store = _resolve_store(args, _needed_labels(stats, eval_set), fingerprints)
    method = METHOD_BY_FLAG[args.method]
    difficulty = DIFFICULTY_BY_FLAG[args.difficulty]
    if args.quantiles:
        lo, hi = _parse_quantiles(args.quantiles)
        matrix = splits.similarity_matrix(stats, eval_set, store)
        if method == splits.MAX_SIM:
            scores = splits.aggregate_max(matrix)
        else:
            scores = splits.aggregate_entropy(matrix, args.temperature)
        spec = splits.select_quantile(scores, lo, hi, difficulty=difficulty)
        spec = dataclasses.replace(
            spec, provider_id=store.provider_id, train_fingerprint=stats.fingerprint()
        )
    else:
        spec = splits.make_split(
            stats, eval_set, store, method, difficulty, args.profile,
            temperature=args.temperature,
        )
    run = RunConfig(
        command="split",
        options={
            "in": args.input,
            "format": fmt,
            "eval_labels": list(args.eval_labels),
            "normalize": args.normalize,
            "method": method,
            "difficulty": difficulty,
            "profile": None if args.quantiles else args.profile,
            "quantiles": list(_parse_quantiles(args.quantiles)) if args.quantiles else None,
            "temperature": args.temperature if method == splits.ENTROPY else None,
            "write_filtered": args.write_filtered,
            "drop_empty": args.drop_empty if args.write_filtered else None,
            "out": args.out,
            **_embedding_options(args),
        },
        inputs=fingerprints,
    )
    payload = splits.split_to_json(spec)
    payload["run"] = run.to_json()
    _write_output(args.out, _dump_json(payload))
    if args.write_filtered:
        filtered = splits.filter_corpus(parsed, spec, drop_empty=args.drop_empty)
        with open(args.write_filtered, "w", encoding="utf-8") as handle:
            corpus.write_corpus(filtered, handle)


def cmd_correlate(args) -> None:
    fingerprints: dict[str, str] = {}
    report_text, report_digest = _read_text(args.report)
    fingerprints[args.report] = report_digest
    f1_text, f1_digest = _read_text(args.f1)
    fingerprints[args.f1] = f1_digest
    report = metric.report_from_json(json.loads(report_text))
    table = analysis.load_f1_table(io.StringIO(f1_text), source=args.f1)
    result = analysis.correlate_report(report, table)
    run = RunConfig(
        command="correlate",
        options={"report": args.report, "f1": args.f1, "out": args.out},
        inputs=fingerprints,
    )
    payload = analysis.correlation_to_json(result)
    payload["run"] = run.to_json()
    _write_output(args.out, _dump_json(payload))


def _add_train_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--in", dest="input", required=True, metavar="PATH",
                        help="training corpus (.jsonl/.conll) or label-stats JSON")
    parser.add_argument("--format", choices=("auto", "jsonl", "conll", "stats"),
                        default="auto", help="input format (default: by extension)")
    parser.add_argument("--token-field", default=corpus.DEFAULT_TOKEN_FIELD,
                        help="JSONL token array field")
    parser.add_argument("--entity-field", default=corpus.DEFAULT_ENTITY_FIELD,
                        help="JSONL entity array field")


def _add_normalize(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-normalize", dest="normalize", action="store_false",
                        help="match labels verbatim instead of canonicalizing")


def _add_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="-", metavar="PATH",
                        help="output path, - for stdout (default)")


def _add_eval_labels(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eval-labels", action="append", required=True, metavar="PATH",
                        help="evaluation labels (.txt/.json) or corpus; repeatable, "
                             "one benchmark per file")


def _add_embedding_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--embeddings", metavar="PATH",
                       help="vector file (labeled TSV or word2vec text)")
    group.add_argument("--endpoint", metavar="URL",
                       help="embedding service base URL (auth via $" + TOKEN_ENV + ")")
    parser.add_argument("--embeddings-format", choices=("auto", "tsv", "word2vec"),
                        default="auto")
    parser.add_argument("--batch-size", type=_positive_int, default=512,
                        help="labels per remote request")
    parser.add_argument("--save-embeddings", metavar="PATH",
                        help="write the resolved store as labeled TSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelshift",
        description="Quantify label shift between NER training data and "
                    "zero-shot evaluation benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="count entity mentions per label")
    _add_train_input(p)
    _add_normalize(p)
    _add_out(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("familiarity", help="score evaluation labels against training data")
    _add_train_input(p)
    _add_eval_labels(p)
    _add_embedding_source(p)
    _add_normalize(p)
    _add_out(p)
    p.add_argument("--out-format", choices=("json", "csv"), default="json")
    p.add_argument("--k", type=_positive_int, default=metric.DEFAULT_K,
                   help="rank cutoff (default %(default)s)")
    p.add_argument("--weighting", choices=sorted(WEIGHTING_BY_FLAG), default="zipf",
                   help="rank weighting scheme (default %(default)s)")
    p.add_argument("--sweep-k", metavar="K1,K2,...",
                   help="emit one report per K next to --out")
    p.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                   help="evaluation-label parallelism (default: machine parallelism)")
    p.add_argument("--per-benchmark", action="store_true",
                   help="include per-benchmark macro averages")
    p.set_defaults(func=cmd_familiarity)

    p = sub.add_parser("overlap", help="exact label overlap, overall and per benchmark")
    _add_train_input(p)
    _add_eval_labels(p)
    _add_normalize(p)
    _add_out(p)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("split", help="select a training subset by transfer difficulty")
    _add_train_input(p)
    _add_eval_labels(p)
    _add_embedding_source(p)
    _add_normalize(p)
    _add_out(p)
    p.add_argument("--method", choices=sorted(METHOD_BY_FLAG), required=True)
    p.add_argument("--difficulty", choices=("low", "medium", "high"), required=True)
    p.add_argument("--profile", choices=splits.PROFILES, default="pilener-like",
                   help="dataset profile picking the quantile band")
    p.add_argument("--quantiles", metavar="LO,HI",
                   help="explicit quantile band overriding --profile")
    p.add_argument("--temperature", type=_positive_float, default=splits.DEFAULT_TEMPERATURE,
                   help="softmax temperature for --method entropy")
    p.add_argument("--write-filtered", metavar="PATH",
                   help="write the corpus restricted to selected labels")
    p.add_argument("--drop-empty", action="store_true",
                   help="drop sentences left without entities when filtering")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("correlate", help="correlate a familiarity report with F1 scores")
    p.add_argument("--report", required=True, metavar="PATH", help="familiarity report JSON")
    p.add_argument("--f1", required=True, metavar="PATH", help="per-label F1 JSON")
    _add_out(p)
    p.set_defaults(func=cmd_correlate)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except LabelShiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        name = exc.filename or ""
        detail = exc.strerror or str(exc)
        print(f"error: {name + ': ' if name else ''}{detail}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
