"""Command-line front end for the whole pipeline.

One binary, seven subcommands: train-models, generate, extract, train,
classify, evaluate, bench.  Exit codes are a stable contract: 0 success,
2 data or model error, 64 usage error.  All randomness flows from --seed
through named derived streams, so identical inputs, flags, and seed give
byte-identical primary outputs.

A config file (JSON object, or key=value lines) supplies flag defaults;
explicit flags always win.  The path comes from --config or the
DGA_SENTINEL_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Mapping

from dga_sentinel import defaults as shipped
from dga_sentinel.errors import DataError
from dga_sentinel.evaluate import (
    EvalConfig,
    benchmark_latency,
    evaluate_binary,
    multiclass_evaluate,
    report_json,
    report_text,
)
from dga_sentinel.features import (
    FeatureConfig,
    FeatureExtractor,
    read_feature_csv,
    with_metadata,
    write_feature_csv,
)
from dga_sentinel.forest import (
    ForestParams,
    deserialize_model,
    predict_batch,
    serialize_model,
    train_forest,
)
from dga_sentinel.normalize import ingest_benign_corpus, parse_domain
from dga_sentinel.synth import ARCHETYPES, DgaSpec, emit_domains, generate
from dga_sentinel.textmodels import (
    CorpusModels,
    build_word_model,
    load_models_dir,
    markov_train,
    save_models_dir,
    train_ngram_model,
)

EXIT_OK = 0
EXIT_DATA = 2
EXIT_USAGE = 64

CONFIG_ENV = "DGA_SENTINEL_CONFIG"

BINARY_DEFAULT_TREES = 100
MULTICLASS_DEFAULT_TREES = 200


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract says 64."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ratio(text: str) -> tuple[int, int]:
    try:
        mal, ben = text.split(":")
        ratio = (int(mal), int(ben))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratio must look like 1:10, got {text!r}")
    if ratio[0] < 1 or ratio[1] < 1:
        raise argparse.ArgumentTypeError("ratio components must be >= 1")
    return ratio


def _length(text: str) -> int | tuple[int, int]:
    try:
        if "," in text:
            lo, hi = text.split(",")
            return (int(lo), int(hi))
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"length is N or LO,HI, got {text!r}")


def load_config_file(path: str) -> dict:
    """JSON object, or '#'-commented key=value lines with JSON-ish values."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise DataError(f"config {path} must hold a JSON object")
        return doc
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"config {path} line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        value = value.strip()
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    return out


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def _nonempty_lines(path: str) -> list[str]:
    return [ln.strip() for ln in _read_lines(path) if ln.strip() and not ln.startswith("#")]


def _load_feature_models(models_dir: str | None) -> CorpusModels:
    if models_dir is None:
        return shipped.default_models()
    return load_models_dir(models_dir)


def _out_stream(path: str | None):
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


# ---------------------------------------------------------------------------
# subcommands


def cmd_train_models(args: argparse.Namespace) -> int:
    benign = ingest_benign_corpus(_read_lines(args.benign))
    wordlist = _nonempty_lines(args.wordlist) if args.wordlist else shipped.default_wordlist()
    if args.gibberish_text:
        with open(args.gibberish_text, "r", encoding="utf-8") as fh:
            gib_text = fh.read()
    else:
        gib_text = shipped.data_text("gibberish_train.txt")
    good = (
        _nonempty_lines(args.gibberish_good)
        if args.gibberish_good
        else shipped.data_text("gibberish_good.txt").splitlines()
    )
    bad = (
        _nonempty_lines(args.gibberish_bad)
        if args.gibberish_bad
        else shipped.data_text("gibberish_bad.txt").splitlines()
    )
    models = CorpusModels(
        ngram3=train_ngram_model(benign, 3),
        ngram4=train_ngram_model(benign, 4),
        ngram5=train_ngram_model(benign, 5),
        word=build_word_model(wordlist),
        markov=markov_train(gib_text, good, bad),
    )
    manifest = save_models_dir(models, args.out)
    for name in sorted(manifest):
        print(f"{manifest[name]}  {name}")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    wordlist: tuple[str, ...] = ()
    if args.wordlist:
        wordlist = tuple(_nonempty_lines(args.wordlist))
    spec = DgaSpec(
        archetype=args.archetype,
        seed=args.seed,
        count=args.count,
        length=args.length,
        charset=args.charset,
        wordlist=wordlist,
        words_per_domain=args.words_per_domain,
        tld=args.tld or "com",
    )
    slds = generate(spec)
    lines = emit_domains(slds, args.tld) if args.tld else slds
    out = _out_stream(args.out)
    try:
        out.write("\n".join(lines) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    models = _load_feature_models(args.models)
    config = FeatureConfig(enable_dot=not args.no_dot_feature)
    extractor = FeatureExtractor(models, config=config)

    domains = _nonempty_lines(args.infile)
    labels: list[tuple[str | None, str | None]] = [(None, None)] * len(domains)
    if args.labels:
        raw = _nonempty_lines(args.labels)
        if len(raw) != len(domains):
            raise DataError(
                f"{len(raw)} labels for {len(domains)} input lines"
            )
        labels = []
        for entry in raw:
            label, _, family = entry.partition(",")
            labels.append((label.strip(), family.strip() or None))

    vectors = []
    for raw_domain, (label, family) in zip(domains, labels):
        vec = extractor.extract(parse_domain(raw_domain))
        vectors.append(with_metadata(vec, label=label, family=family))
    out = _out_stream(args.out)
    try:
        write_feature_csv(out, vectors)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    import numpy as np

    with open(args.features, "r", encoding="utf-8", newline="") as fh:
        vectors = read_feature_csv(fh)
    if not vectors:
        raise DataError(f"no feature rows in {args.features}")
    X = np.stack([v.values for v in vectors])
    if args.multiclass:
        # family identifies the class; unlabeled rows fall back to label
        y = [v.family or v.label or "" for v in vectors]
    else:
        y = [v.label or "" for v in vectors]
    if "" in y:
        raise DataError("every row needs a label (and family for --multiclass)")
    trees = args.trees
    if trees is None:
        trees = MULTICLASS_DEFAULT_TREES if args.multiclass else BINARY_DEFAULT_TREES
    params = ForestParams(n_trees=trees, rng_seed=args.seed)
    forest = train_forest(X, y, params)
    with open(args.out, "wb") as fh:
        fh.write(serialize_model(forest))
    print(f"trained {trees} trees on {len(y)} rows, {len(forest.class_labels)} classes")
    return EXIT_OK


def _classify_one(extractor: FeatureExtractor, forest, raw_domain: str) -> tuple[str, str, float]:
    vec = extractor.extract(parse_domain(raw_domain))
    labels, probs = predict_batch(forest, vec.values.reshape(1, -1))
    col = forest.class_labels.index(labels[0])
    return vec.sld, labels[0], float(probs[0, col])


def cmd_classify(args: argparse.Namespace) -> int:
    models = _load_feature_models(args.models)
    with open(args.model, "rb") as fh:
        forest = deserialize_model(fh.read())
    extractor = FeatureExtractor(models, cache_size=65536)

    if args.stdin_stream:
        # pipeline mode: one verdict per input line, flushed immediately
        for raw in sys.stdin:
            line = raw.strip()
            if not line:
                print("warning: skipping empty line", file=sys.stderr)
                continue
            sld, label, score = _classify_one(extractor, forest, line)
            sys.stdout.write(f"{sld},{label},{score:.6f}\n")
            sys.stdout.flush()
        return EXIT_OK

    out = _out_stream(args.out)
    try:
        out.write("sld,label,score\n")
        for line in _nonempty_lines(args.infile):
            sld, label, score = _classify_one(extractor, forest, line)
            out.write(f"{sld},{label},{score:.6f}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _family_name(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_evaluate(args: argparse.Namespace) -> int:
    models = _load_feature_models(args.models)
    config = EvalConfig(
        ratio=args.ratio,
        repetitions=args.reps,
        folds=args.folds,
        rng_seed=args.seed,
        forest_params=ForestParams(n_trees=args.trees, rng_seed=args.seed),
        max_class_size=args.max_class_size,
    )
    families = [
        (_family_name(path), _nonempty_lines(path)) for path in args.malicious.split(",")
    ]
    if args.multiclass:
        report = multiclass_evaluate(families, models, config)
    else:
        benign = list(ingest_benign_corpus(_read_lines(args.benign)).slds)
        report = evaluate_binary(benign, families, models, config)
    if args.report:
        with open(args.report, "wb") as fh:
            fh.write(report_json(report))
    print(report_text(report))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    models = _load_feature_models(args.models)
    with open(args.model, "rb") as fh:
        forest = deserialize_model(fh.read())
    slds = [parse_domain(line).sld for line in _nonempty_lines(args.infile)]
    stats = benchmark_latency(slds, models, forest, force=args.force)
    print(json.dumps(stats, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> tuple[_Parser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="dga-sentinel", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="config file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-models", parents=[], help="train the feature model bundle")
    p.add_argument("--benign", required=True, help="benign domain list, one per line")
    p.add_argument("--wordlist", help="frequency-ranked wordlist (default: shipped)")
    p.add_argument("--gibberish-text", help="character-model training text (default: shipped)")
    p.add_argument("--gibberish-good", help="calibration lines, real words (default: shipped)")
    p.add_argument("--gibberish-bad", help="calibration lines, gibberish (default: shipped)")
    p.add_argument("--out", required=True, help="output model directory")
    p.set_defaults(func=cmd_train_models)

    p = sub.add_parser("generate", help="generate synthetic AGD SLDs")
    p.add_argument("--archetype", required=True, choices=ARCHETYPES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--length", type=_length, default=8, help="N or LO,HI")
    p.add_argument("--charset", default="abcdefghijklmnopqrstuvwxyz")
    p.add_argument("--wordlist", help="word file for the wordlist archetype")
    p.add_argument("--words-per-domain", type=int, default=2)
    p.add_argument("--tld", default="", help="append .TLD to each output line")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("extract", help="extract feature vectors to CSV")
    p.add_argument("--models", help="model directory (default: shipped models)")
    p.add_argument("--in", dest="infile", required=True, help="domains, one per line")
    p.add_argument("--labels", help="optional LABEL[,FAMILY] per input line")
    p.add_argument("--no-dot-feature", action="store_true",
                   help="hold the dot-count feature at zero")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a forest from a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--trees", type=int, default=None,
                   help=f"default {BINARY_DEFAULT_TREES}, "
                        f"{MULTICLASS_DEFAULT_TREES} with --multiclass")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--multiclass", action="store_true",
                   help="classify by family column instead of label")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="score domains with a trained model")
    p.add_argument("--model", required=True, help="forest model file")
    p.add_argument("--models", help="feature model directory (default: shipped)")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--in", dest="infile", help="batch mode: domains file")
    mode.add_argument("--stdin-stream", action="store_true",
                      help="stream mode: SLD per stdin line, flushed verdicts")
    p.add_argument("--out", help="batch output CSV (default stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="run the repeated-CV evaluation")
    p.add_argument("--benign", help="benign domain list (required unless --multiclass)")
    p.add_argument("--malicious", required=True,
                   help="AGD file, or comma-separated files (family per file)")
    p.add_argument("--models", help="feature model directory (default: shipped)")
    p.add_argument("--ratio", type=_ratio, default=(1, 1), help="malicious:benign, e.g. 1:10")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--trees", type=int, default=BINARY_DEFAULT_TREES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-class-size", type=int, default=5000)
    p.add_argument("--multiclass", action="store_true",
                   help="one k-family forest instead of per-family binary runs")
    p.add_argument("--report", help="write canonical JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="measure per-SLD latency")
    p.add_argument("--models", help="feature model directory (default: shipped)")
    p.add_argument("--model", required=True, help="forest model file")
    p.add_argument("--in", dest="infile", required=True, help="domains, one per line")
    p.add_argument("--force", action="store_true", help="allow fewer than 1000 inputs")
    p.set_defaults(func=cmd_bench)

    return parser, dict(sub.choices)


def _config_path_from(argv: list[str]) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config":
            return argv[i + 1] if i + 1 < len(argv) else None
        if token.startswith("--config="):
            return token.partition("=")[2]
    return os.environ.get(CONFIG_ENV)


def _apply_config(
    parser: _Parser,
    subparsers: Mapping[str, argparse.ArgumentParser],
    overrides: dict,
) -> None:
    """Install config values as flag defaults, coercing through each flag's
    type converter so a config file may hold the same strings the command
    line would."""
    known: set[str] = set()
    for sp in subparsers.values():
        by_dest = {a.dest: a for a in sp._actions}
        known |= set(by_dest)
        updates = {}
        for key, value in overrides.items():
            action = by_dest.get(key)
            if action is None:
                continue
            if isinstance(value, str) and action.type is not None:
                value = action.type(value)
            elif isinstance(value, list):
                value = tuple(value)
            updates[key] = value
            action.required = False  # the config satisfies this flag
        if updates:
            sp.set_defaults(**updates)
    unknown = set(overrides) - known - {"config"}
    if unknown:
        parser.error(f"unknown config keys: {sorted(unknown)}")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subparsers = build_parser()

    config_path = _config_path_from(argv)
    if config_path:
        try:
            overrides = load_config_file(config_path)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_DATA
        except (DataError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DATA
        try:
            _apply_config(parser, subparsers, overrides)
        except argparse.ArgumentTypeError as exc:
            parser.error(str(exc))

    args = parser.parse_args(argv)
    if args.command == "evaluate" and not args.multiclass and not args.benign:
        parser.error("evaluate requires --benign unless --multiclass")
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
