"""Command-line entry point: ``morphlex ingest|refine|train-bpe|evaluate|sweep|analyze``.

Machine-readable summaries go to stdout, progress and warnings to stderr.
Exit codes: 0 success, 2 input/parse error, 3 empty or degenerate data,
4 invalid configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bpe import BpeModel, EncodeUnavailable, count_words, import_vocab, train, write_merges
from .core import (AlphabetConfig, ConfigError, EmptyDataError, InputError, MorphlexError,
                   load_config, preset_config, read_candidate_file, read_lexicon,
                   write_candidate_file, write_lexicon, write_score_table)
from .curve import GainMode, appendix_curve, read_curve_csv, recommend_range
from .imdp import run_pipeline
from .ingest import load_wordlist, merge_candidates, parse_aff, parse_dic
from .metrics import MARKER_RULES, evaluate

logger = logging.getLogger("morphlex")

EXIT_OK, EXIT_INPUT, EXIT_EMPTY, EXIT_CONFIG = 0, 2, 3, 4


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _inputs(**paths) -> dict:
    """Input file names with content digests, for the audit trail.

    Directories are left out so reruns elsewhere produce identical reports.
    """
    return {name: {"name": Path(p).name, "sha256": _digest(p)}
            for name, p in paths.items() if p is not None}


def _dump(data, path=None) -> str:
    text = json.dumps(data, ensure_ascii=False, indent=1, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _require(path, what="input"):
    if path is not None and not Path(path).is_file():
        raise InputError(f"{what} file not found: {path}")


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad vocab size list {text!r}") from exc
    if not sizes or any(s < 1 for s in sizes):
        raise ConfigError("vocab sizes must be positive integers")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("vocab sizes must be strictly increasing")
    return sizes


def cmd_ingest(args) -> int:
    _require(args.dic, "dictionary")
    _require(args.aff, "affix")
    stems = parse_dic(args.dic)
    rules = parse_aff(args.aff) if args.aff else []
    cands = merge_candidates(stems, rules)
    write_candidate_file(cands, args.out)
    sys.stdout.write(_dump({
        "dic_entries": len(stems),
        "aff_rules": len(rules),
        "candidates": len(cands),
        "inputs": _inputs(dic=args.dic, aff=args.aff),
    }))
    return EXIT_OK


def _refine_config(args) -> tuple[AlphabetConfig, str]:
    if args.config:
        _require(args.config, "config")
        cfg = load_config(args.config)
        tag = args.language_tag or json.loads(Path(args.config).read_text("utf-8")).get(
            "language", "")
    else:
        cfg = preset_config(args.lang)
        tag = args.language_tag or args.lang
    overrides = {k: v for k, v in {
        "support_m": args.support_m, "epsilon": args.epsilon,
        "max_iterations": args.max_iterations, "otsu_bins": args.otsu_bins,
        "min_length": args.min_length, "max_length": args.max_length,
    }.items() if v is not None}
    try:
        cfg = cfg.replace(**overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, tag


def cmd_refine(args) -> int:
    cfg, tag = _refine_config(args)
    _require(args.candidates, "candidate")
    raw = read_candidate_file(args.candidates)
    logger.info("read %d candidates", len(raw))
    result = run_pipeline(raw, cfg, tag)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_lexicon(result.lexicon, out / "lexicon.txt")
    write_score_table(result.state.scores, out / "scores.csv")
    report = result.report({"language": tag, **cfg.to_dict(),
                            "inputs": _inputs(candidates=args.candidates, config=args.config),
                            "deterministic": True})
    _dump(report, out / "report.json")
    sys.stdout.write(_dump({k: report[k] for k in
                            ("iterations", "stop_reason", "otsu_threshold",
                             "pool_sizes_per_stage", "lexicon_size", "reduction")}))
    return EXIT_OK


def _read_counts(corpus, lowercase):
    _require(corpus, "corpus")
    try:
        with open(corpus, encoding="utf-8") as fh:
            return count_words(fh, lowercase)
    except UnicodeDecodeError as exc:
        raise InputError(f"{corpus}: invalid UTF-8 ({exc.reason})") from exc


def cmd_train_bpe(args) -> int:
    if args.vocab_size < 1 or args.min_frequency < 1:
        raise ConfigError("vocab size and min frequency must be positive")
    counts = _read_counts(args.corpus, args.lowercase)
    if not counts:
        raise EmptyDataError("corpus contains no words")
    model = train(counts, args.vocab_size, args.min_frequency)
    model.save(args.out)
    if args.merges_out:
        write_merges(model, args.merges_out)
    sys.stdout.write(_dump({"vocab_size": len(model.vocab), "merges": len(model.merges),
                            "target": args.vocab_size, "min_frequency": args.min_frequency,
                            "lowercase": args.lowercase, "pretokenization": "whitespace+edge-punct",
                            "inputs": _inputs(corpus=args.corpus)}))
    return EXIT_OK


def _eval_inputs(args):
    _require(args.lexicon, "lexicon")
    _require(args.words, "eval word")
    lexicon = read_lexicon(args.lexicon)
    if not len(lexicon):
        raise EmptyDataError("lexicon is empty")
    words = load_wordlist(args.words, args.cap, lowercase=not args.keep_case)
    if not words:
        raise EmptyDataError("eval word list is empty")
    return lexicon, words


def _eval_settings(args) -> dict:
    return {"cap": args.cap, "marker": args.marker, "eval_lowercase": not args.keep_case,
            "occurrence": "substring"}


def cmd_evaluate(args) -> int:
    _require(args.model, "model")
    model = import_vocab(args.model)
    lexicon, words = _eval_inputs(args)
    report = evaluate(lexicon, model, words, marker=args.marker)
    report.settings.update(_eval_settings(args))
    report.settings["inputs"] = _inputs(model=args.model, lexicon=args.lexicon, words=args.words)
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    sys.stdout.write("k,lmc,osr,ips,osr_denominator\n" + report.csv_row())
    return EXIT_OK


def _imported_models(directory) -> list[tuple[int, BpeModel]]:
    files = sorted(Path(directory).glob("*.json"))
    if not files:
        raise InputError(f"no vocab JSON files in {directory}")
    models = []
    for f in files:
        model = import_vocab(f)
        models.append((model.vocab_size_target or len(model.vocab), model))
    models.sort(key=lambda km: km[0])
    ks = [k for k, _ in models]
    if len(set(ks)) != len(ks):
        raise ConfigError("imported vocabularies have duplicate sizes")
    return models


def cmd_sweep(args) -> int:
    if args.import_dir:
        if not Path(args.import_dir).is_dir():
            raise InputError(f"import directory not found: {args.import_dir}")
        models = _imported_models(args.import_dir)
        source = {"import_dir": str(args.import_dir)}
    else:
        if not args.sizes or not args.corpus:
            raise ConfigError("sweep needs --sizes and --corpus, or --import-dir")
        sizes = _parse_sizes(args.sizes)
        counts = _read_counts(args.corpus, args.lowercase)
        if not counts:
            raise EmptyDataError("corpus contains no words")
        # nested vocabularies: one run to the largest size, prefixes for the rest
        full = train(counts, sizes[-1], args.min_frequency)
        models = [(k, full.truncated(k)) for k in sizes]
        source = {"inputs": _inputs(corpus=args.corpus), "sizes": sizes,
                  "min_frequency": args.min_frequency, "lowercase": args.lowercase}
    if args.words is None:
        args.words = args.corpus
    lexicon, words = _eval_inputs(args)
    reports = []
    for k, model in models:
        logger.info("evaluating k=%d (vocab %d)", k, len(model.vocab))
        reports.append(evaluate(lexicon, model, words, k=k, marker=args.marker))
    rows = "".join(f"{r.k},{r.lmc!r},{r.osr!r},{r.ips!r}\n" for r in reports)
    Path(args.out).write_text("k,lmc,osr,ips\n" + rows, encoding="utf-8")
    if args.report:
        _dump({"config": {**source, **_eval_settings(args),
                          "eval_inputs": _inputs(lexicon=args.lexicon, words=args.words)},
               "reports": [json.loads(r.to_json()) for r in reports]}, args.report)
    sys.stdout.write("k,lmc,osr,ips\n" + rows)
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.appendix:
        curve = appendix_curve(args.appendix)
        source = {"appendix": args.appendix}
    else:
        _require(args.curve, "curve")
        curve = read_curve_csv(args.curve)
        source = _inputs(curve=args.curve)
    if len(curve) < 3:
        raise EmptyDataError("analysis needs at least 3 curve points (Kneedle)")
    analysis = recommend_range(curve, args.sensitivity, GainMode(args.gain_mode))
    data = {**analysis.to_dict(),
            "config": {"sensitivity": args.sensitivity, "gain_mode": args.gain_mode,
                       "source": source, "points": len(curve)}}
    _dump(data, args.out)
    sys.stdout.write(_dump(data))
    lo, hi = analysis.recommended_range
    logger.info("k_gain %d | k_elbow %d | k_q90 %d | range %dk -- %dk",
                analysis.k_gain, analysis.k_elbow, analysis.k_q90, lo // 1000, hi // 1000)
    return EXIT_OK


def _add_eval_args(p):
    p.add_argument("--lexicon", required=True, help="reference morpheme lexicon")
    p.add_argument("--words", help="evaluation text or word list")
    p.add_argument("--cap", type=int, default=1_000_000, help="max unique eval words")
    p.add_argument("--marker", default=None,
                   help=f"token marker to strip: {sorted(MARKER_RULES)} or a literal prefix")
    p.add_argument("--keep-case", action="store_true", help="do not lowercase eval words")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morphlex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a candidate list from Hunspell files")
    p.add_argument("--dic", required=True)
    p.add_argument("--aff")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("refine", help="run the lexicon refinement pipeline")
    p.add_argument("--candidates", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--config", help="config JSON")
    group.add_argument("--lang", default="fi", choices=["hu", "fi", "et"],
                       help="shipped alphabet preset (default fi)")
    p.add_argument("--language-tag")
    p.add_argument("--support-m", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--otsu-bins", type=int)
    p.add_argument("--min-length", type=int)
    p.add_argument("--max-length", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("train-bpe", help="train a character-level BPE model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--min-frequency", type=int, default=2)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--merges-out")
    p.set_defaults(func=cmd_train_bpe)

    p = sub.add_parser("evaluate", help="LMC/OSR/IPS of one model")
    p.add_argument("--model", required=True)
    _add_eval_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="evaluate a range of vocabulary sizes")
    p.add_argument("--corpus")
    p.add_argument("--sizes", help="comma-separated, strictly increasing")
    p.add_argument("--import-dir")
    p.add_argument("--min-frequency", type=int, default=2)
    p.add_argument("--lowercase", action="store_true")
    _add_eval_args(p)
    p.add_argument("--out", required=True, help="curve CSV")
    p.add_argument("--report", help="per-k JSON reports")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="elbow, q90 and recommended range of a curve")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--curve", help="CSV with k,ips or k,lmc,osr")
    group.add_argument("--appendix", choices=["hu", "et", "fi"],
                       help="bundled published grid")
    p.add_argument("--sensitivity", type=float, default=1.0)
    p.add_argument("--gain-mode", choices=[m.value for m in GainMode],
                   default=GainMode.ABSOLUTE_DELTA.value)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=logging.WARNING - 10 * min(args.verbose, 2))
    try:
        return args.func(args)
    except ConfigError as exc:
        code, msg = EXIT_CONFIG, exc
    except EmptyDataError as exc:
        code, msg = EXIT_EMPTY, exc
    except (InputError, EncodeUnavailable) as exc:
        code, msg = EXIT_INPUT, exc
    except MorphlexError as exc:
        code, msg = EXIT_INPUT, exc
    print(f"morphlex: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
