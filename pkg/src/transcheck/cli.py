"""Command-line entry point: ``transcheck <subcommand> ...``."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
from typing import List, Optional

from .corpus import CorpusError, SentencePair, StopWordSet, builtin_stopwords, load_corpus, load_stopwords, normalize
from .detect import E_TH_PRESETS, CheckConfig, DirectionMismatchError, check, check_direction
from .evaluation import (
    DatasetError,
    EvalDataset,
    evaluate,
    load_baseline_lexicon,
    load_eval_dataset,
    parse_grid,
    sweep_e_th,
)
from .lexicon import BuildConfig, LexiconFormatError, build_lexicon, load_lexicon, save_lexicon
from .service import DEFAULT_WINDOW, monitor_report, read_report, serve
from .synth import generate, load_synth_spec

logger = logging.getLogger("transcheck")


def parse_duration(text: str) -> float:
    """``300``, ``300s``, ``5m`` or ``1h`` -> seconds."""
    text = text.strip().lower()
    scale = {"s": 1, "m": 60, "h": 3600}
    if text and text[-1] in scale:
        return float(text[:-1]) * scale[text[-1]]
    return float(text)


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def build_timestamp(corpus_path: str) -> str:
    # reproducible: SOURCE_DATE_EPOCH, else the corpus modification time
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = float(epoch) if epoch else os.stat(corpus_path).st_mtime
    return _dt.datetime.fromtimestamp(int(ts), tz=_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _stopwords(args) -> StopWordSet:
    if args.stopwords == "none":
        return StopWordSet(args.target_lang or "")
    if args.stopwords:
        return load_stopwords(args.stopwords, args.target_lang or "")
    lang = args.target_lang
    if lang:
        try:
            return builtin_stopwords(lang)
        except CorpusError:
            logger.warning("no built-in stop words for %r; over-translation runs without stop words", lang)
    return StopWordSet(lang or "")


def _direction(args):
    if args.source_lang and args.target_lang:
        return (args.source_lang, args.target_lang)
    return None


def _check_config(args) -> CheckConfig:
    e_th = args.e_th if args.e_th is not None else E_TH_PRESETS[args.preset]
    return CheckConfig(e_th=e_th, proximity_window=args.window, stopwords=_stopwords(args))


def _load_lexicon_arg(args):
    if getattr(args, "baseline", None):
        return load_baseline_lexicon(
            args.lexicon, args.baseline, args.c_tr, args.source_lang or "src", args.target_lang or "dst"
        )
    lexicon = load_lexicon(args.lexicon)
    if args.target_lang is None:
        args.target_lang = lexicon.target_lang
    return lexicon


def cmd_build(args) -> int:
    config = BuildConfig(
        c_tr=args.c_tr, c_ph=args.c_ph, d_ph=args.d_ph, c_w=args.c_w, e_th_default=args.e_th_default,
        phrases_src=args.phrases_src, phrases_dst=args.phrases_dst,
    )
    corpus = load_corpus(args.corpus, args.limit)
    lexicon = build_lexicon(
        corpus, config, args.source_lang or "src", args.target_lang or "dst", build_timestamp(args.corpus)
    )
    if corpus.skipped:
        logger.warning("%d malformed corpus lines skipped", len(corpus.skipped))
    save_lexicon(lexicon, args.out)
    logger.info("wrote %d entries to %s", len(lexicon), args.out)
    return 0


def read_tasks(path, limit: Optional[int] = None):
    """``source<TAB>translation[<TAB>timestamp]`` lines -> (pair, timestamp) tuples."""
    tasks = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) not in (2, 3):
                logger.warning("%s:%d skipped (expected 2 or 3 columns)", path, lineno)
                continue
            ts = float(cols[2]) if len(cols) == 3 and cols[2].strip() else None
            pair = SentencePair(len(tasks), tuple(normalize(cols[0])), tuple(normalize(cols[1])))
            tasks.append((pair, ts))
            if limit is not None and len(tasks) >= limit:
                break
    return tasks


def cmd_check(args) -> int:
    lexicon = _load_lexicon_arg(args)
    check_direction(lexicon, _direction(args))
    config = _check_config(args)
    out = open(args.out, "w", encoding="utf-8") if args.out != "-" else sys.stdout
    n = flagged = 0
    try:
        for pair, ts in read_tasks(args.input, args.limit):
            report = check(pair, lexicon, config)
            rec = report.to_dict()
            rec["source"] = " ".join(pair.source)
            rec["translation"] = " ".join(pair.target)
            if ts is not None:
                rec["timestamp"] = ts
            out.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
            flagged += report.has_under or report.has_over
    finally:
        if out is not sys.stdout:
            out.close()
    logger.info("checked %d tasks, %d flagged", n, flagged)
    return 0


def _limited(ds: EvalDataset, limit):
    return EvalDataset(ds.records[:limit], ds.name) if limit is not None else ds


def cmd_eval(args) -> int:
    lexicon = _load_lexicon_arg(args)
    ds = _limited(load_eval_dataset(args.dataset), args.limit)
    metrics = evaluate(ds, lexicon, _check_config(args), args.type, _direction(args))
    result = {"dataset": ds.summary(), "type": args.type, "e_th": _check_config(args).e_th, **metrics.as_dict()}
    text = json.dumps(result, indent=2, ensure_ascii=False)
    if args.out == "-":
        print(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def cmd_sweep(args) -> int:
    lexicon = _load_lexicon_arg(args)
    check_direction(lexicon, _direction(args))
    grid = parse_grid(args.grid)
    config = _check_config(args)
    result = None
    for path in args.dataset:
        ds = _limited(load_eval_dataset(path, os.path.splitext(os.path.basename(path))[0]), args.limit)
        part = sweep_e_th(ds, lexicon, config, grid, args.type)
        result = part if result is None else result.merge(part)
    text = result.to_csv(None if args.out == "-" else args.out)
    if args.out == "-":
        sys.stdout.write(text)
    return 0


def cmd_monitor(args) -> int:
    records = read_report(args.report)
    if args.limit is not None:
        records = records[: args.limit]
    series = monitor_report(records, parse_duration(args.window), args.seconds_per_record)
    text = series.to_csv(None if args.out == "-" else args.out)
    if args.out == "-":
        sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    serve(args.lexicon, _check_config(args), args.host, args.port, window=parse_duration(args.stats_window))
    return 0


def cmd_synth(args) -> int:
    spec = load_synth_spec(args.spec)
    result = generate(spec)
    paths = result.write(args.out_dir)
    for kind, path in paths.items():
        logger.info("%s -> %s", kind, path)
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source-lang", default=None, help="source language tag, e.g. en")
    p.add_argument("--target-lang", default=None, help="target language tag, e.g. zh")
    p.add_argument("--limit", type=int, default=None, metavar="N", help="process at most N records")
    p.add_argument("-v", "--verbose", action="store_true")


def _check_opts(p: argparse.ArgumentParser, window_flag: str = "--window") -> None:
    p.add_argument("--e-th", type=float, default=None, help="error-rate tolerance in (0, 1]")
    p.add_argument("--preset", choices=sorted(E_TH_PRESETS), default="default")
    p.add_argument(window_flag, dest="window", type=int, default=10, help="proximity window for repeated tokens")
    p.add_argument("--stopwords", default=None, help="stop-word file, or 'none' (default: built-in list)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transcheck", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="learn a lexicon from a parallel corpus")
    _common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--c-tr", type=int, default=10)
    p.add_argument("--c-ph", type=int, default=10)
    p.add_argument("--d-ph", type=int, default=1)
    p.add_argument("--c-w", type=int, default=5)
    p.add_argument("--e-th-default", type=float, default=0.2)
    p.add_argument("--phrases-src", type=_on_off, default=True, metavar="on|off")
    p.add_argument("--phrases-dst", type=_on_off, default=False, metavar="on|off")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("check", help="check translation tasks against a lexicon")
    _common(p)
    _check_opts(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_check, baseline=None)

    for name, func, hlp in (("eval", cmd_eval, "precision/recall on a labeled dataset"),
                            ("sweep", cmd_sweep, "metrics over a grid of e_th values")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        _check_opts(p)
        p.add_argument("--lexicon", required=True)
        if name == "eval":
            p.add_argument("--dataset", required=True)
            p.add_argument("--out", default="-")
        else:
            p.add_argument("--dataset", required=True, action="append")
            p.add_argument("--grid", default="0.05:1.0:0.05")
            p.add_argument("--out", default="-")
        p.add_argument("--type", choices=("under", "over"), default="under")
        p.add_argument("--baseline", choices=("std-dict", "word-align"), default=None,
                       help="treat --lexicon as a baseline dictionary / alignment table")
        p.add_argument("--c-tr", type=int, default=10)
        p.set_defaults(func=func)

    p = sub.add_parser("monitor", help="windowed statistics from check output")
    _common(p)
    p.add_argument("--report", required=True)
    p.add_argument("--window", default="300s")
    p.add_argument("--seconds-per-record", type=float, default=1.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("serve", help="run the checking service")
    _common(p)
    _check_opts(p, window_flag="--proximity")
    p.add_argument("--lexicon", required=True, action="append")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--window", dest="stats_window", default=f"{int(DEFAULT_WINDOW)}s",
                   help="statistics window, e.g. 300s or 5m")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", help="generate a synthetic corpus and labeled dataset")
    _common(p)
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CorpusError, LexiconFormatError, DatasetError, DirectionMismatchError, ValueError, OSError) as exc:
        print(f"transcheck {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
