"""Precision/recall harness over manually (or synthetically) labeled tasks.

A record is *flagged* for a violation type when the detector reports at
least one violation of that type on it; metrics are computed over sets of
records, while the number of offending items is tallied separately.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .corpus import JOINER, SentencePair, normalize
from .detect import CheckConfig, check_direction, check_over, check_under
from .lexicon import SCORE_DIGITS, BuildConfig, Lexicon, LexiconEntry

logger = logging.getLogger(__name__)

VIOLATION_TYPES = ("under", "over")
DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(1, 21))


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class EvalRecord:
    pair: SentencePair
    label_under: bool
    label_over: bool
    under_tokens: Tuple[str, ...] = ()
    over_tokens: Tuple[str, ...] = ()

    def label(self, violation_type: str) -> bool:
        return self.label_under if violation_type == "under" else self.label_over

    def to_dict(self) -> dict:
        d = {
            "id": self.pair.id,
            "source": " ".join(self.pair.source),
            "translation": " ".join(self.pair.target),
            "label_under": self.label_under,
            "label_over": self.label_over,
        }
        if self.under_tokens:
            d["under_tokens"] = list(self.under_tokens)
        if self.over_tokens:
            d["over_tokens"] = list(self.over_tokens)
        return d


@dataclass
class EvalDataset:
    records: List[EvalRecord]
    name: str = ""

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def summary(self) -> dict:
        """Row in the style of a dataset overview table."""
        return {
            "name": self.name,
            "all": len(self.records),
            "source_words": sum(len(r.pair.source) for r in self.records),
            "under": sum(r.label_under for r in self.records),
            "over": sum(r.label_over for r in self.records),
        }


_REQUIRED = ("source", "translation", "label_under", "label_over")


def _as_label(value, lineno: int, key: str) -> bool:
    if isinstance(value, bool):
        return value
    if value in (0, 1):
        return bool(value)
    raise DatasetError(f"record {lineno}: {key} must be a boolean, got {value!r}")


def parse_eval_records(lines: Iterable[str]) -> List[EvalRecord]:
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"record {lineno}: invalid JSON ({exc.msg})") from None
        missing = [k for k in _REQUIRED if k not in obj]
        if missing:
            raise DatasetError(f"record {lineno}: missing field(s) {', '.join(missing)}")
        pair = SentencePair(
            obj.get("id", len(records)), tuple(normalize(obj["source"])), tuple(normalize(obj["translation"]))
        )
        records.append(
            EvalRecord(
                pair,
                _as_label(obj["label_under"], lineno, "label_under"),
                _as_label(obj["label_over"], lineno, "label_over"),
                tuple(obj.get("under_tokens", ())),
                tuple(obj.get("over_tokens", ())),
            )
        )
    return records


def load_eval_dataset(path, name: Optional[str] = None) -> EvalDataset:
    """Read a JSON-lines dataset with ``source``, ``translation``, ``label_under``, ``label_over``."""
    with open(path, encoding="utf-8") as fh:
        records = parse_eval_records(fh)
    if not records:
        raise DatasetError(f"empty dataset: {path}")
    ds = EvalDataset(records, name if name is not None else str(path))
    s = ds.summary()
    logger.info("%s: %d records, %d under-positives, %d over-positives", ds.name, s["all"], s["under"], s["over"])
    return ds


def save_eval_dataset(records: Iterable[EvalRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f_measure: float
    n_labeled: int
    n_flagged: int
    n_correct: int
    flagged_item_count: int = 0

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f": self.f_measure,
            "labeled": self.n_labeled,
            "flagged": self.n_flagged,
            "correct": self.n_correct,
            "count": self.flagged_item_count,
        }


def compute_metrics(labeled: Set, flagged: Set, flagged_item_count: int = 0) -> Metrics:
    """Set-based precision, recall and F-measure.

    Conventions for the degenerate cases: precision is 0 when nothing is
    flagged and recall is 1 when nothing is labeled.
    """
    both = len(labeled & flagged)
    p = both / len(flagged) if flagged else 0.0
    r = both / len(labeled) if labeled else 1.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return Metrics(p, r, f, len(labeled), len(flagged), both, flagged_item_count)


def flag_records(dataset, lexicon: Lexicon, config: CheckConfig, violation_type: str) -> Tuple[Set[int], int]:
    """Indices of records the detector flags, and the number of offending items."""
    if violation_type not in VIOLATION_TYPES:
        raise ValueError(f"violation_type must be one of {VIOLATION_TYPES}")
    flagged = set()
    items = 0
    for i, rec in enumerate(dataset):
        src = lexicon.itemize_source(rec.pair.source)
        if violation_type == "under":
            found = check_under(src, rec.pair.target, lexicon, config)
        else:
            found = check_over(src, rec.pair.target, lexicon, config)
        if found:
            flagged.add(i)
            items += len(found)
    return flagged, items


def evaluate(
    dataset,
    lexicon: Lexicon,
    config: CheckConfig,
    violation_type: str,
    direction: Optional[Tuple[str, str]] = None,
) -> Metrics:
    check_direction(lexicon, direction)
    labeled = {i for i, rec in enumerate(dataset) if rec.label(violation_type)}
    flagged, items = flag_records(dataset, lexicon, config, violation_type)
    return compute_metrics(labeled, flagged, items)


def parse_grid(text: str) -> Tuple[float, ...]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9))
        grid = tuple(round(start + i * step, 10) for i in range(n + 1))
    else:
        grid = tuple(float(x) for x in text.split(",") if x.strip())
    validate_grid(grid)
    return grid


def validate_grid(grid: Sequence[float]) -> None:
    if not grid:
        raise ValueError("empty e_th grid")
    if any(not 0.0 < g <= 1.0 for g in grid):
        raise ValueError("e_th grid values must lie in (0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("e_th grid must be strictly increasing")


@dataclass
class SweepResult:
    grid: Tuple[float, ...]
    points: Dict[str, List[Metrics]] = field(default_factory=dict)
    flagged: Dict[str, List[Set[int]]] = field(default_factory=dict)

    def rows(self):
        for name, metrics in self.points.items():
            for e_th, m in zip(self.grid, metrics):
                yield {
                    "dataset": name,
                    "e_th": e_th,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f": m.f_measure,
                    "count": m.flagged_item_count,
                }

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf, fieldnames=["dataset", "e_th", "precision", "recall", "f", "count"], lineterminator="\n"
        )
        writer.writeheader()
        for row in self.rows():
            row = dict(row)
            for k in ("precision", "recall", "f"):
                row[k] = f"{row[k]:.6f}"
            row["e_th"] = f"{row['e_th']:g}"
            writer.writerow(row)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def merge(self, other: "SweepResult") -> "SweepResult":
        if tuple(other.grid) != tuple(self.grid):
            raise ValueError("cannot merge sweeps over different grids")
        self.points.update(other.points)
        self.flagged.update(other.flagged)
        return self


def sweep_e_th(
    dataset,
    lexicon: Lexicon,
    base_config: CheckConfig,
    grid: Sequence[float] = DEFAULT_GRID,
    violation_type: str = "under",
    name: Optional[str] = None,
) -> SweepResult:
    """Metrics at every e_th of `grid` for one dataset.

    Under-translation candidates are collected once with filtering off; a
    grid point keeps the candidates whose error rate does not exceed it,
    which is exactly what the detector would report at that threshold.
    """
    validate_grid(grid)
    grid = tuple(grid)
    if name is None:
        name = getattr(dataset, "name", "") or "dataset"
    labeled = {i for i, rec in enumerate(dataset) if rec.label(violation_type)}
    metrics, flagged_sets = [], []
    if violation_type == "under":
        off = CheckConfig(1.0, base_config.proximity_window, base_config.stopwords)
        candidates = []
        for rec in dataset:
            src = lexicon.itemize_source(rec.pair.source)
            candidates.append([v.error_rate for v in check_under(src, rec.pair.target, lexicon, off)])
        for e_th in grid:
            flagged, items = set(), 0
            for i, rates in enumerate(candidates):
                hit = sum(1 for r in rates if r <= e_th)
                if hit:
                    flagged.add(i)
                    items += hit
            metrics.append(compute_metrics(labeled, flagged, items))
            flagged_sets.append(flagged)
    else:
        # e_th does not influence over-translation; every point is identical
        flagged, items = flag_records(dataset, lexicon, base_config, violation_type)
        for _ in grid:
            metrics.append(compute_metrics(labeled, flagged, items))
            flagged_sets.append(set(flagged))
    return SweepResult(grid, {name: metrics}, {name: flagged_sets})


# -- baseline lexicons ------------------------------------------------------


def _translation_item(text: str) -> Optional[str]:
    toks = normalize(text)
    if len(toks) == 1:
        return toks[0]
    if len(toks) == 2:
        return toks[0] + JOINER + toks[1]
    return None


def _load_std_dict(fh) -> Dict[str, List[Tuple[str, float]]]:
    table: Dict[str, Set[str]] = defaultdict(set)
    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        head = normalize(cols[0])
        if len(cols) < 2 or len(head) != 1:
            raise DatasetError(f"record {lineno}: expected word<TAB>translation[<TAB>...]")
        for col in cols[1:]:
            item = _translation_item(col)
            if item is None:
                if col.strip():
                    logger.debug("record %d: skipping long translation %r", lineno, col)
                continue
            table[head[0]].add(item)
    # every dictionary translation is equally valid: ties break by surface
    return {w: [(t, 1.0) for t in sorted(ts)] for w, ts in table.items() if ts}


def _load_word_align(fh, c_tr: int) -> Dict[str, List[Tuple[str, float]]]:
    table: Dict[str, Dict[str, float]] = defaultdict(dict)
    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise DatasetError(f"record {lineno}: expected src<TAB>dst<TAB>prob")
        try:
            prob = float(cols[2])
        except ValueError:
            raise DatasetError(f"record {lineno}: probability {cols[2]!r} is not a number") from None
        if not 0.0 <= prob <= 1.0 or math.isnan(prob):
            raise DatasetError(f"record {lineno}: probability {prob} outside [0, 1]")
        src, dst = normalize(cols[0]), normalize(cols[1])
        if len(src) != 1 or len(dst) != 1:
            raise DatasetError(f"record {lineno}: src and dst must be single tokens")
        if src[0] in ("null", "<eps>") or dst[0] in ("null", "<eps>"):
            continue
        prev = table[src[0]].get(dst[0], -1.0)
        table[src[0]][dst[0]] = max(prev, prob)
    out = {}
    for w, cands in table.items():
        ranked = sorted(cands.items(), key=lambda kv: (-kv[1], kv[0]))[:c_tr]
        out[w] = [(t, round(p, SCORE_DIGITS)) for t, p in ranked]
    return out


def load_baseline_lexicon(
    path,
    kind: str,
    c_tr: int = 10,
    source_lang: str = "src",
    target_lang: str = "dst",
) -> Lexicon:
    """Wrap a static dictionary or an aligner's probability table as a :class:`Lexicon`.

    ``std-dict`` keeps every listed translation; ``word-align`` keeps the
    ``c_tr`` most probable. Error rates are 0 (no filtering) and phrase
    identification is off.
    """
    with open(path, encoding="utf-8") as fh:
        if kind == "std-dict":
            lists = _load_std_dict(fh)
        elif kind == "word-align":
            lists = _load_word_align(fh, c_tr)
        else:
            raise ValueError(f"unknown baseline kind {kind!r}")
    entries = {w: LexiconEntry(w, tuple(trans), 0.0, 0) for w, trans in sorted(lists.items())}
    config = BuildConfig(c_tr=c_tr, phrases_src=False, phrases_dst=False)
    return Lexicon(source_lang, target_lang, entries, config, None, None, f"baseline:{kind}")
