"""Learning word/phrase translation lexicons from a parallel corpus.

Each training pair is treated as a *user* of an item-based collaborative
filter; every word or phrase on either side is an item the user rated 1.
The implied binary task-by-item matrix is never materialized: cosine
similarity between a source item and a target item needs only

* the number of tasks containing both (the dot product), and
* the number of tasks containing each (the squared norms),

which :class:`CooccurrenceStore` keeps as sparse counts.

A lexicon is then built in two passes: the first ranks, for every source
item, the ``c_tr`` most relevant target items; the second replays the
training corpus and records how often none of those translations shows up
(the item's error rate).
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .corpus import JOINER, SentencePair
from .phrases import (
    PhraseConfig,
    PhraseInventory,
    count_keyword_pairs,
    inventory_from_counts,
    itemize,
    presence_set,
)

logger = logging.getLogger(__name__)

FORMAT_NAME = "transcheck-lexicon"
FORMAT_VERSION = 1
SCORE_DIGITS = 6


class UnknownItemError(KeyError):
    """An item never seen in the training corpus."""


class LexiconFormatError(ValueError):
    pass


@dataclass(frozen=True)
class BuildConfig:
    c_tr: int = 10
    c_ph: int = 10
    d_ph: int = 1
    c_w: int = 5
    e_th_default: float = 0.2
    phrases_src: bool = True
    phrases_dst: bool = False

    def __post_init__(self):
        if self.c_tr < 1:
            raise ValueError("c_tr must be >= 1")
        if self.c_w < 1:
            raise ValueError("c_w must be >= 1")
        if not 0.0 < self.e_th_default <= 1.0:
            raise ValueError("e_th_default must lie in (0, 1]")
        # delegate d_ph / c_ph validation
        self.phrase_config

    @property
    def phrase_config(self) -> PhraseConfig:
        return PhraseConfig(d_ph=self.d_ph, c_ph=self.c_ph)

    @classmethod
    def from_dict(cls, data: dict) -> "BuildConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


class CooccurrenceStore:
    """Binary per-task presence counts.

    ``src_counts[s]`` is the number of tasks whose source side contains
    ``s`` and ``joint[s][d]`` the number whose source contains ``s`` *and*
    whose target contains ``d``. Repetition inside one task counts once.
    """

    def __init__(self):
        self.src_counts: Counter = Counter()
        self.dst_counts: Counter = Counter()
        self.joint: Dict[str, Counter] = defaultdict(Counter)
        self.total_tasks = 0

    def add_task(self, src_items: Iterable[str], dst_items: Iterable[str]) -> None:
        src_set = set(src_items)
        dst_set = set(dst_items)
        self.total_tasks += 1
        self.src_counts.update(src_set)
        self.dst_counts.update(dst_set)
        for s in src_set:
            self.joint[s].update(dst_set)

    def merge(self, other: "CooccurrenceStore") -> "CooccurrenceStore":
        """Fold `other` into this store (shard accumulation)."""
        self.total_tasks += other.total_tasks
        self.src_counts.update(other.src_counts)
        self.dst_counts.update(other.dst_counts)
        for s, row in other.joint.items():
            self.joint[s].update(row)
        return self

    def joint_count(self, ws: str, wd: str) -> int:
        row = self.joint.get(ws)
        return row.get(wd, 0) if row else 0

    def relevance(self, ws: str, wd: str) -> float:
        return relevance(self, ws, wd)

    def reversed(self) -> "CooccurrenceStore":
        """The same counts with source and target roles swapped."""
        rev = CooccurrenceStore()
        rev.total_tasks = self.total_tasks
        rev.src_counts = Counter(self.dst_counts)
        rev.dst_counts = Counter(self.src_counts)
        for s, row in self.joint.items():
            for d, c in row.items():
                rev.joint[d][s] = c
        return rev


def accumulate(
    corpus: Iterable[SentencePair],
    inventories: Tuple[Optional[PhraseInventory], Optional[PhraseInventory]],
    config: BuildConfig,
) -> CooccurrenceStore:
    src_inv, dst_inv = inventories
    pc = config.phrase_config
    store = CooccurrenceStore()
    for pair in corpus:
        src = itemize(pair.source, src_inv, pc).items()
        dst = itemize(pair.target, dst_inv, pc).items()
        store.add_task(src, dst)
    return store


def relevance(store: CooccurrenceStore, ws: str, wd: str) -> float:
    """Cosine similarity of the task-presence vectors of `ws` and `wd`."""
    ns = store.src_counts.get(ws, 0)
    nd = store.dst_counts.get(wd, 0)
    if ns == 0:
        raise UnknownItemError(ws)
    if nd == 0:
        raise UnknownItemError(wd)
    return store.joint_count(ws, wd) / math.sqrt(ns * nd)


def build_translation_lists(store: CooccurrenceStore, config: BuildConfig) -> Dict[str, List[Tuple[str, float]]]:
    """Top-``c_tr`` target items per source item, by relevance then surface.

    Items (on either side) present in fewer than ``c_w`` tasks are ignored.
    Scores are rounded to the precision used on disk.
    """
    c_w = config.c_w
    dst_counts = store.dst_counts
    lists: Dict[str, List[Tuple[str, float]]] = {}
    for ws in sorted(store.src_counts):
        ns = store.src_counts[ws]
        if ns < c_w:
            continue
        scored = []
        for wd, joint in store.joint[ws].items():
            nd = dst_counts[wd]
            if nd < c_w or joint <= 0:
                continue
            scored.append((-(joint / math.sqrt(ns * nd)), wd))
        if not scored:
            continue
        scored.sort()
        lists[ws] = [(wd, round(-neg, SCORE_DIGITS)) for neg, wd in scored[: config.c_tr]]
    return lists


@dataclass(frozen=True)
class LexiconEntry:
    item: str
    translations: Tuple[Tuple[str, float], ...]
    error_rate: float = 0.0
    support: int = 0

    @property
    def targets(self) -> Tuple[str, ...]:
        return tuple(t for t, _ in self.translations)


@dataclass
class Lexicon:
    """Translation lists for every source item, plus the reverse index."""

    source_lang: str
    target_lang: str
    entries: Dict[str, LexiconEntry]
    config: BuildConfig = field(default_factory=BuildConfig)
    src_inventory: Optional[PhraseInventory] = None
    dst_inventory: Optional[PhraseInventory] = None
    built: str = ""
    reverse_index: Dict[str, Set[str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rev: Dict[str, Set[str]] = defaultdict(set)
        for item, entry in self.entries.items():
            for target, _ in entry.translations:
                rev[target].add(item)
        self.reverse_index = dict(rev)

    @property
    def direction(self) -> Tuple[str, str]:
        return (self.source_lang, self.target_lang)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, item: object) -> bool:
        return item in self.entries

    def get(self, item: str) -> Optional[LexiconEntry]:
        return self.entries.get(item)

    def itemize_source(self, tokens):
        return itemize(tokens, self.src_inventory, self.config.phrase_config)


def compute_error_rates(corpus: Iterable[SentencePair], draft: Lexicon) -> Dict[str, float]:
    """Fraction of training pairs containing an item whose target lacks all its translations.

    Items of `draft` that never occur in `corpus` get no rate.
    """
    d_ph = draft.config.d_ph
    targets = {item: entry.targets for item, entry in draft.entries.items()}
    seen: Counter = Counter()
    missed: Counter = Counter()
    for pair in corpus:
        src_items = [i for i in draft.itemize_source(pair.source).distinct_items() if i in targets]
        if not src_items:
            continue
        present = presence_set(pair.target, d_ph)
        for item in src_items:
            seen[item] += 1
            if not any(t in present for t in targets[item]):
                missed[item] += 1
    return {item: missed[item] / n for item, n in seen.items()}


def _reiterable(corpus):
    # one-shot iterators are materialized; CorpusReader and lists re-iterate
    if iter(corpus) is corpus:
        return list(corpus)
    return corpus


def build_phrase_inventories(corpus, config: BuildConfig) -> Tuple[Optional[PhraseInventory], Optional[PhraseInventory]]:
    if not (config.phrases_src or config.phrases_dst):
        return None, None
    src_counts: Counter = Counter()
    dst_counts: Counter = Counter()
    for pair in corpus:
        if config.phrases_src:
            src_counts.update(count_keyword_pairs([pair.source], config.d_ph))
        if config.phrases_dst:
            dst_counts.update(count_keyword_pairs([pair.target], config.d_ph))
    pc = config.phrase_config
    return (
        inventory_from_counts(src_counts, pc) if config.phrases_src else None,
        inventory_from_counts(dst_counts, pc) if config.phrases_dst else None,
    )


def build_lexicon(
    corpus: Iterable[SentencePair],
    config: BuildConfig = BuildConfig(),
    source_lang: str = "src",
    target_lang: str = "dst",
    built: str = "",
) -> Lexicon:
    """Run the full three-pass build: phrase inventories, relevance lists, error rates."""
    corpus = _reiterable(corpus)
    src_inv, dst_inv = build_phrase_inventories(corpus, config)
    logger.info(
        "phrase inventories: source=%s target=%s",
        len(src_inv) if src_inv is not None else "off",
        len(dst_inv) if dst_inv is not None else "off",
    )
    store = accumulate(corpus, (src_inv, dst_inv), config)
    lists = build_translation_lists(store, config)
    logger.info("%d tasks, %d source items with translation lists", store.total_tasks, len(lists))
    draft_entries = {
        item: LexiconEntry(item, tuple(trans), 0.0, store.src_counts[item]) for item, trans in lists.items()
    }
    draft = Lexicon(source_lang, target_lang, draft_entries, config, src_inv, dst_inv, built)
    rates = compute_error_rates(corpus, draft)
    entries = {
        item: LexiconEntry(item, e.translations, round(rates[item], SCORE_DIGITS), e.support)
        for item, e in draft_entries.items()
        if item in rates
    }
    return Lexicon(source_lang, target_lang, entries, config, src_inv, dst_inv, built)


# -- persistence ------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.{SCORE_DIGITS}f}"


def save_lexicon(lexicon: Lexicon, path) -> None:
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "direction": [lexicon.source_lang, lexicon.target_lang],
        "config": asdict(lexicon.config),
        "built": lexicon.built,
        "phrases": {
            "source": lexicon.src_inventory is not None,
            "target": lexicon.dst_inventory is not None,
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("#" + json.dumps(header, sort_keys=True, ensure_ascii=False) + "\n")
        for side, inv in (("source", lexicon.src_inventory), ("target", lexicon.dst_inventory)):
            if inv is None:
                continue
            for item in sorted(inv.counts):
                fh.write(f"@phrase\t{side}\t{item}\t{inv.counts[item]}\n")
        for item in sorted(lexicon.entries):
            e = lexicon.entries[item]
            cols = [item, str(e.support), _fmt(e.error_rate)]
            cols.extend(f"{t}:{_fmt(s)}" for t, s in e.translations)
            fh.write("\t".join(cols) + "\n")


def _check_item(item: str, lineno: int) -> None:
    if not item or any(ch.isspace() for ch in item):
        raise LexiconFormatError(f"record {lineno}: bad item {item!r}")
    if item.startswith(JOINER) or item.endswith(JOINER) or item.count(JOINER) > 1:
        raise LexiconFormatError(f"record {lineno}: bad phrase item {item!r}")


def _parse_unit(text: str, lineno: int, what: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise LexiconFormatError(f"record {lineno}: {what} {text!r} is not a number") from None
    if not 0.0 <= x <= 1.0:
        raise LexiconFormatError(f"record {lineno}: {what} {x} outside [0, 1]")
    return x


def load_lexicon(path) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].startswith("#"):
        raise LexiconFormatError("record 1: missing header")
    try:
        header = json.loads(lines[0][1:])
    except json.JSONDecodeError as exc:
        raise LexiconFormatError(f"record 1: bad header ({exc})") from None
    if header.get("format") != FORMAT_NAME:
        raise LexiconFormatError(f"record 1: not a lexicon file (format={header.get('format')!r})")
    if header.get("version") != FORMAT_VERSION:
        raise LexiconFormatError(
            f"record 1: version mismatch (file {header.get('version')!r}, expected {FORMAT_VERSION})"
        )
    try:
        source_lang, target_lang = header["direction"]
        config = BuildConfig.from_dict(header.get("config", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise LexiconFormatError(f"record 1: bad header ({exc})") from None
    flags = header.get("phrases", {})
    inv_counts = {
        "source": {} if flags.get("source") else None,
        "target": {} if flags.get("target") else None,
    }
    entries: Dict[str, LexiconEntry] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cols = line.split("\t")
        if cols[0] == "@phrase":
            if len(cols) != 4 or cols[1] not in inv_counts:
                raise LexiconFormatError(f"record {lineno}: malformed phrase record")
            _check_item(cols[2], lineno)
            if inv_counts[cols[1]] is None:
                inv_counts[cols[1]] = {}
            try:
                inv_counts[cols[1]][cols[2]] = int(cols[3])
            except ValueError:
                raise LexiconFormatError(f"record {lineno}: bad phrase count {cols[3]!r}") from None
            continue
        if len(cols) < 3:
            raise LexiconFormatError(f"record {lineno}: expected item, support, error rate")
        item = cols[0]
        _check_item(item, lineno)
        if item in entries:
            raise LexiconFormatError(f"record {lineno}: duplicate entry {item!r}")
        try:
            support = int(cols[1])
        except ValueError:
            raise LexiconFormatError(f"record {lineno}: bad support {cols[1]!r}") from None
        error_rate = _parse_unit(cols[2], lineno, "error rate")
        translations = []
        for col in cols[3:]:
            target, sep, score = col.rpartition(":")
            if not sep:
                raise LexiconFormatError(f"record {lineno}: translation {col!r} lacks a score")
            _check_item(target, lineno)
            translations.append((target, _parse_unit(score, lineno, "score")))
        if any(a[1] < b[1] for a, b in zip(translations, translations[1:])):
            raise LexiconFormatError(f"record {lineno}: translations not sorted by score")
        entries[item] = LexiconEntry(item, tuple(translations), error_rate, support)
    pc = config.phrase_config
    src_inv = PhraseInventory(pc, inv_counts["source"]) if inv_counts["source"] is not None else None
    dst_inv = PhraseInventory(pc, inv_counts["target"]) if inv_counts["target"] is not None else None
    return Lexicon(source_lang, target_lang, entries, config, src_inv, dst_inv, header.get("built", ""))
