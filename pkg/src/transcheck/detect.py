"""Reference-free checks of a translation against a learned lexicon.

Under-translation: a source word/phrase none of whose known translations
appears anywhere in the output. Items whose training error rate exceeds
``e_th`` are exempt, since they are routinely translated implicitly.

Over-translation: a target word (stop words removed) that occurs more often
than the number of source items able to produce it, with at least two of
its occurrences close together.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import SentencePair, StopWordSet, Token
from .lexicon import Lexicon
from .phrases import ItemizedSentence, display, presence_set

#: e_th presets by text genre; ``default`` is the production setting.
E_TH_PRESETS = {"default": 0.2, "news": 0.15, "oral": 0.25}


class DirectionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class CheckConfig:
    e_th: float = 0.2
    proximity_window: int = 10
    stopwords: StopWordSet = field(default_factory=lambda: StopWordSet(""))

    def __post_init__(self):
        if not 0.0 < self.e_th <= 1.0:
            raise ValueError("e_th must lie in (0, 1]")
        if self.proximity_window < 1:
            raise ValueError("proximity_window must be >= 1")

    @classmethod
    def preset(cls, genre: str, **kwargs) -> "CheckConfig":
        return cls(e_th=E_TH_PRESETS[genre], **kwargs)


@dataclass(frozen=True)
class UnderViolation:
    item: str
    translations_checked: Tuple[str, ...]
    error_rate: float

    def to_dict(self) -> dict:
        return {
            "item": display(self.item),
            "translations": [display(t) for t in self.translations_checked],
            "error_rate": self.error_rate,
        }


@dataclass(frozen=True)
class OverViolation:
    item: Token
    count_target: int
    count_source: int
    positions: Tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "item": self.item,
            "count_target": self.count_target,
            "count_source": self.count_source,
            "positions": list(self.positions),
        }


@dataclass(frozen=True)
class ViolationReport:
    task_id: int
    under: Tuple[UnderViolation, ...] = ()
    over: Tuple[OverViolation, ...] = ()

    @property
    def has_under(self) -> bool:
        return bool(self.under)

    @property
    def has_over(self) -> bool:
        return bool(self.over)

    def to_dict(self) -> dict:
        return {
            "id": self.task_id,
            "has_under": self.has_under,
            "has_over": self.has_over,
            "under": [v.to_dict() for v in self.under],
            "over": [v.to_dict() for v in self.over],
        }


def check_direction(lexicon: Lexicon, direction: Optional[Tuple[str, str]]) -> None:
    if direction is not None and tuple(direction) != lexicon.direction:
        raise DirectionMismatchError(
            f"lexicon translates {'->'.join(lexicon.direction)}, task is {'->'.join(direction)}"
        )


def check_under(
    source: ItemizedSentence,
    target: Sequence[Token],
    lexicon: Lexicon,
    config: CheckConfig,
    direction: Optional[Tuple[str, str]] = None,
) -> List[UnderViolation]:
    check_direction(lexicon, direction)
    present = None
    found = []
    entries = lexicon.entries
    for item in source.distinct_items():
        entry = entries.get(item)
        # no entry: no judgment either way
        if entry is None or entry.error_rate > config.e_th:
            continue
        if present is None:
            present = presence_set(target, lexicon.config.d_ph)
        if not any(t in present for t in entry.targets):
            found.append(UnderViolation(item, entry.targets, entry.error_rate))
    return found


def _has_near_pair(positions: Sequence[int], window: int) -> bool:
    return any(b - a <= window for a, b in zip(positions, positions[1:]))


def check_over(
    source: ItemizedSentence,
    target: Sequence[Token],
    lexicon: Lexicon,
    config: CheckConfig,
    direction: Optional[Tuple[str, str]] = None,
) -> List[OverViolation]:
    check_direction(lexicon, direction)
    stop = config.stopwords
    positions: Dict[Token, List[int]] = {}
    for i, tok in enumerate(target):
        if tok in stop:
            continue
        positions.setdefault(tok, []).append(i)
    repeated = [
        (tok, pos) for tok, pos in positions.items() if len(pos) >= 2 and _has_near_pair(pos, config.proximity_window)
    ]
    if not repeated:
        return []
    source_counts = Counter(source.items())
    reverse = lexicon.reverse_index
    found = []
    for tok, pos in repeated:
        producers = reverse.get(tok, ())
        count_s = sum(source_counts[s] for s in producers if s in source_counts)
        if count_s < len(pos):
            found.append(OverViolation(tok, len(pos), count_s, tuple(pos)))
    return found


def check(
    pair: SentencePair,
    lexicon: Lexicon,
    config: CheckConfig,
    direction: Optional[Tuple[str, str]] = None,
) -> ViolationReport:
    check_direction(lexicon, direction)
    source = lexicon.itemize_source(pair.source)
    return ViolationReport(
        pair.id,
        tuple(check_under(source, pair.target, lexicon, config)),
        tuple(check_over(source, pair.target, lexicon, config)),
    )
