"""Keyword-pair phrase identification.

A phrase ``w_1 ... w_n`` is abstracted by an ordered pair of its keywords
``<w_a, w_b>`` (``a < b``) that sit at most ``d_ph`` words apart, i.e.
``b - a <= d_ph + 1``. Pairs seen fewer than ``c_ph`` times in a corpus are
discarded as noise. Surviving pairs become *phrase items* that are checked
alongside ordinary word items.

Phrase items are plain strings, the two keywords joined by
:data:`~transcheck.corpus.JOINER`, so words and phrases can share every
counting and lookup structure.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

from .corpus import JOINER, SentencePair, Token


class KeywordPair(NamedTuple):
    first: Token
    second: Token

    @property
    def item(self) -> str:
        return self.first + JOINER + self.second

    @classmethod
    def from_item(cls, item: str) -> "KeywordPair":
        first, sep, second = item.partition(JOINER)
        if not sep or not first or not second or JOINER in second:
            raise ValueError(f"not a phrase item: {item!r}")
        return cls(first, second)


def is_phrase(item: str) -> bool:
    return JOINER in item


def display(item: str) -> str:
    """Human-readable form of an item (``new␟york`` -> ``new..york``)."""
    return item.replace(JOINER, "..")


@dataclass(frozen=True)
class PhraseConfig:
    d_ph: int = 1
    c_ph: int = 10

    def __post_init__(self):
        if self.d_ph < 0:
            raise ValueError("d_ph must be >= 0")
        if self.c_ph < 1:
            raise ValueError("c_ph must be >= 1")

    @property
    def max_span(self) -> int:
        return self.d_ph + 1


def pair_positions(n: int, d_ph: int) -> Iterator[Tuple[int, int]]:
    """All position pairs ``(a, b)`` with ``a < b`` and ``b - a <= d_ph + 1``."""
    span = d_ph + 1
    for a in range(n):
        for b in range(a + 1, min(n, a + span + 1)):
            yield a, b


def occurrence_count(n: int, d_ph: int) -> int:
    """Closed-form number of keyword-pair occurrences in an n-token sentence."""
    span = d_ph + 1
    if n <= span:
        return n * (n - 1) // 2
    return n * span - span * (span + 1) // 2


def extract_keyword_pairs(sentence: Sequence[Token], config: PhraseConfig) -> Counter:
    """Multiset of keyword pairs occurring in `sentence`.

    Every qualifying pair of positions counts once, so repeated tokens give
    repeated occurrences.
    """
    return Counter(
        KeywordPair(sentence[a], sentence[b]) for a, b in pair_positions(len(sentence), config.d_ph)
    )


@dataclass
class PhraseInventory:
    """Keyword pairs that survived the ``c_ph`` count threshold."""

    config: PhraseConfig
    counts: Dict[str, int] = field(default_factory=dict)

    def __contains__(self, item: object) -> bool:
        return item in self.counts

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self):
        return iter(sorted(self.counts))

    def pairs(self) -> List[KeywordPair]:
        return [KeywordPair.from_item(item) for item in sorted(self.counts)]

    def count(self, pair) -> int:
        key = pair.item if isinstance(pair, KeywordPair) else pair
        return self.counts.get(key, 0)


def count_keyword_pairs(sentences: Iterable[Sequence[Token]], d_ph: int) -> Counter:
    """Occurrence counts of phrase items over many sentences (mergeable with ``+``)."""
    counts: Counter = Counter()
    for tokens in sentences:
        n = len(tokens)
        for a, b in pair_positions(n, d_ph):
            counts[tokens[a] + JOINER + tokens[b]] += 1
    return counts


def build_phrase_inventory(corpus: Iterable[SentencePair], side: str, config: PhraseConfig) -> PhraseInventory:
    """Count keyword pairs on one side of `corpus`, keeping those seen >= ``c_ph`` times."""
    if side not in ("source", "target"):
        raise ValueError(f"side must be 'source' or 'target', got {side!r}")
    counts = count_keyword_pairs((getattr(p, side) for p in corpus), config.d_ph)
    return inventory_from_counts(counts, config)


def inventory_from_counts(counts: Dict[str, int], config: PhraseConfig) -> PhraseInventory:
    kept = {item: c for item, c in counts.items() if c >= config.c_ph}
    return PhraseInventory(config, dict(sorted(kept.items())))


class PhraseOccurrence(NamedTuple):
    item: str
    first_pos: int
    second_pos: int


@dataclass(frozen=True)
class ItemizedSentence:
    """Word tokens of a sentence plus its in-inventory phrase occurrences."""

    words: Tuple[Token, ...]
    phrases: Tuple[PhraseOccurrence, ...] = ()

    def items(self) -> List[str]:
        """Every item occurrence: words in order, then phrases by position."""
        return list(self.words) + [p.item for p in self.phrases]

    def distinct_items(self) -> List[str]:
        return list(dict.fromkeys(self.items()))


def itemize(sentence: Sequence[Token], inventory: Optional[PhraseInventory], config: Optional[PhraseConfig] = None) -> ItemizedSentence:
    words = tuple(sentence)
    if not inventory:
        return ItemizedSentence(words)
    d_ph = (config or inventory.config).d_ph
    counts = inventory.counts
    found = []
    for a, b in pair_positions(len(words), d_ph):
        key = words[a] + JOINER + words[b]
        if key in counts:
            found.append(PhraseOccurrence(key, a, b))
    return ItemizedSentence(words, tuple(found))


def presence_set(tokens: Sequence[Token], d_ph: int) -> Set[str]:
    """Items that count as *present* in a text.

    Words match as tokens; a phrase item matches when both keywords occur in
    order within ``d_ph + 1`` positions. No inventory is consulted, so any
    phrase-shaped translation can be tested for membership.
    """
    present = set(tokens)
    n = len(tokens)
    for a, b in pair_positions(n, d_ph):
        present.add(tokens[a] + JOINER + tokens[b])
    return present
