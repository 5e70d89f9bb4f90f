"""Parallel corpora, tokens and stop-word lists.

Every other module consumes text through this one. Input is assumed to be
pre-tokenized (and, for Chinese, pre-segmented): tokens are separated by
whitespace and the two sides of a pair by a single TAB.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, List, Optional, Tuple

logger = logging.getLogger(__name__)

#: Joins the two keywords of a phrase item; never allowed inside a token.
JOINER = "␟"

Token = str


class CorpusError(ValueError):
    """Raised for unrecoverable input problems."""


def normalize(raw: str) -> List[Token]:
    """Split `raw` on whitespace and case-fold every token.

    Punctuation is kept as ordinary tokens. Scripts without case (CJK)
    are left byte-identical.

    >>> normalize("I Love MY family .")
    ['i', 'love', 'my', 'family', '.']
    """
    return [tok.casefold() for tok in raw.split()]


@dataclass(frozen=True)
class SentencePair:
    """One training example, or one translation task under inspection."""

    id: int
    source: Tuple[Token, ...]
    target: Tuple[Token, ...]

    @classmethod
    def from_text(cls, id: int, source: str, target: str) -> "SentencePair":
        return cls(id, tuple(normalize(source)), tuple(normalize(target)))

    def to_line(self) -> str:
        return " ".join(self.source) + "\t" + " ".join(self.target)


@dataclass(frozen=True)
class StopWordSet:
    language: str
    words: frozenset = field(default_factory=frozenset)

    def __contains__(self, token: object) -> bool:
        return token in self.words

    def __len__(self) -> int:
        return len(self.words)


def parse_pair_line(line: str) -> Tuple[Optional[Tuple[List[Token], List[Token]]], str]:
    """Parse one ``source<TAB>target`` line.

    Returns ``(tokens, "")`` on success and ``(None, reason)`` otherwise.
    """
    line = line.rstrip("\r\n")
    if "\t" not in line:
        return None, "missing tab"
    src, _, dst = line.partition("\t")
    if "\t" in dst:
        return None, "more than one tab"
    if JOINER in line:
        return None, "reserved joiner character"
    source, target = normalize(src), normalize(dst)
    if not source or not target:
        return None, "empty side"
    return (source, target), ""


class CorpusReader:
    """Lazily stream :class:`SentencePair` objects from a TSV file.

    Malformed lines are skipped; ``skipped`` collects ``(line_number, reason)``
    for every line dropped during the most recent iteration. Ids are
    sequential over the pairs actually yielded, starting at 0.
    """

    def __init__(self, path, limit: Optional[int] = None):
        self.path = os.fspath(path)
        self.limit = limit
        self.skipped: List[Tuple[int, str]] = []
        # fail early rather than on first iteration
        if not os.access(self.path, os.R_OK) or os.path.isdir(self.path):
            raise CorpusError(f"cannot read corpus file {self.path!r}")

    def __iter__(self) -> Iterator[SentencePair]:
        self.skipped = []
        if self.limit is not None and self.limit <= 0:
            return
        next_id = 0
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                parsed, reason = parse_pair_line(line)
                if parsed is None:
                    self.skipped.append((lineno, reason))
                    logger.warning("%s:%d skipped (%s)", self.path, lineno, reason)
                    continue
                yield SentencePair(next_id, tuple(parsed[0]), tuple(parsed[1]))
                next_id += 1
                if self.limit is not None and next_id >= self.limit:
                    break


def load_corpus(path, limit: Optional[int] = None) -> CorpusReader:
    return CorpusReader(path, limit)


def pairs_from_lines(lines: Iterable[str]) -> List[SentencePair]:
    """Parse in-memory TSV lines; malformed lines are silently dropped."""
    pairs = []
    for line in lines:
        parsed, _ = parse_pair_line(line)
        if parsed is not None:
            pairs.append(SentencePair(len(pairs), tuple(parsed[0]), tuple(parsed[1])))
    return pairs


def write_corpus(pairs: Iterable[SentencePair], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(pair.to_line() + "\n")
            n += 1
    return n


def _stopwords_from_lines(lines: Iterable[str], language: str) -> StopWordSet:
    words = set()
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.update(normalize(line))
    return StopWordSet(language, frozenset(words))


def load_stopwords(path, language: str = "") -> StopWordSet:
    try:
        with open(path, encoding="utf-8") as fh:
            return _stopwords_from_lines(fh, language)
    except OSError as exc:
        raise CorpusError(f"cannot read stop-word file {os.fspath(path)!r}: {exc}") from exc


def builtin_stopwords(language: str) -> StopWordSet:
    """Stop words shipped with the package (``en`` and ``zh``)."""
    name = f"stopwords_{language}.txt"
    try:
        text = resources.files("transcheck.data").joinpath(name).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CorpusError(f"no built-in stop words for language {language!r}") from None
    return _stopwords_from_lines(text.splitlines(), language)
