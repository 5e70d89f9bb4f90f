"""Synthetic parallel corpora with a known dictionary and planted failures.

Source words ``s000, s001, ...`` translate word-by-word into target words
``t000, ...``. Some source words can be made *implicit*: their translation
is dropped from a target with a per-word probability, in training and
evaluation alike, mimicking particles that are rarely rendered explicitly.

Evaluation pairs carry exact labels. An under-translation is planted by
deleting the translation of a source word that occurs once; an
over-translation by repeating a translated token right after itself.
Deletions target explicit words only, unless ``plant_on_implicit`` is set:
then an implicit word whose translation happened to be rendered may lose
it too, a true omission that only a permissive ``e_th`` can catch.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from .corpus import SentencePair, write_corpus
from .evaluation import EvalDataset, EvalRecord, save_eval_dataset


class SynthSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    vocab_size: int = 50
    corpus_size: int = 1000
    eval_size: int = 500
    min_len: int = 4
    max_len: int = 10
    seed: int = 0
    plant_under_rate: float = 0.0
    plant_over_rate: float = 0.0
    implicit_fraction: float = 0.0
    implicit_strength: Tuple[float, float] = (1.0, 1.0)
    fan_in: int = 1
    zipf: float = 0.0
    plant_on_implicit: bool = False

    def validate(self) -> None:
        if self.vocab_size < 10:
            raise SynthSpecError("vocab_size must be >= 10")
        if self.corpus_size < 1:
            raise SynthSpecError("corpus_size must be >= 1")
        if self.eval_size < 0:
            raise SynthSpecError("eval_size must be >= 0")
        if not 1 <= self.min_len <= self.max_len:
            raise SynthSpecError("need 1 <= min_len <= max_len")
        for name in ("plant_under_rate", "plant_over_rate", "implicit_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise SynthSpecError(f"{name} must lie in [0, 1]")
        lo, hi = self.implicit_strength
        if not 0.0 <= lo <= hi <= 1.0:
            raise SynthSpecError("implicit_strength must be a range within [0, 1]")
        if self.fan_in < 1:
            raise SynthSpecError("fan_in must be >= 1")
        if self.zipf < 0:
            raise SynthSpecError("zipf exponent must be >= 0")
        if (self.plant_under_rate > 0 or self.plant_over_rate > 0) and self.max_len < 2:
            raise SynthSpecError("planting violations needs sentences of length >= 2")

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        data = dict(data)
        if "implicit_strength" in data:
            data["implicit_strength"] = tuple(data["implicit_strength"])
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise SynthSpecError(f"unknown spec field(s): {', '.join(sorted(unknown))}")
        return cls(**data)


def load_synth_spec(path) -> SynthSpec:
    """Read a spec from a TOML (``.toml``) or JSON file."""
    path = os.fspath(path)
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        data = data.get("synth", data)
    else:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    return SynthSpec.from_dict(data)


@dataclass
class SynthResult:
    spec: SynthSpec
    train: List[SentencePair]
    eval: EvalDataset
    dictionary: Dict[str, str]
    implicit: Dict[str, float] = field(default_factory=dict)

    def write(self, out_dir) -> Dict[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            "corpus": os.path.join(out_dir, "corpus.tsv"),
            "dataset": os.path.join(out_dir, "eval.jsonl"),
            "dictionary": os.path.join(out_dir, "dictionary.tsv"),
            "spec": os.path.join(out_dir, "spec.json"),
        }
        write_corpus(self.train, paths["corpus"])
        save_eval_dataset(self.eval.records, paths["dataset"])
        with open(paths["dictionary"], "w", encoding="utf-8") as fh:
            fh.write("# ground-truth dictionary (std-dict format)\n")
            for s in sorted(self.dictionary):
                fh.write(f"{s}\t{self.dictionary[s]}\n")
        with open(paths["spec"], "w", encoding="utf-8") as fh:
            meta = {"spec": asdict(self.spec), "implicit": self.implicit}
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return paths


class _Generator:
    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.rng = random.Random(spec.seed)
        v = spec.vocab_size
        width = max(3, len(str(v - 1)))
        self.src_words = [f"s{i:0{width}d}" for i in range(v)]
        self.dictionary = {w: f"t{i // spec.fan_in:0{width}d}" for i, w in enumerate(self.src_words)}
        n_implicit = round(spec.implicit_fraction * v)
        lo, hi = spec.implicit_strength
        chosen = sorted(self.rng.sample(self.src_words, n_implicit))
        self.implicit = {w: round(self.rng.uniform(lo, hi), 6) for w in chosen}
        if spec.zipf > 0:
            self.weights = [1.0 / (rank + 1) ** spec.zipf for rank in range(v)]
        else:
            self.weights = None

    def sentence(self) -> List[str]:
        n = self.rng.randint(self.spec.min_len, self.spec.max_len)
        if self.weights is None:
            return [self.rng.choice(self.src_words) for _ in range(n)]
        return self.rng.choices(self.src_words, weights=self.weights, k=n)

    def translate(self, source: List[str]) -> Tuple[List[str], List[int]]:
        """Word-by-word target and, per target token, the source position it renders."""
        target, origin = [], []
        for i, w in enumerate(source):
            p = self.implicit.get(w)
            if p is not None and self.rng.random() < p:
                continue
            target.append(self.dictionary[w])
            origin.append(i)
        if not target:
            # never emit an empty side; fall back to the first explicit rendering
            target, origin = [self.dictionary[source[0]]], [0]
        return target, origin

    def plant(self, source, target, origin):
        spec = self.spec
        under_tok, over_tok = (), ()
        do_under = self.rng.random() < spec.plant_under_rate
        do_over = self.rng.random() < spec.plant_over_rate
        deleted = None
        if do_under and len(target) >= 2:
            src_count = {w: source.count(w) for w in source}
            tgt_count = {t: target.count(t) for t in target}
            cands = [
                j
                for j, t in enumerate(target)
                if src_count[source[origin[j]]] == 1
                and tgt_count[t] == 1
                and (spec.plant_on_implicit or source[origin[j]] not in self.implicit)
            ]
            if cands:
                j = self.rng.choice(cands)
                deleted = target[j]
                under_tok = (source[origin[j]],)
                target = target[:j] + target[j + 1 :]
                origin = origin[:j] + origin[j + 1 :]
        if do_over and target:
            cands = [j for j, t in enumerate(target) if t != deleted]
            if cands:
                j = self.rng.choice(cands)
                over_tok = (target[j],)
                target = target[: j + 1] + [target[j]] + target[j + 1 :]
        return target, under_tok, over_tok


def generate(spec: SynthSpec) -> SynthResult:
    """Deterministically build training pairs, a labeled eval set and the dictionary."""
    spec.validate()
    gen = _Generator(spec)
    train = []
    for k in range(spec.corpus_size):
        source = gen.sentence()
        target, _ = gen.translate(source)
        train.append(SentencePair(k, tuple(source), tuple(target)))
    records = []
    for k in range(spec.eval_size):
        source = gen.sentence()
        target, origin = gen.translate(source)
        target, under_tok, over_tok = gen.plant(source, target, origin)
        records.append(
            EvalRecord(SentencePair(k, tuple(source), tuple(target)), bool(under_tok), bool(over_tok), under_tok, over_tok)
        )
    return SynthResult(spec, train, EvalDataset(records, "synthetic"), gen.dictionary, gen.implicit)
