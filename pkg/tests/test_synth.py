import json

import pytest

from transcheck.detect import CheckConfig, check
from transcheck.evaluation import load_baseline_lexicon, load_eval_dataset
from transcheck.lexicon import BuildConfig, build_lexicon, relevance, accumulate
from transcheck.synth import SynthSpec, SynthSpecError, generate, load_synth_spec

EXACT = BuildConfig(c_tr=1, c_w=5, phrases_src=False)


def test_deterministic(tmp_path):
    spec = SynthSpec(corpus_size=200, eval_size=50, seed=9, plant_under_rate=0.2, plant_over_rate=0.2)
    a = generate(spec).write(tmp_path / "a")
    b = generate(spec).write(tmp_path / "b")
    for key in a:
        assert open(a[key], "rb").read() == open(b[key], "rb").read()


def test_different_seeds_differ():
    a = generate(SynthSpec(corpus_size=50, eval_size=0, seed=1))
    b = generate(SynthSpec(corpus_size=50, eval_size=0, seed=2))
    assert a.train != b.train


def test_no_planting_means_no_labels():
    res = generate(SynthSpec(corpus_size=10, eval_size=200, seed=3))
    assert not any(r.label_under or r.label_over for r in res.eval)


def test_training_pairs_are_faithful():
    res = generate(SynthSpec(corpus_size=300, eval_size=0, seed=4))
    for p in res.train:
        assert list(p.target) == [res.dictionary[w] for w in p.source]


def test_labels_match_edits():
    res = generate(SynthSpec(corpus_size=10, eval_size=300, seed=5, plant_under_rate=0.3, plant_over_rate=0.3))
    assert any(r.label_under for r in res.eval) and any(r.label_over for r in res.eval)
    for r in res.eval:
        expected = [res.dictionary[w] for w in r.pair.source]
        tgt = list(r.pair.target)
        if r.label_under:
            (w,) = r.under_tokens
            assert r.pair.source.count(w) == 1 and res.dictionary[w] not in tgt
        if r.label_over:
            (t,) = r.over_tokens
            assert any(a == b == t for a, b in zip(tgt, tgt[1:]))
        if not r.label_under and not r.label_over:
            assert tgt == expected


def test_lexicon_recovers_dictionary():
    res = generate(SynthSpec(vocab_size=50, corpus_size=1000, eval_size=0, seed=6))
    lex = build_lexicon(res.train, EXACT)
    supported = [w for w in res.dictionary if w in lex.entries]
    assert len(supported) == 50
    assert all(lex.entries[w].targets[0] == res.dictionary[w] for w in supported)


def test_true_translation_is_most_relevant():
    res = generate(SynthSpec(vocab_size=30, corpus_size=400, eval_size=0, seed=7))
    store = accumulate(res.train, (None, None), EXACT)
    for w, t in res.dictionary.items():
        best = relevance(store, w, t)
        for d in store.joint[w]:
            assert relevance(store, w, d) <= best


def test_planted_soundness():
    res = generate(SynthSpec(corpus_size=1000, eval_size=300, seed=8, plant_under_rate=0.15, plant_over_rate=0.15))
    lex = build_lexicon(res.train, EXACT)
    for r in res.eval:
        report = check(r.pair, lex, CheckConfig())
        if r.label_under:
            assert [v.item for v in report.under] == list(r.under_tokens)
        else:
            assert not report.has_under
        if r.label_over:
            assert [v.item for v in report.over] == list(r.over_tokens)
        else:
            assert not report.has_over


def test_fan_in_dictionary():
    res = generate(SynthSpec(vocab_size=20, corpus_size=10, eval_size=0, fan_in=2))
    assert len(set(res.dictionary.values())) == 10


def test_zipf_skews_frequencies():
    res = generate(SynthSpec(vocab_size=50, corpus_size=500, eval_size=0, zipf=1.2, seed=1))
    counts = {}
    for p in res.train:
        for w in p.source:
            counts[w] = counts.get(w, 0) + 1
    assert counts["s000"] > 5 * counts.get("s049", 0)


def test_implicit_words_are_dropped():
    res = generate(SynthSpec(corpus_size=200, eval_size=0, implicit_fraction=0.2, seed=2))
    assert len(res.implicit) == 10
    for p in res.train:
        for w in set(p.source) & set(res.implicit):
            if p.source[0] != w:
                assert res.dictionary[w] not in p.target or any(
                    res.dictionary[x] == res.dictionary[w] for x in p.source if x not in res.implicit
                )


@pytest.mark.parametrize(
    "kwargs",
    [
        {"vocab_size": 5},
        {"corpus_size": 0},
        {"plant_under_rate": 1.5},
        {"min_len": 1, "max_len": 1, "plant_over_rate": 0.1},
        {"implicit_strength": (0.8, 0.2)},
        {"min_len": 5, "max_len": 3},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(SynthSpecError):
        generate(SynthSpec(**kwargs))


def test_written_files_load(tmp_path):
    res = generate(SynthSpec(corpus_size=100, eval_size=20, seed=1, plant_under_rate=0.5))
    paths = res.write(tmp_path)
    ds = load_eval_dataset(paths["dataset"])
    assert len(ds) == 20
    assert sum(r.label_under for r in ds) == sum(r.label_under for r in res.eval)
    dict_lex = load_baseline_lexicon(paths["dictionary"], "std-dict")
    assert dict_lex.entries["s000"].targets == (res.dictionary["s000"],)
    meta = json.load(open(paths["spec"]))
    assert meta["spec"]["seed"] == 1


def test_load_spec_toml_and_json(tmp_path):
    (tmp_path / "s.toml").write_text("[synth]\nvocab_size = 20\nseed = 3\nimplicit_strength = [0.1, 0.5]\n")
    spec = load_synth_spec(tmp_path / "s.toml")
    assert spec.vocab_size == 20 and spec.implicit_strength == (0.1, 0.5)
    (tmp_path / "s.json").write_text('{"corpus_size": 7}')
    assert load_synth_spec(tmp_path / "s.json").corpus_size == 7
    (tmp_path / "bad.json").write_text('{"colour": 7}')
    with pytest.raises(SynthSpecError):
        load_synth_spec(tmp_path / "bad.json")
