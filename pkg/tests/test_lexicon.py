import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transcheck.corpus import JOINER, SentencePair, pairs_from_lines
from transcheck.lexicon import (
    BuildConfig,
    CooccurrenceStore,
    Lexicon,
    LexiconEntry,
    LexiconFormatError,
    UnknownItemError,
    accumulate,
    build_lexicon,
    build_translation_lists,
    compute_error_rates,
    load_lexicon,
    relevance,
    save_lexicon,
)

from conftest import fixture_path

NO_PHRASES = BuildConfig(c_w=1, phrases_src=False, phrases_dst=False)


def materialized_cosine(pairs, ws, wd):
    """Cosine over an explicit binary task x item matrix."""
    src_vocab = sorted({t for p in pairs for t in p.source})
    dst_vocab = sorted({t for p in pairs for t in p.target})
    cols = {("s", w): i for i, w in enumerate(src_vocab)}
    cols.update({("d", w): len(src_vocab) + i for i, w in enumerate(dst_vocab)})
    m = np.zeros((len(pairs), len(cols)))
    for k, p in enumerate(pairs):
        for t in p.source:
            m[k, cols[("s", t)]] = 1
        for t in p.target:
            m[k, cols[("d", t)]] = 1
    a, b = m[:, cols[("s", ws)]], m[:, cols[("d", wd)]]
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def random_corpus(rng, n_pairs, vocab):
    src = [f"s{i}" for i in range(vocab)]
    dst = [f"d{i}" for i in range(vocab)]
    pairs = []
    for k in range(n_pairs):
        s = [rng.choice(src) for _ in range(rng.randint(1, 8))]
        t = [rng.choice(dst) for _ in range(rng.randint(1, 8))]
        pairs.append(SentencePair(k, tuple(s), tuple(t)))
    return pairs


def test_toy_counts(toy_pairs):
    store = accumulate(toy_pairs, (None, None), NO_PHRASES)
    assert store.src_counts["i"] == 3
    assert store.dst_counts["我"] == 3
    assert store.src_counts["have"] == 3
    assert store.dst_counts["。"] == 4
    assert store.joint_count("i", "我") == 3
    assert store.total_tasks == 4


def test_toy_relevance(toy_pairs):
    store = accumulate(toy_pairs, (None, None), NO_PHRASES)
    assert relevance(store, "i", "我") == 1.0
    assert relevance(store, "have", "有") == pytest.approx(2 / (math.sqrt(3) * math.sqrt(2)), abs=1e-12)
    assert relevance(store, "have", "有") == pytest.approx(0.8165, abs=5e-5)
    assert relevance(store, "love", "有") == 0.0


def test_unknown_item(toy_pairs):
    store = accumulate(toy_pairs, (None, None), NO_PHRASES)
    with pytest.raises(UnknownItemError):
        relevance(store, "dog", "我")
    with pytest.raises(UnknownItemError):
        relevance(store, "i", "狗")


def test_repetition_counts_once():
    pairs = pairs_from_lines(["I I am\t我 我 是"])
    store = accumulate(pairs, (None, None), NO_PHRASES)
    assert store.src_counts["i"] == 1
    assert store.joint_count("i", "我") == 1


def test_empty_corpus():
    store = accumulate([], (None, None), NO_PHRASES)
    assert store.total_tasks == 0 and not store.src_counts and not store.dst_counts


@pytest.mark.parametrize("seed", range(5))
def test_relevance_matches_materialized_matrix(seed):
    rng = random.Random(seed)
    pairs = random_corpus(rng, 60, 25)
    store = accumulate(pairs, (None, None), NO_PHRASES)
    for ws in list(store.src_counts)[:10]:
        for wd in list(store.dst_counts)[:10]:
            assert abs(relevance(store, ws, wd) - materialized_cosine(pairs, ws, wd)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_relevance_one_iff_same_task_set(seed):
    rng = random.Random(seed)
    pairs = random_corpus(rng, 15, 6)
    store = accumulate(pairs, (None, None), NO_PHRASES)
    tasks_s = {w: {p.id for p in pairs if w in p.source} for w in store.src_counts}
    tasks_d = {w: {p.id for p in pairs if w in p.target} for w in store.dst_counts}
    for ws in tasks_s:
        for wd in tasks_d:
            assert (relevance(store, ws, wd) == 1.0) == (tasks_s[ws] == tasks_d[wd])


def test_symmetry_under_reversal():
    pairs = random_corpus(random.Random(3), 50, 15)
    store = accumulate(pairs, (None, None), NO_PHRASES)
    rev = store.reversed()
    for ws in store.src_counts:
        for wd in store.dst_counts:
            assert relevance(store, ws, wd) == relevance(rev, wd, ws)


def test_merge_equals_single_pass():
    pairs = random_corpus(random.Random(4), 80, 20)
    whole = accumulate(pairs, (None, None), NO_PHRASES)
    merged = accumulate(pairs[:30], (None, None), NO_PHRASES).merge(accumulate(pairs[30:], (None, None), NO_PHRASES))
    assert merged.total_tasks == whole.total_tasks
    assert merged.src_counts == whole.src_counts and merged.dst_counts == whole.dst_counts
    assert {k: dict(v) for k, v in merged.joint.items()} == {k: dict(v) for k, v in whole.joint.items()}


@given(st.integers(0, 1000))
def test_adding_shared_task_never_decreases_joint(seed):
    pairs = random_corpus(random.Random(seed), 10, 5)
    store = accumulate(pairs, (None, None), NO_PHRASES)
    before = store.joint_count("s0", "d0")
    store.add_task(["s0", "s1"], ["d0"])
    assert store.joint_count("s0", "d0") == before + 1


def test_joint_bounded_by_presence():
    pairs = random_corpus(random.Random(5), 100, 20)
    store = accumulate(pairs, (None, None), NO_PHRASES)
    for s, row in store.joint.items():
        for d, c in row.items():
            assert 0 < c <= min(store.src_counts[s], store.dst_counts[d])


def test_translation_list_length_bounded():
    pairs = random_corpus(random.Random(6), 200, 40)
    store = accumulate(pairs, (None, None), NO_PHRASES)
    lists = build_translation_lists(store, BuildConfig(c_tr=10, c_w=1))
    assert lists and all(len(v) <= 10 for v in lists.values())
    assert any(len(v) == 10 for v in lists.values())
    for trans in lists.values():
        scores = [s for _, s in trans]
        assert scores == sorted(scores, reverse=True)
        assert all(0.0 <= s <= 1.0 for s in scores)


def test_single_cooccurring_target():
    store = CooccurrenceStore()
    store.add_task(["cat"], ["猫"])
    assert build_translation_lists(store, BuildConfig(c_w=1)) == {"cat": [("猫", 1.0)]}


def test_ties_break_lexicographically():
    store = CooccurrenceStore()
    for _ in range(3):
        store.add_task(["cat"], ["zz", "aa", "mm"])
    lists = build_translation_lists(store, BuildConfig(c_w=1))
    assert [t for t, _ in lists["cat"]] == ["aa", "mm", "zz"]


def test_c_w_applies_to_both_sides():
    store = CooccurrenceStore()
    for _ in range(5):
        store.add_task(["cat"], ["猫"])
    store.add_task(["cat", "rare"], ["稀"])
    lists = build_translation_lists(store, BuildConfig(c_w=5))
    assert "rare" not in lists
    assert [t for t, _ in lists["cat"]] == ["猫"]


def _error_rate_corpus():
    lines = [f"the cat sat\t猫 坐 x{i}" for i in range(4)]
    lines += [f"the cat ate\t猫 吃 z{i}" for i in range(3)]
    lines += [f"a cat ran\t跑 y{i}" for i in range(3)]
    return pairs_from_lines(lines)


def test_error_rate_three_in_ten():
    pairs = _error_rate_corpus()
    config = BuildConfig(c_tr=1, c_w=2, phrases_src=False)
    lex = build_lexicon(pairs, config)
    assert lex.entries["cat"].targets == ("猫",)
    # independent count: pairs with 'cat' whose target lacks every listed translation
    containing = [p for p in pairs if "cat" in p.source]
    missing = [p for p in containing if not set(lex.entries["cat"].targets) & set(p.target)]
    assert len(containing) == 10 and len(missing) == 3
    assert lex.entries["cat"].error_rate == pytest.approx(0.3)
    assert lex.entries["cat"].support == 10


def test_error_rate_zero_when_always_translated(toy_pairs):
    lex = build_lexicon(toy_pairs, NO_PHRASES)
    assert lex.entries["i"].error_rate == 0.0


def test_compute_error_rates_skips_absent_items():
    draft = Lexicon("a", "b", {"ghost": LexiconEntry("ghost", (("鬼", 1.0),))}, NO_PHRASES)
    assert compute_error_rates(pairs_from_lines(["x\ty"]), draft) == {}


def test_error_rate_phrase_translation_match():
    draft = Lexicon("a", "b", {"w": LexiconEntry("w", (("coffee" + JOINER + "table", 1.0),))}, NO_PHRASES)
    pairs = pairs_from_lines(["w\tcoffee big table", "w\ttable coffee"])
    assert compute_error_rates(pairs, draft) == {"w": 0.5}


def test_reverse_index_is_inversion():
    lex = build_lexicon(random_corpus(random.Random(8), 150, 30), BuildConfig(c_w=2, c_tr=4, phrases_src=False))
    for s, e in lex.entries.items():
        for d in e.targets:
            assert s in lex.reverse_index[d]
    for d, sources in lex.reverse_index.items():
        for s in sources:
            assert d in lex.entries[s].targets


def test_phrase_items_get_entries():
    lines = ["new york is big\t纽约 很 大"] * 6 + ["york is old\t约克 很 老"] * 3 + ["new car\t新 车"] * 3
    lines += ["the house is big\t房子 很 大"] * 3
    lex = build_lexicon(pairs_from_lines(lines), BuildConfig(c_w=3, c_ph=5, c_tr=3))
    ny = "new" + JOINER + "york"
    assert ny in lex.src_inventory
    assert lex.entries[ny].targets[0] == "纽约"


# -- persistence -------------------------------------------------------------


def _small_lexicon():
    lines = ["new york is big\t纽约 很 大"] * 6 + ["york is old\t约克 很 老"] * 3
    return build_lexicon(pairs_from_lines(lines), BuildConfig(c_w=3, c_ph=5, c_tr=3), "en", "zh", "2020-01-01T00:00:00Z")


def test_round_trip(tmp_path):
    lex = _small_lexicon()
    path = tmp_path / "l.lex"
    save_lexicon(lex, path)
    back = load_lexicon(path)
    assert back == lex
    assert back.reverse_index == lex.reverse_index
    assert list(back.entries) == sorted(lex.entries)


def test_round_trip_three_entries(tmp_path):
    entries = {
        w: LexiconEntry(w, ((f"{w}_1", 0.9), (f"{w}_2", 0.5)), 0.125, 7) for w in ("alpha", "beta", "gamma")
    }
    lex = Lexicon("en", "de", entries, BuildConfig(phrases_src=False), built="x")
    save_lexicon(lex, tmp_path / "l.lex")
    assert load_lexicon(tmp_path / "l.lex") == lex


def test_save_is_deterministic(tmp_path):
    save_lexicon(_small_lexicon(), tmp_path / "a.lex")
    save_lexicon(_small_lexicon(), tmp_path / "b.lex")
    assert (tmp_path / "a.lex").read_bytes() == (tmp_path / "b.lex").read_bytes()


def test_load_zh_en_fixture():
    lex = load_lexicon(fixture_path("omission_zh_en.lex"))
    assert lex.direction == ("zh", "en")
    assert len(lex) == 2
    mama = lex.entries["妈妈"]
    assert mama.error_rate == 0.04116
    assert mama.targets == ("mother", "mom", "mum", "mama", "mommy", "moms", "mothers", "mummy", "my", "her")
    assert len(lex.entries["桌"].translations) == 10
    assert lex.entries["桌"].error_rate == 0.07293


def _write(tmp_path, text):
    src = open(fixture_path("omission_zh_en.lex"), encoding="utf-8").read().split("\n")[0]
    path = tmp_path / "bad.lex"
    path.write_text(src + "\n" + text, encoding="utf-8")
    return path


def test_duplicate_entry_fatal(tmp_path):
    path = _write(tmp_path, "猫\t1\t0.1\tcat:0.5\n猫\t1\t0.1\tcat:0.5\n")
    with pytest.raises(LexiconFormatError, match="record 3: duplicate entry"):
        load_lexicon(path)


@pytest.mark.parametrize(
    "body",
    [
        "猫\tx\t0.1\tcat:0.5\n",
        "猫\t1\t1.5\tcat:0.5\n",
        "猫\t1\t0.1\tcat\n",
        "猫\t1\n",
        "猫\t1\t0.1\tcat:0.2\tkitty:0.5\n",
        "@phrase\tsideways\ta␟b\t3\n",
    ],
)
def test_malformed_record_fatal(tmp_path, body):
    with pytest.raises(LexiconFormatError, match="record 2"):
        load_lexicon(_write(tmp_path, body))


def test_version_mismatch(tmp_path):
    path = tmp_path / "v.lex"
    text = open(fixture_path("omission_zh_en.lex"), encoding="utf-8").read().replace('"version": 1', '"version": 99')
    path.write_text(text, encoding="utf-8")
    with pytest.raises(LexiconFormatError, match="version mismatch"):
        load_lexicon(path)


def test_missing_header(tmp_path):
    path = tmp_path / "h.lex"
    path.write_text("猫\t1\t0.1\tcat:0.5\n", encoding="utf-8")
    with pytest.raises(LexiconFormatError, match="record 1"):
        load_lexicon(path)


def test_build_config_validation():
    with pytest.raises(ValueError):
        BuildConfig(c_tr=0)
    with pytest.raises(ValueError):
        BuildConfig(c_w=0)
    with pytest.raises(ValueError):
        BuildConfig(e_th_default=0.0)
    with pytest.raises(ValueError):
        BuildConfig(d_ph=-2)
