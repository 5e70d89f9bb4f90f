"""
Omitted and repeated translations
=================================

Two hand-written lexicons are enough to catch a dropped word and a
phrase that got translated four times.
"""

import os

from transcheck import CheckConfig, SentencePair, builtin_stopwords, check, load_lexicon

here = os.path.dirname(os.path.abspath(__file__))
fixtures = os.path.join(here, os.pardir, "tests", "fixtures")

zh_en = load_lexicon(os.path.join(fixtures, "omission_zh_en.lex"))
pair = SentencePair.from_text(
    0,
    "三 姑 给 你 的 红包 给 你 妈妈 了 ， 她 见 了 你 会 给 你 的 。",
    "Third Aunt gave you a red envelope . She'll give it to you when she sees you .",
)
report = check(pair, zh_en, CheckConfig(e_th=0.2))
for v in report.under:
    print(f"under: {v.item} (error rate {v.error_rate}) none of {', '.join(v.translations_checked[:4])}, ...")

# over-translation; the Chinese stop-word list keeps 的 and ， out of it
en_zh = load_lexicon(os.path.join(fixtures, "repetition_en_zh.lex"))
pair = SentencePair.from_text(
    1,
    "U have to admit that something can never be changed , live with it or break with it !",
    "你 必须 承认 ， 有些 东西 是 永远 无法 改变 的 ， 无法 改变 的 ， 无法 改变 的 ， 无法 改变 的 ！",
)
report = check(pair, en_zh, CheckConfig(stopwords=builtin_stopwords("zh")))
for v in report.over:
    print(f"over: {v.item} appears {v.count_target}x, source accounts for {v.count_source}")
