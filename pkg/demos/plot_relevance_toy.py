"""
Relevance on a four-pair corpus
===============================

Every source and target word is an item; each sentence pair is a task.
Two items are relevant when they tend to show up in the same tasks.
"""

from transcheck import BuildConfig, SentencePair, accumulate, relevance

pairs = [
    SentencePair.from_text(0, "I have a cat .", "我 有 一 只 猫 。"),
    SentencePair.from_text(1, "I love my family .", "我 爱 我 的 家人 。"),
    SentencePair.from_text(2, "I have a dog .", "我 有 一 只 狗 。"),
    SentencePair.from_text(3, "You have a dog .", "你 有 只 狗 。"),
]

# count presence once per task; no phrases, keep every word
store = accumulate(pairs, (None, None), BuildConfig(c_w=1, phrases_src=False))

# "i" and "我" occur in exactly the same three tasks
print("Rel(i, 我)  =", relevance(store, "i", "我"))
print("Rel(have, 有) =", round(relevance(store, "have", "有"), 4))
print("Rel(love, 有) =", relevance(store, "love", "有"))

# the full ranking for one source word
for wd in sorted(store.joint["dog"], key=lambda d: -relevance(store, "dog", d)):
    print("dog ->", wd, round(relevance(store, "dog", wd), 4))
