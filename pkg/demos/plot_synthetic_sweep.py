"""
Trading precision for recall with e_th
======================================

Words that are often left implicit get a high error rate. A strict e_th
ignores them entirely; a permissive one also catches real omissions of
them, at the cost of false alarms.
"""

from transcheck import DEFAULT_GRID, BuildConfig, CheckConfig, SynthSpec, build_lexicon, generate, sweep_e_th

spec = SynthSpec(
    corpus_size=1000, eval_size=500, seed=2,
    plant_under_rate=0.2, plant_over_rate=0.05,
    implicit_fraction=0.4, implicit_strength=(0.0, 0.6), plant_on_implicit=True,
)
data = generate(spec)
print(len(data.implicit), "implicit words out of", spec.vocab_size)

# one translation per word keeps the synthetic verdicts exact
lexicon = build_lexicon(data.train, BuildConfig(c_tr=1, c_w=5, phrases_src=False))

result = sweep_e_th(data.eval, lexicon, CheckConfig(), DEFAULT_GRID, "under")
print(result.to_csv())

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    rows = list(result.rows())
    plt.plot([r["e_th"] for r in rows], [r["precision"] for r in rows], label="precision")
    plt.plot([r["e_th"] for r in rows], [r["recall"] for r in rows], label="recall")
    plt.xlabel("e_th")
    plt.legend()
    plt.savefig("sweep.png")
