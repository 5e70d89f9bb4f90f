"""Reference-free detection of under- and over-translation.

Typical use::

    from transcheck import BuildConfig, CheckConfig, build_lexicon, check, load_corpus

    lexicon = build_lexicon(load_corpus("train.tsv"), BuildConfig(), "en", "zh")
    report = check(pair, lexicon, CheckConfig(e_th=0.2))
"""

from .corpus import (
    JOINER,
    CorpusError,
    SentencePair,
    StopWordSet,
    builtin_stopwords,
    load_corpus,
    load_stopwords,
    normalize,
)
from .detect import (
    E_TH_PRESETS,
    CheckConfig,
    DirectionMismatchError,
    OverViolation,
    UnderViolation,
    ViolationReport,
    check,
    check_over,
    check_under,
)
from .evaluation import (
    DEFAULT_GRID,
    EvalDataset,
    EvalRecord,
    Metrics,
    SweepResult,
    compute_metrics,
    evaluate,
    load_baseline_lexicon,
    load_eval_dataset,
    sweep_e_th,
)
from .lexicon import (
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
from .phrases import KeywordPair, PhraseConfig, build_phrase_inventory, extract_keyword_pairs, itemize
from .service import CheckClient, CheckService, MonitorSeries, WindowStats, make_server, monitor_report
from .synth import SynthSpec, generate

__version__ = "0.1.0"
