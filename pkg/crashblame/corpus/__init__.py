from .frame import Frame, format_frame, parse_frame, render_frame, split_symbol
from .generator import (
    PROBLEM_CLASSES,
    GeneratorConfig,
    generate_synthetic,
)
from .record import (
    DEFAULT_TRAIN_FRACTION,
    MAX_DEPTH,
    Corpus,
    CrashRecord,
    corpus_digest,
    corpus_text,
    dedup,
    load_corpus,
    parse_record_line,
    record_hash,
    save_corpus,
    temporal_split,
)
