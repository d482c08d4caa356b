from .base import (
    EvalReport,
    evaluate,
    load_prediction_log,
    log_accuracy,
    log_digest,
    write_report,
)
from .curve import DEFAULT_K_LIST, CurvePoint, learning_curve, parse_k_list, write_curve
from .metrics import (
    accuracy,
    feature_importance,
    improvement_pct,
    offset_histogram,
    per_class_accuracy,
)
