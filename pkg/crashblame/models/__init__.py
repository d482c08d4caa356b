from .base import (
    Localization,
    Localizer,
    get_localizer,
    predict_index,
    train_model,
)
from .bundle import (
    KIND_ALIASES,
    KINDS,
    SEQUENCE_KINDS,
    ModelBundle,
    canonical_kind,
    load_model,
    save_model,
)
from .heuristics import fit_blame_table, predict_heuristic, train_heuristic
from .logreg import predict_logreg, train_logreg
from .sequence import (
    predict_blame,
    predict_problem_class,
    sequence_loss,
    train_sequence_model,
)
from .transfer import fine_tune
