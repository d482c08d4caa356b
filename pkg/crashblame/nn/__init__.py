from .attention import attend, attend_backward, emissions, emissions_backward
from .config import TrainConfig
from .crf import (
    BF,
    NBF,
    constrained_decode,
    crf_log_partition,
    crf_marginals,
    crf_nll,
    crf_score,
    viterbi_decode,
)
from .gradcheck import grad_check
from .layers import (
    LstmParams,
    bilstm_backward,
    bilstm_forward,
    dense_backward,
    dense_forward,
    dropout,
    lstm_backward,
    lstm_forward,
)
from .optim import AdamState, adam_step
