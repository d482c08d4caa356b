# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# BiLSTM encoder, frame attention and a CRF over {BF, NBF}. The multitask
# kind adds a problem-class head on the attention context vector and trains
# on L_blame + lambda * L_class. Backpropagating the combined loss gives the
# shared encoder the sum of both branch gradients and each head only its own.

from collections import namedtuple

import numpy as np
from scipy.special import log_softmax, softmax

from crashblame.corpus import corpus_digest
from crashblame.errors import ModelFormatError, TrainingError
from crashblame.features import StackFeaturizer
from crashblame.logger import log_duration, logger
from crashblame.nn import crf
from crashblame.nn.attention import (
    attend,
    attend_backward,
    emissions,
    emissions_backward,
)
from crashblame.nn.config import TrainConfig
from crashblame.nn.layers import (
    LstmParams,
    bilstm_backward,
    bilstm_forward,
    dropout,
    dropout_backward,
    glorot_uniform,
)
from crashblame.nn.optim import AdamState, adam_step

from .bundle import SEQUENCE_KINDS, ModelBundle, canonical_kind

# Streams spawned from the training seed
SHARED_STREAM = 0
CLASS_HEAD_STREAM = 1
TRAINING_STREAM = 2
VALIDATION_STREAM = 3

BlamePrediction = namedtuple("BlamePrediction", ["index", "alpha", "fallback"])


def stream(seed, which):
    return np.random.default_rng(np.random.SeedSequence([seed, which]))


def init_params(kind, input_size, hidden_size, n_classes=0, seed=0):
    """
    Fresh parameters. The shared layers draw from their own stream so both
    kinds start from identical encoders for one seed.
    """
    kind = canonical_kind(kind)
    if kind not in SEQUENCE_KINDS:
        raise ValueError("%s is not a sequence model kind" % kind)
    rng = stream(seed, SHARED_STREAM)
    params = {}
    params.update(LstmParams.init(rng, input_size, hidden_size).to_params("fwd"))
    params.update(LstmParams.init(rng, input_size, hidden_size).to_params("bwd"))
    params["attn.w"] = glorot_uniform(rng, 1, 2 * hidden_size).ravel()
    params["emit.E"] = glorot_uniform(rng, crf.NUM_LABELS, 4 * hidden_size)
    params["emit.e"] = np.zeros(crf.NUM_LABELS)
    params["crf.A"] = crf.init_transitions()
    if kind == "multitask":
        if n_classes < 1:
            raise TrainingError("the multitask model needs at least one problem class")
        rng = stream(seed, CLASS_HEAD_STREAM)
        params["cls.W"] = glorot_uniform(rng, n_classes, 2 * hidden_size)
        params["cls.b"] = np.zeros(n_classes)
    return params


def encode(params, matrix, rate=0.0, rng=None, train=False):
    """
    BiLSTM states (with dropout at train time), attention and emissions.
    """
    fwd = LstmParams.from_params(params, "fwd")
    bwd = LstmParams.from_params(params, "bwd")
    states, bilstm_cache = bilstm_forward(fwd, bwd, matrix)
    dropped, mask = dropout(states, rate, rng, train)
    alpha, h_star, attn_cache = attend(dropped, params["attn.w"])
    P = emissions(dropped, h_star, params["emit.E"], params["emit.e"])
    cache = {
        "fwd": fwd,
        "bwd": bwd,
        "bilstm": bilstm_cache,
        "mask": mask,
        "dropped": dropped,
        "attn": attn_cache,
    }
    return alpha, h_star, P, cache


def blame_labels(depth, blame_index):
    labels = [crf.NBF] * depth
    labels[blame_index] = crf.BF
    return labels


def sequence_loss(
    params,
    matrix,
    blame_index,
    class_index=None,
    class_weight=0.0,
    rate=0.0,
    rng=None,
    train=False,
):
    """
    Loss of one record and the gradients of every parameter.
    The class term applies when the parameters carry a class head and the
    record's class is known.
    """
    alpha, h_star, P, cache = encode(params, matrix, rate, rng, train)
    loss, dP, dA = crf.crf_nll(P, params["crf.A"], blame_labels(len(matrix), blame_index))

    grads = {"crf.A": dA}
    dropped = cache["dropped"]
    ddropped, dh_star, grads["emit.E"], grads["emit.e"] = emissions_backward(
        dropped, h_star, params["emit.E"], dP
    )

    if "cls.W" in params:
        grads["cls.W"] = np.zeros_like(params["cls.W"])
        grads["cls.b"] = np.zeros_like(params["cls.b"])
        if class_index is not None:
            logits = params["cls.W"] @ h_star + params["cls.b"]
            log_probs = log_softmax(logits)
            loss += class_weight * -log_probs[class_index]
            dlogits = np.exp(log_probs)
            dlogits[class_index] -= 1.0
            dlogits *= class_weight
            grads["cls.W"] = np.outer(dlogits, h_star)
            grads["cls.b"] = dlogits
            dh_star = dh_star + params["cls.W"].T @ dlogits

    dattn, grads["attn.w"] = attend_backward(params["attn.w"], cache["attn"], dh_star)
    dstates = dropout_backward(ddropped + dattn, cache["mask"])
    _, fwd_grads, bwd_grads = bilstm_backward(
        cache["fwd"], cache["bwd"], cache["bilstm"], dstates
    )
    grads.update(fwd_grads.to_params("fwd"))
    grads.update(bwd_grads.to_params("bwd"))
    return float(loss), grads


def decode_blame(P, A, constrained=True):
    """
    Blamed index from emissions. Unconstrained decoding that does not yield
    exactly one BF falls back to the frame with the highest BF marginal.
    """
    if constrained:
        labels, _ = crf.constrained_decode(P, A)
        return crf.blame_from_labels(labels), False
    labels, _ = crf.viterbi_decode(P, A)
    index = crf.blame_from_labels(labels)
    if index is not None:
        return index, False
    node, _, _ = crf.crf_marginals(P, A)
    return int(np.argmax(node[:, crf.BF])), True


def predict_matrix(params, matrix, constrained=True):
    alpha, _, P, _ = encode(params, matrix)
    index, fallback = decode_blame(P, params["crf.A"], constrained)
    return BlamePrediction(index, alpha, fallback)


def _check_sequence(bundle):
    if not bundle.is_sequence:
        raise ModelFormatError("expected a sequence model, got %s" % bundle.kind)


def predict_blame(bundle, record, app=None, constrained=None):
    """
    Blamed frame index with the attention weights behind it.
    """
    _check_sequence(bundle)
    if constrained is None:
        constrained = bundle.config.constrained_decoding
    matrix = bundle.featurizer.transform_record(record, app=app)
    return predict_matrix(bundle.params, matrix, constrained)


def predict_problem_class(bundle, record, app=None):
    """
    Most likely problem class and the probability of every class.
    """
    if bundle.kind != "multitask":
        raise ModelFormatError(
            "problem classes come from a multitask model, got %s" % bundle.kind
        )
    matrix = bundle.featurizer.transform_record(record, app=app)
    _, h_star, _, _ = encode(bundle.params, matrix)
    probs = softmax(bundle.params["cls.W"] @ h_star + bundle.params["cls.b"])
    best = int(np.argmax(probs))
    return bundle.classes[best], dict(zip(bundle.classes, probs.tolist()))


def blame_accuracy(params, matrices, records, constrained=True):
    if not records:
        return 0.0
    hits = sum(
        predict_matrix(params, m, constrained).index == r.blame_index
        for m, r in zip(matrices, records)
    )
    return hits / len(records)


def hold_out(records, fraction, seed):
    """
    Split a seeded random fraction of records off for validation. Returns
    (train, valid); valid is empty when there are too few records to spare.
    """
    n_valid = int(round(len(records) * fraction))
    if n_valid < 1 or len(records) - n_valid < 1:
        return records, []
    order = stream(seed, VALIDATION_STREAM).permutation(len(records))
    valid = set(order[:n_valid].tolist())
    return (
        [r for i, r in enumerate(records) if i not in valid],
        [r for i, r in enumerate(records) if i in valid],
    )


@log_duration("sequence model training")
def train_sequence_model(
    kind,
    train,
    valid=None,
    config=None,
    featurizer=None,
    initial=None,
    classes=None,
    learning_rate=None,
):
    """
    Train a bilstm_crf_attn or multitask model with minibatch Adam and early
    stopping on validation blame accuracy. With initial parameters (fine
    tuning) the starting point is itself a candidate for the best epoch.
    """
    config = config or TrainConfig()
    kind = canonical_kind(kind)
    if kind not in SEQUENCE_KINDS:
        raise ValueError("%s is not a sequence model kind" % kind)
    records = train.labeled
    if not records:
        raise TrainingError("training needs labeled records")
    if valid is not None:
        valid_records = valid.labeled
    else:
        records, valid_records = hold_out(records, config.validation_fraction, config.seed)
    if not valid_records:
        logger.warning("no validation records; early stopping watches training accuracy")
        valid_records = records

    if featurizer is None:
        featurizer = StackFeaturizer(n=config.tfidf_dim).fit(train.subset(records))
    if classes is None:
        classes = sorted({r.problem_class for r in records}) if kind == "multitask" else []
    class_lookup = {name: i for i, name in enumerate(classes)}

    if initial is not None:
        params = {name: value.copy() for name, value in initial.items()}
        if params["fwd.W"].shape[1] != featurizer.width:
            raise ModelFormatError(
                "model expects %s features per frame, the vocabulary gives %s"
                % (params["fwd.W"].shape[1], featurizer.width)
            )
    else:
        params = init_params(
            kind, featurizer.width, config.hidden_size, len(classes), config.seed
        )

    matrices = featurizer.transform(records)
    valid_matrices = featurizer.transform(valid_records)
    class_indices = [class_lookup.get(r.problem_class) for r in records]
    lam = config.class_weight if kind == "multitask" else 0.0
    lr = learning_rate or config.learning_rate
    rng = stream(config.seed, TRAINING_STREAM)
    state = AdamState.from_config(config)

    history = []
    best_params = None
    best_accuracy = -1.0
    best_epoch = 0
    if initial is not None:
        best_params = {name: value.copy() for name, value in params.items()}
        best_accuracy = blame_accuracy(params, valid_matrices, valid_records)
        logger.info("starting validation accuracy %.4f" % best_accuracy)

    waited = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(records))
        losses = []
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            total = {}
            batch_loss = 0.0
            for i in batch:
                loss, grads = sequence_loss(
                    params,
                    matrices[i],
                    records[i].blame_index,
                    class_indices[i],
                    lam,
                    config.dropout,
                    rng,
                    train=True,
                )
                batch_loss += loss
                for name, grad in grads.items():
                    total[name] = total[name] + grad if name in total else grad
            batch_loss /= len(batch)
            if not np.isfinite(batch_loss):
                raise TrainingError("non-finite loss in epoch %s" % epoch)
            losses.append(batch_loss)
            adam_step(state, params, {n: g / len(batch) for n, g in total.items()}, lr)

        accuracy = blame_accuracy(params, valid_matrices, valid_records)
        mean_loss = float(np.mean(losses))
        history.append({"epoch": epoch, "loss": mean_loss, "valid_accuracy": accuracy})
        if accuracy > best_accuracy:
            best_accuracy = accuracy
            best_params = {name: value.copy() for name, value in params.items()}
            best_epoch = epoch
            waited = 0
        else:
            waited += 1
        logger.epoch(epoch, mean_loss, accuracy, waited, config.patience)
        if waited >= config.patience:
            logger.info("early stopping after epoch %s" % epoch)
            break

    if history and best_epoch != history[-1]["epoch"]:
        logger.info("restored parameters of epoch %s" % best_epoch)
    return ModelBundle(
        kind=kind,
        params=best_params,
        featurizer=featurizer,
        config=config,
        classes=list(classes),
        corpus_digest=corpus_digest(train),
        history=history,
    )
