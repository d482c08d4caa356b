# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Linear-chain CRF over frame tags {BF, NBF}.
#
# A is a 4 x 4 transition matrix over {BF, NBF, BOS, EOS}; A[y, y2] scores
# moving from y to y2. Moves into BOS and out of EOS are fixed at NEG_INF.
# A sequence y over T frames with emissions P (T x 2) scores
#
#   A[BOS, y0] + sum_i P[i, y_i] + sum_i A[y_i, y_i+1] + A[y_T-1, EOS]

import numpy as np
from scipy.special import logsumexp

BF = 0
NBF = 1
BOS = 2
EOS = 3
NUM_LABELS = 2
NUM_TAGS = 4
TAG_NAMES = ("BF", "NBF", "BOS", "EOS")

NEG_INF = -1e30

# Entries of A that never change
FIXED = np.zeros((NUM_TAGS, NUM_TAGS), dtype=bool)
FIXED[:, BOS] = True
FIXED[EOS, :] = True


def init_transitions():
    A = np.zeros((NUM_TAGS, NUM_TAGS))
    A[FIXED] = NEG_INF
    return A


def _check(P, A):
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 1 or P.shape[1] != NUM_LABELS:
        raise ValueError("emissions have shape %s, expected (T, 2)" % (P.shape,))
    if A.shape != (NUM_TAGS, NUM_TAGS):
        raise ValueError("transitions have shape %s, expected (4, 4)" % (A.shape,))
    return P


def crf_score(P, A, y):
    P = _check(P, A)
    y = list(y)
    if len(y) != P.shape[0]:
        raise ValueError("%s labels for %s frames" % (len(y), P.shape[0]))
    if any(label not in (BF, NBF) for label in y):
        raise ValueError("labels must be BF (0) or NBF (1), got %s" % y)
    score = A[BOS, y[0]] + A[y[-1], EOS]
    score += sum(P[i, label] for i, label in enumerate(y))
    score += sum(A[a, b] for a, b in zip(y[:-1], y[1:]))
    return float(score)


def _forward(P, A):
    inner = A[:NUM_LABELS, :NUM_LABELS]
    alpha = np.zeros_like(P)
    alpha[0] = A[BOS, :NUM_LABELS] + P[0]
    for t in range(1, P.shape[0]):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + inner, axis=0) + P[t]
    return alpha


def _backward(P, A):
    inner = A[:NUM_LABELS, :NUM_LABELS]
    beta = np.zeros_like(P)
    beta[-1] = A[:NUM_LABELS, EOS]
    for t in range(P.shape[0] - 2, -1, -1):
        beta[t] = logsumexp(inner + (P[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def crf_log_partition(P, A):
    """
    log of the sum of exp(score) over all 2^T label sequences.
    """
    P = _check(P, A)
    alpha = _forward(P, A)
    return float(logsumexp(alpha[-1] + A[:NUM_LABELS, EOS]))


def crf_marginals(P, A):
    """
    Returns (node, edge, log_partition): node is T x 2 tag marginals, edge is
    (T-1) x 2 x 2 pairwise marginals of consecutive positions.
    """
    P = _check(P, A)
    alpha = _forward(P, A)
    beta = _backward(P, A)
    log_z = float(logsumexp(alpha[-1] + A[:NUM_LABELS, EOS]))
    node = np.exp(alpha + beta - log_z)
    inner = A[:NUM_LABELS, :NUM_LABELS]
    edge = np.exp(
        alpha[:-1, :, None]
        + inner[None, :, :]
        + (P[1:] + beta[1:])[:, None, :]
        - log_z
    )
    return node, edge, log_z


def crf_nll(P, A, y_true):
    """
    Negative log-likelihood of y_true with its gradients.
    Returns (loss, dP, dA); dA is zero on the fixed entries.
    """
    P = _check(P, A)
    node, edge, log_z = crf_marginals(P, A)
    y = np.asarray(y_true, dtype=int)
    loss = log_z - crf_score(P, A, y)

    observed = np.zeros_like(P)
    observed[np.arange(len(y)), y] = 1.0
    dP = node - observed

    dA = np.zeros((NUM_TAGS, NUM_TAGS))
    inner = edge.sum(axis=0)
    for a, b in zip(y[:-1], y[1:]):
        inner[a, b] -= 1.0
    dA[:NUM_LABELS, :NUM_LABELS] = inner
    dA[BOS, :NUM_LABELS] = dP[0]
    dA[:NUM_LABELS, EOS] = dP[-1]
    return float(loss), dP, dA


def viterbi_decode(P, A):
    """
    Highest scoring label sequence. Among equal scores the lexicographically
    smallest sequence wins, which puts BF at the earliest possible position.
    Returns (labels, score).
    """
    P = _check(P, A)
    steps = P.shape[0]
    inner = A[:NUM_LABELS, :NUM_LABELS]
    # suffix[t, y]: best score of positions t.. given label y at t
    suffix = np.zeros_like(P)
    suffix[-1] = P[-1] + A[:NUM_LABELS, EOS]
    for t in range(steps - 2, -1, -1):
        suffix[t] = P[t] + (inner + suffix[t + 1][None, :]).max(axis=1)

    labels = [int(np.argmax(A[BOS, :NUM_LABELS] + suffix[0]))]
    for t in range(1, steps):
        labels.append(int(np.argmax(inner[labels[-1]] + suffix[t])))
    return labels, crf_score(P, A, labels)


def constrained_decode(P, A):
    """
    Highest scoring label sequence with exactly one BF, by dynamic programming
    over (label, BF already used) states. Same tie rule as viterbi_decode.
    Returns (labels, score).
    """
    P = _check(P, A)
    steps = P.shape[0]
    inner = A[:NUM_LABELS, :NUM_LABELS]
    # suffix[t, y, u]: best score of positions t.. given label y at t and
    # u = 1 when a BF appears at or above t
    suffix = np.full((steps, NUM_LABELS, 2), -np.inf)
    suffix[-1, :, 1] = P[-1] + A[:NUM_LABELS, EOS]
    for t in range(steps - 2, -1, -1):
        for y in (BF, NBF):
            # below an unused state a BF may still come; below a used one only NBF
            suffix[t, y, 0] = P[t, y] + max(
                inner[y, BF] + suffix[t + 1, BF, 1],
                inner[y, NBF] + suffix[t + 1, NBF, 0],
            )
            suffix[t, y, 1] = P[t, y] + inner[y, NBF] + suffix[t + 1, NBF, 1]

    def options(t, previous, used):
        # (label, next used flag) pairs allowed after previous
        start = A[BOS, :NUM_LABELS] if previous is None else inner[previous]
        choices = [(NBF, used)]
        if not used:
            choices.insert(0, (BF, 1))
        return [(start[y] + suffix[t, y, u], y, u) for y, u in choices]

    labels = []
    used = 0
    previous = None
    for t in range(steps):
        candidates = options(t, previous, used)
        best = max(value for value, _, _ in candidates)
        _, label, used = next(c for c in candidates if c[0] == best)
        labels.append(label)
        previous = label
    return labels, crf_score(P, A, labels)


def blame_from_labels(labels):
    """
    Index of the single BF label, or None when there is not exactly one.
    """
    blamed = [i for i, label in enumerate(labels) if label == BF]
    return blamed[0] if len(blamed) == 1 else None
