"""Global utility functions evaluated under the specified belief.

Four acquisition criteria share one grid engine: mutual information with a
parameter or model focus, the total-entropy variant that targets the joint
state, and an exploration-augmented form adding predictive entropy. A
KL-weighted re-derivation of the mutual information is kept as an
independent cross-check of the double-sum path.

All utilities are pure functions of (belief, stimulus) and are recomputed
against the current belief on every call; candidate sweeps go through
`utility_profile`, which vectorizes over stimuli.
"""

from __future__ import annotations

import warnings
from enum import Enum

import numpy as np

from .belief import FocusKind, FocusError, JointBelief
from .dist import entropy, kl_divergence


class UtilityKind(Enum):
    MI_PARAMETER = "mi-parameter"
    MI_MODEL = "mi-model"
    TOTAL_ENTROPY = "total-entropy"
    UCB = "ucb"


def _neg_entropy(rows: np.ndarray) -> np.ndarray:
    """sum_y p ln p along the last axis with 0 ln 0 dropped exactly."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(rows > 0, rows * np.log(np.where(rows > 0, rows, 1.0)), 0.0)
    return terms.sum(axis=-1)


def _candidate_indices(model, candidates):
    return np.asarray([model.stimulus_index(x) for x in candidates], dtype=int)


def predictive_profile(belief: JointBelief, candidates) -> np.ndarray:
    """Prior predictive rows, shape (n_candidates, n_responses)."""
    out = np.zeros((len(candidates), len(belief.response_space)))
    for pm, model in zip(belief.model_probs.masses, belief.models):
        ci = _candidate_indices(model, candidates)
        out += pm * np.einsum("p,pcy->cy", belief.param_masses(model.id),
                              model.lik[:, ci, :])
    return out


def mi_profile(belief: JointBelief, candidates, focus: FocusKind) -> np.ndarray:
    """Mutual information between the focus and the response, per candidate."""
    if focus is FocusKind.PARAMETER:
        if len(belief.models) != 1:
            raise FocusError("parameter focus is ambiguous on a multi-model belief")
        model = belief.models[0]
        ci = _candidate_indices(model, candidates)
        w = belief.param_masses(model.id)
        pred = np.einsum("p,pcy->cy", w, model.lik[:, ci, :])
        return w @ model.nce[:, ci] - _neg_entropy(pred)
    if focus is FocusKind.MODEL:
        pred = np.zeros((len(candidates), len(belief.response_space)))
        cond = 0.0
        for pm, model in zip(belief.model_probs.masses, belief.models):
            ci = _candidate_indices(model, candidates)
            rows = np.einsum("p,pcy->cy", belief.param_masses(model.id),
                             model.lik[:, ci, :])
            pred += pm * rows
            if pm > 0:
                cond = cond + pm * _neg_entropy(rows)
        return cond - _neg_entropy(pred)
    raise FocusError("joint focus: use the total-entropy utility")


def total_entropy_profile(belief: JointBelief, candidates) -> np.ndarray:
    """Mutual information between the joint (model, parameters) and the response."""
    pred = np.zeros((len(candidates), len(belief.response_space)))
    cond = 0.0
    for pm, model in zip(belief.model_probs.masses, belief.models):
        ci = _candidate_indices(model, candidates)
        w = belief.param_masses(model.id)
        pred += pm * np.einsum("p,pcy->cy", w, model.lik[:, ci, :])
        if pm > 0:
            cond = cond + pm * (w @ model.nce[:, ci])
    return cond - _neg_entropy(pred)


def mi_utility(belief: JointBelief, x, focus: FocusKind) -> float:
    """Expected information gain about the focus from a response to `x`."""
    return float(mi_profile(belief, (x,), focus)[0])


def mi_utility_via_kl(belief: JointBelief, x, focus: FocusKind) -> float:
    """The same quantity as `mi_utility`, rebuilt from posterior divergences.

    Averages, over the prior predictive, the KL divergence from each
    possible posterior focus distribution back to the prior one. Runs the
    full posterior-update path, so it serves as an independent check.
    """
    prior_focus = belief.marginal(focus)
    pred = belief.prior_predictive(x)
    total = 0.0
    for y, py in zip(pred.support, pred.masses):
        if py == 0:
            continue
        posterior_focus = belief.update(x, y).marginal(focus)
        total += py * kl_divergence(posterior_focus, prior_focus)
    return total


def total_entropy_utility(belief: JointBelief, x) -> float:
    """Information the response carries about the entire state of the world."""
    if len(belief.models) == 1:
        warnings.warn("total-entropy utility on a single-model belief "
                      "reduces to the parameter-focus mutual information")
    return float(total_entropy_profile(belief, (x,))[0])


def ucb_utility(belief: JointBelief, x, focus: FocusKind, weight: float = 1.0) -> float:
    """Mutual information plus (weighted) predictive entropy.

    The entropy term rewards stimuli whose outcome is uncertain under the
    current belief, trading exploitation of the focus for exploration of
    the response space. The default weight of 1 is the plain sum.
    """
    return mi_utility(belief, x, focus) + weight * entropy(belief.prior_predictive(x))


def utility_profile(kind: UtilityKind, belief: JointBelief, candidates,
                    focus: FocusKind | None = None, ucb_weight: float = 1.0) -> np.ndarray:
    """Evaluate one utility kind over a candidate list."""
    if kind is UtilityKind.MI_PARAMETER:
        return mi_profile(belief, candidates, FocusKind.PARAMETER)
    if kind is UtilityKind.MI_MODEL:
        return mi_profile(belief, candidates, FocusKind.MODEL)
    if kind is UtilityKind.TOTAL_ENTROPY:
        return total_entropy_profile(belief, candidates)
    if kind is UtilityKind.UCB:
        if focus is None or focus is FocusKind.JOINT:
            raise FocusError("the ucb utility needs a parameter or model focus")
        pred = predictive_profile(belief, candidates)
        return mi_profile(belief, candidates, focus) + ucb_weight * (-_neg_entropy(pred))
    raise ValueError(f"unknown utility kind {kind!r}")


def utility_value(kind: UtilityKind, belief: JointBelief, x,
                  focus: FocusKind | None = None, ucb_weight: float = 1.0) -> float:
    return float(utility_profile(kind, belief, (x,), focus, ucb_weight)[0])
