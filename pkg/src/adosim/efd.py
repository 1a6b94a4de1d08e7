"""Expected focal divergence under a population belief, and its decomposition.

The design loop scores stimuli by how far responses are expected to move
the focus distribution, averaging over the specified predictive. Here the
same inner divergence is averaged over the *population* response
distribution instead, which is what an experiment run on many real
participants would deliver. The gap between the two is the cost of a
misinformed prior, and it splits exactly into three interpretable terms.

Population beliefs are passed in as-is: callers that want the population
conditioned on the observation history simply pass an updated belief. The
simulation harness keeps it fixed at its initial value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .belief import FocusKind, FocusError, ImpossibleObservationError, JointBelief
from .dist import DiscreteDist, SupportMismatchError, entropy, kl_divergence


@dataclass(frozen=True)
class EfdBreakdown:
    """Additive split of the expected focal divergence, all in nats.

    `response_variability` is the entropy of the population's responses to
    the stimulus; `surprisal` the divergence of that response distribution
    from the specified predictive; `hindsight` the expected posterior log
    likelihood of responses (typically negative). `total` is their sum.
    """

    response_variability: float
    surprisal: float
    hindsight: float
    total: float


def _check_aligned(spec: JointBelief, pop: JointBelief):
    spec_ids = tuple(m.id for m in spec.models)
    pop_ids = tuple(m.id for m in pop.models)
    if spec_ids != pop_ids:
        raise SupportMismatchError("specified and population model sets differ")
    for s, p in zip(spec.models, pop.models):
        if s.param_grid != p.param_grid or s.response_space != p.response_space:
            raise SupportMismatchError(f"grids for model {s.id!r} differ")


def response_distribution(pop: JointBelief, x) -> DiscreteDist:
    """The population's marginal response distribution at `x`."""
    return pop.prior_predictive(x)


def expected_focal_divergence(spec: JointBelief, pop: JointBelief, x,
                              focus: FocusKind) -> float:
    """Expected posterior-vs-prior divergence of the focus under `pop`.

    Sums, over responses weighted by the population response distribution,
    the KL divergence from the specified posterior focus distribution back
    to the specified prior one. Coincides with the design loop's internal
    utility exactly when `spec` equals `pop`.
    """
    _check_aligned(spec, pop)
    prior_focus = spec.marginal(focus)
    p0 = pop.prior_predictive(x)
    total = 0.0
    for y, py in zip(p0.support, p0.masses):
        if py == 0:
            continue
        try:
            posterior_focus = spec.update(x, y).marginal(focus)
        except ImpossibleObservationError:
            # the population can produce a response the specified belief
            # rules out; the divergence is unbounded, signalled not raised
            return math.inf
        total += py * kl_divergence(posterior_focus, prior_focus)
    return total


def _focal_rows(belief: JointBelief, x, focus: FocusKind):
    """Focus masses and per-focus-value predictive rows at `x`."""
    if focus is FocusKind.PARAMETER:
        if len(belief.models) != 1:
            raise FocusError("parameter focus is ambiguous on a multi-model belief")
        model = belief.models[0]
        return belief.param_masses(model.id), model.lik[:, model.stimulus_index(x), :]
    if focus is FocusKind.MODEL:
        rows = []
        for model in belief.models:
            xi = model.stimulus_index(x)
            row = belief.param_masses(model.id) @ model.lik[:, xi, :]
            rows.append(row / row.sum())
        return belief.model_probs.masses, np.asarray(rows)
    raise FocusError("decomposition is defined for parameter or model focus")


def efd_decomposition(spec: JointBelief, pop: JointBelief, x,
                      focus: FocusKind) -> EfdBreakdown:
    """Split the expected focal divergence into its three terms.

    Computed from the predictive rows directly rather than through the
    posterior-update path, so agreement of `total` with
    `expected_focal_divergence` is a real consistency check.
    """
    _check_aligned(spec, pop)
    p0 = pop.prior_predictive(x)
    p1 = spec.prior_predictive(x)
    rv = entropy(p0)
    surprisal = kl_divergence(p0, p1)

    w, rows = _focal_rows(spec, x, focus)
    # posterior over focus values per response: w * rows / column sums
    joint = w[:, None] * rows
    col = joint.sum(axis=0)
    hindsight = 0.0
    for yi, py in enumerate(p0.masses):
        if py == 0 or col[yi] == 0:
            continue
        q = joint[:, yi] / col[yi]
        mask = q > 0
        hindsight += float(py) * float(q[mask] @ np.log(rows[mask, yi]))
    total = rv + surprisal + hindsight
    return EfdBreakdown(rv, surprisal, float(hindsight), float(total))


def efd_surface(spec: JointBelief, pop: JointBelief, candidates,
                focus: FocusKind) -> list[EfdBreakdown]:
    """Decomposition at every candidate stimulus, at the given beliefs."""
    return [efd_decomposition(spec, pop, x, focus) for x in candidates]
