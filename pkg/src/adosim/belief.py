"""Joint beliefs over models and parameter grids, with Bayesian updating.

A :class:`JointBelief` stores the joint factorized as model probabilities
plus one parameter-grid distribution per model, and re-derives that
factorization after every update. Beliefs are immutable: `update` returns
a new value, so specified and population beliefs can share code paths and
be passed freely between replication workers.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .dist import DiscreteDist, SupportMismatchError
from .models import ResponseModel

# Shifted log masses below this are floored before renormalization so a
# long run cannot drive a surviving atom's mass to exactly zero.
LOG_FLOOR = -690.0


class FocusKind(Enum):
    """The inferential target: parameters (model known), model identity,
    or the joint state consumed only by the total-entropy utility."""

    PARAMETER = "parameter"
    MODEL = "model"
    JOINT = "joint"


class ImpossibleObservationError(ValueError):
    """Observed response has zero predictive mass under the belief."""


class FocusError(ValueError):
    """Focus kind is ambiguous or unsupported for the given belief."""


class UpdateInfo:
    """Which atoms hit the mass floor during one update."""

    __slots__ = ("floored_params", "floored_models")

    def __init__(self, floored_params, floored_models):
        self.floored_params = floored_params  # model id -> bool array
        self.floored_models = floored_models  # bool array over models

    @property
    def count(self) -> int:
        return int(sum(int(m.sum()) for m in self.floored_params.values())
                   + int(self.floored_models.sum()))

    def param_floored(self, model_id: str, param_index: int) -> bool:
        return bool(self.floored_params[model_id][param_index])

    def model_floored(self, model_index: int) -> bool:
        return bool(self.floored_models[model_index])


def _safe_log(masses: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(masses > 0, np.log(np.where(masses > 0, masses, 1.0)), -np.inf)


def _floor_and_normalize(logw: np.ndarray):
    """Exponentiate shifted log weights with the underflow floor applied.

    Returns (masses, log_total, floored_mask); -inf entries stay exactly
    zero so impossible atoms are never resurrected.
    """
    finite = logw > -np.inf
    if not finite.any():
        return None, -math.inf, np.zeros_like(finite)
    m = logw[finite].max()
    shifted = logw - m
    log_total = m + math.log(np.exp(shifted[finite]).sum())
    floored = finite & (shifted < LOG_FLOOR)
    shifted = np.where(floored, LOG_FLOOR, shifted)
    w = np.where(finite, np.exp(np.where(finite, shifted, 0.0)), 0.0)
    return w / w.sum(), log_total, floored


class JointBelief:
    """Model probabilities plus per-model parameter-grid distributions.

    Parameters
    ----------
    models : sequence of ResponseModel
    param_dists : mapping of model id to DiscreteDist
        Each distribution must live on its model's parameter grid.
    model_probs : DiscreteDist over model ids, optional
        Defaults to uniform over the model set.
    role : str
        "specified" or "population"; metadata only, both roles share all
        code paths.
    """

    __slots__ = ("models", "model_probs", "param_dists", "role", "_model_index")

    def __init__(self, models, param_dists, model_probs=None, role="specified"):
        models = tuple(models)
        if not models:
            raise ValueError("belief needs at least one model")
        ids = tuple(m.id for m in models)
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate model ids")
        if model_probs is None:
            model_probs = DiscreteDist(ids, np.full(len(ids), 1.0 / len(ids)))
        if model_probs.support != ids:
            raise ValueError("model_probs support must match the model ids in order")
        if len(models) > 1:
            spaces = {m.response_space for m in models}
            if len(spaces) != 1:
                raise SupportMismatchError("models in one belief must share a response space")
        dists = {}
        for m in models:
            d = param_dists[m.id]
            if d.support != m.param_grid:
                raise SupportMismatchError(
                    f"parameter distribution for {m.id!r} is not on the model's grid")
            dists[m.id] = d
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "model_probs", model_probs)
        object.__setattr__(self, "param_dists", dists)
        object.__setattr__(self, "role", role)
        object.__setattr__(self, "_model_index", {m.id: i for i, m in enumerate(models)})

    def __setattr__(self, name, value):
        raise AttributeError("JointBelief is immutable")

    @classmethod
    def single(cls, model: ResponseModel, param_dist: DiscreteDist, role="specified"):
        return cls((model,), {model.id: param_dist}, role=role)

    @property
    def response_space(self) -> tuple:
        return self.models[0].response_space

    def model(self, model_id: str) -> ResponseModel:
        return self.models[self._model_index[model_id]]

    def param_masses(self, model_id: str) -> np.ndarray:
        return self.param_dists[model_id].masses

    def _stimulus_index(self, model: ResponseModel, x) -> int:
        try:
            return model.stimulus_index(x)
        except KeyError as e:
            raise SupportMismatchError(str(e)) from None

    def prior_predictive(self, x) -> DiscreteDist:
        """Marginal response distribution p(y | x) under the belief."""
        mix = np.zeros(len(self.response_space))
        for pm, model in zip(self.model_probs.masses, self.models):
            xi = self._stimulus_index(model, x)
            mix += pm * (self.param_masses(model.id) @ model.lik[:, xi, :])
        return DiscreteDist(self.response_space, mix / mix.sum())

    def focal_predictive(self, x, phi) -> DiscreteDist:
        """Response distribution conditioned on a focus value.

        A model id gives the parameter-averaged predictive for that model;
        a grid point of a single-model belief gives the raw likelihood row,
        which does not depend on the belief's masses.
        """
        if isinstance(phi, str) and phi in self._model_index:
            model = self.model(phi)
            xi = self._stimulus_index(model, x)
            row = self.param_masses(phi) @ model.lik[:, xi, :]
            return DiscreteDist(model.response_space, row / row.sum())
        if len(self.models) == 1:
            model = self.models[0]
            xi = self._stimulus_index(model, x)
            pi = model.param_index(phi)
            return DiscreteDist(model.response_space, model.lik[pi, xi, :])
        raise KeyError(f"focus value {phi!r} is neither a model id nor a grid point")

    def update_with_info(self, x, y):
        """Bayes update on one observation, reporting floored atoms."""
        log_model = _safe_log(self.model_probs.masses).copy()
        new_dists = {}
        floored_params = {}
        for i, model in enumerate(self.models):
            xi = self._stimulus_index(model, x)
            yi = model.response_index(y)
            logw = _safe_log(self.param_masses(model.id)) + model.log_lik[:, xi, yi]
            masses, log_evidence, floored = _floor_and_normalize(logw)
            if masses is None:
                # no parameter point of this model can produce y; the model
                # dies but its conditional is left untouched
                new_dists[model.id] = self.param_dists[model.id]
                log_model[i] = -np.inf
            else:
                new_dists[model.id] = self.param_dists[model.id].with_masses(masses)
                log_model[i] = log_model[i] + log_evidence
            floored_params[model.id] = floored
        model_masses, _, floored_models = _floor_and_normalize(log_model)
        if model_masses is None:
            raise ImpossibleObservationError(
                f"response {y!r} at stimulus {x!r} has zero predictive mass")
        belief = JointBelief(
            self.models, new_dists,
            self.model_probs.with_masses(model_masses), role=self.role)
        return belief, UpdateInfo(floored_params, floored_models)

    def update(self, x, y) -> "JointBelief":
        """Posterior belief after observing response `y` to stimulus `x`."""
        return self.update_with_info(x, y)[0]

    def bayes_factor(self, x, y, m1: str, m2: str) -> float:
        """Relative likelihood of (x, y) under two models' focal predictives."""
        num = self.focal_predictive(x, m1).prob(y)
        den = self.focal_predictive(x, m2).prob(y)
        if den == 0:
            return math.inf
        return num / den

    def marginal(self, focus: FocusKind) -> DiscreteDist:
        """The belief's distribution over focus values."""
        if focus is FocusKind.MODEL:
            return self.model_probs
        if focus is FocusKind.PARAMETER:
            if len(self.models) != 1:
                raise FocusError("parameter focus is ambiguous on a multi-model belief")
            return self.param_dists[self.models[0].id]
        raise FocusError("the joint focus has no marginal here; "
                         "it is consumed only by the total-entropy utility")

    def snapshot(self) -> dict:
        """JSON-ready masses for trial logs."""
        return {
            "model_probs": {m.id: float(p)
                            for m, p in zip(self.models, self.model_probs.masses)},
            "param_masses": {m.id: [float(v) for v in self.param_masses(m.id)]
                             for m in self.models},
        }
