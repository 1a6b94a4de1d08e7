"""Stimulus-selection policies: greedy utility maximization, fixed
randomized schedules, and a uniform-random baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .belief import FocusKind, JointBelief
from .utility import UtilityKind, utility_profile

POLICY_KINDS = ("ado", "fixed", "random")


class PolicyConfigError(ValueError):
    """A policy is missing what it needs to run."""


@dataclass(frozen=True)
class DesignPolicy:
    """How each trial's stimulus is chosen.

    `utility_kind` applies to the adaptive policy; `schedule` is the
    stimulus multiset a fixed policy draws from, which must cover at least
    as many trials as the experiment it serves.
    """

    kind: str
    utility_kind: UtilityKind | None = None
    schedule: tuple | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise PolicyConfigError(f"unknown policy kind {self.kind!r}")
        if self.kind == "ado" and self.utility_kind is None:
            raise PolicyConfigError("adaptive policy needs a utility kind")
        if self.kind == "fixed" and not self.schedule:
            raise PolicyConfigError("fixed policy needs a schedule")


class Selection(NamedTuple):
    stimulus: object
    utility: float


def ado_select(belief: JointBelief, candidates, utility_kind: UtilityKind,
               focus: FocusKind | None = None, ucb_weight: float = 1.0) -> Selection:
    """Greedy choice: the candidate maximizing the utility under `belief`.

    Utilities are recomputed against the current belief on every call.
    Ties break to the lowest candidate index so runs replay exactly.
    """
    candidates = tuple(candidates)
    if not candidates:
        raise PolicyConfigError("candidate list is empty")
    values = utility_profile(utility_kind, belief, candidates, focus, ucb_weight)
    i = int(np.argmax(values))
    return Selection(candidates[i], float(values[i]))


def make_fixed_schedule(stimuli, rng: np.random.Generator) -> tuple:
    """A seeded permutation of the given stimulus multiset."""
    stimuli = tuple(stimuli)
    if not stimuli:
        raise PolicyConfigError("schedule stimulus list is empty")
    order = rng.permutation(len(stimuli))
    return tuple(stimuli[i] for i in order)


def random_select(candidates, rng: np.random.Generator):
    """Uniform draw from the candidate list."""
    candidates = tuple(candidates)
    if not candidates:
        raise PolicyConfigError("candidate list is empty")
    return candidates[int(rng.integers(len(candidates)))]
