"""Selection policies: greedy argmax, schedules, random baseline."""

import numpy as np
import pytest

from adosim.belief import FocusKind, JointBelief
from adosim.dist import discretize_normal, normalize
from adosim.models import irt_model
from adosim.policy import (DesignPolicy, PolicyConfigError, ado_select,
                           make_fixed_schedule, random_select)
from adosim.sim import replication_rng
from adosim.utility import UtilityKind, utility_profile

from test_utility import binary_model


@pytest.fixture
def irt_belief():
    m = irt_model()
    return JointBelief.single(m, discretize_normal(0, 1, m.param_grid))


class TestDesignPolicy:
    def test_ado_needs_utility(self):
        with pytest.raises(PolicyConfigError):
            DesignPolicy("ado")

    def test_fixed_needs_schedule(self):
        with pytest.raises(PolicyConfigError):
            DesignPolicy("fixed")

    def test_unknown_kind(self):
        with pytest.raises(PolicyConfigError):
            DesignPolicy("thompson")


class TestAdoSelect:
    def test_single_candidate(self, irt_belief):
        sel = ado_select(irt_belief, (0.0,), UtilityKind.MI_PARAMETER)
        assert sel.stimulus == 0.0

    def test_tie_breaks_to_lowest_index(self):
        m = binary_model([0.3, 0.3, 0.3], n_stimuli=3)
        b = JointBelief.single(m, normalize(m.param_grid, [1, 1, 1]))
        sel = ado_select(b, m.stimulus_space, UtilityKind.MI_PARAMETER)
        assert sel.stimulus == m.stimulus_space[0]

    def test_empty_candidates(self, irt_belief):
        with pytest.raises(PolicyConfigError):
            ado_select(irt_belief, (), UtilityKind.MI_PARAMETER)

    def test_selected_irt_difficulty_is_negative(self, irt_belief):
        # the guessing floor makes slightly-easy items most informative
        sel = ado_select(irt_belief, irt_belief.models[0].stimulus_space,
                         UtilityKind.MI_PARAMETER)
        assert sel.stimulus < 0

    def test_surfaces_winning_utility(self, irt_belief):
        xs = irt_belief.models[0].stimulus_space
        sel = ado_select(irt_belief, xs, UtilityKind.MI_PARAMETER)
        prof = utility_profile(UtilityKind.MI_PARAMETER, irt_belief, xs)
        assert sel.utility == pytest.approx(float(prof.max()), abs=1e-15)

    def test_affine_rescaling_keeps_argmax(self, irt_belief):
        xs = irt_belief.models[0].stimulus_space
        prof = utility_profile(UtilityKind.MI_PARAMETER, irt_belief, xs)
        for a, c in ((2.5, 0.0), (1e3, -4.0), (0.01, 7.0)):
            assert int(np.argmax(a * prof + c)) == int(np.argmax(prof))

    def test_reselects_after_update(self, irt_belief):
        # a scripted run: observing correct answers shifts the belief up,
        # which must move the chosen difficulty upward as well
        xs = irt_belief.models[0].stimulus_space
        first = ado_select(irt_belief, xs, UtilityKind.MI_PARAMETER).stimulus
        b = irt_belief
        for _ in range(3):
            b = b.update(first, 1)
        second = ado_select(b, xs, UtilityKind.MI_PARAMETER).stimulus
        assert second != first
        assert second > first


class TestFixedSchedule:
    def test_bijection_on_multiset(self):
        stimuli = (0, 1, 2, 2, 3)
        sched = make_fixed_schedule(stimuli, replication_rng(1, 0))
        assert sorted(sched) == sorted(stimuli)

    def test_same_seed_same_schedule(self):
        stimuli = tuple(range(31))
        a = make_fixed_schedule(stimuli, replication_rng(5, 3))
        b = make_fixed_schedule(stimuli, replication_rng(5, 3))
        assert a == b

    def test_replications_produce_distinct_orders(self):
        stimuli = tuple(range(31))
        seen = {make_fixed_schedule(stimuli, replication_rng(9, rep))
                for rep in range(1000)}
        assert len(seen) == 1000

    def test_empty_rejected(self):
        with pytest.raises(PolicyConfigError):
            make_fixed_schedule((), replication_rng(0, 0))


class TestRandomSelect:
    def test_single_candidate(self):
        assert random_select((42,), replication_rng(0, 0)) == 42

    def test_deterministic_per_stream(self):
        cands = tuple(range(10))
        a = [random_select(cands, replication_rng(3, 7)) for _ in range(1)]
        b = [random_select(cands, replication_rng(3, 7)) for _ in range(1)]
        assert a == b

    def test_uniform_within_three_sigma(self):
        cands = tuple(range(8))
        rng = replication_rng(17, 0)
        draws = [random_select(cands, rng) for _ in range(10_000)]
        counts = np.bincount(draws, minlength=8)
        p = 1 / 8
        sigma = np.sqrt(10_000 * p * (1 - p))
        assert np.all(np.abs(counts - 10_000 * p) < 3 * sigma)
