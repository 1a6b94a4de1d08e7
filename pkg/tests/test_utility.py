"""Global utilities: values, identities, bounds, and invariances."""

import math

import numpy as np
import pytest

from adosim.belief import FocusError, FocusKind, JointBelief
from adosim.dist import (DiscreteDist, discretize_normal, entropy, normalize,
                         point_mass, uniform)
from adosim.models import ResponseModel, exp_model, irt_model, pow_model, \
    retention_prior
from adosim.utility import (UtilityKind, mi_utility, mi_utility_via_kl,
                            total_entropy_utility, ucb_utility, utility_profile,
                            utility_value)


def binary_model(rows, model_id="bin", n_stimuli=1):
    """One stimulus, Bernoulli rows per parameter point."""
    rows = np.asarray(rows, dtype=float)
    lik = np.zeros((len(rows), n_stimuli, 2))
    lik[:, :, 1] = rows[:, None]
    lik[:, :, 0] = 1 - rows[:, None]
    grid = tuple(float(i) for i in range(len(rows)))
    return ResponseModel(model_id, tuple(range(n_stimuli)), (0, 1), grid, lik, ("t",))


def random_single_belief(rng, n=6):
    rows = rng.uniform(0.02, 0.98, size=n)
    m = binary_model(rows)
    return JointBelief.single(m, normalize(m.param_grid, rng.random(n) + 1e-6))


def random_multi_belief(rng, n=5):
    m1 = binary_model(rng.uniform(0.02, 0.98, size=n), "m1")
    m2 = binary_model(rng.uniform(0.02, 0.98, size=n), "m2")
    probs = rng.random(2) + 0.05
    return JointBelief((m1, m2), {
        "m1": normalize(m1.param_grid, rng.random(n) + 1e-6),
        "m2": normalize(m2.param_grid, rng.random(n) + 1e-6),
    }, DiscreteDist(("m1", "m2"), probs / probs.sum()))


@pytest.fixture
def irt_belief():
    m = irt_model()
    return JointBelief.single(m, discretize_normal(0, 1, m.param_grid))


class TestMiUtility:
    def test_degenerate_focus_prior_is_zero(self):
        m = binary_model([0.1, 0.9])
        b = JointBelief.single(m, point_mass(m.param_grid, m.param_grid[0]))
        assert mi_utility(b, 0, FocusKind.PARAMETER) == pytest.approx(0.0, abs=1e-12)

    def test_identical_predictive_rows_give_zero(self):
        m = binary_model([0.7, 0.7, 0.7])
        b = JointBelief.single(m, uniform(m.param_grid))
        assert mi_utility(b, 0, FocusKind.PARAMETER) == pytest.approx(0.0, abs=1e-12)

    def test_two_value_bernoulli_case(self):
        # equiprobable focus values with Bern(0.9)/Bern(0.1) predictives;
        # brute-force enumeration gives ln 2 - H(Bern(0.9))
        m = binary_model([0.9, 0.1])
        b = JointBelief.single(m, uniform(m.param_grid))
        assert mi_utility(b, 0, FocusKind.PARAMETER) == pytest.approx(
            0.3680642071684971, abs=1e-12)
        assert mi_utility_via_kl(b, 0, FocusKind.PARAMETER) == pytest.approx(
            0.3680642071684971, abs=1e-10)

    def test_joint_focus_rejected(self, irt_belief):
        with pytest.raises(FocusError):
            mi_utility(irt_belief, 0.0, FocusKind.JOINT)

    def test_matches_kl_form_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(250):
            b = random_single_belief(rng)
            assert mi_utility(b, 0, FocusKind.PARAMETER) == pytest.approx(
                mi_utility_via_kl(b, 0, FocusKind.PARAMETER), abs=1e-10)
        for _ in range(250):
            b = random_multi_belief(rng)
            assert mi_utility(b, 0, FocusKind.MODEL) == pytest.approx(
                mi_utility_via_kl(b, 0, FocusKind.MODEL), abs=1e-10)

    def test_bounds(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            b = random_single_belief(rng)
            v = mi_utility(b, 0, FocusKind.PARAMETER)
            cap = min(entropy(b.marginal(FocusKind.PARAMETER)),
                      entropy(b.prior_predictive(0)))
            assert -1e-12 <= v <= cap + 1e-12


class TestTotalEntropy:
    def test_chain_rule(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            b = random_multi_belief(rng)
            te = total_entropy_utility(b, 0)
            mi_model = mi_utility(b, 0, FocusKind.MODEL)
            cond = 0.0
            for pm, model in zip(b.model_probs.masses, b.models):
                sub = JointBelief.single(model, b.param_dists[model.id])
                cond += pm * mi_utility(sub, 0, FocusKind.PARAMETER)
            assert te == pytest.approx(mi_model + cond, abs=1e-10)
            assert te >= mi_model - 1e-12

    def test_degenerate_joint_is_zero(self):
        m1 = binary_model([0.2, 0.8], "m1")
        m2 = binary_model([0.3, 0.7], "m2")
        b = JointBelief((m1, m2), {
            "m1": point_mass(m1.param_grid, m1.param_grid[0]),
            "m2": point_mass(m2.param_grid, m2.param_grid[0]),
        }, DiscreteDist(("m1", "m2"), [1.0, 0.0]))
        assert total_entropy_utility(b, 0) == pytest.approx(0.0, abs=1e-12)

    def test_single_model_warns_and_reduces(self, irt_belief):
        with pytest.warns(UserWarning):
            te = total_entropy_utility(irt_belief, 0.0)
        assert te == pytest.approx(
            mi_utility(irt_belief, 0.0, FocusKind.PARAMETER), abs=1e-12)


class TestUcb:
    def test_definitional_identity(self, irt_belief):
        x = irt_belief.models[0].stimulus_space[17]
        mi = mi_utility(irt_belief, x, FocusKind.PARAMETER)
        h = entropy(irt_belief.prior_predictive(x))
        assert ucb_utility(irt_belief, x, FocusKind.PARAMETER) == pytest.approx(
            mi + h, abs=1e-12)

    def test_degenerate_belief_keeps_response_entropy(self):
        m = binary_model([0.25, 0.75])
        b = JointBelief.single(m, point_mass(m.param_grid, m.param_grid[1]))
        expected = entropy(DiscreteDist((0, 1), [0.25, 0.75]))
        assert ucb_utility(b, 0, FocusKind.PARAMETER) == pytest.approx(
            expected, abs=1e-12)

    def test_dominates_mi(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            b = random_single_belief(rng)
            assert (ucb_utility(b, 0, FocusKind.PARAMETER)
                    >= mi_utility(b, 0, FocusKind.PARAMETER) - 1e-12)

    def test_weight_scales_exploration(self, irt_belief):
        x = 0.0
        mi = mi_utility(irt_belief, x, FocusKind.PARAMETER)
        h = entropy(irt_belief.prior_predictive(x))
        assert ucb_utility(irt_belief, x, FocusKind.PARAMETER, weight=0.5) \
            == pytest.approx(mi + 0.5 * h, abs=1e-12)


class TestProfile:
    def test_profile_matches_scalars(self, irt_belief):
        xs = irt_belief.models[0].stimulus_space
        prof = utility_profile(UtilityKind.MI_PARAMETER, irt_belief, xs)
        for x, v in list(zip(xs, prof))[::5]:
            assert mi_utility(irt_belief, x, FocusKind.PARAMETER) == pytest.approx(
                float(v), abs=1e-13)

    def test_support_permutation_invariance(self):
        rng = np.random.default_rng(11)
        rows = rng.uniform(0.05, 0.95, size=6)
        w = rng.random(6) + 1e-6
        m = binary_model(rows)
        b = JointBelief.single(m, normalize(m.param_grid, w))
        perm = rng.permutation(6)
        mp = binary_model(rows[perm])
        bp = JointBelief.single(mp, normalize(mp.param_grid, w[perm]))
        for kind in (UtilityKind.MI_PARAMETER, UtilityKind.UCB):
            assert utility_value(kind, b, 0, FocusKind.PARAMETER) == pytest.approx(
                utility_value(kind, bp, 0, FocusKind.PARAMETER), abs=1e-12)

    def test_ucb_needs_focus(self, irt_belief):
        with pytest.raises(FocusError):
            utility_profile(UtilityKind.UCB, irt_belief, (0.0,))


class TestRetentionSurface:
    def test_model_focus_on_retention_pair(self):
        mp, me = pow_model(20, 6), exp_model(20, 6)
        b = JointBelief((mp, me), {
            "pow": retention_prior(mp, (1, 1), (1, 1)),
            "exp": retention_prior(me, (1, 1), (1, 1)),
        })
        prof = utility_profile(UtilityKind.MI_MODEL, b, mp.stimulus_space)
        assert np.all(prof >= -1e-12)
        assert prof.max() > 0
        # a zero-delay trial cannot separate the models: both predict a
        assert prof[0] == pytest.approx(0.0, abs=1e-12)
