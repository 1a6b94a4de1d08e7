"""Expected focal divergence: values, decomposition, and orderings."""

import math

import numpy as np
import pytest

from adosim.belief import FocusKind, JointBelief
from adosim.dist import (DiscreteDist, SupportMismatchError, discretize_normal,
                         entropy, normalize, point_mass)
from adosim.efd import (EfdBreakdown, efd_decomposition, efd_surface,
                        expected_focal_divergence, response_distribution)
from adosim.models import exp_model, gaussian_model, irt_model, pow_model
from adosim.utility import UtilityKind, mi_utility, utility_profile

from test_utility import binary_model, random_multi_belief, random_single_belief


@pytest.fixture(scope="module")
def irt():
    m = irt_model()
    spec = JointBelief.single(m, discretize_normal(0, 1, m.param_grid))
    pop_lo = JointBelief.single(m, discretize_normal(-2, 1, m.param_grid),
                                role="population")
    pop_hi = JointBelief.single(m, discretize_normal(2, 1, m.param_grid),
                                role="population")
    return m, spec, pop_lo, pop_hi


class TestResponseDistribution:
    def test_same_belief_same_formula(self, irt):
        m, spec, _, _ = irt
        x = m.stimulus_space[4]
        assert np.allclose(response_distribution(spec, x).masses,
                           spec.prior_predictive(x).masses, atol=1e-15)

    def test_low_population_answers_less_often_everywhere(self, irt):
        m, _, pop_lo, pop_hi = irt
        for x in m.stimulus_space:
            assert (response_distribution(pop_lo, x).prob(1)
                    < response_distribution(pop_hi, x).prob(1))

    def test_degenerate_population_is_likelihood_row(self, irt):
        m, _, _, _ = irt
        theta = m.param_grid[10]
        pop = JointBelief.single(m, point_mass(m.param_grid, theta),
                                 role="population")
        x = m.stimulus_space[22]
        assert np.allclose(response_distribution(pop, x).masses,
                           m.likelihood_row(x, theta), atol=1e-15)


class TestExpectedFocalDivergence:
    def test_equals_utility_when_informative(self, irt):
        m, spec, _, _ = irt
        pop = JointBelief.single(m, discretize_normal(0, 1, m.param_grid),
                                 role="population")
        for x in m.stimulus_space:
            u = mi_utility(spec, x, FocusKind.PARAMETER)
            e = expected_focal_divergence(spec, pop, x, FocusKind.PARAMETER)
            assert abs(u - e) <= 1e-10

    def test_degenerate_spec_focus_is_zero(self, irt):
        m, _, pop_lo, _ = irt
        spec = JointBelief.single(m, point_mass(m.param_grid, m.param_grid[15]))
        assert expected_focal_divergence(spec, pop_lo, 0.0,
                                         FocusKind.PARAMETER) == pytest.approx(
            0.0, abs=1e-12)

    def test_low_population_diverges_more_at_selected_stimulus(self, irt):
        m, spec, pop_lo, pop_hi = irt
        prof = utility_profile(UtilityKind.MI_PARAMETER, spec, m.stimulus_space)
        xstar = m.stimulus_space[int(np.argmax(prof))]
        e_lo = expected_focal_divergence(spec, pop_lo, xstar, FocusKind.PARAMETER)
        e_hi = expected_focal_divergence(spec, pop_hi, xstar, FocusKind.PARAMETER)
        assert e_lo > float(prof.max()) > e_hi

    def test_nonnegative_randomized(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            spec = random_single_belief(rng)
            pop = JointBelief.single(
                spec.models[0],
                normalize(spec.models[0].param_grid,
                          rng.random(len(spec.models[0].param_grid)) + 1e-6),
                role="population")
            assert expected_focal_divergence(spec, pop, 0,
                                             FocusKind.PARAMETER) >= -1e-12

    def test_grid_mismatch_rejected(self, irt):
        m, spec, _, _ = irt
        other = irt_model(grid=np.linspace(-2, 2, 11))
        pop = JointBelief.single(other, discretize_normal(0, 1, other.param_grid),
                                 role="population")
        with pytest.raises(SupportMismatchError):
            expected_focal_divergence(spec, pop, 0.0, FocusKind.PARAMETER)


class TestDecomposition:
    def test_informative_case_has_zero_surprisal(self, irt):
        m, spec, _, _ = irt
        pop = JointBelief.single(m, discretize_normal(0, 1, m.param_grid),
                                 role="population")
        b = efd_decomposition(spec, pop, 0.0, FocusKind.PARAMETER)
        assert b.surprisal == pytest.approx(0.0, abs=1e-12)

    def test_identity_against_direct_path_randomized(self):
        rng = np.random.default_rng(22)
        for _ in range(150):
            spec = random_single_belief(rng)
            m = spec.models[0]
            pop = JointBelief.single(
                m, normalize(m.param_grid, rng.random(len(m.param_grid)) + 1e-6),
                role="population")
            direct = expected_focal_divergence(spec, pop, 0, FocusKind.PARAMETER)
            b = efd_decomposition(spec, pop, 0, FocusKind.PARAMETER)
            assert abs(b.total - direct) <= 1e-9
            assert b.total == pytest.approx(
                b.response_variability + b.surprisal + b.hindsight, abs=1e-12)

    def test_identity_model_focus_randomized(self):
        rng = np.random.default_rng(23)
        for _ in range(150):
            spec = random_multi_belief(rng)
            pop = random_multi_belief(rng)
            pop = JointBelief(spec.models,
                              {m.id: pop.param_dists[m.id].with_masses(
                                  pop.param_masses(m.id))
                               for m in spec.models},
                              pop.model_probs, role="population")
            direct = expected_focal_divergence(spec, pop, 0, FocusKind.MODEL)
            b = efd_decomposition(spec, pop, 0, FocusKind.MODEL)
            assert abs(b.total - direct) <= 1e-9

    def test_surprisal_zero_iff_rows_match(self):
        rng = np.random.default_rng(24)
        spec = random_single_belief(rng)
        m = spec.models[0]
        pop_same = JointBelief.single(m, spec.param_dists[m.id].with_masses(
            spec.param_masses(m.id)), role="population")
        assert efd_decomposition(spec, pop_same, 0,
                                 FocusKind.PARAMETER).surprisal <= 1e-12
        pop_diff = JointBelief.single(
            m, normalize(m.param_grid, rng.random(len(m.param_grid)) + 1e-6),
            role="population")
        if not np.allclose(pop_diff.prior_predictive(0).masses,
                           spec.prior_predictive(0).masses, atol=1e-10):
            assert efd_decomposition(spec, pop_diff, 0,
                                     FocusKind.PARAMETER).surprisal > 1e-10

    def test_hindsight_may_be_negative_total_never(self, irt):
        m, spec, pop_lo, _ = irt
        b = efd_decomposition(spec, pop_lo, 0.0, FocusKind.PARAMETER)
        assert b.hindsight < 0
        assert b.total >= 0

    def test_low_population_raises_both_observable_terms(self, irt):
        m, spec, pop_lo, pop_hi = irt
        prof = utility_profile(UtilityKind.MI_PARAMETER, spec, m.stimulus_space)
        xstar = m.stimulus_space[int(np.argmax(prof))]
        lo = efd_decomposition(spec, pop_lo, xstar, FocusKind.PARAMETER)
        hi = efd_decomposition(spec, pop_hi, xstar, FocusKind.PARAMETER)
        assert lo.response_variability > hi.response_variability
        assert lo.surprisal > hi.surprisal

    def test_population_permutation_within_equal_rows(self):
        # at delay 0 the recall chance depends only on a, so permuting the
        # population's masses across b within one a-slice leaves EFD alone
        m = pow_model(6, 4)
        rng = np.random.default_rng(25)
        spec = JointBelief.single(m, normalize(m.param_grid,
                                               rng.random(16) + 1e-6))
        w = rng.random(16) + 1e-6
        w_perm = w.reshape(4, 4)[:, ::-1].ravel()  # reverse b within each a
        pop = JointBelief.single(m, normalize(m.param_grid, w), role="population")
        pop_perm = JointBelief.single(m, normalize(m.param_grid, w_perm),
                                      role="population")
        e = expected_focal_divergence(spec, pop, 0, FocusKind.PARAMETER)
        e_perm = expected_focal_divergence(spec, pop_perm, 0, FocusKind.PARAMETER)
        assert e == pytest.approx(e_perm, abs=1e-12)

    def test_binned_responses(self):
        ga, gb = gaussian_model("gauss-a"), gaussian_model("gauss-b")
        spec = JointBelief((ga, gb), {
            "gauss-a": discretize_normal(0, 3, ga.param_grid),
            "gauss-b": discretize_normal(0, 3, gb.param_grid),
        })
        pop = JointBelief((ga, gb), {
            "gauss-a": discretize_normal(0, 12, ga.param_grid),
            "gauss-b": discretize_normal(0, 12, gb.param_grid),
        }, DiscreteDist(("gauss-a", "gauss-b"), [1.0, 0.0]), role="population")
        direct = expected_focal_divergence(spec, pop, 0.0, FocusKind.MODEL)
        b = efd_decomposition(spec, pop, 0.0, FocusKind.MODEL)
        assert abs(b.total - direct) <= 1e-9


class TestSurface:
    def test_surface_matches_pointwise(self, irt):
        m, spec, pop_lo, _ = irt
        xs = m.stimulus_space[:5]
        surf = efd_surface(spec, pop_lo, xs, FocusKind.PARAMETER)
        for x, b in zip(xs, surf):
            assert b.total == pytest.approx(
                efd_decomposition(spec, pop_lo, x, FocusKind.PARAMETER).total,
                abs=1e-14)
