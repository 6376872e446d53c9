import math

import pytest

from adasub import (
    InstanceTooLarge,
    PSI_EMPTY,
    PartialRealization,
    check_adaptive_monotone,
    check_adaptive_submodular,
    check_fully_adaptive_submodular,
    complementarity_counterexample,
    generate_coverage,
    lemma1_check,
    marginal_utility,
    monotonicity_counterexample,
    restricted_optimal,
)


class TestMonotoneChecker:
    def test_coverage_passes(self):
        inst = generate_coverage(n=5, m=2, universe_size=6, density=0.3, seed=0)
        report = check_adaptive_monotone(inst.utility(), inst.prior)
        assert report.passed
        assert report.pairs_checked > 0

    def test_constructed_violation(self):
        inst = monotonicity_counterexample()
        report = check_adaptive_monotone(inst.utility(), inst.prior)
        assert not report.passed
        w = report.counterexample
        assert w["psi"] == () and w["item"] == 0
        assert w["delta"] == pytest.approx(-1.0)
        # the witness re-verifies from scratch
        redone = marginal_utility(inst.utility(), inst.prior,
                                  PartialRealization(w["psi"]), w["item"])
        assert redone == pytest.approx(w["delta"])

    def test_single_item_instance(self):
        inst = generate_coverage(n=1, m=2, universe_size=4, density=0.5, seed=1)
        report = check_adaptive_monotone(inst.utility(), inst.prior)
        assert report.passed
        assert report.pairs_checked == 1

    def test_cap(self):
        inst = generate_coverage(n=9, m=2, universe_size=4, density=0.2, seed=2)
        with pytest.raises(InstanceTooLarge):
            check_adaptive_monotone(inst.utility(), inst.prior)


class TestSubmodularChecker:
    def test_instance_a_passes(self, utility_a, prior_a):
        assert check_adaptive_submodular(utility_a, prior_a).passed

    def test_coverage_passes(self):
        inst = generate_coverage(n=5, m=2, universe_size=6, density=0.3, seed=3)
        assert check_adaptive_submodular(inst.utility(), inst.prior).passed

    def test_complementarity_violation(self):
        inst = complementarity_counterexample()
        report = check_adaptive_submodular(inst.utility(), inst.prior)
        assert not report.passed
        w = report.counterexample
        assert w["delta_psi"] == pytest.approx(0.0)
        assert w["delta_psi2"] == pytest.approx(1.0)
        # re-verify both sides
        f = inst.utility()
        lhs = marginal_utility(f, inst.prior, PartialRealization(w["psi"]), w["item"])
        rhs = marginal_utility(f, inst.prior, PartialRealization(w["psi2"]), w["item"])
        assert lhs < rhs - 1e-9


class TestFullyAdaptiveChecker:
    def test_instance_a_passes(self, utility_a, prior_a):
        report = check_fully_adaptive_submodular(utility_a, prior_a)
        assert report.passed

    def test_singleton_reduction_agrees_with_item_marginals(self, utility_a, prior_a):
        # restricted value over a single item equals the positive part of its
        # marginal, so singleton-V comparisons reduce to the plain checker's
        psi2 = PartialRealization.of({0: 1})
        for e in (1,):
            lhs = restricted_optimal(utility_a, prior_a, PSI_EMPTY, (e,), 1)
            d = marginal_utility(utility_a, prior_a, PSI_EMPTY, e)
            assert lhs == pytest.approx(max(d, 0.0), abs=1e-12)
            rhs = restricted_optimal(utility_a, prior_a, psi2, (e,), 1)
            d2 = marginal_utility(utility_a, prior_a, psi2, e)
            assert rhs == pytest.approx(max(d2, 0.0), abs=1e-12)

    def test_submodularity_failure_implies_fully_failure(self):
        inst = complementarity_counterexample()
        report = check_fully_adaptive_submodular(inst.utility(), inst.prior)
        assert not report.passed

    def test_cap(self):
        inst = generate_coverage(n=6, m=2, universe_size=4, density=0.2, seed=4)
        with pytest.raises(InstanceTooLarge):
            check_fully_adaptive_submodular(inst.utility(), inst.prior)


class TestSamplingBound:
    def test_full_ground_set_always_hits(self):
        res = lemma1_check(10, 10, 0.5, trials=1000, seed=0)
        assert res.exact == pytest.approx(1.0)

    def test_reference_grid_point(self):
        # n=100, k=10, eps=0.05: sample of ceil(10 ln 20) = 30
        res = lemma1_check(100, 10, 0.05, trials=50_000, seed=1)
        assert res.sample_size == 30
        assert res.exact >= 0.95
        assert abs(res.empirical - res.exact) < 4 * res.standard_error + 1e-12

    def test_single_draw_limit(self):
        # eps close to 1 clamps the sample to one draw: hit probability k/n
        res = lemma1_check(10, 2, 0.99, trials=1000, seed=2)
        assert res.sample_size == 1
        assert res.exact == pytest.approx(0.2)

    def test_exact_dominates_with_replacement_bound(self):
        for n in (50, 100):
            for k in (5, 10):
                for eps in (0.3, 0.1):
                    res = lemma1_check(n, k, eps, trials=1, seed=0)
                    assert res.exact >= res.with_replacement_bound - 1e-12
                    assert res.with_replacement_bound >= res.bound - 1e-12

    def test_invalid_parameters(self):
        from adasub import ValidationError
        with pytest.raises(ValidationError):
            lemma1_check(10, 0, 0.1)
        with pytest.raises(ValidationError):
            lemma1_check(10, 2, 1.5)
