"""Executable checkers for the structural definitions and the sampling bound.

The definitional checkers sweep every positive-probability partial
realization of an enumerable instance and test the marginal-utility
inequalities directly; a failure report carries a witness that re-verifies
when both sides are recomputed from scratch.  The sampling check compares
the exact hypergeometric hit probability of the subsampling rule against
its target bound and a seeded empirical frequency.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import PSI_EMPTY, PartialRealization, marginal_utility
from .errors import InstanceTooLarge, ValidationError
from .oracle import OracleCaps, restricted_optimal
from .policies import sample_budget

INEQ_TOL = 1e-9


@dataclass
class CheckReport:
    name: str
    passed: bool
    pairs_checked: int
    counterexample: Optional[dict] = None

    def format(self) -> str:
        lines = ["check %s: %s (%d comparisons)"
                 % (self.name, "PASS" if self.passed else "FAIL", self.pairs_checked)]
        if self.counterexample:
            for k, v in sorted(self.counterexample.items()):
                lines.append("  %s = %r" % (k, v))
        return "\n".join(lines)


def enumerate_partial_realizations(prior, max_size=None):
    """All positive-probability partial realizations, smallest domains first."""
    n = prior.n
    limit = n if max_size is None else min(max_size, n)
    per_item = [prior.item_states(e) for e in range(n)]
    for size in range(limit + 1):
        for dom in itertools.combinations(range(n), size):
            for states in itertools.product(*(per_item[e] for e in dom)):
                psi = PartialRealization.of(zip(dom, states))
                if prior.evidence_probability(psi) > 0.0:
                    yield psi


def _sub_partials(psi):
    """Every subrealization of psi (including empty and psi itself)."""
    for size in range(len(psi.pairs) + 1):
        for pairs in itertools.combinations(psi.pairs, size):
            yield PartialRealization(pairs)


def _check_enumerable(prior, max_items, max_states):
    if prior.n > max_items:
        raise InstanceTooLarge("n=%d exceeds checker cap %d" % (prior.n, max_items))
    if prior.m > max_states:
        raise InstanceTooLarge("m=%d exceeds checker cap %d" % (prior.m, max_states))


def check_adaptive_monotone(f, prior, max_items: int = 8, max_states: int = 3) -> CheckReport:
    """Delta(e | psi) >= 0 for every positive-probability psi and e outside it."""
    _check_enumerable(prior, max_items, max_states)
    checked = 0
    for psi in enumerate_partial_realizations(prior):
        for e in range(prior.n):
            if e in psi:
                continue
            checked += 1
            d = marginal_utility(f, prior, psi, e)
            if d < -INEQ_TOL:
                witness = {"psi": psi.pairs, "item": e, "delta": d}
                return CheckReport("adaptive-monotone", False, checked, witness)
    return CheckReport("adaptive-monotone", True, checked)


def check_adaptive_submodular(f, prior, max_items: int = 8, max_states: int = 3) -> CheckReport:
    """Delta(e | psi) >= Delta(e | psi') whenever psi is a subrealization of psi'."""
    _check_enumerable(prior, max_items, max_states)
    deltas = {}

    def delta(psi, e):
        key = (psi.pairs, e)
        val = deltas.get(key)
        if val is None:
            val = marginal_utility(f, prior, psi, e)
            deltas[key] = val
        return val

    checked = 0
    for psi2 in enumerate_partial_realizations(prior):
        for psi in _sub_partials(psi2):
            for e in range(prior.n):
                if e in psi2:
                    continue
                checked += 1
                lhs = delta(psi, e)
                rhs = delta(psi2, e)
                if lhs < rhs - INEQ_TOL:
                    witness = {"psi": psi.pairs, "psi2": psi2.pairs, "item": e,
                               "delta_psi": lhs, "delta_psi2": rhs}
                    return CheckReport("adaptive-submodular", False, checked, witness)
    return CheckReport("adaptive-submodular", True, checked)


def check_fully_adaptive_submodular(f, prior, max_items: int = 5,
                                    max_states: int = 2) -> CheckReport:
    """The submodularity inequality for best restricted-policy values.

    Quantifies over every nonempty V and every budget a in [|V|]; the check
    is doubly exponential, hence the tight caps.
    """
    _check_enumerable(prior, max_items, max_states)
    caps = OracleCaps(max_items=max_items, max_states=max_states, max_budget=max_items)
    values = {}

    def best(psi, items, a):
        key = (psi.pairs, items, a)
        val = values.get(key)
        if val is None:
            val = restricted_optimal(f, prior, psi, items, a, caps=caps)
            values[key] = val
        return val

    subsets = [tuple(c) for size in range(1, prior.n + 1)
               for c in itertools.combinations(range(prior.n), size)]
    checked = 0
    for psi2 in enumerate_partial_realizations(prior):
        for psi in _sub_partials(psi2):
            for items in subsets:
                for a in range(1, len(items) + 1):
                    checked += 1
                    lhs = best(psi, items, a)
                    rhs = best(psi2, items, a)
                    if lhs < rhs - INEQ_TOL:
                        witness = {"psi": psi.pairs, "psi2": psi2.pairs,
                                   "items": items, "budget": a,
                                   "value_psi": lhs, "value_psi2": rhs}
                        return CheckReport("fully-adaptive-submodular", False,
                                           checked, witness)
    return CheckReport("fully-adaptive-submodular", True, checked)


# ---------------------------------------------------------------------------
# sampling bound


@dataclass
class SamplingCheckResult:
    n: int
    k: int
    epsilon: float
    sample_size: int
    trials: int
    exact: float                    # hypergeometric hit probability
    empirical: float
    bound: float                    # 1 - epsilon
    with_replacement_bound: float   # 1 - e^(-s*k/n), the looser analysis bound

    @property
    def standard_error(self) -> float:
        return math.sqrt(max(self.exact * (1.0 - self.exact), 0.0) / self.trials)


def lemma1_check(n: int, k: int, epsilon: float, trials: int = 100_000,
                 seed: int = 0) -> SamplingCheckResult:
    """Probability that a uniform sample of the rule's size hits a fixed top-k set.

    The sampler draws without replacement, for which the exact hit
    probability is 1 - C(n-k, s)/C(n, s); this dominates the
    with-replacement-style bound 1 - e^(-s*k/n) >= 1 - epsilon.
    """
    if not (1 <= k <= n):
        raise ValidationError("need 1 <= k <= n")
    if not (0.0 < epsilon < 1.0):
        raise ValidationError("epsilon must be in (0,1)")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    s = sample_budget(n, n, k, epsilon)
    miss = math.comb(n - k, s) / math.comb(n, s) if s <= n - k else 0.0
    exact = 1.0 - miss

    # Empirical: the sample is the s smallest of n iid uniform keys; it hits
    # the target (wlog items 0..k-1) iff the smallest target key has overall
    # rank < s.
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = trials
    chunk = max(1, min(trials, 1 << 22) // max(n, 1))
    while remaining > 0:
        c = min(chunk, remaining)
        keys = rng.random((c, n))
        target_min = keys[:, :k].min(axis=1)
        rank = (keys < target_min[:, None]).sum(axis=1)
        hits += int((rank < s).sum())
        remaining -= c
    empirical = hits / trials
    return SamplingCheckResult(
        n=n, k=k, epsilon=epsilon, sample_size=s, trials=trials, exact=exact,
        empirical=empirical, bound=1.0 - epsilon,
        with_replacement_bound=1.0 - math.exp(-s * k / n))
