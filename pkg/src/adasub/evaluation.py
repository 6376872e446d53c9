"""Exact and Monte Carlo evaluation of policy expected utility.

Exact evaluation of a seeded policy recurses over its decision tree: at each
observation history the policy's choice is deterministic (its internal
stream is derived from the master seed and the history), and the recursion
branches over the chosen item's posterior states.  Policies that cannot be
evaluated this way (concatenations, whose second phase forgets the history)
fall back to enumerating the prior support and running a rollout per
realization.
"""

from __future__ import annotations

import copy
import math
import random
from typing import Optional

from .core import (
    EvalContext,
    PSI_EMPTY,
    condition,
    expected_set_value,
)
from .errors import PolicyViolation
from .policies import Policy, run_policy

DEFAULT_REPLICATES = 200


def exact_policy_value(pi: Policy, f, prior, seed=0, constraint=None,
                       delta_cache=None) -> float:
    """Exact f_avg of pi under the prior, for one fixed internal seed."""
    if not pi.supports_tree_eval:
        return _exact_by_enumeration(pi, f, prior, seed, constraint)
    ctx = EvalContext(f, prior, seed=seed, delta_cache=delta_cache)
    if constraint is None:
        constraint = pi.fresh_constraint(prior.n)

    def rec(psi, cstate, scratch):
        e = pi.decide(ctx, psi, cstate, scratch)
        if e is None:
            return expected_set_value(f, prior, psi, psi.domain())
        if e in psi or not cstate.can_select(e):
            raise PolicyViolation("%s chose infeasible item %d" % (pi.name, e))
        nxt = cstate.after(e)
        total = 0.0
        posterior = condition(prior, psi).item_posterior(e)
        for o, p in posterior:
            branch_scratch = copy.deepcopy(scratch) if scratch else {}
            total += p * rec(psi.with_observation(e, o), nxt, branch_scratch)
        return total

    return rec(PSI_EMPTY, constraint, pi.init_scratch())


def _exact_by_enumeration(pi, f, prior, seed, constraint):
    total = 0.0
    for phi, p in prior.support():
        trace = run_policy(pi, f, prior, phi, constraint=constraint, seed=seed)
        total += p * trace.value
    return total


def expected_utility(f, prior, pi: Policy, mode: str = "exact",
                     samples: int = 10_000, seed=0,
                     replicates: int = DEFAULT_REPLICATES,
                     constraint=None, delta_cache=None):
    """f_avg(pi): expected utility over the prior (and internal randomness).

    Exact mode returns a float; for randomized policies the internal
    randomness is averaged over `replicates` exactly-evaluated seeds.
    Monte Carlo mode returns (estimate, standard_error).
    """
    if mode == "exact":
        if pi.randomized:
            vals = [exact_policy_value(pi, f, prior, seed="%s:%d" % (seed, r),
                                       constraint=constraint, delta_cache=delta_cache)
                    for r in range(replicates)]
            return sum(vals) / len(vals)
        return exact_policy_value(pi, f, prior, seed=seed, constraint=constraint,
                                  delta_cache=delta_cache)
    if mode != "mc":
        raise ValueError("unknown mode %r" % mode)
    rng_phi = random.Random("%s#phi" % seed)
    vals = []
    for i in range(samples):
        phi = prior.sample(rng_phi)
        trace = run_policy(pi, f, prior, phi, constraint=constraint,
                           seed="%s#%d" % (seed, i), delta_cache=delta_cache)
        vals.append(trace.value)
    mean = sum(vals) / len(vals)
    var = sum((v - mean) ** 2 for v in vals) / max(len(vals) - 1, 1)
    return mean, math.sqrt(var / len(vals))


def policy_marginal(f, prior, psi, pi: Policy, mode: str = "exact",
                    samples: int = 10_000, seed=0,
                    replicates: int = DEFAULT_REPLICATES,
                    constraint=None) -> float:
    """Expected gain of running pi (from an empty history) on top of psi.

    E[f(dom(psi) | union E(pi, Phi), Phi) - f(dom(psi), Phi)] over
    realizations consistent with psi.
    """
    dom = psi.domain()

    def gain(phi, rollout_seed):
        trace = run_policy(pi, f, prior, phi, constraint=constraint, seed=rollout_seed)
        union = tuple(sorted(set(dom) | set(trace.selected)))
        return f.value(union, phi) - f.value(dom, phi)

    cond = condition(prior, psi)
    if mode == "exact":
        seeds = ["%s:%d" % (seed, r) for r in range(replicates)] if pi.randomized else [seed]
        support = cond.support()
        total = 0.0
        for s in seeds:
            total += sum(p * gain(phi, s) for phi, p in support)
        return total / len(seeds)
    if mode != "mc":
        raise ValueError("unknown mode %r" % mode)
    rng = random.Random("%s#pm" % seed)
    acc = 0.0
    for i in range(samples):
        phi = cond.sample(rng)
        acc += gain(phi, "%s#%d" % (seed, i))
    return acc / samples
