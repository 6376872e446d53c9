"""Exhaustive optimal adaptive policy value on small instances.

The recursion over partial realizations computes

    V(psi) = max( E[f(dom(psi), Phi) | psi],
                  max_e sum_o Pr[Phi_e = o | psi] * V(psi + (e, o)) )

memoized on (canonical psi, remaining budget).  The explicit stop branch
keeps the oracle correct for non-monotone tabular utilities.  Hard instance
caps fail loudly; ground truth is this module's only job.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import PSI_EMPTY, PartialRealization, condition, expected_set_value
from .errors import InstanceTooLarge
from .policies import CardinalityConstraint

VALUE_TOL = 1e-12


@dataclass(frozen=True)
class OracleCaps:
    max_items: int = 10
    max_states: int = 3
    max_budget: int = 6


DEFAULT_CAPS = OracleCaps()


@dataclass
class OracleResult:
    value: float
    optimal_first_actions: tuple
    nodes_expanded: int
    cache_hits: int


def _check_caps(prior, constraint, caps: OracleCaps):
    if prior.n > caps.max_items:
        raise InstanceTooLarge("n=%d exceeds oracle cap %d" % (prior.n, caps.max_items))
    if prior.m > caps.max_states:
        raise InstanceTooLarge("m=%d exceeds oracle cap %d" % (prior.m, caps.max_states))
    budget = constraint.total_budget()
    if budget > caps.max_budget:
        raise InstanceTooLarge("budget %d exceeds oracle cap %d" % (budget, caps.max_budget))


def _solve(f, prior, constraint, base: PartialRealization, selectable=None,
           caps: OracleCaps = DEFAULT_CAPS, use_cache: bool = True) -> OracleResult:
    _check_caps(prior, constraint, caps)
    memo = {}
    stats = {"nodes": 0, "hits": 0}

    def V(psi, cstate):
        key = (psi.pairs, cstate.key())
        cached = memo.get(key) if use_cache else None
        if cached is not None:
            stats["hits"] += 1
            return cached
        stats["nodes"] += 1
        stop_value = expected_set_value(f, prior, psi, psi.domain())
        best = stop_value
        best_items = []
        pool = range(prior.n) if selectable is None else selectable
        for e in pool:
            if e in psi or not cstate.can_select(e):
                continue
            posterior = condition(prior, psi).item_posterior(e)
            nxt = cstate.after(e)
            val = 0.0
            for o, p in posterior:
                val += p * V(psi.with_observation(e, o), nxt)[0]
            if val > best + VALUE_TOL:
                best = val
                best_items = [e]
            elif val >= best - VALUE_TOL:
                best_items.append(e)
        result = (best, tuple(best_items))
        memo[key] = result
        return result

    value, first = V(base, constraint)
    return OracleResult(value, first, stats["nodes"], stats["hits"])


def optimal_value(f, prior, constraint, base: PartialRealization = PSI_EMPTY,
                  caps: OracleCaps = DEFAULT_CAPS, use_cache: bool = True) -> OracleResult:
    """Optimal adaptive f_avg under the constraint, from observations `base`.

    For an empty base the value is absolute; for a nonempty base it is the
    expected gain over E[f(dom(base), Phi) | base] (the marginal form used
    by the restricted-policy checker).
    """
    res = _solve(f, prior, constraint, base, caps=caps, use_cache=use_cache)
    if len(base) > 0:
        res.value -= expected_set_value(f, prior, base, base.domain())
    return res


def restricted_optimal(f, prior, psi: PartialRealization, items, a: int,
                       caps: OracleCaps = DEFAULT_CAPS) -> float:
    """Best expected gain over policies selecting at most `a` items from `items`."""
    selectable = tuple(sorted(set(items) - set(psi.domain())))
    res = _solve(f, prior, CardinalityConstraint(min(a, len(selectable))), psi,
                 selectable=selectable, caps=caps)
    return res.value - expected_set_value(f, prior, psi, psi.domain())
