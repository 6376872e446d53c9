"""Adaptive selection policies and the select-observe execution loop.

Every policy is an immutable descriptor; all per-rollout mutable state lives
in a scratch dict owned by the rollout (or by each branch of an exact
policy-tree evaluation).  A policy's internal randomness is drawn from a
stream derived from (master seed, observation history), which makes rollouts
reproducible and lets the same seeded policy be evaluated exactly by
recursion over its decision tree.

Tie-breaking is the smallest item id everywhere.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

from .core import EvalContext, PSI_EMPTY, PartialRealization
from .errors import PolicyViolation, ValidationError


# ---------------------------------------------------------------------------
# constraint states


@dataclass(frozen=True)
class CardinalityConstraint:
    """At most `remaining` further selections."""

    remaining: int

    def __post_init__(self):
        if self.remaining < 0:
            raise ValidationError("negative budget")

    def can_select(self, e: int) -> bool:
        return self.remaining > 0

    def after(self, e: int) -> "CardinalityConstraint":
        return CardinalityConstraint(self.remaining - 1)

    def exhausted(self) -> bool:
        return self.remaining == 0

    def key(self):
        return ("card", self.remaining)

    def total_budget(self) -> int:
        return self.remaining


@dataclass(frozen=True)
class PartitionConstraint:
    """Disjoint item groups with per-group selection budgets.

    Items outside every group are never selectable.
    """

    groups: tuple
    remaining: tuple

    def __post_init__(self):
        seen = set()
        for g in self.groups:
            for e in g:
                if e in seen:
                    raise ValidationError("item %d in two groups" % e)
                seen.add(e)
        if len(self.remaining) != len(self.groups):
            raise ValidationError("one budget per group required")
        if any(d < 0 for d in self.remaining):
            raise ValidationError("negative group budget")

    @classmethod
    def of(cls, groups: Sequence[Sequence[int]], limits: Sequence[int]) -> "PartitionConstraint":
        return cls(tuple(tuple(sorted(int(e) for e in g)) for g in groups),
                   tuple(int(d) for d in limits))

    @cached_property
    def _group_of(self) -> dict:
        out = {}
        for i, g in enumerate(self.groups):
            for e in g:
                out[e] = i
        return out

    def group_of(self, e: int) -> Optional[int]:
        return self._group_of.get(e)

    def can_select(self, e: int) -> bool:
        i = self._group_of.get(e)
        return i is not None and self.remaining[i] > 0

    def after(self, e: int) -> "PartitionConstraint":
        i = self._group_of[e]
        rem = list(self.remaining)
        rem[i] -= 1
        if rem[i] < 0:
            raise PolicyViolation("group %d budget exceeded" % i)
        return PartitionConstraint(self.groups, tuple(rem))

    def exhausted(self) -> bool:
        return all(d == 0 for d in self.remaining)

    def key(self):
        return ("part", self.remaining)

    def total_budget(self) -> int:
        return sum(min(d, len(g)) for d, g in zip(self.remaining, self.groups))


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceStep:
    round_index: int
    candidates: tuple
    chosen: int
    observed: int
    delta: Optional[float]


@dataclass(frozen=True)
class PolicyTrace:
    steps: tuple
    selected: tuple
    value: float


# ---------------------------------------------------------------------------
# policy base


class Policy:
    """Decision procedure: observation history + constraint state -> item or stop."""

    name = "policy"
    randomized = False
    supports_tree_eval = True

    def params(self) -> dict:
        return {}

    def describe(self) -> str:
        inner = ",".join("%s=%s" % (k, v) for k, v in sorted(self.params().items()))
        return "%s(%s)" % (self.name, inner)

    def fresh_constraint(self, n: int):
        return CardinalityConstraint(n)

    def init_scratch(self) -> dict:
        return {}

    def decide(self, ctx: EvalContext, psi: PartialRealization, cstate, scratch):
        raise NotImplementedError

    def run_on(self, ctx: EvalContext, phi, cstate=None) -> PolicyTrace:
        """Select-observe loop on a fixed realization; selections are irrevocable."""
        if cstate is None:
            cstate = self.fresh_constraint(ctx.n)
        psi = PSI_EMPTY
        scratch = self.init_scratch()
        steps = []
        rnd = 0
        while True:
            e = self.decide(ctx, psi, cstate, scratch)
            if e is None:
                break
            if e in psi:
                raise PolicyViolation("%s re-selected item %d" % (self.name, e))
            if not cstate.can_select(e):
                raise PolicyViolation("%s selected infeasible item %d" % (self.name, e))
            o = phi[e]
            rnd += 1
            steps.append(TraceStep(rnd, ctx.last_candidates, e, o, ctx.last_delta))
            psi = psi.with_observation(e, o)
            cstate = cstate.after(e)
        selected = psi.domain()
        return PolicyTrace(tuple(steps), selected, ctx.f.value(selected, phi))


def run_policy(pi: Policy, f, prior, phi, constraint=None, seed=0,
               delta_cache=None, mode="exact") -> PolicyTrace:
    """Execute one rollout of pi on realization phi and return its trace."""
    ctx = EvalContext(f, prior, seed=seed, delta_cache=delta_cache, mode=mode)
    return pi.run_on(ctx, phi, constraint)


def _feasible_pool(ctx, psi, cstate):
    return [e for e in range(ctx.n) if e not in psi and cstate.can_select(e)]


def _argmax_delta(ctx, psi, candidates):
    """Largest Delta(e|psi) among candidates; ties go to the smallest item."""
    best_e = None
    best_d = None
    for e in candidates:
        d = ctx.delta(e, psi)
        if best_d is None or d > best_d:
            best_e, best_d = e, d
    return best_e, best_d


def sample_budget(pool_size: int, group_size: int, limit: int, epsilon: float) -> int:
    """ceil((group_size/limit) * ln(1/eps)), clamped to the candidate pool."""
    s = math.ceil(group_size / limit * math.log(1.0 / epsilon))
    return min(max(s, 1), pool_size)


# ---------------------------------------------------------------------------
# concrete policies


class EmptyPolicy(Policy):
    name = "empty"

    def fresh_constraint(self, n):
        return CardinalityConstraint(0)

    def decide(self, ctx, psi, cstate, scratch):
        return None


class FixedSequencePolicy(Policy):
    """Selects a fixed item sequence, skipping already-observed items."""

    name = "fixed"

    def __init__(self, sequence: Sequence[int]):
        self.sequence = tuple(int(e) for e in sequence)

    def params(self):
        return {"seq": ":".join(map(str, self.sequence))}

    def fresh_constraint(self, n):
        return CardinalityConstraint(len(self.sequence))

    def decide(self, ctx, psi, cstate, scratch):
        if cstate.exhausted():
            return None
        for e in self.sequence:
            if e not in psi:
                return e
        return None


class AdaptiveGreedyPolicy(Policy):
    """Classic adaptive greedy: argmax Delta over all feasible items each round.

    The lazy variant keeps a max-heap of stale upper bounds and re-evaluates
    the top until a value evaluated at the current history dominates the next
    stale key.  Valid because adaptive submodularity makes Delta(e|.)
    non-increasing along the policy's own observation chain; both variants
    select identical items.
    """

    def __init__(self, k: int, lazy: bool = False):
        if k < 0:
            raise ValidationError("k must be >= 0")
        self.k = k
        self.lazy = lazy
        self.name = "lazy" if lazy else "greedy"

    def params(self):
        return {"k": self.k}

    def fresh_constraint(self, n):
        return CardinalityConstraint(min(self.k, n))

    def decide(self, ctx, psi, cstate, scratch):
        if cstate.exhausted():
            return None
        pool = _feasible_pool(ctx, psi, cstate)
        if not pool:
            return None
        if not self.lazy:
            e, d = _argmax_delta(ctx, psi, pool)
            ctx.record(pool, d)
            return e
        return self._decide_lazy(ctx, psi, scratch, pool)

    def _decide_lazy(self, ctx, psi, scratch, pool):
        rnd = scratch.get("round", 0) + 1
        scratch["round"] = rnd
        heap = scratch.get("heap")
        if heap is None:
            heap = [(-ctx.delta(e, psi), e, rnd) for e in pool]
            heapq.heapify(heap)
            scratch["heap"] = heap
            negd, e, _ = heapq.heappop(heap)
            ctx.record(pool, -negd)
            return e
        evaluated = []
        while heap:
            negd, e, stamp = heapq.heappop(heap)
            if e in psi:
                continue
            if stamp == rnd:
                ctx.record(evaluated, -negd)
                return e
            d = ctx.delta(e, psi)
            evaluated.append(e)
            if not heap or (-d, e) <= heap[0][:2]:
                ctx.record(evaluated, d)
                return e
            heapq.heappush(heap, (-d, e, rnd))
        return None


class AdaptiveStochasticGreedyPolicy(Policy):
    """Each round: subsample the unselected items, select the best of the sample.

    The sample has size ceil((n/k) * ln(1/eps)) (clamped to the pool), drawn
    uniformly without replacement.  Selection happens every round even when
    the best marginal value is zero.
    """

    name = "asg"
    randomized = True

    def __init__(self, k: int, epsilon: float):
        if k < 1:
            raise ValidationError("k must be >= 1")
        if not 0.0 < epsilon < 1.0:
            raise ValidationError("epsilon must be in (0,1)")
        self.k = k
        self.epsilon = epsilon

    def params(self):
        return {"k": self.k, "eps": self.epsilon}

    def fresh_constraint(self, n):
        return CardinalityConstraint(min(self.k, n))

    def decide(self, ctx, psi, cstate, scratch):
        if cstate.exhausted():
            return None
        pool = _feasible_pool(ctx, psi, cstate)
        if not pool:
            return None
        s = sample_budget(len(pool), ctx.n, self.k, self.epsilon)
        candidates = sorted(ctx.rng_for(psi).sample(pool, s))
        e, d = _argmax_delta(ctx, psi, candidates)
        ctx.record(candidates, d)
        return e


class RandomPolicy(Policy):
    """Selects k distinct items uniformly at random, ignoring observations."""

    name = "random"
    randomized = True

    def __init__(self, k: int):
        if k < 0:
            raise ValidationError("k must be >= 0")
        self.k = k

    def params(self):
        return {"k": self.k}

    def fresh_constraint(self, n):
        return CardinalityConstraint(min(self.k, n))

    def decide(self, ctx, psi, cstate, scratch):
        if cstate.exhausted():
            return None
        pool = _feasible_pool(ctx, psi, cstate)
        if not pool:
            return None
        e = ctx.rng_for(psi).choice(sorted(pool))
        ctx.record((e,), None)
        return e


class _PartitionPolicy(Policy):
    """Shared machinery: process groups in a fixed order, greedily within each."""

    def __init__(self, groups, limits, order=None):
        self.constraint = PartitionConstraint.of(groups, limits)
        b = len(self.constraint.groups)
        self.order = tuple(int(i) for i in (order if order is not None else range(b)))
        if sorted(self.order) != list(range(b)):
            raise ValidationError("order must be a permutation of the group indices")

    def fresh_constraint(self, n):
        return self.constraint

    def _active_group(self, psi, cstate):
        for i in self.order:
            if cstate.remaining[i] == 0:
                continue
            pool = [e for e in self.constraint.groups[i] if e not in psi]
            if pool:
                return i, pool
        return None, None

    def _order_param(self):
        return ":".join(map(str, self.order))


class LocallyGreedyPolicy(_PartitionPolicy):
    """Greedy within each group, groups processed in the given order.

    Each within-group selection conditions on everything observed so far,
    across all groups.
    """

    name = "local"

    def params(self):
        return {"order": self._order_param()}

    def decide(self, ctx, psi, cstate, scratch):
        i, pool = self._active_group(psi, cstate)
        if i is None:
            return None
        e, d = _argmax_delta(ctx, psi, pool)
        ctx.record(pool, d)
        return e


class GeneralizedASGPolicy(_PartitionPolicy):
    """Locally greedy with per-group subsampling of candidates.

    Within group i, each selection draws ceil((|B_i|/d_i) * ln(1/eps))
    candidates (clamped to the group's unselected pool) uniformly without
    replacement and takes the best of the draw.
    """

    name = "gasg"
    randomized = True

    def __init__(self, groups, limits, epsilon: float, order=None):
        super().__init__(groups, limits, order)
        if not 0.0 < epsilon < 1.0:
            raise ValidationError("epsilon must be in (0,1)")
        if any(d < 1 for d in self.constraint.remaining):
            raise ValidationError("every group budget must be >= 1")
        self.epsilon = epsilon

    def params(self):
        return {"eps": self.epsilon, "order": self._order_param()}

    def decide(self, ctx, psi, cstate, scratch):
        i, pool = self._active_group(psi, cstate)
        if i is None:
            return None
        group = self.constraint.groups[i]
        limit = self.constraint.remaining[i]
        s = sample_budget(len(pool), len(group), limit, self.epsilon)
        candidates = sorted(ctx.rng_for(psi).sample(pool, s))
        e, d = _argmax_delta(ctx, psi, candidates)
        ctx.record(candidates, d)
        return e


class ConcatPolicy(Policy):
    """Runs `first`, then runs `second` from an empty observation history.

    The second phase ignores everything the first observed; re-selections
    collapse in the union, and the final utility is f(union, phi).
    """

    name = "concat"
    supports_tree_eval = False

    def __init__(self, first: Policy, second: Policy):
        self.first = first
        self.second = second
        self.randomized = first.randomized or second.randomized

    def params(self):
        return {"first": self.first.describe(), "second": self.second.describe()}

    def run_on(self, ctx, phi, cstate=None):
        from .core import EvalContext
        ctx1 = EvalContext(ctx.f, ctx.prior, seed="%s/1" % ctx.seed,
                           delta_cache=ctx.delta_cache, mode=ctx.mode,
                           mc_samples=ctx.mc_samples)
        ctx2 = EvalContext(ctx.f, ctx.prior, seed="%s/2" % ctx.seed,
                           delta_cache=ctx.delta_cache, mode=ctx.mode,
                           mc_samples=ctx.mc_samples)
        t1 = self.first.run_on(ctx1, phi)
        t2 = self.second.run_on(ctx2, phi)
        steps = list(t1.steps)
        for st in t2.steps:
            steps.append(TraceStep(len(steps) + 1, st.candidates, st.chosen,
                                   st.observed, st.delta))
        selected = tuple(sorted(set(t1.selected) | set(t2.selected)))
        return PolicyTrace(tuple(steps), selected, ctx.f.value(selected, phi))

    def decide(self, ctx, psi, cstate, scratch):
        raise NotImplementedError("concatenation has no single decision stream")


# ---------------------------------------------------------------------------
# constructors mirroring the public operation names


def empty_policy() -> Policy:
    return EmptyPolicy()


def adaptive_greedy(k: int, variant: str = "naive") -> Policy:
    if variant not in ("naive", "lazy"):
        raise ValidationError("variant must be 'naive' or 'lazy'")
    return AdaptiveGreedyPolicy(k, lazy=(variant == "lazy"))


def adaptive_stochastic_greedy(k: int, epsilon: float) -> Policy:
    return AdaptiveStochasticGreedyPolicy(k, epsilon)


def locally_greedy(groups, limits, order=None) -> Policy:
    return LocallyGreedyPolicy(groups, limits, order)


def generalized_asg(groups, limits, epsilon: float, order=None) -> Policy:
    return GeneralizedASGPolicy(groups, limits, epsilon, order)


def concat(pi1: Policy, pi2: Policy) -> Policy:
    return ConcatPolicy(pi1, pi2)


def random_policy(k: int) -> Policy:
    return RandomPolicy(k)
