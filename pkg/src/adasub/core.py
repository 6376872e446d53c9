"""Domain types and expectation engines.

Items are plain integers in [0, n) and a realization is a length-n tuple of
state indices in [0, m).  A partial realization is an immutable, canonically
sorted collection of (item, state) observations; its sorted pair tuple doubles
as a memoization key everywhere in the package.

Probabilities are kept in plain double precision.  Exact expectations
enumerate the conditioned support and refuse (ExactModeUnavailable) when that
support exceeds ENUMERATION_CAP weighted realizations, except where
independence lets the expectation factorize over a single item's posterior.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    ExactModeUnavailable,
    ValidationError,
    ZeroProbabilityEvidence,
)

Realization = tuple  # length-n tuple of state indices

PROB_TOL = 1e-9
ENUMERATION_CAP = 1 << 20


# ---------------------------------------------------------------------------
# partial realizations


@dataclass(frozen=True)
class PartialRealization:
    """An observation history: (item, state) pairs with distinct items.

    Pairs are stored sorted by item, so `pairs` is a canonical key.
    """

    pairs: tuple

    @classmethod
    def of(cls, observations: Union[Mapping[int, int], Iterable]) -> "PartialRealization":
        if isinstance(observations, Mapping):
            items = observations.items()
        else:
            items = list(observations)
        pairs = tuple(sorted((int(e), int(o)) for e, o in items))
        seen = [e for e, _ in pairs]
        if len(set(seen)) != len(seen):
            raise ValidationError("duplicate item in partial realization: %r" % (pairs,))
        return cls(pairs)

    @classmethod
    def empty(cls) -> "PartialRealization":
        return cls(())

    @cached_property
    def _map(self) -> dict:
        return dict(self.pairs)

    def domain(self) -> tuple:
        return tuple(e for e, _ in self.pairs)

    def as_dict(self) -> dict:
        return dict(self.pairs)

    def state_of(self, e: int) -> Optional[int]:
        return self._map.get(e)

    def with_observation(self, e: int, o: int) -> "PartialRealization":
        if e in self._map:
            raise ValidationError("item %d already observed" % e)
        return PartialRealization(tuple(sorted(self.pairs + ((e, o),))))

    def __contains__(self, e: int) -> bool:
        return e in self._map

    def __len__(self) -> int:
        return len(self.pairs)


PSI_EMPTY = PartialRealization.empty()


def consistent(psi: PartialRealization, phi: Sequence) -> bool:
    """True iff every observation in psi matches the full realization phi."""
    return all(phi[e] == o for e, o in psi.pairs)


def subrealization(psi: PartialRealization, psi2: PartialRealization) -> bool:
    """True iff psi2 extends psi: same states on all of psi's domain."""
    m2 = psi2._map
    return all(m2.get(e) == o for e, o in psi.pairs)


# ---------------------------------------------------------------------------
# priors


class Prior:
    """Distribution over realizations.  Subclasses: Independent, Explicit."""

    n: int
    m: int

    def evidence_probability(self, psi: PartialRealization) -> float:
        raise NotImplementedError

    def item_posterior(self, e: int, psi: PartialRealization):
        """List of (state, prob) with prob > 0 for item e given evidence psi."""
        raise NotImplementedError

    def support(self, psi: PartialRealization = PSI_EMPTY):
        """Enumerate [(realization, prob)] consistent with psi, renormalized."""
        raise NotImplementedError

    def support_size(self, psi: PartialRealization = PSI_EMPTY) -> int:
        raise NotImplementedError

    def sample(self, rng: random.Random, psi: PartialRealization = PSI_EMPTY) -> tuple:
        raise NotImplementedError

    def item_states(self, e: int) -> tuple:
        """States of item e with positive marginal probability."""
        raise NotImplementedError


class IndependentPrior(Prior):
    """Per-item categorical distributions; items are mutually independent."""

    def __init__(self, probs: Sequence[Sequence[float]]):
        self.probs = tuple(tuple(float(p) for p in row) for row in probs)
        self.n = len(self.probs)
        if self.n == 0:
            raise ValidationError("empty ground set")
        self.m = len(self.probs[0])
        for e, row in enumerate(self.probs):
            if len(row) != self.m:
                raise ValidationError("item %d has %d states, expected %d" % (e, len(row), self.m))
            if any(p < 0 for p in row):
                raise ValidationError("negative probability for item %d" % e)
            if abs(sum(row) - 1.0) > PROB_TOL:
                raise ValidationError("prior normalization: item %d sums to %.17g" % (e, sum(row)))

    def evidence_probability(self, psi):
        p = 1.0
        for e, o in psi.pairs:
            p *= self.probs[e][o]
        return p

    def item_posterior(self, e, psi):
        o_seen = psi.state_of(e)
        if o_seen is not None:
            return [(o_seen, 1.0)]
        return [(o, p) for o, p in enumerate(self.probs[e]) if p > 0.0]

    def item_states(self, e):
        return tuple(o for o, p in enumerate(self.probs[e]) if p > 0.0)

    def support_size(self, psi=PSI_EMPTY):
        size = 1
        for e in range(self.n):
            size *= len(self.item_posterior(e, psi))
            if size > ENUMERATION_CAP:
                return size
        return size

    def support(self, psi=PSI_EMPTY):
        if self.evidence_probability(psi) <= 0.0:
            raise ZeroProbabilityEvidence("evidence %r has zero probability" % (psi.pairs,))
        if self.support_size(psi) > ENUMERATION_CAP:
            raise ExactModeUnavailable(
                "conditioned support exceeds %d realizations" % ENUMERATION_CAP)
        per_item = [self.item_posterior(e, psi) for e in range(self.n)]
        out = []
        for combo in itertools.product(*per_item):
            phi = tuple(o for o, _ in combo)
            p = 1.0
            for _, q in combo:
                p *= q
            out.append((phi, p))
        return out

    def sample(self, rng, psi=PSI_EMPTY):
        states = []
        for e in range(self.n):
            o_seen = psi.state_of(e)
            if o_seen is not None:
                states.append(o_seen)
            else:
                u = rng.random()
                acc = 0.0
                chosen = None
                for o, p in enumerate(self.probs[e]):
                    acc += p
                    if u < acc:
                        chosen = o
                        break
                states.append(chosen if chosen is not None else self.m - 1)
        return tuple(states)


class ExplicitPrior(Prior):
    """A weighted list of realizations (supports arbitrary correlations)."""

    def __init__(self, weighted: Sequence):
        entries = [(tuple(int(s) for s in phi), float(p)) for phi, p in weighted]
        if not entries:
            raise ValidationError("empty support")
        self.n = len(entries[0][0])
        self.m = max(max(phi) for phi, _ in entries) + 1
        seen = set()
        for phi, p in entries:
            if len(phi) != self.n:
                raise ValidationError("realization length mismatch")
            if p < 0:
                raise ValidationError("negative probability")
            if phi in seen:
                raise ValidationError("duplicate realization %r in support" % (phi,))
            seen.add(phi)
        total = sum(p for _, p in entries)
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError("prior normalization: support sums to %.17g" % total)
        self.weighted = tuple(entries)

    def evidence_probability(self, psi):
        return sum(p for phi, p in self.weighted if consistent(psi, phi))

    def _consistent(self, psi):
        sub = [(phi, p) for phi, p in self.weighted if consistent(psi, phi) and p > 0.0]
        total = sum(p for _, p in sub)
        if total <= 0.0:
            raise ZeroProbabilityEvidence("evidence %r has zero probability" % (psi.pairs,))
        return sub, total

    def item_posterior(self, e, psi):
        sub, total = self._consistent(psi)
        mass = {}
        for phi, p in sub:
            mass[phi[e]] = mass.get(phi[e], 0.0) + p
        return sorted((o, p / total) for o, p in mass.items())

    def item_states(self, e):
        return tuple(sorted({phi[e] for phi, p in self.weighted if p > 0.0}))

    def support_size(self, psi=PSI_EMPTY):
        return sum(1 for phi, p in self.weighted if consistent(psi, phi) and p > 0.0)

    def support(self, psi=PSI_EMPTY):
        sub, total = self._consistent(psi)
        return [(phi, p / total) for phi, p in sub]

    def sample(self, rng, psi=PSI_EMPTY):
        sub, total = self._consistent(psi)
        u = rng.random() * total
        acc = 0.0
        for phi, p in sub:
            acc += p
            if u < acc:
                return phi
        return sub[-1][0]


@dataclass(frozen=True)
class ConditionedPrior:
    """A prior together with evidence; presents the posterior p(phi | psi)."""

    base: Prior
    evidence: PartialRealization

    def __post_init__(self):
        if self.base.evidence_probability(self.evidence) <= 0.0:
            raise ZeroProbabilityEvidence(
                "evidence %r has zero probability" % (self.evidence.pairs,))

    @property
    def n(self):
        return self.base.n

    @property
    def m(self):
        return self.base.m

    def item_posterior(self, e: int):
        return self.base.item_posterior(e, self.evidence)

    def support(self):
        return self.base.support(self.evidence)

    def support_size(self):
        return self.base.support_size(self.evidence)

    def sample(self, rng: random.Random):
        return self.base.sample(rng, self.evidence)


def condition(prior, psi: PartialRealization) -> ConditionedPrior:
    """Posterior over realizations given evidence psi.

    Conditioning an already-conditioned prior merges the evidence; conflicting
    observations make the joint evidence impossible and raise
    ZeroProbabilityEvidence.
    """
    if isinstance(prior, ConditionedPrior):
        merged = dict(prior.evidence.pairs)
        for e, o in psi.pairs:
            if merged.get(e, o) != o:
                raise ZeroProbabilityEvidence(
                    "conflicting observations for item %d" % e)
            merged[e] = o
        return ConditionedPrior(prior.base, PartialRealization.of(merged))
    return ConditionedPrior(prior, psi)


def sample_realization(prior, stream: random.Random) -> tuple:
    """Draw one realization from a Prior or ConditionedPrior."""
    if isinstance(prior, ConditionedPrior):
        return prior.sample(stream)
    return prior.sample(stream, PSI_EMPTY)


# ---------------------------------------------------------------------------
# utility functions


class UtilityFunction:
    """f(S, phi) >= 0 with evaluation counters.

    f_counter counts raw f evaluations; delta_counter counts marginal-utility
    oracle invocations (one per candidate item examined, the unit in which
    the sampling policies' complexity bounds are stated).
    """

    depends_only_on_selected = False

    def __init__(self):
        self.f_counter = 0
        self.delta_counter = 0

    def reset_counters(self):
        self.f_counter = 0
        self.delta_counter = 0

    def value(self, items: Iterable[int], states) -> float:
        """Evaluate f on the selected items under the given states.

        `states` is a full realization tuple, or (for utilities that depend
        only on selected items' states) any mapping covering `items`.
        """
        self.f_counter += 1
        return self._value(items, states)

    def _value(self, items, states):
        raise NotImplementedError


class CoverageUtility(UtilityFunction):
    """Weighted coverage: each (item, state) covers a subset of a universe.

    f(S, phi) = total weight of the union of the selected items' realized
    coverage sets.  Monotone in S for every phi, and adaptive submodular for
    independent priors.
    """

    depends_only_on_selected = True

    def __init__(self, weights: Sequence[float], covers: Sequence[Sequence[int]]):
        super().__init__()
        self.weights = tuple(float(w) for w in weights)
        if any(w < 0 for w in self.weights):
            raise ValidationError("negative universe weight")
        self.universe_size = len(self.weights)
        self.covers = tuple(tuple(int(mask) for mask in row) for row in covers)
        full = (1 << self.universe_size) - 1
        for e, row in enumerate(self.covers):
            for mask in row:
                if mask & ~full:
                    raise ValidationError("coverage of item %d outside universe" % e)

    @property
    def n(self):
        return len(self.covers)

    @property
    def m(self):
        return len(self.covers[0]) if self.covers else 0

    def _value(self, items, states):
        mask = 0
        for e in items:
            mask |= self.covers[e][states[e]]
        total = 0.0
        while mask:
            bit = mask & -mask
            total += self.weights[bit.bit_length() - 1]
            mask ^= bit
        return total


class TabularUtility(UtilityFunction):
    """Explicit table of f over (selected-set bitmask, realization index).

    Only usable with an ExplicitPrior whose support matches `realizations`;
    exists to build counterexamples for the definitional checkers.
    """

    MAX_ITEMS = 12

    def __init__(self, n: int, realizations: Sequence, table: Sequence[Sequence[float]]):
        super().__init__()
        if n > self.MAX_ITEMS:
            raise ValidationError("tabular utility limited to n <= %d" % self.MAX_ITEMS)
        self.n = n
        self.realizations = tuple(tuple(int(s) for s in phi) for phi in realizations)
        self._index = {phi: i for i, phi in enumerate(self.realizations)}
        self.table = tuple(tuple(float(v) for v in row) for row in table)
        if len(self.table) != (1 << n):
            raise ValidationError("table must have a row per subset bitmask")
        for row in self.table:
            if len(row) != len(self.realizations):
                raise ValidationError("table row length mismatch")
            if any(v < 0 for v in row):
                raise ValidationError("negative utility value")

    def _value(self, items, states):
        if not isinstance(states, tuple):
            states = tuple(states)
        mask = 0
        for e in items:
            mask |= 1 << e
        try:
            idx = self._index[states]
        except KeyError:
            raise ValidationError("realization %r not in the table" % (states,))
        return self.table[mask][idx]


# ---------------------------------------------------------------------------
# expectation engines


def _joint_hidden_posterior(cond: ConditionedPrior, hidden: Sequence[int]):
    """Joint posterior over the states of `hidden` items, as [(assignment, p)]."""
    base = cond.base
    if isinstance(base, IndependentPrior):
        per_item = [cond.item_posterior(e) for e in hidden]
        out = []
        for combo in itertools.product(*per_item):
            p = 1.0
            for _, q in combo:
                p *= q
            out.append((tuple(o for o, _ in combo), p))
        return out
    mass = {}
    for phi, p in cond.support():
        key = tuple(phi[e] for e in hidden)
        mass[key] = mass.get(key, 0.0) + p
    return sorted(mass.items())


def expected_set_value(f: UtilityFunction, prior, psi: PartialRealization,
                       items: Sequence[int]) -> float:
    """E[f(items, Phi) | Phi ~ psi]."""
    cond = condition(prior, psi)
    if f.depends_only_on_selected:
        hidden = [e for e in items if e not in psi]
        if not hidden:
            return f.value(items, psi.as_dict())
        fixed = psi.as_dict()
        total = 0.0
        for assignment, p in _joint_hidden_posterior(cond, hidden):
            states = dict(fixed)
            states.update(zip(hidden, assignment))
            total += p * f.value(items, states)
        return total
    total = 0.0
    for phi, p in cond.support():
        total += p * f.value(items, phi)
    return total


def _delta_exact(f, prior, psi, e):
    """Delta(e | psi) without touching delta_counter."""
    cond = condition(prior, psi)
    dom = psi.domain()
    dom_e = dom + (e,)
    if f.depends_only_on_selected:
        # f(dom, .) is fixed by psi and f(dom+e, .) depends on Phi_e only,
        # so the expectation reduces to item e's posterior for any prior.
        fixed = psi.as_dict()
        base = f.value(dom, fixed)
        total = 0.0
        for o, p in cond.item_posterior(e):
            states = dict(fixed)
            states[e] = o
            total += p * (f.value(dom_e, states) - base)
        return total
    total = 0.0
    for phi, p in cond.support():
        total += p * (f.value(dom_e, phi) - f.value(dom, phi))
    return total


def _delta_mc(f, prior, psi, e, samples, seed):
    cond = condition(prior, psi)
    rng = random.Random("delta|%s|%s" % (seed, psi.pairs))
    dom = psi.domain()
    dom_e = dom + (e,)
    acc = 0.0
    for _ in range(samples):
        phi = cond.sample(rng)
        acc += f.value(dom_e, phi) - f.value(dom, phi)
    return acc / samples


def marginal_utility(f: UtilityFunction, prior, psi: PartialRealization, e: int,
                     mode: str = "exact", samples: int = 10_000, seed=0) -> float:
    """Conditional expected marginal utility of item e given observations psi.

    Counts one delta_counter tick; returns 0 with no f evaluations when e is
    already observed (adding it again cannot change the selected set).
    """
    f.delta_counter += 1
    if e in psi:
        return 0.0
    if mode == "exact":
        return _delta_exact(f, prior, psi, e)
    if mode == "mc":
        return _delta_mc(f, prior, psi, e, samples, seed)
    raise ValueError("unknown mode %r" % mode)


class EvalContext:
    """Shared evaluation state for policy rollouts.

    Bundles the utility, the prior, the master seed for internal policy
    randomness, and an optional cross-rollout cache of exact Delta values.
    The per-decision random stream is derived from (seed, observation
    history), so a policy's choice at a given history is reproducible no
    matter how that history was reached.
    """

    def __init__(self, f, prior, seed=0, delta_cache=None, mode="exact",
                 mc_samples=2000):
        self.f = f
        self.prior = prior
        self.seed = seed
        self.delta_cache = delta_cache
        self.mode = mode
        self.mc_samples = mc_samples
        self.last_candidates = ()
        self.last_delta = None

    @property
    def n(self):
        return self.prior.n

    def rng_for(self, psi: PartialRealization) -> random.Random:
        return random.Random("%s|%s" % (self.seed, psi.pairs))

    def delta(self, e: int, psi: PartialRealization) -> float:
        self.f.delta_counter += 1
        if e in psi:
            return 0.0
        if self.mode == "mc":
            return _delta_mc(self.f, self.prior, psi, e, self.mc_samples, self.seed)
        if self.delta_cache is None:
            return _delta_exact(self.f, self.prior, psi, e)
        key = (psi.pairs, e)
        val = self.delta_cache.get(key)
        if val is None:
            val = _delta_exact(self.f, self.prior, psi, e)
            self.delta_cache[key] = val
        return val

    def record(self, candidates, delta):
        self.last_candidates = tuple(candidates)
        self.last_delta = delta
