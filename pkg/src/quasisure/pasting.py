"""Pasting of measures along a sub-sigma-algebra and the finite stabilisation."""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

from .exceptions import InputError, PreconditionError
from .hahn import DominatingPartition, build_dominating_partition, minimal_support
from .measures import Measure, MeasureFamily
from .space import SigmaAlgebra, as_event, universal_complete


def paste(theta: Measure, theta2: Measure, event, sigma: SigmaAlgebra, family: MeasureFamily,
          dp: DominatingPartition | None = None) -> Measure:
    """Follow ``theta`` off ``event``; on ``event`` keep the block masses of
    ``theta`` but redistribute inside each block as ``theta2`` does.

    ``event`` must be measurable in the universal completion and lie inside
    the intersection of the two minimal supports.
    """
    event = as_event(event, sigma.n)
    if not universal_complete(sigma, family).is_measurable(event):
        raise PreconditionError(f"{sorted(event)} is not measurable in the universal completion")
    if dp is None:
        dp = build_dominating_partition(family, sigma)
    common = minimal_support(theta, sigma, dp) & minimal_support(theta2, sigma, dp)
    if not event <= common:
        raise PreconditionError(
            f"{sorted(event)} leaves the support intersection {sorted(common)}"
        )
    return _paste(theta, theta2, event, sigma)


def _paste(theta: Measure, theta2: Measure, event: frozenset[int], sigma: SigmaAlgebra) -> Measure:
    w = list(theta.weights)
    for block in sigma.blocks:
        inside = block & event
        if not inside:
            continue
        mass = theta.mass(inside)
        denom = theta2.mass(block)
        for a in block:
            if a in event:
                w[a] = mass * theta2.weights[a] / denom if denom else Fraction(0)
    return Measure(w)


class Closure(str, Enum):
    FIXPOINT = "fixpoint"
    BUDGET_EXHAUSTED = "budget_exhausted"

    def __str__(self):
        return self.value


class StabilizeResult(NamedTuple):
    family: MeasureFamily
    status: Closure


def _events_within(common: frozenset[int], completion_blocks):
    blocks = [b for b in completion_blocks if b <= common]
    for r in range(1, len(blocks) + 1):
        for combo in combinations(blocks, r):
            yield frozenset().union(*combo)


def admissible_events(theta: Measure, theta2: Measure, sigma: SigmaAlgebra, dp: DominatingPartition):
    """Nonempty completion-measurable subsets of the two supports' intersection."""
    common = minimal_support(theta, sigma, dp) & minimal_support(theta2, sigma, dp)
    return _events_within(common, dp.completion.blocks)


def stabilize(family: MeasureFamily, sigma: SigmaAlgebra, budget: int = 500) -> StabilizeResult:
    """Close ``family`` under pasting, breadth first.

    Minimal supports are taken from the dominating partition of the input
    family; pasting never creates new polar sets, so it stays valid for
    every measure reached. Stops once ``budget`` members exist and another
    new one turns up.
    """
    if budget < len(family):
        raise InputError(f"budget {budget} is smaller than the family size {len(family)}")
    dp = build_dominating_partition(family, sigma)
    known = list(family.members)
    names = list(family.names)
    seen = {m.weights for m in known}
    supports = [minimal_support(m, sigma, dp) for m in known]
    completion_blocks = dp.completion.blocks
    fresh = 0

    k = 0
    while k < len(known):
        for i, j in [(k, j) for j in range(k + 1)] + [(j, k) for j in range(k)]:
            for event in _events_within(supports[i] & supports[j], completion_blocks):
                psi = _paste(known[i], known[j], event, sigma)
                if psi.weights in seen:
                    continue
                if len(known) >= budget:
                    return StabilizeResult(MeasureFamily(known, names), Closure.BUDGET_EXHAUSTED)
                seen.add(psi.weights)
                known.append(psi)
                supports.append(minimal_support(psi, sigma, dp))
                fresh += 1
                name = f"psi{fresh}"
                while name in names:
                    fresh += 1
                    name = f"psi{fresh}"
                names.append(name)
        k += 1
    return StabilizeResult(MeasureFamily(known, names), Closure.FIXPOINT)


def is_stable(family: MeasureFamily, sigma: SigmaAlgebra) -> bool:
    """True if no single admissible paste of two members leaves the family."""
    dp = build_dominating_partition(family, sigma)
    seen = family.weight_set()
    for theta in family:
        for theta2 in family:
            for event in admissible_events(theta, theta2, sigma, dp):
                if _paste(theta, theta2, event, sigma).weights not in seen:
                    return False
    return True
