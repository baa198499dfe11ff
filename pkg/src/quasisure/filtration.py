"""Discrete-time filtrations: conditional chains, recursivity, martingales
and integrability at a finite horizon."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .exceptions import InputError
from .expectation import cond_sublinear, qs_difference, qs_leq, sublinear_expectation
from .hahn import build_dominating_partition
from .measures import NEG_INF, MeasureFamily, RandomVariable, to_fraction
from .report import CheckResult, Report, Verdict
from .space import SigmaAlgebra, polar_atoms, universal_complete


@dataclass(frozen=True)
class Filtration:
    levels: tuple[SigmaAlgebra, ...]

    def __init__(self, levels: Iterable[SigmaAlgebra]):
        levels = tuple(levels)
        if not levels:
            raise InputError("a filtration needs at least one level")
        for t, (a, b) in enumerate(zip(levels, levels[1:])):
            if not b.refines(a):
                raise InputError(f"level {t + 1} does not refine level {t}")
        object.__setattr__(self, "levels", levels)

    @property
    def horizon(self) -> int:
        return len(self.levels) - 1

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, t: int) -> SigmaAlgebra:
        return self.levels[t]


class _Conditioner:
    """Per-level conditional sublinear expectations, partitions built once."""

    def __init__(self, family: MeasureFamily, filtration: Filtration):
        self.family = family
        self.filtration = filtration
        self.partitions = [build_dominating_partition(family, G) for G in filtration.levels]

    def __call__(self, t: int, X: RandomVariable) -> RandomVariable:
        return cond_sublinear(X, self.family, self.filtration[t], self.partitions[t]).value


@dataclass(frozen=True)
class AdaptedProcess:
    variables: tuple[RandomVariable, ...]

    def __init__(self, variables: Iterable[RandomVariable]):
        object.__setattr__(self, "variables", tuple(variables))

    def __len__(self):
        return len(self.variables)

    def __getitem__(self, t: int) -> RandomVariable:
        return self.variables[t]

    def is_adapted(self, family: MeasureFamily, filtration: Filtration) -> bool:
        null = polar_atoms(family)
        return len(self) == len(filtration) and all(
            universal_complete(G, family).is_measurable_function(X.values, ignore=null)
            for X, G in zip(self.variables, filtration.levels)
        )


def conditional_chain(X: RandomVariable, family: MeasureFamily, filtration: Filtration) -> AdaptedProcess:
    """``(E_t(X))_{t=0..T}``."""
    E = _Conditioner(family, filtration)
    return AdaptedProcess(E(t, X) for t in range(len(filtration)))


def check_recursivity(X: RandomVariable, family: MeasureFamily, filtration: Filtration) -> Report:
    """``E_s(E_t(X)) = E_s(X)`` q.s. for every ``s <= t``; one result per pair."""
    E = _Conditioner(family, filtration)
    chain = [E(t, X) for t in range(len(filtration))]
    report = Report()
    for s in range(len(filtration)):
        for t in range(s, len(filtration)):
            nested = E(s, chain[t])
            d = qs_difference(nested, chain[s], family)
            witness = {}
            if d:
                a = min(d)
                witness = {"s": s, "t": t, "atom": a, "E_s(E_t(X))": nested[a], "E_s(X)": chain[s][a]}
            report.results.append(CheckResult(f"recursivity[{s},{t}]",
                                              Verdict.FAIL if d else Verdict.PASS, witness))
    return report


class MartingaleClass(str, Enum):
    MARTINGALE = "martingale"
    SUBMARTINGALE = "submartingale"
    SUPERMARTINGALE = "supermartingale"
    NONE = "none"

    def __str__(self):
        return self.value


def classify_martingale(process: AdaptedProcess, family: MeasureFamily, filtration: Filtration) -> MartingaleClass:
    """Compare ``X_t`` with ``E_t(X_{t+1})`` quasi-surely at every ``t``.

    Sub- and supermartingale together means martingale, so that case is
    reported as a martingale.
    """
    if len(process) != len(filtration):
        raise InputError("process and filtration have different horizons")
    E = _Conditioner(family, filtration)
    sub = sup = True
    for t in range(len(filtration) - 1):
        nxt = E(t, process[t + 1])
        if qs_leq(process[t], nxt, family):
            sub = False
        if qs_leq(nxt, process[t], family):
            sup = False
    if sub and sup:
        return MartingaleClass.MARTINGALE
    if sub:
        return MartingaleClass.SUBMARTINGALE
    if sup:
        return MartingaleClass.SUPERMARTINGALE
    return MartingaleClass.NONE


def uniform_integrability_profile(variables: Sequence[RandomVariable], family: MeasureFamily,
                                  cutoffs: Iterable) -> dict[Fraction, Fraction]:
    """``c -> sup_X E(|X| 1{|X| >= c})`` for each cutoff."""
    variables = list(variables)
    if not variables:
        raise InputError("empty family of variables")
    out = {}
    for c in cutoffs:
        c = to_fraction(c)
        best = None
        for X in variables:
            if not X.is_finite():
                raise InputError("uniform integrability needs finite-valued variables")
            tail = RandomVariable(abs(v) if abs(v) >= c else Fraction(0) for v in X)
            value = sublinear_expectation(tail, family)
            best = value if best is None else max(best, value)
        out[c] = best
    return out


def lpb_membership(X: RandomVariable, p, family: MeasureFamily) -> bool:
    """Membership of the closure of bounded functions in the ``p``-norm.

    On a finite space this is boundedness off a polar set.
    """
    if to_fraction(p) < 1:
        raise InputError("p must be at least 1")
    null = polar_atoms(family)
    return all(X[a] is not NEG_INF for a in range(X.n) if a not in null)
