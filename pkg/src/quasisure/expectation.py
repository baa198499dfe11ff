"""Sublinear expectations, quasi-sure essential suprema and conditioning.

Every conditional object here is defined only up to a polar set. Values on
polar atoms follow fixed conventions (pointwise supremum for essential
suprema, ``NEG_INF`` off a measure's support) and comparisons between
conditional results ignore polar atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exceptions import InconsistentFamilyError, InputError, PreconditionError
from .hahn import DominatingPartition, build_dominating_partition, minimal_support
from .measures import NEG_INF, Measure, MeasureFamily, RandomVariable, pointwise_max, weighted_sum
from .pasting import Closure, stabilize
from .report import CheckResult, Report, Verdict
from .space import SigmaAlgebra, polar_atoms, universal_complete


def sublinear_expectation(X: RandomVariable, family: MeasureFamily) -> Fraction:
    """``max`` of the linear expectations over the family.

    Raises :class:`NotIntegrableError` if ``X`` is ``NEG_INF`` on an atom some
    member charges.
    """
    return max(theta.expect(X) for theta in family)


class SublinearExpectation:
    """Callable wrapper around a representing family."""

    def __init__(self, family: MeasureFamily):
        self.family = family

    def __call__(self, X: RandomVariable) -> Fraction:
        return sublinear_expectation(X, self.family)

    def conditional(self, X: RandomVariable, sigma: SigmaAlgebra) -> "ConditionalResult":
        return cond_sublinear(X, self.family, sigma)

    def argmax(self, X: RandomVariable) -> list[str]:
        best = self(X)
        return [name for name, theta in self.family.items() if theta.expect(X) == best]


@dataclass(frozen=True)
class ConditionalResult:
    value: RandomVariable
    polar_mask: frozenset[int] = field(default_factory=frozenset)

    def __getitem__(self, atom):
        return self.value[atom]

    @property
    def values(self):
        return self.value.values


def qs_difference(a, b, family: MeasureFamily) -> frozenset[int]:
    """Non-polar atoms where ``a`` and ``b`` differ."""
    a = a.value if isinstance(a, ConditionalResult) else a
    b = b.value if isinstance(b, ConditionalResult) else b
    null = polar_atoms(family)
    return frozenset(i for i in range(a.n) if i not in null and a[i] != b[i])


def qs_equal(a, b, family: MeasureFamily) -> bool:
    return not qs_difference(a, b, family)


def qs_leq(a, b, family: MeasureFamily) -> frozenset[int]:
    """Non-polar atoms where ``a > b``; empty means ``a <= b`` q.s."""
    a = a.value if isinstance(a, ConditionalResult) else a
    b = b.value if isinstance(b, ConditionalResult) else b
    null = polar_atoms(family)
    return frozenset(i for i in range(a.n) if i not in null and a[i] > b[i])


# -- essential suprema -------------------------------------------------------

def classical_esssup(variables: Sequence[RandomVariable], theta: Measure) -> RandomVariable:
    """theta-essential supremum; the canonical version is the pointwise maximum.

    Any variable agreeing with it on theta-charged atoms is an equally valid
    version.
    """
    return pointwise_max(variables)


def qs_esssup(variables: Sequence[RandomVariable], family: MeasureFamily,
              dp: DominatingPartition) -> RandomVariable:
    """Quasi-sure essential supremum, stitched part by part.

    On each support ``S_phi`` take the phi-essential supremum; on the polar
    remainder use the pointwise supremum.
    """
    variables = list(variables)
    if not variables:
        raise InputError("essential supremum of an empty family")
    fallback = pointwise_max(variables)
    out = list(fallback.values)
    for part in dp.parts:
        local = classical_esssup(variables, part.phi)
        for a in part.support:
            out[a] = local[a]
    return RandomVariable._trusted(tuple(out))


def aggregate(indexed_family: Mapping, family: MeasureFamily, sigma: SigmaAlgebra,
              dp: DominatingPartition | None = None) -> RandomVariable:
    """Single variable agreeing theta-a.s. with ``indexed_family[theta]`` for each theta.

    Keys may be member indices or names. Each variable must equal a function
    measurable for the theta-completion of ``sigma`` theta-almost surely, and
    any two must agree theta-a.s. on the intersection of their minimal
    supports; otherwise :class:`InconsistentFamilyError` carries a witness.
    """
    dp = dp or build_dominating_partition(family, sigma)
    by_index: dict[int, RandomVariable] = {}
    for key, X in indexed_family.items():
        i = family.names.index(key) if isinstance(key, str) else int(key)
        by_index[i] = X
    missing = [family.names[i] for i in range(len(family)) if i not in by_index]
    if missing:
        raise InputError(f"no variable given for {missing}")

    supports = [minimal_support(theta, sigma, dp) for theta in family]
    for i, theta in enumerate(family):
        X = by_index[i]
        for b in sigma.blocks:
            seen = {X[a] for a in b if theta[a] > 0}
            if len(seen) > 1:
                raise PreconditionError(
                    f"variable for {family.names[i]} is not measurable for its completion on block {sorted(b)}"
                )
    for i, theta in enumerate(family):
        for j in range(len(family)):
            if i == j:
                continue
            for a in sorted(supports[i] & supports[j]):
                if theta[a] > 0 and by_index[i][a] != by_index[j][a]:
                    raise InconsistentFamilyError(
                        f"{family.names[i]} and {family.names[j]} disagree at atom {a}: "
                        f"{by_index[i][a]} != {by_index[j][a]}",
                        (i, j, a),
                    )
    masked = [
        RandomVariable(by_index[i][a] if a in supports[i] else NEG_INF for a in range(sigma.n))
        for i in range(len(family))
    ]
    stitched = qs_esssup(masked, family, dp)
    raw = pointwise_max(by_index.values())
    return RandomVariable(raw[a] if stitched[a] is NEG_INF else stitched[a] for a in range(sigma.n))


# -- conditional expectations ------------------------------------------------

def cond_exp_qs(X: RandomVariable, theta: Measure, family: MeasureFamily, sigma: SigmaAlgebra,
                dp: DominatingPartition | None = None) -> ConditionalResult:
    """theta-conditional expectation given ``sigma``, fixed quasi-surely.

    Block averages under theta on the minimal support of theta, ``NEG_INF``
    off it. theta-null blocks inside the support are polar; they get value 0
    and are listed in ``polar_mask``.
    """
    dp = dp or build_dominating_partition(family, sigma)
    index = next((i for i, m in enumerate(dp.family) if m is theta), None) if sigma == dp.sigma else None
    if index is None:
        support = minimal_support(theta, sigma, dp)
        pieces = [(tuple(sorted(b & support)), theta.mass(b & support)) for b in sigma.blocks if b & support]
    else:
        pieces = dp.member_pieces[index]
    out = [NEG_INF] * sigma.n
    mask = set()
    for piece, mass in pieces:
        if mass:
            avg = weighted_sum(theta.weights, X.values, piece) / mass
            for a in piece:
                out[a] = avg
        else:
            for a in piece:
                out[a] = Fraction(0)
            mask.update(piece)
    return ConditionalResult(RandomVariable._trusted(tuple(out)), frozenset(mask))


def cond_sublinear(X: RandomVariable, family: MeasureFamily, sigma: SigmaAlgebra,
                   dp: DominatingPartition | None = None) -> ConditionalResult:
    """Conditional sublinear expectation as the q.s. essential supremum of the
    per-measure conditional expectations."""
    dp = dp or build_dominating_partition(family, sigma)
    pieces = [cond_exp_qs(X, theta, family, sigma, dp) for theta in family]
    value = qs_esssup([p.value for p in pieces], family, dp)
    mask = frozenset(range(sigma.n)) - dp.covered
    for p in pieces:
        mask |= p.polar_mask
    return ConditionalResult(value, mask)


def membership(X: RandomVariable, family: MeasureFamily, sigma: SigmaAlgebra | None = None) -> dict[str, bool]:
    """Which of the spaces ``mG^Theta``, ``H_G``, ``L^1(E;G)`` contain ``X``.

    ``sigma`` defaults to the power set. With values in the rationals and
    ``NEG_INF``, ``E_theta[X^+]`` is always finite, so ``H`` coincides with
    measurability; ``L^1`` additionally needs ``X`` finite quasi-surely.
    """
    sigma = sigma or SigmaAlgebra.discrete(X.n)
    completion = universal_complete(sigma, family)
    null = polar_atoms(family)
    measurable = completion.is_measurable_function(X.values, ignore=null)
    finite = X.is_finite(a for a in range(X.n) if a not in null)
    return {"measurable": measurable, "H": measurable, "L1": measurable and finite}


# -- checks ------------------------------------------------------------------

_CONSTANTS = (Fraction(0), Fraction(1), Fraction(-1), Fraction(5, 2))


def check_axioms(family: MeasureFamily, samples: Sequence[RandomVariable], chain_length: int = 4) -> Report:
    """Test the six coherent sublinear expectation axioms on ``samples``.

    Monotone continuity is exercised on chains ``min(X^+, k*m/K)``,
    ``k = 0..K``, which increase pointwise to ``X^+`` (reached at ``K``).
    """
    samples = list(samples)
    if len(samples) < 2:
        raise InputError("check_axioms needs at least two samples")
    n = family.n
    E = SublinearExpectation(family)
    consts = _CONSTANTS
    report = Report()

    def record(name, witness):
        report.results.append(CheckResult(name, Verdict.PASS if witness is None else Verdict.FAIL, witness or {}))

    witness = None
    for i, X in enumerate(samples):
        for j, Y in enumerate(samples):
            upper = pointwise_max([X, Y])
            if E(upper) < E(X):
                witness = {"X": i, "Y": j, "E(max)": E(upper), "E(X)": E(X)}
                break
            if all(x >= y for x, y in zip(X, Y)) and E(X) < E(Y):
                witness = {"X": i, "Y": j, "E(X)": E(X), "E(Y)": E(Y)}
                break
        if witness:
            break
    record("monotonicity", witness)

    witness = next(({"c": c, "E(c)": E(RandomVariable.constant(n, c))}
                    for c in consts if E(RandomVariable.constant(n, c)) != c), None)
    record("constant_invariance", witness)

    witness = next(({"X": i, "c": c, "E(X+c)": E(X + c), "E(X)+c": E(X) + c}
                    for i, X in enumerate(samples) for c in consts if E(X + c) != E(X) + c), None)
    record("cash_additivity", witness)

    scales = [Fraction(1, 2), Fraction(1), Fraction(2), Fraction(7, 3)]
    witness = next(({"X": i, "c": c, "E(cX)": E(X * c), "cE(X)": c * E(X)}
                    for i, X in enumerate(samples) for c in scales if E(X * c) != c * E(X)), None)
    record("positive_homogeneity", witness)

    witness = next(({"X": i, "Y": j, "E(X+Y)": E(X + Y), "E(X)+E(Y)": E(X) + E(Y)}
                    for i, X in enumerate(samples) for j, Y in enumerate(samples)
                    if E(X + Y) > E(X) + E(Y)), None)
    record("sublinearity", witness)

    witness = None
    for i, X in enumerate(samples):
        top = X.positive_part()
        peak = max(top.values)
        if peak == 0:
            continue
        chain = [RandomVariable(min(v, peak * k / chain_length) for v in top) for k in range(chain_length + 1)]
        values = [E(c) for c in chain]
        if any(a > b for a, b in zip(values, values[1:])) or values[-1] != E(top):
            witness = {"X": i, "chain": values, "limit": E(top)}
            break
    record("monotone_continuity", witness)
    return report


def check_dominance(X: RandomVariable, family: MeasureFamily, sigma: SigmaAlgebra,
                    dp: DominatingPartition | None = None) -> Report:
    """Sandwich ``-E_G(-X) <= E_theta[X|G] <= E_G(X)`` at every theta-charged atom."""
    dp = dp or build_dominating_partition(family, sigma)
    upper = cond_sublinear(X, family, sigma, dp).value
    lower_neg = cond_sublinear(-X, family, sigma, dp).value
    report = Report()
    for name, theta in family.items():
        mid = cond_exp_qs(X, theta, family, sigma, dp).value
        witness = None
        for a in range(sigma.n):
            if not theta[a]:
                continue
            lo = -lower_neg[a]
            if not lo <= mid[a] <= upper[a]:
                witness = {"atom": a, "lower": lo, "theta": mid[a], "upper": upper[a]}
                break
        report.results.append(CheckResult(f"dominance[{name}]",
                                          Verdict.PASS if witness is None else Verdict.FAIL, witness or {}))
    return report


def measurable_samples(completion: SigmaAlgebra) -> list[RandomVariable]:
    """Completion-measurable test variables: block indicators, a ramp and a constant."""
    n = completion.n
    out = [RandomVariable.indicator(n, b) for b in completion.blocks]
    ramp = [Fraction(0)] * n
    for k, b in enumerate(completion.blocks):
        for a in b:
            ramp[a] = Fraction(k + 1)
    out.append(RandomVariable(ramp))
    out.append(RandomVariable.constant(n, 3))
    return out


def augmented_samples(family: MeasureFamily, sigma: SigmaAlgebra,
                      samples: Iterable[RandomVariable] = ()) -> list[RandomVariable]:
    """User samples plus ``-X`` for each, atom indicators, completion-block indicators and a constant."""
    n = family.n
    out = []
    for X in samples:
        out.append(X)
        if X.is_finite():
            out.append(-X)
    out += [RandomVariable.indicator(n, {a}) for a in range(n)]
    out += measurable_samples(universal_complete(sigma, family))
    unique, seen = [], set()
    for X in out:
        if X.values not in seen:
            seen.add(X.values)
            unique.append(X)
    return unique


def _measurable_events(completion: SigmaAlgebra, limit: int = 10):
    if len(completion.blocks) <= limit:
        return list(completion.measurable_sets())
    return [frozenset(b) for b in completion.blocks]


def check_conditional_axioms(family: MeasureFamily, sigma: SigmaAlgebra, samples: Sequence[RandomVariable],
                             dp: DominatingPartition | None = None) -> Report:
    """Regularity and the conditional coherent axioms of ``cond_sublinear``, q.s."""
    dp = dp or build_dominating_partition(family, sigma)
    completion = dp.completion
    samples = [X for X in samples if X.is_finite()]
    measurables = measurable_samples(completion)
    events = _measurable_events(completion)
    cache: dict = {}

    def EG(X):
        key = X.values
        if key not in cache:
            cache[key] = cond_sublinear(X, family, sigma, dp).value
        return cache[key]

    def finite_part(V):
        # polar atoms may hold NEG_INF; they never enter q.s. comparisons
        return RandomVariable(Fraction(0) if v is NEG_INF else v for v in V)

    report = Report()

    def record(name, witness):
        report.results.append(CheckResult(name, Verdict.PASS if witness is None else Verdict.FAIL, witness or {}))

    record("regularity", next(({"X": i, "A": A, "atoms": d}
                               for i, X in enumerate(samples) for A in events
                               if (d := qs_difference(EG(X.masked(A)), finite_part(EG(X)).masked(A), family))),
                              None))

    witness = None
    for i, X in enumerate(samples):
        for j, Y in enumerate(samples):
            top = pointwise_max([X, Y])
            d = qs_leq(EG(X), EG(top), family)
            if d:
                witness = {"X": i, "Y": j, "atoms": d}
                break
        if witness:
            break
    record("monotonicity", witness)

    record("triviality", next(({"Y": k, "atoms": d} for k, Y in enumerate(measurables)
                               if (d := qs_difference(EG(Y), Y, family))), None))

    record("cash_additivity", next(
        ({"X": i, "Y": k, "atoms": d}
         for i, X in enumerate(samples) for k, Y in enumerate(measurables)
         if (d := qs_difference(EG(X + Y), finite_part(EG(X)) + Y, family))), None))

    record("sublinearity", next(
        ({"X": i, "Y": j, "atoms": d}
         for i, X in enumerate(samples) for j, Y in enumerate(samples)
         if (d := qs_leq(EG(X + Y), finite_part(EG(X)) + finite_part(EG(Y)), family))), None))

    signs = [Fraction(0)] * sigma.n
    for k, b in enumerate(completion.blocks):
        for a in b:
            signs[a] = Fraction((-1) ** k * (k + 1))
    lambdas = measurables + [RandomVariable(signs), RandomVariable.constant(sigma.n, -2)]
    witness = None
    for i, X in enumerate(samples):
        for lam in lambdas:
            pos = RandomVariable(max(v, 0) for v in lam)
            neg = RandomVariable(max(-v, 0) for v in lam)
            rhs = pos * finite_part(EG(X)) + neg * finite_part(EG(-X))
            d = qs_difference(EG(lam * X), rhs, family)
            if d:
                witness = {"X": i, "lambda": lam, "atoms": d}
                break
        if witness:
            break
    record("coherence", witness)
    return report


def check_consistency(family: MeasureFamily, sigma: SigmaAlgebra, samples: Sequence[RandomVariable],
                      budget: int = 500, dp: DominatingPartition | None = None) -> Report:
    """Stability under pasting, recursivity, regularity and the stabilised representation."""
    samples = list(samples)
    if not samples:
        raise InputError("check_consistency needs at least one sample")
    dp = dp or build_dominating_partition(family, sigma)
    E = SublinearExpectation(family)
    report = Report()

    closure = stabilize(family, sigma, max(budget, len(family)))
    stable_family = closure.family
    if closure.status is Closure.BUDGET_EXHAUSTED:
        report.results.append(CheckResult("stability", Verdict.INCONCLUSIVE,
                                          {"reason": "inconclusive-stability", "members": len(stable_family)}))
    elif len(stable_family) == len(family):
        report.results.append(CheckResult("stability", Verdict.PASS, {"members": len(family)}))
    else:
        report.results.append(CheckResult("stability", Verdict.FAIL, {
            "members": len(family),
            "stabilized_members": len(stable_family),
            "new_measure": stable_family[len(family)],
        }))

    E_stable = SublinearExpectation(stable_family)
    recursive_ok = []
    witness = None
    for i, X in enumerate(samples):
        lhs = E(cond_sublinear(X, family, sigma, dp).value)
        rhs = E(X)
        recursive_ok.append(lhs == rhs)
        if lhs != rhs and witness is None:
            witness = {"sample": i, "E(E_G(X))": lhs, "E(X)": rhs, "E_stabilized(X)": E_stable(X)}
    report.results.append(CheckResult("recursivity", Verdict.PASS if witness is None else Verdict.FAIL,
                                      witness or {}))

    events = _measurable_events(dp.completion)
    witness = None
    for i, X in enumerate(samples):
        base = cond_sublinear(X, family, sigma, dp).value
        base = RandomVariable(Fraction(0) if v is NEG_INF else v for v in base)
        for A in events:
            d = qs_difference(cond_sublinear(X.masked(A), family, sigma, dp), base.masked(A), family)
            if d:
                witness = {"sample": i, "A": A, "atoms": d}
                break
        if witness:
            break
    report.results.append(CheckResult("regularity", Verdict.PASS if witness is None else Verdict.FAIL,
                                      witness or {}))

    witness = None
    for i, X in enumerate(samples):
        if recursive_ok[i] and E_stable(X) != E(X):
            witness = {"sample": i, "E_stabilized(X)": E_stable(X), "E(X)": E(X)}
            break
    if witness is not None:
        verdict = Verdict.FAIL
    elif closure.status is Closure.BUDGET_EXHAUSTED:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    report.results.append(CheckResult("representation", verdict, witness or {}))
    return report
