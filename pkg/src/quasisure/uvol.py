"""Finite uncertain-volatility model on a binomial-style tree.

Atoms are the increment paths ``(x_1, ..., x_T)`` with ``x_t = ±sigma_t``
and ``sigma_t`` drawn from ``vols``, listed in lexicographic order of the
increments. A volatility strategy picks ``sigma_{t+1}`` from the signs seen
so far; given the strategy, signs are fair coin flips.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .exceptions import InputError
from .measures import Measure, RandomVariable, to_fraction
from .scenario import Check, Scenario
from .space import SigmaAlgebra

MAX_ATOMS = 4096
MAX_MEASURES = 4096


def _label(x: Fraction) -> str:
    return f"+{x}" if x > 0 else str(x)


def _strategies(vols: list[Fraction], steps: int):
    """Every predictable volatility choice, as a table from sign prefixes to a vol."""
    prefixes = [p for t in range(steps) for p in product((-1, 1), repeat=t)]
    for choice in product(vols, repeat=len(prefixes)):
        yield dict(zip(prefixes, choice))


def _measure(paths, strategy, steps) -> Measure:
    w = []
    for path in paths:
        p = Fraction(1)
        for t in range(steps):
            signs = tuple(1 if x > 0 else -1 for x in path[:t])
            if abs(path[t]) != strategy[signs]:
                p = Fraction(0)
                break
            p /= 2
        w.append(p)
    return Measure(w)


def _fmt_vol(v: Fraction) -> str:
    return str(v).replace("/", "d")


def gen_uncertain_vol(steps: int, vols) -> Scenario:
    """Scenario with the generating class (deterministic volatility paths),
    all predictable switchers, and the prefix filtration."""
    if steps < 1:
        raise InputError("steps must be at least 1")
    vols = sorted({to_fraction(v) for v in vols})
    if len(vols) < 2:
        raise InputError("need at least two distinct volatilities")
    if any(v <= 0 for v in vols):
        raise InputError("volatilities must be positive")
    n = (2 * len(vols)) ** steps
    if n > MAX_ATOMS:
        raise InputError(f"(2*{len(vols)})^{steps} = {n} atoms exceeds the limit of {MAX_ATOMS}")
    n_strategies = len(vols) ** (2 ** steps - 1)
    if n_strategies > MAX_MEASURES:
        raise InputError(f"{n_strategies} volatility strategies exceed the limit of {MAX_MEASURES}")

    increments = [-v for v in reversed(vols)] + vols
    paths = list(product(increments, repeat=steps))

    measures: dict[str, Measure] = {}
    generating = []
    for vpath in product(vols, repeat=steps):
        name = "det_" + "_".join(_fmt_vol(v) for v in vpath)
        strategy = {p: vpath[len(p)] for t in range(steps) for p in product((-1, 1), repeat=t)}
        measures[name] = _measure(paths, strategy, steps)
        generating.append(name)
    seen = {m.weights for m in measures.values()}
    k = 0
    for strategy in _strategies(vols, steps):
        m = _measure(paths, strategy, steps)
        if m.weights not in seen:
            seen.add(m.weights)
            measures[f"switch{k}"] = m
            k += 1

    sigmas = {}
    for t in range(steps + 1):
        blocks: dict[tuple, list[int]] = {}
        for i, path in enumerate(paths):
            blocks.setdefault(path[:t], []).append(i)
        sigmas[f"F{t}"] = SigmaAlgebra(blocks.values(), n)
    filtration = list(sigmas)

    final = [sum(p) for p in paths]
    variables = {
        "S_T": RandomVariable(final),
        "S_T_squared": RandomVariable(s * s for s in final),
        "call": RandomVariable(max(s - 1, Fraction(0)) for s in final),
        "digital": RandomVariable(Fraction(int(s > 0)) for s in final),
    }
    checks = [Check("hahn", {"sigma": f, "cover": list(generating)}) for f in filtration]
    checks += [Check("consistency", {"sigma": f, "samples": list(variables)}) for f in filtration]
    for v in variables:
        checks.append(Check("recursivity", {"variable": v}))
        checks.append(Check("martingale", {"variable": v}))
    return Scenario(
        atoms=n,
        measures=measures,
        sigma_algebras=sigmas,
        random_variables=variables,
        checks=checks,
        filtration=filtration,
        description=f"uncertain volatility, {steps} steps, vols {{{', '.join(str(v) for v in vols)}}}",
        atom_labels=[",".join(_label(x) for x in p) for p in paths],
    )
