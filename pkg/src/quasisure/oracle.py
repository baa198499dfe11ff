"""Definition-level recomputation of engine claims.

Nothing here calls the engine routine whose output it judges. Sets are
bitmasks over the atoms; exhaustive modes enumerate every subset of the
sample space and are skipped (``inconclusive``) above ``exhaustive_limit``
atoms. Direct modes evaluate conditional expectations straight from block
sums and run at any size.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Callable, NamedTuple, Sequence

from .expectation import check_dominance, cond_sublinear, sublinear_expectation
from .filtration import Filtration, check_recursivity
from .hahn import build_dominating_partition, minimal_support, verify_hahn
from .measures import NEG_INF, MeasureFamily, RandomVariable
from .report import CheckResult, Report, Verdict
from .space import SigmaAlgebra, is_polar, universal_complete

Weights = Sequence[Fraction]


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def to_mask(atoms) -> int:
    m = 0
    for a in atoms:
        m |= 1 << a
    return m


def mass(w: Weights, mask: int) -> Fraction:
    return sum((w[a] for a in bits(mask)), Fraction(0))


class SubsetMasses:
    """Masses of all subsets as integer numerators over a common denominator."""

    def __init__(self, w: Weights):
        self.den = lcm(*(x.denominator for x in w))
        ints = [x.numerator * (self.den // x.denominator) for x in w]
        table = [0] * (1 << len(w))
        for A in range(1, len(table)):
            low = A & -A
            table[A] = table[A ^ low] + ints[low.bit_length() - 1]
        self.table = table

    def null(self, A: int) -> bool:
        return self.table[A] == 0

    def full(self, A: int) -> bool:
        return self.table[A] == self.den

    def of(self, A: int) -> Fraction:
        return Fraction(self.table[A], self.den)


@lru_cache(maxsize=64)
def subset_masses(w: tuple) -> SubsetMasses:
    return SubsetMasses(w)


# -- set systems --------------------------------------------------------------

def generated_sets(blocks: Sequence[int]) -> list[int]:
    """Every union of the given disjoint block masks (the generated algebra)."""
    sets = [0]
    for b in blocks:
        sets += [s | b for s in sets]
    return sets


def completion_sets(n: int, gsets: Sequence[int], w: Weights) -> set[int]:
    """``A`` with ``A ^ B`` inside a ``w``-null ``G``-set for some ``G``-set ``B``."""
    m = subset_masses(tuple(w))
    null = 0
    for N in gsets:
        if m.null(N):
            null |= N
    keep = ~null
    images = {B & keep for B in gsets}
    return {A for A in range(1 << n) if A & keep in images}


def universal_sets(n: int, gsets: Sequence[int], family: Sequence[Weights]) -> set[int]:
    out = None
    for w in family:
        c = completion_sets(n, gsets, w)
        out = c if out is None else out & c
    return out


def polar_sets(n: int, family: Sequence[Weights]) -> set[int]:
    tables = [subset_masses(tuple(w)) for w in family]
    return {A for A in range(1 << n) if all(m.null(A) for m in tables)}


def direct_universal_blocks(n: int, blocks: Sequence[int], family: Sequence[Weights]) -> list[int]:
    """Blocks of the universal completion read off from charged blocks."""
    out = []
    for b in blocks:
        if any(mass(w, b) > 0 for w in family):
            out.append(b)
        else:
            out += [1 << a for a in bits(b)]
    return out


# -- supports and conditioning --------------------------------------------------

def support_candidates(w: Weights, usets, polar) -> list[int]:
    """Sets in ``usets`` of full ``w``-mass whose ``w``-null measurable subsets are polar."""
    m = subset_masses(tuple(w))
    null = 0
    for R in usets:
        if m.null(R):
            null |= R
    return [S for S in usets if m.full(S) and (S & null) in polar]


def is_minimal_support(S: int, w: Weights, usets, polar) -> tuple[bool, dict]:
    cands = support_candidates(w, usets, polar)
    if S not in cands:
        return False, {"reason": "not a support", "set": bits(S)}
    for T in cands:
        if S & ~T not in polar:
            return False, {"reason": "smaller support exists", "set": bits(T)}
    return True, {}


def direct_support(w: Weights, ublocks: Sequence[int]) -> int:
    return to_mask(a for b in ublocks if mass(w, b) > 0 for a in bits(b))


def atom_of(a: int, gsets: Sequence[int] | None, blocks: Sequence[int]) -> int:
    """Smallest ``G``-set containing ``a``, by intersection when sets are listed."""
    if gsets is None:
        return next(b for b in blocks if b >> a & 1)
    m = -1
    for s in gsets:
        if s >> a & 1:
            m &= s
    return m


def theta_cond(x, w: Weights, n: int, blocks, gsets=None) -> list:
    """``E_w[x | G]`` on ``w``-charged ``G``-atoms, ``None`` elsewhere."""
    out = []
    for a in range(n):
        M = atom_of(a, gsets, blocks)
        m = mass(w, M)
        out.append(sum((w[b] * x[b] for b in bits(M) if w[b]), Fraction(0)) / m if m else None)
    return out


def oracle_conditional(x, family: Sequence[Weights], n: int, blocks, supports: Sequence[int], gsets=None) -> list:
    """``E_G(x)`` at each atom: best conditional mean over measures whose support holds it."""
    conds = [theta_cond(x, w, n, blocks, gsets) for w in family]
    out = []
    for a in range(n):
        vals = [c[a] for c, S in zip(conds, supports) if S >> a & 1 and c[a] is not None]
        out.append(max(vals) if vals else None)
    return out


def nonpolar_atoms(n: int, family: Sequence[Weights]) -> list[int]:
    return [a for a in range(n) if any(w[a] for w in family)]


def expectation(x, family: Sequence[Weights]) -> Fraction:
    return max(sum((w[a] * x[a] for a in range(len(w)) if w[a]), Fraction(0)) for w in family)


def esssup_minimal(xstar, variables, usets, polar, n: int, family) -> tuple[bool, dict]:
    """``xstar`` bounds every variable q.s. and no measurable lowering on a
    non-polar set still bounds them."""
    live = nonpolar_atoms(n, family)
    for i, v in enumerate(variables):
        for a in live:
            if v[a] is not None and v[a] > xstar[a]:
                return False, {"reason": "not an upper bound", "variable": i, "atom": a}
    for A in usets:
        if A in polar:
            continue
        touched = False
        for a in bits(A):
            if a in live and any(v[a] is not None and v[a] >= xstar[a] for v in variables):
                touched = True
                break
        if not touched:
            return False, {"reason": "lower upper bound exists", "set": bits(A)}
    return True, {}


# -- Hahn conditions -------------------------------------------------------------

def completion_mass(phi: Weights, gsets: Sequence[int]) -> Callable[[int], Fraction | None]:
    """Mass of a completion set: that of any ``G``-set differing from it by a null ``G``-set.

    Returns ``None`` for sets outside the ``phi``-completion.
    """
    m = subset_masses(tuple(phi))
    null = 0
    for N in gsets:
        if m.null(N):
            null |= N
    keep = ~null
    table = {B & keep: m.table[B] for B in gsets}
    return lambda A: None if (v := table.get(A & keep)) is None else Fraction(v, m.den)


def hahn_conditions(n: int, gsets, family, parts: Sequence[tuple[Weights, int]]) -> tuple[bool, dict]:
    """Disjoint measurable supports of full mass, same polar sets and the same completion."""
    usets = universal_sets(n, gsets, family)
    polar = polar_sets(n, family)
    masses = [completion_mass(phi, gsets) for phi, _ in parts]
    seen = 0
    for k, (_, S) in enumerate(parts):
        if S & seen:
            return False, {"reason": "overlapping supports", "part": k}
        seen |= S
        if S not in usets:
            return False, {"reason": "support not measurable", "part": k}
        if masses[k](S) != 1:
            return False, {"reason": "support does not carry its measure", "part": k}
    if universal_sets(n, gsets, [phi for phi, _ in parts]) != usets:
        return False, {"reason": "completions differ"}
    for A in usets:
        if all(not m(A) for m in masses) != (A in polar):
            return False, {"reason": "polar sets differ", "set": bits(A)}
    return True, {}


def equivalence_on_supports(n: int, gsets, family, parts, usets) -> tuple[bool, dict]:
    """Inside each part's support, ``phi``-null measurable sets are ``theta``-null."""
    tables = [subset_masses(tuple(w)) for w in family]
    for k, (phi, S) in enumerate(parts):
        m = completion_mass(phi, gsets)
        for A in usets:
            if A & ~S or m(A):
                continue
            for t, tw in enumerate(tables):
                if not tw.null(A):
                    return False, {"part": k, "theta": t, "set": bits(A)}
    return True, {}


# -- scenario harness ------------------------------------------------------------

class Claim(NamedTuple):
    key: str
    exhaustive: bool
    engine: Callable[[], object]
    verify: Callable[[object], tuple[bool, dict]]


def _weights(family) -> list[tuple[Fraction, ...]]:
    return [tuple(m.weights) for m in family]


def _contexts(sc):
    """``(family names, sigma name, variable names)`` triples named by the checks."""
    out: dict[tuple, list[str]] = {}
    all_vars = list(sc.random_variables)
    for c in sc.checks:
        p = c.params
        fam = tuple(p.get("family", sc.measures))
        if "sigma" in p:
            names = [p["variable"]] if "variable" in p else list(p.get("samples", all_vars))
            bucket = out.setdefault((fam, p["sigma"]), [])
            bucket += [v for v in names if v not in bucket]
    if not out:
        for s in sc.sigma_algebras:
            out[(tuple(sc.measures), s)] = list(all_vars)
    return [(fam, s, tuple(v)) for (fam, s), v in out.items()]


def _qs_equal(a, b, live) -> tuple[bool, dict]:
    for i in live:
        x = None if a[i] is NEG_INF else a[i]
        if x != b[i]:
            return False, {"atom": i, "engine": a[i], "oracle": b[i]}
    return True, {}


def _skipped(key: str) -> Claim:
    return Claim(key, True, lambda: None, lambda c: (True, {}))


class _Context(NamedTuple):
    n: int
    family: MeasureFamily
    sigma: SigmaAlgebra
    tag: str
    ws: list
    blocks: list[int]
    live: list[int]
    supports: list[int]


class _SetSystems(NamedTuple):
    gsets: list[int]
    usets: set[int]
    polar: set[int]


def _set_systems(ctx: _Context) -> _SetSystems:
    gsets = generated_sets(ctx.blocks)
    return _SetSystems(gsets, universal_sets(ctx.n, gsets, ctx.ws), polar_sets(ctx.n, ctx.ws))


def _exhaustive_claims(ctx: _Context, systems: _SetSystems, exhaustive_limit: int) -> list[Claim]:
    n, family, sigma, ws = ctx.n, ctx.family, ctx.sigma, ctx.ws
    names = ",".join(family.names)
    gsets, usets, polar = systems

    def verify_completion(claimed):
        diff = set(generated_sets([to_mask(b) for b in claimed.blocks])) ^ usets
        return not diff, {"set": bits(min(diff))} if diff else {}

    def verify_polar(claimed):
        diff = set(claimed) ^ polar
        return not diff, {"set": bits(min(diff))} if diff else {}

    def verify_hahn_claim(claimed):
        dp = build_dominating_partition(family, sigma)
        parts = [(tuple(p.phi.weights), to_mask(p.support)) for p in dp.parts]
        ok, why = hahn_conditions(n, gsets, ws, parts)
        if ok:
            ok, why = equivalence_on_supports(n, gsets, ws, parts, usets)
        return ok == claimed, {"engine": claimed, "oracle": ok, **why}

    def verify_supports(claimed):
        for (name, S), w in zip(claimed.items(), ws):
            ok, why = is_minimal_support(to_mask(S), w, usets, polar)
            if not ok:
                return False, {"theta": name, **why}
        return True, {}

    def engine_supports():
        dp = build_dominating_partition(family, sigma)
        return {name: minimal_support(theta, sigma, dp) for name, theta in family.items()}

    return [
        Claim(f"completion[{ctx.tag}]", True, lambda: universal_complete(sigma, family), verify_completion),
        Claim(f"polar[{names}]", True,
              lambda: {A for A in range(1 << n) if is_polar(bits(A), family)}, verify_polar),
        Claim(f"hahn[{ctx.tag}]", True,
              lambda: verify_hahn(build_dominating_partition(family, sigma), family, sigma,
                                  exhaustive_limit=exhaustive_limit).passed,
              verify_hahn_claim),
        Claim(f"supports[{ctx.tag}]", True, engine_supports, verify_supports),
    ]


def _esssup_claim(ctx: _Context, systems: _SetSystems, x: RandomVariable, key: str) -> Claim:
    n, ws = ctx.n, ctx.ws
    gsets, usets, polar = systems

    def verify(claimed):
        conds = []
        for w, S in zip(ws, ctx.supports):
            c = theta_cond(list(x.values), w, n, ctx.blocks, gsets)
            conds.append([c[a] if S >> a & 1 else None for a in range(n)])
        return esssup_minimal(claimed, conds, usets, polar, n, ws)

    return Claim(key, True, lambda: cond_sublinear(x, ctx.family, ctx.sigma).value.values, verify)


def _variable_claims(ctx: _Context, v: str, x: RandomVariable, systems: _SetSystems | None) -> list[Claim]:
    n, family, sigma, ws = ctx.n, ctx.family, ctx.sigma, ctx.ws
    xs = list(x.values)
    vtag = f"{ctx.tag}|{v}"
    upper = oracle_conditional(xs, ws, n, ctx.blocks, ctx.supports)
    oracle_e = expectation(xs, ws)

    def verify_dominance(claimed):
        lower = oracle_conditional([-t for t in xs], ws, n, ctx.blocks, ctx.supports)
        ok, why = True, {}
        for t, w in enumerate(ws):
            mid = theta_cond(xs, w, n, ctx.blocks)
            bad = next((a for a in range(n) if w[a] and not -lower[a] <= mid[a] <= upper[a]), None)
            if bad is not None:
                ok, why = False, {"theta": t, "atom": bad}
                break
        return ok == claimed, {"engine": claimed, "oracle": ok, **why}

    def verify_recursive(claimed):
        inner = [Fraction(0) if t is None else t for t in upper]
        ok = expectation(inner, ws) == oracle_e
        return ok == claimed, {"engine": claimed, "oracle": ok}

    claims = [
        Claim(f"expectation[{','.join(family.names)}|{v}]", False,
              lambda: sublinear_expectation(x, family),
              lambda c: (c == oracle_e, {"engine": c, "oracle": oracle_e})),
        Claim(f"conditional[{vtag}]", False,
              lambda: cond_sublinear(x, family, sigma).value.values,
              lambda c: _qs_equal(c, upper, ctx.live)),
        Claim(f"dominance[{vtag}]", False,
              lambda: check_dominance(x, family, sigma).passed, verify_dominance),
        Claim(f"recursivity[{vtag}]", False,
              lambda: check_recursivity(x, family, Filtration([SigmaAlgebra.trivial(n), sigma])).passed,
              verify_recursive),
    ]
    key = f"esssup[{vtag}]"
    claims.append(_skipped(key) if systems is None else _esssup_claim(ctx, systems, x, key))
    return claims


def build_claims(sc, exhaustive_limit: int = 12) -> list[Claim]:
    n = sc.atoms
    exhaustive = n <= exhaustive_limit
    claims: list[Claim] = []
    for fam_names, sname, var_names in _contexts(sc):
        family = sc.family(fam_names)
        sigma = sc.sigma_algebras[sname]
        ws = _weights(family)
        blocks = [to_mask(b) for b in sigma.blocks]
        ublocks = direct_universal_blocks(n, blocks, ws)
        ctx = _Context(n, family, sigma, f"{sname}|{','.join(fam_names)}", ws, blocks,
                       nonpolar_atoms(n, ws), [direct_support(w, ublocks) for w in ws])
        systems = _set_systems(ctx) if exhaustive else None
        if systems:
            claims += _exhaustive_claims(ctx, systems, exhaustive_limit)
        else:
            claims += [_skipped(f"{kind}[{ctx.tag}]") for kind in ("completion", "hahn", "supports")]
            claims.append(_skipped(f"polar[{','.join(fam_names)}]"))
        for v in var_names:
            x = sc.random_variables[v]
            if x.is_finite():
                claims += _variable_claims(ctx, v, x, systems)
    if sc.filtration:
        claims += _filtration_claims(sc)
    return claims


def _filtration_claims(sc) -> list[Claim]:
    n = sc.atoms
    out = []
    families = {tuple(c.params.get("family", sc.measures)) for c in sc.checks
                if c.kind in ("recursivity", "martingale") and "sigma" not in c.params}
    for fam_names in sorted(families):
        family = sc.family(fam_names)
        ws = _weights(family)
        live = nonpolar_atoms(n, ws)
        levels = [[to_mask(b) for b in sc.sigma_algebras[k].blocks] for k in sc.filtration]
        supports = [[direct_support(w, direct_universal_blocks(n, bl, ws)) for w in ws] for bl in levels]
        for v, x in sc.random_variables.items():
            if not x.is_finite():
                continue
            out.append(_filtration_claim(sc, family, ws, live, levels, supports, v, x))
    return out


def _filtration_claim(sc, family, ws, live, levels, supports, v, x) -> Claim:
    n = sc.atoms

    def verify(claimed):
        chain = [oracle_conditional(list(x.values), ws, n, bl, S) for bl, S in zip(levels, supports)]
        fill = [[Fraction(0) if t is None else t for t in c] for c in chain]
        ok = all(
            oracle_conditional(fill[t], ws, n, levels[s], supports[s])[a] == chain[s][a]
            for s in range(len(levels)) for t in range(s, len(levels)) for a in live
        )
        return ok == claimed, {"engine": claimed, "oracle": ok}

    return Claim(f"filtration_recursivity[{','.join(family.names)}|{v}]", False,
                 lambda: check_recursivity(x, family, sc.filtration_levels()).passed, verify)


def engine_claims(sc, exhaustive_limit: int = 12) -> dict[str, object]:
    """Engine outputs keyed by claim name (skipped exhaustive claims map to ``None``)."""
    return {c.key: c.engine() for c in build_claims(sc, exhaustive_limit)}


def oracle_check(sc, claims: dict | None = None, exhaustive_limit: int = 12) -> Report:
    """Compare engine claims (computed here unless supplied) against the oracle."""
    planned = build_claims(sc, exhaustive_limit)
    if claims is None:
        claims = {c.key: c.engine() for c in planned}
    report = Report()
    skipped = sc.atoms > exhaustive_limit
    for c in planned:
        if c.exhaustive and skipped:
            report.results.append(CheckResult(c.key, Verdict.INCONCLUSIVE,
                                              {"reason": f"{sc.atoms} atoms exceed the exhaustive limit "
                                                         f"of {exhaustive_limit}"}))
            continue
        if c.key not in claims:
            report.results.append(CheckResult(c.key, Verdict.FAIL, {"reason": "missing claim"}))
            continue
        ok, why = c.verify(claims[c.key])
        report.results.append(CheckResult(c.key, Verdict.PASS if ok else Verdict.FAIL,
                                          {} if ok else {"divergence": why}))
    return report
