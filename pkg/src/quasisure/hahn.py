"""Dominating partitions and minimal supports.

On a finite space every family has the Hahn property. The partition built
here is the finest one: measures are linked to the universal-completion
blocks they charge, and each connected component of that incidence graph
becomes one part ``(phi, S_phi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import NamedTuple

from .exceptions import InputError
from .measures import Measure, MeasureFamily
from .report import CheckResult, Report, Verdict
from .space import SigmaAlgebra, UnionFind, universal_complete


@dataclass(frozen=True)
class Part:
    phi: Measure
    support: frozenset[int]


@dataclass(frozen=True)
class DominatingPartition:
    parts: tuple[Part, ...]
    sigma: SigmaAlgebra
    family: MeasureFamily

    @property
    def supports(self) -> tuple[frozenset[int], ...]:
        return tuple(p.support for p in self.parts)

    @property
    def covered(self) -> frozenset[int]:
        return frozenset().union(*self.supports)

    @cached_property
    def completion(self) -> SigmaAlgebra:
        return universal_complete(self.sigma, self.family)

    @cached_property
    def pieces(self) -> tuple[frozenset[int], ...]:
        """Nonempty intersections of blocks with part supports."""
        return tuple(b & p.support for p in self.parts for b in self.sigma.blocks if b & p.support)

    @cached_property
    def member_pieces(self) -> tuple[tuple[tuple[tuple[int, ...], Fraction], ...], ...]:
        """Per member, the blocks cut to its minimal support with their masses."""
        out = []
        for theta in self.family:
            support = minimal_support(theta, self.sigma, self)
            cut = (tuple(sorted(b & support)) for b in self.sigma.blocks if b & support)
            out.append(tuple((piece, theta.mass(piece)) for piece in cut))
        return tuple(out)

    def part_of(self, atom: int) -> Part | None:
        for p in self.parts:
            if atom in p.support:
                return p
        return None


def build_dominating_partition(family: MeasureFamily, sigma: SigmaAlgebra) -> DominatingPartition:
    completed = universal_complete(sigma, family)
    members = list(family)
    charged = [
        [k for k, b in enumerate(completed.blocks) if m.mass(b) > 0]
        for m in members
    ]
    # nodes: ("m", i) for measures, ("b", k) for completion blocks
    uf = UnionFind([("m", i) for i in range(len(members))] +
                   [("b", k) for k in range(len(completed.blocks))])
    for i, ks in enumerate(charged):
        for k in ks:
            uf.union(("m", i), ("b", k))
    parts = []
    for group in uf.groups():
        idx = sorted(i for kind, i in group if kind == "m")
        blocks = sorted(k for kind, k in group if kind == "b")
        if not idx:
            continue  # polar block, charged by nobody
        support = completed.union_of(blocks)
        masses = [sum((members[i].mass(b) for i in idx), Fraction(0)) / len(idx) for b in sigma.blocks]
        parts.append(Part(Measure.from_block_masses(sigma, masses), support))
    parts.sort(key=lambda p: min(p.support))
    return DominatingPartition(tuple(parts), sigma, family)


def minimal_support(theta: Measure, sigma: SigmaAlgebra, dp: DominatingPartition) -> frozenset[int]:
    """Smallest completion-measurable set carrying ``theta``, up to polar sets."""
    if sigma == dp.sigma:
        pieces = dp.pieces
    else:
        pieces = [b & p.support for p in dp.parts for b in sigma.blocks if b & p.support]
    out: set[int] = set()
    for piece in pieces:
        if theta.mass(piece) > 0:
            out |= piece
    return frozenset(out)


def _mask(atoms) -> int:
    m = 0
    for a in atoms:
        m |= 1 << a
    return m


def _charged_masks(measures) -> list[int]:
    return [_mask(i for i, w in enumerate(m.weights) if w) for m in measures]


def _sets_of(sigma: SigmaAlgebra):
    block_masks = [_mask(b) for b in sigma.blocks]
    k = len(block_masks)
    for sel in range(1 << k):
        m = 0
        for j in range(k):
            if sel >> j & 1:
                m |= block_masks[j]
        yield m


def _atoms(mask: int) -> list[int]:
    return [a for a in range(mask.bit_length()) if mask >> a & 1]


def verify_hahn(candidate: DominatingPartition, family: MeasureFamily, sigma: SigmaAlgebra,
                exhaustive_limit: int = 16) -> Report:
    """Check the two defining conditions of a dominating partition.

    ``polar_sets``: the candidate measures and the family have the same
    polar sets among sets measurable for either completion.
    ``completion``: both universal completions of ``sigma`` coincide.
    ``supports``: supports are disjoint, completion-measurable, and each
    carries its measure.

    Sets are enumerated exhaustively when ``sigma.n <= exhaustive_limit``;
    larger spaces are checked block by block, which is equivalent because
    masses are nonnegative and additive.
    """
    phis = [p.phi for p in candidate.parts]
    results = []
    theta_completion = universal_complete(sigma, family)
    phi_completion = universal_complete(sigma, phis) if phis else SigmaAlgebra.discrete(sigma.n)

    theta_masks = _charged_masks(family)
    # phi lives on sigma: it charges a set iff it charges a sigma-block the set meets
    phi_masks = [
        _mask(a for b in sigma.blocks if phi.mass(b) > 0 for a in b) for phi in phis
    ]

    def disagreement(s: int) -> bool:
        return (not any(s & m for m in phi_masks)) != (not any(s & m for m in theta_masks))

    if sigma.n <= exhaustive_limit:
        candidates = _dedup(_sets_of(theta_completion), _sets_of(phi_completion))
    else:
        candidates = _dedup(*([_mask(b)] for c in (theta_completion, phi_completion) for b in c.blocks))
    witness = next((s for s in candidates if disagreement(s)), None)
    results.append(CheckResult(
        "polar_sets",
        Verdict.PASS if witness is None else Verdict.FAIL,
        {} if witness is None else {"set": frozenset(_atoms(witness))},
    ))

    if theta_completion == phi_completion:
        results.append(CheckResult("completion", Verdict.PASS))
    else:
        diff = next(b for b in theta_completion.blocks if b not in phi_completion.blocks)
        results.append(CheckResult("completion", Verdict.FAIL, {"block": diff}))

    bad = None
    supports = [p.support for p in candidate.parts]
    for i in range(len(supports)):
        for j in range(i + 1, len(supports)):
            if supports[i] & supports[j]:
                bad = {"overlap": supports[i] & supports[j], "parts": (i, j)}
                break
        if bad:
            break
    if bad is None:
        for i, p in enumerate(candidate.parts):
            if not theta_completion.is_measurable(p.support):
                bad = {"unmeasurable_support": p.support, "part": i}
                break
            if p.phi.mass(p.support) != 1:
                bad = {"support_mass": p.phi.mass(p.support), "part": i}
                break
    results.append(CheckResult("supports", Verdict.PASS if bad is None else Verdict.FAIL, bad or {}))
    return Report(results)


def _dedup(*iterables):
    seen = set()
    for it in iterables:
        for x in it:
            if x not in seen:
                seen.add(x)
                yield x


class CoverResult(NamedTuple):
    covered: bool
    witnesses: dict[int, tuple[int, ...]]
    uncovered: tuple[int, ...]


def sigma_support(measure: Measure, sigma: SigmaAlgebra) -> frozenset[int]:
    """Union of the ``sigma``-blocks that ``measure`` charges."""
    return frozenset().union(*(b for b in sigma.blocks if measure.mass(b) > 0))


def check_countable_cover(phis: MeasureFamily, family: MeasureFamily, sigma: SigmaAlgebra) -> CoverResult:
    """Sufficient condition for the Hahn property via a covering subfamily.

    Members of ``phis`` with the same restriction to ``sigma`` are treated
    as one (their supports coincide). Distinct restrictions must have
    disjoint supports. For each member of ``family`` the witness lists the
    indices into ``phis`` whose supports carry it and dominate it there.
    """
    for name, phi in phis.items():
        if phi not in family:
            raise InputError(f"covering measure {name} is not a member of the family")
    restricted: dict[tuple, list[int]] = {}
    for i, phi in enumerate(phis):
        key = tuple(phi.mass(b) for b in sigma.blocks)
        restricted.setdefault(key, []).append(i)
    reps = [idx[0] for idx in restricted.values()]
    supports = {i: sigma_support(phis[i], sigma) for i in reps}
    for a, i in enumerate(reps):
        for j in reps[a + 1:]:
            if supports[i] & supports[j]:
                raise InputError(
                    f"covering measures {phis.names[i]} and {phis.names[j]} have overlapping "
                    f"supports on atoms {sorted(supports[i] & supports[j])}"
                )
    witnesses, uncovered = {}, []
    for t, theta in enumerate(family):
        used = []
        carried = Fraction(0)
        for i in reps:
            s = supports[i]
            mass_here = theta.mass(s)
            if not mass_here:
                continue
            dominated = all(
                phis[i].mass(b & s) > 0 for b in sigma.blocks if theta.mass(b & s) > 0
            )
            if dominated:
                used.append(i)
                carried += mass_here
        if carried == 1:
            witnesses[t] = tuple(used)
        else:
            uncovered.append(t)
    return CoverResult(not uncovered, witnesses, tuple(uncovered))
