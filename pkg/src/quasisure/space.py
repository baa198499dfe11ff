"""Finite measurable spaces.

A sigma-algebra on a finite sample space is encoded by its atom partition.
Blocks are stored sorted by smallest member, so two sigma-algebras are
equal exactly when their partitions are.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .exceptions import InputError

Event = frozenset  # frozenset[int] of atom labels


@dataclass(frozen=True)
class SampleSpace:
    atom_count: int

    def __post_init__(self):
        if not isinstance(self.atom_count, int) or isinstance(self.atom_count, bool):
            raise InputError(f"atom_count must be an integer, got {self.atom_count!r}")
        if self.atom_count < 1:
            raise InputError("atom_count must be at least 1")

    @property
    def atoms(self) -> range:
        return range(self.atom_count)

    @property
    def omega(self) -> frozenset[int]:
        return frozenset(self.atoms)

    def event(self, atoms: Iterable[int]) -> frozenset[int]:
        return as_event(atoms, self.atom_count)

    def subsets(self) -> Iterator[frozenset[int]]:
        """All 2**n events, in bitmask order."""
        n = self.atom_count
        for mask in range(1 << n):
            yield frozenset(i for i in range(n) if mask >> i & 1)


def as_event(atoms: Iterable[int], n: int) -> frozenset[int]:
    event = frozenset(atoms)
    for a in event:
        if not isinstance(a, int) or isinstance(a, bool) or not 0 <= a < n:
            raise InputError(f"atom {a!r} out of range for a space of {n} atoms")
    return event


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # keep the smaller label as root so groups are deterministic
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx

    def groups(self) -> list[frozenset]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), set()).add(x)
        return [frozenset(g) for g in out.values()]


@dataclass(frozen=True, init=False)
class SigmaAlgebra:
    """Partition of ``{0..n-1}`` into nonempty disjoint blocks."""

    n: int
    blocks: tuple[frozenset[int], ...]

    def __init__(self, blocks: Iterable[Iterable[int]], n: int | None = None):
        blocks = [frozenset(b) for b in blocks]
        if n is None:
            n = sum(len(b) for b in blocks)
        if n < 1:
            raise InputError("a sigma-algebra needs at least one atom")
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise InputError("empty block in partition")
            as_event(b, n)
            if seen & b:
                raise InputError(f"blocks overlap on atoms {sorted(seen & b)}")
            seen |= b
        if len(seen) != n:
            raise InputError(f"blocks miss atoms {sorted(set(range(n)) - seen)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "blocks", tuple(sorted(blocks, key=min)))
        owner = [0] * n
        for k, b in enumerate(self.blocks):
            for a in b:
                owner[a] = k
        object.__setattr__(self, "_owner", tuple(owner))

    @classmethod
    def trivial(cls, n: int) -> "SigmaAlgebra":
        return cls([range(n)], n)

    @classmethod
    def discrete(cls, n: int) -> "SigmaAlgebra":
        return cls([[i] for i in range(n)], n)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(map(str, sorted(b))) + "}" for b in self.blocks)
        return f"SigmaAlgebra([{inner}])"

    def block_index(self, atom: int) -> int:
        return self._owner[atom]

    def block_of(self, atom: int) -> frozenset[int]:
        return self.blocks[self._owner[atom]]

    def is_measurable(self, event: Iterable[int]) -> bool:
        event = as_event(event, self.n)
        return all(self.block_of(a) <= event for a in event)

    def is_measurable_function(self, values, ignore: Iterable[int] = ()) -> bool:
        """True if ``values`` is constant on each block, atoms in ``ignore`` excepted."""
        ignore = set(ignore)
        for b in self.blocks:
            seen = {values[a] for a in b if a not in ignore}
            if len(seen) > 1:
                return False
        return True

    def union_of(self, block_indices: Iterable[int]) -> frozenset[int]:
        return frozenset().union(*(self.blocks[k] for k in block_indices))

    def measurable_sets(self) -> Iterator[frozenset[int]]:
        """Every union of blocks, ordered by block bitmask."""
        k = len(self.blocks)
        for mask in range(1 << k):
            yield self.union_of(j for j in range(k) if mask >> j & 1)

    def refines(self, other: "SigmaAlgebra") -> bool:
        """True if every block of ``other`` is a union of blocks of ``self``."""
        return self.n == other.n and all(other.block_of(min(b)) >= b for b in self.blocks)

    def join(self, other: "SigmaAlgebra") -> "SigmaAlgebra":
        """Partition of the intersection of the two sigma-algebras."""
        return finest_common_coarsening([self, other])


def finest_common_coarsening(partitions: Iterable[SigmaAlgebra]) -> SigmaAlgebra:
    partitions = list(partitions)
    n = partitions[0].n
    uf = UnionFind(range(n))
    for p in partitions:
        if p.n != n:
            raise InputError("partitions live on different sample spaces")
        for b in p.blocks:
            first = min(b)
            for a in b:
                uf.union(first, a)
    return SigmaAlgebra(uf.groups(), n)


def is_measurable(event: Iterable[int], sigma: SigmaAlgebra) -> bool:
    return sigma.is_measurable(event)


def _check_space(sigma: SigmaAlgebra, measure) -> None:
    if len(measure.weights) != sigma.n:
        raise InputError(
            f"measure on {len(measure.weights)} atoms used with a {sigma.n}-atom sigma-algebra"
        )


def complete(sigma: SigmaAlgebra, measure) -> SigmaAlgebra:
    """Completion of ``sigma`` under ``measure``: null blocks split into singletons."""
    _check_space(sigma, measure)
    w = measure.weights
    blocks = []
    for b in sigma.blocks:
        if any(w[a] for a in b):
            blocks.append(b)
        else:
            blocks.extend([a] for a in b)
    return SigmaAlgebra(blocks, sigma.n)


def universal_complete(sigma: SigmaAlgebra, family) -> SigmaAlgebra:
    """Intersection over the family of the per-measure completions."""
    members = list(family)
    if not members:
        raise InputError("universal completion needs a nonempty family")
    return finest_common_coarsening(complete(sigma, m) for m in members)


def is_polar(event: Iterable[int], family) -> bool:
    members = list(family)
    if not members:
        raise InputError("polar sets are defined relative to a nonempty family")
    event = as_event(event, len(members[0].weights))
    return all(sum((m.weights[a] for a in event), 0) == 0 for m in members)


def polar_atoms(family) -> frozenset[int]:
    """Atoms that no member charges; every subset of this set is polar."""
    members = list(family)
    n = len(members[0].weights)
    return frozenset(a for a in range(n) if all(m.weights[a] == 0 for m in members))
