"""Seeded random instances: partitions, mutually singular families, variables."""

from __future__ import annotations

import random
from fractions import Fraction

from .measures import Measure, MeasureFamily, RandomVariable
from .space import SigmaAlgebra


def random_partition(rng: random.Random, n: int, max_blocks: int | None = None) -> SigmaAlgebra:
    k = rng.randint(1, min(n, max_blocks or n))
    labels = list(range(k)) + [rng.randrange(k) for _ in range(n - k)]
    rng.shuffle(labels)
    blocks: dict[int, list[int]] = {}
    for atom, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(atom)
    return SigmaAlgebra(blocks.values(), n)


def random_weights(rng: random.Random, atoms, n: int, max_weight: int = 4, sparse: bool = True) -> Measure:
    """Integer weights on ``atoms`` (some possibly zero), normalised exactly."""
    atoms = list(atoms)
    raw = {a: rng.randint(0 if sparse else 1, max_weight) for a in atoms}
    if not any(raw.values()):
        raw[rng.choice(atoms)] = 1
    total = sum(raw.values())
    return Measure(Fraction(raw.get(a, 0), total) for a in range(n))


def random_family(rng: random.Random, sigma: SigmaAlgebra, size: int, max_weight: int = 4,
                  polar_blocks: int = 0) -> MeasureFamily:
    """Each member charges a random nonempty set of blocks.

    The first ``polar_blocks`` blocks (in random order) are avoided by every
    member, so the family has nontrivial polar sets.
    """
    blocks = list(sigma.blocks)
    rng.shuffle(blocks)
    avoid = blocks[:min(polar_blocks, len(blocks) - 1)]
    usable = [b for b in blocks if b not in avoid]
    members = []
    for _ in range(size):
        chosen = rng.sample(usable, rng.randint(1, len(usable)))
        atoms = [a for b in chosen for a in b]
        members.append(random_weights(rng, atoms, sigma.n, max_weight))
    return MeasureFamily(members)


def random_variable(rng: random.Random, n: int, lo: int = -5, hi: int = 5) -> RandomVariable:
    return RandomVariable(Fraction(rng.randint(lo, hi)) for _ in range(n))


def random_measurable_variable(rng: random.Random, sigma: SigmaAlgebra, lo: int = -5, hi: int = 5) -> RandomVariable:
    values = [Fraction(0)] * sigma.n
    for b in sigma.blocks:
        v = Fraction(rng.randint(lo, hi))
        for a in b:
            values[a] = v
    return RandomVariable(values)


def random_instance(rng: random.Random, max_atoms: int = 8, max_family: int = 4, min_atoms: int = 2):
    """``(sigma, family)`` with at most ``max_atoms`` atoms."""
    n = rng.randint(min_atoms, max_atoms)
    sigma = random_partition(rng, n)
    family = random_family(rng, sigma, rng.randint(1, max_family),
                           polar_blocks=rng.choice([0, 0, 1]))
    return sigma, family
