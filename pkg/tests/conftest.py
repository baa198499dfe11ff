from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from quasisure import Measure, MeasureFamily, RandomVariable, SigmaAlgebra

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def dirac(i, n=4):
    return Measure.point_mass(n, i)


U = Measure.uniform(4)
M01 = Measure([F(1, 2), F(1, 2), 0, 0])
M23 = Measure([0, 0, F(1, 2), F(1, 2)])
M01P = Measure([F(2, 3), F(1, 3), 0, 0])
D = [dirac(i) for i in range(4)]
G2 = SigmaAlgebra([[0, 1], [2, 3]])
TRIVIAL = SigmaAlgebra.trivial(4)
POWER = SigmaAlgebra.discrete(4)
X1234 = RandomVariable([1, 2, 3, 4])
X2044 = RandomVariable([2, 0, 4, 4])


def family(*members):
    return MeasureFamily(list(members))


@pytest.fixture
def g2():
    return G2


@st.composite
def partitions(draw, n):
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    groups = {}
    for atom, lab in enumerate(labels):
        groups.setdefault(lab, []).append(atom)
    return SigmaAlgebra(groups.values(), n)


@st.composite
def measure_on(draw, atoms, n):
    atoms = sorted(atoms)
    raw = draw(st.lists(st.integers(0, 4), min_size=len(atoms), max_size=len(atoms)))
    if not any(raw):
        raw[draw(st.integers(0, len(atoms) - 1))] = 1
    total = sum(raw)
    w = [F(0)] * n
    for a, r in zip(atoms, raw):
        w[a] = F(r, total)
    return Measure(w)


@st.composite
def families_on(draw, sigma, max_size=4):
    """Members charge random unions of blocks; often mutually singular, often with polar blocks."""
    size = draw(st.integers(1, max_size))
    members = []
    for _ in range(size):
        chosen = draw(st.lists(st.sampled_from(sigma.blocks), min_size=1, max_size=len(sigma.blocks)))
        atoms = frozenset().union(*chosen)
        members.append(draw(measure_on(atoms, sigma.n)))
    return MeasureFamily(members)


@st.composite
def instances(draw, min_atoms=2, max_atoms=7, max_family=4):
    n = draw(st.integers(min_atoms, max_atoms))
    sigma = draw(partitions(n))
    return sigma, draw(families_on(sigma, max_family))


def variables(n, lo=-5, hi=5):
    return st.lists(st.integers(lo, hi), min_size=n, max_size=n).map(RandomVariable)


@st.composite
def measurable_variables(draw, sigma, lo=-5, hi=5):
    vals = [F(0)] * sigma.n
    for b in sigma.blocks:
        v = draw(st.integers(lo, hi))
        for a in b:
            vals[a] = F(v)
    return RandomVariable(vals)
