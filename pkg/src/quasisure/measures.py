"""Exact rational measures, random variables and Radon-Nikodym derivatives."""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Sequence

from .exceptions import InputError, NotAbsolutelyContinuousError, NotIntegrableError, PreconditionError
from .space import SigmaAlgebra, as_event, universal_complete


class _NegInf:
    """The extended value minus infinity.

    It orders below every rational. Adding a rational or multiplying by a
    positive rational leaves it unchanged; multiplying by zero gives zero
    (indicator masking). Anything else is an error.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INF"

    def __str__(self):
        return "-inf"

    def __reduce__(self):
        return (_NegInf, ())

    def __hash__(self):
        return hash("NEG_INF")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __add__(self, other):
        if other is self or isinstance(other, (Rational, int)):
            return self
        return NotImplemented

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (Rational, int)):
            if other > 0:
                return self
            if other == 0:
                return Fraction(0)
        raise ArithmeticError(f"NEG_INF * {other!r} is undefined")

    __rmul__ = __mul__

    def __neg__(self):
        raise ArithmeticError("negating NEG_INF is not supported")

    def __sub__(self, other):
        if isinstance(other, (Rational, int)):
            return self
        raise ArithmeticError(f"NEG_INF - {other!r} is undefined")


NEG_INF = _NegInf()
_ZERO = Fraction(0)


def to_fraction(value) -> Fraction:
    """Exact conversion from int, Fraction, Decimal or a ``"p/q"`` string."""
    if type(value) is Fraction:
        return value
    if isinstance(value, bool):
        raise InputError(f"boolean {value!r} is not a rational")
    if isinstance(value, (int, Fraction, Decimal)):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"cannot parse {value!r} as a rational") from None
    if isinstance(value, float):
        raise InputError(f"floating-point value {value!r} rejected; use a Fraction or 'p/q'")
    raise InputError(f"cannot convert {value!r} to a rational")


def to_extended(value):
    if type(value) is Fraction:
        return value
    if value is NEG_INF or (isinstance(value, str) and value.strip() == "-inf"):
        return NEG_INF
    return to_fraction(value)


def format_value(value) -> str:
    if value is NEG_INF:
        return "-inf"
    return str(value)


def weighted_sum(weights: Sequence[Fraction], values: Sequence, atoms: Iterable[int] | None = None) -> Fraction:
    """``sum(w * v)`` skipping zero weights; NEG_INF under positive weight raises."""
    total = Fraction(0)
    for a in range(len(weights)) if atoms is None else atoms:
        w = weights[a]
        if not w:
            continue
        v = values[a]
        if v is NEG_INF:
            raise NotIntegrableError(f"not integrable: NEG_INF on charged atom {a}")
        total += w * v
    return total


class Measure:
    """Probability vector over the atoms, exact rationals summing to one."""

    __slots__ = ("weights",)

    def __init__(self, weights: Iterable):
        weights = tuple(to_fraction(w) for w in weights)
        if not weights:
            raise InputError("a measure needs at least one atom")
        if any(w < 0 for w in weights):
            raise InputError(f"negative weight in {list(map(str, weights))}")
        total = sum(weights)
        if total != 1:
            raise InputError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, name, value):
        raise AttributeError("Measure is immutable")

    @classmethod
    def point_mass(cls, n: int, atom: int) -> "Measure":
        return cls(Fraction(int(a == atom)) for a in range(n))

    @classmethod
    def uniform(cls, n: int, atoms: Iterable[int] | None = None) -> "Measure":
        atoms = set(range(n) if atoms is None else atoms)
        return cls(Fraction(1, len(atoms)) if a in atoms else Fraction(0) for a in range(n))

    @classmethod
    def from_block_masses(cls, sigma: SigmaAlgebra, masses: Sequence) -> "Measure":
        """Spread each block mass uniformly over the atoms of the block."""
        w = [Fraction(0)] * sigma.n
        for b, m in zip(sigma.blocks, masses):
            m = to_fraction(m)
            for a in b:
                w[a] = m / len(b)
        return cls(w)

    @property
    def n(self) -> int:
        return len(self.weights)

    def __eq__(self, other):
        return isinstance(other, Measure) and self.weights == other.weights

    def __hash__(self):
        return hash(self.weights)

    def __repr__(self):
        return "Measure([" + ", ".join(map(str, self.weights)) + "])"

    def __getitem__(self, atom: int) -> Fraction:
        return self.weights[atom]

    def mass(self, event: Iterable[int]) -> Fraction:
        return sum((self.weights[a] for a in event), Fraction(0))

    def __call__(self, event: Iterable[int]) -> Fraction:
        return self.mass(event)

    def support(self) -> frozenset[int]:
        return frozenset(a for a, w in enumerate(self.weights) if w)

    def expect(self, variable) -> Fraction:
        return weighted_sum(self.weights, variable.values)

    def restrict(self, sigma: SigmaAlgebra) -> dict[frozenset[int], Fraction]:
        return restrict(self, sigma)


class MeasureFamily:
    """Finite nonempty family of distinct measures, optionally named.

    Duplicates (identical weight vectors) are dropped, keeping the first
    occurrence and its name.
    """

    def __init__(self, members: Iterable[Measure], names: Iterable[str] | None = None):
        members = [m if isinstance(m, Measure) else Measure(m) for m in members]
        names = [f"m{i}" for i in range(len(members))] if names is None else list(names)
        if len(names) != len(members):
            raise InputError("names and members differ in length")
        if not members:
            raise InputError("a measure family must be nonempty")
        n = members[0].n
        kept, kept_names, seen = [], [], set()
        for m, name in zip(members, names):
            if m.n != n:
                raise InputError("family members live on different sample spaces")
            if m.weights in seen:
                continue
            seen.add(m.weights)
            kept.append(m)
            kept_names.append(str(name))
        if len(set(kept_names)) != len(kept_names):
            raise InputError(f"duplicate measure names in {kept_names}")
        self.members: tuple[Measure, ...] = tuple(kept)
        self.names: tuple[str, ...] = tuple(kept_names)

    @property
    def n(self) -> int:
        return self.members[0].n

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[Measure]:
        return iter(self.members)

    def __getitem__(self, key) -> Measure:
        if isinstance(key, str):
            return self.members[self.names.index(key)]
        return self.members[key]

    def __contains__(self, measure) -> bool:
        return any(m == measure for m in self.members)

    def __eq__(self, other):
        return isinstance(other, MeasureFamily) and self.members == other.members and self.names == other.names

    def __repr__(self):
        return f"MeasureFamily({list(self.members)!r}, names={list(self.names)!r})"

    def items(self):
        return zip(self.names, self.members)

    def index(self, measure: Measure) -> int:
        return self.members.index(measure)

    def weight_set(self) -> frozenset:
        return frozenset(m.weights for m in self.members)


class RandomVariable:
    """Atom-indexed extended rational values (rationals or NEG_INF)."""

    __slots__ = ("values",)

    def __init__(self, values: Iterable):
        values = tuple(to_extended(v) for v in values)
        if not values:
            raise InputError("a random variable needs at least one atom")
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("RandomVariable is immutable")

    @classmethod
    def _trusted(cls, values: tuple) -> "RandomVariable":
        # values already exact; skips conversion on hot paths
        out = object.__new__(cls)
        object.__setattr__(out, "values", values)
        return out

    @classmethod
    def constant(cls, n: int, c) -> "RandomVariable":
        return cls([to_fraction(c)] * n)

    @classmethod
    def indicator(cls, n: int, event: Iterable[int]) -> "RandomVariable":
        event = as_event(event, n)
        return cls(Fraction(int(a in event)) for a in range(n))

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, atom):
        return self.values[atom]

    def __eq__(self, other):
        return isinstance(other, RandomVariable) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        return "RandomVariable([" + ", ".join(map(format_value, self.values)) + "])"

    def is_finite(self, atoms: Iterable[int] | None = None) -> bool:
        atoms = range(self.n) if atoms is None else atoms
        return all(self.values[a] is not NEG_INF for a in atoms)

    def _zip(self, other):
        if isinstance(other, RandomVariable):
            if other.n != self.n:
                raise InputError("random variables live on different sample spaces")
            return zip(self.values, other.values)
        c = to_fraction(other)
        return ((v, c) for v in self.values)

    def __add__(self, other):
        return RandomVariable._trusted(tuple(a + b for a, b in self._zip(other)))

    __radd__ = __add__

    def __neg__(self):
        return RandomVariable._trusted(tuple(-v for v in self.values))

    def __sub__(self, other):
        return self + (-other if isinstance(other, RandomVariable) else -to_fraction(other))

    def __mul__(self, other):
        # NEG_INF only survives multiplication by positive factors; zero masks it.
        return RandomVariable._trusted(tuple(a * b for a, b in self._zip(other)))

    __rmul__ = __mul__

    def __abs__(self):
        return RandomVariable._trusted(tuple(abs(v) for v in self.values))

    def masked(self, event: Iterable[int]) -> "RandomVariable":
        """``I_A * X``."""
        event = set(event)
        return RandomVariable._trusted(tuple(v if a in event else _ZERO for a, v in enumerate(self.values)))

    def positive_part(self) -> "RandomVariable":
        return RandomVariable._trusted(tuple(max(v, _ZERO) for v in self.values))


def pointwise_max(variables: Iterable[RandomVariable]) -> RandomVariable:
    variables = list(variables)
    if not variables:
        raise InputError("pointwise maximum of an empty family")
    return RandomVariable._trusted(tuple(max(col) for col in zip(*(v.values for v in variables))))


def restrict(measure: Measure, sigma: SigmaAlgebra) -> dict[frozenset[int], Fraction]:
    """Block masses of ``measure`` on ``sigma`` (the restriction to the sub-sigma-algebra)."""
    if measure.n != sigma.n:
        raise InputError("measure and sigma-algebra live on different sample spaces")
    return {b: measure.mass(b) for b in sigma.blocks}


def radon_nikodym(theta: Measure, phi: Measure, sigma: SigmaAlgebra, support: Iterable[int],
                  family: MeasureFamily | None = None) -> RandomVariable:
    """Density of ``theta`` restricted to ``sigma`` against ``phi``, masked to ``support``.

    On each block ``b`` with ``phi(b & S) > 0`` the density is the constant
    ``theta(b & S) / phi(b & S)``; it is zero outside ``S`` and on the
    phi-null parts of ``S``. If ``family`` is given, ``S`` must be measurable
    in the universal completion of ``sigma`` under it.
    """
    n = sigma.n
    support = as_event(support, n)
    if theta.n != n or phi.n != n:
        raise InputError("measures and sigma-algebra live on different sample spaces")
    if family is not None and not universal_complete(sigma, family).is_measurable(support):
        raise PreconditionError("support set is not measurable in the universal completion")
    values = [Fraction(0)] * n
    for b in sigma.blocks:
        part = b & support
        if not part:
            continue
        t, p = theta.mass(part), phi.mass(part)
        if t and not p:
            raise NotAbsolutelyContinuousError(
                f"not absolutely continuous on S: block {sorted(b)} has theta-mass {t} but phi-mass 0"
            )
        if p:
            for a in part:
                values[a] = t / p
    return RandomVariable(values)
