"""Riesz-space primitives on a finite ground set, with exact rationals.

A lattice element is a function {0,...,N-1} -> Q stored as a tuple of
Fractions; the order is pointwise, so meets and joins are pointwise min
and max. The weak order unit e is the all-ones element. Components of e
(the lattice analogue of measurable sets) carry a dedicated subset
representation: a frozenset of indices, convertible to and from the
{0,1}-valued element by ``indicator`` and ``support_component``.

Everything here is an immutable value; every operation returns a new one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import DimensionError, DomainError
from .rationals import RationalLike, as_rational, format_rational

Component = frozenset[int]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_component(members: Iterable[int]) -> Component:
    return members if isinstance(members, frozenset) else frozenset(members)


@dataclass(frozen=True)
class LatticeElement:
    """A rational-valued function on {0,...,N-1} with the pointwise order."""

    values: tuple[Fraction, ...]

    def __post_init__(self):
        if not all(isinstance(v, Fraction) for v in self.values):
            raise DomainError("lattice element entries must be exact Fractions")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)

    def _check_same_length(self, other: "LatticeElement") -> None:
        if len(self.values) != len(other.values):
            raise DimensionError(
                f"dimension mismatch: {len(self.values)} vs {len(other.values)}"
            )

    # vector-space structure
    def __add__(self, other: "LatticeElement") -> "LatticeElement":
        self._check_same_length(other)
        return LatticeElement(tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "LatticeElement") -> "LatticeElement":
        self._check_same_length(other)
        return LatticeElement(tuple(a - b for a, b in zip(self.values, other.values)))

    def __neg__(self) -> "LatticeElement":
        return LatticeElement(tuple(-a for a in self.values))

    def __mul__(self, other) -> "LatticeElement":
        """Scalar multiple, or the pointwise product with another element."""
        if isinstance(other, LatticeElement):
            self._check_same_length(other)
            return LatticeElement(
                tuple(a * b for a, b in zip(self.values, other.values))
            )
        return LatticeElement(tuple(a * as_rational(other) for a in self.values))

    __rmul__ = __mul__

    # lattice structure
    def meet(self, other: "LatticeElement") -> "LatticeElement":
        self._check_same_length(other)
        return LatticeElement(
            tuple(min(a, b) for a, b in zip(self.values, other.values))
        )

    def join(self, other: "LatticeElement") -> "LatticeElement":
        self._check_same_length(other)
        return LatticeElement(
            tuple(max(a, b) for a, b in zip(self.values, other.values))
        )

    def pos_part(self) -> "LatticeElement":
        return LatticeElement(tuple(max(a, ZERO) for a in self.values))

    def neg_part(self) -> "LatticeElement":
        return LatticeElement(tuple(max(-a, ZERO) for a in self.values))

    def __abs__(self) -> "LatticeElement":
        return LatticeElement(tuple(abs(a) for a in self.values))

    def __le__(self, other: "LatticeElement") -> bool:
        self._check_same_length(other)
        return all(a <= b for a, b in zip(self.values, other.values))

    def __ge__(self, other: "LatticeElement") -> bool:
        return other <= self

    def is_nonnegative(self) -> bool:
        return all(a >= ZERO for a in self.values)

    def is_component(self) -> bool:
        """True iff every entry is 0 or 1, i.e. the element lies in C_e."""
        return all(a == ZERO or a == ONE for a in self.values)

    def support(self) -> Component:
        """Indices with a nonzero entry (for any sign)."""
        return frozenset(i for i, a in enumerate(self.values) if a != ZERO)

    def __repr__(self) -> str:
        return "(" + ", ".join(format_rational(a) for a in self.values) + ")"


def elem(values: Iterable[RationalLike]) -> LatticeElement:
    """Build a lattice element, coercing ints and "a/b" strings exactly."""
    return LatticeElement(tuple(as_rational(v) for v in values))


def zeros(n: int) -> LatticeElement:
    return LatticeElement((ZERO,) * n)


def ones(n: int) -> LatticeElement:
    """The weak order unit e on a ground set of size n."""
    return LatticeElement((ONE,) * n)


def indicator(n: int, members: Iterable[int]) -> LatticeElement:
    """The {0,1}-valued element of a component, as a lattice element."""
    members = as_component(members)
    bad = [i for i in members if not 0 <= i < n]
    if bad:
        raise DimensionError(f"component members {bad} outside ground set of size {n}")
    return LatticeElement(tuple(ONE if i in members else ZERO for i in range(n)))


def meet(f: LatticeElement, g: LatticeElement) -> LatticeElement:
    return f.meet(g)


def join(f: LatticeElement, g: LatticeElement) -> LatticeElement:
    return f.join(g)


def pos_part(f: LatticeElement) -> LatticeElement:
    return f.pos_part()


def is_component(f: LatticeElement) -> bool:
    return f.is_component()


def band_project(u: Iterable[int], f: LatticeElement) -> LatticeElement:
    """Band projection P_u: keep the entries inside u, zero the rest."""
    u = as_component(u)
    bad = [i for i in u if not 0 <= i < len(f)]
    if bad:
        raise DimensionError(f"band {bad} outside ground set of size {len(f)}")
    return LatticeElement(
        tuple(a if i in u else ZERO for i, a in enumerate(f.values))
    )


def support_component(f: LatticeElement) -> Component:
    """The smallest component c with P_c f = f, for f >= 0.

    Applying ``band_project`` of the result to e yields P_f e, the band
    projection of the unit onto the band generated by f.
    """
    if not f.is_nonnegative():
        raise DomainError(f"support_component requires f >= 0, got {f!r}")
    return f.support()
