"""Independent reference computations for cross-checking.

Everything here recomputes a quantity by brute force - explicit point
trajectories, stepwise operator application, exhaustive enumeration -
without touching the lattice formulas or cycle-decomposition shortcuts
used by the constructions. The property suites and the test suite compare
the two routes; nothing in the construction modules imports this one.

Direction of the point flow: the first-return formula
q(p,k) = p ^ S^{-k}p ^ (e - join_{j<k} S^{-j}p), with S^i acting on
components as tau^{-i}, picks out the points of p whose first return
happens under the *inverse* point flow x -> tau^{-1}(x). The walkers
below therefore iterate tau backwards; agreement with the lattice
formula is exactly the cross-check the suites run.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator

from .lattice import Component, LatticeElement, as_component
from .system import GroundSystem


def first_return_times(sys: GroundSystem, p: Iterable[int]) -> dict[int, int]:
    """For each x in p, the first k >= 1 with tau^{-k}(x) in p, by walking."""
    p = as_component(p)
    inv = sys.tau_inverse
    times: dict[int, int] = {}
    for x in p:
        y = inv[x]
        k = 1
        while y not in p:
            y = inv[y]
            k += 1
            if k > sys.size:  # unreachable for a bijection; guards the walk
                raise AssertionError("first-return walk failed to terminate")
        times[x] = k
    return times


def first_return_sets(sys: GroundSystem, p: Iterable[int]) -> dict[int, Component]:
    """The trajectory-simulation first-return decomposition of p."""
    sets: dict[int, set[int]] = {}
    for x, k in first_return_times(sys, p).items():
        sets.setdefault(k, set()).add(x)
    return {k: frozenset(v) for k, v in sorted(sets.items())}


def brute_koopman(sys: GroundSystem, j: int, f: LatticeElement) -> LatticeElement:
    """S^j f by composing tau (or its inverse) one step at a time."""
    step = sys.tau if j >= 0 else sys.tau_inverse
    values = list(f.values)
    for _ in range(abs(j)):
        values = [values[step[i]] for i in range(sys.size)]
    return LatticeElement(tuple(values))


def brute_component_image(sys: GroundSystem, j: int, p: Iterable[int]) -> Component:
    """S^j on the indicator of p, read off from brute_koopman's support."""
    return brute_koopman(sys, j, sys.indicator(p)).support()


def forward_image_union(sys: GroundSystem, q: Iterable[int], steps: int) -> Component:
    """union_{n=1}^{steps} tau^n(q), built by stepping the set forward."""
    q = set(as_component(q))
    union: set[int] = set()
    current = q
    for _ in range(steps):
        current = {sys.tau[x] for x in current}
        union |= current
    return frozenset(union)


def orbit_of(sys: GroundSystem, x: int) -> Component:
    """The full tau-orbit of a point, by walking until it closes."""
    orbit = {x}
    y = sys.tau[x]
    while y != x:
        orbit.add(y)
        y = sys.tau[y]
    return frozenset(orbit)


def block_average(sys: GroundSystem, f: LatticeElement) -> LatticeElement:
    """T f recomputed with explicit per-block weighted sums."""
    out = []
    for i in range(sys.size):
        block = sys.blocks[sys.block_of[i]]
        num = sum((sys.weights[j] * f[j] for j in block), Fraction(0))
        den = sum((sys.weights[j] for j in block), Fraction(0))
        out.append(num / den)
    return LatticeElement(tuple(out))


def all_components(size: int) -> Iterator[Component]:
    """Every subset of {0,...,size-1}, empty set first (2^size of them)."""
    for mask in range(1 << size):
        yield frozenset(i for i in range(size) if mask >> i & 1)


def nonzero_subcomponents(c: Component) -> Iterator[Component]:
    """Every nonempty subset of c, lazily, smallest first (singletons early)."""
    members = sorted(c)
    for r in range(1, len(members) + 1):
        for combo in combinations(members, r):
            yield frozenset(combo)
