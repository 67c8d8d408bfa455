"""First-return machinery: q(p,k), the Poincare decomposition, n(p), Kac.

For a component p of e and k >= 1, the component of p recurrent at
exactly k steps is

    q(p,k) = p ^ S^{-k}p ^ (e - join_{j=1}^{k-1} S^{-j}p),

with the empty join at k = 1 taken as 0. Everything is computed by this
lattice formula via ``component_image``; the trajectory simulation lives
in oracles.py and is used only to cross-check.

The sums are finite here: q(p,k) = 0 once k exceeds the longest tau-cycle
meeting p, because a point returns to p no later than its cycle closes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import DomainError
from .lattice import Component, LatticeElement, as_component, band_project, elem
from .system import GroundSystem


def max_cycle_length_meeting(sys: GroundSystem, p: Component) -> int:
    """The horizon bound: longest tau-cycle intersecting p (0 for empty p)."""
    return max((len(sys.cycles[sys.cycle_of[x]]) for x in p), default=0)


def q_component(sys: GroundSystem, p: Iterable[int], k: int) -> Component:
    """The maximal component of p recurrent at exactly k iterates of S."""
    if k < 1:
        raise DomainError(f"recurrence index must be >= 1, got {k}")
    p = as_component(p)
    result = p & sys.component_image(-k, p)
    for j in range(1, k):
        if not result:
            break
        result -= sys.component_image(-j, p)
    return frozenset(result)


@dataclass(frozen=True)
class ReturnDecomposition:
    """p as the disjoint sum of its first-return components q(p,k)."""

    base: Component
    parts: dict[int, Component]  # k -> q(p,k), nonzero entries only

    @property
    def horizon(self) -> int:
        """Largest k with q(p,k) nonzero; 0 for an empty base."""
        return max(self.parts, default=0)

    def as_dict(self) -> dict:
        return {
            "p": sorted(self.base),
            "parts": {str(k): sorted(v) for k, v in sorted(self.parts.items())},
            "horizon": self.horizon,
        }


def return_decomposition(sys: GroundSystem, p: Iterable[int]) -> ReturnDecomposition:
    """All nonzero q(p,k); their disjoint union is exactly p (Poincare)."""
    p = as_component(p)
    parts: dict[int, Component] = {}
    remaining = set(p)
    for k in range(1, max_cycle_length_meeting(sys, p) + 1):
        if not remaining:
            break
        qk = q_component(sys, p, k)
        if qk:
            parts[k] = qk
            remaining -= qk
    return ReturnDecomposition(base=p, parts=parts)


def first_return_time(sys: GroundSystem, p: Iterable[int]) -> LatticeElement:
    """n(p) = sum_k k q(p,k): the return time at each point of p, 0 off p."""
    p = as_component(p)
    values = [0] * sys.size
    for k, qk in return_decomposition(sys, p).parts.items():
        for x in qk:
            values[x] = k
    return elem(values)


def check_recurrent(sys: GroundSystem, p: Iterable[int], q: Iterable[int]) -> bool:
    """Is p recurrent with respect to q, i.e. p <= join_{n>=1} S^{-n} q?

    The infinite join stabilizes after max-cycle-length steps on a finite
    system (each forward tau-image of q sweeps out the cycles meeting q),
    so the union is taken up to that bound.
    """
    p = as_component(p)
    q = as_component(q)
    union: set[int] = set()
    steps = max((len(c) for c in sys.cycles), default=0)
    for n in range(1, steps + 1):
        union |= sys.component_image(-n, q)
    return p <= union


def disjointness_witnesses(
    sys: GroundSystem, p: Iterable[int]
) -> list[tuple[int, int, int, int]]:
    """Violations of S^i q(p,m) ^ S^j q(p,n) = 0, exhaustively up to the horizon.

    Admissible indices: 0 <= i <= m-1, 0 <= j <= n-1, (i,m) != (j,n), over
    the nonzero parts of the decomposition. Returns the violating
    (i, m, j, n) tuples; the lemma says there are none.
    """
    parts = return_decomposition(sys, p).parts
    iterates: dict[tuple[int, int], Component] = {}
    for m, qm in parts.items():
        for i in range(m):
            iterates[(i, m)] = sys.component_image(i, qm)
    bad = []
    keys = sorted(iterates)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            (i, m), (j, n) = keys[a], keys[b]
            if iterates[keys[a]] & iterates[keys[b]]:
                bad.append((i, m, j, n))
    return bad


def kac_certificate(
    sys: GroundSystem, p: Iterable[int]
) -> tuple[LatticeElement, LatticeElement, bool]:
    """The Kac identity T n(p) = P_{Tp} e, both sides computed independently.

    Requires conditional ergodicity (the theorem's hypothesis); non-ergodic
    systems are refused with a diagnostic rather than reported as a failed
    identity. For valid input the returned flag is always True - False
    would be a build-breaking defect, not a data condition.
    """
    sys.require_conditionally_ergodic()
    p = as_component(p)
    lhs = sys.expectation(first_return_time(sys, p))
    tp = sys.expectation(sys.indicator(p))
    rhs = band_project(tp.support(), sys.unit)
    return lhs, rhs, lhs == rhs
