"""Kakutani-Rokhlin towers over a finite conditional expectation system.

Two constructions are provided. The epsilon-free tower exists for every
conditionally ergodic system: from the first-return decomposition of a
component p, the base

    q = sum_{j>=0} S^{nj} R_{n(j+1)},   R_k = sum_{i>=k} q(p,i)

has n pairwise disjoint iterates q, Sq, ..., S^{n-1}q and satisfies

    T(join_{j<n} S^j q) >= (P_{Tp}e - (n-1) Tp)^+.

The epsilon-bounded tower additionally needs room: true aperiodicity is
unattainable on a finite set, so the construction states its horizon
requirement explicitly ("N-aperiodic": every cycle length >= N, here with
N = floor((n-1)/eps) + 1 and base cycles of length >= N+1). When a cycle
is too short the construction refuses with NotAperiodicAtHorizon - which
is precisely how the direct-product counterexample manifests at finite
truncation.

All inequalities are certified with both sides stored verbatim as exact
rationals. Tower code applies S to components only through
``component_image``; it never applies raw tau to sets.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations
from math import floor
from typing import Iterable, Iterator

from .errors import DomainError, NotAperiodicAtHorizon, TheoremViolation
from .lattice import Component, LatticeElement, as_component, band_project
from .rationals import as_rational, format_rational
from .recurrence import max_cycle_length_meeting, q_component, return_decomposition
from .system import GroundSystem


@dataclass(frozen=True)
class BoundCertificate:
    """An audited inequality: both sides verbatim, plus the direction."""

    name: str
    lhs: LatticeElement
    rhs: LatticeElement
    relation: str  # "<=" or ">="

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs if self.relation == "<=" else self.rhs <= self.lhs

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": [format_rational(a) for a in self.lhs],
            "relation": self.relation,
            "rhs": [format_rational(a) for a in self.rhs],
            "holds": self.holds,
        }


@dataclass(frozen=True)
class Tower:
    """Base, its disjoint Koopman iterates, what they miss, and the receipts."""

    base: Component
    height: int
    levels: tuple[Component, ...]  # levels[i] = S^i base as a set
    residual: Component
    bound_certificate: BoundCertificate
    extra_certificates: tuple[BoundCertificate, ...] = ()
    degenerate: bool = False  # empty base requested; theorem vacuously true

    def covered(self) -> Component:
        return frozenset().union(*self.levels) if self.levels else frozenset()

    def verify_against(self, sys: GroundSystem) -> list[str]:
        """Re-check every structural invariant; empty list means all hold."""
        problems = []
        if len(self.levels) != self.height:
            problems.append("level-count")
        for i, level in enumerate(self.levels):
            if level != sys.component_image(i, self.base):
                problems.append(f"level-{i}-not-koopman-image")
        if sum(len(l) for l in self.levels) != len(self.covered()):
            problems.append("levels-not-disjoint")
        if self.residual != sys.ground_set() - self.covered():
            problems.append("residual-mismatch")
        for cert in (self.bound_certificate, *self.extra_certificates):
            if not cert.holds:
                problems.append(f"certificate-{cert.name}")
        return problems

    def as_dict(self) -> dict:
        return {
            "base": sorted(self.base),
            "height": self.height,
            "levels": [sorted(l) for l in self.levels],
            "residual": sorted(self.residual),
            "certificate": self.bound_certificate.as_dict(),
            "extra_certificates": [c.as_dict() for c in self.extra_certificates],
            "degenerate": self.degenerate,
        }


def _suffix_union(parts: dict[int, Component], k: int) -> Component:
    """R_k = union of q(p,i) over i >= k."""
    return frozenset().union(*(q for i, q in parts.items() if i >= k))


def build_tower(sys: GroundSystem, p: Iterable[int], n: int) -> Tower:
    """The epsilon-free tower of height n over the returns of p.

    An empty p yields a degenerate tower (base 0, everything residual)
    flagged as such instead of an error: the theorem is vacuously true and
    callers probing random components should not crash.
    """
    if n < 1:
        raise DomainError(f"tower height must be >= 1, got {n}")
    sys.require_conditionally_ergodic()
    p = as_component(p)

    decomp = return_decomposition(sys, p)
    base: set[int] = set()
    j = 0
    while n * (j + 1) <= decomp.horizon:
        r = _suffix_union(decomp.parts, n * (j + 1))
        base |= sys.component_image(n * j, r)
        j += 1
    base = frozenset(base)

    levels = tuple(sys.component_image(i, base) for i in range(n))
    if sum(len(l) for l in levels) != len(frozenset().union(*levels)):
        raise TheoremViolation(
            f"tower levels over base {sorted(base)} are not pairwise disjoint"
        )
    covered = frozenset().union(*levels)
    residual = sys.ground_set() - covered

    tp = sys.expectation(sys.indicator(p))
    p_tp_e = band_project(tp.support(), sys.unit)
    certificate = BoundCertificate(
        name="tower-mass-lower-bound",
        lhs=sys.expectation(sys.indicator(covered)),
        rhs=(p_tp_e - (n - 1) * tp).pos_part(),
        relation=">=",
    )
    if not certificate.holds:
        raise TheoremViolation(
            f"tower mass bound failed: T(levels) = {certificate.lhs!r} is not >= "
            f"{certificate.rhs!r}"
        )
    return Tower(
        base=base,
        height=n,
        levels=levels,
        residual=residual,
        bound_certificate=certificate,
        degenerate=not p,
    )


def proof_chain_identity(
    sys: GroundSystem, p: Iterable[int], n: int
) -> tuple[LatticeElement, LatticeElement, bool]:
    """T(join_{k<n} S^k q) against sum_i n*floor(i/n)*T q(p,i), exactly."""
    p = as_component(p)
    tower = build_tower(sys, p, n)
    lhs = sys.expectation(sys.indicator(tower.covered()))
    rhs = LatticeElement((Fraction(0),) * sys.size)
    for i, qi in return_decomposition(sys, p).parts.items():
        rhs = rhs + (n * (i // n)) * sys.expectation(sys.indicator(qi))
    return lhs, rhs, lhs == rhs


def nonzero_subsets(c: Component) -> Iterator[Component]:
    """Every nonempty subset of c, lazily, singletons first."""
    members = sorted(c)
    for r in range(1, len(members) + 1):
        for combo in combinations(members, r):
            yield frozenset(combo)


def n_aperiodic(
    sys: GroundSystem, v: Iterable[int], horizon: int, mode: str = "criterion"
) -> bool:
    """The finite aperiodicity surrogate at a single horizon N.

    criterion mode: every tau-cycle meeting v has length >= N.
    definitional mode: for every nonzero component c <= v there exist
    k >= N and a component u <= c with q(u,k) nonzero. Exhaustive, hence
    refused for |Omega| > 12. The two modes agree wherever both run.
    """
    v = as_component(v)
    if not v:
        raise DomainError("n_aperiodic needs a nonzero component v")
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    if mode == "criterion":
        return all(
            len(sys.cycles[c]) >= horizon for c in {sys.cycle_of[x] for x in v}
        )
    if mode != "definitional":
        raise DomainError(f"unknown mode {mode!r}")
    if sys.size > 12:
        raise DomainError(
            f"definitional mode is exhaustive and refused for |Omega| = "
            f"{sys.size} > 12; use criterion mode"
        )
    for c in nonzero_subsets(v):
        if not _has_late_return(sys, c, horizon):
            return False
    return True


def _has_late_return(sys: GroundSystem, c: Component, horizon: int) -> bool:
    """Exists u <= c nonzero and k >= horizon with q(u,k) nonzero?"""
    for u in nonzero_subsets(c):
        for k in range(horizon, max_cycle_length_meeting(sys, u) + 1):
            if q_component(sys, u, k):
                return True
    return False


def find_base_component(sys: GroundSystem, horizon: int) -> Component:
    """The deterministic c_N: one point (the minimum index) per tau-cycle.

    Requires every cycle length >= N+1; then S^0 c_N, ..., S^N c_N are
    pairwise disjoint and T c_N has full support - the two conclusions the
    maximality argument promises, checked here rather than assumed.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    sys.require_conditionally_ergodic()
    for cyc in sys.cycles:
        if len(cyc) <= horizon:
            raise NotAperiodicAtHorizon(cyc, len(cyc), horizon + 1)
    c_n = frozenset(cyc[0] for cyc in sys.cycles)

    images = [sys.component_image(i, c_n) for i in range(horizon + 1)]
    if sum(len(im) for im in images) != len(frozenset().union(*images)):
        raise TheoremViolation(
            f"iterates of base component {sorted(c_n)} are not disjoint up to "
            f"horizon {horizon}"
        )
    t_cn = sys.expectation(sys.indicator(c_n))
    if t_cn.support() != sys.ground_set():
        raise TheoremViolation(
            f"T applied to base component {sorted(c_n)} lacks full support"
        )
    return c_n


def build_tower_eps(sys: GroundSystem, n: int, eps) -> Tower:
    """The epsilon-bounded tower: T(residual) <= eps*e, exactly.

    Picks N = floor((n-1)/eps) + 1 (so N > (n-1)/eps), takes the base
    component at that horizon and builds the height-n tower over it. The
    intermediate bounds of the argument - N*Tp <= e, and
    Tp <= eps/(n-1)*e when n >= 2 - are re-verified and attached to the
    tower as extra certificates.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {format_rational(eps)}")
    if n < 1:
        raise DomainError(f"tower height must be >= 1, got {n}")
    sys.require_conditionally_ergodic()

    horizon = floor(Fraction(n - 1) / eps) + 1
    p = find_base_component(sys, horizon)
    tower = build_tower(sys, p, n)

    residual_bound = BoundCertificate(
        name="residual-mass-bound",
        lhs=sys.expectation(sys.indicator(tower.residual)),
        rhs=eps * sys.unit,
        relation="<=",
    )
    if not residual_bound.holds:
        raise TheoremViolation(
            f"residual mass bound failed at eps = {format_rational(eps)}: "
            f"T(residual) = {residual_bound.lhs!r}"
        )
    tp = sys.expectation(sys.indicator(p))
    extras = [tower.bound_certificate]
    extras.append(
        BoundCertificate(
            name="base-mass-times-horizon",
            lhs=horizon * tp,
            rhs=sys.unit,
            relation="<=",
        )
    )
    if n >= 2:
        extras.append(
            BoundCertificate(
                name="base-mass-bound",
                lhs=tp,
                rhs=(eps / (n - 1)) * sys.unit,
                relation="<=",
            )
        )
    for cert in extras:
        if not cert.holds:
            raise TheoremViolation(f"intermediate bound {cert.name} failed")
    return replace(
        tower,
        bound_certificate=residual_bound,
        extra_certificates=tuple(extras),
    )


def build_tower_eps_ls(sys: GroundSystem, v: Iterable[int], n: int, eps) -> Tower:
    """The epsilon-bounded tower under L_S, on an orbit-invariant component v.

    Conditional ergodicity of the ambient system is not required: blocks
    are replaced by orbits (the L_S refinement) and the construction runs
    on the restriction to v. The certificate bounds L_S(v - levels) by
    eps*v on the original system.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {format_rational(eps)}")
    v = as_component(v)
    if not v:
        raise DomainError("v must be a nonzero orbit-invariant component")
    if sys.component_image(1, v) != v:
        raise DomainError(f"{sorted(v)} is not a union of tau-orbits")

    horizon = floor(Fraction(n - 1) / eps) + 1
    for c in {sys.cycle_of[x] for x in v}:
        cyc = sys.cycles[c]
        if len(cyc) <= horizon:
            raise NotAperiodicAtHorizon(cyc, len(cyc), horizon + 1)

    sub, embed = sys.orbit_refinement().restricted_to(v)
    sub_tower = build_tower_eps(sub, n, eps)

    base = frozenset(embed[i] for i in sub_tower.base)
    levels = tuple(
        frozenset(embed[i] for i in level) for level in sub_tower.levels
    )
    covered = frozenset().union(*levels)
    chi_v = sys.indicator(v)
    ls_bound = BoundCertificate(
        name="ls-residual-mass-bound",
        lhs=sys.cesaro_mean(chi_v - sys.indicator(covered)),
        rhs=eps * chi_v,
        relation="<=",
    )
    if not ls_bound.holds:
        raise TheoremViolation(
            f"L_S residual bound failed at eps = {format_rational(eps)}"
        )
    return Tower(
        base=base,
        height=n,
        levels=levels,
        residual=sys.ground_set() - covered,
        bound_certificate=ls_bound,
        extra_certificates=sub_tower.extra_certificates,
    )
