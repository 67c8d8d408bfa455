"""The concrete conditional expectation preserving system on a finite set.

A GroundSystem is (Omega, mu, Pi, tau): a ground set {0,...,N-1}, strictly
positive rational weights, a partition into blocks, and a bijection tau.
It realizes the 4-tuple (E, T, S, e):

* E is the space of rational-valued functions on Omega (lattice.py),
  e the all-ones element;
* T is the partition-conditional expectation: on each block, the
  mu-weighted average (weights need only be positive, no global
  normalization - T uses within-block ratios only);
* S is the Koopman homomorphism S^j f = f o tau^j. On indicator
  elements S^j acts as the set map p -> tau^{-j}(p) = {x : tau^j(x) in p};
  this single sign convention is fixed here and used verbatim by every
  downstream construction.

The CEPS axioms (Te = e, Se = e, TS = T, T strictly positive, S a
surjective Riesz homomorphism) hold exactly when tau is a permutation
fixing every block setwise and the weights are tau-invariant pointwise.
``validate_ceps`` checks this both structurally and extensionally.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, InitVar
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Mapping, Sequence

from .errors import DimensionError, DomainError, InvalidSystem, NotConditionallyErgodic
from .lattice import Component, LatticeElement, as_component, indicator, ones
from .rationals import as_rational, format_rational


@dataclass(frozen=True)
class Check:
    """One validation item: an axiom name, a verdict, and a witness on failure."""

    name: str
    passed: bool
    witness: object = None


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> tuple[Check, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def as_dict(self) -> dict:
        return {
            "valid": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "witness": _jsonable(c.witness)}
                for c in self.checks
            ],
        }


def _jsonable(witness):
    if isinstance(witness, (frozenset, set)):
        return sorted(witness)
    if isinstance(witness, Fraction):
        return format_rational(witness)
    if isinstance(witness, tuple):
        return [_jsonable(w) for w in witness]
    return witness


def permutation_cycles(perm: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Cycles of a permutation as forward orbits, each starting at its minimum."""
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        j = perm[start]
        while j != start:
            seen[j] = True
            cyc.append(j)
            j = perm[j]
        out.append(tuple(cyc))
    return tuple(out)


@dataclass(frozen=True)
class GroundSystem:
    """(Omega, weights, blocks, tau); immutable after construction.

    Construction enforces well-formedness (tau a permutation, blocks a
    partition, weights positive) unconditionally - the operators are not
    even definable otherwise. The dynamical CEPS axioms (block and weight
    invariance under tau) are enforced too unless ``check_axioms=False``,
    the escape hatch the loader uses for counterexample demos.
    """

    size: int
    weights: tuple[Fraction, ...]
    blocks: tuple[Component, ...]
    tau: tuple[int, ...]
    check_axioms: InitVar[bool] = True

    def __post_init__(self, check_axioms: bool):
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "blocks",
                           tuple(frozenset(b) for b in self.blocks))
        object.__setattr__(self, "tau", tuple(self.tau))
        report = validate_parts(self.size, self.weights, self.blocks, self.tau)
        names = _STRUCTURAL if check_axioms else _WELLFORMED
        bad = [c for c in report.checks if c.name in names and not c.passed]
        if bad:
            raise InvalidSystem(ValidationReport(tuple(bad)))

    # -- derived structure (computed once, cached on the instance) --

    @cached_property
    def tau_inverse(self) -> tuple[int, ...]:
        inv = [0] * self.size
        for i, j in enumerate(self.tau):
            inv[j] = i
        return tuple(inv)

    @cached_property
    def block_of(self) -> tuple[int, ...]:
        owner = [0] * self.size
        for b, block in enumerate(self.blocks):
            for i in block:
                owner[i] = b
        return tuple(owner)

    @cached_property
    def block_mass(self) -> tuple[Fraction, ...]:
        return tuple(sum((self.weights[i] for i in block), Fraction(0))
                     for block in self.blocks)

    @cached_property
    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """tau-cycles as forward orbits, each starting at its minimum index."""
        return permutation_cycles(self.tau)

    @cached_property
    def cycle_of(self) -> tuple[int, ...]:
        owner = [0] * self.size
        for c, cyc in enumerate(self.cycles):
            for i in cyc:
                owner[i] = c
        return tuple(owner)

    @cached_property
    def position_in_cycle(self) -> tuple[int, ...]:
        pos = [0] * self.size
        for cyc in self.cycles:
            for k, i in enumerate(cyc):
                pos[i] = k
        return tuple(pos)

    @cached_property
    def cycle_lengths_lcm(self) -> int:
        return lcm(*(len(c) for c in self.cycles))

    @property
    def unit(self) -> LatticeElement:
        return ones(self.size)

    def ground_set(self) -> Component:
        return frozenset(range(self.size))

    # -- point maps --

    def tau_power(self, j: int, i: int) -> int:
        """tau^j(i) for any integer j, via the cycle decomposition."""
        cyc = self.cycles[self.cycle_of[i]]
        return cyc[(self.position_in_cycle[i] + j) % len(cyc)]

    def tau_power_map(self, j: int) -> tuple[int, ...]:
        return tuple(self.tau_power(j, i) for i in range(self.size))

    # -- the operators --

    def expectation(self, f: LatticeElement) -> LatticeElement:
        """T f: the weighted average of f over each block, constant on blocks."""
        self._check_element(f)
        averages = []
        for block, mass in zip(self.blocks, self.block_mass):
            total = sum((self.weights[i] * f[i] for i in block), Fraction(0))
            averages.append(total / mass)
        return LatticeElement(tuple(averages[self.block_of[i]] for i in range(self.size)))

    def koopman(self, j: int, f: LatticeElement) -> LatticeElement:
        """S^j f, i.e. f o tau^j; j may be any integer since tau is a bijection."""
        self._check_element(f)
        power = self.tau_power_map(j)
        return LatticeElement(tuple(f[power[i]] for i in range(self.size)))

    def component_image(self, j: int, p: Iterable[int]) -> Component:
        """S^j on the indicator of p, as a set: tau^{-j}(p) = {x : tau^j(x) in p}."""
        p = as_component(p)
        return frozenset(self.tau_power(-j, x) for x in p)

    def cesaro_mean(self, f: LatticeElement) -> LatticeElement:
        """L_S f: the exact order limit of the Cesaro sums of S^k f.

        On a finite system this is the unweighted average of f over each
        tau-orbit (tau-invariance of the weights makes the weighted and
        unweighted orbit averages coincide). L_S is itself a conditional
        expectation, the one whose blocks are the orbits.
        """
        self._check_element(f)
        averages = []
        for cyc in self.cycles:
            averages.append(sum((f[i] for i in cyc), Fraction(0)) / len(cyc))
        return LatticeElement(
            tuple(averages[self.cycle_of[i]] for i in range(self.size))
        )

    def partial_cesaro_sum(self, f: LatticeElement, n: int) -> LatticeElement:
        """(1/n) sum_{k=0}^{n-1} S^k f, computed exactly.

        Exposed for the convergence check: at n = lcm of the cycle lengths
        this equals ``cesaro_mean`` exactly.
        """
        self._check_element(f)
        if n < 1:
            raise DomainError(f"partial Cesaro sum needs n >= 1, got {n}")
        totals = [Fraction(0)] * self.size
        current = list(range(self.size))  # current[i] = tau^k(i)
        for _ in range(n):
            for i in range(self.size):
                totals[i] += f[current[i]]
            current = [self.tau[c] for c in current]
        return LatticeElement(tuple(t / n for t in totals))

    def is_conditionally_ergodic(self) -> bool:
        """True iff L_S = T, i.e. every block is a single tau-orbit."""
        cycle_sets = {frozenset(c) for c in self.cycles}
        return all(block in cycle_sets for block in self.blocks)

    def ergodic_defect(self) -> tuple[Component, tuple[Component, ...]] | None:
        """A block that splits into several orbits, with its orbit pieces."""
        for block in self.blocks:
            pieces = sorted(
                {self.cycle_of[i] for i in block}
            )
            if len(pieces) > 1:
                return block, tuple(frozenset(self.cycles[c]) for c in pieces)
        return None

    def require_conditionally_ergodic(self) -> None:
        defect = self.ergodic_defect()
        if defect is not None:
            raise NotConditionallyErgodic(*defect)

    def orbit_refinement(self) -> "GroundSystem":
        """Same (Omega, mu, tau) with blocks replaced by the tau-orbits.

        The result is conditionally ergodic and its conditional expectation
        is the L_S of this system.
        """
        return GroundSystem(
            size=self.size,
            weights=self.weights,
            blocks=tuple(frozenset(c) for c in self.cycles),
            tau=self.tau,
        )

    # -- helpers --

    def _check_element(self, f: LatticeElement) -> None:
        if len(f) != self.size:
            raise DimensionError(
                f"element of length {len(f)} on ground set of size {self.size}"
            )

    def indicator(self, members: Iterable[int]) -> LatticeElement:
        return indicator(self.size, members)

    def restricted_to(self, v: Iterable[int]) -> tuple["GroundSystem", tuple[int, ...]]:
        """The subsystem on a tau-invariant set v, plus the index embedding.

        Returns (sub, embed) where sub lives on {0,...,|v|-1} and embed maps
        sub indices back to this system's indices. Blocks of the subsystem
        are the intersections of this system's blocks with v.
        """
        v = as_component(v)
        if self.component_image(1, v) != v:
            raise DomainError(f"{sorted(v)} is not tau-invariant")
        embed = tuple(sorted(v))
        local = {x: k for k, x in enumerate(embed)}
        blocks = tuple(
            frozenset(local[i] for i in block & v)
            for block in self.blocks
            if block & v
        )
        sub = GroundSystem(
            size=len(embed),
            weights=tuple(self.weights[x] for x in embed),
            blocks=blocks,
            tau=tuple(local[self.tau[x]] for x in embed),
        )
        return sub, embed

    # -- serialization --

    def as_dict(self) -> dict:
        return {
            "size": self.size,
            "weights": [format_rational(w) for w in self.weights],
            "blocks": [sorted(b) for b in self.blocks],
            "tau": list(self.tau),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def digest(self) -> str:
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


# -- validation --

_WELLFORMED = frozenset(
    ["size-positive", "weights-wellformed", "weights-strictly-positive",
     "blocks-partition", "tau-permutation"]
)
_STRUCTURAL = _WELLFORMED | frozenset(
    ["blocks-tau-invariant", "weights-tau-invariant"]
)


def validate_parts(size, weights, blocks, tau) -> ValidationReport:
    """Structural checks on already-parsed pieces; never raises."""
    checks: list[Check] = []

    ok_size = isinstance(size, int) and size >= 1
    checks.append(Check("size-positive", ok_size, None if ok_size else size))
    if not ok_size:
        return ValidationReport(tuple(checks))

    ok_w = (
        len(weights) == size
        and all(isinstance(w, Fraction) for w in weights)
    )
    checks.append(
        Check("weights-wellformed", ok_w,
              None if ok_w else f"expected {size} rationals, got {len(weights)}")
    )
    ok_pos = ok_w and all(w > 0 for w in weights)
    witness = None
    if ok_w and not ok_pos:
        witness = next(i for i, w in enumerate(weights) if w <= 0)
    checks.append(Check("weights-strictly-positive", ok_pos, witness))

    covered: set[int] = set()
    ok_blocks = len(blocks) > 0
    witness = None if ok_blocks else "no blocks"
    for block in blocks:
        if not block or not all(isinstance(i, int) and 0 <= i < size for i in block):
            ok_blocks, witness = False, sorted(block)
            break
        if covered & set(block):
            ok_blocks, witness = False, sorted(covered & set(block))
            break
        covered |= set(block)
    if ok_blocks and covered != set(range(size)):
        ok_blocks, witness = False, sorted(set(range(size)) - covered)
    checks.append(Check("blocks-partition", ok_blocks, witness))

    ok_tau = len(tau) == size and sorted(tau) == list(range(size))
    checks.append(
        Check("tau-permutation", ok_tau, None if ok_tau else list(tau))
    )

    wellformed = ok_w and ok_pos and ok_blocks and ok_tau
    if not wellformed:
        return ValidationReport(tuple(checks))

    witness = None
    for block in blocks:
        image = frozenset(tau[i] for i in block)
        if image != block:
            witness = sorted(block)
            break
    checks.append(Check("blocks-tau-invariant", witness is None, witness))

    witness = None
    for i in range(size):
        if weights[tau[i]] != weights[i]:
            witness = i
            break
    checks.append(Check("weights-tau-invariant", witness is None, witness))

    return ValidationReport(tuple(checks))


def validate_ceps(candidate: Mapping) -> ValidationReport:
    """Validate a raw system description; itemizes failures, never raises.

    Runs the structural checks (permutation, partition, positivity, block
    and weight invariance under tau) and, when the pieces are well formed,
    also checks the CEPS axioms extensionally on the N coordinate
    indicators: Te = e, Se = e and TSf = Tf. The structural and
    extensional verdicts for TS = T must agree; a mismatch is itemized as
    its own failed check.
    """
    checks: list[Check] = []
    try:
        size, weights, blocks, tau = _parse_parts(candidate)
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        return ValidationReport((Check("parseable", False, str(exc)),))

    report = validate_parts(size, weights, blocks, tau)
    checks.extend(report.checks)
    by_name = {c.name: c for c in checks}
    wellformed = all(n in by_name and by_name[n].passed for n in _WELLFORMED)
    if not wellformed:
        return ValidationReport(tuple(checks))

    sys = GroundSystem(size, weights, blocks, tau, check_axioms=False)
    e = sys.unit
    checks.append(Check("Te-equals-e", sys.expectation(e) == e))
    checks.append(Check("Se-equals-e", sys.koopman(1, e) == e))

    witness = None
    for m in range(size):
        chi = sys.indicator([m])
        if sys.expectation(sys.koopman(1, chi)) != sys.expectation(chi):
            witness = m
            break
    checks.append(Check("TS-equals-T-extensional", witness is None, witness))

    structural = (
        by_name["blocks-tau-invariant"].passed
        and by_name["weights-tau-invariant"].passed
    )
    checks.append(
        Check("TS-structural-extensional-agreement", structural == (witness is None))
    )
    return ValidationReport(tuple(checks))


def _parse_parts(candidate: Mapping):
    size = candidate["size"]
    if not isinstance(size, int) or isinstance(size, bool):
        raise DomainError(f"size must be an integer, got {size!r}")
    weights = tuple(as_rational(w) for w in candidate["weights"])
    blocks = tuple(frozenset(int(i) for i in block) for block in candidate["blocks"])
    tau = tuple(int(i) for i in candidate["tau"])
    return size, weights, blocks, tau


def from_raw(candidate: Mapping, force: bool = False) -> GroundSystem:
    """Build a GroundSystem from a raw description, validating it first.

    Invalid systems are refused with InvalidSystem unless ``force`` is set,
    which admits well-formed systems that violate the dynamical axioms
    (for counterexample demos). Malformed descriptions - a non-permutation
    tau, blocks that do not partition the ground set, nonpositive weights -
    are refused even under force, since the operators are undefined there.
    """
    report = validate_ceps(candidate)
    if not report.ok and not force:
        raise InvalidSystem(report)
    size, weights, blocks, tau = _parse_parts(candidate)
    return GroundSystem(size, weights, blocks, tau, check_axioms=not force)


def load(path, force: bool = False) -> GroundSystem:
    """Load a system file (JSON with rationals as "a/b" strings)."""
    with open(path, "r", encoding="utf-8") as fh:
        candidate = json.load(fh)
    return from_raw(candidate, force=force)


def save(sys: GroundSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(sys.to_json())
        fh.write("\n")
