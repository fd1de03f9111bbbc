"""Parity analysis of +/-1 product constraints.

A constraint is a product of +/-1 variables pinned to +1 or -1. Writing
each variable as v = (-1)^x turns a product constraint into a GF(2) linear
equation: prod_{j in S} v_j = r  <=>  sum_{j in S} x_j = (0 if r=+1 else 1)
mod 2. Satisfiability, witnesses, solution counts, and unsatisfiability
certificates (a subset of constraints whose formal product is an empty
left-hand side equal to -1) all come out of Gauss-Jordan elimination over
GF(2), with rows carried as Python ints used as bit masks.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import ConstraintParseError, ResourceError

SOLVE_MAX_VARIABLES = 64
ENUMERATE_MAX_VARIABLES = 20

_VARIABLE_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class ParityConstraint:
    """A product constraint prod(variables) = rhs, reduced mod 2: a variable
    listed an even number of times squares away to 1."""

    variables: frozenset
    rhs: int

    def __post_init__(self):
        if self.rhs not in (1, -1):
            raise ValueError(f"rhs must be +1 or -1, got {self.rhs!r}")
        for v in self.variables:
            if not _VARIABLE_RE.match(v):
                raise ValueError(f"invalid variable name {v!r}")
        object.__setattr__(self, "variables", frozenset(self.variables))

    @classmethod
    def of(cls, variables: Iterable[str], rhs: int) -> "ParityConstraint":
        """Build from a variable list with repeats, cancelling pairs."""
        odd = set()
        for v in variables:
            odd.symmetric_difference_update({v})
        return cls(frozenset(odd), rhs)

    def evaluate(self, assignment: Mapping[str, int]) -> bool:
        product = 1
        for v in self.variables:
            value = assignment[v]
            if value not in (1, -1):
                raise ValueError(f"assignment value for {v!r} must be +/-1")
            product *= value
        return product == self.rhs

    def __str__(self) -> str:
        lhs = "*".join(sorted(self.variables)) if self.variables else "1"
        rhs = "+1" if self.rhs == 1 else "-1"
        return f"{lhs} = {rhs}"


@dataclass(frozen=True)
class ConstraintSystem:
    """An ordered list of parity constraints over an ordered variable
    universe (bit j of a row mask = universe[j])."""

    constraints: tuple
    universe: tuple

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "universe", tuple(self.universe))
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("universe contains duplicate variables")
        known = set(self.universe)
        for c in self.constraints:
            missing = c.variables - known
            if missing:
                raise ValueError(
                    f"constraint {c} uses variables outside the universe: "
                    f"{sorted(missing)}")

    @classmethod
    def from_constraints(cls, constraints: Iterable[ParityConstraint],
                         universe: Optional[Sequence[str]] = None) -> "ConstraintSystem":
        constraints = tuple(constraints)
        if universe is None:
            seen = []
            for c in constraints:
                for v in sorted(c.variables):
                    if v not in seen:
                        seen.append(v)
            universe = seen
        return cls(constraints, tuple(universe))

    @property
    def num_variables(self) -> int:
        return len(self.universe)

    def check(self, assignment: Mapping[str, int]) -> list:
        return [c.evaluate(assignment) for c in self.constraints]

    def _row(self, constraint: ParityConstraint) -> tuple:
        mask = 0
        for v in constraint.variables:
            mask |= 1 << self.universe.index(v)
        return mask, 0 if constraint.rhs == 1 else 1


@dataclass(frozen=True)
class SolveResult:
    """Outcome of GF(2) elimination.

    Exactly one of witness / certificate is set: a satisfying assignment
    (free variables fixed to +1), or the 1-based indices of a constraint
    subset whose product reduces to the contradiction 1 = -1. num_solutions
    is the exact count 2^(num_variables - rank) when satisfiable, else 0.
    """

    satisfiable: bool
    witness: Optional[dict]
    certificate: Optional[tuple]
    rank: int
    num_solutions: int


def satisfiable(system: ConstraintSystem) -> SolveResult:
    """Gauss-Jordan over GF(2) with row-combination tracking."""
    n = system.num_variables
    if n > SOLVE_MAX_VARIABLES:
        raise ResourceError(
            f"{n} variables exceeds the {SOLVE_MAX_VARIABLES}-variable solve guard")
    rows = []        # reduced rows (mask, bit, combo), pivots eliminated everywhere
    pivot_cols = []
    for i, constraint in enumerate(system.constraints):
        mask, bit = system._row(constraint)
        combo = 1 << i
        for (pmask, pbit, pcombo), pcol in zip(rows, pivot_cols):
            if (mask >> pcol) & 1:
                mask ^= pmask
                bit ^= pbit
                combo ^= pcombo
        if mask == 0:
            if bit == 1:
                certificate = tuple(
                    j + 1 for j in range(len(system.constraints)) if (combo >> j) & 1)
                return SolveResult(
                    satisfiable=False, witness=None, certificate=certificate,
                    rank=len(rows), num_solutions=0)
            continue  # redundant constraint
        col = (mask & -mask).bit_length() - 1
        for j in range(len(rows)):
            if (rows[j][0] >> col) & 1:
                rows[j] = (rows[j][0] ^ mask, rows[j][1] ^ bit, rows[j][2] ^ combo)
        rows.append((mask, bit, combo))
        pivot_cols.append(col)
    # Satisfiable: with free variables at +1 (x=0), each pivot is forced.
    witness = {v: 1 for v in system.universe}
    for (mask, bit, combo), col in zip(rows, pivot_cols):
        witness[system.universe[col]] = 1 if bit == 0 else -1
    rank = len(rows)
    return SolveResult(
        satisfiable=True, witness=witness, certificate=None,
        rank=rank, num_solutions=2 ** (n - rank))


@dataclass(frozen=True)
class EnumerationResult:
    count: int
    tested: int
    assignments: Optional[tuple]


def enumerate_assignments(system: ConstraintSystem,
                          return_assignments: bool = False) -> EnumerationResult:
    """Exhaustively test all 2^n assignments (guarded to n <= 20)."""
    n = system.num_variables
    if n > ENUMERATE_MAX_VARIABLES:
        raise ResourceError(
            f"{n} variables exceeds the {ENUMERATE_MAX_VARIABLES}-variable "
            "enumeration guard")
    idx = np.arange(1 << n, dtype=np.uint32)
    ok = np.ones(1 << n, dtype=bool)
    for constraint in system.constraints:
        mask, bit = system._row(constraint)
        v = idx & np.uint32(mask)
        v ^= v >> np.uint32(16)
        v ^= v >> np.uint32(8)
        v ^= v >> np.uint32(4)
        v ^= v >> np.uint32(2)
        v ^= v >> np.uint32(1)
        ok &= (v & np.uint32(1)) == np.uint32(bit)
    count = int(np.count_nonzero(ok))
    assignments = None
    if return_assignments:
        rows = []
        for i in idx[ok]:
            rows.append({
                v: (-1 if (int(i) >> j) & 1 else 1)
                for j, v in enumerate(system.universe)})
        assignments = tuple(rows)
    return EnumerationResult(count=count, tested=1 << n, assignments=assignments)


@dataclass(frozen=True)
class ProductIdentity:
    """The formal product of a subset of constraints: surviving variables
    (those appearing an odd number of times) and the combined sign. If no
    variable survives and the sign is -1, the subset is contradictory."""

    subset: tuple
    residual_variables: tuple
    rhs: int
    is_contradiction: bool


def product_identity(system: ConstraintSystem,
                     subset: Optional[Sequence[int]] = None) -> ProductIdentity:
    """Multiply the chosen constraints (1-based indices; default all)."""
    if subset is None:
        subset = tuple(range(1, len(system.constraints) + 1))
    subset = tuple(subset)
    for i in subset:
        if not 1 <= i <= len(system.constraints):
            raise ValueError(f"constraint index {i} out of range")
    odd = set()
    rhs = 1
    for i in subset:
        c = system.constraints[i - 1]
        odd.symmetric_difference_update(c.variables)
        rhs *= c.rhs
    residual = tuple(sorted(odd))
    return ProductIdentity(
        subset=subset, residual_variables=residual, rhs=rhs,
        is_contradiction=(not residual) and rhs == -1)


def parse_constraints(text: str,
                      universe: Optional[Sequence[str]] = None) -> ConstraintSystem:
    """Parse constraint lines of the form `B1*A2*A3 = -1`.

    Blank lines are skipped; `#` starts a comment that runs to end of line.
    Each remaining line must be a `*`-separated product of variable names,
    an `=`, and +1 or -1. Raises ConstraintParseError with the 1-based line
    number on malformed input.
    """
    constraints = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.count("=") != 1:
            raise ConstraintParseError(
                line_no, f"expected exactly one '=' in {raw.strip()!r}")
        lhs, rhs_text = (part.strip() for part in line.split("="))
        rhs_text = rhs_text.replace(" ", "")
        if rhs_text in ("1", "+1"):
            rhs = 1
        elif rhs_text == "-1":
            rhs = -1
        else:
            raise ConstraintParseError(
                line_no, f"right-hand side must be +1 or -1, got {rhs_text!r}")
        if not lhs:
            raise ConstraintParseError(line_no, "empty left-hand side")
        names = [token.strip() for token in lhs.split("*")]
        for name in names:
            if not _VARIABLE_RE.match(name):
                raise ConstraintParseError(
                    line_no, f"invalid variable name {name!r}")
        constraints.append(ParityConstraint.of(names, rhs))
    return ConstraintSystem.from_constraints(constraints, universe)


def analyze(system: ConstraintSystem) -> dict:
    """Full satisfiability analysis with internal cross-checks.

    Runs elimination, the all-constraints product identity, and (when the
    universe is small enough) exhaustive enumeration, then verifies that
    the three agree: a witness must satisfy every constraint, a certificate
    must multiply to the contradiction, and the enumeration count must
    equal the solver's solution count.
    """
    solve = satisfiable(system)
    identity = product_identity(system)
    enumeration = None
    if system.num_variables <= ENUMERATE_MAX_VARIABLES:
        enumeration = enumerate_assignments(system)
    witness_verified = None
    certificate_verified = None
    if solve.satisfiable:
        witness_verified = all(system.check(solve.witness))
    else:
        cert_identity = product_identity(system, solve.certificate)
        certificate_verified = cert_identity.is_contradiction
    agreement = None
    if enumeration is not None:
        agreement = (enumeration.count > 0) == solve.satisfiable
        if solve.satisfiable:
            agreement = agreement and enumeration.count == solve.num_solutions
    consistent = all(
        flag is not False
        for flag in (witness_verified, certificate_verified, agreement))
    return {
        "system": {
            "constraints": [str(c) for c in system.constraints],
            "universe": list(system.universe),
        },
        "solve": {
            "satisfiable": solve.satisfiable,
            "witness": dict(sorted(solve.witness.items())) if solve.witness else None,
            "certificate": list(solve.certificate) if solve.certificate else None,
            "rank": solve.rank,
            "num_solutions": solve.num_solutions,
        },
        "enumeration": None if enumeration is None else {
            "count": enumeration.count,
            "tested": enumeration.tested,
        },
        "product_identity": {
            "subset": list(identity.subset),
            "residual_variables": list(identity.residual_variables),
            "rhs": identity.rhs,
            "is_contradiction": identity.is_contradiction,
        },
        "consistency": {
            "witness_verified": witness_verified,
            "certificate_verified": certificate_verified,
            "solver_enumeration_agree": agreement,
        },
        "consistent": consistent,
        "timing": {
            "constraints": len(system.constraints),
            "variables": system.num_variables,
            "assignments_tested": enumeration.tested if enumeration else 0,
        },
    }


def ghz_record_system() -> ConstraintSystem:
    """The four record-product constraints realized by the simulated
    protocols: one all-direct product pinned to +1 and three mixed products
    pinned to -1. Their full product is the contradiction 1 = -1."""
    constraints = (
        ParityConstraint.of(("B1", "B2", "B3"), 1),
        ParityConstraint.of(("B1", "A2", "A3"), -1),
        ParityConstraint.of(("A1", "B2", "A3"), -1),
        ParityConstraint.of(("A1", "A2", "B3"), -1),
    )
    universe = ("A1", "A2", "A3", "B1", "B2", "B3")
    return ConstraintSystem(constraints, universe)


BUILTIN_SYSTEMS = {"ghz": ghz_record_system}
