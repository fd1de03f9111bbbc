"""Signed Pauli-string algebra on n qubits.

Qubit convention (package-wide): qubit q addresses bit q of the basis-state
index, so qubit 0 is the least significant bit. String labels read from
qubit 0 upward: "XYZ" means X on qubit 0, Y on qubit 1, Z on qubit 2.

Only Hermitian objects are representable: a PauliString carries a real sign
(+1 or -1) and multiplication refuses anticommuting operands, whose product
would pick up a factor of i. PauliSum holds real linear combinations for the
rare operator that is not a single string (e.g. a premeasurement-conjugated
observable with mixed commutation structure).
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import ResourceError

VALID_FACTORS = ("I", "X", "Y", "Z")

DENSE_MATRIX_MAX_QUBITS = 12

# Single-qubit products: f*g = (i ** power) * result.
_SINGLE_PRODUCT = {
    ("I", "I"): ("I", 0), ("I", "X"): ("X", 0), ("I", "Y"): ("Y", 0), ("I", "Z"): ("Z", 0),
    ("X", "I"): ("X", 0), ("X", "X"): ("I", 0), ("X", "Y"): ("Z", 1), ("X", "Z"): ("Y", 3),
    ("Y", "I"): ("Y", 0), ("Y", "X"): ("Z", 3), ("Y", "Y"): ("I", 0), ("Y", "Z"): ("X", 1),
    ("Z", "I"): ("Z", 0), ("Z", "X"): ("Y", 1), ("Z", "Y"): ("X", 3), ("Z", "Z"): ("I", 0),
}

_SINGLE_MATRIX = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _validated_factors(num_qubits: int, factors) -> tuple:
    factors = tuple(factors)
    if num_qubits < 1:
        raise ValueError(f"num_qubits must be >= 1, got {num_qubits}")
    if len(factors) != num_qubits:
        raise ValueError(
            f"expected {num_qubits} factors, got {len(factors)}")
    for f in factors:
        if f not in VALID_FACTORS:
            raise ValueError(f"invalid Pauli factor {f!r}; expected one of I, X, Y, Z")
    return factors


@dataclass(frozen=True)
class PauliString:
    """A signed tensor product of single-qubit Pauli factors.

    Invariants: sign is +1 or -1; every such string is Hermitian, unitary,
    and an involution (it squares to the identity).
    """

    num_qubits: int
    factors: tuple
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "factors", _validated_factors(self.num_qubits, self.factors))
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_label(cls, label: str, sign: int = 1) -> "PauliString":
        """Build from a factor string like "XIZ" (qubit 0 first)."""
        return cls(len(label), tuple(label), sign)

    @classmethod
    def from_map(cls, num_qubits: int, factor_map: Mapping[int, str], sign: int = 1) -> "PauliString":
        """Build from {qubit: factor}; unlisted qubits get identity."""
        factors = ["I"] * num_qubits
        for qubit, f in factor_map.items():
            if not 0 <= qubit < num_qubits:
                raise ValueError(f"qubit {qubit} out of range for {num_qubits} qubits")
            factors[qubit] = f
        return cls(num_qubits, tuple(factors), sign)

    @classmethod
    def single(cls, num_qubits: int, qubit: int, factor: str, sign: int = 1) -> "PauliString":
        return cls.from_map(num_qubits, {qubit: factor}, sign)

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliString":
        return cls(num_qubits, ("I",) * num_qubits)

    # -- structure ---------------------------------------------------------

    def label(self) -> str:
        return ("+" if self.sign > 0 else "-") + "".join(self.factors)

    def support(self) -> tuple:
        """Qubits acted on non-trivially, ascending."""
        return tuple(q for q, f in enumerate(self.factors) if f != "I")

    def weight(self) -> int:
        return len(self.support())

    def is_identity(self) -> bool:
        return all(f == "I" for f in self.factors)

    def is_involution(self) -> bool:
        return True

    def with_sign(self, sign: int) -> "PauliString":
        return PauliString(self.num_qubits, self.factors, sign)

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Operator product. Defined only for commuting operands; the
        product of anticommuting strings is anti-Hermitian and is refused."""
        if not isinstance(other, PauliString):
            return NotImplemented
        power, factors = _phased_product(self, other)
        if power % 2 == 1:
            raise ValueError(
                "product of anticommuting Pauli strings is not Hermitian; "
                f"refusing {self.label()} * {other.label()}")
        sign = self.sign * other.sign * (1 if power % 4 == 0 else -1)
        return PauliString(self.num_qubits, factors, sign)

    def apply_to_array(self, amplitudes: np.ndarray) -> np.ndarray:
        """Return P @ amplitudes without building a dense matrix.

        Vectorized over the index register: the X/Y mask determines the bit
        flips, the Y/Z mask determines the (-1) phases, and the Y count fixes
        a global power of i.
        """
        n = self.num_qubits
        if amplitudes.shape != (1 << n,):
            raise ValueError(
                f"amplitude array of length {amplitudes.shape} does not match {n} qubits")
        flip_mask = 0
        phase_mask = 0
        y_count = 0
        for q, f in enumerate(self.factors):
            if f in ("X", "Y"):
                flip_mask |= 1 << q
            if f in ("Y", "Z"):
                phase_mask |= 1 << q
            if f == "Y":
                y_count += 1
        idx = np.arange(1 << n, dtype=np.uint32)
        signs = _masked_parity_signs(idx, phase_mask)
        global_phase = self.sign * (1j ** (y_count % 4))
        out = np.empty_like(amplitudes)
        out[idx ^ np.uint32(flip_mask)] = (global_phase * signs) * amplitudes
        return out

    def dense_matrix(self) -> np.ndarray:
        """Explicit 2^n x 2^n matrix; guarded to small n."""
        if self.num_qubits > DENSE_MATRIX_MAX_QUBITS:
            raise ResourceError(
                f"dense matrix for {self.num_qubits} qubits exceeds the "
                f"{DENSE_MATRIX_MAX_QUBITS}-qubit guard")
        out = np.array([[self.sign]], dtype=complex)
        # Tensor order: qubit n-1 varies slowest, matching the index convention.
        for f in reversed(self.factors):
            out = np.kron(out, _SINGLE_MATRIX[f])
        return out

    def __str__(self) -> str:
        return self.label()


def _masked_parity_signs(idx: np.ndarray, mask: int) -> np.ndarray:
    """(-1) ** popcount(idx & mask), vectorized via parity folding."""
    v = idx & np.uint32(mask)
    v ^= v >> np.uint32(16)
    v ^= v >> np.uint32(8)
    v ^= v >> np.uint32(4)
    v ^= v >> np.uint32(2)
    v ^= v >> np.uint32(1)
    return 1.0 - 2.0 * (v & np.uint32(1))


def _phased_product(p: PauliString, q: PauliString) -> tuple:
    """Factor-wise product, ignoring the operand signs.

    Returns (power, factors) with p.factors * q.factors = i**power * factors.
    """
    if p.num_qubits != q.num_qubits:
        raise ValueError(
            f"qubit counts differ: {p.num_qubits} vs {q.num_qubits}")
    power = 0
    factors = []
    for f, g in zip(p.factors, q.factors):
        h, k = _SINGLE_PRODUCT[(f, g)]
        power += k
        factors.append(h)
    return power % 4, tuple(factors)


class PauliSum:
    """A real linear combination of Pauli strings on a fixed register.

    Canonical form: string signs are folded into the coefficients, terms are
    merged by factor tuple, zero terms dropped, and the survivors sorted by
    factor tuple. Two sums built from the same operator therefore compare
    equal term-by-term.
    """

    __slots__ = ("num_qubits", "terms", "_involution_cache")

    def __init__(self, terms: Iterable):
        collected = {}
        num_qubits = None
        for coeff, string in terms:
            if num_qubits is None:
                num_qubits = string.num_qubits
            elif string.num_qubits != num_qubits:
                raise ValueError("all terms must act on the same register")
            key = string.factors
            collected[key] = collected.get(key, 0.0) + float(coeff) * string.sign
        if num_qubits is None:
            raise ValueError("a PauliSum needs at least one term")
        kept = tuple(
            (c, PauliString(num_qubits, f))
            for f, c in sorted(collected.items())
            if abs(c) > 1e-15)
        if not kept:
            # The zero operator: keep one explicit zero-identity term so the
            # object stays well-formed. It is not an involution.
            kept = ((0.0, PauliString.identity(num_qubits)),)
        self.num_qubits = num_qubits
        self.terms = kept
        self._involution_cache = None

    def support(self) -> tuple:
        qubits = set()
        for _, s in self.terms:
            qubits.update(s.support())
        return tuple(sorted(qubits))

    def is_involution(self) -> bool:
        """True iff the sum squares to the identity, checked algebraically."""
        if self._involution_cache is None:
            square = _collect_product(self.terms, self.terms, self.num_qubits)
            identity = ("I",) * self.num_qubits
            ok = abs(square.pop(identity, 0.0) - 1.0) <= 1e-12
            ok = ok and all(abs(c) <= 1e-12 for c in square.values())
            self._involution_cache = ok
        return self._involution_cache

    def apply_to_array(self, amplitudes: np.ndarray) -> np.ndarray:
        out = np.zeros_like(amplitudes)
        for coeff, string in self.terms:
            out += coeff * string.apply_to_array(amplitudes)
        return out

    def dense_matrix(self) -> np.ndarray:
        if self.num_qubits > DENSE_MATRIX_MAX_QUBITS:
            raise ResourceError(
                f"dense matrix for {self.num_qubits} qubits exceeds the "
                f"{DENSE_MATRIX_MAX_QUBITS}-qubit guard")
        out = np.zeros((1 << self.num_qubits, 1 << self.num_qubits), dtype=complex)
        for coeff, string in self.terms:
            out += coeff * string.dense_matrix()
        return out

    def label(self) -> str:
        parts = []
        for coeff, string in self.terms:
            parts.append(f"{coeff:+g}*{''.join(string.factors)}")
        return " ".join(parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        if self.num_qubits != other.num_qubits or len(self.terms) != len(other.terms):
            return False
        return all(
            a[1].factors == b[1].factors and abs(a[0] - b[0]) <= 1e-12
            for a, b in zip(self.terms, other.terms))

    def __str__(self) -> str:
        return self.label()


PauliOperator = Union[PauliString, PauliSum]


def _collect_product(left_terms, right_terms, num_qubits) -> dict:
    """Real-coefficient collection of (sum_left) @ (sum_right).

    Coefficients are tracked as complex during collection; Hermitian inputs
    with real coefficients always collapse to real totals.
    """
    acc = {}
    for c1, s1 in left_terms:
        for c2, s2 in right_terms:
            power, factors = _phased_product(s1, s2)
            phase = (1j ** power) * s1.sign * s2.sign
            acc[factors] = acc.get(factors, 0.0) + c1 * c2 * phase
    return acc


def _as_terms(op: PauliOperator):
    if isinstance(op, PauliString):
        return ((1.0, op),)
    return op.terms


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    """True iff [p, q] = 0.

    For two strings this is the parity rule: they anticommute iff an odd
    number of sites holds differing non-identity factors. Sums are handled
    by collecting the full commutator and checking every coefficient.
    """
    if isinstance(p, PauliString) and isinstance(q, PauliString):
        if p.num_qubits != q.num_qubits:
            raise ValueError(
                f"qubit counts differ: {p.num_qubits} vs {q.num_qubits}")
        clashes = 0
        for f, g in zip(p.factors, q.factors):
            if f != "I" and g != "I" and f != g:
                clashes += 1
        return clashes % 2 == 0
    left = _as_terms(p)
    right = _as_terms(q)
    n = left[0][1].num_qubits
    if right[0][1].num_qubits != n:
        raise ValueError("qubit counts differ")
    pq = _collect_product(left, right, n)
    qp = _collect_product(right, left, n)
    keys = set(pq) | set(qp)
    return all(abs(pq.get(k, 0.0) - qp.get(k, 0.0)) <= 1e-12 for k in keys)
