"""Agent memories as qubits: premeasurement, reversal, lifting, and the
ledger of relative facts.

A premeasurement entangles an observable's eigenvalue with a fresh memory
qubit instead of collapsing it: U = P_plus x I_m + P_minus x X_m, with
P_pm = (1 +/- O)/2. U is Hermitian, unitary, and self-inverse, so the same
operation both writes and unwrites a record. After premeasuring onto a
cleared memory, O x Z_m has expectation exactly +1: the record tracks the
observable perfectly until some later operation fails to commute with it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ProtocolError
from .pauli import PauliOperator, PauliString, PauliSum, commutes
from .statevector import PHYS_TOL, MeasurementOutcome, StateVector, measure

FACT_STATUSES = ("current", "disturbed", "erased")


@dataclass(frozen=True)
class Observer:
    """An agent and the memory qubits it owns."""

    name: str
    memory_qubits: tuple

    def __post_init__(self):
        object.__setattr__(self, "memory_qubits", tuple(self.memory_qubits))
        if len(set(self.memory_qubits)) != len(self.memory_qubits):
            raise ValueError(f"duplicate memory qubits: {self.memory_qubits}")


@dataclass(frozen=True)
class Premeasurement:
    """A unitary record-writing step: `observable` is copied onto `memory`.

    The observable must not act on its own memory qubit, and must act
    non-trivially somewhere.
    """

    observable: PauliString
    memory: int
    owner: str

    def __post_init__(self):
        if not isinstance(self.observable, PauliString):
            raise ValueError("premeasured observable must be a PauliString")
        if self.observable.is_identity():
            raise ValueError("premeasured observable must act non-trivially")
        if not 0 <= self.memory < self.observable.num_qubits:
            raise ValueError(f"memory qubit {self.memory} out of range")
        if self.memory in self.observable.support():
            raise ValueError(
                f"memory qubit {self.memory} lies inside the observable's support")


def _premeasure_array(amps: np.ndarray, pm: Premeasurement) -> np.ndarray:
    """(P_plus + X_m P_minus) applied to raw amplitudes."""
    o_amps = pm.observable.apply_to_array(amps)
    plus = (amps + o_amps) / 2.0
    minus = (amps - o_amps) / 2.0
    idx = np.arange(amps.size, dtype=np.uint32)
    out = plus
    out[idx ^ np.uint32(1 << pm.memory)] += minus
    return out


def premeasure(state: StateVector, pm: Premeasurement) -> StateVector:
    """Write the record: requires the memory qubit to read 0 with certainty."""
    if pm.observable.num_qubits != state.num_qubits:
        raise ValueError(
            f"premeasurement on {pm.observable.num_qubits} qubits, "
            f"state on {state.num_qubits}")
    if state.probability_of_bit(pm.memory) > PHYS_TOL:
        raise ProtocolError(
            f"memory qubit {pm.memory} is not in |0>; "
            "premeasurement needs a cleared memory")
    return StateVector(state.num_qubits, _premeasure_array(state.amplitudes, pm))


def reverse(state: StateVector, pm: Premeasurement) -> StateVector:
    """Undo a premeasurement. The unitary is self-inverse, so this is the
    same operation without the cleared-memory precondition."""
    if pm.observable.num_qubits != state.num_qubits:
        raise ValueError(
            f"premeasurement on {pm.observable.num_qubits} qubits, "
            f"state on {state.num_qubits}")
    return StateVector(state.num_qubits, _premeasure_array(state.amplitudes, pm))


def record_observable(pm: Premeasurement) -> PauliString:
    """Z on the memory qubit: reading it recovers the premeasured outcome."""
    return PauliString.single(pm.observable.num_qubits, pm.memory, "Z")


def lift(obs: PauliOperator, pm: Premeasurement) -> PauliOperator:
    """Conjugate `obs` through the premeasurement unitary: U obs U.

    This is how a later agent addresses a pre-record observable after the
    record exists. A term commuting with the premeasured observable is
    unchanged; an anticommuting term picks up X on the memory qubit. Strings
    map to strings; sums map to sums. `obs` must not touch the memory qubit
    and must square to the identity.
    """
    if obs.num_qubits != pm.observable.num_qubits:
        raise ValueError(
            f"observable on {obs.num_qubits} qubits, "
            f"premeasurement on {pm.observable.num_qubits}")
    if pm.memory in obs.support():
        raise ValueError(
            f"cannot lift an observable that already acts on memory qubit {pm.memory}")
    if not obs.is_involution():
        raise ValueError("lift requires an observable that squares to the identity")

    def lift_string(s: PauliString) -> PauliString:
        if commutes(s, pm.observable):
            return s
        factors = list(s.factors)
        factors[pm.memory] = "X"
        return PauliString(s.num_qubits, tuple(factors), s.sign)

    if isinstance(obs, PauliString):
        return lift_string(obs)
    return PauliSum((c, lift_string(s)) for c, s in obs.terms)


@dataclass
class RelativeFact:
    """One recorded outcome, relative to the owner that premeasured it.

    `value` is None until a projective readout of the memory fixes it.
    `status` tracks whether the record still reflects the original
    premeasurement: 'current' until an operation that fails to commute with
    the record observable runs ('disturbed'), or the premeasurement is
    reversed ('erased').
    """

    owner: str
    label: str
    qubit: int
    stage: str
    value: Optional[int] = None
    status: str = "current"

    def __post_init__(self):
        if self.status not in FACT_STATUSES:
            raise ValueError(f"unknown fact status {self.status!r}")
        if self.value not in (None, 1, -1):
            raise ValueError(f"fact value must be +1, -1 or None, got {self.value!r}")

    def as_dict(self) -> dict:
        return {
            "owner": self.owner,
            "label": self.label,
            "qubit": self.qubit,
            "stage": self.stage,
            "value": self.value,
            "status": self.status,
        }


class Ledger:
    """Ordered collection of relative facts with disturbance tracking."""

    def __init__(self):
        self.facts = []

    def add(self, owner: str, label: str, qubit: int, stage: str) -> RelativeFact:
        if any(f.label == label for f in self.facts):
            raise ValueError(f"duplicate fact label {label!r}")
        fact = RelativeFact(owner=owner, label=label, qubit=qubit, stage=stage)
        self.facts.append(fact)
        return fact

    def get(self, label: str) -> RelativeFact:
        for f in self.facts:
            if f.label == label:
                return f
        raise KeyError(label)

    def current(self) -> list:
        return [f for f in self.facts if f.status == "current"]

    def mark_disturbed(self, applied: PauliOperator, num_qubits: int) -> list:
        """Downgrade every current fact whose record observable fails to
        commute with the observable being measured or premeasured. Returns
        the facts that changed status."""
        changed = []
        for fact in self.facts:
            if fact.status != "current":
                continue
            record = PauliString.single(num_qubits, fact.qubit, "Z")
            if not commutes(record, applied):
                fact.status = "disturbed"
                changed.append(fact)
        return changed

    def mark_erased(self, label: str) -> RelativeFact:
        fact = self.get(label)
        fact.status = "erased"
        fact.value = None
        return fact

    def snapshot(self) -> tuple:
        """Immutable copies of all facts, for stage records."""
        return tuple(replace(f) for f in self.facts)


@dataclass(frozen=True)
class StageSnapshot:
    """The full state and ledger contents at one protocol stage."""

    index: int
    label: str
    state: StateVector
    facts: tuple


def readout(state: StateVector, qubit: int, rng: np.random.Generator) -> MeasurementOutcome:
    """Projective Z readout of one qubit. Memory convention: |0> carries
    outcome +1, |1> carries -1, so the returned value is the record value."""
    return measure(state, PauliString.single(state.num_qubits, qubit, "Z"), rng)
