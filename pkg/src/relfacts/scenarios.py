"""Protocol flows on a 9-qubit register: three shared-state qubits, three
memory qubits for the first agent team (Alice's friends), three for the
second (Bob's team).

Register layout (little-endian): system qubits 0..2, Alice memories 3..5
(records A1..A3), Bob memories 6..8 (records B1..B3).

The simulated protocols certify four product constraints over direct
outcomes B_k (an X readout of system qubit k, lifted through Alice's record
when that record still exists) and Alice-record readouts A_k (Z on memory
3+k-1):

    B1*B2*B3 = +1    B1*A2*A3 = -1    A1*B2*A3 = -1    A1*A2*B3 = -1

Two flows realize them. The single-experiment flow keeps Alice's records
and lets Bob address lifted observables; the four-experiment flow reverses
the relevant records and lets Bob measure directly. Both reproduce the same
four expectations, while the parity module shows no fixed +/-1 assignment
to {A_k, B_k} satisfies all four at once.

Randomness: every sampled draw comes from rng.child_generator(master_seed,
stream, scope), with streams STREAM_CERTIFY (scope = (constraint_id,
kind)), STREAM_SAMPLE (scope = target index), STREAM_CPL (scope = variant).
Shots inside one scope consume the stream sequentially, so identical
(seed, flags) reproduce identical reports byte for byte.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations
from math import sqrt
from typing import Optional, Sequence

import numpy as np

from .errors import InternalConsistencyError, ProtocolError
from .observers import (
    Ledger,
    Premeasurement,
    StageSnapshot,
    _premeasure_array,
    lift,
    premeasure,
    readout,
    record_observable,
    reverse,
)
from .pauli import PauliOperator, PauliString, commutes
from .rng import STREAM_CERTIFY, STREAM_CPL, STREAM_SAMPLE, child_generator
from .statevector import (
    ALG_TOL,
    PHYS_TOL,
    StateVector,
    expectation,
    fidelity,
    measure,
    prepare_ghz,
    reduced_density,
    zero_state,
)

NUM_QUBITS = 9
SYSTEM_QUBITS = (0, 1, 2)
ALICE_MEMORY = (3, 4, 5)
BOB_MEMORY = (6, 7, 8)

DEFAULT_TOLERANCE = 1e-9

BOB_MODES = ("lmz-lifted", "cdr-reversal")

# Constraint table: per pair k the slot is "B" (direct outcome) or "A"
# (record readout). Products of the chosen observables carry these signs.
CONSTRAINT_PATTERNS = (
    ("B", "B", "B"),
    ("B", "A", "A"),
    ("A", "B", "A"),
    ("A", "A", "B"),
)
CONSTRAINT_SIGNS = (1, -1, -1, -1)

_KIND_CODES = {"operator": 0, "record": 1}


@dataclass(frozen=True)
class ScenarioConfig:
    """Run parameters shared by both flows.

    experiment_id selects one of the four reversal experiments and must be
    present exactly when bob_mode is "cdr-reversal". shots = 0 disables
    sampling, leaving only exact Born-rule certification.
    """

    bob_mode: str = "lmz-lifted"
    experiment_id: Optional[int] = None
    shots: int = 0
    master_seed: int = 0
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.bob_mode not in BOB_MODES:
            raise ValueError(
                f"bob_mode must be one of {BOB_MODES}, got {self.bob_mode!r}")
        needs_experiment = self.bob_mode == "cdr-reversal"
        if needs_experiment and self.experiment_id not in (1, 2, 3, 4):
            raise ValueError(
                "cdr-reversal mode needs experiment_id in 1..4, "
                f"got {self.experiment_id!r}")
        if not needs_experiment and self.experiment_id is not None:
            raise ValueError("experiment_id is only meaningful in cdr-reversal mode")
        if self.shots < 0:
            raise ValueError(f"shots must be >= 0, got {self.shots}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be in [0, 2^64), got {self.master_seed}")

    def as_dict(self) -> dict:
        return {
            "bob_mode": self.bob_mode,
            "experiment_id": self.experiment_id,
            "shots": self.shots,
            "master_seed": self.master_seed,
            "tolerance": self.tolerance,
        }


@dataclass
class OperationCounters:
    """Deterministic effort accounting; stands in for wall-clock timing so
    that reports stay byte-identical across machines."""

    unitary_applications: int = 0
    projective_measurements: int = 0
    exact_expectations: int = 0
    sampled_shots: int = 0

    def as_dict(self) -> dict:
        return {
            "unitary_applications": self.unitary_applications,
            "projective_measurements": self.projective_measurements,
            "exact_expectations": self.exact_expectations,
            "sampled_shots": self.sampled_shots,
        }


@dataclass(frozen=True)
class ConstraintResult:
    """One certification of a product constraint.

    kind "operator": simultaneous eigenvalue certification of commuting
    observables on one state. kind "record": the same product read off
    coexisting memory records. Per-shot evidence (when shots > 0) counts
    sampled products against the expected sign.
    """

    constraint_id: int
    kind: str
    labels: tuple
    stage: str
    expected: int
    expectation: float
    tolerance: float
    shots: int
    products_plus: int
    products_minus: int
    violations: int
    certified: bool

    def as_dict(self) -> dict:
        return {
            "constraint_id": self.constraint_id,
            "kind": self.kind,
            "labels": list(self.labels),
            "stage": self.stage,
            "expected": self.expected,
            "expectation": self.expectation,
            "tolerance": self.tolerance,
            "shots": self.shots,
            "products_plus": self.products_plus,
            "products_minus": self.products_minus,
            "violations": self.violations,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class MarginalSummary:
    label: str
    plus_count: int
    frequency: float
    within_band: bool

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "plus_count": self.plus_count,
            "frequency": self.frequency,
            "within_band": self.within_band,
        }


@dataclass(frozen=True)
class SampleTally:
    """Per-shot readout statistics for one family of runs: joint outcome
    counts, product violations, and 5-sigma marginal checks (every record
    here has an exactly unbiased marginal)."""

    target: str
    constraint_id: int
    stage: str
    record_labels: tuple
    expected_product: int
    shots: int
    outcome_counts: dict
    violations: int
    marginals: tuple
    all_products_expected: bool

    def outcome_counts_product(self, value: int) -> int:
        """Number of shots whose joint outcome multiplies to `value`."""
        total = 0
        for key, count in self.outcome_counts.items():
            product = 1
            for ch in key:
                product *= 1 if ch == "+" else -1
            if product == value:
                total += count
        return total

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "constraint_id": self.constraint_id,
            "stage": self.stage,
            "record_labels": list(self.record_labels),
            "expected_product": self.expected_product,
            "shots": self.shots,
            "outcome_counts": dict(sorted(self.outcome_counts.items())),
            "violations": self.violations,
            "marginals": [m.as_dict() for m in self.marginals],
            "all_products_expected": self.all_products_expected,
        }


@dataclass(frozen=True)
class CplResult:
    """Two-time agreement between a projective readout of the system
    observable (value v) and a later readout of the matching record (value
    w). Intact protocol: E[v*w] = 1 exactly. With an intervening operation
    that fails to commute with the record, the agreement collapses, even
    though the same-time product observable keeps expectation +1 - the
    premise that a recorded outcome stays addressable is what breaks."""

    system_label: str
    record_label: str
    record_qubit: int
    disturbance_label: str
    shots: int
    intact_expectation: float
    intact_matches: int
    disturbed_expectation: float
    disturbed_matches: int
    operator_product_after: float
    premise_certified: bool
    violation_demonstrated: bool

    def as_dict(self) -> dict:
        return {
            "system_label": self.system_label,
            "record_label": self.record_label,
            "record_qubit": self.record_qubit,
            "disturbance_label": self.disturbance_label,
            "shots": self.shots,
            "intact_expectation": self.intact_expectation,
            "intact_matches": self.intact_matches,
            "disturbed_expectation": self.disturbed_expectation,
            "disturbed_matches": self.disturbed_matches,
            "operator_product_after": self.operator_product_after,
            "premise_certified": self.premise_certified,
            "violation_demonstrated": self.violation_demonstrated,
        }


@dataclass
class ScenarioReport:
    """Everything one flow certifies, plus the stage-by-stage evidence.

    `snapshots` keeps the full states for programmatic use and is excluded
    from serialization; as_dict() emits summaries only.
    """

    scenario: str
    experiment_id: Optional[int]
    config: ScenarioConfig
    snapshots: list
    ledger_facts: tuple
    constraints: list
    commutation: dict
    final_certificate: list
    disturbed_diagnostic: Optional[dict]
    restoration: Optional[dict]
    coexisting_records: Optional[dict]
    cpl: Optional[CplResult]
    sampling: list
    counters: OperationCounters
    passed: bool

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "experiment_id": self.experiment_id,
            "config": self.config.as_dict(),
            "stages": [_stage_summary(s) for s in self.snapshots],
            "ledger": [f.as_dict() for f in self.ledger_facts],
            "constraints": [c.as_dict() for c in self.constraints],
            "commutation": self.commutation,
            "final_certificate": self.final_certificate,
            "disturbed_diagnostic": self.disturbed_diagnostic,
            "restoration": self.restoration,
            "coexisting_records": self.coexisting_records,
            "cpl": self.cpl.as_dict() if self.cpl is not None else None,
            "sampling": [t.as_dict() for t in self.sampling],
            "counters": self.counters.as_dict(),
            "passed": self.passed,
        }


def _stage_summary(snap: StageSnapshot, limit: int = 8) -> dict:
    amps = snap.state.amplitudes
    weights = np.abs(amps) ** 2
    order = sorted(range(amps.size), key=lambda i: (-weights[i], i))
    leading = []
    for i in order[:limit]:
        if abs(amps[i]) <= 1e-9:
            break
        leading.append([int(i), [float(amps[i].real), float(amps[i].imag)]])
    return {
        "index": snap.index,
        "label": snap.label,
        "norm": snap.state.norm(),
        "leading_amplitudes": leading,
        "facts": [f.as_dict() for f in snap.facts],
    }


# -- protocol building blocks ------------------------------------------------


def alice_premeasurements(basis: str = "Y") -> tuple:
    """Alice's friends each premeasure `basis` on their system qubit onto
    the matching memory."""
    return tuple(
        Premeasurement(
            PauliString.single(NUM_QUBITS, SYSTEM_QUBITS[k], basis),
            memory=ALICE_MEMORY[k],
            owner="alice")
        for k in range(3))


def lifted_direct_observables(alice_pms: Sequence[Premeasurement]) -> tuple:
    """Bob's direct outcome observables B_k: X on system qubit k, lifted
    through every existing record so that addressing them does not tear up
    Alice's memories implicitly."""
    out = []
    for k in range(3):
        obs: PauliOperator = PauliString.single(NUM_QUBITS, SYSTEM_QUBITS[k], "X")
        for pm in alice_pms:
            obs = lift(obs, pm)
        out.append(obs)
    return tuple(out)


def record_readout_observables() -> tuple:
    """Alice record observables A_k: Z on memory qubit 3+k."""
    return tuple(
        PauliString.single(NUM_QUBITS, ALICE_MEMORY[k], "Z") for k in range(3))


@dataclass(frozen=True)
class ConstraintSpec:
    constraint_id: int
    labels: tuple
    observables: tuple
    expected: int


def constraint_table(bhats: Sequence[PauliOperator],
                     ahats: Sequence[PauliOperator]) -> tuple:
    """The four certified products over direct/record observables."""
    specs = []
    for cid, (pattern, sign) in enumerate(zip(CONSTRAINT_PATTERNS, CONSTRAINT_SIGNS), 1):
        labels = []
        observables = []
        for k, slot in enumerate(pattern):
            if slot == "B":
                labels.append(f"B{k + 1}")
                observables.append(bhats[k])
            else:
                labels.append(f"A{k + 1}")
                observables.append(ahats[k])
        specs.append(ConstraintSpec(cid, tuple(labels), tuple(observables), sign))
    return tuple(specs)


def _sequential_outcome_distribution(amplitudes: np.ndarray,
                                     observables: Sequence[PauliOperator]) -> list:
    """Joint distribution of measuring `observables` in the listed order.

    p(v1..vm) = ||P_vm ... P_v1 psi||^2 with P_v = (1 + v*O)/2, which is the
    exact probability of that outcome sequence under repeated projective
    collapse. Branches of probability <= ALG_TOL are pruned; the survivors'
    probabilities must sum to 1 within PHYS_TOL. Returns [(values, p), ...].
    """
    leaves = [((), amplitudes)]
    for obs in observables:
        grown = []
        for values, arr in leaves:
            o_arr = obs.apply_to_array(arr)
            for v in (1, -1):
                branch = (arr + v * o_arr) / 2.0
                if float(np.vdot(branch, branch).real) > ALG_TOL:
                    grown.append((values + (v,), branch))
        leaves = grown
    dist = [
        (values, float(np.vdot(arr, arr).real)) for values, arr in leaves]
    total = sum(p for _, p in dist)
    if abs(total - 1.0) > PHYS_TOL:
        raise InternalConsistencyError(
            f"sequential outcome probabilities sum to {total!r}")
    return dist


def _draw_outcome_counts(dist: list, shots: int, rng: np.random.Generator) -> list:
    """Sample `shots` outcomes from a [(values, p), ...] distribution with
    one uniform draw per shot. Returns [(values, count), ...]."""
    cumulative = np.cumsum([p for _, p in dist])
    draws = rng.random(shots)
    picks = np.minimum(
        np.searchsorted(cumulative, draws, side="right"), len(dist) - 1)
    counts = np.bincount(picks, minlength=len(dist))
    return [(values, int(c)) for (values, _), c in zip(dist, counts)]


def certify_constraint(state: StateVector,
                       observables: Sequence[PauliOperator],
                       expected: int,
                       *,
                       labels: Sequence[str],
                       constraint_id: int,
                       kind: str = "operator",
                       stage: str = "",
                       tolerance: float = DEFAULT_TOLERANCE,
                       shots: int = 0,
                       master_seed: int = 0,
                       counters: Optional[OperationCounters] = None) -> ConstraintResult:
    """Certify that a product of pairwise-commuting involutions has the
    expected definite value on `state`.

    The exact Born expectation of the product is computed first; when shots
    > 0, the observables are additionally measured in sequence per shot
    (sampled from the exact outcome-cascade distribution) and each sampled
    product is compared with `expected`. Raises ProtocolError if any two
    observables fail to commute (their product has no joint eigenbasis to
    certify).
    """
    observables = tuple(observables)
    labels = tuple(labels)
    if len(observables) != len(labels) or not observables:
        raise ValueError("need one label per observable, at least one of each")
    if expected not in (1, -1):
        raise ValueError(f"expected product must be +1 or -1, got {expected!r}")
    if kind not in _KIND_CODES:
        raise ValueError(f"kind must be 'operator' or 'record', got {kind!r}")
    for (la, oa), (lb, ob) in combinations(zip(labels, observables), 2):
        if not commutes(oa, ob):
            raise ProtocolError(
                f"observables {la} and {lb} do not commute; "
                "simultaneous certification is undefined")
    amps = state.amplitudes
    acc = amps
    for obs in reversed(observables):
        if obs.num_qubits != state.num_qubits:
            raise ValueError("observable register does not match the state")
        acc = obs.apply_to_array(acc)
    val = complex(np.vdot(amps, acc))
    if abs(val.imag) > PHYS_TOL:
        raise InternalConsistencyError(
            f"product expectation came out complex: {val!r}")
    if counters is not None:
        counters.exact_expectations += 1
    products_plus = 0
    products_minus = 0
    violations = 0
    if shots > 0:
        rng = child_generator(
            master_seed, STREAM_CERTIFY, constraint_id, _KIND_CODES[kind])
        dist = _sequential_outcome_distribution(amps, observables)
        for values, count in _draw_outcome_counts(dist, shots, rng):
            product = 1
            for v in values:
                product *= v
            if product == 1:
                products_plus += count
            else:
                products_minus += count
            if product != expected:
                violations += count
        if counters is not None:
            counters.projective_measurements += shots * len(observables)
            counters.sampled_shots += shots
    certified = abs(val.real - expected) <= tolerance and violations == 0
    return ConstraintResult(
        constraint_id=constraint_id, kind=kind, labels=labels, stage=stage,
        expected=expected, expectation=float(val.real), tolerance=tolerance,
        shots=shots, products_plus=products_plus, products_minus=products_minus,
        violations=violations, certified=certified)


def sample_records(state: StateVector,
                   *,
                   target: str,
                   constraint_id: int,
                   stage: str,
                   records: Sequence[tuple],
                   expected_product: int,
                   shots: int,
                   master_seed: int,
                   target_index: int,
                   counters: Optional[OperationCounters] = None) -> SampleTally:
    """Repeatedly read the listed (label, qubit) records in order and tally
    joint outcomes, products, and per-record marginals. Shots are drawn
    from the exact readout-cascade distribution, one uniform per shot."""
    counts: dict = {}
    violations = 0
    plus_counts = [0] * len(records)
    if shots > 0:
        rng = child_generator(master_seed, STREAM_SAMPLE, target_index)
        observables = tuple(
            PauliString.single(state.num_qubits, qubit, "Z")
            for _, qubit in records)
        dist = _sequential_outcome_distribution(state.amplitudes, observables)
        for values, count in _draw_outcome_counts(dist, shots, rng):
            if count == 0:
                continue
            key = "".join("+" if v == 1 else "-" for v in values)
            counts[key] = counts.get(key, 0) + count
            product = 1
            for pos, v in enumerate(values):
                product *= v
                if v == 1:
                    plus_counts[pos] += count
            if product != expected_product:
                violations += count
        if counters is not None:
            counters.projective_measurements += shots * len(records)
            counters.sampled_shots += shots
    marginals = []
    half_band = 5 * 0.5 / sqrt(shots) if shots > 0 else 0.0
    for pos, (label, _) in enumerate(records):
        freq = plus_counts[pos] / shots if shots > 0 else 0.0
        marginals.append(MarginalSummary(
            label=label, plus_count=plus_counts[pos], frequency=freq,
            within_band=(abs(freq - 0.5) <= half_band) if shots > 0 else True))
    return SampleTally(
        target=target, constraint_id=constraint_id, stage=stage,
        record_labels=tuple(label for label, _ in records),
        expected_product=expected_product, shots=shots,
        outcome_counts=counts, violations=violations,
        marginals=tuple(marginals),
        all_products_expected=(violations == 0))


def _two_time_agreement(state: StateVector,
                        system_obs: PauliString,
                        record_qubit: int,
                        disturbance: Optional[Premeasurement]) -> float:
    """Exact E[v*w]: v from a projective readout of system_obs, w from a
    later Z readout of the record, with an optional premeasurement between."""
    amps = state.amplitudes
    o_amps = system_obs.apply_to_array(amps)
    record = PauliString.single(state.num_qubits, record_qubit, "Z")
    total = 0.0
    for v in (1, -1):
        branch = (amps + v * o_amps) / 2.0
        p = float(np.sum(np.abs(branch) ** 2))
        if p <= ALG_TOL:
            continue
        chi = StateVector(state.num_qubits, branch / sqrt(p))
        if disturbance is not None:
            chi = premeasure(chi, disturbance)
        total += p * v * expectation(chi, record)
    return total


def cpl_check(state: StateVector,
              system_obs: PauliString,
              record_label: str,
              record_qubit: int,
              disturbance: Premeasurement,
              *,
              shots: int = 0,
              master_seed: int = 0,
              tolerance: float = DEFAULT_TOLERANCE,
              counters: Optional[OperationCounters] = None) -> CplResult:
    """Certify the record-agreement premise and demonstrate its failure.

    Intact: reading the system observable and then its record must agree
    with certainty (expectation 1, every sampled shot matching). Disturbed:
    the same two-time experiment with `disturbance` applied between the two
    readouts. The same-time product expectation after the disturbance is
    reported alongside, because it stays at +1: only the two-time agreement
    carries the premise.
    """
    intact_exact = _two_time_agreement(state, system_obs, record_qubit, None)
    disturbed_exact = _two_time_agreement(state, system_obs, record_qubit, disturbance)
    if counters is not None:
        counters.exact_expectations += 2
    pair = system_obs * PauliString.single(state.num_qubits, record_qubit, "Z")
    after_state = premeasure(state, disturbance)
    if counters is not None:
        counters.unitary_applications += 1
        counters.exact_expectations += 1
    operator_after = expectation(after_state, pair)
    matches = {0: 0, 1: 0}
    if shots > 0:
        record_obs = PauliString.single(state.num_qubits, record_qubit, "Z")
        o_amps = system_obs.apply_to_array(state.amplitudes)
        for variant, disturb in ((0, None), (1, disturbance)):
            # Exact (v, w) distribution of the two-time experiment.
            dist = []
            for v in (1, -1):
                branch = (state.amplitudes + v * o_amps) / 2.0
                if float(np.vdot(branch, branch).real) <= ALG_TOL:
                    continue
                if disturb is not None:
                    branch = _premeasure_array(branch, disturb)
                z_arr = record_obs.apply_to_array(branch)
                for w in (1, -1):
                    sub = (branch + w * z_arr) / 2.0
                    q = float(np.vdot(sub, sub).real)
                    if q > ALG_TOL:
                        dist.append(((v, w), q))
            total = sum(p for _, p in dist)
            if abs(total - 1.0) > PHYS_TOL:
                raise InternalConsistencyError(
                    f"two-time outcome probabilities sum to {total!r}")
            rng = child_generator(master_seed, STREAM_CPL, variant)
            for (v, w), count in _draw_outcome_counts(dist, shots, rng):
                if v == w:
                    matches[variant] += count
            if counters is not None:
                counters.projective_measurements += 2 * shots
                counters.unitary_applications += shots if disturb is not None else 0
                counters.sampled_shots += shots
    return CplResult(
        system_label=system_obs.label(),
        record_label=record_label,
        record_qubit=record_qubit,
        disturbance_label=disturbance.observable.label(),
        shots=shots,
        intact_expectation=intact_exact,
        intact_matches=matches[0],
        disturbed_expectation=disturbed_exact,
        disturbed_matches=matches[1],
        operator_product_after=operator_after,
        premise_certified=(abs(intact_exact - 1.0) <= tolerance
                           and matches[0] == (shots if shots > 0 else 0)),
        violation_demonstrated=(1.0 - disturbed_exact) > 0.1)


def _commutation_survey(specs: Sequence[ConstraintSpec],
                        bhats: Sequence[PauliOperator],
                        ahats: Sequence[PauliOperator]) -> dict:
    """Pairwise commutation of the four product observables, commutation
    inside each certified triple, and the pair-local obstruction: each
    direct observable anticommutes with its own record observable."""
    products = []
    for spec in specs:
        product = spec.observables[0]
        for obs in spec.observables[1:]:
            product = product * obs
        products.append(product)
    pairwise = {}
    all_commute = True
    for (i, pi), (j, pj) in combinations(enumerate(products, 1), 2):
        ok = commutes(pi, pj)
        pairwise[f"{i},{j}"] = ok
        all_commute = all_commute and ok
    triples = {}
    for spec in specs:
        ok = all(
            commutes(a, b) for a, b in combinations(spec.observables, 2))
        triples[str(spec.constraint_id)] = ok
    noncoexistence = []
    cross_ok = True
    for k in range(3):
        for j in range(3):
            same = j == k
            anti = not commutes(bhats[k], ahats[j])
            if same:
                noncoexistence.append({
                    "pair": k + 1,
                    "direct_label": f"B{k + 1}",
                    "record_label": f"A{k + 1}",
                    "anticommute": anti,
                })
            else:
                cross_ok = cross_ok and not anti
    return {
        "product_labels": {str(i): p.label() for i, p in enumerate(products, 1)},
        "product_pairwise_commute": pairwise,
        "all_products_commute": all_commute,
        "triples_commute": triples,
        "same_pair_anticommute": noncoexistence,
        "cross_pair_commute": cross_ok,
    }


# -- scenario flows ----------------------------------------------------------


def _prepared_register(counters: OperationCounters) -> StateVector:
    state = zero_state(NUM_QUBITS)
    state = prepare_ghz(state, SYSTEM_QUBITS)
    counters.unitary_applications += 3  # H + two CX
    return state


def run_lmz(config: Optional[ScenarioConfig] = None) -> ScenarioReport:
    """Single-experiment flow: Alice's friends record, Bob addresses lifted
    observables, every certification lives in one pipeline.

    Stages: prepared -> alice-complete -> bob-1 -> bob-2 -> bob-3. Record
    certifications for the three mixed constraints use the pipeline state
    right after the matching Bob premeasurement alone, since later Bob steps
    disturb the records the mixed products need.
    """
    config = config or ScenarioConfig()
    if config.bob_mode != "lmz-lifted":
        raise ValueError("run_lmz needs a config with bob_mode='lmz-lifted'")
    counters = OperationCounters()
    ledger = Ledger()
    snapshots = []

    state = _prepared_register(counters)
    snapshots.append(StageSnapshot(0, "prepared", state, ledger.snapshot()))

    alice_pms = alice_premeasurements()
    for k, pm in enumerate(alice_pms):
        ledger.mark_disturbed(pm.observable, NUM_QUBITS)
        state = premeasure(state, pm)
        counters.unitary_applications += 1
        ledger.add("alice", f"A{k + 1}", ALICE_MEMORY[k], stage="alice-complete")
    snapshots.append(StageSnapshot(1, "alice-complete", state, ledger.snapshot()))
    stage1 = state

    bhats = lifted_direct_observables(alice_pms)
    ahats = record_readout_observables()
    specs = constraint_table(bhats, ahats)

    constraints = []
    for spec in specs:
        constraints.append(certify_constraint(
            stage1, spec.observables, spec.expected,
            labels=spec.labels, constraint_id=spec.constraint_id,
            kind="operator", stage="alice-complete",
            tolerance=config.tolerance, shots=0,
            master_seed=config.master_seed, counters=counters))
    commutation = _commutation_survey(specs, bhats, ahats)

    bob_pms = tuple(
        Premeasurement(bhats[k], BOB_MEMORY[k], "bob") for k in range(3))
    bob_states = []
    for k, pm in enumerate(bob_pms):
        ledger.mark_disturbed(pm.observable, NUM_QUBITS)
        state = premeasure(state, pm)
        counters.unitary_applications += 1
        ledger.add("bob", f"B{k + 1}", BOB_MEMORY[k], stage=f"bob-{k + 1}")
        snapshots.append(StageSnapshot(2 + k, f"bob-{k + 1}", state, ledger.snapshot()))
        bob_states.append(state)
    final = state

    # Record-level certification and sampling: constraint 1 from the full
    # pipeline's Bob records; each mixed constraint from the pipeline branch
    # where only the matching Bob premeasurement has run.
    record_plan = []
    for spec in specs:
        cid = spec.constraint_id
        if cid == 1:
            st = final
            stage_label = "bob-3"
        else:
            j = cid - 2
            if j == 0:
                st = bob_states[0]
                stage_label = "bob-1"
            else:
                st = premeasure(stage1, bob_pms[j])
                counters.unitary_applications += 1
                stage_label = f"bob-{j + 1}-only"
        records = []
        for k, slot in enumerate(CONSTRAINT_PATTERNS[cid - 1]):
            if slot == "B":
                records.append((f"B{k + 1}", BOB_MEMORY[k]))
            else:
                records.append((f"A{k + 1}", ALICE_MEMORY[k]))
        record_plan.append((spec, st, stage_label, tuple(records)))

    sampling = []
    for spec, st, stage_label, records in record_plan:
        base = certify_constraint(
            st,
            tuple(PauliString.single(NUM_QUBITS, q, "Z") for _, q in records),
            spec.expected,
            labels=tuple(label for label, _ in records),
            constraint_id=spec.constraint_id, kind="record", stage=stage_label,
            tolerance=config.tolerance, shots=0,
            master_seed=config.master_seed, counters=counters)
        if config.shots > 0:
            tally = sample_records(
                st, target=f"constraint-{spec.constraint_id}-records",
                constraint_id=spec.constraint_id, stage=stage_label,
                records=records, expected_product=spec.expected,
                shots=config.shots, master_seed=config.master_seed,
                target_index=spec.constraint_id, counters=counters)
            sampling.append(tally)
            base = replace(
                base, shots=tally.shots,
                products_plus=tally.outcome_counts_product(1),
                products_minus=tally.outcome_counts_product(-1),
                violations=tally.violations,
                certified=base.certified and tally.violations == 0)
        constraints.append(base)

    # Transported certificate: conjugate each product through Bob's three
    # premeasurements and certify it on the final state.
    final_certificate = []
    for spec in specs:
        product = spec.observables[0]
        for obs in spec.observables[1:]:
            product = product * obs
        carried = product
        for pm in bob_pms:
            carried = lift(carried, pm)
        val = expectation(final, carried)
        counters.exact_expectations += 1
        final_certificate.append({
            "constraint_id": spec.constraint_id,
            "observable": carried.label(),
            "expected": spec.expected,
            "expectation": val,
            "certified": abs(val - spec.expected) <= config.tolerance,
        })

    # Disturbed diagnostic: the mixed record product that held right after
    # Bob's first premeasurement no longer holds on the final state.
    trio = (PauliString.single(NUM_QUBITS, BOB_MEMORY[0], "Z")
            * PauliString.single(NUM_QUBITS, ALICE_MEMORY[1], "Z")
            * PauliString.single(NUM_QUBITS, ALICE_MEMORY[2], "Z"))
    early_val = expectation(bob_states[0], trio)
    final_val = expectation(final, trio)
    counters.exact_expectations += 2
    disturbed_statuses = {
        f.label: f.status for f in ledger.facts if f.label in ("A2", "A3")}
    disturbed_diagnostic = {
        "records": ["B1", "A2", "A3"],
        "early_stage": "bob-1",
        "early_expectation": early_val,
        "final_expectation": final_val,
        "gap": abs(final_val - early_val),
        "gap_exceeds_half": abs(final_val - early_val) > 0.5,
        "record_statuses": disturbed_statuses,
    }

    cpl = cpl_check(
        stage1, alice_pms[0].observable, "A1", ALICE_MEMORY[0], bob_pms[0],
        shots=config.shots, master_seed=config.master_seed,
        tolerance=config.tolerance, counters=counters)

    _require_constraint_coverage(constraints, {1, 2, 3, 4}, ("operator", "record"))
    passed = (
        all(c.certified for c in constraints)
        and commutation["all_products_commute"]
        and all(commutation["triples_commute"].values())
        and all(row["anticommute"] for row in commutation["same_pair_anticommute"])
        and commutation["cross_pair_commute"]
        and all(entry["certified"] for entry in final_certificate)
        and disturbed_diagnostic["gap_exceeds_half"]
        and cpl.premise_certified
        and cpl.violation_demonstrated
        and all(t.all_products_expected for t in sampling)
        and all(m.within_band for t in sampling for m in t.marginals))
    return ScenarioReport(
        scenario="lmz", experiment_id=None, config=config,
        snapshots=snapshots, ledger_facts=ledger.snapshot(),
        constraints=constraints, commutation=commutation,
        final_certificate=final_certificate,
        disturbed_diagnostic=disturbed_diagnostic,
        restoration=None, coexisting_records=None, cpl=cpl,
        sampling=sampling, counters=counters, passed=passed)


def run_cdr(config: ScenarioConfig) -> ScenarioReport:
    """Four-experiment flow, one experiment per constraint: Alice's friends
    record, the records not read by the constraint are unwound by the
    self-inverse premeasurement, and Bob then measures the freed system
    qubits directly.

    Experiment 1 reverses all three records (full restoration of the
    prepared register) and certifies the all-direct product +1. Experiment
    m in 2..4 reverses only pair m-1 and certifies the mixed product -1,
    with the two kept records coexisting untouched next to Bob's record.
    """
    if config.bob_mode != "cdr-reversal":
        raise ValueError("run_cdr needs a config with bob_mode='cdr-reversal'")
    exp = config.experiment_id
    counters = OperationCounters()
    ledger = Ledger()
    snapshots = []

    state = _prepared_register(counters)
    prepared = state
    snapshots.append(StageSnapshot(0, "prepared", state, ledger.snapshot()))

    alice_pms = alice_premeasurements()
    for k, pm in enumerate(alice_pms):
        ledger.mark_disturbed(pm.observable, NUM_QUBITS)
        state = premeasure(state, pm)
        counters.unitary_applications += 1
        ledger.add("alice", f"A{k + 1}", ALICE_MEMORY[k], stage="alice-complete")
    snapshots.append(StageSnapshot(1, "alice-complete", state, ledger.snapshot()))

    pattern = CONSTRAINT_PATTERNS[exp - 1]
    expected = CONSTRAINT_SIGNS[exp - 1]
    reversed_pairs = tuple(k for k, slot in enumerate(pattern) if slot == "B")
    for k in sorted(reversed_pairs, reverse=True):
        state = reverse(state, alice_pms[k])
        counters.unitary_applications += 1
        ledger.mark_erased(f"A{k + 1}")
    stage_label = "reversed-all" if exp == 1 else f"reversed-pair-{reversed_pairs[0] + 1}"
    snapshots.append(StageSnapshot(2, stage_label, state, ledger.snapshot()))

    if exp == 1:
        restoration_fid = fidelity(state, prepared)
        restoration = {
            "kind": "full",
            "fidelity": restoration_fid,
            "restored": restoration_fid >= 1.0 - config.tolerance,
        }
    else:
        mem = ALICE_MEMORY[reversed_pairs[0]]
        rho = reduced_density(state, (mem,))
        purity = float(np.trace(rho @ rho).real)
        excitation = state.probability_of_bit(mem)
        restoration = {
            "kind": "memory",
            "memory_qubit": mem,
            "purity": purity,
            "excitation": excitation,
            "restored": (purity >= 1.0 - config.tolerance
                         and excitation <= config.tolerance),
        }

    # Operator certification on the reversed state: direct X for freed
    # pairs, record Z for kept ones.
    op_labels = []
    op_observables = []
    for k, slot in enumerate(pattern):
        if slot == "B":
            op_labels.append(f"B{k + 1}")
            op_observables.append(
                PauliString.single(NUM_QUBITS, SYSTEM_QUBITS[k], "X"))
        else:
            op_labels.append(f"A{k + 1}")
            op_observables.append(
                PauliString.single(NUM_QUBITS, ALICE_MEMORY[k], "Z"))
    constraints = [certify_constraint(
        state, op_observables, expected, labels=op_labels,
        constraint_id=exp, kind="operator", stage=stage_label,
        tolerance=config.tolerance, shots=0,
        master_seed=config.master_seed, counters=counters)]

    # Bob measures the freed system qubits directly (premeasurement onto his
    # own memories, so the records coexist and can be read in any order).
    for k in reversed_pairs:
        pm = Premeasurement(
            PauliString.single(NUM_QUBITS, SYSTEM_QUBITS[k], "X"),
            memory=BOB_MEMORY[k], owner="bob")
        ledger.mark_disturbed(pm.observable, NUM_QUBITS)
        state = premeasure(state, pm)
        counters.unitary_applications += 1
        ledger.add("bob", f"B{k + 1}", BOB_MEMORY[k], stage="bob-direct")
    snapshots.append(StageSnapshot(3, "bob-direct", state, ledger.snapshot()))
    final = state

    records = []
    for k, slot in enumerate(pattern):
        if slot == "B":
            records.append((f"B{k + 1}", BOB_MEMORY[k]))
        else:
            records.append((f"A{k + 1}", ALICE_MEMORY[k]))
    records = tuple(records)
    base = certify_constraint(
        final,
        tuple(PauliString.single(NUM_QUBITS, q, "Z") for _, q in records),
        expected,
        labels=tuple(label for label, _ in records),
        constraint_id=exp, kind="record", stage="bob-direct",
        tolerance=config.tolerance, shots=0,
        master_seed=config.master_seed, counters=counters)
    sampling = []
    if config.shots > 0:
        tally = sample_records(
            final, target=f"experiment-{exp}-records",
            constraint_id=exp, stage="bob-direct", records=records,
            expected_product=expected, shots=config.shots,
            master_seed=config.master_seed, target_index=exp,
            counters=counters)
        sampling.append(tally)
        base = replace(
            base, shots=tally.shots,
            products_plus=tally.outcome_counts_product(1),
            products_minus=tally.outcome_counts_product(-1),
            violations=tally.violations,
            certified=base.certified and tally.violations == 0)
    constraints.append(base)

    current_labels = tuple(f.label for f in ledger.current())
    coexisting_records = {
        "current": list(current_labels),
        "constraint_labels": [label for label, _ in records],
        "records_match_constraint": sorted(current_labels)
        == sorted(label for label, _ in records),
    }

    _require_constraint_coverage(constraints, {exp}, ("operator", "record"))
    passed = (
        all(c.certified for c in constraints)
        and restoration["restored"]
        and coexisting_records["records_match_constraint"]
        and all(t.all_products_expected for t in sampling)
        and all(m.within_band for t in sampling for m in t.marginals))
    return ScenarioReport(
        scenario="cdr", experiment_id=exp, config=config,
        snapshots=snapshots, ledger_facts=ledger.snapshot(),
        constraints=constraints, commutation={},
        final_certificate=[], disturbed_diagnostic=None,
        restoration=restoration, coexisting_records=coexisting_records,
        cpl=None, sampling=sampling, counters=counters, passed=passed)


def run_cdr_suite(shots: int = 0, master_seed: int = 0,
                  tolerance: float = DEFAULT_TOLERANCE) -> list:
    """All four reversal experiments with shared seed and tolerance."""
    return [
        run_cdr(ScenarioConfig(
            bob_mode="cdr-reversal", experiment_id=exp, shots=shots,
            master_seed=master_seed, tolerance=tolerance))
        for exp in (1, 2, 3, 4)]


def _require_constraint_coverage(constraints: Sequence[ConstraintResult],
                                 ids: set, kinds: tuple) -> None:
    seen = {(c.constraint_id, c.kind) for c in constraints}
    want = {(i, k) for i in ids for k in kinds}
    if not want <= seen:
        missing = sorted(want - seen)
        raise InternalConsistencyError(
            f"report is missing constraint certifications: {missing}")
