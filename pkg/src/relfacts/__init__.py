"""Simulator and verification toolkit for sequential agent measurements on
a shared three-qubit state.

The package certifies, by exact Born-rule computation, four product
constraints over direct outcomes and memory records; proves by GF(2)
elimination and exhaustive enumeration that no joint +/-1 assignment
satisfies all four; and demonstrates where the classical reading breaks:
records get disturbed, and two-time record agreement fails, exactly when
non-commuting operations intervene.
"""

from .errors import (
    ConstraintParseError,
    InternalConsistencyError,
    ProtocolError,
    ResourceError,
)
from .observers import (
    Ledger,
    Observer,
    Premeasurement,
    RelativeFact,
    StageSnapshot,
    lift,
    premeasure,
    readout,
    record_observable,
    reverse,
)
from .parity import (
    ConstraintSystem,
    EnumerationResult,
    ParityConstraint,
    ProductIdentity,
    SolveResult,
    analyze,
    enumerate_assignments,
    ghz_record_system,
    parse_constraints,
    product_identity,
    satisfiable,
)
from .pauli import PauliString, PauliSum, commutes
from .rng import child_generator
from .scenarios import (
    ConstraintResult,
    CplResult,
    SampleTally,
    ScenarioConfig,
    ScenarioReport,
    certify_constraint,
    cpl_check,
    run_cdr,
    run_cdr_suite,
    run_lmz,
    sample_records,
)
from .statevector import (
    ALG_TOL,
    PHYS_TOL,
    GateMatrix,
    MeasurementOutcome,
    StateVector,
    apply_gate,
    apply_pauli,
    cnot,
    expectation,
    fidelity,
    hadamard,
    measure,
    pauli_gate,
    prepare_ghz,
    reduced_density,
    zero_state,
)

__version__ = "0.1.0"

__all__ = [
    "ALG_TOL",
    "PHYS_TOL",
    "ConstraintParseError",
    "ConstraintResult",
    "ConstraintSystem",
    "CplResult",
    "EnumerationResult",
    "GateMatrix",
    "InternalConsistencyError",
    "Ledger",
    "MeasurementOutcome",
    "Observer",
    "ParityConstraint",
    "PauliString",
    "PauliSum",
    "Premeasurement",
    "ProductIdentity",
    "ProtocolError",
    "RelativeFact",
    "ResourceError",
    "SampleTally",
    "ScenarioConfig",
    "ScenarioReport",
    "SolveResult",
    "StageSnapshot",
    "StateVector",
    "analyze",
    "apply_gate",
    "apply_pauli",
    "certify_constraint",
    "child_generator",
    "cnot",
    "commutes",
    "cpl_check",
    "enumerate_assignments",
    "expectation",
    "fidelity",
    "ghz_record_system",
    "hadamard",
    "lift",
    "measure",
    "parse_constraints",
    "pauli_gate",
    "premeasure",
    "prepare_ghz",
    "product_identity",
    "readout",
    "record_observable",
    "reduced_density",
    "reverse",
    "run_cdr",
    "run_cdr_suite",
    "run_lmz",
    "sample_records",
    "satisfiable",
    "zero_state",
]
