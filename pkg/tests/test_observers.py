"""Record-writing unitaries, reversal, lifting, and the fact ledger."""
from math import sqrt

import numpy as np
import pytest

from oracle import op, op_label, premeasure_unitary, random_state
from relfacts.errors import ProtocolError
from relfacts.observers import (
    Ledger,
    Observer,
    Premeasurement,
    lift,
    premeasure,
    readout,
    record_observable,
    reverse,
)
from relfacts.pauli import PauliString, PauliSum, commutes
from relfacts.statevector import (
    StateVector,
    apply_gate,
    expectation,
    fidelity,
    hadamard,
    measure,
    zero_state,
)

INV_SQRT2 = 1 / sqrt(2.0)


def pm_z(num_qubits=2, system=0, memory=1):
    return Premeasurement(
        PauliString.single(num_qubits, system, "Z"), memory, "friend")


class TestPremeasurementChecks:
    def test_memory_inside_support_rejected(self):
        with pytest.raises(ValueError):
            Premeasurement(PauliString.from_label("ZZ"), 1, "friend")

    def test_identity_rejected(self):
        with pytest.raises(ValueError):
            Premeasurement(PauliString.identity(2), 1, "friend")

    def test_memory_out_of_range(self):
        with pytest.raises(ValueError):
            Premeasurement(PauliString.from_label("ZI"), 5, "friend")

    def test_sum_rejected(self):
        s = PauliSum([(INV_SQRT2, PauliString.from_label("XI")),
                      (INV_SQRT2, PauliString.from_label("ZI"))])
        with pytest.raises(ValueError):
            Premeasurement(s, 1, "friend")

    def test_observer_duplicate_memory(self):
        with pytest.raises(ValueError):
            Observer("alice", (3, 3))


class TestPremeasure:
    def test_plus_state_becomes_bell_pair(self):
        state = apply_gate(zero_state(2), hadamard(), (0,))
        out = premeasure(state, pm_z())
        np.testing.assert_allclose(
            out.amplitudes, [INV_SQRT2, 0.0, 0.0, INV_SQRT2], atol=1e-15)

    def test_requires_cleared_memory(self):
        state = apply_gate(zero_state(2), hadamard(), (0,))
        once = premeasure(state, pm_z())
        with pytest.raises(ProtocolError):
            premeasure(once, pm_z())

    def test_register_mismatch(self):
        with pytest.raises(ValueError):
            premeasure(zero_state(3), pm_z(num_qubits=2))

    def test_matches_dense_unitary(self):
        rng = np.random.default_rng(2024)
        for _ in range(25):
            num_qubits = int(rng.integers(2, 5))
            memory = int(rng.integers(0, num_qubits))
            others = [q for q in range(num_qubits) if q != memory]
            support = [q for q in others if rng.random() < 0.7] or [others[0]]
            obs = PauliString.from_map(
                num_qubits,
                {q: str(rng.choice(list("XYZ"))) for q in support})
            pm = Premeasurement(obs, memory, "friend")
            amps = random_state(rng, num_qubits, zero_qubits=(memory,))
            u = premeasure_unitary(num_qubits, op_label("".join(obs.factors)), memory)
            out = premeasure(StateVector(num_qubits, amps), pm)
            np.testing.assert_allclose(out.amplitudes, u @ amps, atol=1e-12)

    def test_record_agrees_with_observable(self):
        rng = np.random.default_rng(55)
        for _ in range(100):
            amps = random_state(rng, 4, zero_qubits=(3,))
            state = StateVector(4, amps)
            support = sorted(rng.choice(3, size=int(rng.integers(1, 4)), replace=False))
            obs = PauliString.from_map(
                4, {int(q): str(rng.choice(list("XYZ"))) for q in support})
            pm = Premeasurement(obs, 3, "friend")
            before = expectation(state, obs)
            out = premeasure(state, pm)
            pair = obs * record_observable(pm)
            assert expectation(out, pair) == pytest.approx(1.0, abs=1e-10)
            # memory readout statistics copy the premeasured observable
            assert expectation(out, record_observable(pm)) == pytest.approx(
                before, abs=1e-10)


class TestReverse:
    def test_reverse_undoes_premeasure_100_cases(self):
        rng = np.random.default_rng(661)
        for _ in range(100):
            amps = random_state(rng, 4, zero_qubits=(3,))
            state = StateVector(4, amps)
            support = sorted(rng.choice(3, size=int(rng.integers(1, 4)), replace=False))
            obs = PauliString.from_map(
                4, {int(q): str(rng.choice(list("XYZ"))) for q in support})
            pm = Premeasurement(obs, 3, "friend")
            back = reverse(premeasure(state, pm), pm)
            assert fidelity(back, state) >= 1.0 - 1e-12

    def test_reverse_after_collapse_loses_the_branch(self):
        state = apply_gate(zero_state(2), hadamard(), (0,))
        pm = pm_z()
        recorded = premeasure(state, pm)
        outcome = measure(recorded, record_observable(pm), np.random.default_rng(1))
        back = reverse(outcome.state, pm)
        # value frozen from the independent dense computation
        assert fidelity(back, state) == pytest.approx(0.5, abs=1e-12)

    def test_reverse_allows_dirty_memory(self):
        # collapse leaves the memory entangled or excited; reversal still runs
        state = apply_gate(zero_state(2), hadamard(), (0,))
        pm = pm_z()
        recorded = premeasure(state, pm)
        reverse(recorded, pm)


class TestLift:
    @pytest.mark.parametrize("label,expected_label", [
        ("ZI", "+ZI"),   # commutes with premeasured Z: unchanged
        ("XI", "+XX"),   # anticommutes: picks up X on the memory
        ("YI", "+YX"),
    ])
    def test_lift_through_z_record(self, label, expected_label):
        pm = pm_z()
        lifted = lift(PauliString.from_label(label), pm)
        assert lifted.label() == expected_label

    def test_lift_matches_dense_conjugation(self):
        num_qubits = 3
        obs_z = PauliString.from_map(num_qubits, {0: "Y"})
        pm = Premeasurement(obs_z, 2, "friend")
        u = premeasure_unitary(num_qubits, op(num_qubits, {0: "Y"}), 2)
        cases = [
            PauliString.from_map(num_qubits, {0: "Y"}),
            PauliString.from_map(num_qubits, {0: "X"}),
            PauliString.from_map(num_qubits, {0: "Z", 1: "X"}),
            PauliString.from_map(num_qubits, {1: "Z"}),
            PauliSum([(INV_SQRT2, PauliString.from_map(num_qubits, {0: "X"})),
                      (INV_SQRT2, PauliString.from_map(num_qubits, {0: "Y"}))]),
        ]
        for obs in cases:
            lifted = lift(obs, pm)
            np.testing.assert_allclose(
                lifted.dense_matrix(), u @ obs.dense_matrix() @ u, atol=1e-12)
            assert lifted.is_involution()

    def test_lifted_observable_anticommutes_with_record(self):
        pm = pm_z()
        lifted = lift(PauliString.from_label("XI"), pm)
        assert not commutes(lifted, record_observable(pm))

    def test_lift_rejections(self):
        pm = pm_z()
        with pytest.raises(ValueError):
            lift(PauliString.from_label("IZ"), pm)  # touches the memory
        with pytest.raises(ValueError):
            lift(PauliString.from_label("X"), pm)  # register mismatch
        bad = PauliSum([(1.0, PauliString.from_label("XI")),
                        (1.0, PauliString.from_label("ZI"))])
        with pytest.raises(ValueError):
            lift(bad, pm)


class TestLedger:
    def test_add_get_and_duplicates(self):
        ledger = Ledger()
        fact = ledger.add("alice", "A1", 3, stage="s")
        assert ledger.get("A1") is fact
        with pytest.raises(ValueError):
            ledger.add("bob", "A1", 6, stage="s")
        with pytest.raises(KeyError):
            ledger.get("missing")

    def test_mark_disturbed_follows_commutation(self):
        ledger = Ledger()
        ledger.add("alice", "A1", 0, stage="s")
        ledger.add("alice", "A2", 1, stage="s")
        changed = ledger.mark_disturbed(PauliString.from_label("XI"), 2)
        assert [f.label for f in changed] == ["A1"]
        assert ledger.get("A1").status == "disturbed"
        assert ledger.get("A2").status == "current"
        # a commuting operation leaves records alone
        assert ledger.mark_disturbed(PauliString.from_label("ZZ"), 2) == []
        # already-disturbed facts are not re-reported
        assert ledger.mark_disturbed(PauliString.from_label("XX"), 2) != []
        assert ledger.mark_disturbed(PauliString.from_label("XX"), 2) == []

    def test_mark_erased_clears_value(self):
        ledger = Ledger()
        fact = ledger.add("alice", "A1", 0, stage="s")
        fact.value = -1
        ledger.mark_erased("A1")
        assert fact.status == "erased"
        assert fact.value is None

    def test_snapshot_is_immutable_copy(self):
        ledger = Ledger()
        ledger.add("alice", "A1", 0, stage="s")
        snap = ledger.snapshot()
        ledger.mark_disturbed(PauliString.from_label("X"), 1)
        assert snap[0].status == "current"
        assert ledger.get("A1").status == "disturbed"

    def test_current_listing(self):
        ledger = Ledger()
        ledger.add("alice", "A1", 0, stage="s")
        ledger.add("alice", "A2", 1, stage="s")
        ledger.mark_erased("A2")
        assert [f.label for f in ledger.current()] == ["A1"]


class TestReadout:
    def test_zero_reads_plus_one(self):
        out = readout(zero_state(2), 1, np.random.default_rng(0))
        assert out.value == 1
        assert out.probability == pytest.approx(1.0)

    def test_excited_reads_minus_one(self):
        state = apply_gate(zero_state(1), hadamard(), (0,))
        rng = np.random.default_rng(2)
        seen = {readout(state, 0, rng).value for _ in range(30)}
        assert seen == {1, -1}

    def test_repeatability(self):
        state = apply_gate(zero_state(1), hadamard(), (0,))
        rng = np.random.default_rng(4)
        first = readout(state, 0, rng)
        again = readout(first.state, 0, rng)
        assert again.value == first.value
        assert again.probability == pytest.approx(1.0)
