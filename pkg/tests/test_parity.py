"""GF(2) satisfiability: solver, enumeration, certificates, parsing."""
import numpy as np
import pytest

from oracle import brute_force_count
from relfacts.errors import ConstraintParseError, ResourceError
from relfacts.parity import (
    BUILTIN_SYSTEMS,
    ConstraintSystem,
    ParityConstraint,
    analyze,
    enumerate_assignments,
    ghz_record_system,
    parse_constraints,
    product_identity,
    satisfiable,
)


def system_of(*specs, universe=None):
    return ConstraintSystem.from_constraints(
        [ParityConstraint.of(vs, rhs) for vs, rhs in specs], universe)


class TestParityConstraint:
    def test_pair_cancellation(self):
        c = ParityConstraint.of(("x", "x", "y"), -1)
        assert c.variables == frozenset({"y"})

    def test_validation(self):
        with pytest.raises(ValueError):
            ParityConstraint.of(("x",), 0)
        with pytest.raises(ValueError):
            ParityConstraint.of(("2bad",), 1)

    def test_evaluate(self):
        c = ParityConstraint.of(("x", "y"), -1)
        assert c.evaluate({"x": 1, "y": -1})
        assert not c.evaluate({"x": 1, "y": 1})
        with pytest.raises(ValueError):
            c.evaluate({"x": 0, "y": 1})

    def test_str_canonical(self):
        c = ParityConstraint.of(("B1", "A3", "A2"), -1)
        assert str(c) == "A2*A3*B1 = -1"
        assert str(ParityConstraint.of(("x", "x"), 1)) == "1 = +1"


class TestConstraintSystem:
    def test_universe_inference_order(self):
        sys_ = system_of((("b", "a"), 1), (("c", "a"), -1))
        assert sys_.universe == ("a", "b", "c")

    def test_explicit_universe_checked(self):
        with pytest.raises(ValueError):
            system_of((("x", "q"), 1), universe=("x",))
        with pytest.raises(ValueError):
            ConstraintSystem((), ("x", "x"))

    def test_check(self):
        sys_ = system_of((("x", "y"), 1), (("y",), -1))
        assert sys_.check({"x": -1, "y": -1}) == [True, True]
        assert sys_.check({"x": 1, "y": -1}) == [False, True]


class TestSolver:
    def test_simple_satisfiable(self):
        sys_ = system_of((("x", "y"), -1), (("y", "z"), 1))
        result = satisfiable(sys_)
        assert result.satisfiable
        assert all(sys_.check(result.witness))
        assert result.rank == 2
        assert result.num_solutions == 2

    def test_free_variables_default_plus_one(self):
        sys_ = system_of((("x",), -1), universe=("x", "y", "z"))
        result = satisfiable(sys_)
        assert result.witness == {"x": -1, "y": 1, "z": 1}
        assert result.num_solutions == 4

    def test_direct_contradiction(self):
        sys_ = system_of((("x",), 1), (("x",), -1))
        result = satisfiable(sys_)
        assert not result.satisfiable
        assert result.certificate == (1, 2)
        assert result.num_solutions == 0
        assert product_identity(sys_, result.certificate).is_contradiction

    def test_redundant_rows_do_not_add_rank(self):
        sys_ = system_of((("x", "y"), 1), (("x", "y"), 1))
        result = satisfiable(sys_)
        assert result.satisfiable
        assert result.rank == 1
        assert result.num_solutions == 2

    def test_solve_guard(self):
        universe = tuple(f"v{i}" for i in range(65))
        sys_ = ConstraintSystem((), universe)
        with pytest.raises(ResourceError):
            satisfiable(sys_)

    def test_random_systems_500_cases_match_enumeration_and_brute_force(self):
        rng = np.random.default_rng(90125)
        for _ in range(500):
            n = int(rng.integers(1, 8))
            universe = tuple(f"v{i}" for i in range(n))
            m = int(rng.integers(1, 10))
            specs = []
            for _ in range(m):
                size = int(rng.integers(0, n + 1))
                vs = tuple(rng.choice(universe, size=size, replace=False))
                specs.append((vs, int(rng.choice([1, -1]))))
            sys_ = system_of(*specs, universe=universe)
            result = satisfiable(sys_)
            enum = enumerate_assignments(sys_)
            brute = brute_force_count(
                [(c.variables, c.rhs) for c in sys_.constraints], universe)
            assert enum.count == brute
            assert result.satisfiable == (brute > 0)
            if result.satisfiable:
                assert all(sys_.check(result.witness))
                assert result.num_solutions == brute
            else:
                assert product_identity(sys_, result.certificate).is_contradiction


class TestEnumeration:
    def test_listing(self):
        sys_ = system_of((("x", "y"), -1))
        enum = enumerate_assignments(sys_, return_assignments=True)
        assert enum.count == 2
        assert enum.tested == 4
        assert {frozenset(a.items()) for a in enum.assignments} == {
            frozenset({("x", 1), ("y", -1)}),
            frozenset({("x", -1), ("y", 1)}),
        }

    def test_guard(self):
        universe = tuple(f"v{i}" for i in range(21))
        sys_ = ConstraintSystem((), universe)
        with pytest.raises(ResourceError):
            enumerate_assignments(sys_)


class TestRecordSystem:
    def test_shape(self):
        sys_ = ghz_record_system()
        assert sys_.universe == ("A1", "A2", "A3", "B1", "B2", "B3")
        assert [str(c) for c in sys_.constraints] == [
            "B1*B2*B3 = +1",
            "A2*A3*B1 = -1",
            "A1*A3*B2 = -1",
            "A1*A2*B3 = -1",
        ]
        assert BUILTIN_SYSTEMS["ghz"]().universe == sys_.universe

    def test_unsatisfiable_with_full_certificate(self):
        result = satisfiable(ghz_record_system())
        assert not result.satisfiable
        assert result.certificate == (1, 2, 3, 4)
        assert result.num_solutions == 0

    def test_enumeration_finds_nothing(self):
        sys_ = ghz_record_system()
        enum = enumerate_assignments(sys_)
        assert enum.tested == 64
        assert enum.count == 0
        brute = brute_force_count(
            [(c.variables, c.rhs) for c in sys_.constraints], sys_.universe)
        assert brute == 0

    def test_every_three_constraint_subsystem_has_eight_solutions(self):
        full = ghz_record_system()
        for drop in range(4):
            kept = [c for i, c in enumerate(full.constraints) if i != drop]
            sub = ConstraintSystem(tuple(kept), full.universe)
            result = satisfiable(sub)
            assert result.satisfiable
            assert result.num_solutions == 8
            assert enumerate_assignments(sub).count == 8
            assert brute_force_count(
                [(c.variables, c.rhs) for c in kept], full.universe) == 8
            assert all(sub.check(result.witness))

    def test_product_identity_contradiction(self):
        identity = product_identity(ghz_record_system())
        assert identity.residual_variables == ()
        assert identity.rhs == -1
        assert identity.is_contradiction

    def test_product_identity_subsets(self):
        sys_ = ghz_record_system()
        pair = product_identity(sys_, (1, 2))
        assert pair.residual_variables == ("A2", "A3", "B2", "B3")
        assert pair.rhs == -1
        assert not pair.is_contradiction
        with pytest.raises(ValueError):
            product_identity(sys_, (0,))
        with pytest.raises(ValueError):
            product_identity(sys_, (5,))


class TestParsing:
    def test_round_trip_with_comments(self):
        text = """
        # record products
        B1*B2*B3 = +1
        A2*A3*B1 = -1   # mixed
        A1*A3*B2 = -1
        A1*A2*B3 = 1
        """
        sys_ = parse_constraints(text)
        assert len(sys_.constraints) == 4
        assert str(sys_.constraints[0]) == "B1*B2*B3 = +1"
        assert sys_.constraints[3].rhs == 1

    def test_repeats_cancel(self):
        sys_ = parse_constraints("x*x*y = -1")
        assert sys_.constraints[0].variables == frozenset({"y"})

    @pytest.mark.parametrize("text,bad_line", [
        ("x = 1\nx*y\n", 2),
        ("x = 1\n\nx = y = 1\n", 3),
        ("x = 2\n", 1),
        ("x*3bad = 1\n", 1),
        (" = 1\n", 1),
    ])
    def test_errors_carry_line_numbers(self, text, bad_line):
        with pytest.raises(ConstraintParseError) as info:
            parse_constraints(text)
        assert info.value.line_number == bad_line
        assert f"line {bad_line}:" in str(info.value)

    def test_explicit_universe(self):
        sys_ = parse_constraints("x*y = 1\n", universe=("x", "y", "z"))
        assert sys_.universe == ("x", "y", "z")
        with pytest.raises(ValueError):
            parse_constraints("x*q = 1\n", universe=("x",))


class TestAnalyze:
    def test_record_system_report(self):
        doc = analyze(ghz_record_system())
        assert doc["solve"]["satisfiable"] is False
        assert doc["solve"]["certificate"] == [1, 2, 3, 4]
        assert doc["enumeration"]["count"] == 0
        assert doc["enumeration"]["tested"] == 64
        assert doc["product_identity"]["is_contradiction"] is True
        assert doc["consistency"]["certificate_verified"] is True
        assert doc["consistent"] is True

    def test_satisfiable_report(self):
        doc = analyze(system_of((("x", "y"), -1)))
        assert doc["solve"]["satisfiable"] is True
        assert doc["consistency"]["witness_verified"] is True
        assert doc["consistency"]["solver_enumeration_agree"] is True
        assert doc["consistent"] is True
