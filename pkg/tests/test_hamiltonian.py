from __future__ import annotations

import math
import tracemalloc

import numpy as np
import pytest
import scipy.linalg

from qmlsim.errors import ResourceLimitError
from qmlsim.hamiltonian import (
    PauliCouplingModel,
    TrotterPlan,
    build_dense,
    build_terms,
    embed_operator,
    exact_evolve,
    exp_gate_execute,
    trotter_evolve,
)
from qmlsim.statevec import StateVector, new_basis_state

from conftest import oracle_model_dense, random_model, random_state


def ising_model(n: int, e0: float = 1.0, b: float = 1.0) -> PauliCouplingModel:
    """Chain with sigma_z sigma_z coupling and transverse x field."""
    model = PauliCouplingModel(n)
    e2 = np.zeros((3, 3))
    e2[2, 2] = e0
    for i in range(1, n):
        model.add_coupling(i, i + 1, 1.0, e2)
    for i in range(1, n + 1):
        model.add_field(i, (b, 0.0, 0.0))
    return model


class TestModel:
    def test_transpose_rule_accepts_both_orientations(self):
        e2 = np.arange(9.0).reshape(3, 3)
        m = PauliCouplingModel(3)
        m.add_coupling(1, 2, 0.5, e2)
        m.add_coupling(2, 1, 0.5, e2.T)  # consistent, no-op
        assert len(m.couplings) == 1

    def test_transpose_rule_rejects_conflict(self):
        e2 = np.arange(9.0).reshape(3, 3)
        m = PauliCouplingModel(3)
        m.add_coupling(1, 2, 0.5, e2)
        with pytest.raises(ValueError, match="conflicting"):
            m.add_coupling(2, 1, 0.5, e2)

    def test_swapped_orientation_builds_same_matrix(self):
        rng = np.random.default_rng(0)
        e2 = rng.uniform(-1, 1, (3, 3))
        a = PauliCouplingModel(2)
        a.add_coupling(1, 2, 0.7, e2)
        b = PauliCouplingModel(2)
        b.add_coupling(2, 1, 0.7, e2.T)
        assert np.allclose(build_dense(a), build_dense(b), atol=0)

    def test_rejects_diagonal_coupling(self):
        with pytest.raises(ValueError, match="distinct"):
            PauliCouplingModel(2).add_coupling(1, 1, 1.0, np.eye(3))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            PauliCouplingModel(2).add_field(1, (np.inf, 0, 0))


class TestBuildDense:
    def test_single_qubit_x_field(self):
        m = PauliCouplingModel(1)
        m.add_field(1, (2.5, 0, 0))
        assert np.allclose(build_dense(m), [[0, 2.5], [2.5, 0]])

    def test_two_qubit_ising_zz(self):
        m = PauliCouplingModel(2)
        e2 = np.zeros((3, 3))
        e2[2, 2] = 3.0
        m.add_coupling(1, 2, 1.0, e2)
        assert np.allclose(build_dense(m), np.diag([3.0, -3.0, -3.0, 3.0]))

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_kron_chain_oracle(self, seed):
        m = random_model(3, seed=seed)
        assert np.max(np.abs(build_dense(m) - oracle_model_dense(m))) < 1e-12

    def test_hermitian(self):
        h = build_dense(random_model(4, seed=9))
        assert np.max(np.abs(h - h.conj().T)) < 1e-12

    def test_cap(self):
        with pytest.raises(ResourceLimitError, match="cap"):
            build_dense(PauliCouplingModel(13))

    def test_terms_sum_to_dense(self):
        m = random_model(4, seed=2)
        total = sum(
            embed_operator(t.matrix, t.targets, 4) for t in build_terms(m)
        )
        assert np.max(np.abs(total - build_dense(m))) < 1e-10


class TestExactEvolve:
    def test_t_zero_is_identity(self):
        h = build_dense(random_model(3, seed=1))
        amps = random_state(3, seed=1)
        out = exact_evolve(h, 0.0, StateVector(3, amps))
        assert np.max(np.abs(out.amplitudes - amps)) < 1e-12

    def test_x_field_closed_form(self):
        b, t = 0.8, 1.3
        m = PauliCouplingModel(1)
        m.add_field(1, (b, 0, 0))
        out = exact_evolve(build_dense(m), t, new_basis_state(1, 0))
        want = [math.cos(b * t), -1j * math.sin(b * t)]
        assert np.max(np.abs(out.amplitudes - want)) < 1e-12

    def test_matches_scaling_and_squaring_oracle(self):
        h = build_dense(random_model(3, seed=7))
        amps = random_state(3, seed=7)
        got = exact_evolve(h, 0.7, StateVector(3, amps))
        want = scipy.linalg.expm(-0.7j * h) @ amps
        assert np.max(np.abs(got.amplitudes - want)) < 1e-8
        assert abs(got.norm() - 1.0) < 1e-10


class TestTrotter:
    def test_t_zero_identity(self):
        m = random_model(3, seed=3)
        plan = TrotterPlan(order="2", t=0.0, n=4, terms=build_terms(m))
        amps = random_state(3, seed=3)
        out, _ = trotter_evolve(plan, StateVector(3, amps))
        assert np.max(np.abs(out.amplitudes - amps)) < 1e-12

    def test_commuting_terms_exact_at_any_n(self):
        # zz couplings only: all terms commute, product formula is exact
        m = PauliCouplingModel(3)
        e2 = np.zeros((3, 3))
        e2[2, 2] = 1.0
        m.add_coupling(1, 2, 0.9, e2)
        m.add_coupling(2, 3, 0.4, e2)
        amps = random_state(3, seed=5)
        exact = exact_evolve(build_dense(m), 1.7, StateVector(3, amps))
        for order in ("1", "2", "4"):
            plan = TrotterPlan(order=order, t=1.7, n=1, terms=build_terms(m))
            got, _ = trotter_evolve(plan, StateVector(3, amps))
            assert np.max(np.abs(got.amplitudes - exact.amplitudes)) < 1e-10

    def _errors(self, order: str, slices: list[int]) -> list[float]:
        m = ising_model(2)
        terms = build_terms(m)
        psi0 = new_basis_state(2, 0)
        exact = exact_evolve(build_dense(m), 1.0, psi0)
        errs = []
        for n in slices:
            plan = TrotterPlan(order=order, t=1.0, n=n, terms=terms)
            got, _ = trotter_evolve(plan, psi0)
            errs.append(float(np.linalg.norm(got.amplitudes - exact.amplitudes)))
        return errs

    @pytest.mark.parametrize("order,want_slope", [("1", -1.0), ("2", -2.0), ("4", -4.0)])
    def test_error_scaling_slopes(self, order, want_slope):
        slices = [8, 16, 32, 64, 128]
        errs = self._errors(order, slices)
        slope = np.polyfit(np.log(slices), np.log(errs), 1)[0]
        assert abs(slope - want_slope) < 0.3

    def test_error_ordering_at_fixed_n(self):
        for n in (8, 32):
            e1 = self._errors("1", [n])[0]
            e2 = self._errors("2", [n])[0]
            e4 = self._errors("4", [n])[0]
            assert e4 <= e2 <= e1

    def test_norm_preserved_many_slices(self):
        m = random_model(4, seed=11)
        plan = TrotterPlan(order="2", t=2.0, n=2000, terms=build_terms(m))
        out, _ = trotter_evolve(plan, new_basis_state(4, 0))
        assert abs(out.norm() - 1.0) < 1e-9

    def test_order4_degrades_with_warning_on_wide_support(self):
        # four pair terms spanning 5 qubits: correction cannot be built
        m = random_model(5, seed=13, chain_only=True)
        plan = TrotterPlan(order="4", t=0.5, n=4, terms=build_terms(m))
        out, warnings = trotter_evolve(plan, new_basis_state(5, 0))
        assert warnings and "order-4" in warnings[0]
        assert abs(out.norm() - 1.0) < 1e-9

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError, match="order"):
            TrotterPlan(order="3", t=1.0, n=1, terms=[])


class TestExpGate:
    def test_exact_mode_routes_to_eigendecomposition(self):
        m = random_model(2, seed=17)
        amps = random_state(2, seed=17)
        got, _ = exp_gate_execute(StateVector(2, amps), m, 1.0, order="exact")
        want = exact_evolve(build_dense(m), 1.0, StateVector(2, amps))
        assert np.max(np.abs(got.amplitudes - want.amplitudes)) == 0.0

    def test_order4_close_to_exact(self):
        m = random_model(2, seed=0)
        got, _ = exp_gate_execute(new_basis_state(2, 0), m, 1.0, n=16, order="4")
        want = exact_evolve(build_dense(m), 1.0, new_basis_state(2, 0))
        assert np.max(np.abs(got.amplitudes - want.amplitudes)) < 1e-6

    def test_fourteen_qubits_never_allocates_dense_matrix(self):
        m = ising_model(14, e0=0.3, b=0.7)
        state = new_basis_state(14, 0)
        tracemalloc.start()
        exp_gate_execute(state, m, 0.3, n=8, order="2")
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        # a dense 4**14-entry operator alone would be ~4.3 GB
        assert peak < 512 * 1024 * 1024
