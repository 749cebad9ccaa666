import numpy as np
import pytest

from ness_lab.errors import DegenerateSteadyStateError, ParameterError
from ness_lab.generators import (
    MEMORYLESS,
    WITH_MEMORY,
    build_memory_generator,
    build_memoryless_generator,
    evolve,
    fast_steady_state,
    fast_steady_states,
    steady_state,
    steady_state_for,
)
from ness_lab.model import ModelParams, thermal_qubit
from ness_lab.observables import (
    analytic_memoryless_steady_state,
    concurrence_x_state,
)
from ness_lab.qops import (
    check_density_matrix,
    nullspace_steady_state,
    partial_trace,
    unvec,
    vec,
)

from conftest import random_density_matrix, random_memoryless_draw


class TestMemorylessGenerator:
    def test_equal_temperature_thermal_product(self):
        params = ModelParams(z1=-0.25, z2=-0.25, gamma1=0.7, gamma2=4.1)
        report = steady_state(build_memoryless_generator(params))
        xi = thermal_qubit(-0.25)
        assert np.max(np.abs(report.rho_system - np.kron(xi, xi))) < 1e-11

    def test_strong_coupling_decouples(self):
        params = ModelParams(z1=0.0, z2=-1.0, gamma1=1000.0, gamma2=1000.0)
        report = steady_state(build_memoryless_generator(params))
        target = np.kron(thermal_qubit(0.0), thermal_qubit(-1.0))
        dist = 0.5 * np.sum(np.abs(np.linalg.eigvalsh(report.rho_system - target)))
        assert dist < 1e-2

    def test_reference_point_values(self):
        params = ModelParams(z1=0.0, z2=-1.0, gamma1=2.0, gamma2=2.0)
        report = steady_state(build_memoryless_generator(params))
        assert abs(abs(report.rho_system[1, 2]) - 0.125) < 1e-11
        assert abs(report.s1 + 0.25) < 1e-11
        assert abs(report.s2 + 0.75) < 1e-11

    def test_hermiticity_preservation(self, rng):
        params = ModelParams(z1=0.3, z2=-0.5, gamma1=1.0, gamma2=2.0)
        gen = build_memoryless_generator(params)
        for _ in range(10):
            a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            herm = a + a.conj().T
            out = gen.apply(herm)
            assert np.max(np.abs(out - out.conj().T)) < 1e-12


class TestMemoryGenerator:
    def test_p0_system_block_matches_memoryless(self, rng):
        params = ModelParams(z1=0.3, z2=-0.8, gamma1=1.5, gamma2=3.0,
                             upsilon1=2.0, upsilon2=0.7, p=0.0)
        gen4 = build_memory_generator(params)
        gen2 = build_memoryless_generator(params)
        mem = np.kron(thermal_qubit(0.1), thermal_qubit(-0.2))
        for _ in range(5):
            rho_s = random_density_matrix(rng, 4)
            lifted = np.kron(rho_s, mem)
            out4 = partial_trace(gen4.apply(lifted), keep=(0, 1), dims=[2, 2, 2, 2])
            assert np.max(np.abs(out4 - gen2.apply(rho_s))) < 1e-12
            # memory factors are frozen at p=0
            out_mem = partial_trace(gen4.apply(lifted), keep=(2, 3), dims=[2, 2, 2, 2])
            assert np.max(np.abs(out_mem)) < 1e-12

    def test_p1_no_direct_system_dissipation(self, rng):
        # at p=1 with upsilon=0 the system block sees only the inner-system
        # exchange Hamiltonian: all damping has moved to the memory qubits
        from ness_lab.qops import SIGMA_INT, commutator_superop
        params = ModelParams(z1=0.0, z2=-1.0, gamma1=2.0, gamma2=2.0,
                             upsilon1=0.0, upsilon2=0.0, p=1.0)
        gen = build_memory_generator(params)
        mem = np.kron(thermal_qubit(0.0), thermal_qubit(-1.0))
        rho_s = random_density_matrix(rng, 4)
        out = partial_trace(gen.apply(np.kron(rho_s, mem)), (0, 1), [2, 2, 2, 2])
        hamiltonian_action = unvec(commutator_superop(SIGMA_INT) @ vec(rho_s), 4)
        assert np.max(np.abs(out - hamiltonian_action)) < 1e-12
        # sanity: the memoryless generator at the same couplings does dissipate
        memoryless_action = build_memoryless_generator(params).apply(rho_s)
        assert np.max(np.abs(memoryless_action - hamiltonian_action)) > 1e-3

    def test_equilibrium_any_p(self):
        z = -0.45
        for p in (0.3, 1.0):
            params = ModelParams(z1=z, z2=z, gamma1=2.2, gamma2=0.9,
                                 upsilon1=1.1, upsilon2=2.6, p=p)
            rho = fast_steady_state(params)
            xi = thermal_qubit(z)
            assert np.max(np.abs(rho - np.kron(np.kron(xi, xi), np.kron(xi, xi)))) < 1e-10

    def test_memory_enhances_concurrence_at_fixed_couplings(self):
        grid = [(0.0, -1.0), (0.5, -1.0), (1.0, -1.0), (-1.0, 0.5), (-0.3, -0.95)]
        for z1, z2 in grid:
            memless = ModelParams(z1=z1, z2=z2, gamma1=2.0, gamma2=2.0)
            c0 = concurrence_x_state(
                nullspace_steady_state(build_memoryless_generator(memless).superop))
            withmem = ModelParams(z1=z1, z2=z2, gamma1=2.0, gamma2=2.0,
                                  upsilon1=2.0, upsilon2=2.0, p=1.0)
            c1 = concurrence_x_state(
                partial_trace(fast_steady_state(withmem), (0, 1), [2, 2, 2, 2]))
            assert c1 >= c0 - 1e-9


class TestSteadyStateSolvers:
    def test_fast_solver_matches_nullspace(self, rng):
        for _ in range(10):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            params = ModelParams(z1=z1, z2=z2, gamma1=g1, gamma2=g2,
                                 upsilon1=float(np.exp(rng.uniform(-1, 1))),
                                 upsilon2=float(np.exp(rng.uniform(-1, 1))),
                                 p=float(rng.uniform(0.1, 1.0)))
            fast = fast_steady_state(params)
            eig = nullspace_steady_state(build_memory_generator(params).superop)
            assert np.max(np.abs(fast - eig)) < 1e-10

    def test_batch_matches_single(self, rng):
        params_list = []
        for _ in range(8):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            params_list.append(ModelParams(z1=z1, z2=z2, gamma1=g1, gamma2=g2,
                                           upsilon1=1.3, upsilon2=0.4, p=0.8))
        states, residuals = fast_steady_states(params_list)
        assert np.all(residuals < 1e-10)
        for state, params in zip(states, params_list):
            assert np.max(np.abs(state - fast_steady_state(params))) < 1e-12

    def test_p0_memory_kind_report(self):
        params = ModelParams(z1=0.1, z2=-0.9, gamma1=2.0, gamma2=1.0,
                             upsilon1=1.0, upsilon2=1.0, p=0.0)
        report = steady_state(build_memory_generator(params))
        oracle = analytic_memoryless_steady_state(0.1, -0.9, 2.0, 1.0).rho
        assert np.max(np.abs(report.rho_system - oracle)) < 1e-10
        assert report.residual < 1e-10
        reduced = partial_trace(report.rho_full, keep=(0, 1), dims=[2, 2, 2, 2])
        assert np.max(np.abs(reduced - oracle)) < 1e-10

    def test_memory_kind_report_concurrence_exceeds_memoryless(self):
        base = dict(z1=0.0, z2=-1.0, gamma1=2.0, gamma2=2.0)
        memoryless = steady_state_for(ModelParams(**base))
        withmem = steady_state_for(ModelParams(**base, upsilon1=2.0, upsilon2=2.0, p=1.0))
        assert withmem.concurrence > memoryless.concurrence
        assert withmem.residual < 1e-10

    def test_scaling_invariance_of_steady_state(self):
        # scaling all couplings and the inner-system strength together is a
        # pure time rescale of the generator and fixes the steady state
        params = ModelParams(z1=0.2, z2=-0.6, gamma1=1.1, gamma2=3.7,
                             upsilon1=0.9, upsilon2=1.8, p=0.5)
        gen = build_memory_generator(params)
        rho = nullspace_steady_state(gen.superop)
        rho_scaled = nullspace_steady_state(7.3 * gen.superop)
        assert np.max(np.abs(rho - rho_scaled)) < 1e-10

    def test_degeneracy_guard_for_decoupled_system(self):
        params = ModelParams(z1=0.3, z2=-0.3, gamma1=1.0, gamma2=1.0,
                             upsilon1=0.0, upsilon2=0.0, p=1.0)
        with pytest.raises(DegenerateSteadyStateError):
            nullspace_steady_state(build_memory_generator(params).superop)


class TestEvolve:
    def test_time_zero_identity(self, rng):
        params = ModelParams(z1=0.0, z2=-0.5, gamma1=1.0, gamma2=1.0)
        gen = build_memoryless_generator(params)
        rho0 = random_density_matrix(rng, 4)
        out = evolve(gen, rho0, [0.0])[0]
        assert np.max(np.abs(out - rho0)) < 1e-14

    def test_long_time_reaches_steady_state(self, rng):
        params = ModelParams(z1=0.4, z2=-0.8, gamma1=1.3, gamma2=2.1)
        gen = build_memoryless_generator(params)
        target = nullspace_steady_state(gen.superop)
        rho0 = random_density_matrix(rng, 4)
        t_final = 50.0 / min(params.gamma1, params.gamma2)
        out = evolve(gen, rho0, [t_final])[0]
        assert np.max(np.abs(out - target)) < 1e-8

    def test_semigroup_property(self, rng):
        params = ModelParams(z1=0.4, z2=-0.8, gamma1=1.3, gamma2=2.1)
        gen = build_memoryless_generator(params)
        rho0 = random_density_matrix(rng, 4)
        via_two_steps = evolve(gen, evolve(gen, rho0, [1.3])[0], [0.9])[0]
        direct = evolve(gen, rho0, [2.2])[0]
        assert np.max(np.abs(via_two_steps - direct)) < 1e-9

    def test_outputs_valid_states(self, rng):
        params = ModelParams(z1=0.0, z2=-1.0, gamma1=2.0, gamma2=2.0,
                             upsilon1=1.0, upsilon2=1.0, p=0.6)
        gen = build_memory_generator(params)
        rho0 = random_density_matrix(rng, 16)
        for out in evolve(gen, rho0, [0.1, 1.0, 10.0]):
            check_density_matrix(out)

    def test_negative_time_rejected(self, rng):
        params = ModelParams(z1=0.0, z2=-1.0, gamma1=2.0, gamma2=2.0)
        gen = build_memoryless_generator(params)
        with pytest.raises(ParameterError):
            evolve(gen, random_density_matrix(rng, 4), [-1.0])
