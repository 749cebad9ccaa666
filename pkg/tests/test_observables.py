import numpy as np
import pytest

from ness_lab import observables as obs
from ness_lab.errors import NotXStateError, ParameterError
from ness_lab.generators import (
    build_memory_generator,
    build_memoryless_generator,
    fast_steady_state,
    steady_state,
)
from ness_lab.model import ModelParams, thermal_qubit
from ness_lab.qops import nullspace_steady_state

from conftest import random_memoryless_draw


def lift_with_thermal_memory(rho_system, z1, z2):
    return np.kron(rho_system, np.kron(thermal_qubit(z1), thermal_qubit(z2)))


class TestAnalyticSteadyState:
    def test_equilibrium_no_correlations(self):
        ana = obs.analytic_memoryless_steady_state(-0.4, -0.4, 1.0, 7.0)
        xi = thermal_qubit(-0.4)
        assert ana.eta == 0.0
        assert np.max(np.abs(ana.rho - np.kron(xi, xi))) < 1e-15

    def test_reference_point(self):
        ana = obs.analytic_memoryless_steady_state(0.0, -1.0, 2.0, 2.0)
        assert abs(ana.eta - 0.125) < 1e-15
        assert abs(ana.s1 + 0.25) < 1e-15
        assert abs(ana.s2 + 0.75) < 1e-15

    def test_strong_coupling_limit(self):
        ana = obs.analytic_memoryless_steady_state(0.0, -1.0, 1000.0, 1000.0)
        assert abs(ana.eta - 1e6 / (2000.0 * 1000004.0)) < 1e-18
        target = np.kron(thermal_qubit(0.0), thermal_qubit(-1.0))
        # trace distance
        dist = 0.5 * np.sum(np.abs(np.linalg.eigvalsh(ana.rho - target)))
        assert dist < 1e-2

    def test_chi_structure(self, rng):
        for _ in range(20):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            ana = obs.analytic_memoryless_steady_state(z1, z2, g1, g2)
            assert abs(np.trace(ana.chi)) < 1e-15
            assert abs(ana.chi[1, 2] - 1j * ana.eta) < 1e-15
            assert abs(ana.rho[1, 2]) - abs(ana.eta) < 1e-15

    def test_validity_over_parameter_space(self, rng):
        from ness_lab.qops import check_density_matrix
        for _ in range(100):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            check_density_matrix(obs.analytic_memoryless_steady_state(z1, z2, g1, g2).rho)

    def test_nonpositive_coupling(self):
        with pytest.raises(ParameterError):
            obs.analytic_memoryless_steady_state(0.0, -1.0, 0.0, 1.0)


class TestConcurrenceXState:
    def test_formula_arithmetic(self):
        rho = np.diag([0.2, 0.3, 0.3, 0.2]).astype(complex)
        rho[1, 2] = 0.3
        rho[2, 1] = 0.3
        assert abs(obs.concurrence_x_state(rho) - 0.2) < 1e-15

    def test_product_state_separable(self):
        rho = np.kron(thermal_qubit(-0.3), thermal_qubit(0.6))
        assert obs.concurrence_x_state(rho) == 0.0

    def test_bell_state_maximal(self):
        psi = np.zeros(4, dtype=complex)
        psi[1] = psi[2] = 1 / np.sqrt(2)
        assert abs(obs.concurrence_x_state(np.outer(psi, psi.conj())) - 1.0) < 1e-14

    def test_rejects_non_x_state(self, rng):
        rho = np.kron(thermal_qubit(-0.3), thermal_qubit(0.6))
        rho = rho.astype(complex)
        rho[0, 1] = rho[1, 0] = 0.05
        with pytest.raises(NotXStateError):
            obs.concurrence_x_state(rho)


class TestConcurrenceWootters:
    def test_agrees_with_x_state_formula(self, rng):
        for _ in range(100):
            # random valid X state: diagonal + one coherence within PSD range
            d = rng.dirichlet(np.ones(4))
            c23 = rng.uniform(0, np.sqrt(d[1] * d[2])) * np.exp(2j * np.pi * rng.uniform())
            rho = np.diag(d).astype(complex)
            rho[1, 2] = c23
            rho[2, 1] = np.conj(c23)
            assert abs(obs.concurrence_wootters(rho)
                       - obs.concurrence_x_state(rho)) < 1e-10

    def test_werner_threshold(self):
        psi = np.zeros(4, dtype=complex)
        psi[1], psi[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        bell = np.outer(psi, psi.conj())
        for w in (1 / 3, 0.2, 0.5, 0.9):
            rho = w * bell + (1 - w) * np.eye(4) / 4
            expected = max(0.0, (3 * w - 1) / 2)
            assert abs(obs.concurrence_wootters(rho) - expected) < 1e-12

    def test_maximally_mixed(self):
        assert obs.concurrence_wootters(np.eye(4) / 4) == 0.0

    def test_local_unitary_invariance(self, rng):
        from scipy.stats import unitary_group
        u = unitary_group(dim=2, seed=7)
        for _ in range(20):
            d = rng.dirichlet(np.ones(4))
            c = rng.uniform(0, np.sqrt(d[1] * d[2]))
            rho = np.diag(d).astype(complex)
            rho[1, 2] = c
            rho[2, 1] = c
            local = np.kron(u.rvs(), u.rvs())
            rotated = local @ rho @ local.conj().T
            assert abs(obs.concurrence_wootters(rotated)
                       - obs.concurrence_wootters(rho)) < 1e-10


class TestHeatCurrent:
    def test_reference_value_and_maximum(self):
        q = obs.heat_current_analytic(0.0, -1.0, 2.0, 2.0)
        assert abs(q + 0.25) < 1e-15
        assert abs(abs(q) - 0.25 * abs(0.0 - (-1.0))) < 1e-15

    def test_equilibrium_zero(self):
        assert obs.heat_current_analytic(-0.5, -0.5, 1.0, 9.0) == 0.0

    def test_heat_insulation_at_strong_coupling(self):
        q = obs.heat_current_analytic(0.0, -1.0, 1000.0, 2.0)
        expected = -2.0 * 2000.0 / (1002.0 * 2004.0)
        assert abs(q - expected) < 1e-15
        # decays ~ 1/gamma1
        q2 = obs.heat_current_analytic(0.0, -1.0, 2000.0, 2.0)
        assert abs(q2 / q) == pytest.approx(0.5, rel=0.01)

    def test_dissipator_route_reduces_to_closed_form(self, rng):
        for _ in range(50):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            params = ModelParams(z1=z1, z2=z2, gamma1=g1, gamma2=g2)
            rho = nullspace_steady_state(build_memoryless_generator(params).superop)
            lifted = lift_with_thermal_memory(rho, z1, z2)
            q = obs.heat_current_dissipator(lifted, params, bath=1)
            assert abs(q - obs.heat_current_analytic(z1, z2, g1, g2)) < 1e-9

    def test_thermal_qubit_detailed_balance(self):
        # a qubit thermal at its own bath temperature exchanges nothing
        params = ModelParams(z1=-0.6, z2=-0.6, gamma1=3.0, gamma2=3.0,
                             upsilon1=1.0, upsilon2=1.0, p=0.4)
        xi = thermal_qubit(-0.6)
        rho = np.kron(np.kron(xi, xi), np.kron(xi, xi))
        assert abs(obs.heat_current_dissipator(rho, params, bath=1)) < 1e-14
        assert abs(obs.heat_current_dissipator(rho, params, bath=2)) < 1e-14

    def test_matches_collision_rate_at_full_memory(self):
        from ness_lab.collision import simulate
        params = ModelParams(z1=0.0, z2=-1.0, gamma1=2.0, gamma2=2.0,
                             upsilon1=2.0, upsilon2=2.0, p=1.0)
        state = fast_steady_state(params)
        q_diss = obs.heat_current_dissipator(state, params, bath=1)
        rates = []
        for dt in (1e-3, 2e-3):
            traj = simulate(state, params, dt, int(round(2.0 / dt)))
            rates.append(np.mean(traj.dE1[-200:]) / dt)
        q_extrapolated = 2 * rates[0] - rates[1]
        assert abs(q_extrapolated - q_diss) / abs(q_diss) < 0.01

    def test_energy_balance_all_p(self, rng):
        for _ in range(20):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            params = ModelParams(z1=z1, z2=z2, gamma1=g1, gamma2=g2,
                                 upsilon1=float(np.exp(rng.uniform(-2, 2))),
                                 upsilon2=float(np.exp(rng.uniform(-2, 2))),
                                 p=float(rng.uniform(0.05, 1.0)))
            state = fast_steady_state(params)
            q1 = obs.heat_current_dissipator(state, params, bath=1)
            q2 = obs.heat_current_dissipator(state, params, bath=2)
            assert abs(q1 + q2) < 1e-9


class TestCriticalEntanglementCondition:
    def test_marginal_on_boundary_couplings(self):
        g1 = 2.0 / np.sqrt(2.0)
        g2 = 4.0 * np.sqrt(2.0) - g1
        z2 = -4.0 / (3.0 * np.sqrt(2.0))
        params = ModelParams(z1=0.0, z2=z2, gamma1=g1, gamma2=g2)
        rho = nullspace_steady_state(build_memoryless_generator(params).superop)
        margin = abs(rho[1, 2]) - np.sqrt(rho[0, 0].real * rho[3, 3].real)
        assert abs(margin) < 1e-10
        assert obs.concurrence_x_state(rho) < 1e-9

    def test_equilibrium_false(self):
        rho = np.kron(thermal_qubit(-0.2), thermal_qubit(-0.2))
        assert not obs.critical_entanglement_condition(rho, 0.0)

    def test_equivalence_on_random_steady_states(self, rng):
        mismatches = 0
        for _ in range(200):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            ana = obs.analytic_memoryless_steady_state(z1, z2, g1, g2)
            q = -2.0 * ana.eta
            condition = obs.critical_entanglement_condition(ana.rho, q)
            entangled = obs.concurrence_x_state(ana.rho) > 0.0
            mismatches += condition != entangled
        assert mismatches == 0


class TestSteadyStateReports:
    def test_residual_and_invariants(self, rng):
        for _ in range(10):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            report = steady_state(build_memoryless_generator(
                ModelParams(z1=z1, z2=z2, gamma1=g1, gamma2=g2)))
            assert report.residual < 1e-10
            assert 0.0 <= report.concurrence <= 1.0
            # coherence equals eta in magnitude, and |q| = 2 |rho_23|
            assert abs(abs(report.rho_system[1, 2])
                       - abs(obs.analytic_memoryless_steady_state(z1, z2, g1, g2).eta)) < 1e-10
            assert abs(abs(report.q_dot) - 2 * abs(report.rho_system[1, 2])) < 1e-9

    def test_temperature_gradient_ordering(self, rng):
        for _ in range(100):
            z1, z2, g1, g2 = random_memoryless_draw(rng)
            ana = obs.analytic_memoryless_steady_state(z1, z2, g1, g2)
            lo, hi = sorted((z1, z2))
            s_inner = sorted((ana.s1, ana.s2))
            assert lo - 1e-12 <= s_inner[0] <= s_inner[1] <= hi + 1e-12
            if z1 < z2:
                assert z1 - 1e-12 <= ana.s1 <= ana.s2 <= z2 + 1e-12
            else:
                assert z2 - 1e-12 <= ana.s2 <= ana.s1 <= z1 + 1e-12

    def test_memory_steady_state_equilibrium_any_p(self):
        z = -0.55
        for p in (0.2, 0.7, 1.0):
            params = ModelParams(z1=z, z2=z, gamma1=1.4, gamma2=2.8,
                                 upsilon1=0.8, upsilon2=1.9, p=p)
            report = steady_state(build_memory_generator(params))
            xi = thermal_qubit(z)
            target = np.kron(np.kron(xi, xi), np.kron(xi, xi))
            assert np.max(np.abs(report.rho_full - target)) < 1e-10
            assert abs(report.q_dot) < 1e-12
