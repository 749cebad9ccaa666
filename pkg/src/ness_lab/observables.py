"""Physical observables: concurrence, heat currents, local temperatures.

The closed-form steady state of the memoryless model doubles as the
oracle against which the numerical solvers are validated.  In the
excited-first product basis (|ee>, |eg>, |ge>, |gg>) it is an X state
with the single coherence ``rho_23 = +i * eta`` (1-indexed positions
(2,3)/(3,2)); the sign was fixed by requiring agreement with the
nullspace solve of the generator and is a pure phase convention --
concurrence and heat current depend only on ``|eta|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotXStateError, ParameterError
from .model import ModelParams, thermal_qubit
from .qops import NUMBER_OP, SIGMA_Y, SIGMA_Z, dagger, embed_operator

X_STATE_TOL = 1e-10

# Positions that must vanish in a two-qubit X state with empty corners;
# both (i, j) and (j, i) are checked.
_OFF_X_CHECK = [(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)]


@dataclass(frozen=True)
class AnalyticSteadyState:
    """Closed-form memoryless steady state and its building blocks."""

    eta: float
    chi: np.ndarray
    s1: float
    s2: float
    rho: np.ndarray


@dataclass(frozen=True)
class SteadyStateReport:
    """Steady state of the two system qubits plus derived observables.

    ``q_dot`` is the scaled heat current into bath 1 (dimensionless,
    divide-by-omega-Omega convention); ``s1``/``s2`` are the local
    ``<sigma_z>`` values of the system qubits; ``residual`` is the
    Frobenius norm of the generator applied to the steady state.
    """

    rho_system: np.ndarray
    concurrence: float
    q_dot: float
    s1: float
    s2: float
    residual: float
    rho_full: np.ndarray | None = None


def analytic_memoryless_steady_state(z1: float, z2: float,
                                     g1: float, g2: float) -> AnalyticSteadyState:
    """Closed-form steady state of the memoryless two-qubit model.

    ``eta = (z1 - z2) g1 g2 / ((g1 + g2)(g1 g2 + 4))`` measures the
    steady-state coherence; the state is the product of local thermal
    states at ``s1 = z1 - 4 eta/g1`` and ``s2 = z2 + 4 eta/g2`` plus the
    traceless correlation matrix ``chi``.
    """
    if g1 <= 0.0 or g2 <= 0.0:
        raise ParameterError(f"couplings must be > 0, got {g1}, {g2}")
    eta = (z1 - z2) * g1 * g2 / ((g1 + g2) * (g1 * g2 + 4.0))
    s1 = z1 - 4.0 * eta / g1
    s2 = z2 + 4.0 * eta / g2
    chi = np.array([
        [-eta**2, 0.0, 0.0, 0.0],
        [0.0, eta**2, 1j * eta, 0.0],
        [0.0, -1j * eta, eta**2, 0.0],
        [0.0, 0.0, 0.0, -eta**2],
    ], dtype=complex)
    rho = np.kron(thermal_qubit(s1), thermal_qubit(s2)) + chi
    return AnalyticSteadyState(eta=eta, chi=chi, s1=s1, s2=s2, rho=rho)


def concurrence_x_state(rho: np.ndarray) -> float:
    """Concurrence ``2 max(0, |rho_23| - sqrt(rho_11 rho_44))`` of an X state.

    Requires the corner coherences rho_14, rho_41 and all non-X entries to
    vanish (to 1e-10); general states must go through
    :func:`concurrence_wootters` instead.
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise NotXStateError(f"expected a two-qubit state, got shape {rho.shape}")
    for i, j in _OFF_X_CHECK:
        if abs(rho[i, j]) > X_STATE_TOL or abs(rho[j, i]) > X_STATE_TOL:
            raise NotXStateError(
                f"entry ({i+1},{j+1}) = {rho[i, j]:.3e} violates the X shape")
    value = 2.0 * (abs(rho[1, 2]) - np.sqrt(max(rho[0, 0].real, 0.0) * max(rho[3, 3].real, 0.0)))
    return float(min(max(value, 0.0), 1.0))


def concurrence_wootters(rho: np.ndarray) -> float:
    """Concurrence of an arbitrary two-qubit state (spin-flip eigenvalues)."""
    rho = np.asarray(rho)
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    r = rho @ yy @ rho.conj() @ yy
    evals = np.linalg.eigvals(r)
    lam = np.sqrt(np.abs(np.sort(evals.real)))  # tiny negatives are roundoff
    return float(max(0.0, lam[3] - lam[2] - lam[1] - lam[0]))


def local_sigma_z(rho: np.ndarray, qubit: int, n_qubits: int) -> float:
    """Expectation of ``sigma_z`` on one qubit of a register state."""
    op = embed_operator(SIGMA_Z, (qubit,), n_qubits)
    return float(np.trace(op @ rho).real)


def heat_current_analytic(z1: float, z2: float, g1: float, g2: float) -> float:
    """Scaled steady heat current into bath 1 of the memoryless model: -2 eta."""
    return -2.0 * analytic_memoryless_steady_state(z1, z2, g1, g2).eta


def _bath_exchange(rho: np.ndarray, gamma: float, z: float,
                   qubit: int, n_qubits: int) -> float:
    """Scaled energy-change rate of one bath coupled to ``qubit`` of ``rho``.

    ``gamma * (z_minus <n> - z_plus <1 - n>)``: detailed-balance imbalance
    between emission into and absorption from the bath.
    """
    n_op = embed_operator(NUMBER_OP, (qubit,), n_qubits)
    occ = float(np.trace(n_op @ rho).real)
    z_minus, z_plus = (1.0 - z) / 2.0, (1.0 + z) / 2.0
    return gamma * (z_minus * occ - z_plus * (1.0 - occ))


def heat_current_dissipator(rho_sm_steady: np.ndarray, params: ModelParams,
                            bath: int = 1) -> float:
    """Scaled steady heat current into one bath, from its damping channels.

    Bath ``k`` exchanges excitations with the system qubit (weight
    ``(1-p) gamma_k``) and with the memory qubit (weight ``p gamma_k``);
    the current is the weighted sum of the two detailed-balance
    imbalances, evaluated on the 16-dimensional system+memory steady
    state.  Reduces to ``-2 eta`` at p = 0.
    """
    rho_sm_steady = np.asarray(rho_sm_steady)
    if rho_sm_steady.shape != (16, 16):
        raise ParameterError(
            f"expected the 16-dim system+memory steady state, got {rho_sm_steady.shape}")
    if bath not in (1, 2):
        raise ParameterError(f"bath must be 1 or 2, got {bath}")
    gamma = params.gamma1 if bath == 1 else params.gamma2
    z = params.z1 if bath == 1 else params.z2
    sys_qubit = 0 if bath == 1 else 1
    mem_qubit = 2 if bath == 1 else 3
    direct = _bath_exchange(rho_sm_steady, gamma, z, sys_qubit, 4)
    via_memory = _bath_exchange(rho_sm_steady, gamma, z, mem_qubit, 4)
    return (1.0 - params.p) * direct + params.p * via_memory


def critical_entanglement_condition(rho_steady: np.ndarray, q_dot: float) -> bool:
    """Memoryless criterion ``|q_dot| > 2 sqrt(rho_11 rho_44)``.

    For memoryless steady states (X states with ``|rho_23| = |q_dot|/2``)
    this is equivalent to nonzero concurrence.
    """
    rho_steady = np.asarray(rho_steady)
    p11 = max(rho_steady[0, 0].real, 0.0)
    p44 = max(rho_steady[3, 3].real, 0.0)
    return bool(abs(q_dot) > 2.0 * np.sqrt(p11 * p44))


def build_report(params: ModelParams, rho_system: np.ndarray, residual: float,
                 rho_full: np.ndarray | None = None) -> SteadyStateReport:
    """Assemble the observable report for a solved steady state."""
    try:
        conc = concurrence_x_state(rho_system)
    except NotXStateError:
        conc = concurrence_wootters(rho_system)
    if rho_full is not None:
        q_dot = heat_current_dissipator(rho_full, params, bath=1)
    else:
        q_dot = _bath_exchange(rho_system, params.gamma1, params.z1, 0, 2)
    return SteadyStateReport(
        rho_system=rho_system,
        concurrence=conc,
        q_dot=q_dot,
        s1=local_sigma_z(rho_system, 0, 2),
        s2=local_sigma_z(rho_system, 1, 2),
        residual=residual,
        rho_full=rho_full,
    )
