"""Discrete-time collision dynamics of the two-qubit system with memory.

One collision step acts on a six-qubit register (S1, S2, M1, M2, B1, B2):
fresh thermal bath qubits are appended, the inner-system exchange acts
first, then each bath qubit couples either directly to its system qubit
(weight ``1-p``) or to the memory qubit which in turn talks to the system
qubit (weight ``p``), and finally the bath qubits are traced out.  The
four routing combinations are mixed deterministically at the
density-matrix level -- the map is the ensemble average, not a sampled
unraveling.

Bath-qubit energy bookkeeping happens before the trace: ``dE1``/``dE2``
are the mixture-averaged changes of the bath-qubit excitation numbers in
units of the level splitting, whose per-time ratio converges to the
steady heat current.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NotXStateError, ParameterError
from .model import ModelParams, thermal_qubit
from .observables import concurrence_wootters, concurrence_x_state
from .qops import NUMBER_OP, embed_operator, partial_trace

_N_REGISTER = 6  # S1, S2, M1, M2, B1, B2
_BATH_1, _BATH_2 = 4, 5


@dataclass(frozen=True)
class CollisionStepResult:
    """State of system+memory after one collision plus bath energy changes."""

    state: np.ndarray
    dE1: float
    dE2: float


@dataclass
class CollisionTrajectory:
    """Per-step observables of a collision run.

    ``dE1``/``dE2`` are per-step bath energy changes (units of the level
    splitting), ``concurrence`` is evaluated on the reduced system state
    after each step, and ``final_state`` is the last 16-dim state.  Full
    intermediate states are kept only when requested.
    """

    params: ModelParams
    dt: float
    dE1: np.ndarray
    dE2: np.ndarray
    concurrence: np.ndarray
    final_state: np.ndarray
    states: list[np.ndarray] = field(default_factory=list)

    @property
    def cumulative_q1(self) -> np.ndarray:
        """Running total of bath-1 energy change."""
        return np.cumsum(self.dE1)

    @property
    def n_steps(self) -> int:
        return self.dE1.size


def exchange_unitary(theta: float) -> np.ndarray:
    """Two-qubit ``exp(-i theta (s+ x s- + s- x s+))`` in closed form.

    Rotates the single-excitation pair |eg>, |ge> by ``theta`` and leaves
    |ee>, |gg> untouched.
    """
    c, s = np.cos(theta), np.sin(theta)
    u = np.eye(4, dtype=complex)
    u[1, 1] = c
    u[2, 2] = c
    u[1, 2] = -1j * s
    u[2, 1] = -1j * s
    return u


def build_interaction_unitaries(params: ModelParams, dt: float) -> dict[str, np.ndarray]:
    """The seven collision unitaries, lifted to the six-qubit register.

    Exchange angles: ``dt`` for the inner-system coupling,
    ``sqrt(gamma_k dt)`` for each bath coupling (both to the system and to
    the memory qubit) and ``upsilon_k dt`` for the memory-system coupling,
    all in units of the inner-system strength.
    """
    if dt <= 0.0:
        raise ParameterError(f"collision duration must be > 0, got {dt}")
    angles = {
        "U": (dt, (0, 1)),
        "W1": (np.sqrt(params.gamma1 * dt), (4, 0)),
        "W2": (np.sqrt(params.gamma2 * dt), (5, 1)),
        "Wt1": (np.sqrt(params.gamma1 * dt), (4, 2)),
        "Wt2": (np.sqrt(params.gamma2 * dt), (5, 3)),
        "Y1": (params.upsilon1 * dt, (0, 2)),
        "Y2": (params.upsilon2 * dt, (1, 3)),
    }
    return {name: embed_operator(exchange_unitary(theta), pair, _N_REGISTER)
            for name, (theta, pair) in angles.items()}


class CollisionEngine:
    """Precompiled one-step map for a fixed parameter set and collision time.

    Single-writer per trajectory; independent engines can run concurrently.
    """

    def __init__(self, params: ModelParams, dt: float):
        self.params = params
        self.dt = dt
        u = build_interaction_unitaries(params, dt)
        branch_ops = {
            1: u["Wt1"] @ u["Y1"] @ u["Wt2"] @ u["Y2"] @ u["U"],
            2: u["W1"] @ u["W2"] @ u["U"],
            3: u["Wt1"] @ u["Y1"] @ u["W2"] @ u["U"],
            4: u["W1"] @ u["Wt2"] @ u["Y2"] @ u["U"],
        }
        p = params.p
        weights = {1: p * p, 2: (1.0 - p) ** 2, 3: p * (1.0 - p), 4: p * (1.0 - p)}
        self.branches = [(weights[k], branch_ops[k]) for k in (1, 2, 3, 4) if weights[k] > 0.0]
        self.fresh_bath = np.kron(thermal_qubit(params.z1), thermal_qubit(params.z2))
        self._n_bath1 = np.diag(embed_operator(NUMBER_OP, (_BATH_1,), _N_REGISTER)).real
        self._n_bath2 = np.diag(embed_operator(NUMBER_OP, (_BATH_2,), _N_REGISTER)).real
        self._bath_occ_1 = (1.0 + params.z1) / 2.0
        self._bath_occ_2 = (1.0 + params.z2) / 2.0

    def step(self, state: np.ndarray) -> CollisionStepResult:
        """Apply the mixed one-step map to a 16-dim system+memory state."""
        state = np.asarray(state)
        if state.shape != (16, 16):
            raise DimensionError(f"collision state must be 16x16, got {state.shape}")
        full = np.kron(state, self.fresh_bath)
        post = np.zeros_like(full)
        for weight, t_op in self.branches:
            post += weight * (t_op @ full @ t_op.conj().T)
        dE1 = float(np.real(np.sum(self._n_bath1 * np.diag(post))) - self._bath_occ_1)
        dE2 = float(np.real(np.sum(self._n_bath2 * np.diag(post))) - self._bath_occ_2)
        new_state = partial_trace(post, keep=(0, 1, 2, 3), dims=[2] * _N_REGISTER)
        return CollisionStepResult(state=new_state, dE1=dE1, dE2=dE2)


def one_step_map(state: np.ndarray, params: ModelParams, dt: float) -> CollisionStepResult:
    """Single mixed collision step (builds a fresh engine; see CollisionEngine)."""
    return CollisionEngine(params, dt).step(state)


def lift_system_state(rho_system: np.ndarray, params: ModelParams) -> np.ndarray:
    """Attach thermal memory qubits to a 4-dim system state."""
    return np.kron(rho_system,
                   np.kron(thermal_qubit(params.z1), thermal_qubit(params.z2)))


def _system_concurrence(state16: np.ndarray) -> float:
    rho_s = partial_trace(state16, keep=(0, 1), dims=[2, 2, 2, 2])
    try:
        return concurrence_x_state(rho_s)
    except NotXStateError:
        return concurrence_wootters(rho_s)


def simulate(initial: np.ndarray, params: ModelParams, dt: float, n_steps: int,
             record_states: bool = False) -> CollisionTrajectory:
    """Iterate the one-step map and record per-step observables.

    ``initial`` may be a 4-dim system state (memory qubits are attached in
    thermal states) or a full 16-dim system+memory state.  After
    relaxation ``dE1/dt`` approximates the steady heat current into
    bath 1.
    """
    if n_steps < 1:
        raise ParameterError(f"n_steps must be >= 1, got {n_steps}")
    initial = np.asarray(initial, dtype=complex)
    if initial.shape == (4, 4):
        state = lift_system_state(initial, params)
    elif initial.shape == (16, 16):
        state = initial
    else:
        raise DimensionError(f"initial state must be 4x4 or 16x16, got {initial.shape}")

    engine = CollisionEngine(params, dt)
    dE1 = np.empty(n_steps)
    dE2 = np.empty(n_steps)
    conc = np.empty(n_steps)
    states: list[np.ndarray] = []
    for k in range(n_steps):
        result = engine.step(state)
        state = result.state
        dE1[k] = result.dE1
        dE2[k] = result.dE2
        conc[k] = _system_concurrence(state)
        if record_states:
            states.append(state)
    return CollisionTrajectory(params=params, dt=dt, dE1=dE1, dE2=dE2,
                               concurrence=conc, final_state=state, states=states)
