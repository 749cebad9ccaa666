"""Continuous-time GKSL generators and their steady states.

Two generator kinds are built as dense superoperators acting on
column-major vectorized density matrices:

* ``memoryless`` -- the two system qubits exchange excitations with each
  other and are damped directly by their baths (D = 4).
* ``with_memory`` -- each system qubit additionally couples coherently to a
  retained memory qubit; with probability weight ``p`` the bath damping
  acts on the memory qubit instead of the system qubit (D = 16, register
  order S1, S2, M1, M2).

All rates are expressed in units of the inner-system coupling, which is
set to 1 internally.

Both generators conserve the total excitation number, so every steady
state lives in the excitation-diagonal sector of the vectorized space.
``fast_steady_state`` exploits this with a direct linear solve on that
sector (~0.1 ms for D = 16), which is what parameter sweeps use;
``steady_state`` goes through the eigendecomposition-based nullspace
solver with its degeneracy guard and fills the full observable report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import observables
from .errors import DegenerateSteadyStateError, DimensionError, ParameterError
from .model import ModelParams, thermal_qubit
from .qops import (
    SIGMA_INT,
    SIGMA_MINUS,
    SIGMA_PLUS,
    commutator_superop,
    dissipator_superop,
    embed_operator,
    hermitize,
    matrix_exp,
    nullspace_steady_state,
    partial_trace,
    unvec,
    vec,
)

MEMORYLESS = "memoryless"
WITH_MEMORY = "with_memory"


@dataclass(frozen=True)
class GkslGenerator:
    """A GKSL generator: dense superoperator plus the parameters it encodes."""

    superop: np.ndarray
    params: ModelParams
    kind: str

    @property
    def dim(self) -> int:
        """Matrix side of the underlying state space."""
        return int(round(np.sqrt(self.superop.shape[0])))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Action of the generator on a density matrix."""
        d = self.dim
        if rho.shape != (d, d):
            raise DimensionError(f"state shape {rho.shape} does not match D={d}")
        return unvec(self.superop @ vec(rho), d)


# ---------------------------------------------------------------------------
# Generator components.  Both kinds decompose as a fixed set of parameter-
# independent superoperators combined with scalar weights, which lets sweeps
# reassemble a generator as one tensordot.
# ---------------------------------------------------------------------------

def _memoryless_components() -> np.ndarray:
    ops = [
        commutator_superop(embed_operator(SIGMA_INT, (0, 1), 2)),
        dissipator_superop(embed_operator(SIGMA_MINUS, (0,), 2)),
        dissipator_superop(embed_operator(SIGMA_PLUS, (0,), 2)),
        dissipator_superop(embed_operator(SIGMA_MINUS, (1,), 2)),
        dissipator_superop(embed_operator(SIGMA_PLUS, (1,), 2)),
    ]
    return np.stack(ops)


def _memory_components() -> np.ndarray:
    # Register order: S1=0, S2=1, M1=2, M2=3.
    ops = [commutator_superop(embed_operator(SIGMA_INT, (0, 1), 4)),
           commutator_superop(embed_operator(SIGMA_INT, (0, 2), 4)),
           commutator_superop(embed_operator(SIGMA_INT, (1, 3), 4))]
    for qubit in (0, 1, 2, 3):
        ops.append(dissipator_superop(embed_operator(SIGMA_MINUS, (qubit,), 4)))
        ops.append(dissipator_superop(embed_operator(SIGMA_PLUS, (qubit,), 4)))
    return np.stack(ops)


def _memoryless_weights(params: ModelParams) -> np.ndarray:
    z1m, z1p, z2m, z2p = params.z_rates
    g1, g2 = params.gamma1, params.gamma2
    return np.array([1.0, g1 * z1m, g1 * z1p, g2 * z2m, g2 * z2p])


def _memory_weights(params: ModelParams) -> np.ndarray:
    z1m, z1p, z2m, z2p = params.z_rates
    g1, g2, p = params.gamma1, params.gamma2, params.p
    u1, u2 = params.upsilon1, params.upsilon2
    return np.array([
        1.0, p * u1, p * u2,
        (1.0 - p) * g1 * z1m, (1.0 - p) * g1 * z1p,
        (1.0 - p) * g2 * z2m, (1.0 - p) * g2 * z2p,
        p * g1 * z1m, p * g1 * z1p,
        p * g2 * z2m, p * g2 * z2p,
    ])


class _SectorSolver:
    """Direct steady-state solver on the excitation-diagonal sector.

    Vectorized indices (i, j) with equal excitation count in bra and ket
    form an invariant subspace containing all diagonal matrix elements;
    a unique steady state is obtained by replacing the redundant first row
    of the restricted generator with the trace constraint.
    """

    def __init__(self, n_qubits: int, components: np.ndarray):
        dim = 2 ** n_qubits
        counts = np.array([n_qubits - bin(i).count("1") for i in range(dim)])
        idx_i, idx_j = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
        mask = counts[idx_i] == counts[idx_j]
        alpha = (idx_i + dim * idx_j)[mask]
        self.dim = dim
        self.sector = np.sort(alpha)
        self.size = self.sector.size
        self.diag_positions = np.nonzero(self.sector % (dim + 1) == 0)[0]
        self.blocks = np.ascontiguousarray(components[:, self.sector[:, None], self.sector[None, :]])
        trace_row = np.zeros(self.size, dtype=complex)
        trace_row[self.diag_positions] = 1.0
        self.trace_row = trace_row
        # vec index of rho[0, 0]; its generator row is linearly dependent on
        # the other diagonal rows, so it can carry the trace constraint.
        self.constraint_row = int(np.nonzero(self.sector == 0)[0][0])

    def assemble(self, weights: np.ndarray) -> np.ndarray:
        return np.tensordot(weights, self.blocks, axes=1)

    def solve(self, weights: np.ndarray) -> tuple[np.ndarray, float]:
        """Return (rho, residual) for one weight vector."""
        sector_op = self.assemble(weights)
        system = sector_op.copy()
        system[self.constraint_row, :] = self.trace_row
        rhs = np.zeros(self.size, dtype=complex)
        rhs[self.constraint_row] = 1.0
        x = np.linalg.solve(system, rhs)
        residual = float(np.linalg.norm(sector_op @ x))
        return self._unpack(x), residual

    def solve_batch(self, weight_matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Solve many weight vectors at once; returns (states, residuals)."""
        n = weight_matrix.shape[0]
        sector_ops = np.einsum("nk,kij->nij", weight_matrix, self.blocks)
        systems = sector_ops.copy()
        systems[:, self.constraint_row, :] = self.trace_row
        rhs = np.zeros((n, self.size), dtype=complex)
        rhs[:, self.constraint_row] = 1.0
        xs = np.linalg.solve(systems, rhs[..., None])[..., 0]
        residuals = np.linalg.norm(np.einsum("nij,nj->ni", sector_ops, xs), axis=1)
        states = np.zeros((n, self.dim, self.dim), dtype=complex)
        flat = states.reshape(n, -1)
        flat[:, self._flat_index] = xs
        states = (states + states.conj().transpose(0, 2, 1)) / 2.0
        traces = np.einsum("nii->n", states).real
        return states / traces[:, None, None], residuals

    @property
    def _flat_index(self) -> np.ndarray:
        # self.sector indexes column-major vec; row-major flat index swaps i, j.
        i = self.sector % self.dim
        j = self.sector // self.dim
        return i * self.dim + j

    def _unpack(self, x: np.ndarray) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho.reshape(-1)[self._flat_index] = x
        return hermitize(rho)


_CACHE: dict[str, object] = {}


def _components(kind: str) -> np.ndarray:
    key = f"components:{kind}"
    if key not in _CACHE:
        _CACHE[key] = _memoryless_components() if kind == MEMORYLESS else _memory_components()
    return _CACHE[key]


def _sector_solver(kind: str) -> _SectorSolver:
    key = f"solver:{kind}"
    if key not in _CACHE:
        n_qubits = 2 if kind == MEMORYLESS else 4
        _CACHE[key] = _SectorSolver(n_qubits, _components(kind))
    return _CACHE[key]


def _weights(params: ModelParams, kind: str) -> np.ndarray:
    return _memoryless_weights(params) if kind == MEMORYLESS else _memory_weights(params)


# ---------------------------------------------------------------------------
# Public builders and solvers.
# ---------------------------------------------------------------------------

def build_memoryless_generator(params: ModelParams) -> GkslGenerator:
    """GKSL generator of the two system qubits damped directly by the baths."""
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    superop = np.tensordot(_memoryless_weights(params), _components(MEMORYLESS), axes=1)
    return GkslGenerator(superop=superop, params=params, kind=MEMORYLESS)


def build_memory_generator(params: ModelParams) -> GkslGenerator:
    """GKSL generator of system plus memory qubits (register S1, S2, M1, M2).

    Hamiltonian part: inner-system exchange plus ``p * upsilon_k`` exchange
    between each system qubit and its memory qubit.  Damping acts on the
    system qubits with weight ``(1-p) * gamma_k`` and on the memory qubits
    with weight ``p * gamma_k``, with thermal rates ``(1 -+ z_k)/2``.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    superop = np.tensordot(_memory_weights(params), _components(WITH_MEMORY), axes=1)
    return GkslGenerator(superop=superop, params=params, kind=WITH_MEMORY)


def fast_steady_state(params: ModelParams, kind: str = WITH_MEMORY,
                      residual_tol: float = 1e-10) -> np.ndarray:
    """Steady state via the excitation-sector direct solve (sweep workhorse).

    Each solve is self-validated by its residual against the restricted
    generator, which equals the full-generator residual because the sector
    is invariant.
    """
    solver = _sector_solver(kind)
    rho, residual = solver.solve(_weights(params, kind))
    if residual > residual_tol:
        raise DegenerateSteadyStateError(
            f"sector solve residual {residual:.3e} > {residual_tol:.1e}; "
            "generator may lack a unique steady state")
    return rho


def fast_steady_states(params_list, kind: str = WITH_MEMORY,
                       residual_tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`fast_steady_state`; returns (states, residuals).

    Entries whose residual exceeds ``residual_tol`` are replaced by NaN so
    callers can drop them without aborting a whole sweep.
    """
    solver = _sector_solver(kind)
    weight_matrix = np.stack([_weights(p, kind) for p in params_list])
    states, residuals = solver.solve_batch(weight_matrix)
    bad = residuals > residual_tol
    if np.any(bad):
        states[bad] = np.nan
    return states, residuals


def steady_state(gen: GkslGenerator) -> "observables.SteadyStateReport":
    """Validated steady state plus derived observables.

    Uses the eigendecomposition nullspace solver with its degeneracy guard.
    For the memory kind the report's ``rho_system`` is the reduction over
    the memory qubits.  At ``p = 0`` the memory qubits are decoupled and
    undamped, so the four-qubit nullspace is degenerate; the steady state
    is then assembled exactly as (memoryless steady state) x (thermal
    memory qubits), which has zero residual under the full generator.
    """
    params = gen.params
    if gen.kind == MEMORYLESS:
        rho = nullspace_steady_state(gen.superop)
        residual = float(np.linalg.norm(gen.superop @ vec(rho)))
        return observables.build_report(params, rho, residual)

    if params.p == 0.0:
        system = nullspace_steady_state(build_memoryless_generator(params).superop)
        rho_full = np.kron(system, np.kron(thermal_qubit(params.z1), thermal_qubit(params.z2)))
        residual = float(np.linalg.norm(gen.superop @ vec(rho_full)))
        return observables.build_report(params, system, residual, rho_full=rho_full)

    rho_full = nullspace_steady_state(gen.superop)
    residual = float(np.linalg.norm(gen.superop @ vec(rho_full)))
    system = partial_trace(rho_full, keep=(0, 1), dims=[2, 2, 2, 2])
    return observables.build_report(params, system, residual, rho_full=rho_full)


def steady_state_for(params: ModelParams) -> "observables.SteadyStateReport":
    """Convenience: pick the generator kind from ``params`` and solve."""
    if params.p == 0.0 and params.upsilon1 == 0.0 and params.upsilon2 == 0.0:
        return steady_state(build_memoryless_generator(params))
    return steady_state(build_memory_generator(params))


def evolve(gen: GkslGenerator, rho0: np.ndarray, t_grid) -> list[np.ndarray]:
    """Propagate ``rho0`` to each time in ``t_grid`` (ascending, >= 0)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size and t_grid[0] < 0:
        raise ParameterError("t_grid must be non-negative")
    d = gen.dim
    if rho0.shape != (d, d):
        raise DimensionError(f"initial state shape {rho0.shape} does not match D={d}")
    v0 = vec(rho0)
    out = []
    for t in t_grid:
        propagator = matrix_exp(gen.superop, float(t))
        out.append(unvec(propagator @ v0, d))
    return out
