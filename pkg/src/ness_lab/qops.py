"""Dense complex linear algebra for small multi-qubit registers.

Conventions used throughout the package:

* Basis ordering is excited-first: ``|0> = |e>`` with ``sigma_z|0> = +|0>``,
  and ``sigma_minus = |1><0|`` lowers the excitation.  A thermal qubit then
  has ``<sigma_z> = z``.
* Multi-qubit registers are tensor products in a fixed qubit order; qubit 0
  is the leftmost (slowest-varying) factor.
* Density matrices are vectorized column-major (column stacking), so that
  ``vec(A @ rho @ B) = kron(B.T, A) @ vec(rho)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceError,
    DegenerateSteadyStateError,
    DimensionError,
    NumericalRangeError,
)

# Single-qubit operators in the excited-first basis.
IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)   # |e><g|
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |g><e|
NUMBER_OP = SIGMA_PLUS @ SIGMA_MINUS                             # |e><e|

# Exchange coupling sigma_+ x sigma_- + sigma_- x sigma_+ on two qubits.
SIGMA_INT = np.kron(SIGMA_PLUS, SIGMA_MINUS) + np.kron(SIGMA_MINUS, SIGMA_PLUS)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two operators (thin wrapper over ``np.kron``)."""
    return np.kron(a, b)


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-major vectorization of a matrix."""
    return np.asarray(rho).T.reshape(-1)


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec` for a square matrix."""
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionError(f"vector of length {v.size} is not a square matrix")
    return v.reshape(dim, dim).T


def embed_operator(op: np.ndarray, targets: tuple[int, ...], n_qubits: int) -> np.ndarray:
    """Lift an operator acting on ``targets`` to the full ``n_qubits`` register.

    Parameters
    ----------
    op : ndarray
        Operator on ``2**len(targets)`` dimensions, qubit order as in ``targets``.
    targets : tuple of int
        Register positions the operator acts on (distinct, each < n_qubits).
    n_qubits : int
        Size of the full register.
    """
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise DimensionError(f"operator shape {op.shape} does not act on {k} qubits")
    if len(set(targets)) != k or any(t < 0 or t >= n_qubits for t in targets):
        raise DimensionError(f"invalid target qubits {targets} for register of {n_qubits}")
    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    # full acts on qubit order targets + rest; permute back to 0..n-1.
    order = list(targets) + rest
    perm = [order.index(q) for q in range(n_qubits)]
    tensor = full.reshape([2] * (2 * n_qubits))
    tensor = tensor.transpose(perm + [n_qubits + p for p in perm])
    return np.ascontiguousarray(tensor.reshape(2**n_qubits, 2**n_qubits))


def partial_trace(rho: np.ndarray, keep: tuple[int, ...] | list[int],
                  dims: list[int] | tuple[int, ...]) -> np.ndarray:
    """Trace out all factors not listed in ``keep``.

    Parameters
    ----------
    rho : ndarray
        Density matrix on the product space ``prod(dims)``.
    keep : sequence of int
        Indices (into ``dims``) of the factors to retain, in ascending order
        of the output tensor structure.
    dims : sequence of int
        Dimension of each tensor factor.
    """
    dims = list(dims)
    d_total = int(np.prod(dims))
    rho = np.asarray(rho)
    if rho.shape != (d_total, d_total):
        raise DimensionError(f"state of shape {rho.shape} does not match factors {dims}")
    keep = sorted(keep)
    n = len(dims)
    tensor = rho.reshape(dims + dims)
    traced = [q for q in range(n) if q not in keep]
    for offset, q in enumerate(traced):
        axis = q - offset  # earlier traces shrink the index space
        tensor = np.trace(tensor, axis1=axis, axis2=axis + (n - offset))
    d_keep = int(np.prod([dims[q] for q in keep])) if keep else 1
    return tensor.reshape(d_keep, d_keep)


def matrix_exp(m: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(t*m)`` by scaling-and-squaring (scipy backend).

    Raises
    ------
    NumericalRangeError
        If the input contains non-finite entries or the result overflows.
    """
    m = np.asarray(m)
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise NumericalRangeError("matrix exponential input has non-finite entries")
    out = scipy.linalg.expm(m * t)
    if not np.all(np.isfinite(out.real)) or not np.all(np.isfinite(out.imag)):
        raise NumericalRangeError("matrix exponential overflowed")
    return out


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(a - dagger(a))) <= tol)


def check_density_matrix(rho: np.ndarray, *, herm_tol: float = HERMITICITY_TOL,
                         trace_tol: float = TRACE_TOL, psd_tol: float = PSD_TOL) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    herm = np.max(np.abs(rho - dagger(rho)))
    if herm > herm_tol:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = abs(np.trace(rho) - 1.0)
    if tr > trace_tol:
        raise ValueError(f"trace deviates from 1 by {tr:.3e}")
    lam_min = float(np.min(np.linalg.eigvalsh((rho + dagger(rho)) / 2.0)))
    if lam_min < psd_tol:
        raise ValueError(f"not positive semidefinite: min eigenvalue {lam_min:.3e}")


def is_valid_density_matrix(rho: np.ndarray, **kwargs) -> bool:
    try:
        check_density_matrix(rho, **kwargs)
    except ValueError:
        return False
    return True


def hermitize(rho: np.ndarray) -> np.ndarray:
    """Symmetrize and renormalize to unit trace (removes numerical skew)."""
    rho = (rho + dagger(rho)) / 2.0
    return rho / np.trace(rho).real


def trace_functional(dim: int) -> np.ndarray:
    """Row vector t with ``t @ vec(rho) = Tr(rho)`` (column-major vec)."""
    return vec(np.eye(dim, dtype=complex)).conj()


def superop_left(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> a @ rho`` in column-major vectorization."""
    d = a.shape[0]
    return np.kron(np.eye(d, dtype=complex), a)


def superop_right(b: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> rho @ b`` in column-major vectorization."""
    d = b.shape[0]
    return np.kron(b.T, np.eye(d, dtype=complex))


def superop_conjugation(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> a @ rho @ a^dag``."""
    return np.kron(a.conj(), a)


def dissipator_superop(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``D[a]rho = a rho a^dag - (a^dag a rho + rho a^dag a)/2``."""
    ada = dagger(a) @ a
    return superop_conjugation(a) - 0.5 * (superop_left(ada) + superop_right(ada))


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> -i [h, rho]``."""
    return -1j * (superop_left(h) - superop_right(h))


def nullspace_steady_state(superop: np.ndarray, *, residual_tol: float = 1e-10,
                           degeneracy_tol: float = 1e-8) -> np.ndarray:
    """Unique stationary density matrix of a GKSL generator.

    Eigendecomposes the generator, picks the eigenvector of the eigenvalue
    with smallest modulus, rejects degenerate nullspaces, Hermitizes and
    normalizes the result, and verifies the residual ``||L rho||_F``.

    Raises
    ------
    DegenerateSteadyStateError
        If the second-smallest eigenvalue modulus is below ``degeneracy_tol``.
    ConvergenceError
        If the candidate's residual exceeds ``residual_tol``.
    """
    superop = np.asarray(superop)
    d2 = superop.shape[0]
    dim = int(round(np.sqrt(d2)))
    if dim * dim != d2 or superop.shape != (d2, d2):
        raise DimensionError(f"superoperator shape {superop.shape} is not D^2 x D^2")
    evals, evecs = np.linalg.eig(superop)
    order = np.argsort(np.abs(evals))
    if len(order) > 1 and np.abs(evals[order[1]]) < degeneracy_tol:
        raise DegenerateSteadyStateError(
            f"nullspace not unique: two smallest |eigenvalues| "
            f"{np.abs(evals[order[0]]):.3e}, {np.abs(evals[order[1]]):.3e}"
        )
    rho = unvec(evecs[:, order[0]], dim)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise ConvergenceError("nullspace vector is traceless; cannot normalize")
    rho = hermitize(rho / tr)
    residual = float(np.linalg.norm(superop @ vec(rho)))
    if residual > residual_tol:
        raise ConvergenceError(f"steady-state residual {residual:.3e} > {residual_tol:.1e}")
    return rho


def spectral_gap(superop: np.ndarray) -> float:
    """Smallest nonzero decay rate ``min |Re(lambda)|`` of a generator."""
    evals = np.linalg.eigvals(superop)
    rates = np.abs(evals.real)
    nonzero = rates[rates > 1e-10]
    if nonzero.size == 0:
        raise DegenerateSteadyStateError("generator has no decaying eigenmodes")
    return float(np.min(nonzero))
