"""Model parameters and thermal single-qubit states.

The two system qubits couple to two fermionic-like qubit baths with
temperature parameters ``z1, z2 = <sigma_z>`` of the bath qubits
(``z in [-1, 0]`` thermal, ``z in (0, 1]`` population-inverted).  Couplings
are expressed as ratios to the inner-system exchange strength, which sets
the unit of time: ``gamma_k = Gamma_k / Omega`` (system-bath) and
``upsilon_k = Upsilon_k / Omega`` (memory-system).  ``p`` interpolates
between direct system-bath collisions (p=0) and collisions routed through
the memory qubits (p=1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError
from .qops import SIGMA_Z


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set of one model instance.

    ``omega`` (level splitting, energy unit) and ``Omega`` (inner-system
    coupling, inverse time unit) only fix physical units; all reported
    quantities are scaled so that results depend on them trivially.
    """

    z1: float
    z2: float
    gamma1: float
    gamma2: float
    upsilon1: float = 0.0
    upsilon2: float = 0.0
    p: float = 0.0
    omega: float = 1.0
    Omega: float = 1.0

    def __post_init__(self):
        if not (-1.0 <= self.z1 <= 1.0 and -1.0 <= self.z2 <= 1.0):
            raise ParameterError(f"z1, z2 must lie in [-1, 1], got {self.z1}, {self.z2}")
        if not (0.0 <= self.p <= 1.0):
            raise ParameterError(f"p must lie in [0, 1], got {self.p}")
        if self.gamma1 <= 0.0 or self.gamma2 <= 0.0:
            raise ParameterError(f"gamma1, gamma2 must be > 0, got {self.gamma1}, {self.gamma2}")
        if self.upsilon1 < 0.0 or self.upsilon2 < 0.0:
            raise ParameterError(
                f"upsilon1, upsilon2 must be >= 0, got {self.upsilon1}, {self.upsilon2}")
        if self.omega <= 0.0 or self.Omega <= 0.0:
            raise ParameterError(f"omega, Omega must be > 0, got {self.omega}, {self.Omega}")

    def with_couplings(self, gamma1=None, gamma2=None, upsilon1=None, upsilon2=None) -> "ModelParams":
        """Copy with some coupling ratios replaced."""
        kwargs = {}
        if gamma1 is not None:
            kwargs["gamma1"] = float(gamma1)
        if gamma2 is not None:
            kwargs["gamma2"] = float(gamma2)
        if upsilon1 is not None:
            kwargs["upsilon1"] = float(upsilon1)
        if upsilon2 is not None:
            kwargs["upsilon2"] = float(upsilon2)
        return replace(self, **kwargs)

    @property
    def z_rates(self) -> tuple[float, float, float, float]:
        """Dissipation weights (z1_minus, z1_plus, z2_minus, z2_plus)."""
        return ((1.0 - self.z1) / 2.0, (1.0 + self.z1) / 2.0,
                (1.0 - self.z2) / 2.0, (1.0 + self.z2) / 2.0)


def thermal_qubit(z: float) -> np.ndarray:
    """Thermal (or inverted-thermal) qubit ``(1 + z sigma_z)/2``.

    Diagonal ``((1+z)/2, (1-z)/2)`` in the excited-first basis, so
    ``<sigma_z> = z``; ``z = -1`` is the ground state, ``z = 0`` is
    maximally mixed.
    """
    if not -1.0 <= z <= 1.0:
        raise ParameterError(f"temperature parameter must lie in [-1, 1], got {z}")
    return (np.eye(2, dtype=complex) + z * SIGMA_Z) / 2.0


def z_of_temperature(temperature: float) -> float:
    """Temperature parameter ``z = (1 - e^{1/T})/(1 + e^{1/T})`` for T in units omega/k_B.

    Evaluated as ``-tanh(1/(2T))`` which is algebraically identical and
    immune to overflow for small T.  Returns values in (-1, 0).
    """
    if temperature <= 0.0:
        raise ParameterError(f"temperature must be > 0, got {temperature}")
    return -math.tanh(0.5 / temperature)
