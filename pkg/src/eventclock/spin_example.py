"""The two-spin reference model: a qubit measured by a qubit.

The system starts in a|up> + b|down>, the detector in |up'>, and the coupling
g * sigma_x' (1 - sigma_z) rotates the detector exactly when the system is in
|down>.  Everything about the model is closed-form, which makes it the
cross-check workhorse for the rest of the package: the detection probability,
per-step survival under repeated measurement, and the energy spread all have
exact expressions.

Two coupling conventions are provided because they disagree about what
happens at the end of the window:

* ``"paper"``: g = pi/T.  The coupled branch completes a full 2*pi rotation
  over [0, T], so the device is maximally correlated at t = T/4 and back to
  uncorrelated at T/2 and T.
* ``"flip_at_t"``: g = pi/(4T).  The rotation reaches pi/2 exactly at t = T,
  so the device is fully correlated at the end of the coupling window.

The default is ``"paper"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, pi

import numpy as np

from .detector import CorrelationSpec
from .hilbert import (
    DenseOperator,
    PiecewiseHamiltonian,
    StateVector,
    basis_state,
    identity,
    sigma_x,
    sigma_z,
    tensor,
)

__all__ = [
    "GCONVENTIONS",
    "SpinExampleConfig",
    "SpinModel",
    "coupling_strength",
    "build",
    "analytic_survival",
]

GCONVENTIONS = ("paper", "flip_at_t")


@dataclass(frozen=True)
class SpinExampleConfig:
    """Parameters of the two-spin model.

    ``delta`` is the measurement interval used by protocol runs; it defaults
    to an eighth of the coupling window.
    """

    a: complex = 0.0
    b: complex = 1.0
    total_time: float = 1.0
    g_convention: str = "paper"
    delta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        if self.g_convention not in GCONVENTIONS:
            raise ValueError(
                f"g_convention must be one of {GCONVENTIONS}, got {self.g_convention!r}"
            )
        weight = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(weight - 1.0) > 1e-12:
            raise ValueError(f"|a|^2 + |b|^2 must equal 1, got {weight!r}")
        if self.delta is None:
            object.__setattr__(self, "delta", self.total_time / 8.0)
        elif self.delta < 0:
            # delta = 0 stays legal: the closed forms are defined there even
            # though a protocol schedule requires a positive interval.
            raise ValueError("delta must be non-negative")


def coupling_strength(config: SpinExampleConfig) -> float:
    """Coupling constant g for the configured convention."""
    if config.g_convention == "paper":
        return pi / config.total_time
    return pi / (4.0 * config.total_time)


@dataclass(frozen=True, eq=False)
class SpinModel:
    """Assembled two-spin scenario, ready for the detector and protocol APIs."""

    psi0: StateVector
    hamiltonian: PiecewiseHamiltonian
    correlation: CorrelationSpec
    coupling: float
    config: SpinExampleConfig


def build(config: SpinExampleConfig = SpinExampleConfig()) -> SpinModel:
    """Construct the initial state, coupling Hamiltonian and correlation spec.

    The system qubit is the slow Kronecker factor, the detector qubit the
    fast one.  The generator is g * (1 - sigma_z) (x) sigma_x': the system
    part gates the coupling, the primed Pauli rotates the detector.  The
    correlated pairs are (up, up') and (down, down').
    """
    g = coupling_strength(config)
    system = StateVector(np.array([config.a, config.b], dtype=np.complex128))
    psi0 = tensor(system, basis_state(2, 0))
    gate = identity(2).entries - sigma_z().entries
    generator = DenseOperator.certify(g * np.kron(gate, sigma_x().entries))
    hamiltonian = PiecewiseHamiltonian.constant(generator, 0.0, config.total_time)
    correlation = CorrelationSpec(system_dim=2, detector_dim=2, pairs=((0, 0), (1, 1)))
    return SpinModel(psi0, hamiltonian, correlation, g, config)


def analytic_survival(config: SpinExampleConfig, k: int) -> float:
    """Closed-form no-detection probability after k measurements at spacing delta.

    Valid only for the a = 0 simplification, where the null branch always
    returns to the initial product state and each step contributes the same
    factor: survival(k) = cos(2 g delta)^(2k).  The formula assumes every
    interrogation falls inside the coupling window, i.e. k * delta <= T;
    past the window the protocol freezes instead of decaying further.
    """
    if abs(config.a) > 1e-12:
        raise ValueError("closed-form survival requires a = 0")
    if k < 0:
        raise ValueError("k must be non-negative")
    g = coupling_strength(config)
    return float(cos(2.0 * g * config.delta) ** (2 * k))
