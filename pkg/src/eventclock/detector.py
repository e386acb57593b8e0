"""The "a measurement has occurred" projector and its probability-in-time diagnostics.

A detection model couples system basis states to orthogonal detector basis
states.  The projector onto the correlated subspace gives, in the Heisenberg
picture, the probability P(t) that the record exists at time t.  This module
evaluates that curve, its finite-difference time density (which is allowed to
go negative -- that is the interesting part), the commutators of the evolved
projector with itself at different times, and the two normalization sums that
behave very differently: the fixed-time sum over outcomes (always 1) and the
integral over time (state- and window-dependent).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import (
    CertificationError,
    DenseOperator,
    PiecewiseHamiltonian,
    StateVector,
    heisenberg,
    identity,
    propagator,
)

__all__ = [
    "CorrelationSpec",
    "TimeSeries",
    "CommutatorDiagnostics",
    "NormalizationDiagnostics",
    "build_correlation_projector",
    "pm_of_t",
    "m_of_t",
    "commutator_diagnostics",
    "normalization_diagnostics",
]

# Slack allowed on a probability before clamping into [0, 1].
PROB_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class CorrelationSpec:
    """Pairs (system index, detector index) defining the correlated subspace.

    Detector indices must be pairwise distinct: records attached to different
    correlated states have to be orthogonal for the sum of rank-1 projectors
    to be a projector.
    """

    system_dim: int
    detector_dim: int
    pairs: tuple

    def __post_init__(self):
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if self.system_dim < 1 or self.detector_dim < 1:
            raise ValueError("system_dim and detector_dim must be positive")
        if not pairs:
            raise ValueError("correlation spec needs at least one pair")
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate correlation pair")
        seen_detector = set()
        for i, j in pairs:
            if not 0 <= i < self.system_dim:
                raise ValueError(f"system index {i} out of range for dim {self.system_dim}")
            if not 0 <= j < self.detector_dim:
                raise ValueError(f"detector index {j} out of range for dim {self.detector_dim}")
            if j in seen_detector:
                raise ValueError(f"detector index {j} reused; detector states must be orthogonal")
            seen_detector.add(j)

    @property
    def dim(self) -> int:
        return self.system_dim * self.detector_dim


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Sampled real-valued function of time on a strictly increasing grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.ndim != 1 or v.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if t.size == 0:
            raise ValueError("empty time series")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        t = t.copy()
        v = v.copy()
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.times.size)


def build_correlation_projector(spec: CorrelationSpec) -> DenseOperator:
    """Projector onto the span of the correlated states |sys_i> (x) |det_i>.

    In the fixed Kronecker ordering (system slow, detector fast) each pair
    (i, j) contributes the rank-1 projector onto basis index
    ``i * detector_dim + j``.  The projector flag is certified on the result.
    """
    dim = spec.dim
    entries = np.zeros((dim, dim), dtype=np.complex128)
    for i, j in spec.pairs:
        idx = i * spec.detector_dim + j
        entries[idx, idx] = 1.0
    out = DenseOperator.certify(entries)
    if not out.is_projector:
        raise CertificationError("correlation projector failed certification")
    return out


def _uniform_spacing(times: np.ndarray, what: str) -> float:
    if times.size < 2:
        raise ValueError(f"{what} needs at least 2 samples")
    steps = np.diff(times)
    dt = float(steps[0])
    if dt <= 0 or float(np.max(np.abs(steps - dt))) > 1e-9 * dt:
        raise ValueError(f"{what} requires a uniformly spaced time grid")
    return dt


def _states_on_grid(h: PiecewiseHamiltonian, psi0: StateVector, times: np.ndarray) -> np.ndarray:
    """Stack of U(0, t_k) psi0 for an increasing grid of non-negative times."""
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must form a non-empty 1-d array")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("times must be strictly increasing")
    if times[0] < 0:
        raise ValueError("evolution times must be non-negative")
    out = np.empty((times.size, psi0.dim), dtype=np.complex128)
    psi = psi0.amplitudes
    prev = 0.0
    for k, t in enumerate(times):
        psi = propagator(h, prev, float(t)).entries @ psi
        out[k] = psi
        prev = float(t)
    return out


def _assert_probability(values: np.ndarray, what: str) -> np.ndarray:
    if float(np.min(values)) < -PROB_SLACK or float(np.max(values)) > 1 + PROB_SLACK:
        raise CertificationError(
            f"{what} left [0, 1] by more than {PROB_SLACK}: "
            f"range [{float(np.min(values))}, {float(np.max(values))}]"
        )
    return np.clip(values, 0.0, 1.0)


def pm_of_t(
    spec: CorrelationSpec,
    h: PiecewiseHamiltonian,
    psi0: StateVector,
    times,
) -> TimeSeries:
    """Detection-record probability <psi0| M(t) |psi0> on a grid of times.

    M(t) is the correlation projector conjugated by the propagator, which for
    expectation values is the same as evolving the state.  Values are asserted
    to lie within ``PROB_SLACK`` of [0, 1] and then clamped.
    """
    times = np.asarray(times, dtype=np.float64)
    if spec.dim != h.dim or spec.dim != psi0.dim:
        raise ValueError(
            f"dimension mismatch: spec {spec.dim}, hamiltonian {h.dim}, state {psi0.dim}"
        )
    m = build_correlation_projector(spec)
    states = _states_on_grid(h, psi0, times)
    vals = np.einsum("ki,ij,kj->k", states.conj(), m.entries, states).real
    return TimeSeries(times, _assert_probability(vals, "P_M(t)"))


def m_of_t(series: TimeSeries) -> TimeSeries:
    """Finite-difference time density dP/dt of a probability series.

    Interior points use central differences, the endpoints second-order
    one-sided differences, so the whole curve converges at O(dt^2).  Values
    are deliberately NOT clamped: a negative density is a meaningful result
    here, not a numerical fault.  Only the expectation value is ever exposed;
    no operator-valued derivative is constructed.
    """
    if len(series) < 3:
        raise ValueError("time density needs at least 3 samples")
    dt = _uniform_spacing(series.times, "m_of_t")
    v = series.values
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2 * dt)
    out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dt)
    out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dt)
    return TimeSeries(series.times, out)


@dataclass(frozen=True)
class CommutatorDiagnostics:
    """Spectral norms of the evolved projector's self-commutators."""

    same_time_norm: float
    two_time_norm: float


def commutator_diagnostics(
    spec: CorrelationSpec,
    h: PiecewiseHamiltonian,
    t1: float,
    t2: float,
) -> CommutatorDiagnostics:
    """Norms of [M(t1), M(t1)] (identically zero) and [M(t1), M(t2)].

    The same-time commutator is evaluated literally rather than assumed; the
    two-time norm is generically nonzero, which is exactly what blocks reading
    the detection curve as a record of independent events.
    """
    if t1 == t2:
        raise ValueError("commutator diagnostics need two distinct times")
    if min(t1, t2) < 0:
        raise ValueError("times must be non-negative")
    m = build_correlation_projector(spec)
    m1 = heisenberg(m, propagator(h, 0.0, float(t1)))
    m2 = heisenberg(m, propagator(h, 0.0, float(t2)))
    same = m1.entries @ m1.entries - m1.entries @ m1.entries
    cross = m1.entries @ m2.entries - m2.entries @ m1.entries
    return CommutatorDiagnostics(
        same_time_norm=float(np.linalg.norm(same, ord=2)),
        two_time_norm=float(np.linalg.norm(cross, ord=2)),
    )


@dataclass(frozen=True, eq=False)
class NormalizationDiagnostics:
    """Fixed-time outcome sums (each ~1) versus the time integral (anything)."""

    fixed_time_sums: np.ndarray
    time_integral: float


def normalization_diagnostics(
    spec: CorrelationSpec,
    h: PiecewiseHamiltonian,
    psi0: StateVector,
    t_grid,
) -> NormalizationDiagnostics:
    """Contrast the two normalizations of the detection probability.

    At every grid time the probabilities of "record exists" and "record does
    not exist" are computed independently and summed -- that sum is pinned to
    1 by completeness.  The trapezoid integral of P(t) over the grid carries
    no such contract: it depends on the state and on the window, which is the
    whole demonstration.  Quadrature order is not critical for that
    qualitative point, so plain trapezoid is used.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    _uniform_spacing(t_grid, "normalization diagnostics")
    if spec.dim != h.dim or spec.dim != psi0.dim:
        raise ValueError(
            f"dimension mismatch: spec {spec.dim}, hamiltonian {h.dim}, state {psi0.dim}"
        )
    m = build_correlation_projector(spec)
    comp = identity(spec.dim).entries - m.entries
    states = _states_on_grid(h, psi0, t_grid)
    p_m = np.einsum("ki,ij,kj->k", states.conj(), m.entries, states).real
    p_not = np.einsum("ki,ij,kj->k", states.conj(), comp, states).real
    p_m = _assert_probability(p_m, "P_M(t)")
    p_not = _assert_probability(p_not, "P_{1-M}(t)")
    integral = float(np.trapezoid(p_m, t_grid))
    return NormalizationDiagnostics(fixed_time_sums=p_m + p_not, time_integral=integral)
