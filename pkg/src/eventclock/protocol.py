"""Repeated projective interrogation of the detection record.

The operational way to ask "when did the measurement happen" is to check the
record projector every ``delta`` units of time, collapse onto the null branch
whenever nothing is found, and tabulate the first-detection probabilities.
This module computes that distribution exactly (deterministic branch
bookkeeping, no sampling -- the quantities are expectations), plus:

* the explicit nested operator chains whose expectations reproduce the
  recursion, built as matrix products so their non-projector character can be
  demonstrated directly;
* the energy spread of the initial state, whose inverse sets the shortest
  usable measurement interval;
* a sweep over interrogation frequencies at fixed total time, which exhibits
  freezing: survival approaches 1 as the interval shrinks.

An optional seeded sampling mode draws first-detection times from the exact
distribution for demonstrations; the seed is a required argument so runs stay
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite, sqrt

import numpy as np

from . import _kernels
from .detector import CorrelationSpec, build_correlation_projector
from .hilbert import (
    CertificationError,
    DenseOperator,
    PiecewiseHamiltonian,
    StateVector,
    expectation,
    propagator,
)

__all__ = [
    "DetectionSchedule",
    "DetectionDistribution",
    "CollapseOutcome",
    "ChainExpectations",
    "ZenoSweepRow",
    "ResolvabilityReport",
    "collapse_step",
    "detection_distribution",
    "sample_detection_distribution",
    "chain_operators",
    "operator_chain",
    "energy_variance",
    "zeno_sweep",
    "resolvability_report",
]

# Telescoping identity tolerance: cumulative detection + survival = 1.
TELESCOPE_TOL = 1e-10


@dataclass(frozen=True)
class DetectionSchedule:
    """Uniform measurement schedule: interrogate at t_k = k * delta.

    ``survival_floor`` truncates a run once the surviving branch weight drops
    below it, avoiding renormalization of a numerically dead branch.  A floor
    of 0 disables truncation.
    """

    delta: float
    k_max: int
    survival_floor: float = 1e-12

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if not 0.0 <= self.survival_floor < 1.0:
            raise ValueError("survival_floor must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class DetectionDistribution:
    """First-detection probabilities and survivals at t_k = k * delta.

    ``p_detect[k]`` and ``survival[k]`` are unconditional; at every step the
    cumulative detection probability plus the current survival telescopes to
    1, which is verified at construction.
    """

    times: np.ndarray
    p_detect: np.ndarray
    survival: np.ndarray
    truncated: bool

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        pd = np.asarray(self.p_detect, dtype=np.float64)
        sv = np.asarray(self.survival, dtype=np.float64)
        if not (t.shape == pd.shape == sv.shape) or t.ndim != 1 or t.size == 0:
            raise ValueError("times, p_detect and survival must be equal-length 1-d arrays")
        for name, arr in (("p_detect", pd), ("survival", sv)):
            if float(np.min(arr)) < -1e-12 or float(np.max(arr)) > 1 + 1e-12:
                raise CertificationError(f"{name} entries left [0, 1]")
        pd = np.clip(pd, 0.0, 1.0)
        sv = np.clip(sv, 0.0, 1.0)
        resid = np.abs(np.cumsum(pd) + sv - 1.0)
        if float(np.max(resid)) > TELESCOPE_TOL:
            raise CertificationError(
                f"telescoping identity violated by {float(np.max(resid))}"
            )
        for name, arr in (("times", t), ("p_detect", pd), ("survival", sv)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True, eq=False)
class CollapseOutcome:
    """Result of one evolve-and-measure step.

    ``null_state`` is absent (None) when the undetected branch is exhausted,
    i.e. its probability is numerically zero.  That is a value, not an error.
    """

    p_detect: float
    null_state: StateVector | None


def collapse_step(psi: StateVector, m: DenseOperator, u: DenseOperator) -> CollapseOutcome:
    """Evolve by u, measure the projector m, return the null branch.

    The returned probability is conditional on having reached ``psi``; the
    null state is the normalized projection of the evolved state onto the
    complement of ``m``.
    """
    if not m.is_projector:
        raise CertificationError("collapse_step requires a certified projector")
    if not u.is_unitary:
        raise CertificationError("collapse_step requires a certified unitary")
    if not (psi.dim == m.dim == u.dim):
        raise ValueError(f"dimension mismatch: state {psi.dim}, m {m.dim}, u {u.dim}")
    v = u.entries @ psi.amplitudes
    mv = m.entries @ v
    p = float(np.real(np.vdot(v, mv)))
    p = min(max(p, 0.0), 1.0)
    null = v - mv
    null_prob = float(np.real(np.vdot(null, null)))
    if null_prob < _kernels.EXHAUSTED:
        return CollapseOutcome(p_detect=p, null_state=None)
    return CollapseOutcome(p_detect=p, null_state=StateVector(null / sqrt(null_prob)))


def _step_unitaries(h: PiecewiseHamiltonian, delta: float, k_max: int) -> np.ndarray:
    us = np.empty((k_max, h.dim, h.dim), dtype=np.complex128)
    for k in range(k_max):
        us[k] = propagator(h, k * delta, (k + 1) * delta).entries
    return us


def detection_distribution(
    spec: CorrelationSpec,
    h: PiecewiseHamiltonian,
    psi0: StateVector,
    sched: DetectionSchedule,
) -> DetectionDistribution:
    """Exact first-detection distribution for a uniform schedule.

    Iterates the collapse recursion: evolve across (t_{k-1}, t_k], measure,
    keep the null branch.  The unconditional detection probability at step k
    is the survival so far times the conditional detection probability.  The
    run stops at ``k_max``, when the survival drops below the schedule floor,
    or when the null branch is exhausted; ``truncated`` records any early
    stop.  Interrogations continuing past the last Hamiltonian segment are
    kept: the evolution there is trivial and the distribution simply freezes.
    """
    if spec.dim != h.dim or spec.dim != psi0.dim:
        raise ValueError(
            f"dimension mismatch: spec {spec.dim}, hamiltonian {h.dim}, state {psi0.dim}"
        )
    m = build_correlation_projector(spec)
    us = _step_unitaries(h, sched.delta, sched.k_max)
    p_detect, survival, steps = _kernels.collapse_recursion(
        us, m.entries, psi0.amplitudes, sched.survival_floor
    )
    times = sched.delta * np.arange(1, steps + 1, dtype=np.float64)
    return DetectionDistribution(
        times=times,
        p_detect=p_detect[:steps],
        survival=survival[:steps],
        truncated=steps < sched.k_max,
    )


def sample_detection_distribution(
    spec: CorrelationSpec,
    h: PiecewiseHamiltonian,
    psi0: StateVector,
    sched: DetectionSchedule,
    n_samples: int,
    seed: int,
) -> DetectionDistribution:
    """Empirical first-detection histogram drawn from the exact distribution.

    The measurement outcomes are the only randomness in the protocol, so
    inverse-CDF sampling of the exact distribution is equivalent to simulating
    trajectories step by step.  The seed is required; identical seeds give
    identical histograms.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    exact = detection_distribution(spec, h, psi0, sched)
    steps = len(exact)
    cdf = np.cumsum(exact.p_detect)
    rng = np.random.default_rng(seed)
    draws = rng.random(n_samples)
    idx = np.searchsorted(cdf, draws, side="right")
    counts = np.bincount(idx, minlength=steps + 1)[:steps]
    p_hat = counts / float(n_samples)
    survival_hat = 1.0 - np.cumsum(p_hat)
    return DetectionDistribution(
        times=exact.times,
        p_detect=p_hat,
        survival=survival_hat,
        truncated=exact.truncated,
    )


def chain_operators(
    spec: CorrelationSpec,
    h: PiecewiseHamiltonian,
    sched: DetectionSchedule,
    k: int,
) -> tuple[DenseOperator, DenseOperator]:
    """Explicit detection/survival operator chains for step k.

    Both are nested products of step propagators and projections: the
    detection chain sandwiches the record projector between k-1 null
    projections on each side, the survival chain uses k null projections.
    They are Hermitian by construction but NOT projectors, and chains for
    different k are not unitarily related to each other -- unlike the evolved
    record projector itself.  Their expectations in the initial state equal
    the unconditional detection and survival probabilities at step k.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > sched.k_max:
        raise ValueError(f"k = {k} exceeds schedule k_max = {sched.k_max}")
    m = build_correlation_projector(spec)
    if m.dim != h.dim:
        raise ValueError(f"dimension mismatch: spec {m.dim}, hamiltonian {h.dim}")
    comp = np.eye(m.dim, dtype=np.complex128) - m.entries
    us = _step_unitaries(h, sched.delta, k)
    survive = np.eye(m.dim, dtype=np.complex128)
    for j in range(k - 1):
        survive = comp @ us[j] @ survive
    detect_chain = us[k - 1] @ survive
    a_entries = detect_chain.conj().T @ m.entries @ detect_chain
    full_chain = comp @ detect_chain
    b_entries = full_chain.conj().T @ full_chain
    a_k = DenseOperator.certify(a_entries)
    b_k = DenseOperator.certify(b_entries)
    if not (a_k.is_hermitian and b_k.is_hermitian):
        raise CertificationError("operator chains failed hermiticity certification")
    return a_k, b_k


@dataclass(frozen=True)
class ChainExpectations:
    """Expectations of the step-k detection and survival chains."""

    a_k: float
    b_k: float


def operator_chain(
    spec: CorrelationSpec,
    h: PiecewiseHamiltonian,
    psi0: StateVector,
    sched: DetectionSchedule,
    k: int,
) -> ChainExpectations:
    """Evaluate the explicit matrix chains in the initial state."""
    a_k, b_k = chain_operators(spec, h, sched, k)
    return ChainExpectations(a_k=expectation(a_k, psi0), b_k=expectation(b_k, psi0))


def energy_variance(h: PiecewiseHamiltonian, psi: StateVector, t: float) -> float:
    """Energy spread sqrt(<H^2> - <H>^2) of the generator active at time t.

    Outside every segment the Hamiltonian vanishes and the spread is 0.
    """
    gen = h.generator_at(t)
    if gen is None:
        return 0.0
    if gen.dim != psi.dim:
        raise ValueError(f"dimension mismatch: generator {gen.dim}, state {psi.dim}")
    h_psi = gen.entries @ psi.amplitudes
    mean = float(np.real(np.vdot(psi.amplitudes, h_psi)))
    second = float(np.real(np.vdot(h_psi, h_psi)))
    var = second - mean * mean
    if var < 0.0:  # rounding only; the variance is non-negative
        var = 0.0
    return sqrt(var)


@dataclass(frozen=True)
class ZenoSweepRow:
    """One interrogation frequency in a fixed-total-time sweep."""

    delta: float
    survival_at_tau: float
    delta_e: float
    resolvability: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.delta_e < 0:
            raise ValueError("delta_e must be non-negative")
        s = self.survival_at_tau
        if s < -1e-12 or s > 1 + 1e-12:
            raise ValueError("survival_at_tau must lie in [0, 1]")
        object.__setattr__(self, "survival_at_tau", min(max(s, 0.0), 1.0))


def zeno_sweep(
    spec: CorrelationSpec,
    h: PiecewiseHamiltonian,
    psi0: StateVector,
    tau: float,
    k_values,
) -> tuple[ZenoSweepRow, ...]:
    """Survival at fixed total time tau for interrogation counts ``k_values``.

    Each row runs the full protocol with delta = tau / k and reports the
    survival at t_k = tau together with the energy spread and the
    dimensionless product delta * dE.  The approach of survival toward 1 as
    k grows is reported, never assumed.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    k_values = [int(k) for k in k_values]
    if not k_values or any(k < 1 for k in k_values):
        raise ValueError("k_values must be positive integers")
    if h.segments:
        de = energy_variance(h, psi0, h.segments[0].t_start)
    else:
        de = 0.0
    rows = []
    for k in k_values:
        delta = tau / k
        sched = DetectionSchedule(delta=delta, k_max=k, survival_floor=0.0)
        dist = detection_distribution(spec, h, psi0, sched)
        rows.append(
            ZenoSweepRow(
                delta=delta,
                survival_at_tau=float(dist.survival[-1]),
                delta_e=de,
                resolvability=delta * de,
            )
        )
    return tuple(rows)


@dataclass(frozen=True)
class ResolvabilityReport:
    """Shortest usable interval 1/dE and the regime flag for each sweep row."""

    delta_threshold: float
    frozen_regime: tuple


def resolvability_report(rows) -> ResolvabilityReport:
    """Classify sweep rows against the freezing threshold delta = 1/dE.

    Rows with delta * dE < 1 sit in the frozen regime: interrogating faster
    than the energy spread stops the detector from ever responding instead of
    sharpening the time resolution.  A zero spread makes the threshold
    infinite and every row frozen.
    """
    rows = tuple(rows)
    if not rows:
        raise ValueError("resolvability report needs at least one row")
    de = rows[0].delta_e
    spread = max(abs(r.delta_e - de) for r in rows)
    if spread > 1e-9 * max(de, 1.0):
        raise ValueError("rows must share a single energy spread")
    if de == 0.0 or not isfinite(1.0 / de):
        return ResolvabilityReport(
            delta_threshold=float("inf"),
            frozen_regime=tuple(True for _ in rows),
        )
    return ResolvabilityReport(
        delta_threshold=1.0 / de,
        frozen_regime=tuple(r.resolvability < 1.0 for r in rows),
    )
