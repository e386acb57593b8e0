"""Free 1-d wavepackets, the arrival probability P_+ and the origin current.

Everything lives on a periodic grid with hbar = m = 1.  Free evolution is
exact there (a pure phase in the momentum representation), so the only
numerical error in these demonstrations comes from quadrature and finite
differences, never from the dynamics.  The probability of being on the
positive half-axis splits the x = 0 cell half/half between the two sides,
which keeps P_+ + P_- = 1 exact.

The current at the origin is the candidate "arrival-time density".  The
backflow scan documents its failure mode: a two-component superposition
built from strictly positive momenta whose current at the origin still goes
negative.  Candidate states are constructed directly in the momentum
representation with every p <= 0 bin set exactly to zero, and that mirror is
carried along so the positivity of the momentum content stays checkable at
the bit level.

Packets are expected to stay away from the periodic seam; trajectory drivers
enforce that loudly (see ``BOUNDARY_GUARD``).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from . import _kernels
from .hilbert import CertificationError

__all__ = [
    "DEFAULT_N",
    "DEFAULT_X_MIN",
    "BOUNDARY_GUARD",
    "GridWavepacket",
    "ArrivalSeries",
    "BackflowCandidate",
    "BackflowScanResult",
    "gaussian_packet",
    "evolve_free",
    "p_plus",
    "current_at_origin",
    "current_series",
    "arrival_series",
    "boundary_mass",
    "time_integral_demo",
    "backflow_packet",
    "default_backflow_candidates",
    "default_backflow_times",
    "backflow_scan",
]

# Default grid: x in [-128, 128) at dx = 1/32.  Wide enough that the standard
# demonstration trajectories keep their seam mass below BOUNDARY_GUARD, and
# fine enough that the half-cell quadrature term in P_+ stays below the 1e-6
# continuity budget.
DEFAULT_N = 8192
DEFAULT_X_MIN = -128.0

# Maximum probability tolerated within 5 grid points of the periodic seam.
BOUNDARY_GUARD = 1e-8

_NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GridWavepacket:
    """Wavefunction samples on a uniform periodic grid with x = 0 on a point.

    ``momentum_mirror`` caches the FFT-layout momentum amplitudes.  When a
    packet is built directly in the momentum representation the mirror is the
    construction output itself, so exact zeros there survive evolution (a
    phase multiply) bit for bit.  The particle mass is fixed to 1.
    """

    x_min: float
    dx: float
    amplitudes: np.ndarray
    momentum_mirror: np.ndarray | None = None

    mass = 1.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a 1-d array")
        n = amps.size
        if n < 8 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        if self.dx <= 0:
            raise ValueError("dx must be positive")
        j0 = -self.x_min / self.dx
        if abs(j0 - round(j0)) > 1e-9 or not 0 <= round(j0) < n:
            raise ValueError("the origin x = 0 must lie on a grid point")
        nrm = sqrt(float(np.sum(np.abs(amps) ** 2)) * self.dx)
        if abs(nrm - 1.0) > _NORM_TOL:
            raise CertificationError(
                f"packet norm {nrm!r} deviates from 1 by more than {_NORM_TOL}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.momentum_mirror is not None:
            mirror = np.array(self.momentum_mirror, dtype=np.complex128, copy=True)
            if mirror.shape != amps.shape:
                raise ValueError("momentum mirror must match the grid size")
            # the mirror drives the evolution, so an inconsistent one is a
            # real hazard, not a cache miss
            if float(np.max(np.abs(np.fft.ifft(mirror) - amps))) > 1e-9:
                raise ValueError("momentum mirror inconsistent with position amplitudes")
            mirror.setflags(write=False)
            object.__setattr__(self, "momentum_mirror", mirror)

    @property
    def n(self) -> int:
        return int(self.amplitudes.size)

    @property
    def origin_index(self) -> int:
        return int(round(-self.x_min / self.dx))

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def momenta(self) -> np.ndarray:
        return 2.0 * pi * np.fft.fftfreq(self.n, d=self.dx)

    def momentum_amplitudes(self) -> np.ndarray:
        """FFT-layout momentum mirror (cached)."""
        if self.momentum_mirror is None:
            mirror = np.fft.fft(self.amplitudes)
            mirror.setflags(write=False)
            object.__setattr__(self, "momentum_mirror", mirror)
        return self.momentum_mirror

    def norm(self) -> float:
        return sqrt(float(np.sum(np.abs(self.amplitudes) ** 2)) * self.dx)


def gaussian_packet(
    x0: float,
    sigma: float,
    p0: float,
    *,
    n: int = DEFAULT_N,
    x_min: float = DEFAULT_X_MIN,
    dx: float | None = None,
) -> GridWavepacket:
    """Normalized Gaussian with position-density std sigma and mean momentum p0."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if dx is None:
        if x_min >= 0:
            raise ValueError("x_min must be negative for the symmetric default domain")
        dx = -2.0 * x_min / n
    x = x_min + dx * np.arange(n)
    amps = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2) + 1j * p0 * x)
    amps /= sqrt(float(np.sum(np.abs(amps) ** 2)) * dx)
    return GridWavepacket(x_min=x_min, dx=dx, amplitudes=amps)


def evolve_free(w: GridWavepacket, t: float) -> GridWavepacket:
    """Exact free evolution by time t (positive or negative).

    Each momentum component picks up exp(-i p^2 t / 2); the mirror of the
    result is the multiplied mirror, so exact zeros in the momentum content
    are preserved exactly.
    """
    mirror = w.momentum_amplitudes()
    p = w.momenta
    evolved = mirror * np.exp(-0.5j * p * p * float(t))
    amps = np.fft.ifft(evolved)
    return GridWavepacket(x_min=w.x_min, dx=w.dx, amplitudes=amps, momentum_mirror=evolved)


def p_plus(w: GridWavepacket) -> float:
    """Probability on the positive half-axis, x = 0 cell split half/half."""
    prob = np.abs(w.amplitudes) ** 2
    j0 = w.origin_index
    return float((np.sum(prob[j0 + 1:]) + 0.5 * prob[j0]) * w.dx)


def current_at_origin(w: GridWavepacket) -> float:
    """Probability current J(0) = Im[conj(psi) dpsi/dx] at x = 0.

    The derivative is spectral (computed in the momentum representation).
    With this sign convention dP_+/dt = J(0, t) away from the seam.
    """
    mirror = w.momentum_amplitudes()
    dpsi = np.fft.ifft(1j * w.momenta * mirror)
    return float(np.imag(np.conj(w.amplitudes[w.origin_index]) * dpsi[w.origin_index]))


def _origin_phase(n: int, j0: int) -> np.ndarray:
    if 2 * j0 == n:
        # exact alternating signs for the symmetric-domain origin
        phase = np.ones(n)
        phase[1::2] = -1.0
        return phase.astype(np.complex128)
    return np.exp(2j * pi * j0 * np.arange(n) / n)


def current_series(w: GridWavepacket, times) -> np.ndarray:
    """J(0, t) for every t in ``times``, evolved from ``w`` (kernel-backed)."""
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must form a non-empty 1-d array")
    referred = w.momentum_amplitudes() * _origin_phase(w.n, w.origin_index)
    return _kernels.origin_current_scan(referred[None, :], w.momenta, times)[0]


def boundary_mass(w: GridWavepacket) -> float:
    """Probability within 5 grid points of the periodic seam."""
    prob = np.abs(w.amplitudes) ** 2 * w.dx
    return float(np.sum(prob[:5]) + np.sum(prob[-5:]))


def _check_boundary(prob_strip: float, t: float) -> None:
    if prob_strip > BOUNDARY_GUARD:
        raise CertificationError(
            f"wrap-around guard tripped at t = {t}: boundary mass {prob_strip:.3e} "
            f"exceeds {BOUNDARY_GUARD}; enlarge the grid"
        )


@dataclass(frozen=True, eq=False)
class ArrivalSeries:
    """P_+ and J(0) sampled along a trajectory."""

    times: np.ndarray
    p_plus: np.ndarray
    j_origin: np.ndarray


def arrival_series(w0: GridWavepacket, times) -> ArrivalSeries:
    """Evolve ``w0`` to each time and record P_+(t) and J(0, t).

    Every sample is guarded against wrap-around at the periodic seam; a
    violation raises instead of silently polluting the arrival statistics.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must form a non-empty 1-d array")
    mirror = w0.momentum_amplitudes()
    p = w0.momenta
    j0 = w0.origin_index
    pp = np.empty(times.size)
    jj = np.empty(times.size)
    for k, t in enumerate(times):
        evolved = mirror * np.exp(-0.5j * p * p * float(t))
        pos = np.fft.ifft(evolved)
        prob = np.abs(pos) ** 2
        _check_boundary(float((np.sum(prob[:5]) + np.sum(prob[-5:])) * w0.dx), float(t))
        pp[k] = (np.sum(prob[j0 + 1:]) + 0.5 * prob[j0]) * w0.dx
        dpos = np.fft.ifft(1j * p * evolved)
        jj[k] = np.imag(np.conj(pos[j0]) * dpos[j0])
    return ArrivalSeries(times=times, p_plus=pp, j_origin=jj)


def time_integral_demo(w0: GridWavepacket, t_max: float, dt: float) -> float:
    """Trapezoid integral of P_+(t) over [0, t_max].

    There is no normalization contract here: once the packet has crossed,
    P_+ sits near 1 and the integral grows linearly with the window.  ``dt``
    is a target step; the grid is uniform and ends exactly at ``t_max``.
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    if t_max == 0:
        return 0.0
    if dt <= 0:
        raise ValueError("dt must be positive")
    count = max(1, int(round(t_max / dt)))
    ts = np.linspace(0.0, t_max, count + 1)
    series = arrival_series(w0, ts)
    return float(np.trapezoid(series.p_plus, ts))


# ---------------------------------------------------------------------------
# backflow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BackflowCandidate:
    """Two positive-momentum Gaussian components with a relative weight/phase.

    The momentum amplitude is ``(1-w) G(p; p1, s1) + w e^{i phi} G(p; p2, s2)``
    restricted to p > 0, where G has momentum-density std s.  ``w = 0``
    reduces to a single component.
    """

    p1: float
    p2: float
    s1: float
    s2: float
    w: float
    phi: float

    def __post_init__(self):
        if self.p1 <= 0 or self.p2 <= 0:
            raise ValueError("component momenta must be strictly positive")
        if self.s1 <= 0 or self.s2 <= 0:
            raise ValueError("momentum widths must be positive")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("relative weight w must lie in [0, 1]")
        if not 0.0 <= self.phi < 2.0 * pi:
            raise ValueError("relative phase must lie in [0, 2*pi)")


def _candidate_momentum_amplitudes(
    cand: BackflowCandidate, p: np.ndarray, x_min: float, dx: float, n: int
) -> np.ndarray:
    """Normalized FFT-layout momentum amplitudes; p <= 0 bins are exactly zero.

    The ``exp(i p x_min)`` factor references the grid offset so the packet is
    centered on the origin; zeros stay exact because only nonzero bins are
    touched.
    """
    positive = p > 0
    g1 = np.where(positive, np.exp(-((p - cand.p1) ** 2) / (4.0 * cand.s1**2)), 0.0)
    g2 = np.where(positive, np.exp(-((p - cand.p2) ** 2) / (4.0 * cand.s2**2)), 0.0)
    amp = ((1.0 - cand.w) * g1 + cand.w * np.exp(1j * cand.phi) * g2) * np.exp(1j * p * x_min)
    amp[~positive] = 0.0
    weight = float(np.sum(np.abs(amp) ** 2)) * dx / n
    if weight < 1e-150:
        raise ValueError("candidate has numerically zero weight on the momentum grid")
    return amp / sqrt(weight)


def backflow_packet(
    cand: BackflowCandidate,
    *,
    n: int = DEFAULT_N,
    x_min: float = DEFAULT_X_MIN,
) -> GridWavepacket:
    """Materialize a candidate on the grid, centered at the origin at t = 0.

    The packet's momentum mirror is the construction output itself, so the
    p <= 0 bins of ``packet.momentum_amplitudes()`` are exactly zero.
    """
    dx = -2.0 * x_min / n
    if x_min >= 0:
        raise ValueError("x_min must be negative for the symmetric domain")
    p = 2.0 * pi * np.fft.fftfreq(n, d=dx)
    amp = _candidate_momentum_amplitudes(cand, p, x_min, dx, n)
    return GridWavepacket(
        x_min=x_min, dx=dx, amplitudes=np.fft.ifft(amp), momentum_mirror=amp
    )


def default_backflow_candidates() -> tuple[BackflowCandidate, ...]:
    """The documented scan: p = (1, 3), s = 0.5, w in 0.1..0.9, phi on a pi/8 grid."""
    out = []
    for iw in range(1, 10):
        for iphi in range(16):
            out.append(
                BackflowCandidate(
                    p1=1.0, p2=3.0, s1=0.5, s2=0.5, w=0.1 * iw, phi=iphi * pi / 8.0
                )
            )
    return tuple(out)


def default_backflow_times() -> np.ndarray:
    """The documented probe times: t in [-6, 6] in steps of 0.01."""
    return np.linspace(-6.0, 6.0, 1201)


@dataclass(frozen=True, eq=False)
class BackflowScanResult:
    """Most negative origin current found, with the candidate and time."""

    best: BackflowCandidate
    t_star: float
    j_min: float


def backflow_scan(
    candidates,
    t_grid,
    *,
    n: int = DEFAULT_N,
    x_min: float = DEFAULT_X_MIN,
) -> BackflowScanResult:
    """Exhaustive search for negative origin current over candidates and times.

    Deterministic by construction: the scan evaluates J(0, t) for every
    candidate at every probe time and reduces with the tie-break (smallest
    j, then smallest w, then smallest phi, then smallest t), independent of
    candidate ordering.  A successful demonstration returns ``j_min`` well
    below zero for states whose momentum content at p <= 0 vanishes exactly.
    """
    candidates = tuple(candidates)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if not candidates or t_grid.size == 0:
        raise ValueError("empty scan grid")
    dx = -2.0 * x_min / n
    if x_min >= 0:
        raise ValueError("x_min must be negative for the symmetric domain")
    p = 2.0 * pi * np.fft.fftfreq(n, d=dx)
    j0 = int(round(-x_min / dx))
    phase = _origin_phase(n, j0)
    stack = np.empty((len(candidates), n), dtype=np.complex128)
    for c, cand in enumerate(candidates):
        stack[c] = _candidate_momentum_amplitudes(cand, p, x_min, dx, n) * phase
    currents = _kernels.origin_current_scan(stack, p, t_grid)
    best_key = None
    best = None
    for c, cand in enumerate(candidates):
        it = int(np.argmin(currents[c]))  # first minimum: smallest t on ties
        key = (float(currents[c, it]), cand.w, cand.phi, float(t_grid[it]))
        if best_key is None or key < best_key:
            best_key = key
            best = BackflowScanResult(
                best=cand, t_star=float(t_grid[it]), j_min=float(currents[c, it])
            )
    return best
