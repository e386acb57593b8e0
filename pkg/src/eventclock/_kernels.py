"""Hot numeric kernels, jitted with numba when available.

Two inner loops dominate the package's runtime: the measure-collapse
recursion (thousands of small matrix-vector steps for fine detection
schedules) and the origin-current scan (momentum sums over every candidate
state and every probe time in a backflow search).  Both exist here twice:

* a pure-numpy implementation, always present, used as the fallback and as
  the reference in the backend-agreement tests;
* a ``numba.njit`` version compiled lazily on first use.

Backend selection happens at import time.  Set ``EVENTCLOCK_NUMBA=0`` in the
environment (before importing the package) to force the numpy path; the
fallback also engages automatically when numba is not importable.
``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["USING_NUMBA", "backend", "collapse_recursion", "origin_current_scan"]

_ENV_FLAG = "EVENTCLOCK_NUMBA"

# Null-branch probabilities below this are treated as an exhausted branch.
EXHAUSTED = 1e-300


def _env_enabled() -> bool:
    value = os.environ.get(_ENV_FLAG, "1").strip().lower()
    return value not in {"0", "false", "off", "no"}


USING_NUMBA = False
if _env_enabled():
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:
        USING_NUMBA = False


def backend() -> str:
    """Name of the active kernel backend ("numba" or "numpy")."""
    return "numba" if USING_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# collapse recursion: evolve, project out the detected branch, renormalize
# ---------------------------------------------------------------------------

def _collapse_recursion_numpy(us, m, psi0, survival_floor):
    k_max, d = us.shape[0], us.shape[1]
    p_detect = np.zeros(k_max)
    survival = np.zeros(k_max)
    state = psi0.copy()
    surv = 1.0
    steps = k_max
    for k in range(k_max):
        v = us[k] @ state
        mv = m @ v
        p = float(np.real(np.vdot(v, mv)))
        p = min(max(p, 0.0), 1.0)
        p_detect[k] = surv * p
        surv *= 1.0 - p
        survival[k] = surv
        null = v - mv
        null_prob = float(np.real(np.vdot(null, null)))
        if null_prob < EXHAUSTED:
            steps = k + 1
            break
        state = null / np.sqrt(null_prob)
        if surv < survival_floor:
            steps = k + 1
            break
    return p_detect, survival, steps


def _collapse_recursion_loops(us, m, psi0, survival_floor):
    k_max = us.shape[0]
    d = us.shape[1]
    p_detect = np.zeros(k_max)
    survival = np.zeros(k_max)
    state = psi0.copy()
    v = np.empty(d, dtype=np.complex128)
    mv = np.empty(d, dtype=np.complex128)
    surv = 1.0
    steps = k_max
    for k in range(k_max):
        for i in range(d):
            acc = 0.0 + 0.0j
            for j in range(d):
                acc += us[k, i, j] * state[j]
            v[i] = acc
        p = 0.0
        for i in range(d):
            acc = 0.0 + 0.0j
            for j in range(d):
                acc += m[i, j] * v[j]
            mv[i] = acc
            p += (v[i].conjugate() * acc).real
        if p < 0.0:
            p = 0.0
        elif p > 1.0:
            p = 1.0
        p_detect[k] = surv * p
        surv *= 1.0 - p
        survival[k] = surv
        null_prob = 0.0
        for i in range(d):
            v[i] = v[i] - mv[i]
            null_prob += (v[i].conjugate() * v[i]).real
        if null_prob < EXHAUSTED:
            steps = k + 1
            break
        inv = 1.0 / np.sqrt(null_prob)
        for i in range(d):
            state[i] = v[i] * inv
        if surv < survival_floor:
            steps = k + 1
            break
    return p_detect, survival, steps


# ---------------------------------------------------------------------------
# origin-current scan: J(0, t) from momentum amplitudes, many states x times
# ---------------------------------------------------------------------------

def _origin_current_scan_numpy(cands, p, ts):
    n_cand, n = cands.shape
    nt = ts.size
    out = np.empty((n_cand, nt))
    deriv = cands * p  # i folded in at the end: Im(conj(s0) i s1) = Re(conj(s0) s1)
    half_p2 = -0.5j * p * p
    # chunk the (n, nt) phase matrix to bound memory at ~64 MB
    chunk = max(1, (4 << 20) // max(n, 1))
    for lo in range(0, nt, chunk):
        phases = np.exp(np.outer(half_p2, ts[lo:lo + chunk]))
        s0 = cands @ phases
        s1 = deriv @ phases
        out[:, lo:lo + chunk] = (np.conj(s0) * s1).real
    out /= float(n) * float(n)
    return out


if USING_NUMBA:
    from numba import prange

    try:
        # avoid probing TBB first: old TBB builds emit a disable warning
        from numba import config as _numba_config

        _numba_config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    except (ImportError, AttributeError):
        pass

    _collapse_recursion_jit = njit(cache=True)(_collapse_recursion_loops)

    @njit(cache=True, parallel=True)
    def _origin_current_scan_jit(cands, p, ts):
        # parallel over probe times: every output element is written by
        # exactly one iteration, so results are bitwise deterministic
        n_cand = cands.shape[0]
        n = cands.shape[1]
        nt = ts.size
        out = np.empty((n_cand, nt))
        inv_n2 = 1.0 / (float(n) * float(n))
        for it in prange(nt):
            t = ts[it]
            phase_row = np.empty(n, dtype=np.complex128)
            for k in range(n):
                phase_row[k] = np.exp(-0.5j * p[k] * p[k] * t)
            for c in range(n_cand):
                s0 = 0.0 + 0.0j
                s1 = 0.0 + 0.0j
                for k in range(n):
                    a = cands[c, k] * phase_row[k]
                    s0 += a
                    s1 += p[k] * a
                out[c, it] = (s0.conjugate() * s1).real * inv_n2
        return out
else:
    _collapse_recursion_jit = None
    _origin_current_scan_jit = None


def collapse_recursion(us, m, psi0, survival_floor):
    """Run the repeated evolve-measure-collapse loop.

    Parameters
    ----------
    us : (k_max, d, d) complex array
        Per-step evolution operators, step k covering (t_{k-1}, t_k].
    m : (d, d) complex array
        Detection projector.
    psi0 : (d,) complex array
        Normalized initial state.
    survival_floor : float
        Stop once the unconditional survival drops below this value.

    Returns
    -------
    (p_detect, survival, steps)
        Unconditional detection probabilities, unconditional survivals
        (both length ``k_max``, valid up to ``steps``), and the number of
        steps actually executed.
    """
    us = np.ascontiguousarray(us, dtype=np.complex128)
    m = np.ascontiguousarray(m, dtype=np.complex128)
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    floor = float(survival_floor)
    if USING_NUMBA:
        return _collapse_recursion_jit(us, m, psi0, floor)
    return _collapse_recursion_numpy(us, m, psi0, floor)


def origin_current_scan(cands, p, ts):
    """Probability current at the origin for a stack of momentum amplitudes.

    ``cands[c]`` holds the FFT-layout momentum amplitudes of candidate c,
    pre-multiplied by the origin phase ``exp(2*pi*i*j0*k/n)``; ``p`` is the
    matching momentum grid.  Returns the (n_cand, len(ts)) array of
    J(0, t) = Im[conj(psi(0, t)) dpsi/dx(0, t)].
    """
    cands = np.ascontiguousarray(cands, dtype=np.complex128)
    p = np.ascontiguousarray(p, dtype=np.float64)
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    if cands.ndim != 2 or cands.shape[1] != p.size:
        raise ValueError("candidate stack and momentum grid shapes do not match")
    if USING_NUMBA:
        return _origin_current_scan_jit(cands, p, ts)
    return _origin_current_scan_numpy(cands, p, ts)
