"""Acceptance gate: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances are pinned here and nowhere else.
"""

import json

import numpy as np
import pytest

from eventclock import (
    BackflowCandidate,
    DetectionSchedule,
    SpinExampleConfig,
    backflow_packet,
    backflow_scan,
    build_spin_example,
    chain_operators,
    commutator_diagnostics,
    current_at_origin,
    default_backflow_candidates,
    default_backflow_times,
    detection_distribution,
    energy_variance,
    evolve_free,
    m_of_t,
    operator_chain,
    p_plus,
    pm_of_t,
    resolvability_report,
    time_integral_demo,
    zeno_sweep,
)
from eventclock.cli import main
from eventclock.detector import CorrelationSpec
from eventclock.hilbert import DenseOperator, PiecewiseHamiltonian, StateVector

T = 1.0


def _report(number, label):
    print(f"ACCEPTANCE {number:2d} PASS - {label}")


def _telescoping_residual(dist):
    return float(np.max(np.abs(np.cumsum(dist.p_detect) + dist.survival - 1.0)))


def test_criterion_01_zeno_freezing(spin_model):
    rows = zeno_sweep(
        spin_model.correlation, spin_model.hamiltonian, spin_model.psi0, T,
        [10, 100, 1000],
    )
    closed = [np.cos(2 * np.pi / k) ** (2 * k) for k in (10, 100, 1000)]
    for row, c, expected in zip(rows, closed, (0.0144, 0.6737, 0.9613)):
        assert abs(row.survival_at_tau - expected) <= 1e-3
        assert abs(row.survival_at_tau - c) <= 1e-10
    s = [row.survival_at_tau for row in rows]
    assert s[0] < s[1] < s[2]
    _report(1, "zeno freezing: survival follows cos^(2k)(2*pi/k), increasing in k")


def test_criterion_02_telescoping_normalization(spin_model):
    runs = []
    for delta, k_max in ((T / 8, 12), (T / 3, 9), (T / 1000, 1000)):
        runs.append(
            detection_distribution(
                spin_model.correlation, spin_model.hamiltonian, spin_model.psi0,
                DetectionSchedule(delta=delta, k_max=k_max, survival_floor=0.0),
            )
        )
    flip = build_spin_example(SpinExampleConfig(g_convention="flip_at_t"))
    runs.append(
        detection_distribution(
            flip.correlation, flip.hamiltonian, flip.psi0,
            DetectionSchedule(delta=T / 7, k_max=20),
        )
    )
    rng = np.random.default_rng(99)
    for _ in range(10):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        gen = DenseOperator.certify((a + a.conj().T) / 2)
        h = PiecewiseHamiltonian.constant(gen, 0.0, 5.0)
        psi0 = StateVector.normalized(rng.normal(size=4) + 1j * rng.normal(size=4))
        spec = CorrelationSpec(2, 2, ((0, 0), (1, 1)))
        runs.append(
            detection_distribution(spec, h, psi0, DetectionSchedule(0.2, 15))
        )
    worst = max(_telescoping_residual(d) for d in runs)
    assert worst <= 1e-10
    _report(2, f"telescoping normalization holds at every step (worst {worst:.2e})")


def test_criterion_03_chain_recursion_equivalence(spin_model):
    sched = DetectionSchedule(delta=T / 8, k_max=10, survival_floor=0.0)
    dist = detection_distribution(
        spin_model.correlation, spin_model.hamiltonian, spin_model.psi0, sched
    )
    for k in range(1, 11):
        chain = operator_chain(
            spin_model.correlation, spin_model.hamiltonian, spin_model.psi0, sched, k
        )
        assert abs(chain.a_k - dist.p_detect[k - 1]) <= 1e-10
        assert abs(chain.b_k - dist.survival[k - 1]) <= 1e-10
    rng = np.random.default_rng(1234)
    for _ in range(20):
        n_pairs = int(rng.integers(1, 3))
        det = rng.choice(2, size=n_pairs, replace=False)
        sys_idx = rng.integers(0, 2, size=n_pairs)
        spec = CorrelationSpec(2, 2, tuple(zip(sys_idx, det)))
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        gen = DenseOperator.certify((a + a.conj().T) / 2)
        h = PiecewiseHamiltonian.constant(gen, 0.0, 10.0)
        psi0 = StateVector.normalized(rng.normal(size=4) + 1j * rng.normal(size=4))
        rand_sched = DetectionSchedule(
            delta=float(rng.uniform(0.05, 0.3)), k_max=10, survival_floor=0.0
        )
        rand_dist = detection_distribution(spec, h, psi0, rand_sched)
        for k in range(1, len(rand_dist) + 1):
            chain = operator_chain(spec, h, psi0, rand_sched, k)
            assert abs(chain.a_k - rand_dist.p_detect[k - 1]) <= 1e-10
            assert abs(chain.b_k - rand_dist.survival[k - 1]) <= 1e-10
    a3, _ = chain_operators(spin_model.correlation, spin_model.hamiltonian, sched, 3)
    resid = float(np.linalg.norm(a3.entries @ a3.entries - a3.entries, ord=2))
    assert resid > 1e-6
    _report(3, f"operator chains reproduce the recursion; ||A3^2-A3|| = {resid:.4f}")


def test_criterion_04_negative_time_density(spin_model):
    times = np.linspace(0.0, T, 1001)  # dt = T/1000
    series = pm_of_t(
        spin_model.correlation, spin_model.hamiltonian, spin_model.psi0, times
    )
    density = m_of_t(series)
    idx = 375
    assert times[idx] == pytest.approx(3 * T / 8)
    value = density.values[idx]
    target = -2 * np.pi / T
    assert abs(value - target) / abs(target) < 0.01
    _report(4, f"time density at 3T/8 is {value:.6f} (target -2*pi/T, <1% off)")


def test_criterion_05_commutator_pathology(spin_model):
    for t1, t2 in ((0.05, 0.3), (T / 8, T / 4), (0.4, 0.9), (0.2, 1.7)):
        diag = commutator_diagnostics(
            spin_model.correlation, spin_model.hamiltonian, t1, t2
        )
        assert diag.same_time_norm <= 1e-12
    diag = commutator_diagnostics(
        spin_model.correlation, spin_model.hamiltonian, T / 8, T / 4
    )
    assert diag.two_time_norm > 0.1
    assert diag.two_time_norm == pytest.approx(0.5, abs=1e-10)  # frozen baseline
    _report(5, f"same-time commutators vanish; [M(T/8), M(T/4)] norm = {diag.two_time_norm:.3f}")


def test_criterion_06_resolvability_threshold(spin_model):
    de = energy_variance(spin_model.hamiltonian, spin_model.psi0, 0.0)
    assert abs(de - 2 * np.pi / T) <= 1e-12
    rows = zeno_sweep(
        spin_model.correlation, spin_model.hamiltonian, spin_model.psi0, T, [4, 100]
    )
    report = resolvability_report(rows)
    assert report.delta_threshold == pytest.approx(T / (2 * np.pi), abs=1e-12)
    assert report.frozen_regime == (False, True)
    _report(6, f"dE = 2*pi/T and threshold = T/(2*pi) = {report.delta_threshold:.6f}")


def test_criterion_07_continuity_and_norm(standard_packet):
    dt = 1e-3
    worst = 0.0
    for t in np.linspace(2.0, 38.0, 19):
        plus = p_plus(evolve_free(standard_packet, t + dt))
        minus = p_plus(evolve_free(standard_packet, t - dt))
        j = current_at_origin(evolve_free(standard_packet, t))
        worst = max(worst, abs((plus - minus) / (2 * dt) - j))
    assert worst <= 1e-6
    w = standard_packet
    for _ in range(10_000):
        w = evolve_free(w, 1e-3)
    drift = abs(w.norm() - 1.0)
    assert drift <= 1e-12
    _report(7, f"continuity residual {worst:.2e} <= 1e-6; norm drift {drift:.2e} over 1e4 steps")


def test_criterion_08_backflow():
    result = backflow_scan(default_backflow_candidates(), default_backflow_times())
    assert result.j_min < -1e-4
    packet = backflow_packet(result.best)
    mom = packet.momentum_amplitudes()
    assert np.all(mom[packet.momenta <= 0] == 0.0)
    single = backflow_scan(
        [BackflowCandidate(1.0, 3.0, 0.5, 0.5, 0.0, 0.0)], default_backflow_times()
    )
    assert single.j_min >= -1e-10
    _report(
        8,
        f"backflow: J(0, t*) = {result.j_min:.6f} at w = {result.best.w:.1f}, "
        f"phi = {result.best.phi:.4f}; single-Gaussian min {single.j_min:.2e}",
    )


def test_criterion_09_time_norm_failure(standard_packet):
    i40 = time_integral_demo(standard_packet, 40.0, 0.25)
    i60 = time_integral_demo(standard_packet, 60.0, 0.25)
    growth = i60 - i40
    assert abs(growth - 20.0) <= 0.5
    _report(9, f"time integral grows by {growth:.4f} from t_max 40 to 60 (20 +/- 0.5)")


def test_criterion_10_cli_determinism(tmp_path):
    cfg = tmp_path / "zeno.json"
    cfg.write_text(json.dumps({"tau": 1.0, "k_values": [10, 100, 1000]}))
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert main(["zeno-sweep", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["zeno-sweep", "--config", str(cfg), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    _report(10, "identical configs produce byte-identical CLI output")
