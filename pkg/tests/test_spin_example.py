import numpy as np
import pytest

from eventclock.detector import m_of_t, pm_of_t
from eventclock.protocol import DetectionSchedule, detection_distribution, energy_variance
from eventclock.spin_example import (
    SpinExampleConfig,
    analytic_survival,
    build,
    coupling_strength,
)

T = 1.0


def test_config_rejects_unnormalized_amplitudes():
    with pytest.raises(ValueError):
        SpinExampleConfig(a=0.5, b=0.5)


def test_config_rejects_bad_convention():
    with pytest.raises(ValueError):
        SpinExampleConfig(g_convention="both")


def test_config_default_delta_is_eighth_period():
    assert SpinExampleConfig(total_time=4.0).delta == pytest.approx(0.5)


def test_coupling_strengths():
    assert coupling_strength(SpinExampleConfig()) == pytest.approx(np.pi / T)
    assert coupling_strength(
        SpinExampleConfig(g_convention="flip_at_t")
    ) == pytest.approx(np.pi / (4 * T))


def test_build_postconditions(spin_model):
    assert spin_model.psi0.dim == 4
    # |down> (x) |up'> is basis index 1*2 + 0 = 2
    assert spin_model.psi0.amplitudes[2] == 1.0
    assert len(spin_model.hamiltonian.segments) == 1
    seg = spin_model.hamiltonian.segments[0]
    assert (seg.t_start, seg.t_end) == (0.0, T)
    assert spin_model.correlation.pairs == ((0, 0), (1, 1))


def test_already_correlated_state_is_frozen():
    model = build(SpinExampleConfig(a=1.0, b=0.0))
    gen = model.hamiltonian.segments[0].generator
    assert np.max(np.abs(gen.entries @ model.psi0.amplitudes)) == 0.0
    series = pm_of_t(
        model.correlation, model.hamiltonian, model.psi0, np.linspace(0, T, 9)
    )
    assert np.max(np.abs(series.values - 1.0)) <= 1e-12


def test_flip_convention_correlates_at_t():
    model = build(SpinExampleConfig(g_convention="flip_at_t"))
    series = pm_of_t(model.correlation, model.hamiltonian, model.psi0, [0.0, T])
    assert series.values[-1] == pytest.approx(1.0, abs=1e-10)


def test_paper_convention_not_monotone(spin_model):
    times = np.linspace(0.0, T, 801)
    dens = m_of_t(
        pm_of_t(spin_model.correlation, spin_model.hamiltonian, spin_model.psi0, times)
    )
    assert np.min(dens.values) < 0


# --- analytic survival ----------------------------------------------------------

def test_analytic_survival_zero_interval():
    cfg = SpinExampleConfig(delta=0.0)
    for k in (0, 1, 5, 100):
        assert analytic_survival(cfg, k) == 1.0


def test_analytic_survival_halving():
    cfg = SpinExampleConfig(delta=T / 8)
    assert analytic_survival(cfg, 1) == pytest.approx(0.5, abs=1e-14)
    assert analytic_survival(cfg, 5) == pytest.approx(2.0**-5, abs=1e-14)


def test_analytic_survival_zeno_value():
    cfg = SpinExampleConfig(delta=T / 100)
    assert analytic_survival(cfg, 100) == pytest.approx(0.673650, abs=1e-5)


def test_analytic_survival_requires_a_zero():
    cfg = SpinExampleConfig(a=1.0, b=0.0)
    with pytest.raises(ValueError):
        analytic_survival(cfg, 3)


@pytest.mark.parametrize("convention", ["paper", "flip_at_t"])
def test_protocol_matches_closed_form(convention):
    # k * delta <= T keeps every interrogation inside the coupling window,
    # where the closed form applies
    cfg = SpinExampleConfig(g_convention=convention, delta=T / 20)
    model = build(cfg)
    sched = DetectionSchedule(delta=cfg.delta, k_max=20, survival_floor=0.0)
    dist = detection_distribution(model.correlation, model.hamiltonian, model.psi0, sched)
    for k in range(1, 21):
        assert abs(dist.survival[k - 1] - analytic_survival(cfg, k)) <= 1e-10


def test_protocol_freezes_past_coupling_window():
    # beyond t = T the closed form keeps decaying but the model freezes
    cfg = SpinExampleConfig(delta=T / 8)
    model = build(cfg)
    sched = DetectionSchedule(delta=cfg.delta, k_max=12, survival_floor=0.0)
    dist = detection_distribution(model.correlation, model.hamiltonian, model.psi0, sched)
    assert abs(dist.survival[7] - analytic_survival(cfg, 8)) <= 1e-10
    assert np.all(dist.survival[8:] == dist.survival[7])
    assert dist.survival[11] > analytic_survival(cfg, 12)


def test_energy_variance_is_twice_coupling(spin_model):
    de = energy_variance(spin_model.hamiltonian, spin_model.psi0, 0.0)
    assert de == pytest.approx(2 * spin_model.coupling, abs=1e-12)
    assert de == pytest.approx(2 * np.pi / T, abs=1e-12)
