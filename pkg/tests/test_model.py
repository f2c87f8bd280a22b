import numpy as np
import pytest

from qramsim.core import basis_state, is_hermitian
from qramsim.model import (SimulationConfig, WindowSpec, build_hqq, half_rabi_time,
                           squid_params_to_model, window, window_integral)


@pytest.fixture
def spec():
    return WindowSpec.for_transfer(0.01)


def test_defaults_match_reference_parameters():
    cfg = SimulationConfig()
    assert (cfg.omega_m, abs(cfg.rabi), cfg.omega_c, cfg.beta, cfg.dt) == (1.0, 0.01, 100.0, 100.0, 1.0)


@pytest.mark.parametrize("bad", [dict(omega_m=0), dict(omega_c=-1), dict(beta=0), dict(eta=-1e-4),
                                 dict(dt=0), dict(rabi=1.0), dict(rabi=2j)])
def test_config_invariants(bad):
    with pytest.raises(ValueError):
        SimulationConfig(**bad)


def test_window_contract(spec):
    assert spec.t_off - spec.plateau_start == pytest.approx(half_rabi_time(0.01))
    assert spec.tau_ramp == pytest.approx(0.05 * half_rabi_time(0.01))
    assert window(0.0, spec) == spec.w_off
    assert window(spec.t_end + 1.0, spec) == spec.w_off
    plateau = np.linspace(spec.plateau_start, spec.t_off, 50)
    assert np.all(window(plateau, spec) == 1.0)
    mid = spec.t_on + 0.5 * spec.tau_ramp
    assert window(mid, spec) == pytest.approx(0.5 * (1 + spec.w_off), abs=1e-14)


@pytest.mark.parametrize("shape", ["half-cosine", "smoothstep"])
def test_window_continuous_and_monotone_ramp(shape):
    spec = WindowSpec.for_transfer(0.01, shape=shape)
    t = np.linspace(0, spec.t_end + 5, 400001)
    w = window(t, spec)
    assert np.max(np.abs(np.diff(w))) < 1e-3
    up = (t >= spec.t_on) & (t <= spec.plateau_start)
    assert np.all(np.diff(w[up]) >= 0)
    # C1: the slope is continuous as well
    slope = np.diff(w) / np.diff(t)
    assert np.max(np.abs(np.diff(slope))) < 1e-3


def test_window_integral_matches_quadrature(spec):
    from scipy import integrate
    for t in (10.0, spec.t_on + 3.0, 200.0, spec.t_end, 400.0):
        ref, _ = integrate.quad(lambda s: window(s, spec), 0, t, points=[spec.t_on, spec.plateau_start,
                                                                        spec.t_off, spec.t_end], limit=200)
        assert window_integral(t, spec) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("kwargs", [dict(w_off=1.0), dict(w_off=0.0), dict(t_on=0, t_off=1, tau_ramp=1),
                                    dict(shape="square")])
def test_window_spec_rejects(kwargs):
    base = dict(w_off=0.5, t_on=0.0, t_off=10.0, tau_ramp=1.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        WindowSpec(**base)


def test_hamiltonian_diagonal_at_resonance():
    h = build_hqq(0.0, SimulationConfig(rabi=0.0))
    assert np.allclose(h, np.diag([-1.0, 0.0, 0.0, 1.0]))
    evals = np.linalg.eigvalsh(h)
    assert abs(evals[1] - evals[2]) < 1e-12


def test_hamiltonian_coupling_element():
    h = build_hqq(0.0, SimulationConfig(rabi=0.01))
    assert basis_state(1, 0) @ h @ basis_state(0, 1) == pytest.approx(-0.01)


def test_hamiltonian_coupling_terms():
    # with sigma_y = [[0, i], [-i, 0]] the block [[0, W], [W*, 0]] is Re W sx + Im W sy
    from qramsim.core import kron, pauli
    rabi = 0.003 - 0.007j
    cfg = SimulationConfig(rabi=rabi)
    coupling = build_hqq(0.0, cfg) - build_hqq(0.0, cfg.with_(rabi=0.0))
    expected = -(rabi.real * kron(pauli("x"), pauli("x")) + rabi.imag * kron(pauli("y"), pauli("x")))
    assert np.allclose(coupling, expected)


def test_hamiltonian_hermitian_along_window(rng):
    spec = WindowSpec.for_transfer(0.01)
    for _ in range(20):
        rabi = 0.01 * (rng.normal() + 1j * rng.normal())
        cfg = SimulationConfig(rabi=rabi, window=spec)
        assert is_hermitian(build_hqq(rng.uniform(0, spec.t_end), cfg))


def test_parent_splitting_follows_window(spec):
    cfg = SimulationConfig(rabi=0.0, window=spec)
    h = build_hqq(0.0, cfg)
    assert h[1, 1] - h[0, 0] == pytest.approx(spec.w_off)


def test_squid_mapping():
    omega_hf = 2 * np.pi * 6.8e9
    assert squid_params_to_model(omega_hf, omega_hf=omega_hf) == pytest.approx(1.0)
    assert squid_params_to_model(0.5 * omega_hf, omega_hf=omega_hf) == pytest.approx(0.5)
    sched = squid_params_to_model(lambda t: omega_hf * (1 + 0 * t), omega_hf=omega_hf)
    assert sched(3.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        squid_params_to_model(omega_hf, epsilon=0.1, omega_hf=omega_hf)


def test_callable_window_drives_model():
    cfg = SimulationConfig(rabi=0.0, window=squid_params_to_model(lambda t: 0.5 + 0 * t))
    assert cfg.w_integral(10.0) == pytest.approx(5.0)
    assert build_hqq(1.0, cfg)[1, 1] - build_hqq(1.0, cfg)[0, 0] == pytest.approx(0.5)
