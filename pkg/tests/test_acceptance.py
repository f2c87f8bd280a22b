"""One check per acceptance criterion; each prints a PASS/FAIL line."""

import time

import numpy as np

from conftest import decoherence, transfer
from qramsim.analysis import analytic_t1
from qramsim.bath import noise_kernel, noise_kernel_series
from qramsim.core import basis_state
from qramsim.experiments import storage_decay_experiment
from qramsim.model import SimulationConfig, WindowSpec, half_rabi_time
from qramsim.redfield import master_rhs, prepare_record, run_evolution
from qramsim.squid import SquidBecParams, coupling_gain, feasibility_report

SWEEP = (1e-4, 2e-4, 5e-4, 1e-3)
T1_LAW, T2_LAW = 5.10e-4, 1e-3
T_HALF = half_rabi_time(0.01)


def dm(psi):
    return np.outer(psi, np.conj(psi))


def test_criterion_01_t1_law(acceptance):
    parts, ok = [], True
    for eta in SWEEP:
        res = decoherence(eta)
        elapsed = res.record.wall_time
        err = res.t1_over_half_rabi * eta / T1_LAW - 1
        ok &= abs(err) <= 0.10 and elapsed <= 300
        parts.append(f"eta={eta:g}: T1/T_R/2={res.t1_over_half_rabi:.4g} ({err:+.1%}, {elapsed:.1f}s)")
    acceptance(1, ok, "; ".join(parts))


def test_criterion_02_t2_law(acceptance):
    parts, ok = [], True
    for eta in SWEEP:
        res = decoherence(eta)
        err = res.t2_over_half_rabi * eta / T2_LAW - 1
        ratio = res.t2 / res.t1
        ok &= abs(err) <= 0.10 and 1.8 <= ratio <= 2.2
        parts.append(f"eta={eta:g}: T2/T_R/2={res.t2_over_half_rabi:.4g} ({err:+.1%}), T2/T1={ratio:.3f}")
    acceptance(2, ok, "; ".join(parts))


def test_criterion_03_analytic_t1(acceptance):
    coeff = analytic_t1(1e-4, 1.0, 100.0) / T_HALF * 1e-4
    rel = coeff / T1_LAW - 1
    acceptance(3, abs(rel) <= 0.005, f"analytic coefficient {coeff:.5e} ({rel:+.2%} vs fit law)")


def test_criterion_04_direct_transfer(acceptance):
    res = transfer("direct", 5e-4)
    f = res.final_fidelity
    acceptance(4, 0.40 <= f <= 0.60,
               f"eta=5e-4 (T1/T_R/2={res.t1_over_half_rabi:.3f}): final fidelity {f:.4f}")


def test_criterion_05_superposition_transfer(acceptance):
    # "T1 somewhat above T_R/2": eta = 3e-4 gives T1 = 1.7 T_R/2
    res = transfer("superposition", 3e-4)
    f, f0 = res.final_fidelity, res.series.values[0]
    same_eta = transfer("superposition", 5e-4).final_fidelity
    ok = f > 0.90 and abs(f0 - 0.5) <= 1e-6
    acceptance(5, ok, f"eta=3e-4 (T1/T_R/2={res.t1_over_half_rabi:.3f}): final {f:.4f}, "
                      f"F(0)={f0:.7f}; at eta=5e-4: {same_eta:.4f}")


def test_criterion_06_high_fidelity_threshold(acceptance):
    # T1 = 3 Rabi periods = 6 T_R/2, eta from the fitted T1 law
    eta = T1_LAW / 6.0
    res = transfer("superposition", eta)
    f = res.final_fidelity
    acceptance(6, f >= 0.95 - 0.02, f"eta={eta:.4g}: superposition final fidelity {f:.4f}")


def test_criterion_07_unitary_limit(acceptance):
    rabi = 0.01
    cfg = SimulationConfig(eta=0.0, rabi=rabi, t_total=np.ceil(np.pi / rabi))
    rec = run_evolution(cfg, dm(basis_state(0, 1)))
    pops = rec.heisenberg()[:, 1, 1].real
    rabi_err = np.max(np.abs(pops - np.cos(rabi * rec.times) ** 2))
    tcfg = SimulationConfig(eta=0.0, rabi=rabi, t_total=400.0, window=WindowSpec.for_transfer(rabi))
    trec = run_evolution(tcfg, dm((basis_state(0, 0) + basis_state(0, 1)) / np.sqrt(2)))
    trace = np.max(np.abs(np.trace(trec.rho_traj, axis1=1, axis2=2) - 1))
    purity = np.max(np.abs(np.einsum("tij,tji->t", trec.rho_traj, trec.rho_traj).real - 1))
    ok = trace <= 1e-8 and purity <= 1e-6 and rabi_err <= 1e-4
    acceptance(7, ok, f"trace drift {trace:.1e}, purity drift {purity:.1e}, "
                      f"Rabi error {rabi_err:.1e}")


def test_criterion_08_property_suite(acceptance, rng):
    psi = (basis_state(0, 0) + basis_state(0, 1)) / np.sqrt(2)
    cfg = SimulationConfig(eta=5e-4, rabi=0.01, t_total=250.0, window=WindowSpec.for_transfer(0.01))
    rec = prepare_record(cfg)
    a = run_evolution(cfg, dm(psi), record=rec)
    b = run_evolution(cfg, dm(basis_state(0, 1)), record=prepare_record(cfg))
    mixed = run_evolution(cfg, 0.5 * (dm(psi) + dm(basis_state(0, 1))), record=prepare_record(cfg))
    linearity = np.max(np.abs(mixed.rho_traj - 0.5 * (a.rho_traj + b.rho_traj)))

    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = m @ m.conj().T / np.trace(m @ m.conj().T)
    rhs_trace = max(abs(np.trace(master_rhs(rho, n, a))) for n in (1, 50, 200, 499))

    base = SimulationConfig(eta=1e-4, rabi=0.01, t_total=400.0)
    coarse = run_evolution(base, dm(psi)).heisenberg()
    fine = run_evolution(base.with_(dt=0.5), dm(psi)).heisenberg()
    halving = np.max(np.abs(coarse - fine[::2]))

    scale = 1e-4 * 100.0 ** 2
    kernel = max(abs(noise_kernel(t, 1e-4, 100.0, b_) - noise_kernel_series(t, 1e-4, 100.0, b_))
                 for t in (0.0, 0.01, 1.0, 40.0) for b_ in (100.0, np.inf)) / scale

    checks = {"trace": a.max_trace_drift <= 1e-8, "hermiticity": a.max_hermiticity_drift <= 1e-9,
              "rhs trace": rhs_trace <= 1e-12, "linearity": linearity <= 1e-8,
              "dt halving": halving <= 1e-5, "kernel": kernel <= 1e-8}
    acceptance(8, all(checks.values()),
               f"trace {a.max_trace_drift:.1e}, herm {a.max_hermiticity_drift:.1e}, "
               f"rhs trace {rhs_trace:.1e}, linearity {linearity:.1e}, dt halving {halving:.1e}, "
               f"kernel {kernel:.1e}")


def test_criterion_09_squid(acceptance):
    start = time.perf_counter()
    params = SquidBecParams()
    rep = feasibility_report(params)
    gain = coupling_gain(params, 10e-6)
    elapsed = time.perf_counter() - start
    cyc, ang = rep.estimate("cyclic"), rep.estimate("angular")
    ten_us = [e.convention for e in rep.estimates if 1e-6 <= e.t_half_rabi <= 1e-4]
    improvement = [e.convention for e in rep.estimates if 50 <= e.required_improvement <= 200]
    ok = (abs(rep.field_on_axis / 5e-9 - 1) <= 0.05 and 30 <= rep.coupling_hz <= 300
          and ten_us and improvement and 100 <= gain <= 150 and elapsed < 1.0)
    acceptance(9, bool(ok),
               f"|B|={rep.field_on_axis:.3e} T, |g.mu|/h={rep.coupling_hz:.1f} Hz, "
               f"T_R/2 {cyc.t_half_rabi * 1e6:.1f} us (cyclic) / {ang.t_half_rabi * 1e6:.2f} us "
               f"(angular), improvement {cyc.required_improvement:.0f} / "
               f"{ang.required_improvement:.1f}, gain {gain:.1f}, {elapsed:.2f}s")


def test_criterion_10_storage(acceptance):
    res = storage_decay_experiment()
    ok = res.fit.resolved and res.predicted_ratio / 3 <= res.ratio <= 3 * res.predicted_ratio
    acceptance(10, ok, f"|Omega|=0.2: decay/T1 = {res.ratio:.2f} vs predicted "
                       f"{res.predicted_ratio:.0f}, min eigenvalue {res.min_eigenvalue:.1e}")
