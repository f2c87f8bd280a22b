"""Interaction-picture integration of the reduced two-qubit master equation.

The equation of motion is time-local in rho_I,

    d rho_I / dt = -[A(t), [L_n(t), rho_I]] + i [A(t), {L_d(t), rho_I}],
    L_x(t) = int_0^t K_x(t - t') A(t') dt',

with A(t) = U^dag(t) (1 (x) n.sigma) U(t), n = (1, 1, 1), and U the
propagator of the bare two-qubit Hamiltonian. Neither A nor the memory
operators L_x depend on rho, so they are built once per run on a half-step
node grid (the RK4 stage times) and the RK4 sweep afterwards is cheap.

The memory integral uses product integration. On each history interval the
interaction-picture rotation of A is written exactly in the eigenbasis of
the interval's Hamiltonian, and the bath kernel enters through its exact
moments over that interval (see :func:`qramsim.bath.interval_moments`). A
plain trapezoid rule on the step grid cannot be used: the kernels vary on
the scale 1/omega_c, which is a hundred times shorter than the default step.
"""

import time
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.signal import fftconvolve

from .bath import MAX_MOMENT_ORDER, precompute_kernels, thermal_correction_series
from .core import anticommutator, commutator, herm_expm, hermitize, kron, pauli
from .model import build_hqq

TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-9
POSITIVITY_TOL = -1e-3

_GAUSS_LO, _GAUSS_HI = 0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0

BATH_OPERATOR = kron(pauli("identity"), pauli("x") + pauli("y") + pauli("z"))


class PhysicalityError(RuntimeError):
    """The density matrix left the trace/Hermiticity/positivity envelope."""


def advance_propagator(u_prev, t, dt, cfg, n_sub=None):
    """Propagate ``u_prev`` from t to t + dt with ``n_sub`` substeps.

    Each substep is a fourth-order Magnus step on the two Gauss-Legendre
    points, exp(-i M) with M = h (H1 + H2) / 2 - i sqrt(3) h^2 [H2, H1] / 12,
    which is Hermitian.
    """
    n_sub = cfg.n_sub if n_sub is None else n_sub
    h = dt / n_sub
    u = u_prev
    for k in range(n_sub):
        u = herm_expm(magnus_generator(t + k * h, h, cfg), 1.0) @ u
    return u


def magnus_generator(t, h, cfg):
    h1 = build_hqq(t + _GAUSS_LO * h, cfg)
    h2 = build_hqq(t + _GAUSS_HI * h, cfg)
    return hermitize(0.5 * h * (h1 + h2) - 1j * np.sqrt(3.0) / 12.0 * h * h * commutator(h2, h1))


def interaction_operator(u):
    """A = u^dag (1 (x) (sigma_x + sigma_y + sigma_z)) u."""
    return u.conj().T @ BATH_OPERATOR @ u


@dataclass
class EvolutionRecord:
    """Propagators, coupling operators, memory operators and rho_I trajectory.

    Arrays indexed by *node* live on the half-step grid t = k dt / 2 used by
    the RK4 stages; step-grid views are exposed as ``u_sys`` and ``a_int``.
    """

    times: np.ndarray
    node_times: np.ndarray
    u_nodes: np.ndarray
    a_nodes: np.ndarray
    lambda_noise: np.ndarray
    lambda_dissip: np.ndarray
    rho_traj: np.ndarray = None
    wall_time: float = 0.0
    max_trace_drift: float = 0.0
    max_hermiticity_drift: float = 0.0
    min_eigenvalue: float = 1.0
    moment_order: int = 0
    kernels: object = None

    @property
    def u_sys(self):
        return self.u_nodes[::2]

    @property
    def a_int(self):
        return self.a_nodes[::2]

    def heisenberg(self):
        """rho(t) = U(t) rho_I(t) U^dag(t) on the step grid."""
        u = self.u_sys[: len(self.rho_traj)]
        return u @ self.rho_traj @ np.conj(np.swapaxes(u, -1, -2))


def build_nodes(cfg):
    """Propagators on the half-step grid plus per-interval spectral data.

    Returns ``(node_times, u_nodes, interval_h)`` where ``interval_h`` holds
    the Hamiltonian at the midpoint of each node interval.
    """
    n_nodes = 2 * cfg.n_steps + 1
    h = 0.5 * cfg.dt
    sub = max(1, (cfg.n_sub + 1) // 2)
    node_times = h * np.arange(n_nodes)
    u_nodes = np.empty((n_nodes, 4, 4), dtype=complex)
    u_nodes[0] = np.eye(4)
    interval_h = np.empty((n_nodes - 1, 4, 4), dtype=complex)
    for k in range(n_nodes - 1):
        t = node_times[k]
        interval_h[k] = build_hqq(t + 0.5 * h, cfg)
        u_nodes[k + 1] = advance_propagator(u_nodes[k], t, h, cfg, n_sub=sub)
    return node_times, u_nodes, interval_h


def _moment_order(max_freq, h):
    # smallest p with (w h / 2)^p / p! below double precision
    x = 0.5 * h * max_freq
    for p in range(1, MAX_MOMENT_ORDER + 1):
        if x ** p / factorial(p) < 1e-17:
            return p
    raise ValueError(
        f"step too large for the memory expansion (|omega| dt/4 = {x:.2f}); reduce dt")


def interval_operators(u_nodes, interval_h, h):
    """Per-interval operators R[i, p] such that the memory operator is
    L(node j) = sum_{i<j} sum_p mu_p(j - 1 - i) R[i, p]."""
    n_int = len(interval_h)
    evals, evecs = np.linalg.eigh(interval_h)
    omega = evals[:, :, None] - evals[:, None, :]
    order = _moment_order(np.max(np.abs(omega)) if n_int else 0.0, h)
    s_tilde = np.conj(np.swapaxes(evecs, 1, 2)) @ BATH_OPERATOR @ evecs
    b = np.conj(np.swapaxes(u_nodes[1:], 1, 2)) @ evecs
    b_dag = np.conj(np.swapaxes(b, 1, 2))
    base = s_tilde * np.exp(-0.5j * h * omega)
    r = np.empty((n_int, order + 1, 4, 4), dtype=complex)
    term = base
    for p in range(order + 1):
        if p:
            term = term * (-1j * omega) / p
        r[:, p] = b @ term @ b_dag
    return r


def memory_operators(r, noise_moments, dissip_moments):
    """All node memory operators by FFT convolution of moments with R."""
    n_int, n_p = r.shape[:2]
    n_nodes = n_int + 1
    lam = np.zeros((2, n_nodes, 4, 4), dtype=complex)
    if n_int == 0:
        return lam[0], lam[1]
    flat = r.reshape(n_int, n_p, 16)
    for c, mom in enumerate((noise_moments, dissip_moments)):
        mu = mom[:n_int, :n_p]
        if not np.any(mu):
            continue
        conv = fftconvolve(mu[:, :, None], flat, axes=0)[:n_int]
        lam[c, 1:] = conv.sum(axis=1).reshape(n_int, 4, 4)
    # memory operators are Hermitian by construction
    return hermitize_batch(lam[0]), hermitize_batch(lam[1])


def memory_operator_direct(j, r, noise_moments, dissip_moments):
    """Direct O(j) history sum for node ``j``; reference for the FFT path."""
    n_p = r.shape[1]
    lam_n = np.zeros((4, 4), dtype=complex)
    lam_d = np.zeros((4, 4), dtype=complex)
    for i in range(j):
        m = j - 1 - i
        for p in range(n_p):
            lam_n += noise_moments[m, p] * r[i, p]
            lam_d += dissip_moments[m, p] * r[i, p]
    return lam_n, lam_d


def hermitize_batch(m):
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def prepare_record(cfg, kernels=None):
    """Everything rho-independent: propagators, A(t) and memory operators."""
    if kernels is None:
        kernels = precompute_kernels(cfg)
    node_times, u_nodes, interval_h = build_nodes(cfg)
    h = 0.5 * cfg.dt
    a_nodes = np.conj(np.swapaxes(u_nodes, 1, 2)) @ BATH_OPERATOR @ u_nodes
    r = interval_operators(u_nodes, interval_h, h)
    lam_n, lam_d = memory_operators(r, kernels.noise_moments, kernels.dissip_moments)
    return EvolutionRecord(times=node_times[::2].copy(), node_times=node_times,
                           u_nodes=u_nodes, a_nodes=a_nodes, lambda_noise=lam_n,
                           lambda_dissip=lam_d, moment_order=r.shape[1] - 1,
                           kernels=kernels)


def master_rhs(rho_i, node, record):
    """Right-hand side of the equation of motion at half-step node ``node``.

    The result is traceless: both bracket structures are commutators.
    """
    a = record.a_nodes[node]
    lam_n = record.lambda_noise[node]
    lam_d = record.lambda_dissip[node]
    return (-commutator(a, commutator(lam_n, rho_i))
            + 1j * commutator(a, anticommutator(lam_d, rho_i)))


def _panel_rule(t, a, n_gl=16, ratio=1.5):
    # Gauss-Legendre nodes/weights on [0, t], panels graded away from tau = 0
    edges = [0.0]
    width = min(0.1 * a, t)
    while edges[-1] + width < t:
        edges.append(edges[-1] + width)
        width *= ratio
    edges.append(t)
    edges = np.asarray(edges)
    x, w = np.polynomial.legendre.leggauss(n_gl)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    weights = 0.5 * (hi - lo) * w
    return nodes.ravel(), weights.ravel()


def early_memory(t, omega, kernels):
    """Scalars F_x(t, w) = int_0^t K_x(tau) exp(i w (t - tau)) dtau, x = n, d.

    Used inside the first integrator step, where the kernels rise and decay
    on the scale 1/omega_c and the node grid cannot resolve them.
    """
    if t == 0 or kernels.eta == 0:
        zero = np.zeros_like(omega, dtype=complex)
        return zero, zero
    a = 1.0 / kernels.omega_c
    tau, w = _panel_rule(t, a)
    c0 = kernels.eta / (a + 1j * tau) ** 2
    k_n = c0.real + thermal_correction_series(tau, kernels.eta, kernels.omega_c, kernels.beta)
    k_d = -c0.imag
    phase = np.exp(1j * omega[..., None] * (t - tau))
    return (phase @ (w * k_n)), (phase @ (w * k_d))


def graded_grid(dt, a, ratio=1.2):
    """Sub-step boundaries on [0, dt], geometric from a/20 upwards."""
    pts = [0.0, min(a / 20.0, dt)]
    while pts[-1] * ratio < dt:
        pts.append(pts[-1] * ratio)
    if pts[-1] < dt:
        pts.append(dt)
    return np.asarray(pts)


def first_step(rho0, cfg, kernels):
    """RK4 over the first step on a graded sub-grid resolving the bath slip.

    The bare Hamiltonian is frozen at its mid-step value for this step.
    """
    if kernels is None or kernels.eta == 0:
        return rho0
    evals, evecs = np.linalg.eigh(build_hqq(0.5 * cfg.dt, cfg))
    omega = evals[:, None] - evals[None, :]
    s_tilde = evecs.conj().T @ BATH_OPERATOR @ evecs
    to_lab = lambda m: evecs @ m @ evecs.conj().T

    def rhs(rho, t):
        a_t = to_lab(s_tilde * np.exp(1j * omega * t))
        f_n, f_d = early_memory(t, omega, kernels)
        lam_n = hermitize(to_lab(s_tilde * f_n))
        lam_d = hermitize(to_lab(s_tilde * f_d))
        return (-commutator(a_t, commutator(lam_n, rho))
                + 1j * commutator(a_t, anticommutator(lam_d, rho)))

    grid = graded_grid(cfg.dt, 1.0 / kernels.omega_c)
    rho = rho0
    for t0, t1 in zip(grid[:-1], grid[1:]):
        h = t1 - t0
        k1 = rhs(rho, t0)
        k2 = rhs(rho + 0.5 * h * k1, t0 + 0.5 * h)
        k3 = rhs(rho + 0.5 * h * k2, t0 + 0.5 * h)
        k4 = rhs(rho + h * k3, t1)
        rho = rho + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def check_physical(rho, label=""):
    """Return (trace drift, Hermiticity drift, min eigenvalue); raise if unphysical."""
    trace_drift = abs(np.trace(rho) - 1.0)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    min_eig = float(np.min(np.linalg.eigvalsh(hermitize(rho))))
    if trace_drift > TRACE_TOL:
        raise PhysicalityError(f"{label}trace drifted by {trace_drift:.3e}")
    if min_eig < POSITIVITY_TOL:
        raise PhysicalityError(f"{label}eigenvalue {min_eig:.3e} below {POSITIVITY_TOL}")
    return trace_drift, herm, min_eig


def rk4_step(rho_i, step_index, record, dt, cfg=None):
    """Classic RK4 from step n to n + 1 using nodes 2n, 2n + 1, 2n + 2.

    When ``cfg`` is given, step 0 is integrated on a graded sub-grid
    (:func:`first_step`) to resolve the initial bath transient.
    """
    j = 2 * step_index
    if step_index == 0 and cfg is not None:
        rho = first_step(rho_i, cfg, record.kernels)
    else:
        k1 = master_rhs(rho_i, j, record)
        k2 = master_rhs(rho_i + 0.5 * dt * k1, j + 1, record)
        k3 = master_rhs(rho_i + 0.5 * dt * k2, j + 1, record)
        k4 = master_rhs(rho_i + dt * k3, j + 2, record)
        rho = rho_i + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > HERMITICITY_TOL:
        raise PhysicalityError(f"step {step_index}: Hermiticity drift {herm:.3e}")
    rho = hermitize(rho)
    check_physical(rho, label=f"step {step_index}: ")
    return rho, herm


def run_evolution(cfg, rho0, kernels=None, record=None):
    """Integrate rho_I over the configured horizon; returns the filled record."""
    start = time.perf_counter()
    rho0 = np.asarray(rho0, dtype=complex)
    check_physical(rho0, label="initial state: ")
    if record is None:
        record = prepare_record(cfg, kernels)
    n = cfg.n_steps
    traj = np.empty((n + 1, 4, 4), dtype=complex)
    traj[0] = rho0
    max_herm = 0.0
    min_eig = float(np.min(np.linalg.eigvalsh(rho0)))
    max_trace = abs(np.trace(rho0) - 1.0)
    rho = rho0
    for k in range(n):
        rho, herm = rk4_step(rho, k, record, cfg.dt, cfg)
        traj[k + 1] = rho
        max_herm = max(max_herm, herm)
        max_trace = max(max_trace, abs(np.trace(rho) - 1.0))
        min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(rho))))
    record.rho_traj = traj
    record.max_trace_drift = float(max_trace)
    record.max_hermiticity_drift = max_herm
    record.min_eigenvalue = min_eig
    record.wall_time = time.perf_counter() - start
    return record


def trajectory_rows(record):
    """Rows for the trajectory CSV: time, Re/Im of 16 entries, trace, min eig."""
    rows = []
    for t, rho in zip(record.times, record.rho_traj):
        flat = rho.reshape(-1)
        row = [t]
        for z in flat:
            row.extend((z.real, z.imag))
        row.append(np.trace(rho).real)
        row.append(float(np.min(np.linalg.eigvalsh(rho))))
        rows.append(row)
    return rows


def trajectory_header():
    cols = ["time"]
    for r in range(4):
        for c in range(4):
            cols.extend((f"re_rho_{r}{c}", f"im_rho_{r}{c}"))
    return cols + ["trace", "min_eigenvalue"]
