"""Decay fits, transfer fidelity and small physicality diagnostics."""

from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

# a fitted decay smaller than this over the sampled span counts as "no decay"
MIN_RESOLVED_DECAY = 1e-6


@dataclass(frozen=True)
class FitResult:
    """Outcome of a decay fit.

    ``params`` is ``(c0, T)`` for the exponential and ``(c0, c1, T)`` for the
    damped cosine. ``T`` is ``inf`` when no decay is resolved over the span.
    """

    params: tuple
    rms_residual: float
    converged: bool
    iterations: int
    resolved: bool = True

    @property
    def decay_time(self):
        return self.params[-1]


@dataclass(frozen=True)
class FidelitySeries:
    times: np.ndarray
    values: np.ndarray
    final_fidelity: float


def _fit_window(times, decay_guess, factor):
    if not np.isfinite(decay_guess) or decay_guess <= 0:
        return np.ones_like(times, dtype=bool)
    t_end = min(times[-1], times[0] + factor * decay_guess)
    return times <= t_end


def fit_exponential(times, values, window_factor=3.0):
    """Least-squares fit of c0 exp(-t / T).

    Starts from a log-linear regression, then refines (c0, 1/T) with
    Levenberg-Marquardt (relative step tolerance 1e-8) over
    t <= min(t_end, window_factor * T_guess).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 10:
        raise ValueError("need at least 10 samples")
    if np.any(y <= 0):
        raise ValueError("exponential fit needs positive values")
    slope, intercept = np.polyfit(t - t[0], np.log(y), 1)
    guess_t = -1.0 / slope if slope < 0 else np.inf
    keep = _fit_window(t, guess_t, window_factor)
    t, y = t[keep], y[keep]
    t0 = t[0]
    x0 = np.array([np.exp(intercept), max(-slope, 0.0)])

    def resid(p):
        return p[0] * np.exp(-p[1] * (t - t0)) - y

    sol = optimize.least_squares(resid, x0, method="lm", xtol=1e-8, ftol=1e-15, gtol=1e-15)
    c0, rate = sol.x
    c0 = c0 * np.exp(rate * t0)  # refer amplitude to t = 0
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    resolved = rate * (t[-1] - t[0]) > MIN_RESOLVED_DECAY
    decay = 1.0 / rate if resolved else np.inf
    return FitResult(params=(float(c0), float(decay)), rms_residual=rms,
                     converged=bool(sol.success), iterations=int(sol.nfev),
                     resolved=bool(resolved))


def _peak_frequency(t, y):
    # discrete spectral peak with parabolic refinement, in rad / time
    dt = t[1] - t[0]
    n = len(y)
    pad = 8 * n
    spec = np.abs(np.fft.rfft((y - y.mean()) * np.hanning(n), pad))
    k = int(np.argmax(spec[1:])) + 1
    if 1 <= k < len(spec) - 1:
        a, b, c = spec[k - 1], spec[k], spec[k + 1]
        denom = a - 2 * b + c
        k = k + (0.5 * (a - c) / denom if denom != 0 else 0.0)
    return 2 * np.pi * k / (pad * dt)


def fit_damped_cosine(times, values, window_factor=3.0, min_periods=10):
    """Least-squares fit of c0 cos(c1 t) exp(-t / T).

    The frequency starts at the discrete spectral peak of the series and the
    decay rate at a log-linear fit of the analytic-signal envelope. Uniform
    sampling is assumed.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 10:
        raise ValueError("need at least 10 samples")
    freq = _peak_frequency(t, y)
    if freq * (t[-1] - t[0]) < 2 * np.pi * min_periods:
        raise ValueError(f"fewer than {min_periods} oscillation periods sampled")
    env = np.abs(signal.hilbert(y))
    # trim the envelope ends, where the Hilbert transform rings
    cut = max(1, len(t) // 20)
    slope, _ = np.polyfit(t[cut:-cut], np.log(np.maximum(env[cut:-cut], 1e-300)), 1)
    guess_t = -1.0 / slope if slope < 0 else np.inf
    keep = _fit_window(t, guess_t, window_factor)
    t, y = t[keep], y[keep]
    x0 = np.array([y[0] if y[0] != 0 else np.max(np.abs(y)), freq, max(-slope, 0.0)])

    def resid(p):
        return p[0] * np.cos(p[1] * t) * np.exp(-p[2] * t) - y

    sol = optimize.least_squares(resid, x0, method="lm", xtol=1e-8, ftol=1e-15, gtol=1e-15)
    c0, c1, rate = sol.x
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    resolved = rate * (t[-1] - t[0]) > MIN_RESOLVED_DECAY
    decay = 1.0 / rate if resolved else np.inf
    return FitResult(params=(float(c0), float(abs(c1)), float(decay)), rms_residual=rms,
                     converged=bool(sol.success), iterations=int(sol.nfev),
                     resolved=bool(resolved))


def analytic_t1(eta, omega_p, omega_c):
    """Second-order excited-state lifetime exp(omega_p/omega_c) / (4 pi eta omega_p)."""
    if eta <= 0 or omega_p <= 0 or omega_c <= 0:
        raise ValueError("eta, omega_p and omega_c must be positive")
    return np.exp(omega_p / omega_c) / (4.0 * np.pi * eta * omega_p)


def fidelity(rho, target):
    """sqrt(<psi|rho|psi>) with ``rho`` in the Schroedinger (lab) frame."""
    q = np.real(np.conj(target) @ rho @ target)
    if q < 0:
        if q < -1e-10:
            raise ValueError(f"negative overlap {q:.3e}: density matrix is unphysical")
        q = 0.0
    return float(np.sqrt(q))


def target_evolve(psi, t, cfg):
    """Evolve ``psi`` to time t under the decoupled (Omega = 0) Hamiltonian.

    The Hamiltonian is diagonal, so each basis state |ij> only picks up the
    phase of its energy integrated along the window schedule.
    """
    psi = np.asarray(psi, dtype=complex)
    mem = cfg.omega_m * t
    par = cfg.omega_m * cfg.w_integral(t)
    sign = np.array([-1.0, 1.0])
    phase = 0.5 * (np.repeat(sign, 2) * mem + np.tile(sign, 2) * par)
    return psi * np.exp(-1j * phase)


def purity(rho):
    return float(np.real(np.trace(rho @ rho)))
