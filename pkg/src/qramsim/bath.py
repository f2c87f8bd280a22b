"""Ohmic bath: spectral density and the two bath-correlation kernels.

With J(e) = eta * e * exp(-e / omega_c) the kernels entering the reduced
equation of motion are

    K_n(tau) = int_0^inf J(e) coth(beta e / 2) cos(e tau) de     (noise)
    K_d(tau) = int_0^inf J(e) sin(e tau) de                      (dissipation)

At zero temperature both follow from K_n - i K_d = eta / (a + i tau)^2 with
a = 1 / omega_c. The finite-temperature part of K_n is evaluated either by
adaptive quadrature (:func:`noise_kernel`) or by the image series
2 eta sum_k Re (a + k beta + i tau)^-2 (:func:`noise_kernel_series`).
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

# Taylor order ceiling for the interval moments used by the integrator
MAX_MOMENT_ORDER = 24
_GL_NODES = 24


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature misses its requested tolerance."""


def spectral_density(eps, eta, omega_c):
    eps = np.asarray(eps, dtype=float)
    if np.any(eps < 0):
        raise ValueError("spectral density is defined for eps >= 0")
    out = eta * eps * np.exp(-eps / omega_c)
    return float(out) if out.ndim == 0 else out


def dissipation_kernel(tau, eta, omega_c):
    """K_d(tau) = 2 eta a tau / (a^2 + tau^2)^2, a = 1/omega_c."""
    a = 1.0 / omega_c
    tau = np.asarray(tau, dtype=float)
    out = 2.0 * eta * a * tau / (a * a + tau * tau) ** 2
    return float(out) if out.ndim == 0 else out


def zero_temperature_noise_kernel(tau, eta, omega_c):
    """K_n at beta -> infinity: eta (a^2 - tau^2) / (a^2 + tau^2)^2."""
    a = 1.0 / omega_c
    tau = np.asarray(tau, dtype=float)
    out = eta * (a * a - tau * tau) / (a * a + tau * tau) ** 2
    return float(out) if out.ndim == 0 else out


def _j_coth(eps, eta, omega_c, beta):
    # J(e) coth(beta e / 2), finite limit 2 eta / beta at e = 0
    if np.isinf(beta):
        return eta * eps * np.exp(-eps / omega_c)
    x = 0.5 * beta * eps
    if x < 1e-8:
        return 2.0 * eta / beta * np.exp(-eps / omega_c)
    return eta * eps * np.exp(-eps / omega_c) / np.tanh(x)


def noise_kernel(tau, eta, omega_c, beta, rtol=1e-10):
    """K_n(tau) by adaptive quadrature of its defining integral.

    Absolute tolerance is ``rtol * eta * omega_c**2``. ``beta=np.inf`` gives
    the zero-temperature kernel. Raises :class:`QuadratureError` when the
    estimated error exceeds the tolerance.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if eta == 0:
        return 0.0
    tol = rtol * eta * omega_c ** 2
    f = lambda e: _j_coth(e, eta, omega_c, beta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        # the thermal part lives below a few / beta; resolve it separately
        cut = min(50.0 / beta, omega_c) if np.isfinite(beta) else omega_c
        pts = [p for p in (1.0 / beta, 5.0 / beta) if 0 < p < cut] or None
        if tau == 0:
            v1, e1 = integrate.quad(f, 0.0, cut, points=pts, epsabs=tol / 4, epsrel=0.0, limit=400)
            v2, e2 = integrate.quad(f, cut, np.inf, epsabs=tol / 4, epsrel=0.0, limit=400)
        else:
            g = lambda e: f(e) * np.cos(e * tau)
            if tau * cut < 50.0:
                v1, e1 = integrate.quad(g, 0.0, cut, points=pts, epsabs=tol / 4,
                                        epsrel=0.0, limit=400)
            else:
                v1, e1 = integrate.quad(f, 0.0, cut, weight="cos", wvar=tau,
                                        epsabs=tol / 4, epsrel=0.0, limit=400)
            v2, e2 = integrate.quad(f, cut, np.inf, weight="cos", wvar=tau,
                                    epsabs=tol / 4, limlst=200, limit=400)
        val, err = v1 + v2, e1 + e2
    if not np.isfinite(val) or err > tol:
        raise QuadratureError(
            f"noise kernel quadrature at tau={tau} reached error {err:.3e} > {tol:.3e}")
    return val


def thermal_correction_series(tau, eta, omega_c, beta, n_terms=400):
    """K_n(tau) - K_n^(beta=inf)(tau) from the image-charge series.

    coth(x/2) = 1 + 2 sum_k exp(-k x) turns the thermal part into
    2 eta sum_{k>=1} Re (a + k beta + i tau)^-2; the series is summed
    explicitly to ``n_terms`` and closed with an Euler-Maclaurin tail.
    """
    tau = np.asarray(tau, dtype=float)
    if np.isinf(beta) or eta == 0:
        return np.zeros_like(tau) if tau.ndim else 0.0
    z = 1.0 / omega_c + 1j * tau
    head = np.zeros_like(z)
    for k in range(1, n_terms + 1):
        head += 1.0 / (z + k * beta) ** 2
    zk = z + (n_terms + 1) * beta
    # sum_{k>K} f(k) ~ int_{K+1}^inf f + f(K+1)/2 - f'(K+1)/12 + f'''(K+1)/720
    tail = (1.0 / (beta * zk) + 0.5 / zk ** 2 + beta / (6.0 * zk ** 3)
            - beta ** 3 / (30.0 * zk ** 5))
    out = 2.0 * eta * np.real(head + tail)
    return float(out) if out.ndim == 0 else out


def noise_kernel_series(tau, eta, omega_c, beta):
    """Closed form plus thermal series; agrees with :func:`noise_kernel`."""
    return (zero_temperature_noise_kernel(tau, eta, omega_c)
            + thermal_correction_series(tau, eta, omega_c, beta))


@dataclass(frozen=True)
class BathKernels:
    """Kernels tabulated on tau = 0, dt, 2 dt, ... plus integrator moments.

    ``noise_moments[m, p]`` and ``dissip_moments[m, p]`` hold
    int over [m h, (m+1) h] of K(tau) (tau - (m + 1/2) h)^p dtau with
    h = dt / 2, the history resolution of the integrator.
    """

    tau_grid: np.ndarray
    k_noise: np.ndarray
    k_dissip: np.ndarray
    eta: float
    omega_c: float
    beta: float
    h: float
    noise_moments: np.ndarray
    dissip_moments: np.ndarray


def _complex_moments_first(h, m, a, order):
    # int over one interval of (a + i tau)^-2 (tau - mid)^p, spike-aware
    lo, hi = m * h, (m + 1) * h
    mid = 0.5 * (lo + hi)
    pts = [p for p in (a, 3 * a, 10 * a) if lo < p < hi] or None
    out = np.empty(order + 1, dtype=complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for p in range(order + 1):
            tol = 1e-15 * (0.5 * h) ** p / a
            re = integrate.quad(lambda t: np.real((a + 1j * t) ** -2) * (t - mid) ** p,
                                lo, hi, points=pts, epsabs=tol, epsrel=1e-13, limit=400)[0]
            im = integrate.quad(lambda t: np.imag((a + 1j * t) ** -2) * (t - mid) ** p,
                                lo, hi, points=pts, epsabs=tol, epsrel=1e-13, limit=400)[0]
            out[p] = re + 1j * im
    return out


def interval_moments(n_intervals, h, eta, omega_c, beta, order=MAX_MOMENT_ORDER):
    """Moments of K_n and K_d over consecutive lag intervals of width ``h``.

    Returns ``(noise, dissip)`` with shape ``(n_intervals, order + 1)``.
    """
    a = 1.0 / omega_c
    noise = np.zeros((n_intervals, order + 1))
    dissip = np.zeros((n_intervals, order + 1))
    if n_intervals == 0 or eta == 0:
        return noise, dissip
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    powers = np.arange(order + 1)
    m = np.arange(n_intervals)
    mid = (m + 0.5) * h
    nodes = mid[:, None] + 0.5 * h * x[None, :]
    basis = (0.5 * h * x[None, :, None]) ** powers[None, None, :]
    weights = 0.5 * h * w[None, :, None]
    zero_t = np.sum(weights * basis / (a + 1j * nodes[..., None]) ** 2, axis=1)
    # intervals near the tau ~ a spike need adaptive quadrature
    n_spike = int(min(n_intervals, max(1, np.ceil(20 * a / h))))
    if n_spike <= 8:
        for k in range(n_spike):
            zero_t[k] = _complex_moments_first(h, k, a, order)
    thermal = np.zeros((n_intervals, order + 1))
    if not np.isinf(beta):
        corr = thermal_correction_series(nodes, 1.0, omega_c, beta)
        thermal = np.sum(weights * basis * corr[..., None], axis=1)
    noise = eta * (np.real(zero_t) + thermal)
    dissip = -eta * np.imag(zero_t)
    return noise, dissip


def precompute_kernels(cfg):
    """Tabulate both kernels and the integrator moments for ``cfg``."""
    n = cfg.n_steps
    tau = cfg.dt * np.arange(n + 1)
    if cfg.eta == 0:
        k_noise = np.zeros_like(tau)
        k_dissip = np.zeros_like(tau)
    else:
        k_noise = noise_kernel_series(tau, cfg.eta, cfg.omega_c, cfg.beta)
        k_dissip = dissipation_kernel(tau, cfg.eta, cfg.omega_c)
    h = 0.5 * cfg.dt
    noise_m, dissip_m = interval_moments(2 * n, h, cfg.eta, cfg.omega_c, cfg.beta)
    return BathKernels(tau_grid=tau, k_noise=np.atleast_1d(k_noise),
                       k_dissip=np.atleast_1d(k_dissip), eta=cfg.eta,
                       omega_c=cfg.omega_c, beta=cfg.beta, h=h,
                       noise_moments=noise_m, dissip_moments=dissip_m)
