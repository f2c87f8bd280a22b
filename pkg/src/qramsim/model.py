"""Two-qubit parent/memory Hamiltonian and the resonance window schedule.

All simulator quantities are in units where the memory splitting omega_m = 1
(times in 1/omega_m) and hbar = 1.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate

from .core import kron, pauli

RAMP_SHAPES = ("half-cosine", "smoothstep")

# idle time before the up-ramp starts, in units of the half Rabi period
DEFAULT_LEAD = 0.65
DEFAULT_RAMP_FRACTION = 0.05
DEFAULT_W_OFF = 0.5


def half_rabi_time(rabi):
    """Transfer time pi / (2 |Omega|)."""
    return np.pi / (2.0 * abs(rabi))


@dataclass(frozen=True)
class WindowSpec:
    """Trapezoidal resonance window with smooth ramps.

    W equals ``w_off`` before ``t_on``, ramps to 1 over ``tau_ramp``, stays on
    resonance until ``t_off`` and ramps back to ``w_off`` over ``tau_ramp``.
    """

    w_off: float = DEFAULT_W_OFF
    t_on: float = 0.0
    t_off: float = 1.0
    tau_ramp: float = 0.0
    shape: str = "half-cosine"

    def __post_init__(self):
        if not self.w_off > 0 or self.w_off == 1.0:
            raise ValueError("w_off must be positive and different from 1")
        if self.tau_ramp < 0 or self.t_on < 0:
            raise ValueError("t_on and tau_ramp must be non-negative")
        if self.t_off - (self.t_on + self.tau_ramp) <= 0:
            raise ValueError("window plateau must have positive length")
        if self.shape not in RAMP_SHAPES:
            raise ValueError(f"unknown ramp shape {self.shape!r}")

    @classmethod
    def for_transfer(cls, rabi, w_off=DEFAULT_W_OFF, lead=DEFAULT_LEAD,
                     ramp_fraction=DEFAULT_RAMP_FRACTION, shape="half-cosine"):
        """Window whose plateau lasts exactly one half Rabi period.

        ``lead`` and ``ramp_fraction`` are in units of the half Rabi period.
        """
        t_half = half_rabi_time(rabi)
        tau = ramp_fraction * t_half
        t_on = lead * t_half
        return cls(w_off=w_off, t_on=t_on, t_off=t_on + tau + t_half,
                   tau_ramp=tau, shape=shape)

    @property
    def plateau_start(self):
        return self.t_on + self.tau_ramp

    @property
    def t_end(self):
        """Time at which W is back at ``w_off``."""
        return self.t_off + self.tau_ramp


def _ramp(s, shape):
    # s in [0, 1] -> [0, 1], C1 at both ends
    if shape == "half-cosine":
        return 0.5 * (1.0 - np.cos(np.pi * s))
    return s * s * (3.0 - 2.0 * s)


def _ramp_integral(s, shape):
    # integral of _ramp from 0 to s
    if shape == "half-cosine":
        return 0.5 * (s - np.sin(np.pi * s) / np.pi)
    return s ** 3 - 0.5 * s ** 4


def window(t, spec):
    """Dimensionless parent level spacing W(t) = omega_p(t) / omega_m."""
    t = np.asarray(t, dtype=float)
    if spec.tau_ramp > 0:
        s_up = np.clip((t - spec.t_on) / spec.tau_ramp, 0.0, 1.0)
        s_down = np.clip((t - spec.t_off) / spec.tau_ramp, 0.0, 1.0)
        frac = _ramp(s_up, spec.shape) - _ramp(s_down, spec.shape)
    else:
        frac = ((t >= spec.t_on) & (t < spec.t_off)).astype(float)
    w = spec.w_off + (1.0 - spec.w_off) * frac
    return float(w) if w.ndim == 0 else w


def window_integral(t, spec):
    """Exact integral of W from 0 to t."""
    t = np.asarray(t, dtype=float)
    if spec.tau_ramp > 0:
        def part(t0):
            s = np.clip((t - t0) / spec.tau_ramp, 0.0, 1.0)
            tail = np.maximum(t - t0 - spec.tau_ramp, 0.0)
            return spec.tau_ramp * _ramp_integral(s, spec.shape) + tail
        on_time = part(spec.t_on) - part(spec.t_off)
    else:
        on_time = np.clip(t, spec.t_on, spec.t_off) - spec.t_on
    out = spec.w_off * t + (1.0 - spec.w_off) * on_time
    return float(out) if out.ndim == 0 else out


WindowLike = Union[WindowSpec, Callable[[float], float], None]


@dataclass(frozen=True)
class SimulationConfig:
    """Physical and numerical parameters, all in units of omega_m.

    ``window`` may be a :class:`WindowSpec`, any callable t -> W(t) (for
    example a SQUID tunnelling schedule from :func:`squid_params_to_model`),
    or ``None`` for a parent held on resonance (W = 1).
    """

    omega_m: float = 1.0
    rabi: complex = 0.01
    eta: float = 0.0
    omega_c: float = 100.0
    beta: float = 100.0
    window: WindowLike = None
    dt: float = 1.0
    t_total: float = 100.0
    n_sub: int = 4

    def __post_init__(self):
        if not (self.omega_m > 0 and self.omega_c > 0 and self.beta > 0 and self.dt > 0):
            raise ValueError("omega_m, omega_c, beta and dt must be positive")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if abs(self.rabi) >= self.omega_m:
            raise ValueError("|rabi| must stay below omega_m (weak coupling)")
        if self.t_total < 0:
            raise ValueError("t_total must be non-negative")
        if self.n_sub < 1:
            raise ValueError("n_sub must be at least 1")

    @property
    def t_half_rabi(self):
        return half_rabi_time(self.rabi) if self.rabi != 0 else np.inf

    @property
    def n_steps(self):
        return int(round(self.t_total / self.dt))

    def with_(self, **changes):
        return replace(self, **changes)

    def w(self, t):
        if self.window is None:
            return 1.0 if np.ndim(t) == 0 else np.ones_like(np.asarray(t, dtype=float))
        if isinstance(self.window, WindowSpec):
            return window(t, self.window)
        return self.window(t)

    def w_integral(self, t):
        if self.window is None:
            return float(t)
        if isinstance(self.window, WindowSpec):
            return window_integral(t, self.window)
        val, _ = integrate.quad(self.window, 0.0, float(t), limit=200)
        return val


_SZ = pauli("z")
_SX = pauli("x")
_I2 = pauli("identity")
MEMORY_Z = kron(_SZ, _I2)
PARENT_Z = kron(_I2, _SZ)


def coupling_block(rabi):
    return np.array([[0.0, rabi], [np.conj(rabi), 0.0]], dtype=complex)


def build_hqq(t, cfg):
    """Two-qubit Hamiltonian at time t (4x4, Hermitian)."""
    omega_p = cfg.omega_m * cfg.w(t)
    h = 0.5 * cfg.omega_m * MEMORY_Z + 0.5 * omega_p * PARENT_Z
    return h - kron(coupling_block(cfg.rabi), _SX)


def squid_params_to_model(delta_t, epsilon=0.0, omega_hf=1.0):
    """Map a SQUID tunnelling schedule onto the window W = Delta / omega_hf.

    With zero bias the SQUID Hamiltonian in its energy basis is
    (Delta/2) sigma_z, so omega_p(t) = Delta(t). ``delta_t`` may be a scalar,
    an array or a callable of time; the result has the same kind. A non-zero
    bias needs an extra basis rotation that is not implemented.
    """
    if epsilon != 0.0:
        raise ValueError("only the zero-bias (epsilon = 0) mapping is supported")
    if callable(delta_t):
        return lambda t: np.asarray(delta_t(t)) / omega_hf
    return np.asarray(delta_t, dtype=float) / omega_hf
