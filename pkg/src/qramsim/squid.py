"""BEC-SQUID hybrid estimates: loop dipole field, coupling overlap and Rabi rate.

Everything here is in SI units. The SQUID loop lies in the xy-plane at the
origin with its dipole moment along z; the BEC cloud is centred on the
axis at (0, 0, d).
"""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np
from scipy import constants

MU_B = constants.physical_constants["Bohr magneton"][0]

# transfer quality bands, in units of T1 / T_R/2 (from the transfer runs)
HIGH_FIDELITY_RATIO = 6.0   # T1 of three Rabi periods: superposition F >= 0.95
HALF_FIDELITY_RATIO = 1.0   # T1 ~ T_R/2: direct F ~ 0.5

CONVENTIONS = ("cyclic", "angular")

_GH_ORDERS = (4, 8, 12, 16, 24, 32, 48, 64)
_NODE_WEIGHT_FLOOR = 1e-14


class ConvergenceError(RuntimeError):
    """Raised when the coupling quadrature misses its tolerance."""


@dataclass(frozen=True)
class SquidBecParams:
    """Hybrid device parameters (SI).

    ``cloud_widths`` are the standard deviations of the Gaussian atomic
    density |phi|^2 along x, y, z. ``dipole_matrix_element`` is taken along
    the local field, so g . mu = |g| mu.
    """

    loop_radius: float = 1e-6
    current: float = 1e-3
    separation: float = 50e-6
    atom_number: float = 1e6
    cloud_widths: Tuple[float, float, float] = (1e-6, 1e-6, 1e-6)
    dipole_matrix_element: float = MU_B
    hyperfine_splitting: float = 2 * np.pi * 6.8e9
    squid_t1: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "cloud_widths", tuple(float(w) for w in self.cloud_widths))
        if len(self.cloud_widths) != 3 or min(self.cloud_widths) < 0:
            raise ValueError("cloud_widths needs three non-negative entries")
        positive = (self.loop_radius, self.current, self.separation, self.atom_number,
                    self.dipole_matrix_element, self.hyperfine_splitting, self.squid_t1)
        if min(positive) <= 0:
            raise ValueError("lengths, current, atom number and times must be positive")
        if self.separation <= self.loop_radius:
            raise ValueError("dipole approximation needs separation > loop radius")

    def with_(self, **changes):
        return replace(self, **changes)


def _prefactor(params):
    # mu0 R^2 I / 4, i.e. mu0 m / (4 pi) with m = I pi R^2
    return constants.mu_0 * params.loop_radius ** 2 * params.current / 4.0


def dipole_field(r, theta, params):
    """Field (B_r, B_theta, B_phi) in tesla at spherical position (r, theta).

    Curl of A = -mu0 R^2 I sin(theta) / (4 r^2) e_phi, so the overall sign
    is negative; only magnitudes enter the coupling.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= params.loop_radius):
        raise ValueError("field requested inside the loop radius")
    c = -_prefactor(params) / r ** 3
    return np.array([2 * c * np.cos(theta), c * np.sin(theta), np.zeros_like(c)])


def dipole_field_cartesian(points, params):
    """Same field in Cartesian components; ``points`` has shape (..., 3)."""
    p = np.asarray(points, dtype=float)
    r = np.linalg.norm(p, axis=-1)
    if np.any(r <= params.loop_radius):
        raise ValueError("field requested inside the loop radius")
    cos_t = p[..., 2] / r
    zhat = np.zeros_like(p)
    zhat[..., 2] = 1.0
    c = -_prefactor(params) / r ** 3
    return c[..., None] * (3 * cos_t[..., None] * p / r[..., None] - zhat)


def _gh_nodes(n):
    x, w = np.polynomial.hermite.hermgauss(n)
    x, w = np.sqrt(2.0) * x, w / np.sqrt(np.pi)
    # nodes this far out carry no weight but may sit on top of the loop
    keep = w > _NODE_WEIGHT_FLOOR * w.max()
    return x[keep], w[keep]


def _node_grid(params, x):
    sx, sy, sz = params.cloud_widths
    gx, gy, gz = np.meshgrid(sx * x, sy * x, params.separation + sz * x, indexing="ij")
    pts = np.stack([gx, gy, gz], axis=-1)
    if np.any(np.linalg.norm(pts, axis=-1) <= params.loop_radius):
        raise ValueError("cloud overlaps the SQUID loop; dipole field not valid there")
    return pts


def _gh_average(params, n):
    x, w = _gh_nodes(n)
    pts = _node_grid(params, x)
    weight = w[:, None, None] * w[None, :, None] * w[None, None, :]
    return np.einsum("ijk,ijkc->c", weight, dipole_field_cartesian(pts, params))


def coupling_integral(params, rtol=1e-6):
    """g = int |phi(r)|^2 B(r) d^3r for identical Gaussian clouds (tesla).

    Tensor Gauss-Hermite rule whose order is raised until two successive
    orders agree to ``rtol`` relative to |g|.
    """
    if max(params.cloud_widths) == 0:
        return dipole_field_cartesian(np.array([0.0, 0.0, params.separation]), params)
    # the loop must sit outside the span of the widest rule; inside it the
    # integrand is singular and refinement would only fail to converge
    reach = np.abs(_gh_nodes(_GH_ORDERS[-1])[0]).max() * params.cloud_widths[2]
    if params.separation - reach <= params.loop_radius:
        raise ValueError("cloud overlaps the SQUID loop; dipole field not valid there")
    prev = _gh_average(params, _GH_ORDERS[0])
    for n in _GH_ORDERS[1:]:
        g = _gh_average(params, n)
        if np.linalg.norm(g - prev) <= rtol * np.linalg.norm(g):
            return g
        prev = g
    raise ConvergenceError(f"coupling integral not converged to {rtol} at order {n}")


def coupling_energy(params, rtol=1e-6):
    """|g . mu| in joules."""
    return float(np.linalg.norm(coupling_integral(params, rtol)) * params.dipole_matrix_element)


def coupling_rate(energy, convention="cyclic"):
    """Turn |g . mu| into a rate in 1/s.

    ``"cyclic"`` uses E/h as the rate (the ~100 Hz reading of the coupling),
    ``"angular"`` uses E/hbar. They differ by 2 pi.
    """
    if convention == "cyclic":
        return energy / constants.h
    if convention == "angular":
        return energy / constants.hbar
    raise ValueError(f"convention must be one of {CONVENTIONS}")


def rabi_from_coupling(g_mu, n_atoms):
    """Collective coupling Omega = sqrt(N) g.mu and transfer time pi / (2 |Omega|)."""
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    omega = np.sqrt(n_atoms) * complex(g_mu)
    return omega, np.pi / (2 * abs(omega))


def fidelity_band(ratio):
    """Qualitative transfer outcome for a given T1 / T_R/2."""
    if ratio >= HIGH_FIDELITY_RATIO:
        return "high (superposition transfer >= 0.95)"
    if ratio >= HALF_FIDELITY_RATIO:
        return "intermediate (direct transfer above ~0.5)"
    return "low (direct transfer below ~0.5)"


@dataclass(frozen=True)
class ConventionEstimate:
    convention: str
    rabi: float
    t_half_rabi: float
    t1_ratio: float
    required_improvement: float
    separation_needed: float
    gap_closed: bool
    band: str


@dataclass(frozen=True)
class FeasibilityReport:
    params: SquidBecParams
    field_on_axis: float
    coupling_magnitude: float
    coupling_hz: float
    target_ratio: float
    estimates: Tuple[ConventionEstimate, ...]

    def estimate(self, convention):
        for e in self.estimates:
            if e.convention == convention:
                return e
        raise KeyError(convention)

    @property
    def feasible(self):
        return any(e.gap_closed for e in self.estimates)

    def to_text(self):
        p = self.params
        lines = [
            f"SQUID R = {p.loop_radius:.3g} m, I = {p.current:.3g} A, "
            f"BEC at d = {p.separation:.3g} m with N = {p.atom_number:.3g}",
            f"on-axis |B|         {self.field_on_axis:.4g} T",
            f"cloud-averaged |g|  {self.coupling_magnitude:.4g} T",
            f"|g.mu| / h          {self.coupling_hz:.4g} Hz",
            f"SQUID T1            {p.squid_t1:.4g} s",
            f"target T1 / T_R/2   {self.target_ratio:.3g}",
        ]
        for e in self.estimates:
            lines += [
                f"[{e.convention}] |Omega| = {e.rabi:.4g} 1/s, T_R/2 = {e.t_half_rabi:.4g} s",
                f"[{e.convention}] T1 / T_R/2 = {e.t1_ratio:.4g}, band: {e.band}",
                f"[{e.convention}] required improvement {e.required_improvement:.4g}, "
                f"separation for target {e.separation_needed:.4g} m, "
                f"gap closed: {'yes' if e.gap_closed else 'no'}",
            ]
        lines.append("Zeeman shifts of the flux-qubit bias are not included.")
        return "\n".join(lines)


def feasibility_report(params=None, target_ratio=HIGH_FIDELITY_RATIO, rtol=1e-6):
    """Compare the transfer time with the SQUID T1 in both rate conventions.

    ``required_improvement`` is the factor by which coupling or SQUID T1
    must grow to reach ``target_ratio``; ``separation_needed`` follows from
    the r^-3 law at fixed cloud shape.
    """
    params = params or SquidBecParams()
    g = coupling_integral(params, rtol)
    energy = float(np.linalg.norm(g)) * params.dipole_matrix_element
    on_axis = float(np.linalg.norm(dipole_field(params.separation, 0.0, params)))
    estimates = []
    for conv in CONVENTIONS:
        rabi, t_half = rabi_from_coupling(coupling_rate(energy, conv), params.atom_number)
        ratio = params.squid_t1 / t_half
        need = target_ratio / ratio
        estimates.append(ConventionEstimate(
            convention=conv, rabi=abs(rabi), t_half_rabi=t_half, t1_ratio=ratio,
            required_improvement=need,
            separation_needed=params.separation * need ** (-1.0 / 3.0) if need > 0 else np.inf,
            gap_closed=bool(ratio >= target_ratio), band=fidelity_band(ratio)))
    return FeasibilityReport(params=params, field_on_axis=on_axis,
                             coupling_magnitude=float(np.linalg.norm(g)),
                             coupling_hz=energy / constants.h, target_ratio=target_ratio,
                             estimates=tuple(estimates))


def coupling_gain(params, new_separation, rtol=1e-6):
    """Ratio |g(new_separation)| / |g(params.separation)|."""
    near = params.with_(separation=new_separation)
    return (np.linalg.norm(coupling_integral(near, rtol))
            / np.linalg.norm(coupling_integral(params, rtol)))
