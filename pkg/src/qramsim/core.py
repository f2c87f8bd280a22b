"""Small dense complex-matrix algebra for two-qubit simulations.

Conventions used throughout the package:

* single-qubit basis order is (|0>, |1>) with sigma_z |1> = +|1>, so the
  excited state |1> sits at +omega/2;
* two-qubit states |ij> = |i>_memory (x) |j>_parent carry linear index 2*i + j.
"""

import numpy as np

HERMITIAN_TOL = 1e-12

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    "identity": np.eye(2, dtype=complex),
}
_PAULI["i"] = _PAULI["identity"]


def pauli(which):
    """Return a fresh copy of the 2x2 Pauli matrix labelled ``which``.

    ``which`` is one of ``"x"``, ``"y"``, ``"z"``, ``"identity"`` (alias ``"i"``).
    The set obeys sigma_x sigma_y = i sigma_z in the basis order (|0>, |1>).
    """
    try:
        return _PAULI[which].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli label {which!r}") from None


def kron(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("kron expects square matrices")
    return np.kron(a, b)


def basis_state(i, j):
    """Computational basis ket |ij> (memory i, parent j) as a length-4 vector."""
    psi = np.zeros(4, dtype=complex)
    psi[2 * i + j] = 1.0
    return psi


def pure_state(amplitudes, tol=1e-12):
    """Validate a state vector; raises if it is not normalised within ``tol``."""
    psi = np.asarray(amplitudes, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state norm {norm!r} differs from 1")
    return psi


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    scale = np.max(np.abs(m)) if m.size else 0.0
    if scale == 0.0:
        return True
    return bool(np.max(np.abs(m - m.conj().T)) <= tol * scale)


def is_unitary(u, tol=1e-10):
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def herm_expm(h, dt):
    """exp(-i h dt) for Hermitian ``h`` via its eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("herm_expm requires a Hermitian matrix")
    # symmetrise so eigh sees exactly Hermitian input
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (evecs * np.exp(-1j * evals * dt)) @ evecs.conj().T


def hermitize(m):
    return 0.5 * (m + m.conj().T)
