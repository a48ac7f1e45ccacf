"""Dense matrix numerics on U(2**N): exponentials, norms and distances.

Basis convention: qubit 0 is the most significant bit of the computational
basis index, so ``dense("XI") == kron(X, I)``.
"""
from __future__ import annotations

import numpy as np

from .pauli import PauliString

#: Largest register for which dense 2**N x 2**N matrices are built.
MAX_DENSE_QUBITS = 10

UNITARY_TOL = 1e-8
HERMITIAN_TOL = 1e-10
STATE_NORM_TOL = 1e-9


def _n_qubits_of(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _check_cap(n_qubits: int) -> None:
    if n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"dense matrices capped at {MAX_DENSE_QUBITS} qubits, got {n_qubits}")


def _reverse_bits(v: int, n: int) -> int:
    return int(format(v, f"0{n}b")[::-1], 2) if n else 0


def _dense_pauli(p: PauliString) -> np.ndarray:
    n = p.n_qubits
    _check_cap(n)
    dim = 1 << n
    # basis-index masks: qubit j lives at bit n-1-j
    xm = _reverse_bits(p.x_mask, n)
    zm = _reverse_bits(p.z_mask, n)
    cols = np.arange(dim)
    parity = np.zeros(dim, dtype=np.int64)
    masked = cols & zm
    while masked.any():
        parity ^= masked & 1
        masked >>= 1
    y_count = bin(p.x_mask & p.z_mask).count("1")
    base = 1j**y_count
    out = np.zeros((dim, dim), dtype=complex)
    out[cols ^ xm, cols] = base * (1 - 2 * parity)
    return out


def dense(obj) -> np.ndarray:
    """Dense matrix of a :class:`PauliString` or of a Hamiltonian (``.terms``)."""
    if isinstance(obj, PauliString):
        return _dense_pauli(obj)
    terms = getattr(obj, "terms", None)
    if terms is None:
        raise TypeError(f"cannot build a dense matrix from {type(obj).__name__}")
    n = obj.n_qubits
    _check_cap(n)
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for p, h in terms.items():
        out += h * _dense_pauli(p)
    return out


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol * scale)


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    eye = np.eye(u.shape[0])
    return bool(np.max(np.abs(u.conj().T @ u - eye)) <= tol)


def expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(1j * w * t)) @ v.conj().T


def norm_fbar(a: np.ndarray) -> float:
    """Frobenius norm normalized so the identity has norm one."""
    a = np.asarray(a)
    return float(np.linalg.norm(a) / np.sqrt(a.shape[0]))


def norm_op(a: np.ndarray) -> float:
    """Largest singular value, from the spectrum of ``a^dagger a``."""
    a = np.asarray(a, dtype=complex)
    w = np.linalg.eigvalsh(a.conj().T @ a)
    return float(np.sqrt(max(w[-1], 0.0)))


def eigenphases(u: np.ndarray) -> np.ndarray:
    """Eigenphases of a unitary in ``(-pi, pi]``."""
    lam = np.angle(np.linalg.eigvals(u))
    lam[lam <= -np.pi] = np.pi
    return lam


def killing_distance(u1: np.ndarray, u2: np.ndarray) -> float:
    """Bi-invariant geodesic distance ``2**(-N/2) * sqrt(sum lambda_i**2)``.

    ``lambda_i`` are the principal eigenphases of ``u2^dagger u1``; the result
    lies in ``[0, pi]``.
    """
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    if u1.shape != u2.shape:
        raise ValueError("dimension mismatch")
    if not (is_unitary(u1) and is_unitary(u2)):
        raise ValueError("killing_distance requires unitary inputs")
    lam = eigenphases(u2.conj().T @ u1)
    return float(min(np.sqrt(np.sum(lam**2) / u1.shape[0]), np.pi))


def fbar_distance(u1: np.ndarray, u2: np.ndarray) -> float:
    if np.shape(u1) != np.shape(u2):
        raise ValueError("dimension mismatch")
    return norm_fbar(np.asarray(u1) - np.asarray(u2))


def op_distance(u1: np.ndarray, u2: np.ndarray) -> float:
    if np.shape(u1) != np.shape(u2):
        raise ValueError("dimension mismatch")
    return norm_op(np.asarray(u1) - np.asarray(u2))


def state_error(u_a: np.ndarray, u_b: np.ndarray, psi: np.ndarray) -> float:
    """Inner-product error ``sqrt(2 - 2 Re <psi_a|psi_b>)``."""
    psi = np.asarray(psi, dtype=complex)
    if abs(np.vdot(psi, psi).real - 1.0) > STATE_NORM_TOL:
        raise ValueError("state vector is not normalized")
    overlap = np.vdot(u_a @ psi, u_b @ psi).real
    return float(np.sqrt(max(2.0 - 2.0 * overlap, 0.0)))


def matrix_to_json(a: np.ndarray) -> list:
    """Row-major nested list of ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
