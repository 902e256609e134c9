"""Dense complex linear algebra for two- and three-qubit objects.

Everything here works on plain numpy arrays.  The eigensolver is a cyclic
Jacobi scheme that accepts stacks of Hermitian matrices ``(..., n, n)`` so
that ensembles can be diagonalised in one vectorised pass.  Each matrix in a
stack follows its own rotation sequence (converged matrices are frozen), so
a result never depends on which other matrices share the batch.
"""
from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
RANK_TOL = 1e-10
JACOBI_TOL = 1e-13
MAX_SWEEPS = 60
# pivots below this are treated as zero; smaller ones overflow the phase division
PIVOT_FLOOR = 1e-290

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

KET = {
    "00": np.array([1, 0, 0, 0], dtype=complex),
    "01": np.array([0, 1, 0, 0], dtype=complex),
    "10": np.array([0, 0, 1, 0], dtype=complex),
    "11": np.array([0, 0, 0, 1], dtype=complex),
}
PSI_PLUS = (KET["01"] + KET["10"]) / np.sqrt(2)
PSI_MINUS = (KET["01"] - KET["10"]) / np.sqrt(2)
PHI_PLUS = (KET["00"] + KET["11"]) / np.sqrt(2)
PHI_MINUS = (KET["00"] - KET["11"]) / np.sqrt(2)


class StateError(ValueError):
    """A matrix failed one of the density-matrix checks.

    ``residual`` carries the measured violation (max asymmetry, trace
    deviation or most negative eigenvalue).
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.reason = message
        self.residual = residual


def projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def _check_square(m: np.ndarray, dims=(2, 4, 8)) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] not in dims:
        raise ValueError(f"expected square matrix of dimension {dims}, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two single-qubit operators, ``(a⊗b)[2i+k, 2j+l] = a[i,j] b[k,l]``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"tensor expects two 2x2 operators, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def hermiticity_residual(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    return np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2))), axis=(-2, -1))


def _jacobi(a: np.ndarray, want_vectors: bool):
    """Cyclic Jacobi on a stack of Hermitian matrices.

    Real-dtype input runs in real arithmetic.  Returns unsorted eigenvalues
    ``(..., n)`` and, if asked, eigenvector columns ``(..., n, n)``.
    """
    a = np.asarray(a)
    is_real = not np.iscomplexobj(a)
    dtype = float if is_real else complex
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    # batch-last layout keeps row and column slices contiguous
    a = np.moveaxis(np.array(a, dtype=dtype).reshape((-1, n, n)), 0, -1).copy()
    nb = a.shape[-1]
    v = None
    if want_vectors:
        v = np.zeros((n, n, nb), dtype=dtype)
        for i in range(n):
            v[i, i] = 1.0
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    offmask = ~np.eye(n, dtype=bool)

    def off_norm():
        return np.sqrt(np.sum(np.abs(a[offmask]) ** 2, axis=0))

    for _ in range(MAX_SWEEPS):
        active = off_norm() > JACOBI_TOL
        if not active.any():
            break
        for p, q in pairs:
            apq = a[p, q]
            r = np.abs(apq)
            rot = active & (r > PIVOT_FLOOR)
            if not rot.any():
                continue
            r_safe = np.where(rot, r, 1.0)
            theta = (a[q, q].real - a[p, p].real) / (2.0 * r_safe)
            t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(rot, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # conj phase of a[p, q] makes the 2x2 block real before rotating
            if is_real:
                ph = np.where(rot, apq / r_safe, 1.0)
            else:
                ph = np.where(rot, np.conj(apq) / r_safe, 1.0 + 0.0j)
            w_qp = -s * ph
            w_qq = c * ph

            col_p = a[:, p].copy()
            col_q = a[:, q].copy()
            a[:, p] = col_p * c + col_q * w_qp
            a[:, q] = col_p * s + col_q * w_qq
            row_p = a[p].copy()
            row_q = a[q].copy()
            if is_real:
                a[p] = c * row_p + w_qp * row_q
                a[q] = s * row_p + w_qq * row_q
            else:
                a[p] = c * row_p + np.conj(w_qp) * row_q
                a[q] = s * row_p + np.conj(w_qq) * row_q
            a[p, q] = np.where(rot, 0.0, a[p, q])
            a[q, p] = np.where(rot, 0.0, a[q, p])
            if not is_real:
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
            if want_vectors:
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp * c + vq * w_qp
                v[:, q] = vp * s + vq * w_qq
    else:
        if np.any(off_norm() > JACOBI_TOL):
            raise RuntimeError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")

    w = np.real(np.diagonal(a, axis1=0, axis2=1)).copy()
    w = w.reshape(batch_shape + (n,))
    if want_vectors:
        v = np.moveaxis(v, -1, 0).reshape(batch_shape + (n, n))
    return w, v


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix (or stack), sorted descending."""
    m = _check_square(m)
    if np.any(hermiticity_residual(m) > HERMITIAN_TOL):
        raise StateError("not hermitian", float(np.max(hermiticity_residual(m))))
    w, _ = _jacobi(m, want_vectors=False)
    return -np.sort(-w, axis=-1)


def hermitian_eig(m: np.ndarray):
    """Eigenvalues (descending) and matching eigenvector columns."""
    m = _check_square(m)
    if np.any(hermiticity_residual(m) > HERMITIAN_TOL):
        raise StateError("not hermitian", float(np.max(hermiticity_residual(m))))
    w, v = _jacobi(m, want_vectors=True)
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def singular_values(m: np.ndarray) -> np.ndarray:
    """Singular values of a square matrix (or stack), descending.

    Uses the Hermitian dilation [[0, M], [M†, 0]], whose eigenvalues are ±s_i.
    Small singular values come out with absolute error ~eps·‖M‖ instead of
    the ~sqrt(eps) that squaring via M†M would give.
    """
    m = np.asarray(m)
    if not np.iscomplexobj(m):
        m = m.astype(float)
    k = m.shape[-1]
    if m.ndim < 2 or m.shape[-2] != k:
        raise ValueError(f"singular_values expects square matrices, got {m.shape}")
    dil = np.zeros(m.shape[:-2] + (2 * k, 2 * k), dtype=m.dtype)
    dil[..., :k, k:] = m
    dil[..., k:, :k] = np.conj(np.swapaxes(m, -1, -2))
    w, _ = _jacobi(dil, want_vectors=False)
    w = -np.sort(-w, axis=-1)
    return np.maximum(w[..., :k], 0.0)


def validate_density(m: np.ndarray) -> np.ndarray:
    """Check a 4x4 matrix is a two-qubit density matrix; return it as complex128.

    Raises StateError with reason ``not hermitian``, ``trace != 1`` or
    ``not positive semidefinite``.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    herm = float(hermiticity_residual(m))
    if herm > 1e-12:
        raise StateError("not hermitian", herm)
    tr = abs(np.trace(m) - 1.0)
    if tr > TRACE_TOL:
        raise StateError("trace != 1", float(tr))
    w, _ = _jacobi(m, want_vectors=False)
    wmin = float(np.min(w))
    if wmin < -PSD_TOL:
        raise StateError("not positive semidefinite", wmin)
    return m


def spectrum(rho: np.ndarray) -> np.ndarray:
    """Sorted eigenvalues of a state with PSD noise in [-1e-10, 0) clamped to 0."""
    lam = hermitian_eigenvalues(rho)
    if np.any(lam < -PSD_TOL):
        raise StateError("not positive semidefinite", float(np.min(lam)))
    return np.where(lam < 0.0, 0.0, lam)


def rank_of(rho: np.ndarray) -> int:
    return int(np.sum(hermitian_eigenvalues(rho) > RANK_TOL))


def partial_transpose(rho: np.ndarray, subsystem: str = "B") -> np.ndarray:
    """Partial transpose on qubit ``A`` or ``B`` of a 4x4 operator (or stack)."""
    rho = np.asarray(rho)
    t = rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
    # axes: (..., i, k, j, l) for rho[2i+k, 2j+l]
    if subsystem == "B":
        t = np.swapaxes(t, -3, -1)
    elif subsystem == "A":
        t = np.swapaxes(t, -4, -2)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return np.ascontiguousarray(t).reshape(rho.shape)


def partial_trace(psi: np.ndarray, traced_qubit: int) -> np.ndarray:
    """Reduced state of two qubits from a three-qubit pure state.

    ``traced_qubit`` counts from 1; the remaining qubits keep their order.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (8,):
        raise ValueError(f"expected 8 amplitudes, got shape {psi.shape}")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"state is not normalised (norm² = {norm!r})")
    if traced_qubit not in (1, 2, 3):
        raise ValueError(f"traced_qubit must be 1, 2 or 3, got {traced_qubit!r}")
    t = np.moveaxis(psi.reshape(2, 2, 2), traced_qubit - 1, 0).reshape(2, 4)
    return np.einsum("ka,kb->ab", t, t.conj())
