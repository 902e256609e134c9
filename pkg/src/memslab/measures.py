"""Scalar functionals of two-qubit states.

Functions taking a density matrix also accept a stack ``(..., 4, 4)`` and
then return an array; a single matrix gives a plain float.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcore
from .qcore import PAULIS, SY

X_TOL = 1e-10
ENTANGLED_TOL = 1e-10
MEMS_TOL = 1e-9
CORRELATION_IMAG_TOL = 1e-10

# PAULI_PAIRS[n, m] = σ_n ⊗ σ_m, n, m over (x, y, z)
PAULI_PAIRS = np.array([[np.kron(a, b) for b in PAULIS] for a in PAULIS])
_SYSY = np.kron(SY, SY).real  # σy⊗σy is real


class ConsistencyError(RuntimeError):
    """An internal numerical identity was violated."""


@dataclass(frozen=True)
class XStateView:
    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho14: complex
    rho23: complex


@dataclass(frozen=True)
class MeasureBundle:
    s_l: float
    c: float
    c_star: float
    f: float
    b: float


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def linear_entropy(rho):
    """4/3 (1 - Tr ρ²); 0 for pure states, 1 for I/4."""
    rho = np.asarray(rho)
    purity = np.sum(np.abs(rho) ** 2, axis=(-2, -1))
    return _scalar(4.0 / 3.0 * (1.0 - purity))


def as_x_state(rho) -> XStateView:
    rho = np.asarray(rho)
    mask = np.ones((4, 4), dtype=bool)
    for i, j in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0), (1, 2), (2, 1)]:
        mask[i, j] = False
    worst = float(np.max(np.abs(rho[mask])))
    if worst > X_TOL:
        raise ValueError(f"not an X state (max off-X modulus {worst:.3e})")
    return XStateView(
        rho11=float(rho[0, 0].real),
        rho22=float(rho[1, 1].real),
        rho33=float(rho[2, 2].real),
        rho44=float(rho[3, 3].real),
        rho14=complex(rho[0, 3]),
        rho23=complex(rho[1, 2]),
    )


def concurrence_x(v: XStateView) -> float:
    k1 = abs(v.rho14) - np.sqrt(max(v.rho22 * v.rho33, 0.0))
    k2 = abs(v.rho23) - np.sqrt(max(v.rho11 * v.rho44, 0.0))
    return float(2.0 * max(0.0, k1, k2))


def wootters_values(rho):
    """Descending square roots of the eigenvalues of ρ (σy⊗σy) ρ* (σy⊗σy).

    Computed as the singular values of τ = Wᵀ (σy⊗σy) W with W = V·diag(√λ)
    built from the eigen-decomposition of ρ.  τ is complex symmetric and
    τ τ* has the same spectrum as ρ ρ̃, but going through singular values
    keeps the small entries accurate to machine precision.
    """
    rho = np.asarray(rho)
    lam, vecs = qcore.hermitian_eig(rho)
    w = vecs * np.sqrt(np.maximum(lam, 0.0))[..., None, :]
    tau = np.swapaxes(w, -1, -2) @ _SYSY @ w
    return qcore.singular_values(tau)


def concurrence_general(rho):
    s = wootters_values(rho)
    return _scalar(np.maximum(0.0, s[..., 0] - s[..., 1] - s[..., 2] - s[..., 3]))


def is_entangled(rho) -> bool:
    """PPT test: negative partial-transpose eigenvalue below -1e-10."""
    pt = qcore.partial_transpose(np.asarray(rho), "B")
    return bool(np.min(qcore.hermitian_eigenvalues(pt)) < -ENTANGLED_TOL)


def correlation_matrix(rho):
    """T_nm = Tr(ρ σ_n⊗σ_m) as a real 3x3 array (or stack)."""
    rho = np.asarray(rho)
    t = np.einsum("...ij,nmji->...nm", rho, PAULI_PAIRS)
    imag = float(np.max(np.abs(t.imag))) if t.size else 0.0
    if imag > CORRELATION_IMAG_TOL:
        raise ConsistencyError(f"correlation matrix has imaginary residue {imag:.3e}")
    return np.ascontiguousarray(t.real)


def n_value(t):
    """Sum of the singular values of the correlation matrix."""
    return _scalar(np.sum(qcore.singular_values(np.asarray(t, dtype=float)), axis=-1))


def opt_fidelity(rho):
    """(1 + N/3)/2, unclamped; values below 2/3 are reported as they are."""
    return _scalar(0.5 * (1.0 + np.asarray(n_value(correlation_matrix(rho))) / 3.0))


def bell_x(v: XStateView) -> float:
    u1 = 4.0 * (abs(v.rho14) + abs(v.rho23)) ** 2
    u2 = (v.rho11 + v.rho44 - v.rho22 - v.rho33) ** 2
    u3 = 4.0 * (abs(v.rho14) - abs(v.rho23)) ** 2
    return float(max(2.0 * np.sqrt(u1 + u2), 2.0 * np.sqrt(u1 + u3)))


def bell_from_correlation(t):
    s = qcore.singular_values(np.asarray(t, dtype=float))
    return _scalar(2.0 * np.sqrt(s[..., 0] ** 2 + s[..., 1] ** 2))


def bell_generic(rho):
    """Maximal CHSH value from the two largest eigenvalues of TᵀT."""
    return bell_from_correlation(correlation_matrix(rho))


def c_star(spec):
    """λ1 - λ3 - 2√(λ2 λ4) for a descending spectrum; signed, never clamped."""
    lam = np.asarray(spec, dtype=float)
    return _scalar(lam[..., 0] - lam[..., 2] - 2.0 * np.sqrt(np.maximum(lam[..., 1] * lam[..., 3], 0.0)))


def is_mems(rho) -> bool:
    c = concurrence_general(rho)
    return bool(c > 0.0 and abs(c - c_star(qcore.spectrum(rho))) <= MEMS_TOL)


def measure(rho) -> MeasureBundle:
    t = correlation_matrix(rho)
    return MeasureBundle(
        s_l=linear_entropy(rho),
        c=concurrence_general(rho),
        c_star=c_star(qcore.spectrum(rho)),
        f=float(0.5 * (1.0 + n_value(t) / 3.0)),
        b=bell_from_correlation(t),
    )


def measure_stack(rhos) -> dict:
    """Columnar measures for a stack of states, plus rank and the MEMS flag."""
    rhos = np.asarray(rhos)
    lam = qcore.hermitian_eigenvalues(rhos)
    if np.any(lam < -qcore.PSD_TOL):
        raise qcore.StateError("not positive semidefinite", float(np.min(lam)))
    lam = np.where(lam < 0.0, 0.0, lam)
    sv = qcore.singular_values(correlation_matrix(rhos))
    c = np.atleast_1d(concurrence_general(rhos))
    cs = np.atleast_1d(c_star(lam))
    return {
        "s_l": np.atleast_1d(linear_entropy(rhos)),
        "c": c,
        "c_star": cs,
        "f": 0.5 * (1.0 + sv.sum(axis=-1) / 3.0),
        "b": 2.0 * np.sqrt(sv[..., 0] ** 2 + sv[..., 1] ** 2),
        "rank": np.sum(lam > qcore.RANK_TOL, axis=-1),
        "is_mems": (c > 0.0) & (np.abs(c - cs) <= MEMS_TOL),
    }
