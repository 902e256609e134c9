"""Standard one-qubit teleportation through a noisy two-qubit resource.

Qubit order is (input, Alice's half, Bob's half).  Alice projects the first
two qubits on a Bell state, Bob applies the Pauli correction the table
assigns to that outcome.  Average fidelities are exact (six-state 2-design)
or Monte Carlo over the Bloch sphere.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import qcore, streams
from .qcore import I2, PHI_MINUS, PHI_PLUS, PSI_MINUS, PSI_PLUS, SX, SY, SZ

OUTCOMES = ("phi+", "phi-", "psi+", "psi-")
BELL = {"phi+": PHI_PLUS, "phi-": PHI_MINUS, "psi+": PSI_PLUS, "psi-": PSI_MINUS}
CORRECTIONS = {"I": I2, "X": SX, "Y": SY, "Z": SZ}

# columns are the magic-basis vectors; a two-qubit pure state is maximally
# entangled iff its coefficients in this basis are real up to a global phase
MAGIC_BASIS = np.column_stack([
    PHI_PLUS,
    -1j * PHI_MINUS,
    -1j * PSI_PLUS,
    PSI_MINUS,
])


@dataclass(frozen=True)
class CorrectionTable:
    """Outcome -> Pauli label, e.g. {"psi+": "I", "psi-": "Z", ...}."""

    phi_plus: str
    phi_minus: str
    psi_plus: str
    psi_minus: str

    def __post_init__(self):
        for label in (self.phi_plus, self.phi_minus, self.psi_plus, self.psi_minus):
            if label not in CORRECTIONS:
                raise ValueError(f"unknown correction {label!r}")

    def as_tuple(self) -> tuple:
        return (self.phi_plus, self.phi_minus, self.psi_plus, self.psi_minus)

    def as_dict(self) -> dict:
        return dict(zip(OUTCOMES, self.as_tuple()))

    @classmethod
    def from_dict(cls, d: dict) -> "CorrectionTable":
        return cls(d["phi+"], d["phi-"], d["psi+"], d["psi-"])


def all_tables():
    for combo in itertools.product(CORRECTIONS, repeat=4):
        yield CorrectionTable(*combo)


@dataclass(frozen=True)
class TeleportReport:
    avg_fidelity: float
    method: str
    n_samples: Optional[int] = None
    std_error: Optional[float] = None


def _pauli_eigenstates() -> np.ndarray:
    s = 1.0 / math.sqrt(2.0)
    return np.array([
        [1, 0], [0, 1],
        [s, s], [s, -s],
        [s, 1j * s], [s, -1j * s],
    ], dtype=complex)


def channel_kernel(rho: np.ndarray) -> np.ndarray:
    """K[k, a, b] = Bob's unnormalised state for outcome k and input |a⟩⟨b|.

    Linear in the input operator, so Bob's conditional state for input φ is
    Σ_ab φ_a φ_b* K[k, a, b].
    """
    rho = np.asarray(rho, dtype=complex)
    kern = np.zeros((4, 2, 2, 2, 2), dtype=complex)
    for k, name in enumerate(OUTCOMES):
        proj = np.kron(qcore.projector(BELL[name]), I2)
        for a in range(2):
            for b in range(2):
                inp = np.zeros((2, 2), dtype=complex)
                inp[a, b] = 1.0
                joint = proj @ np.kron(inp, rho) @ proj
                kern[k, a, b] = _trace_first_two(joint)
    return kern


def _trace_first_two(op8: np.ndarray) -> np.ndarray:
    t = op8.reshape(4, 2, 4, 2)
    return np.einsum("iaib->ab", t)


def _per_outcome_fidelity(kern: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """fid[s, k, u] = ⟨φ_s| U_u σ_k(φ_s) U_u† |φ_s⟩ with unnormalised σ_k."""
    us = np.array([CORRECTIONS[u] for u in CORRECTIONS])
    sigma = np.einsum("sa,sb,kabij->skij", phis, phis.conj(), kern)
    out = np.einsum("sx,uxi,skij,uyj,sy->sku", phis.conj(), us, sigma, us.conj(), phis)
    return out.real


def outcome_scores(rho: np.ndarray) -> np.ndarray:
    """Exact average over inputs of each (outcome, correction) contribution, shape (4, 4)."""
    return _per_outcome_fidelity(channel_kernel(rho), _pauli_eigenstates()).mean(axis=0)


def _table_indices(table: CorrectionTable) -> list:
    labels = list(CORRECTIONS)
    return [labels.index(u) for u in table.as_tuple()]


def channel_avg_fidelity(rho: np.ndarray, table: CorrectionTable) -> float:
    scores = outcome_scores(rho)
    return float(sum(scores[k, u] for k, u in enumerate(_table_indices(table))))


def optimize_corrections(rho: np.ndarray):
    """Best of all 256 Pauli tables (first in enumeration order on ties)."""
    scores = outcome_scores(rho)
    best, best_f = None, -np.inf
    for table in all_tables():
        f = sum(scores[k, u] for k, u in enumerate(_table_indices(table)))
        if f > best_f + 1e-15:
            best, best_f = table, f
    return best, float(best_f)


def sample_bloch(n: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform pure qubit states: cos θ uniform on [-1, 1], φ uniform on [0, 2π)."""
    u = gen.random((n, 2))
    cos_t = 2.0 * u[:, 0] - 1.0
    phi = 2.0 * math.pi * u[:, 1]
    half = np.sqrt((1.0 + cos_t) / 2.0)
    other = np.sqrt((1.0 - cos_t) / 2.0)
    return np.column_stack([half + 0j, other * np.exp(1j * phi)])


def mc_teleport(rho: np.ndarray, table: CorrectionTable, n_samples: int, seed: int) -> TeleportReport:
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    phis = sample_bloch(n_samples, streams.stream(seed, "telesim"))
    fid = _per_outcome_fidelity(channel_kernel(rho), phis)
    idx = _table_indices(table)
    per_sample = sum(fid[:, k, u] for k, u in enumerate(idx))
    std_error = float(np.std(per_sample, ddof=1) / math.sqrt(n_samples))
    return TeleportReport(float(per_sample.mean()), "monte-carlo", n_samples, std_error)


def exact_teleport(rho: np.ndarray, table: Optional[CorrectionTable] = None) -> TeleportReport:
    if table is None:
        _, f = optimize_corrections(rho)
    else:
        f = channel_avg_fidelity(rho, table)
    return TeleportReport(f, "exact-2design")


def fully_entangled_fraction(rho: np.ndarray) -> float:
    """Largest overlap with a maximally entangled state.

    Equals the top eigenvalue of Re(M† ρ M) in the magic basis M.
    """
    rho = np.asarray(rho, dtype=complex)
    in_magic = MAGIC_BASIS.conj().T @ rho @ MAGIC_BASIS
    return float(qcore.hermitian_eigenvalues(in_magic.real)[0])


def _su2(angles) -> np.ndarray:
    a, b, g = angles
    rz = lambda t: np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]])
    ry = np.array([[math.cos(b / 2), -math.sin(b / 2)], [math.sin(b / 2), math.cos(b / 2)]])
    return rz(a) @ ry @ rz(g)


def fef_by_search(rho: np.ndarray, grid: int = 12) -> float:
    """Direct maximisation of ⟨Φ|ρ|Φ⟩ over Φ = (I⊗U)|Φ+⟩, U in SU(2).

    Coarse Euler-angle grid, then Nelder-Mead from the best few points.
    """
    rho = np.asarray(rho, dtype=complex)

    def overlap(angles):
        phi = np.kron(I2, _su2(angles)) @ PHI_PLUS
        return float(np.real(phi.conj() @ rho @ phi))

    axis = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    pts = [(overlap((a, b, g)), (a, b, g)) for a in axis for b in axis[: grid // 2 + 1] for g in axis]
    pts.sort(key=lambda x: -x[0])
    best = pts[0][0]
    for _, start in pts[:4]:
        res = minimize(lambda x: -overlap(x), np.array(start), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        best = max(best, -res.fun)
    return best
