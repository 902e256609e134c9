"""Named two-qubit states and parametric MEMS families.

Family tokens double as CLI arguments.  ``closed_forms`` returns the
analytic curves used to check the numerics; ``family_spec`` records where
each family is entangled and where it is MEMS.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import qcore
from .qcore import KET, PSI_PLUS, projector


class FamilyId(str, Enum):
    WERNER = "werner"
    MJWK = "mjwk"
    RHO1 = "rho1"
    RHO2 = "rho2"
    RHO3 = "rho3"
    RHOM = "rhom"
    RHOG = "rhog"
    MAXMIXED = "maxmixed"
    PSIPLUS = "psiplus"


PARAMETRIC = (FamilyId.WERNER, FamilyId.MJWK, FamilyId.RHO1, FamilyId.RHO2, FamilyId.RHO3)
CONSTANT = (FamilyId.RHOM, FamilyId.RHOG, FamilyId.MAXMIXED, FamilyId.PSIPLUS)

MJWK_BREAK = 2.0 / 3.0
RHO3_THRESHOLD = 3.0 * (2.0 * math.sqrt(5.0) - 1.0) / 19.0


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __contains__(self, p: float) -> bool:
        above = p > self.lo if self.lo_open else p >= self.lo
        below = p < self.hi if self.hi_open else p <= self.hi
        return above and below

    def within(self, other: "Interval") -> bool:
        if self.lo < other.lo or (self.lo == other.lo and other.lo_open and not self.lo_open):
            return False
        if self.hi > other.hi or (self.hi == other.hi and other.hi_open and not self.hi_open):
            return False
        return True

    def __str__(self) -> str:
        return f"{'(' if self.lo_open else '['}{self.lo:g}, {self.hi:g}{')' if self.hi_open else ']'}"


@dataclass(frozen=True)
class FamilySpec:
    id: FamilyId
    parameter_range: Interval
    entangled_range: Optional[Interval]
    mems_range: Optional[Interval]
    rank_profile: str

    def rank_at(self, p: float) -> int:
        return _RANK_PROFILES[self.id](p)


@dataclass(frozen=True)
class ClosedForms:
    s_l: Callable[[float], float]
    c: Callable[[float], float]
    f: Callable[[float], float]
    b: Optional[Callable[[float], float]] = None


def _token(family) -> FamilyId:
    try:
        return FamilyId(family)
    except ValueError:
        names = ", ".join(f.value for f in FamilyId)
        raise ValueError(f"unknown family {family!r}; expected one of {names}") from None


def w_state() -> np.ndarray:
    psi = np.zeros(8, dtype=complex)
    psi[[0b100, 0b010, 0b001]] = 1.0 / math.sqrt(3.0)
    return psi


def ghz_like_state() -> np.ndarray:
    """(|100⟩ + |011⟩)/√2."""
    psi = np.zeros(8, dtype=complex)
    psi[[0b100, 0b011]] = 1.0 / math.sqrt(2.0)
    return psi


def rho_m() -> np.ndarray:
    return qcore.partial_trace(w_state(), 1)


def rho_g() -> np.ndarray:
    return qcore.partial_trace(ghz_like_state(), 2)


def mjwk_gamma(p: float) -> float:
    return 1.0 / 3.0 if p < MJWK_BREAK else p / 2.0


def _mjwk(p: float) -> np.ndarray:
    g = mjwk_gamma(p)
    rho = np.diag([g, 1.0 - 2.0 * g, 0.0, g]).astype(complex)
    rho[0, 3] = rho[3, 0] = p / 2.0
    return rho


def make_state(family, p: Optional[float] = None) -> np.ndarray:
    """Density matrix of ``family`` at parameter ``p`` (ignored for constants)."""
    fid = _token(family)
    if fid in CONSTANT:
        if fid is FamilyId.RHOM:
            return rho_m()
        if fid is FamilyId.RHOG:
            return rho_g()
        if fid is FamilyId.MAXMIXED:
            return np.eye(4, dtype=complex) / 4.0
        return projector(PSI_PLUS)

    if p is None:
        raise ValueError(f"family {fid.value} needs a parameter p")
    p = float(p)
    if p not in family_spec(fid).parameter_range:
        raise ValueError(f"p={p!r} outside parameter range {family_spec(fid).parameter_range} of {fid.value}")
    mixed = np.eye(4, dtype=complex) / 4.0
    bell = projector(PSI_PLUS)
    if fid is FamilyId.WERNER:
        return (1.0 - p) * mixed + p * bell
    if fid is FamilyId.MJWK:
        return _mjwk(p)
    if fid is FamilyId.RHO1:
        return (1.0 - p) * rho_m() + p * bell
    if fid is FamilyId.RHO2:
        return (1.0 - p) * rho_g() + p * rho_m()
    return (1.0 - p) * mixed + p * rho_m()


def _werner_forms() -> ClosedForms:
    return ClosedForms(
        s_l=lambda p: 1.0 - p * p,
        c=lambda p: max(0.0, (3.0 * p - 1.0) / 2.0),
        f=lambda p: (p + 1.0) / 2.0,
        b=lambda p: 2.0 * math.sqrt(2.0) * p,
    )


def _mjwk_forms() -> ClosedForms:
    def s_l(p):
        return (8.0 - 6.0 * p * p) / 9.0 if p < MJWK_BREAK else (8.0 * p - 8.0 * p * p) / 3.0

    def f(p):
        return (5.0 + 3.0 * p) / 9.0 if p < MJWK_BREAK else (2.0 * p + 1.0) / 3.0

    return ClosedForms(s_l=s_l, c=lambda p: p, f=f)


_FORMS = {
    FamilyId.WERNER: _werner_forms,
    FamilyId.MJWK: _mjwk_forms,
    FamilyId.RHO1: lambda: ClosedForms(
        s_l=lambda p: 8.0 / 27.0 * (1.0 - p) * (p + 2.0),
        c=lambda p: (2.0 + p) / 3.0,
        f=lambda p: (4.0 * p + 14.0) / 18.0,
    ),
    FamilyId.RHO2: lambda: ClosedForms(
        s_l=lambda p: 2.0 / 3.0 * (1.0 + 2.0 * p / 3.0 - 7.0 * p * p / 9.0),
        c=lambda p: 2.0 * p / 3.0,
        f=lambda p: (2.0 * p + 12.0) / 18.0,
    ),
    FamilyId.RHO3: lambda: ClosedForms(
        s_l=lambda p: 1.0 - 11.0 * p * p / 27.0,
        # the surd form goes negative below the entanglement threshold
        c=lambda p: max(0.0, 2.0 * p / 3.0 - math.sqrt((1.0 - p) * (3.0 + p) / 12.0)),
        f=lambda p: (9.0 + 5.0 * p) / 18.0,
    ),
}


def closed_forms(family) -> ClosedForms:
    fid = _token(family)
    if fid not in _FORMS:
        raise ValueError(f"no closed forms for family {fid.value}")
    return _FORMS[fid]()


UNIT = Interval(0.0, 1.0)

_SPECS = {
    FamilyId.WERNER: FamilySpec(
        FamilyId.WERNER, UNIT, Interval(1 / 3, 1.0, lo_open=True), Interval(1 / 3, 1.0, lo_open=True),
        "4 for p < 1, 1 at p = 1"),
    FamilyId.MJWK: FamilySpec(
        FamilyId.MJWK, UNIT, Interval(0.0, 1.0, lo_open=True), Interval(0.0, 1.0, lo_open=True),
        "3 for p < 2/3, 2 for 2/3 <= p < 1, 1 at p = 1"),
    FamilyId.RHO1: FamilySpec(FamilyId.RHO1, UNIT, UNIT, UNIT, "2 for p < 1, 1 at p = 1"),
    FamilyId.RHO2: FamilySpec(
        FamilyId.RHO2, UNIT, Interval(0.0, 1.0, lo_open=True), Interval(0.6, 1.0),
        "3 for 0 < p < 1, 2 at the endpoints"),
    FamilyId.RHO3: FamilySpec(
        FamilyId.RHO3, UNIT, Interval(RHO3_THRESHOLD, 1.0, lo_open=True),
        Interval(RHO3_THRESHOLD, 1.0, lo_open=True), "4 for p < 1, 2 at p = 1"),
    FamilyId.RHOM: FamilySpec(FamilyId.RHOM, UNIT, UNIT, UNIT, "2"),
    FamilyId.RHOG: FamilySpec(FamilyId.RHOG, UNIT, None, None, "2"),
    FamilyId.MAXMIXED: FamilySpec(FamilyId.MAXMIXED, UNIT, None, None, "4"),
    FamilyId.PSIPLUS: FamilySpec(FamilyId.PSIPLUS, UNIT, UNIT, UNIT, "1"),
}

_RANK_PROFILES = {
    FamilyId.WERNER: lambda p: 4 if p < 1.0 else 1,
    FamilyId.MJWK: lambda p: 3 if p < MJWK_BREAK else (2 if p < 1.0 else 1),
    FamilyId.RHO1: lambda p: 2 if p < 1.0 else 1,
    FamilyId.RHO2: lambda p: 3 if 0.0 < p < 1.0 else 2,
    FamilyId.RHO3: lambda p: 4 if p < 1.0 else 2,
    FamilyId.RHOM: lambda p: 2,
    FamilyId.RHOG: lambda p: 2,
    FamilyId.MAXMIXED: lambda p: 4,
    FamilyId.PSIPLUS: lambda p: 1,
}


def family_spec(family) -> FamilySpec:
    return _SPECS[_token(family)]


def bisect_switch(predicate: Callable[[float], bool], lo: float, hi: float, tol: float = 1e-6) -> float:
    """Locate where ``predicate`` flips between ``lo`` (one value) and ``hi`` (the other)."""
    at_lo = predicate(lo)
    if predicate(hi) == at_lo:
        raise ValueError(f"predicate does not switch on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid) == at_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
