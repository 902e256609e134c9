"""Acceptance checks shared by ``memslab verify`` and the test suite.

Each ``criterion_*`` function returns a list of CheckResult; a criterion
passes when all of its results pass.
"""
from __future__ import annotations

import contextlib
import hashlib
import io
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import ensemble, families, measures, qcore, streams, telesim
from .families import FamilyId

GRID = np.linspace(0.0, 1.0, 101)
ENSEMBLE_COUNT = 30000
ENSEMBLE_SEED = 20261019


@dataclass(frozen=True)
class CheckResult:
    criterion: str
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status} [{self.criterion}] {self.name}: residual={self.residual:.3e} tol={self.tolerance:.1e}{extra}"


def _res(criterion, name, residual, tol, detail="", passed=None) -> CheckResult:
    ok = residual <= tol if passed is None else passed
    return CheckResult(criterion, name, bool(ok), float(residual), float(tol), detail)


def _grid_residuals(fid, grid, with_bell=False) -> dict:
    cf = families.closed_forms(fid)
    states = np.array([families.make_state(fid, p) for p in grid])
    m = measures.measure_stack(states)
    out = {
        "S_L": np.max(np.abs(m["s_l"] - [cf.s_l(p) for p in grid])),
        "C": np.max(np.abs(m["c"] - [cf.c(p) for p in grid])),
        "F": np.max(np.abs(m["f"] - [cf.f(p) for p in grid])),
    }
    if with_bell:
        out["B"] = np.max(np.abs(m["b"] - [cf.b(p) for p in grid]))
    return out


def criterion_1() -> list:
    start = time.perf_counter()
    results = []
    grids = {
        FamilyId.RHO1: GRID,
        FamilyId.RHO2: np.linspace(0.6, 1.0, 101),
        FamilyId.RHO3: GRID,
    }
    for fid, grid in grids.items():
        for q, r in _grid_residuals(fid, grid).items():
            results.append(_res("1", f"closed form {fid.value} {q}", r, 1e-9))
    elapsed = time.perf_counter() - start
    results.append(_res("1", "closed-form grid runtime [s]", elapsed, 1.0))
    return results


def criterion_2() -> list:
    results = []
    for q, r in _grid_residuals(FamilyId.WERNER, GRID, with_bell=True).items():
        results.append(_res("2", f"Werner {q}", r, 1e-9))
    lower = GRID[GRID < families.MJWK_BREAK]
    upper = GRID[GRID >= families.MJWK_BREAK]
    for label, grid in (("p<2/3", lower), ("p>=2/3", upper)):
        for q, r in _grid_residuals(FamilyId.MJWK, grid).items():
            results.append(_res("2", f"MJWK {label} {q}", r, 1e-9))
    # both branch formulas at the break point
    p = 2.0 / 3.0
    left_sl, right_sl = (8 - 6 * p * p) / 9, (8 * p - 8 * p * p) / 3
    left_f, right_f = (5 + 3 * p) / 9, (2 * p + 1) / 3
    results.append(_res("2", "MJWK branch continuity S_L=16/27",
                        max(abs(left_sl - 16 / 27), abs(right_sl - 16 / 27)), 1e-9))
    results.append(_res("2", "MJWK branch continuity F=7/9",
                        max(abs(left_f - 7 / 9), abs(right_f - 7 / 9)), 1e-9))
    rho = families.make_state(FamilyId.MJWK, p)
    rho_left = families.make_state(FamilyId.MJWK, np.nextafter(p, 0.0))
    numeric = max(abs(measures.linear_entropy(rho) - 16 / 27), abs(measures.opt_fidelity(rho) - 7 / 9),
                  abs(measures.linear_entropy(rho_left) - 16 / 27), abs(measures.opt_fidelity(rho_left) - 7 / 9))
    results.append(_res("2", "MJWK numeric continuity at p=2/3", numeric, 1e-9))
    return results


def _invert_sl(fid, s, lo, hi) -> float:
    """Parameter in [lo, hi] where the numerically computed S_L equals ``s``."""
    g = lambda p: measures.linear_entropy(families.make_state(fid, p)) - s
    glo, ghi = g(lo), g(hi)
    if abs(glo) <= 1e-15:
        return lo
    if abs(ghi) <= 1e-15:
        return hi
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def criterion_3() -> list:
    targets = np.linspace(0.0, 16.0 / 27.0, 101)
    worst = 0.0
    for s in targets:
        p_mjwk = _invert_sl(FamilyId.MJWK, s, families.MJWK_BREAK, 1.0)
        p_rho1 = _invert_sl(FamilyId.RHO1, s, 0.0, 1.0)
        f_mjwk = measures.opt_fidelity(families.make_state(FamilyId.MJWK, p_mjwk))
        f_rho1 = measures.opt_fidelity(families.make_state(FamilyId.RHO1, p_rho1))
        worst = max(worst, abs(f_mjwk - f_rho1))
    return [_res("3", "rho1 vs MJWK F at equal S_L on [0, 16/27]", worst, 1e-9, "101 S_L targets")]


def criterion_4() -> list:
    rho_m = families.rho_m()
    mixed = np.eye(4) / 4.0
    pairs = {
        "rho1(0) = rhoM": (families.make_state(FamilyId.RHO1, 0.0), rho_m),
        "rho2(1) = rhoM": (families.make_state(FamilyId.RHO2, 1.0), rho_m),
        "rho3(1) = rhoM": (families.make_state(FamilyId.RHO3, 1.0), rho_m),
        "Werner(0) = I/4": (families.make_state(FamilyId.WERNER, 0.0), mixed),
        "rho3(0) = I/4": (families.make_state(FamilyId.RHO3, 0.0), mixed),
    }
    return [_res("4", name, float(np.max(np.abs(a - b))), 1e-12) for name, (a, b) in pairs.items()]


def criterion_5() -> list:
    def conc(fid):
        return lambda p: measures.concurrence_general(families.make_state(fid, p)) > 0.0

    cases = [
        ("Werner entanglement onset 1/3", conc(FamilyId.WERNER), 0.1, 0.9, 1.0 / 3.0),
        ("Werner CHSH onset 1/sqrt2",
         lambda p: measures.bell_generic(families.make_state(FamilyId.WERNER, p)) > 2.0, 0.1, 0.95,
         1.0 / math.sqrt(2.0)),
        ("rho3 entanglement onset 3(2sqrt5-1)/19", conc(FamilyId.RHO3), 0.1, 0.95, families.RHO3_THRESHOLD),
        ("rho2 MEMS onset 3/5", lambda p: measures.is_mems(families.make_state(FamilyId.RHO2, p)), 0.2, 0.95, 0.6),
    ]
    out = []
    for name, pred, lo, hi, expected in cases:
        found = families.bisect_switch(pred, lo, hi, tol=1e-6)
        out.append(_res("5", name, abs(found - expected), 1e-6, f"found {found:.7f}"))
    return out


def full_ensembles(count: int = ENSEMBLE_COUNT, seed: int = ENSEMBLE_SEED) -> tuple:
    start = time.perf_counter()
    data = {r: ensemble.ensemble_arrays(r, count, seed) for r in (2, 3, 4)}
    return data, time.perf_counter() - start


def criterion_6(data=None, elapsed=None) -> list:
    if data is None:
        data, elapsed = full_ensembles()
    out = []
    if elapsed is not None:
        out.append(_res("6", "ensemble generation runtime [s]", elapsed, 60.0, f"{ENSEMBLE_COUNT} states x 3 ranks"))
    out.append(_res("6", "rank-2 all C > 0", max(0.0, -float(np.min(data[2]["c"]))), 0.0,
                    passed=bool(np.min(data[2]["c"]) > 0.0), detail=f"min C {np.min(data[2]['c']):.4g}"))
    out.append(_res("6", "rank-3 all C > 0", max(0.0, -float(np.min(data[3]["c"]))), 0.0,
                    passed=bool(np.min(data[3]["c"]) > 0.0), detail=f"min C {np.min(data[3]['c']):.4g}"))
    shortfall = max(0.0, 2.0 / 3.0 - float(np.min(data[2]["f"])))
    out.append(_res("6", "rank-2 all F >= 2/3", shortfall, 1e-9))
    n_sep = int(np.sum(data[4]["c_star"] <= 0.0))
    out.append(_res("6", "rank-4 contains C* <= 0", 0.0, 0.0, passed=n_sep > 0, detail=f"{n_sep} states"))
    mems = 0.0
    for d in data.values():
        pos = d["c"] > 0.0
        if pos.any():
            mems = max(mems, float(np.max(np.abs(d["c"][pos] - d["c_star"][pos]))))
    out.append(_res("6", "|C - C*| for every C > 0 state", mems, 1e-9))
    envelope = float(np.max(data[4]["f"] - (1.0 + np.sqrt(1.0 - data[4]["s_l"])) / 2.0))
    out.append(_res("6", "rank-4 F <= Werner envelope", max(0.0, envelope), 1e-9))

    rows = ensemble.binned_extremes(data, "s_l", "f", np.arange(0.0, 1.0 + 1e-12, 0.05), "max")
    bad = [(lo, v) for lo, _, v in rows if not v[4] >= v[3] >= v[2]]
    worst = max([max(v[2] - v[3], v[3] - v[4], 0.0) for _, v in bad], default=0.0)
    detail = f"{len(rows)} bins, {len(bad)} out of order"
    if bad:
        detail += "; first bad bin S_L>=" + f"{bad[0][0]:.2f}"
    out.append(_res("6", "binned max F: rank4 >= rank3 >= rank2", worst, 0.0, detail, passed=not bad))

    rows = ensemble.binned_extremes(data, "f", "c", np.arange(0.7, 0.9 + 1e-12, 0.01), "min")
    bad = [(lo, v) for lo, _, v in rows if not v[2] >= v[3] >= v[4]]
    worst = max([max(v[3] - v[2], v[4] - v[3], 0.0) for _, v in bad], default=0.0)
    out.append(_res("6", "binned min C: rank2 >= rank3 >= rank4", worst, 0.0,
                    f"{len(rows)} bins, {len(bad)} out of order", passed=not bad))
    return out


def random_x_states(n: int, seed: int = 7) -> np.ndarray:
    gen = streams.stream(seed, "x-states")
    out = np.zeros((n, 4, 4), dtype=complex)
    for i in range(n):
        d = gen.dirichlet(np.ones(4))
        r14, r23 = gen.random(2)
        ph14, ph23 = 2 * math.pi * gen.random(2)
        out[i] = np.diag(d)
        out[i, 0, 3] = r14 * math.sqrt(d[0] * d[3]) * np.exp(1j * ph14)
        out[i, 1, 2] = r23 * math.sqrt(d[1] * d[2]) * np.exp(1j * ph23)
        out[i, 3, 0] = np.conj(out[i, 0, 3])
        out[i, 2, 1] = np.conj(out[i, 1, 2])
    return out


def criterion_7(n: int = 1000) -> list:
    states = random_x_states(n)
    c_gen = measures.concurrence_general(states)
    b_gen = measures.bell_generic(states)
    views = [measures.as_x_state(s) for s in states]
    c_x = np.array([measures.concurrence_x(v) for v in views])
    b_x = np.array([measures.bell_x(v) for v in views])
    return [
        _res("7", f"X concurrence vs Wootters ({n} random X states)", float(np.max(np.abs(c_x - c_gen))), 1e-9),
        _res("7", f"X Bell formula vs TᵀT route ({n} random X states)", float(np.max(np.abs(b_x - b_gen))), 1e-9),
    ]


MC_FLOOR = 1e-12


def criterion_8(n_mc: int = 100_000) -> list:
    out = []
    worst_opt, worst_fef = 0.0, 0.0
    for fid in families.PARAMETRIC:
        for p in GRID:
            rho = families.make_state(fid, p)
            f = measures.opt_fidelity(rho)
            worst_opt = max(worst_opt, abs(telesim.optimize_corrections(rho)[1] - f))
            worst_fef = max(worst_fef, abs((2.0 * telesim.fully_entangled_fraction(rho) + 1.0) / 3.0 - f))
    out.append(_res("8", "best Pauli-table channel fidelity = F (5 families x 101 p)", worst_opt, 1e-9))
    out.append(_res("8", "(2 FEF + 1)/3 = F (5 families x 101 p)", worst_fef, 1e-6))
    for fid, p in ((FamilyId.WERNER, 0.8), (FamilyId.RHO1, 0.5)):
        rho = families.make_state(fid, p)
        table, _ = telesim.optimize_corrections(rho)
        rep = telesim.mc_teleport(rho, table, n_mc, seed=1)
        gap = abs(rep.avg_fidelity - measures.opt_fidelity(rho))
        out.append(_res("8", f"Monte Carlo {fid.value}({p}) within 3 sigma (n={n_mc})", gap,
                        3.0 * rep.std_error + MC_FLOOR, f"estimate {rep.avg_fidelity:.6f}, sigma {rep.std_error:.2e}"))
    return out


def criterion_9() -> list:
    g = ensemble.gisin_bound()
    return [
        _res("9", "Gisin bound = 0.872429", abs(g - 0.872429), 1e-5, f"value {g:.9f}"),
        _res("9", "Gisin bound rounds to 0.87", abs(round(g, 2) - 0.87), 0.0),
    ]


def criterion_10(count: int = ENSEMBLE_COUNT, seed: int = 42) -> list:
    from .cli import main

    digests = {}
    with tempfile.TemporaryDirectory() as tmp:
        for workers in (1, 4):
            path = Path(tmp) / f"rank3_w{workers}.csv"
            with contextlib.redirect_stdout(io.StringIO()):
                code = main(["ensemble", "--rank", "3", "--count", str(count), "--seed", str(seed),
                             "--out", str(path), "--workers", str(workers)])
            if code != 0:
                return [_res("10", "ensemble command exit code", float(code), 0.0)]
            digests[workers] = hashlib.sha256(path.read_bytes()).hexdigest()
    same = digests[1] == digests[4]
    return [_res("10", "rank-3 ensemble CSV byte-identical for 1 and 4 workers", 0.0 if same else 1.0, 0.0,
                 f"sha256 {digests[1][:16]}…")]


CRITERIA = {
    "1": criterion_1,
    "2": criterion_2,
    "3": criterion_3,
    "4": criterion_4,
    "5": criterion_5,
    "6": criterion_6,
    "7": criterion_7,
    "8": criterion_8,
    "9": criterion_9,
    "10": criterion_10,
}


def run_all(echo=print) -> list:
    results = []
    for key, fn in CRITERIA.items():
        for r in fn():
            results.append(r)
            if echo:
                echo(r.line())
    return results
