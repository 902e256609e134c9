"""Random MEMS ensembles of fixed rank and their nonlocality regions.

States follow the Ishizaka-Hiroshima form

    ρ = λ1|ψ+⟩⟨ψ+| + λ2|00⟩⟨00| + λ3|ψ-⟩⟨ψ-| + λ4|11⟩⟨11|

with the spectrum drawn flat on the (rank-1)-simplex.  Record ``i`` depends
only on (seed, rank, i): spectra come from per-index streams and the
measurements run over fixed index chunks, so the worker count never
changes a single bit of output.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import measures, streams

GENERATOR_VERSION = f"memslab-ih/1 flat-simplex {streams.STREAM_ALGORITHM}"
CHUNK = 2048
POSITIVE_TOL = 1e-10
NOT_ENTANGLED_TOL = 1e-12
REGIONS = ("R1", "R2", "R3", "R4", "R5")
CSV_HEADER = ["index", "rank", "l1", "l2", "l3", "l4", "s_l", "c", "c_star", "f", "b", "region"]


def gisin_bound() -> float:
    """Fidelity above which no local-hidden-variable model exists (≈ 0.8724)."""
    return 0.5 + math.sqrt(1.5) * math.atan(math.sqrt(2.0)) / math.pi


@dataclass(frozen=True)
class RegionThresholds:
    f_classical: float = 2.0 / 3.0
    b_classical: float = 2.0
    f_gisin: float = field(default_factory=gisin_bound)
    entanglement_rule: str = "PPT"


@dataclass(frozen=True)
class StateRecord:
    index: int
    rank: int
    lam: tuple
    s_l: float
    c: float
    c_star: float
    f: float
    b: float
    region: str


@dataclass(frozen=True)
class EnsembleManifest:
    seed: int
    rank: int
    count: int
    generator_version: str = GENERATOR_VERSION
    created: str = ""

    def to_json(self) -> str:
        return json.dumps({
            "seed": self.seed,
            "rank": self.rank,
            "count": self.count,
            "generator_version": self.generator_version,
            "created": self.created,
        }, indent=2)


def _check_rank(rank: int) -> int:
    if rank not in (2, 3, 4):
        raise ValueError(f"rank must be 2, 3 or 4, got {rank!r}")
    return rank


def sample_spectrum(rank: int, stream: np.random.Generator) -> np.ndarray:
    """Flat-Dirichlet draw on the (rank-1)-simplex, sorted descending, zero padded."""
    _check_rank(rank)
    while True:
        e = -np.log1p(-stream.random(rank))
        total = e.sum()
        if total <= 0.0:
            continue
        lam = np.sort(e / total)[::-1]
        if lam[-1] > POSITIVE_TOL:
            out = np.zeros(4)
            out[:rank] = lam
            return out


def ih_states(lam: np.ndarray) -> np.ndarray:
    """Real IH density matrices for a stack of descending spectra ``(..., 4)``."""
    lam = np.asarray(lam, dtype=float)
    rho = np.zeros(lam.shape[:-1] + (4, 4))
    l1, l2, l3, l4 = lam[..., 0], lam[..., 1], lam[..., 2], lam[..., 3]
    rho[..., 0, 0] = l2
    rho[..., 3, 3] = l4
    rho[..., 1, 1] = rho[..., 2, 2] = 0.5 * (l1 + l3)
    rho[..., 1, 2] = rho[..., 2, 1] = 0.5 * (l1 - l3)
    return rho


def build_ih_state(spec) -> np.ndarray:
    return ih_states(np.asarray(spec, dtype=float)).astype(complex)


def classify_region(rec, th: Optional[RegionThresholds] = None) -> str:
    th = th or RegionThresholds()
    if rec.c <= NOT_ENTANGLED_TOL:
        return "R1"
    if rec.f <= th.f_classical:
        return "R2"
    if rec.b <= th.b_classical:
        return "R3"
    if rec.f < th.f_gisin:
        return "R4"
    return "R5"


def _classify_arrays(c, f, b, th: RegionThresholds) -> np.ndarray:
    return np.select(
        [c <= NOT_ENTANGLED_TOL, f <= th.f_classical, b <= th.b_classical, f < th.f_gisin],
        ["R1", "R2", "R3", "R4"],
        default="R5",
    )


def _spectra(rank: int, seed: int, start: int, stop: int) -> np.ndarray:
    tag = f"ensemble/rank{rank}"
    return np.array([sample_spectrum(rank, streams.stream(seed, tag, i)) for i in range(start, stop)])


def _measure_chunk(rank: int, seed: int, start: int, stop: int, th: RegionThresholds) -> dict:
    lam = _spectra(rank, seed, start, stop)
    rho = ih_states(lam)
    t = measures.correlation_matrix(rho)
    sv = measures.qcore.singular_values(t)
    c = np.atleast_1d(measures.concurrence_general(rho))
    f = 0.5 * (1.0 + sv.sum(axis=-1) / 3.0)
    b = 2.0 * np.sqrt(sv[:, 0] ** 2 + sv[:, 1] ** 2)
    return {
        "index": np.arange(start, stop),
        "lam": lam,
        "s_l": np.atleast_1d(measures.linear_entropy(rho)),
        "c": c,
        "c_star": np.atleast_1d(measures.c_star(lam)),
        "f": f,
        "b": b,
        "region": _classify_arrays(c, f, b, th),
    }


def ensemble_arrays(rank: int, count: int, seed: int, workers: int = 1,
                    th: Optional[RegionThresholds] = None) -> dict:
    """Columnar ensemble data: index, lam (count x 4), s_l, c, c_star, f, b, region."""
    _check_rank(rank)
    if count < 1:
        raise ValueError("count must be at least 1")
    seed = streams.check_seed(seed)
    th = th or RegionThresholds()
    bounds = [(s, min(s + CHUNK, count)) for s in range(0, count, CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda se: _measure_chunk(rank, seed, se[0], se[1], th), bounds))
    else:
        parts = [_measure_chunk(rank, seed, s, e, th) for s, e in bounds]
    out = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    out["rank"] = rank
    return out


def records_from_arrays(data: dict) -> list:
    rank = data["rank"]
    return [
        StateRecord(
            index=int(data["index"][i]),
            rank=rank,
            lam=tuple(float(x) for x in data["lam"][i]),
            s_l=float(data["s_l"][i]),
            c=float(data["c"][i]),
            c_star=float(data["c_star"][i]),
            f=float(data["f"][i]),
            b=float(data["b"][i]),
            region=str(data["region"][i]),
        )
        for i in range(len(data["index"]))
    ]


def generate_ensemble(rank: int, count: int, seed: int, workers: int = 1):
    """Records of ``count`` random rank-``rank`` MEMS plus a manifest."""
    data = ensemble_arrays(rank, count, seed, workers=workers)
    manifest = EnsembleManifest(
        seed=int(seed), rank=rank, count=count,
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    return records_from_arrays(data), manifest


@dataclass(frozen=True)
class CmaxResult:
    f0: float
    c_max: float
    n_in_band: int
    analytic_rank2: float


def cmax_at(records: Sequence[StateRecord], f0: float, band: float = 1e-3) -> CmaxResult:
    cs = [r.c for r in records if abs(r.f - f0) <= band]
    if not cs:
        raise ValueError(
            f"no records with |f - {f0:.6f}| <= {band:g}; generate a larger ensemble or widen the band")
    return CmaxResult(f0=f0, c_max=max(cs), n_in_band=len(cs), analytic_rank2=(3.0 * f0 - 1.0) / 2.0)


def cmax_thresholds(records: Sequence[StateRecord], band: float = 1e-3,
                    th: Optional[RegionThresholds] = None):
    """Maximum concurrence near F = 2/3 and near the Gisin bound over pooled records."""
    th = th or RegionThresholds()
    if not records:
        raise ValueError("pooled ensemble is empty")
    return cmax_at(records, th.f_classical, band), cmax_at(records, th.f_gisin, band)


def fmt(x: float) -> str:
    """12 significant digits, no negative zero."""
    return format(float(x) + 0.0, ".12g")


def write_ensemble_csv(data: dict, path) -> None:
    rank = data["rank"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        lam = data["lam"]
        for i in range(len(data["index"])):
            w.writerow([
                int(data["index"][i]), rank,
                fmt(lam[i, 0]), fmt(lam[i, 1]), fmt(lam[i, 2]), fmt(lam[i, 3]),
                fmt(data["s_l"][i]), fmt(data["c"][i]), fmt(data["c_star"][i]),
                fmt(data["f"][i]), fmt(data["b"][i]), data["region"][i],
            ])


def read_ensemble_csv(path) -> list:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: not an ensemble CSV (header {reader.fieldnames})")
        for row in reader:
            out.append(StateRecord(
                index=int(row["index"]), rank=int(row["rank"]),
                lam=tuple(float(row[k]) for k in ("l1", "l2", "l3", "l4")),
                s_l=float(row["s_l"]), c=float(row["c"]), c_star=float(row["c_star"]),
                f=float(row["f"]), b=float(row["b"]), region=row["region"],
            ))
    return out


def write_ensemble(rank: int, count: int, seed: int, out_path, workers: int = 1):
    """Write CSV plus ``<stem>.manifest.json``; returns (csv path, manifest path)."""
    out_path = Path(out_path)
    data = ensemble_arrays(rank, count, seed, workers=workers)
    write_ensemble_csv(data, out_path)
    manifest = EnsembleManifest(
        seed=int(seed), rank=rank, count=count,
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    manifest_path = out_path.with_suffix(".manifest.json")
    manifest_path.write_text(manifest.to_json() + "\n", encoding="utf-8")
    return out_path, manifest_path


def binned_extremes(groups: dict, x: str, y: str, edges: Iterable[float], how: str) -> list:
    """Per-bin max/min of ``y`` for each rank; keeps only bins populated by every rank.

    ``groups`` maps rank -> columnar dict.  Returns [(lo, hi, {rank: value})].
    """
    edges = list(edges)
    pick = np.max if how == "max" else np.min
    rows = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        vals = {}
        for rank, d in groups.items():
            xs = np.asarray(d[x])
            m = (xs >= lo) & (xs < hi)
            if not m.any():
                break
            vals[rank] = float(pick(np.asarray(d[y])[m]))
        else:
            rows.append((lo, hi, vals))
    return rows
