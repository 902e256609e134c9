"""Family sweeps and plot-ready figure datasets (CSV + JSON sidecar)."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import ensemble, families, streams
from .ensemble import fmt
from .families import FamilyId
from .measures import measure_stack

SWEEP_HEADER = ["family", "p", "s_l", "c", "c_star", "f", "b", "rank", "is_mems"]
FIGURE_HEADER = ["series", "source", "x", "y"]
CURVE_STEPS = 1001
SUBSAMPLE_DEFAULT = 1000

FIGURE_AXES = {
    "fig1": ("s_l", "f"),
    "fig2": ("c", "f"),
    "fig3": ("s_l", "f"),
    "fig4": ("b", "c_star"),
}


@dataclass(frozen=True)
class SweepRow:
    family: str
    p: float
    s_l: float
    c: float
    c_star: float
    f: float
    b: float
    rank: int
    is_mems: bool


def sweep(family, p_min: float, p_max: float, steps: int) -> list:
    fid = families._token(family)
    if steps < 2:
        raise ValueError("steps must be at least 2")
    rng = families.family_spec(fid).parameter_range
    if not (p_min < p_max and p_min in rng and p_max in rng):
        raise ValueError(f"[{p_min}, {p_max}] is not an increasing sub-range of {rng} for {fid.value}")
    ps = [p_min + (p_max - p_min) * i / (steps - 1) for i in range(steps)]
    m = measure_stack(np.array([families.make_state(fid, p) for p in ps]))
    return [
        SweepRow(fid.value, p, float(m["s_l"][i]), float(m["c"][i]), float(m["c_star"][i]),
                 float(m["f"][i]), float(m["b"][i]), int(m["rank"][i]), bool(m["is_mems"][i]))
        for i, p in enumerate(ps)
    ]


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow([r.family, fmt(r.p), fmt(r.s_l), fmt(r.c), fmt(r.c_star), fmt(r.f), fmt(r.b),
                        r.rank, "true" if r.is_mems else "false"])


def read_sweep_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_HEADER:
            raise ValueError(f"{path}: not a sweep CSV (header {reader.fieldnames})")
        return [
            SweepRow(row["family"], float(row["p"]), float(row["s_l"]), float(row["c"]),
                     float(row["c_star"]), float(row["f"]), float(row["b"]), int(row["rank"]),
                     row["is_mems"] == "true")
            for row in reader
        ]


def default_curve_range(fid: FamilyId, wide: bool = False):
    if fid is FamilyId.RHO2 and not wide:
        r = families.family_spec(fid).mems_range
        return r.lo, r.hi
    return 0.0, 1.0


@dataclass
class FigureDataset:
    figure_id: str
    x: str
    y: str
    series: dict = field(default_factory=dict)     # name -> (source, xs, ys)
    thresholds: list = field(default_factory=list)  # {"name", "axis", "value"}

    def add(self, name: str, source: str, xs, ys) -> None:
        self.series[name] = (source, np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))

    def write(self, out_path) -> list:
        """Write ``out`` (CSV), ``<stem>.json`` and ``<stem>.gp``; returns the paths."""
        out_path = Path(out_path)
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FIGURE_HEADER)
            for name, (source, xs, ys) in self.series.items():
                for x, y in zip(xs, ys):
                    w.writerow([name, source, fmt(x), fmt(y)])
        meta = {
            "figure_id": self.figure_id,
            "x": self.x,
            "y": self.y,
            "data": out_path.name,
            "series": [{"name": n, "source": s, "rows": int(len(xs))} for n, (s, xs, _) in self.series.items()],
            "thresholds": self.thresholds,
        }
        meta_path = out_path.with_suffix(".json")
        meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        gp_path = out_path.with_suffix(".gp")
        gp_path.write_text(self._gnuplot(out_path.name), encoding="utf-8")
        return [out_path, meta_path, gp_path]

    def _gnuplot(self, data_name: str) -> str:
        lines = [
            f"# {self.figure_id}: {self.y} vs {self.x}",
            "set datafile separator ','",
            f"set xlabel '{self.x}'",
            f"set ylabel '{self.y}'",
        ]
        for th in self.thresholds:
            if th["axis"] == "x":
                lines.append(f"set arrow from {th['value']}, graph 0 to {th['value']}, graph 1 nohead dt 2")
            else:
                lines.append(f"set arrow from graph 0, first {th['value']} to graph 1, first {th['value']} nohead dt 2")
        style = "lines" if self.figure_id in ("fig1", "fig2") else "points pt 7 ps 0.3"
        plots = [
            f"'{data_name}' using (strcol(1) eq '{name}' ? $3 : 1/0):4 with {style} title '{name}'"
            for name in self.series
        ]
        lines.append("plot " + ", \\\n     ".join(plots))
        return "\n".join(lines) + "\n"


def family_curves(figure_id: str, sweeps: Optional[Sequence[str]] = None, wide: bool = False) -> FigureDataset:
    """Parameter-eliminated curves: f against s_l (fig1) or against c (fig2)."""
    xkey, ykey = FIGURE_AXES[figure_id]
    ds = FigureDataset(figure_id, xkey, ykey)
    if sweeps:
        grouped: dict = {}
        for path in sweeps:
            for row in read_sweep_csv(path):
                grouped.setdefault(row.family, (str(path), []))[1].append(row)
        items = [(name, src, rows) for name, (src, rows) in grouped.items()]
    else:
        items = []
        for fid in families.PARAMETRIC:
            lo, hi = default_curve_range(fid, wide)
            items.append((fid.value, f"sweep:{fid.value}:{lo:g}:{hi:g}:{CURVE_STEPS}",
                          sweep(fid, lo, hi, CURVE_STEPS)))
    for name, source, rows in items:
        xs = np.array([getattr(r, xkey) for r in rows])
        ys = np.array([getattr(r, ykey) for r in rows])
        order = np.argsort(xs, kind="stable")
        ds.add(name, source, xs[order], ys[order])
    ds.thresholds.append({"name": "F=2/3", "axis": "y", "value": 2.0 / 3.0})
    if figure_id == "fig1":
        ds.thresholds.append({"name": "S_L=16/27", "axis": "x", "value": 16.0 / 27.0})
    return ds


def _load_ensembles(paths: Sequence[str]) -> dict:
    if not paths:
        raise FileNotFoundError("figure needs at least one ensemble CSV via --in")
    by_rank: dict = {}
    for path in paths:
        if not Path(path).exists():
            raise FileNotFoundError(f"missing input {path}")
        for rec in ensemble.read_ensemble_csv(path):
            by_rank.setdefault(rec.rank, (str(path), []))[1].append(rec)
    return by_rank


def subsample(records: Sequence, k: Optional[int], seed: int, rank: int) -> list:
    """Seeded subsample of ``k`` records (in index order); all of them if k is None or large."""
    if k is None or k >= len(records):
        return list(records)
    keys = streams.stream(seed, f"subsample/rank{rank}").random(len(records))
    keep = np.sort(np.argsort(keys, kind="stable")[:k])
    return [records[i] for i in keep]


def ensemble_scatter(figure_id: str, paths: Sequence[str], k: Optional[int] = SUBSAMPLE_DEFAULT,
                     seed: int = 0, band: float = 1e-3) -> FigureDataset:
    xkey, ykey = FIGURE_AXES[figure_id]
    by_rank = _load_ensembles(paths)
    ds = FigureDataset(figure_id, xkey, ykey)
    for rank in sorted(by_rank):
        source, recs = by_rank[rank]
        shown = subsample(recs, k, seed, rank)
        ds.add(f"rank{rank}", source, [getattr(r, xkey) for r in shown], [getattr(r, ykey) for r in shown])
    if figure_id == "fig3":
        ds.thresholds.append({"name": "F=2/3", "axis": "y", "value": 2.0 / 3.0})
        ds.thresholds.append({"name": "F_gisin", "axis": "y", "value": ensemble.gisin_bound()})
    else:
        pooled = [r for _, recs in by_rank.values() for r in recs]
        lo, hi = ensemble.cmax_thresholds(pooled, band=band)
        ds.thresholds += [
            {"name": "B=2", "axis": "x", "value": 2.0},
            {"name": "C=0", "axis": "y", "value": 0.0},
            {"name": "C_max(F=2/3)", "axis": "y", "value": lo.c_max,
             "analytic_rank2": lo.analytic_rank2, "n_in_band": lo.n_in_band},
            {"name": "C_max(F=F_gisin)", "axis": "y", "value": hi.c_max,
             "analytic_rank2": hi.analytic_rank2, "n_in_band": hi.n_in_band},
        ]
    return ds


def build_figure(figure_id: str, inputs: Sequence[str] = (), k: Optional[int] = None,
                 seed: int = 0, wide: bool = False) -> FigureDataset:
    if figure_id in ("fig1", "fig2"):
        return family_curves(figure_id, inputs, wide=wide)
    if figure_id in ("fig3", "fig4"):
        return ensemble_scatter(figure_id, inputs, k=k, seed=seed)
    raise ValueError(f"unknown figure {figure_id!r}; expected fig1..fig4")
