"""Monte Carlo experiments: sampling, per-trial pipeline, sqrt(n) fits and output files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .delaunay import triangulate
from .filtration import moment_counters, radius_values
from .geom import DegenerateError, Topology
from .lunar import lunar_emst
from .persistence import emst, h0_diagram, h1_diagram, one_norm
from .sixpack import NORM_FIELDS, derive_norms

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "FitResult",
    "TrialError",
    "EmptyColorError",
    "trial_seed",
    "sample_uniform",
    "sample_poisson",
    "random_coloring",
    "instance_norms",
    "run_trial",
    "fit_sqrt",
    "run_sweep",
    "write_results_csv",
    "CSV_COLUMNS",
    "TRACKED",
]

PAPER_N = [2000, 3000, 4000, 5000, 6000, 7000]
FAST_N = [200, 400, 800]
CSV_COLUMNS = ["n", "trial", "seed", "topology", "emst_length", "lunar_cost", *NORM_FIELDS, "wall_ms"]
TRACKED = ["emst_length", "lunar_cost", *NORM_FIELDS]


class EmptyColorError(ValueError):
    """A coloring left one color class empty."""


class TrialError(RuntimeError):
    """A trial failed; ``cause`` keeps the original exception."""

    def __init__(self, message: str, cause: BaseException) -> None:
        super().__init__(message)
        self.cause = cause


@dataclass
class ExperimentConfig:
    n_values: list[int] = field(default_factory=lambda: list(PAPER_N))
    trials: int = 100
    topologies: list[str] = field(default_factory=lambda: ["square", "torus"])
    sampler: str = "uniform"  # or "poisson" (n is then the intensity)
    color_p: float = 0.5
    seed: int = 0
    lunar_mode: str = "pruned"
    out_dir: str | None = None
    workers: int = 1
    record_timing: bool = False
    plots: bool = True

    def __post_init__(self) -> None:
        self.n_values = [int(n) for n in self.n_values]
        self.topologies = [Topology.parse(t).value for t in self.topologies]
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.n_values:
            raise ValueError("n_values must be nonempty")
        if not 0 < self.color_p < 1:
            raise ValueError("color probability must lie strictly between 0 and 1")
        if self.sampler not in ("uniform", "poisson"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.lunar_mode not in ("exact", "pruned"):
            raise ValueError(f"unknown lunar mode {self.lunar_mode!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def fast(cls, **overrides) -> "ExperimentConfig":
        base = dict(n_values=list(FAST_N), trials=20, lunar_mode="pruned")
        base.update(overrides)
        return cls(**base)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass
class TrialRecord:
    n: int
    trial: int
    seed: int
    topology: str
    emst_length: float
    lunar_cost: float
    norms: dict[str, float]
    moments: dict[str, dict[str, float]] = field(default_factory=dict)
    points: int = 0
    wall_ms: float = 0.0

    def row(self) -> list:
        vals = [self.n, self.trial, self.seed, self.topology, repr(self.emst_length), repr(self.lunar_cost)]
        vals += [repr(self.norms[k]) for k in NORM_FIELDS]
        vals.append(f"{self.wall_ms:.3f}")
        return vals

    def value(self, key: str) -> float:
        if key in ("emst_length", "lunar_cost"):
            return getattr(self, key)
        return self.norms[key]


@dataclass
class FitResult:
    a1: float
    a0: float
    residual: float
    per_n: list[dict]

    def as_dict(self) -> dict:
        return {"a1": self.a1, "a0": self.a0, "residual": self.residual, "per_n": self.per_n}


# ---------------------------------------------------------------------------
# sampling


def trial_seed(root: int, n: int, trial: int) -> int:
    """Per-trial 64-bit seed, independent of execution order and topology."""
    ss = np.random.SeedSequence(int(root), spawn_key=(int(n), int(trial)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_uniform(n: int, seed) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    return _rng(seed).random((int(n), 2))


def sample_poisson(intensity: float, seed) -> np.ndarray:
    if not intensity > 0:
        raise ValueError("intensity must be positive")
    rng = _rng(seed)
    return rng.random((int(rng.poisson(intensity)), 2))


def random_coloring(points, p: float = 0.5, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Label each point 1 with probability p; returns (color-0 points, color-1 points)."""
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    ones = _rng(seed).random(len(P)) < p
    return P[~ones], P[ones]


# ---------------------------------------------------------------------------
# one instance


def _mono_norms(P: np.ndarray, topology: Topology) -> tuple[float, float]:
    if len(P) == 0:
        return 0.0, 0.0
    fm = radius_values(triangulate(P, topology, allow_degenerate=topology is Topology.SQUARE))
    return one_norm(h0_diagram(fm)), one_norm(h1_diagram(fm))


def instance_norms(points0, points1, topology="square", lunar_mode: str = "pruned", *, strict: bool = False):
    """All eleven norms of one colored instance.

    Returns (norms, emst length, lunar cost, filtration of the union).
    """
    topology = Topology.parse(topology)
    P0 = np.asarray(points0, dtype=float).reshape(-1, 2)
    P1 = np.asarray(points1, dtype=float).reshape(-1, 2)
    if len(P0) == 0 or len(P1) == 0:
        raise EmptyColorError("one color class is empty")
    U = np.vstack([P0, P1])
    if topology is Topology.TORUS:
        U = U - np.floor(U)
    # a point carrying both colors appears once in the union
    shared = len(np.unique(U, axis=0)) < len(U)
    if shared:
        U = np.unique(U, axis=0)
    fm = radius_values(triangulate(U, topology, allow_degenerate=topology is Topology.SQUARE))
    tree = emst(fm)
    cod0 = one_norm(h0_diagram(fm, tree))
    cod1 = one_norm(h1_diagram(fm))
    d0a, d1a = _mono_norms(P0, topology)
    d0b, d1b = _mono_norms(P1, topology)
    lt = lunar_emst(P0, P1, topology, lunar_mode, fm=None if shared else fm)
    norms = derive_norms(d0a + d0b, d1a + d1b, cod0, cod1, lt.cost / 2.0, strict=strict)
    return norms, tree.total_length, lt.cost, fm


def _moment_snapshot(fm, intensity: float) -> dict[str, dict[str, float]]:
    out = {}
    for label, x in (("ln2", math.log(2.0)), ("1", 1.0), ("inf", math.inf)):
        r0 = math.inf if math.isinf(x) else math.sqrt(x / (intensity * math.pi))
        out[label] = moment_counters(fm, r0).as_dict()
    return out


def run_trial(config: ExperimentConfig, n: int, trial: int, topology: str | Topology) -> TrialRecord:
    """Sample, color and evaluate one instance; errors carry the trial context."""
    topology = Topology.parse(topology)
    seed = trial_seed(config.seed, n, trial)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    try:
        P = sample_uniform(n, rng) if config.sampler == "uniform" else sample_poisson(n, rng)
        P0, P1 = random_coloring(P, config.color_p, rng)
        norms, length, cost, fm = instance_norms(P0, P1, topology, config.lunar_mode)
        moments = _moment_snapshot(fm, float(n))
    except Exception as exc:  # noqa: BLE001 - rethrown with context
        raise TrialError(f"n={n} trial={trial} topology={topology.value} seed={seed}: {exc}", exc) from exc
    wall = (time.perf_counter() - t0) * 1000.0 if config.record_timing else 0.0
    return TrialRecord(
        n=int(n),
        trial=int(trial),
        seed=seed,
        topology=topology.value,
        emst_length=length,
        lunar_cost=cost,
        norms=norms.as_dict(),
        moments=moments,
        points=len(P),
        wall_ms=wall,
    )


# ---------------------------------------------------------------------------
# fitting and sweeps


def fit_sqrt(n_values, means, stds=None) -> FitResult:
    """Ordinary least squares of means against a1 * sqrt(n) + a0."""
    n = np.asarray(n_values, dtype=float)
    y = np.asarray(means, dtype=float)
    if len(np.unique(n)) < 2:
        raise ValueError("need at least two distinct n values")
    A = np.stack([np.sqrt(n), np.ones_like(n)], axis=1)
    (a1, a0), *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.linalg.norm(A @ np.array([a1, a0]) - y))
    sd = [float("nan")] * len(n) if stds is None else [float(s) for s in stds]
    per_n = [{"n": int(k), "mean": float(m), "std": s} for k, m, s in zip(n_values, y, sd)]
    return FitResult(float(a1), float(a0), residual, per_n)


def _task(args):
    config, n, trial, topo = args
    return run_trial(config, n, trial, topo)


def _run_all(config: ExperimentConfig) -> list[TrialRecord]:
    tasks = [(config, n, t, topo) for topo in config.topologies for n in config.n_values for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            return list(ex.map(_task, tasks, chunksize=1))
    return [_task(t) for t in tasks]


def summarize(records: list[TrialRecord], config: ExperimentConfig) -> dict:
    out: dict = {}
    for topo in config.topologies:
        recs = [r for r in records if r.topology == topo]
        fits = {}
        for key in TRACKED:
            means, stds = [], []
            for n in config.n_values:
                v = np.array([r.value(key) for r in recs if r.n == n])
                means.append(float(np.mean(v)))
                stds.append(float(np.std(v, ddof=1)) if len(v) > 1 else 0.0)
            fits[key] = fit_sqrt(config.n_values, means, stds).as_dict() if len(set(config.n_values)) > 1 else {
                "a1": None, "a0": None, "residual": None,
                "per_n": [{"n": n, "mean": m, "std": s} for n, m, s in zip(config.n_values, means, stds)],
            }
        if len(set(config.n_values)) > 1:
            fits["estimates"] = {
                "c": fits["emst_length"]["a1"],
                "c_L": 2.0 * fits["rel1"]["a1"],
                "c_rel1_minus_c_rel2": fits["rel1"]["a1"] - fits["rel2"]["a1"],
            }
        out[topo] = fits
    return out


def write_results_csv(records: list[TrialRecord], f) -> None:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())


def run_sweep(config: ExperimentConfig) -> dict:
    """Run every trial, fit each tracked quantity against sqrt(n) and write outputs.

    Files written to ``config.out_dir`` (if set): results.csv, summary.json,
    config.json and one SVG plot per topology.
    """
    records = _run_all(config)
    summary = summarize(records, config)
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, "results.csv"), "w", newline="") as f:
            write_results_csv(records, f)
        with open(os.path.join(config.out_dir, "summary.json"), "w") as f:
            json.dump(summary, f, indent=2)
            f.write("\n")
        with open(os.path.join(config.out_dir, "config.json"), "w") as f:
            f.write(config.to_json() + "\n")
        if config.plots and len(set(config.n_values)) > 1:
            for topo, fits in summary.items():
                with open(os.path.join(config.out_dir, f"plot_{topo}.svg"), "w") as f:
                    f.write(svg_plot(fits, title=f"mean 1-norms, {topo}"))
    return {"records": records, "summary": summary}


# ---------------------------------------------------------------------------
# plotting


_PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e", "#393b79", "#637939", "#843c39",
]


def svg_plot(fits: dict, title: str = "", width: int = 720, height: int = 480) -> str:
    """Means with one-sigma bars and fitted a1*sqrt(n) + a0 curves as a standalone SVG."""
    series = [(k, v) for k, v in fits.items() if k in TRACKED]
    ns = [p["n"] for p in series[0][1]["per_n"]]
    lo_n, hi_n = min(ns), max(ns)
    ymax = max(p["mean"] + (p["std"] or 0.0) for _, v in series for p in v["per_n"])
    ymin = min(0.0, min(p["mean"] - (p["std"] or 0.0) for _, v in series for p in v["per_n"]))
    ml, mr, mt, mb = 60, 150, 30, 40
    pw, ph = width - ml - mr, height - mt - mb

    def X(n):
        return ml + pw * (n - lo_n) / (hi_n - lo_n)

    def Y(y):
        return mt + ph * (1.0 - (y - ymin) / (ymax - ymin or 1.0))

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">\n')
    out.write(f'<rect width="{width}" height="{height}" fill="white"/>\n')
    out.write(f'<text x="{ml}" y="18" font-size="13">{title}</text>\n')
    out.write(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>\n')
    out.write(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>\n')
    for n in ns:
        out.write(f'<text x="{X(n):.1f}" y="{mt + ph + 15}" text-anchor="middle">{n}</text>\n')
    for k in range(5):
        y = ymin + (ymax - ymin) * k / 4
        out.write(f'<text x="{ml - 5}" y="{Y(y) + 4:.1f}" text-anchor="end">{y:.3g}</text>\n')
    for i, (name, v) in enumerate(series):
        col = _PALETTE[i % len(_PALETTE)]
        if v.get("a1") is not None:
            grid = np.linspace(lo_n, hi_n, 50)
            pts = " ".join(f"{X(g):.1f},{Y(v['a1'] * math.sqrt(g) + v['a0']):.1f}" for g in grid)
            out.write(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1"/>\n')
        for p in v["per_n"]:
            x, y, s = X(p["n"]), p["mean"], p["std"] or 0.0
            out.write(f'<line x1="{x:.1f}" y1="{Y(y - s):.1f}" x2="{x:.1f}" y2="{Y(y + s):.1f}" stroke="{col}"/>\n')
            out.write(f'<circle cx="{x:.1f}" cy="{Y(y):.1f}" r="2.5" fill="{col}"/>\n')
        ly = mt + 14 * i
        out.write(f'<rect x="{ml + pw + 15}" y="{ly}" width="10" height="10" fill="{col}"/>\n')
        out.write(f'<text x="{ml + pw + 30}" y="{ly + 9}">{name}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()


def record_json(rec: TrialRecord) -> dict:
    d = {"n": rec.n, "trial": rec.trial, "seed": rec.seed, "topology": rec.topology,
         "emst_length": rec.emst_length, "lunar_cost": rec.lunar_cost}
    d.update(rec.norms)
    return d


def is_numeric_failure(exc: BaseException) -> bool:
    """Whether an exception (or the cause of a TrialError) is a numeric/consistency failure."""
    from .lunar import LunarAuditError

    if isinstance(exc, TrialError):
        exc = exc.cause
    return isinstance(exc, (ArithmeticError, DegenerateError, LunarAuditError, EmptyColorError))

