"""Repeated corrupted-factorization experiments and their summaries."""

import csv
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corruption import CorruptionSpec, corrupt
from .engine import SolveConfig, solve_nmf, solve_weighted_nmf
from .metrics import accuracy, cluster_assign, nmi, rre
from .polish import PolishConfig, solve_target_polish
from .weights import KINDS, WeightScheme

log = logging.getLogger(__name__)

METHODS = ("weighted-nmf", "target-polish", "plain-nmf")
METRICS = ("rre", "acc", "nmi", "time_sec")
NOISE_ORDER = ("block", "salt", "none")


@dataclass
class RunReport:
    """Per-(method, weight) results over all repeats."""

    method: str
    weight: str
    noise: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)
    rre: list = field(default_factory=list)
    acc: list = field(default_factory=list)
    nmi: list = field(default_factory=list)
    time_sec: list = field(default_factory=list)
    trajectory_files: list = field(default_factory=list)

    @property
    def key(self):
        return f"{self.method}/{self.weight}"

    @property
    def repeats(self):
        return len(self.seeds)

    def add(self, seed, rre_, acc_, nmi_, time_sec, trajectory_file=None):
        self.seeds.append(int(seed))
        self.rre.append(float(rre_))
        self.acc.append(float(acc_))
        self.nmi.append(float(nmi_))
        self.time_sec.append(float(time_sec))
        self.trajectory_files.append(trajectory_file)

    def add_record(self, rec):
        self.add(rec["seed"], rec["rre"], rec["acc"], rec["nmi"], rec["time_sec"],
                 rec.get("trajectory_file"))

    def aggregate(self):
        out = {}
        for name in METRICS:
            vals = np.asarray(getattr(self, name), dtype=np.float64)
            out[name] = {
                "mean": float(vals.mean()) if vals.size else None,
                "std": float(vals.std()) if vals.size else None,
            }
        return out

    def records(self):
        return [
            {"seed": s, "method": self.method, "weight": self.weight, "rre": r,
             "acc": a, "nmi": n, "time_sec": t, "trajectory_file": f}
            for s, r, a, n, t, f in zip(self.seeds, self.rre, self.acc, self.nmi,
                                        self.time_sec, self.trajectory_files)
        ]

    def header(self):
        return {"method": self.method, "weight": self.weight, "noise": self.noise}

    @classmethod
    def from_header(cls, h):
        return cls(method=h["method"], weight=h["weight"], noise=dict(h.get("noise", {})))


@dataclass(frozen=True)
class BenchConfig:
    methods: tuple = ("weighted-nmf", "target-polish")
    weights: tuple = ("none", "cim", "huber")
    repeats: int = 10
    rank: int = None
    base_seed: int = 0
    n_iter_max: int = 200
    tol: float = 1e-6
    init: str = "random-uniform"
    emit_trajectories: bool = False

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; expected a subset of {METHODS}")
        bad = [w for w in self.weights if w not in KINDS]
        if bad:
            raise ValueError(f"unknown weights {bad}; expected a subset of {KINDS}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    def to_dict(self):
        return {
            "methods": list(self.methods), "weights": list(self.weights),
            "repeats": self.repeats, "rank": self.rank, "base_seed": self.base_seed,
            "n_iter_max": self.n_iter_max, "tol": self.tol, "init": self.init,
        }


def cells(methods, weights):
    """(method, weight) pairs to run; plain NMF ignores weights and runs once."""
    out = []
    for w in weights:
        for m in methods:
            if m != "plain-nmf":
                out.append((m, w))
    if "plain-nmf" in methods:
        out.append(("plain-nmf", "none"))
    return out


def run_method(method, weight, x, config, x_clean=None):
    """Run one solver; returns (fit, seconds spent in the solver)."""
    start = time.perf_counter()
    if method == "plain-nmf":
        fit = solve_nmf(x, config, x_clean=x_clean)
    elif method == "weighted-nmf":
        fit = solve_weighted_nmf(x, WeightScheme(weight), config, x_clean=x_clean)
    elif method == "target-polish":
        fit = solve_target_polish(x, PolishConfig(solve=config, scheme=WeightScheme(weight)),
                                  x_clean=x_clean)
    else:
        raise ValueError(f"unknown method {method!r}")
    return fit, time.perf_counter() - start


def write_trajectory(fit, path):
    """CSV ``iter,objective[,rre_clean],refresh`` with one row per iteration.

    For Target Polish the refinement iterations follow the polish sweeps
    and carry the weighted objective.
    """
    objective = list(fit.objective) + list(getattr(fit, "refine_objective", []))
    refresh = list(getattr(fit, "refresh", [0] * len(fit.objective)))
    refresh += [0] * (len(objective) - len(refresh))
    header = ["iter", "objective_polished"]
    if fit.clean_rre is not None:
        header.append("rre_clean")
    header.append("refresh")
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for i, obj in enumerate(objective):
            row = [i + 1, repr(obj)]
            if fit.clean_rre is not None:
                row.append(repr(fit.clean_rre[i]))
            row.append(refresh[i])
            out.writerow(row)


def _thread_count():
    raw = os.environ.get("RF_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"RF_THREADS must be an integer, got {raw!r}") from None


def run_experiment(dataset, noise, config, out_dir=None):
    """Corrupt, factorize and score ``dataset`` for every repeat and cell.

    Repeat ``i`` corrupts with seed ``config.base_seed + i`` and hands the
    same corrupted matrix to every (method, weight) cell.  Only the solver
    call is timed.
    """
    x_clean = dataset.x
    rank = config.rank or dataset.n_classes
    k = dataset.n_classes
    todo = cells(config.methods, config.weights)
    reports = {cell: RunReport(method=cell[0], weight=cell[1], noise=noise.to_dict())
               for cell in todo}
    traj_dir = None
    if config.emit_trajectories and out_dir is not None:
        traj_dir = Path(out_dir) / "trajectories"
        traj_dir.mkdir(parents=True, exist_ok=True)

    def one(i, cell, x_noisy):
        seed = config.base_seed + i
        solve = SolveConfig(rank=rank, n_iter_max=config.n_iter_max, tol=config.tol,
                            seed=seed, init=config.init)
        fit, secs = run_method(cell[0], cell[1], x_noisy, solve,
                               x_clean=x_clean if traj_dir is not None else None)
        labels = cluster_assign(fit.factors.h, k, seed=seed)
        traj = None
        if traj_dir is not None:
            name = f"{noise.kind}_{cell[1]}_{cell[0]}_r{i}.csv"
            write_trajectory(fit, traj_dir / name)
            traj = f"trajectories/{name}"
        return (seed, rre(x_clean, fit.factors), accuracy(labels, dataset.labels),
                nmi(labels, dataset.labels), secs, traj)

    jobs = []
    for i in range(config.repeats):
        spec = replace(noise, seed=config.base_seed + i)
        x_noisy = corrupt(x_clean, dataset.image_shape, spec)
        jobs.extend((i, cell, x_noisy) for cell in todo)

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: one(*job), jobs))
    else:
        results = [one(*job) for job in jobs]

    for (i, cell, _), res in zip(jobs, results):
        log.info("repeat %d %s/%s rre=%.4f acc=%.4f nmi=%.4f %.2fs", i, cell[0], cell[1],
                 res[1], res[2], res[3], res[4])
        reports[cell].add(*res)
    return [reports[cell] for cell in todo]


def _table_order(report):
    noise = report.noise.get("kind", "none")
    return (
        NOISE_ORDER.index(noise) if noise in NOISE_ORDER else len(NOISE_ORDER),
        KINDS.index(report.weight),
        METHODS.index(report.method),
    )


def emit_table(reports, path):
    """Write mean metrics to ``path`` and standard deviations to ``<stem>_std<suffix>``."""
    path = Path(path)
    std_path = path.with_name(f"{path.stem}_std{path.suffix or '.csv'}")
    header = ["noise", "weight", "method", *METRICS]
    ordered = sorted(reports, key=_table_order)
    for target, stat in ((path, "mean"), (std_path, "std")):
        with open(target, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(header)
            for rep in ordered:
                agg = rep.aggregate()
                out.writerow([rep.noise.get("kind", "none"), rep.weight, rep.method,
                              *(repr(agg[m][stat]) for m in METRICS)])
    return path, std_path
