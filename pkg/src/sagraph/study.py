"""Replicated simulation study over network, size, prior and restriction.

Each replication simulates data on an alternating strip, fits the model and
records the Frobenius norm of the precision estimate, the RMSE of the
effect estimates and the F1 score of the effect selection.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .config import FitConfig
from .dist import make_rng
from .exceptions import ConfigurationError
from .gibbs import posterior_summary, run_gibbs, select_edges
from .metrics import f1, frobenius, rmse
from .params import Symmetric, Triangular
from .simulate import simulate_dataset

__all__ = ["StudyCell", "PRESETS", "preset_cells", "replication_seeds", "run_replication",
           "run_study", "aggregate", "write_records"]


@dataclass(frozen=True)
class StudyCell:
    network: str
    n: int
    p: int
    prior: str
    restriction: str


def _grid(networks, ns, ps, priors, restrictions):
    return [StudyCell(*c) for c in product(networks, ns, ps, priors, restrictions)]


# name -> (cells, replications, iterations, burn_in)
PRESETS = {
    "desk": (
        _grid(["random"], [25, 50, 100], [4], ["normal"], ["symmetric"])
        + [StudyCell("random", 100, 4, "normal-gamma", "triangular")],
        20, 2000, 1000,
    ),
    "smoke": (
        [StudyCell("random", 25, 4, "normal", "symmetric"),
         StudyCell("random", 25, 4, "normal-gamma", "triangular")],
        2, 60, 30,
    ),
    "table": (
        _grid(["random", "scale_free", "star"], [25, 50, 100], [4, 8, 20],
              ["normal", "normal-gamma"], ["symmetric", "triangular"]),
        20, 2000, 1000,
    ),
}


def preset_cells(name: str):
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]


def replication_seeds(seed: int, cell_index: int, replication: int) -> tuple[int, int]:
    """Independent ``(data_seed, fit_seed)`` for one replication."""
    state = np.random.SeedSequence([seed, cell_index, replication]).generate_state(2)
    return int(state[0]), int(state[1])


def run_replication(cell: StudyCell, data_seed: int, fit_seed: int, iterations: int,
                    burn_in: int, base: FitConfig | None = None) -> dict:
    restriction = Symmetric() if cell.restriction == "symmetric" else Triangular()
    cfg = (base or FitConfig()).updated(iterations=iterations, burn_in=burn_in, prior=cell.prior,
                                        restriction=cell.restriction)
    data = simulate_dataset(cell.n, cell.p, cell.network, restriction,
                            sparse=cell.prior == "normal-gamma", rng=make_rng(data_seed),
                            tau=cfg.tau)
    start = time.perf_counter()
    chain = run_gibbs(data.x, data.weights, cfg, seed=fit_seed)
    seconds = time.perf_counter() - start
    summary = posterior_summary(chain)
    selection = select_edges(chain)
    truth = np.stack([data.effects.psi_1, data.effects.psi_2])
    universe = chain.effects_template().free_mask()
    return dict(asdict(cell), data_seed=data_seed, fit_seed=fit_seed,
                fn=frobenius(data.theta, summary.theta_mean),
                rmse=rmse(truth, summary.psi_mean),
                f1=f1(truth != 0, selection, universe),
                acceptance=chain.acceptance_rate, seconds=seconds)


def _run_job(job):
    return run_replication(*job)


def run_study(cells, replications: int, seed: int, iterations: int, burn_in: int,
              threads: int = 1, base: FitConfig | None = None) -> list[dict]:
    """All replications of all cells, ordered by cell then replication."""
    jobs = []
    for ci, cell in enumerate(cells):
        for r in range(replications):
            ds, fs = replication_seeds(seed, ci, r)
            jobs.append((cell, ds, fs, iterations, burn_in, base))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(j) for j in jobs]
    for k, rec in enumerate(records):
        rec["replication"] = k % replications
    return records


def aggregate(records: list[dict]) -> list[dict]:
    """Mean and standard error of FN, RMSE and F1 per cell."""
    keys = list(dict.fromkeys((r["network"], r["n"], r["p"], r["prior"], r["restriction"])
                              for r in records))
    rows = []
    for key in keys:
        group = [r for r in records if (r["network"], r["n"], r["p"], r["prior"], r["restriction"]) == key]
        row = dict(zip(("network", "n", "p", "prior", "restriction"), key), replications=len(group))
        for m in ("fn", "rmse", "f1"):
            vals = np.array([g[m] for g in group], dtype=float)
            row[m] = float(vals.mean())
            row[m + "_se"] = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.nan
        rows.append(row)
    return rows


def write_records(rows: list[dict], path: str | Path) -> None:
    if not rows:
        raise ConfigurationError("nothing to write")
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("%.10g" % v if isinstance(v, float) else v) for k, v in r.items()})
