"""Experiment orchestration: oracles, convergence tables, MSE-cost sweeps.

The elliptic reference value is the maximizer of the exact marginal
likelihood of the data in hand (which is Gaussian once the latent weights
are integrated out), located by golden-section search; the epidemic model
has no closed form, so its reference is one very long fixed-level
stochastic-approximation run pinned by a seed.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .estimator import EstimateRecord, UmsaConfig, averaged_estimate
from .laws import SeedPlan
from .models import EllipticModel, Model, SirModel
from .msa import MsaConfig, run_msa

__all__ = [
    "OracleResult",
    "golden_section_maximize",
    "oracle_theta_star_elliptic",
    "sir_reference_estimate",
    "mse",
    "forward_convergence_table",
    "SweepRow",
    "ExperimentPlan",
    "run_sweep",
    "write_convergence_csv",
    "write_sweep_csv",
    "write_data_csv",
    "read_data_csv",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class OracleResult:
    theta: float
    log_likelihood: float
    at_boundary: bool


def golden_section_maximize(
    f, lo: float, hi: float, rel_tol: float = 1e-10
) -> OracleResult:
    """Golden-section maximization of a unimodal f on [lo, hi].

    Shrinks the bracket until its width falls below ``rel_tol`` relative to
    the midpoint magnitude; flags results that ran into either endpoint.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > rel_tol * max(1.0, 0.5 * (abs(a) + abs(b))):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    edge = 2.0 * (b - a)
    return OracleResult(
        theta=x,
        log_likelihood=f(x),
        at_boundary=(x - lo) <= edge or (hi - x) <= edge,
    )


def oracle_theta_star_elliptic(
    model: EllipticModel, level: int | str, rel_tol: float = 1e-10
) -> OracleResult:
    """Marginal-likelihood maximizer over the admissible precision interval.

    ``level`` selects the forward matrix; ``"exact"`` uses the analytic one.
    Golden-section locates the bracket; an interior maximum is then polished
    to the root of the analytic derivative, which is far less sensitive to
    roundoff than comparing nearly equal likelihood values.
    """
    lo, hi = model.theta_box[0]
    result = golden_section_maximize(
        lambda th: model.marginal_log_likelihood(th, level), lo, hi, rel_tol
    )
    if result.at_boundary:
        return result
    grad = lambda th: model.marginal_log_likelihood_grad(th, level)  # noqa: E731
    a = max(lo, result.theta * 0.99)
    b = min(hi, result.theta * 1.01)
    if grad(a) > 0.0 > grad(b):
        theta = float(brentq(grad, a, b, rtol=1e-14))
        return OracleResult(
            theta=theta,
            log_likelihood=model.marginal_log_likelihood(theta, level),
            at_boundary=False,
        )
    return result


def sir_reference_estimate(
    model: SirModel,
    config: MsaConfig,
    seed: int,
) -> np.ndarray:
    """Pinned reference for the epidemic model: tail mean of one long run."""
    rng = SeedPlan(master_seed=seed).streams(1)[0]
    return run_msa(model, config, rng).theta_tail_mean


def mse(estimates, theta_ref: np.ndarray) -> np.ndarray:
    """Coordinatewise mean squared deviation from the reference."""
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    if estimates.shape[0] < 2:
        raise ValueError("mse needs at least 2 repetitions")
    theta_ref = np.atleast_1d(np.asarray(theta_ref, dtype=float))
    return np.mean((estimates - theta_ref) ** 2, axis=0)


def forward_convergence_table(
    model: EllipticModel,
    levels,
    probe: tuple[float, float] = (1.0, 1.0),
) -> np.ndarray:
    """Rows (l, squared L2 distance of consecutive-level solutions).

    The probe fixes the latent weights; each solution is compared with the
    next-coarser one on the coarser grid (whose nodes are every second fine
    node), in the discrete L2 norm of that grid.
    """
    probe_u = np.asarray(probe, dtype=float)
    rows = []
    for level in levels:
        if level < 2:
            raise ValueError(f"need level >= 2 to compare with level - 1, got {level}")
        _, h_fine = model.solve_forward(level, probe_u)
        _, h_coarse = model.solve_forward(level - 1, probe_u)
        diff = h_fine[::2] - h_coarse
        diff_sq = model.mesh_width(level - 1) * float(diff @ diff)
        rows.append((level, diff_sq))
    return np.array(rows)


@dataclass
class SweepRow:
    m: int
    mse: np.ndarray
    cost: float
    seconds_mean: float


@dataclass
class ExperimentPlan:
    """An MSE-versus-cost sweep over the replicate-count grid."""

    config: UmsaConfig
    m_grid: list[int]
    repetitions: int
    theta_ref: np.ndarray
    master_seed: int
    n_jobs: int = 1

    def __post_init__(self) -> None:
        grid = list(self.m_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"m_grid must be strictly increasing, got {grid}")
        if self.repetitions < 2:
            raise ValueError(f"repetitions must be >= 2, got {self.repetitions}")
        self.theta_ref = np.atleast_1d(np.asarray(self.theta_ref, dtype=float))


def _cell_seed(master_seed: int, m_index: int, repetition: int) -> int:
    ss = np.random.SeedSequence([master_seed, m_index, repetition])
    return int(ss.generate_state(1, np.uint64)[0])


def run_sweep(plan: ExperimentPlan) -> list[SweepRow]:
    """For each M: ``repetitions`` independent averaged estimates, then MSE.

    Cost per row is the mean total cost of one M-replicate estimate (the
    summed cost of its replicates); seconds likewise.
    """
    rows = []
    for m_index, m in enumerate(plan.m_grid):
        means = np.empty((plan.repetitions, plan.theta_ref.size))
        costs = np.empty(plan.repetitions)
        seconds = np.empty(plan.repetitions)
        for rep in range(plan.repetitions):
            t0 = time.perf_counter()
            mean, records = averaged_estimate(
                plan.config,
                m_replicates=m,
                master_seed=_cell_seed(plan.master_seed, m_index, rep),
                n_jobs=plan.n_jobs,
            )
            seconds[rep] = time.perf_counter() - t0
            means[rep] = mean
            costs[rep] = sum(rec.cost for rec in records)
        rows.append(
            SweepRow(
                m=m,
                mse=mse(means, plan.theta_ref),
                cost=float(costs.mean()),
                seconds_mean=float(seconds.mean()),
            )
        )
    return rows


# -- CSV interfaces ---------------------------------------------------------


def write_convergence_csv(path: str | Path, rows: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l", "diff_sq"])
        for level, diff_sq in rows:
            writer.writerow([int(level), f"{diff_sq:.17g}"])


def write_sweep_csv(path: str | Path, rows: list[SweepRow]) -> None:
    if not rows:
        raise ValueError("no sweep rows to write")
    d = rows[0].mse.size
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["M", "cost", "seconds_mean"] + [f"mse_{k + 1}" for k in range(d)]
        )
        for row in rows:
            writer.writerow(
                [row.m, f"{row.cost:.17g}", f"{row.seconds_mean:.17g}"]
                + [f"{v:.17g}" for v in row.mse]
            )


def write_data_csv(path: str | Path, model: Model, y: np.ndarray) -> None:
    """Observations in the model's on-disk layout, full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if isinstance(model, EllipticModel):
            writer.writerow(["index", "t", "y"])
            for idx, (t, val) in enumerate(zip(model.t_obs, y), start=1):
                writer.writerow([idx, f"{t:.17g}", f"{val:.17g}"])
        elif isinstance(model, SirModel):
            writer.writerow(["day", "y"])
            for i, val in enumerate(y, start=1):
                writer.writerow([model.n_offset + i, f"{val:.17g}"])
        else:
            raise TypeError(f"no CSV layout for {type(model).__name__}")


def read_data_csv(path: str | Path, kind: str) -> np.ndarray:
    expected = {"elliptic": ["index", "t", "y"], "sir": ["day", "y"]}[kind]
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != expected:
            raise ValueError(f"expected header {expected}, got {header}")
        for row in reader:
            values.append(float(row[-1]))
    return np.array(values)
