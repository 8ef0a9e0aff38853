"""Randomized single-term estimator of the marginal-likelihood maximizer.

One replicate draws a level l and an iteration index p, runs stochastic
approximation for ``N_p = 2**p`` steps (a single chain at the coarsest
level, a coupled two-level chain otherwise) and returns the doubly
differenced iterate divided by the sampling probability ``P_P(p) P_L(l)``.
Averaging independent replicates drives the variance down as 1/M while the
expectation is free of both the iteration and (up to the level truncation)
the discretization bias.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import COUPLING_KINDS, CouplingKind, PcnParams
from .laws import IterationLaw, LevelLaw, SeedPlan, StepSchedule, iterations, sample_categorical
from .models.base import Model
from .msa import MsaConfig, ReprojectionSettings, run_coupled_msa, run_msa

__all__ = [
    "UmsaConfig",
    "EstimateRecord",
    "single_term_estimate",
    "averaged_estimate",
    "write_records_csv",
]


@dataclass
class UmsaConfig:
    """Everything one replicate needs: model, laws, schedule, kernel, start."""

    model: Model
    level_law: LevelLaw
    iteration_law: IterationLaw
    schedule: StepSchedule
    theta0: np.ndarray
    pcn: PcnParams
    coupling: CouplingKind = "synchronous"
    omega: float = 1.0
    reprojection: ReprojectionSettings | None = None
    prior_retry_cap: int = 100
    init_u: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.theta0 = self.model.validate_theta(self.theta0)
        if not self.model.theta_in_box(self.theta0):
            raise ValueError(f"theta0 {self.theta0} outside the admissible box")
        if self.coupling not in COUPLING_KINDS:
            raise ValueError(f"unknown coupling kind {self.coupling!r}")

    def msa_config(self, level: int, n_steps: int, checkpoint: int | None) -> MsaConfig:
        return MsaConfig(
            level=level,
            n_steps=n_steps,
            schedule=self.schedule,
            theta0=self.theta0,
            pcn=self.pcn,
            checkpoint=checkpoint,
            omega=self.omega,
            reprojection=self.reprojection,
            prior_retry_cap=self.prior_retry_cap,
            init_u=self.init_u,
        )


@dataclass
class EstimateRecord:
    """One single-term replicate: the estimate and its provenance."""

    estimate: np.ndarray
    level: int
    p: int
    cost: float
    seconds: float
    seed: int
    replicate_id: int = 0


def single_term_estimate(
    config: UmsaConfig,
    rng: np.random.Generator,
    coupling_rng: np.random.Generator | None = None,
    seed: int = 0,
    replicate_id: int = 0,
) -> EstimateRecord:
    """One draw of the randomized estimator.

    Samples (l, p), runs one (possibly coupled) stochastic-approximation
    trajectory to ``N_p`` steps with a checkpoint at ``N_{p-1}``, and weights
    the telescoping increment by ``1 / (P_P(p) P_L(l))``.  Both checkpoints
    come from the same trajectory.
    """
    t_start = time.perf_counter()
    level_law, p_law = config.level_law, config.iteration_law
    level = sample_categorical(level_law.support, level_law.probs(), rng)
    p = sample_categorical(p_law.support, p_law.probs(), rng)
    n_steps = iterations(p)
    checkpoint = iterations(p - 1) if p > 0 else None
    msa_cfg = config.msa_config(level, n_steps, checkpoint)

    if level == level_law.l_min:
        run = run_msa(config.model, msa_cfg, rng)
        numerator = run.theta_final if p == 0 else run.theta_final - run.theta_checkpoint
        cost = run.cost
    else:
        fine, coarse = run_coupled_msa(
            config.model, level, msa_cfg, config.coupling, rng, coupling_rng
        )
        diff_final = fine.theta_final - coarse.theta_final
        if p == 0:
            numerator = diff_final
        else:
            numerator = diff_final - (fine.theta_checkpoint - coarse.theta_checkpoint)
        cost = fine.cost + coarse.cost

    weight = p_law.pmf(p) * level_law.pmf(level)
    return EstimateRecord(
        estimate=numerator / weight,
        level=level,
        p=p,
        cost=cost,
        seconds=time.perf_counter() - t_start,
        seed=seed,
        replicate_id=replicate_id,
    )


def _run_replicate(config: UmsaConfig, master_seed: int, replicate_id: int) -> EstimateRecord:
    plan = SeedPlan(master_seed=master_seed, replicate_id=replicate_id)
    rng, coupling_rng = plan.streams(2)
    return single_term_estimate(
        config, rng, coupling_rng, seed=plan.seed(), replicate_id=replicate_id
    )


def averaged_estimate(
    config: UmsaConfig,
    m_replicates: int,
    master_seed: int,
    n_jobs: int = 1,
) -> tuple[np.ndarray, list[EstimateRecord]]:
    """Mean of ``m_replicates`` independent single-term estimates.

    Replicate i runs on streams derived purely from ``(master_seed, i)`` and
    results are reduced in replicate order, so the value does not depend on
    scheduling.  Any failed replicate aborts the whole average (dropping
    records would bias it).
    """
    if m_replicates < 1:
        raise ValueError(f"m_replicates must be >= 1, got {m_replicates}")
    if n_jobs != 1:
        from joblib import Parallel, delayed

        records = Parallel(n_jobs=n_jobs)(
            delayed(_run_replicate)(config, master_seed, i) for i in range(m_replicates)
        )
    else:
        records = [_run_replicate(config, master_seed, i) for i in range(m_replicates)]
    mean = np.mean([rec.estimate for rec in records], axis=0)
    return mean, records


def write_records_csv(path: str | Path, records: list[EstimateRecord]) -> None:
    """Write replicate records in full precision.

    Header: ``replicate,seed,l,p,cost,seconds,theta_1..theta_d``.
    """
    if not records:
        raise ValueError("no records to write")
    d = records[0].estimate.size
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["replicate", "seed", "l", "p", "cost", "seconds"]
            + [f"theta_{k + 1}" for k in range(d)]
        )
        for rec in records:
            writer.writerow(
                [
                    rec.replicate_id,
                    rec.seed,
                    rec.level,
                    rec.p,
                    f"{rec.cost:.17g}",
                    f"{rec.seconds:.17g}",
                ]
                + [f"{v:.17g}" for v in rec.estimate]
            )


def read_records_csv(path: str | Path) -> list[EstimateRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:6] != ["replicate", "seed", "l", "p", "cost", "seconds"]:
            raise ValueError(f"unexpected records header: {header}")
        for row in reader:
            records.append(
                EstimateRecord(
                    estimate=np.array([float(v) for v in row[6:]]),
                    level=int(row[2]),
                    p=int(row[3]),
                    cost=float(row[4]),
                    seconds=float(row[5]),
                    seed=int(row[1]),
                    replicate_id=int(row[0]),
                )
            )
    return records
