"""Stochastic approximation driven by one MH step per iteration.

``run_msa`` maximizes the level-l marginal likelihood in theta by the
recursion ``theta_n = theta_{n-1} + phi_n * H_l(theta_{n-1}, U_n)`` where
``U_n`` is produced by a single MH transition targeting the level-l
conditional of the current theta, and ``H_l`` is the theta-gradient of the
unnormalized log-density.  ``run_coupled_msa`` advances two such recursions
at neighbouring levels through a coupled kernel, which is what the
randomized multilevel estimator differences.

Iterates are stabilized either by clamping to the model's admissible box
(default) or by the reset-to-start reprojection scheme.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import (
    ChainState,
    CoupledState,
    CouplingKind,
    PcnParams,
    coupled_mh_step,
    make_chain_state,
    mh_step,
)
from .laws import StepSchedule, level_step_cost
from .models.base import Model

__all__ = [
    "ReprojectionSettings",
    "MsaConfig",
    "MsaRun",
    "reproject",
    "run_msa",
    "run_coupled_msa",
]


@dataclass(frozen=True)
class ReprojectionSettings:
    """Reset-to-start stabilization with growing boxes and shrinking moves.

    At iteration n the proposal iterate is kept only if it moved less than
    ``eps_n = eps0 * n**-decay`` and lies in the box centered at ``center``
    with half-width ``r0 * (1 + n + 1)**growth``; otherwise the iterate is
    reset to the start value.
    """

    center: np.ndarray
    r0: float = 10.0
    growth: float = 0.1
    eps0: float = 1.0
    decay: float = 0.2

    def __post_init__(self) -> None:
        if self.r0 <= 0 or self.eps0 <= 0:
            raise ValueError("r0 and eps0 must be > 0")
        if self.growth < 0 or self.decay < 0:
            raise ValueError("growth and decay must be >= 0")

    def box_half_width(self, n: int) -> float:
        return self.r0 * (1.0 + n) ** self.growth

    def eps(self, n: int) -> float:
        return self.eps0 * n ** (-self.decay)


def reproject(
    theta_tilde: np.ndarray,
    theta_prev: np.ndarray,
    theta0: np.ndarray,
    n: int,
    settings: ReprojectionSettings,
) -> np.ndarray:
    """Keep theta_tilde iff it moved < eps_n and stays in the n+1 box."""
    center = np.asarray(settings.center, dtype=float)
    moved = float(np.linalg.norm(theta_tilde - theta_prev))
    inside = bool(np.all(np.abs(theta_tilde - center) <= settings.box_half_width(n + 1)))
    if moved < settings.eps(n) and inside:
        return theta_tilde
    return theta0.copy()


@dataclass
class MsaConfig:
    """One stochastic-approximation run: level, budget, schedule, start."""

    level: int
    n_steps: int
    schedule: StepSchedule
    theta0: np.ndarray
    pcn: PcnParams
    pcn_coarse: PcnParams | None = None
    checkpoint: int | None = None
    omega: float = 1.0
    reprojection: ReprojectionSettings | None = None
    prior_retry_cap: int = 100
    init_u: np.ndarray | None = None
    record_path: bool = False
    trace_file: str | Path | None = None

    def __post_init__(self) -> None:
        self.theta0 = np.atleast_1d(np.asarray(self.theta0, dtype=float))
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.checkpoint is not None and not 1 <= self.checkpoint <= self.n_steps:
            raise ValueError(
                f"checkpoint must be in [1, {self.n_steps}], got {self.checkpoint}"
            )
        if self.prior_retry_cap < 1:
            raise ValueError("prior_retry_cap must be >= 1")


@dataclass
class MsaRun:
    """Result of one run: final and checkpoint iterates plus bookkeeping."""

    theta_final: np.ndarray
    theta_checkpoint: np.ndarray | None
    level: int
    n_steps: int
    cost: float
    acceptance_rate: float
    theta_tail_mean: np.ndarray
    path: np.ndarray | None = None


def _initial_state(
    model: Model,
    theta: np.ndarray,
    levels: tuple[int, ...],
    rng: np.random.Generator,
    config: MsaConfig,
):
    """Starting latent state with finite density at every requested level.

    By default draws from the prior, retrying up to the cap; a fixed
    ``config.init_u`` is used as-is (no stream consumption) and must be
    admissible.  Returns (u, stats per level, log_gamma per level).
    """
    if config.init_u is not None:
        u = np.asarray(config.init_u, dtype=float).copy()
        stats = [model.forward_stats(u, lvl) for lvl in levels]
        lgs = [model.log_gamma_from_stats(theta, u, s) for s in stats]
        if not all(lg > -np.inf for lg in lgs):
            raise ValueError(f"init_u is inadmissible at levels {levels}")
        return u, stats, lgs
    for _ in range(config.prior_retry_cap):
        u = model.sample_prior(rng)
        stats = [model.forward_stats(u, lvl) for lvl in levels]
        lgs = [model.log_gamma_from_stats(theta, u, s) for s in stats]
        if all(lg > -np.inf for lg in lgs):
            return u, stats, lgs
    raise RuntimeError(
        f"no admissible initial state at levels {levels} "
        f"after {config.prior_retry_cap} prior draws"
    )


def _stabilize(
    model: Model,
    theta_tilde: np.ndarray,
    theta_prev: np.ndarray,
    config: MsaConfig,
    n: int,
) -> np.ndarray:
    if config.reprojection is not None:
        return reproject(theta_tilde, theta_prev, config.theta0, n, config.reprojection)
    return model.clamp_theta(theta_tilde)


def run_msa(model: Model, config: MsaConfig, rng: np.random.Generator) -> MsaRun:
    """Single-level stochastic approximation for ``config.n_steps`` iterations."""
    theta = model.validate_theta(config.theta0)
    if not model.theta_in_box(theta):
        raise ValueError(f"theta0 {theta} outside the admissible box")
    level, n_steps = config.level, config.n_steps
    u0, stats0, lg0 = _initial_state(model, theta, (level,), rng, config)
    state = ChainState(u=u0, stats=stats0[0], log_gamma=lg0[0])

    tail_from = n_steps // 2  # tail mean runs over iterates n > N/2
    tail_sum = np.zeros_like(theta)
    theta_checkpoint = None
    path = np.empty((n_steps, model.d_theta)) if config.record_path else None
    accepted_total = 0
    trace = _TraceWriter(config.trace_file)
    try:
        for n in range(1, n_steps + 1):
            state, accepted = mh_step(model, theta, level, state, config.pcn, rng)
            accepted_total += accepted
            h = model.grad_theta_from_stats(theta, state.u, state.stats)
            theta = _stabilize(model, theta + config.schedule.step_size(n) * h, theta, config, n)
            state.log_gamma = model.log_gamma_from_stats(theta, state.u, state.stats)
            if path is not None:
                path[n - 1] = theta
            trace.write(n, theta, accepted)
            if n == config.checkpoint:
                theta_checkpoint = theta.copy()
            if n > tail_from:
                tail_sum += theta
    finally:
        trace.close()

    return MsaRun(
        theta_final=theta,
        theta_checkpoint=theta_checkpoint,
        level=level,
        n_steps=n_steps,
        cost=n_steps * level_step_cost(level, config.omega),
        acceptance_rate=accepted_total / n_steps,
        theta_tail_mean=tail_sum / (n_steps - tail_from),
        path=path,
    )


def run_coupled_msa(
    model: Model,
    level: int,
    config: MsaConfig,
    kind: CouplingKind,
    rng: np.random.Generator,
    coupling_rng: np.random.Generator | None = None,
    coarse_level: int | None = None,
) -> tuple[MsaRun, MsaRun]:
    """Coupled two-level stochastic approximation; returns (fine, coarse) runs.

    Both recursions start from the same theta0 and the same prior draw (a
    valid coupling of the initial laws), are advanced through the coupled
    kernel with a shared accept uniform, and apply the same step sizes to
    their own gradients at their own levels.
    """
    if coarse_level is None:
        coarse_level = level - 1
    theta_fine = model.validate_theta(config.theta0)
    if not model.theta_in_box(theta_fine):
        raise ValueError(f"theta0 {theta_fine} outside the admissible box")
    theta_coarse = theta_fine.copy()
    params_fine = config.pcn
    params_coarse = config.pcn_coarse if config.pcn_coarse is not None else config.pcn
    if kind == "reflection" and not params_fine.same_proposal(params_coarse):
        raise ValueError("reflection coupling requires shared (rho, sigma)")

    n_steps = config.n_steps
    u0, stats0, lg0 = _initial_state(
        model, theta_fine, (level, coarse_level), rng, config
    )
    pair = CoupledState(
        fine=ChainState(u=u0, stats=stats0[0], log_gamma=lg0[0]),
        coarse=ChainState(u=u0.copy(), stats=stats0[1], log_gamma=lg0[1]),
    )

    tail_from = n_steps // 2
    tail_sums = [np.zeros_like(theta_fine), np.zeros_like(theta_coarse)]
    checkpoints: list[np.ndarray | None] = [None, None]
    paths = (
        [np.empty((n_steps, model.d_theta)), np.empty((n_steps, model.d_theta))]
        if config.record_path
        else None
    )
    accepted_totals = [0, 0]

    for n in range(1, n_steps + 1):
        pair, accepted, _met = coupled_mh_step(
            model,
            (theta_fine, theta_coarse),
            level,
            coarse_level,
            pair,
            params_fine,
            params_coarse,
            kind,
            rng,
            coupling_rng,
        )
        accepted_totals[0] += accepted[0]
        accepted_totals[1] += accepted[1]
        phi = config.schedule.step_size(n)
        h_fine = model.grad_theta_from_stats(theta_fine, pair.fine.u, pair.fine.stats)
        h_coarse = model.grad_theta_from_stats(theta_coarse, pair.coarse.u, pair.coarse.stats)
        theta_fine = _stabilize(model, theta_fine + phi * h_fine, theta_fine, config, n)
        theta_coarse = _stabilize(model, theta_coarse + phi * h_coarse, theta_coarse, config, n)
        pair.fine.log_gamma = model.log_gamma_from_stats(theta_fine, pair.fine.u, pair.fine.stats)
        pair.coarse.log_gamma = model.log_gamma_from_stats(
            theta_coarse, pair.coarse.u, pair.coarse.stats
        )
        if paths is not None:
            paths[0][n - 1] = theta_fine
            paths[1][n - 1] = theta_coarse
        if n == config.checkpoint:
            checkpoints[0] = theta_fine.copy()
            checkpoints[1] = theta_coarse.copy()
        if n > tail_from:
            tail_sums[0] += theta_fine
            tail_sums[1] += theta_coarse

    tail_count = n_steps - tail_from
    runs = []
    for idx, (theta, lvl) in enumerate(((theta_fine, level), (theta_coarse, coarse_level))):
        runs.append(
            MsaRun(
                theta_final=theta,
                theta_checkpoint=checkpoints[idx],
                level=lvl,
                n_steps=n_steps,
                cost=n_steps * level_step_cost(lvl, config.omega),
                acceptance_rate=accepted_totals[idx] / n_steps,
                theta_tail_mean=tail_sums[idx] / tail_count,
                path=None if paths is None else paths[idx],
            )
        )
    return runs[0], runs[1]


class _TraceWriter:
    """CSV debug trace `n,theta...,accepted`; no-op when no file is given."""

    def __init__(self, path: str | Path | None):
        self._fh = None
        self._writer = None
        self._header_written = False
        if path is not None:
            self._fh = open(path, "w", newline="")
            self._writer = csv.writer(self._fh)

    def write(self, n: int, theta: np.ndarray, accepted: bool) -> None:
        if self._writer is None:
            return
        if not self._header_written:
            self._writer.writerow(
                ["n"] + [f"theta_{k + 1}" for k in range(theta.size)] + ["accepted"]
            )
            self._header_written = True
        self._writer.writerow([n, *(f"{t:.17g}" for t in theta), int(accepted)])

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
