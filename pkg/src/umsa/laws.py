"""Randomization laws, step-size schedules, cost accounting and RNG plans.

These are the shared ingredients of the randomized multilevel estimator: the
Robbins-Monro step-size schedule, the distribution of the discretization
level, the distribution of the (dyadic) iteration budget, the cost ledger
that prices chain steps per level, and the seeding scheme that makes every
replicate a pure function of ``(master_seed, replicate_id)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StepSchedule",
    "LevelLaw",
    "IterationLaw",
    "CostLedger",
    "SeedPlan",
    "iterations",
    "level_step_cost",
    "sample_categorical",
]

_PMF_TOL = 1e-12


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes ``phi_n = phi0 / (n + n0)**exponent`` for n >= 1.

    ``exponent`` must lie in (0.5, 1] so that the steps are square-summable
    but not summable.  ``phi0 = 0`` is permitted as a degenerate schedule
    (useful to freeze the iterate in tests); any ``phi0 > 0`` gives strictly
    decreasing positive steps.
    """

    phi0: float
    n0: float = 0.0
    exponent: float = 1.0

    def __post_init__(self) -> None:
        if self.phi0 < 0.0:
            raise ValueError(f"phi0 must be >= 0, got {self.phi0}")
        if self.n0 < 0.0:
            raise ValueError(f"n0 must be >= 0, got {self.n0}")
        if not 0.5 < self.exponent <= 1.0:
            raise ValueError(f"exponent must be in (0.5, 1], got {self.exponent}")

    def step_size(self, n: int) -> float:
        """Return phi_n, the gain used at iteration n (n >= 1)."""
        return self.phi0 / (n + self.n0) ** self.exponent


@dataclass(frozen=True)
class LevelLaw:
    """Distribution of the discretization level on ``{l_min, ..., l_max}``.

    The probability of level l is proportional to ``Delta_l**rho_zeta`` with
    the normalized mesh ``Delta_l = 2**-l``, i.e. weights decay geometrically
    with ratio ``2**-rho_zeta``.  ``delta0`` records the physical level-0
    mesh scale (it cancels from the normalized pmf).
    """

    l_min: int
    l_max: int
    rho_zeta: float = 0.5
    delta0: float = 1.0

    def __post_init__(self) -> None:
        if self.l_min < 0:
            raise ValueError(f"l_min must be >= 0, got {self.l_min}")
        if self.l_max < self.l_min:
            raise ValueError(f"l_max must be >= l_min, got {self.l_max} < {self.l_min}")
        if not 0.0 < self.rho_zeta <= 1.0:
            raise ValueError(f"rho_zeta must be in (0, 1], got {self.rho_zeta}")
        if self.delta0 <= 0.0:
            raise ValueError(f"delta0 must be > 0, got {self.delta0}")

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.l_min, self.l_max + 1)

    def probs(self) -> np.ndarray:
        weights = 2.0 ** (-self.rho_zeta * self.support)
        return weights / weights.sum()

    def pmf(self, l: int) -> float:
        if l < self.l_min or l > self.l_max:
            return 0.0
        return float(self.probs()[l - self.l_min])


@dataclass(frozen=True)
class IterationLaw:
    """Distribution of the iteration index p on ``{0, ..., p_max}``.

    The weight of p is ``2**-p * (p + 1) * log2(p + 2)**2``, normalized over
    the truncated support; index p buys ``N_p = 2**p`` chain iterations.
    """

    p_max: int = 12

    def __post_init__(self) -> None:
        if self.p_max < 0:
            raise ValueError(f"p_max must be >= 0, got {self.p_max}")
        if self.p_max > 62:
            # 2**p must stay a safe iteration count
            raise ValueError(f"p_max must be <= 62, got {self.p_max}")

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.p_max + 1)

    def probs(self) -> np.ndarray:
        p = self.support
        weights = 2.0 ** (-p) * (p + 1) * np.log2(p + 2) ** 2
        return weights / weights.sum()

    def pmf(self, p: int) -> float:
        if p < 0 or p > self.p_max:
            return 0.0
        return float(self.probs()[p])


def iterations(p: int) -> int:
    """Iteration budget ``N_p = 2**p`` bought by index p."""
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p}")
    return 1 << p


def level_step_cost(l: int, omega: float = 1.0) -> float:
    """Cost of one chain step at level l, in units of a level-0 step.

    With the normalized mesh ``Delta_l = 2**-l`` a level-l step costs
    ``Delta_l**-omega = 2**(l * omega)``, so level 0 costs exactly one unit.
    """
    return 2.0 ** (l * omega)


@dataclass
class CostLedger:
    """Accumulator of chain-step cost, additive across runs and replicates."""

    units: float = 0.0

    def add_steps(self, n_steps: int, level: int, omega: float = 1.0) -> float:
        """Charge ``n_steps`` level-``level`` steps; returns the charge."""
        if n_steps < 0:
            raise ValueError(f"n_steps must be >= 0, got {n_steps}")
        charge = n_steps * level_step_cost(level, omega)
        self.units += charge
        return charge

    def merge(self, other: "CostLedger") -> None:
        self.units += other.units


@dataclass(frozen=True)
class SeedPlan:
    """Derivation of per-replicate RNG streams from a master seed.

    The replicate seed, and hence every stream, is a pure function of
    ``(master_seed, replicate_id)``; distinct replicates get statistically
    independent streams regardless of scheduling order.
    """

    master_seed: int
    replicate_id: int = 0

    def __post_init__(self) -> None:
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be >= 0, got {self.master_seed}")
        if self.replicate_id < 0:
            raise ValueError(f"replicate_id must be >= 0, got {self.replicate_id}")

    def seed(self) -> int:
        """64-bit replicate seed (fully determines the replicate's streams)."""
        ss = np.random.SeedSequence([self.master_seed, self.replicate_id])
        return int(ss.generate_state(1, np.uint64)[0])

    def streams(self, n: int = 2) -> list[np.random.Generator]:
        """n independent generators derived from the replicate seed.

        Stream 0 drives the chain (proposals, accept uniforms, priors);
        stream 1 is reserved for coupling-internal randomness so that the
        chain stream consumption matches an uncoupled chain exactly.
        """
        root = np.random.SeedSequence(self.seed())
        return [np.random.default_rng(child) for child in root.spawn(n)]


def sample_categorical(
    support: np.ndarray, probs: np.ndarray, rng: np.random.Generator
):
    """Inverse-CDF draw from a finite pmf; deterministic given the stream.

    ``probs`` must be nonnegative and sum to 1 within 1e-12.
    """
    support = np.asarray(support)
    probs = np.asarray(probs, dtype=float)
    if support.shape != probs.shape:
        raise ValueError("support and probs must have matching shapes")
    if np.any(probs < 0.0) or abs(probs.sum() - 1.0) > _PMF_TOL:
        raise ValueError("probs must be a pmf summing to 1 within 1e-12")
    u = rng.uniform()
    idx = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return support[min(idx, len(support) - 1)].item()
