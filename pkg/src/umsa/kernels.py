"""Autoregressive Gaussian (pCN) proposals, the MH step, and couplings.

The proposal at state u is ``N(rho * u, (1 - rho^2) * Sigma)`` with
``Sigma = sigma sigma^T``; the acceptance ratio always carries the proposal
density correction, so any (rho, sigma) is a valid kernel for any target.

Two ways of coupling the proposals of a chain pair are provided:

* synchronous - both proposals are driven by the same standard normal;
* reflection-maximal - for a pair sharing (rho, sigma), the second proposal
  either equals the first (with the maximal meeting probability) or is the
  mirror image of the shared innovation across the mean-gap direction.

A coupled MH step accepts each component against one shared uniform.

RNG contract: every step consumes exactly ``d_u`` standard normals followed
by one uniform from the chain stream, coupled or not; randomness internal
to a coupling (the reflection meet test) comes from a separate stream.
The first component of a coupled step therefore reproduces, bit for bit,
the single-chain path driven by the same chain stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .models.base import Model

__all__ = [
    "PcnParams",
    "ChainState",
    "CoupledState",
    "CouplingKind",
    "pcn_propose",
    "proposal_log_correction",
    "make_chain_state",
    "make_coupled_state",
    "mh_step",
    "couple_synchronous",
    "couple_reflection_maximal",
    "coupled_mh_step",
]

CouplingKind = Literal["synchronous", "reflection"]
COUPLING_KINDS = ("synchronous", "reflection")


@dataclass(frozen=True, eq=False)
class PcnParams:
    """Proposal parameters: correlation rho in (-1, 1) and factor sigma."""

    rho: float
    sigma: np.ndarray
    sigma_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (-1, 1), got {self.rho}")
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValueError(f"sigma must be square, got shape {sigma.shape}")
        try:
            sigma_inv = np.linalg.inv(sigma)
        except np.linalg.LinAlgError as exc:
            raise ValueError("sigma must be invertible") from exc
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "sigma_inv", sigma_inv)

    @classmethod
    def isotropic(cls, rho: float, scale: float, d: int) -> "PcnParams":
        return cls(rho=rho, sigma=scale * np.eye(d))

    @property
    def innovation_scale(self) -> float:
        return math.sqrt(1.0 - self.rho**2)

    def same_proposal(self, other: "PcnParams") -> bool:
        return self.rho == other.rho and np.array_equal(self.sigma, other.sigma)


@dataclass
class ChainState:
    """Chain position with the cached forward statistics and log-density.

    ``log_gamma`` is the target value at the theta and level the chain is
    currently running; refresh it whenever theta changes.
    """

    u: np.ndarray
    stats: object
    log_gamma: float


@dataclass
class CoupledState:
    """Pair of chain states at neighbouring levels (fine, coarse)."""

    fine: ChainState
    coarse: ChainState


def pcn_propose(u: np.ndarray, params: PcnParams, z: np.ndarray) -> np.ndarray:
    """Proposal ``rho * u + sqrt(1 - rho^2) * sigma @ z``."""
    return params.rho * u + params.innovation_scale * (params.sigma @ z)


def proposal_log_correction(u: np.ndarray, u_new: np.ndarray, params: PcnParams) -> float:
    """log q(u_new -> u) - log q(u -> u_new) for the autoregressive proposal."""
    fwd = params.sigma_inv @ (u_new - params.rho * u)
    bwd = params.sigma_inv @ (u - params.rho * u_new)
    return (float(fwd @ fwd) - float(bwd @ bwd)) / (2.0 * (1.0 - params.rho**2))


def make_chain_state(model: Model, theta: np.ndarray, u: np.ndarray, level: int) -> ChainState:
    stats = model.forward_stats(u, level)
    return ChainState(u=np.asarray(u, dtype=float), stats=stats,
                      log_gamma=model.log_gamma_from_stats(theta, u, stats))


def make_coupled_state(
    model: Model,
    thetas: tuple[np.ndarray, np.ndarray],
    u: np.ndarray,
    level: int,
    coarse_level: int,
) -> CoupledState:
    return CoupledState(
        fine=make_chain_state(model, thetas[0], u, level),
        coarse=make_chain_state(model, thetas[1], u.copy(), coarse_level),
    )


def _accept(v: float, log_ratio: float) -> bool:
    # alpha = exp(min(0, log_ratio)); a -inf proposal density gives alpha = 0
    return v < math.exp(min(0.0, log_ratio))


def mh_step(
    model: Model,
    theta: np.ndarray,
    level: int,
    state: ChainState,
    params: PcnParams,
    rng: np.random.Generator,
) -> tuple[ChainState, bool]:
    """One MH step targeting gamma(theta, ., level); returns (state, accepted).

    Consumes d_u normals then one uniform, in that order, also on rejection.
    """
    z = rng.standard_normal(model.d_u)
    v = rng.uniform()
    u_new = pcn_propose(state.u, params, z)
    stats_new = model.forward_stats(u_new, level)
    lg_new = model.log_gamma_from_stats(theta, u_new, stats_new)
    if lg_new == -np.inf:
        return state, False
    log_ratio = lg_new - state.log_gamma + proposal_log_correction(state.u, u_new, params)
    if _accept(v, log_ratio):
        return ChainState(u=u_new, stats=stats_new, log_gamma=lg_new), True
    return state, False


def couple_synchronous(
    u_fine: np.ndarray,
    u_coarse: np.ndarray,
    params_fine: PcnParams,
    params_coarse: PcnParams,
    z: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Both proposals from the same innovation z."""
    return pcn_propose(u_fine, params_fine, z), pcn_propose(u_coarse, params_coarse, z)


def couple_reflection_maximal(
    u_fine: np.ndarray,
    u_coarse: np.ndarray,
    params: PcnParams,
    z: np.ndarray,
    meet_u: float,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Reflection-maximal coupling of the two equal-covariance proposals.

    The proposals are ``N(rho u, s^2 Sigma)`` and ``N(rho u', s^2 Sigma)``
    with ``s = sqrt(1 - rho^2)``.  In whitened coordinates the mean gap is
    ``delta = (rho / s) sigma^-1 (u - u')``; with innovation z the first
    proposal is ``rho u + s sigma z``, and the second either coincides with
    it (accepted with probability ``min(1, phi(z + delta) / phi(z))``, which
    is the maximal meeting probability) or uses z reflected across the gap
    direction.  Returns (fine proposal, coarse proposal, met).
    """
    prop_fine = pcn_propose(u_fine, params, z)
    s = params.innovation_scale
    delta = (params.rho / s) * (params.sigma_inv @ (u_fine - u_coarse))
    gap = float(np.linalg.norm(delta))
    if gap == 0.0:
        return prop_fine, prop_fine.copy(), True
    log_meet = -float(delta @ z) - 0.5 * gap**2
    if meet_u < math.exp(min(0.0, log_meet)):
        return prop_fine, prop_fine.copy(), True
    e = delta / gap
    z_reflected = z - 2.0 * float(e @ z) * e
    return prop_fine, pcn_propose(u_coarse, params, z_reflected), False


def coupled_mh_step(
    model: Model,
    thetas: tuple[np.ndarray, np.ndarray],
    level: int,
    coarse_level: int,
    pair: CoupledState,
    params_fine: PcnParams,
    params_coarse: PcnParams,
    kind: CouplingKind,
    rng: np.random.Generator,
    coupling_rng: np.random.Generator | None = None,
) -> tuple[CoupledState, tuple[bool, bool], bool]:
    """One coupled MH step: coupled proposals, one shared accept uniform.

    Each component accepts independently against the same uniform, with its
    own target at its own (theta, level).  Returns (pair, accepted, met).
    """
    if kind not in COUPLING_KINDS:
        raise ValueError(f"unknown coupling kind {kind!r}")
    z = rng.standard_normal(model.d_u)
    v = rng.uniform()
    if kind == "synchronous":
        prop_fine, prop_coarse = couple_synchronous(
            pair.fine.u, pair.coarse.u, params_fine, params_coarse, z
        )
        met = bool(np.array_equal(prop_fine, prop_coarse))
    else:
        if not params_fine.same_proposal(params_coarse):
            raise ValueError("reflection coupling requires shared (rho, sigma)")
        if coupling_rng is None:
            raise ValueError("reflection coupling requires a coupling_rng")
        meet_u = coupling_rng.uniform()
        prop_fine, prop_coarse, met = couple_reflection_maximal(
            pair.fine.u, pair.coarse.u, params_fine, z, meet_u
        )

    accepted = [False, False]
    new_states = []
    for idx, (theta, lvl, st, prop, prm) in enumerate(
        (
            (thetas[0], level, pair.fine, prop_fine, params_fine),
            (thetas[1], coarse_level, pair.coarse, prop_coarse, params_coarse),
        )
    ):
        stats_new = model.forward_stats(prop, lvl)
        lg_new = model.log_gamma_from_stats(theta, prop, stats_new)
        if lg_new > -np.inf:
            log_ratio = lg_new - st.log_gamma + proposal_log_correction(st.u, prop, prm)
            if _accept(v, log_ratio):
                st = ChainState(u=prop, stats=stats_new, log_gamma=lg_new)
                accepted[idx] = True
        new_states.append(st)
    return CoupledState(fine=new_states[0], coarse=new_states[1]), (accepted[0], accepted[1]), met
