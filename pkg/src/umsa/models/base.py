"""Common interface of the discretized target models.

A model bundles, for each discretization level l, the unnormalized
log-density ``log_gamma(theta, u, l)`` of the latent variable u, its
gradient with respect to theta, prior sampling for u, and synthetic-data
generation.  The expensive part of an evaluation (the level-l forward
solve) is exposed separately as ``forward_stats`` so chains can cache it:
both ``log_gamma_from_stats`` and ``grad_theta_from_stats`` are cheap given
the cached statistics, which is what makes re-evaluating the density after
every theta update affordable.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

__all__ = ["Model"]


class Model(ABC):
    """Level-indexed unnormalized target with theta-gradient and priors."""

    d_theta: int
    d_u: int

    @property
    @abstractmethod
    def theta_box(self) -> np.ndarray:
        """Admissible theta box, shape (d_theta, 2) of [lo, hi] rows."""

    @abstractmethod
    def forward_stats(self, u: np.ndarray, level: int) -> Any:
        """Sufficient statistics of the level-``level`` forward evaluation at u.

        Deterministic given (u, level); everything log_gamma and grad_theta
        need beyond theta.
        """

    @abstractmethod
    def log_gamma_from_stats(self, theta: np.ndarray, u: np.ndarray, stats: Any) -> float:
        """Unnormalized log-density; -inf outside the support."""

    @abstractmethod
    def grad_theta_from_stats(self, theta: np.ndarray, u: np.ndarray, stats: Any) -> np.ndarray:
        """Gradient of log_gamma in theta; undefined on -inf states (raises)."""

    @abstractmethod
    def sample_prior(self, rng: np.random.Generator) -> np.ndarray:
        """Draw u from the prior."""

    # -- conveniences shared by all models --------------------------------

    def log_gamma(self, theta: np.ndarray, u: np.ndarray, level: int) -> float:
        return self.log_gamma_from_stats(theta, u, self.forward_stats(u, level))

    def grad_theta(self, theta: np.ndarray, u: np.ndarray, level: int) -> np.ndarray:
        return self.grad_theta_from_stats(theta, u, self.forward_stats(u, level))

    def clamp_theta(self, theta: np.ndarray) -> np.ndarray:
        box = self.theta_box
        return np.clip(theta, box[:, 0], box[:, 1])

    def theta_in_box(self, theta: np.ndarray) -> bool:
        box = self.theta_box
        return bool(np.all(theta >= box[:, 0]) and np.all(theta <= box[:, 1]))

    def validate_theta(self, theta: np.ndarray) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.d_theta,):
            raise ValueError(
                f"theta must have shape ({self.d_theta},), got {theta.shape}"
            )
        return theta
