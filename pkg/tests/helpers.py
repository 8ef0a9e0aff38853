"""Minimal targets used to exercise kernels and recursions in isolation."""

import numpy as np

from umsa.models.base import Model


class FlatModel(Model):
    """Constant density with a constant theta-gradient."""

    def __init__(self, d_u=2, grad_value=2.0, d_theta=1, box=(-1e6, 1e6)):
        self.d_u = d_u
        self.d_theta = d_theta
        self.grad_value = grad_value
        self._box = np.array([list(box)] * d_theta, dtype=float)

    @property
    def theta_box(self):
        return self._box

    def forward_stats(self, u, level):
        return 0.0

    def log_gamma_from_stats(self, theta, u, stats):
        return 0.0

    def grad_theta_from_stats(self, theta, u, stats):
        return np.full(self.d_theta, self.grad_value)

    def sample_prior(self, rng):
        return rng.standard_normal(self.d_u)


class BallModel(FlatModel):
    """Uniform density on a centered ball, zero outside."""

    def __init__(self, radius=1.0, **kwargs):
        super().__init__(**kwargs)
        self.radius = radius

    def forward_stats(self, u, level):
        return float(np.linalg.norm(u))

    def log_gamma_from_stats(self, theta, u, stats):
        return 0.0 if stats <= self.radius else -np.inf


class GaussianModel(FlatModel):
    """Standard normal target scaled by ``scale`` (level-independent)."""

    def __init__(self, scale=1.0, **kwargs):
        super().__init__(**kwargs)
        self.scale = scale

    def forward_stats(self, u, level):
        return float(u @ u)

    def log_gamma_from_stats(self, theta, u, stats):
        return -0.5 * stats / self.scale**2
