"""Elliptic (pressure-equation) inverse problem with a noise-precision parameter.

The latent variable X in R^2 weights the forcing ``f(t) = X1 sin(2t) + X2 sin(t)``
of the two-point boundary value problem ``-h'' = f`` on [0, 2*pi] with
homogeneous Dirichlet conditions.  The exact solution is linear in X with
``h(t; X) = X1 sin(2t)/4 + X2 sin(t)``, observed at J equispaced interior
times under Gaussian noise with precision theta; X carries a N(0, 16 I)
prior.  Level l replaces the exact solve by a second-order central
finite-difference solve on a mesh of width ``2*pi * 2**-l``, giving the
J x 2 forward matrix ``G_l``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solveh_banded

from .base import Model

__all__ = ["EllipticModel"]


class EllipticModel(Model):
    """Level-discretized Gaussian-noise elliptic model.

    Parameters
    ----------
    y : observation vector of length ``j_obs``, or None for a data-free
        instance (forward solves and priors only).
    j_obs : number of observation times ``t_j = 2*pi*(2j-1)/(2*j_obs)``.
    prior_var : prior variance of each X coordinate.
    theta_box : admissible interval for the precision theta.
    """

    d_theta = 1
    d_u = 2

    def __init__(
        self,
        y: np.ndarray | None = None,
        j_obs: int = 50,
        prior_var: float = 16.0,
        theta_box: tuple[float, float] = (1.0, 1e4),
    ):
        self.j_obs = int(j_obs)
        self.prior_var = float(prior_var)
        j = np.arange(1, self.j_obs + 1)
        self.t_obs = 2.0 * np.pi * (2 * j - 1) / (2 * self.j_obs)
        self._theta_box = np.array([[theta_box[0], theta_box[1]]], dtype=float)
        if self._theta_box[0, 0] <= 0.0:
            raise ValueError("theta_box must be strictly positive for a precision")
        self.y = None if y is None else np.asarray(y, dtype=float).copy()
        if self.y is not None and self.y.shape != (self.j_obs,):
            raise ValueError(f"y must have shape ({self.j_obs},), got {self.y.shape}")
        self.domain_length = 2.0 * np.pi
        self._g_cache: dict[int, np.ndarray] = {}

    @property
    def theta_box(self) -> np.ndarray:
        return self._theta_box

    def with_data(self, y: np.ndarray) -> "EllipticModel":
        return EllipticModel(
            y=y,
            j_obs=self.j_obs,
            prior_var=self.prior_var,
            theta_box=tuple(self._theta_box[0]),
        )

    # -- forward solves ----------------------------------------------------

    def mesh_width(self, level: int) -> float:
        return self.domain_length * 2.0 ** (-level)

    def grid(self, level: int) -> np.ndarray:
        n = 1 << level
        return np.linspace(0.0, self.domain_length, n + 1)

    def solve_poisson(self, level: int, forcing: np.ndarray) -> np.ndarray:
        """Solve -h'' = f with h(0) = h(2*pi) = 0 on the level-``level`` mesh.

        ``forcing`` holds f at every grid node (boundary values unused);
        returns h at every node.  Standard 3-point Laplacian, so the
        symmetric tridiagonal system is positive definite.
        """
        if level < 1:
            raise ValueError(f"level must be >= 1 for interior nodes, got {level}")
        n = 1 << level
        dx = self.domain_length / n
        ab = np.empty((2, n - 1))
        ab[0] = -1.0 / dx**2
        ab[1] = 2.0 / dx**2
        h_int = solveh_banded(ab, forcing[1:-1])
        h = np.zeros(n + 1)
        h[1:-1] = h_int
        return h

    def solve_forward(self, level: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Grid and FD solution h for the forcing weighted by ``u = (X1, X2)``."""
        t = self.grid(level)
        f = u[0] * np.sin(2.0 * t) + u[1] * np.sin(t)
        return t, self.solve_poisson(level, f)

    def _interp_at_obs(self, level: int, h: np.ndarray) -> np.ndarray:
        # linear interpolation between the bracketing grid nodes
        n = 1 << level
        pos = self.t_obs / self.mesh_width(level)
        idx = np.clip(np.floor(pos).astype(int), 0, n - 1)
        w = pos - idx
        return (1.0 - w) * h[idx] + w * h[idx + 1]

    def forward_matrix(self, level: int) -> np.ndarray:
        """J x 2 forward matrix of the level-``level`` FD solve (cached)."""
        cached = self._g_cache.get(level)
        if cached is not None:
            return cached
        t = self.grid(level)
        cols = []
        for f in (np.sin(2.0 * t), np.sin(t)):
            h = self.solve_poisson(level, f)
            cols.append(self._interp_at_obs(level, h))
        g = np.column_stack(cols)
        self._g_cache[level] = g
        return g

    def analytic_forward_matrix(self) -> np.ndarray:
        """Exact-solution forward matrix: columns sin(2 t_j)/4 and sin(t_j)."""
        return np.column_stack((0.25 * np.sin(2.0 * self.t_obs), np.sin(self.t_obs)))

    # -- target density ----------------------------------------------------

    def _require_data(self) -> np.ndarray:
        if self.y is None:
            raise RuntimeError("model has no data; construct with y or use with_data")
        return self.y

    def forward_stats(self, u: np.ndarray, level: int) -> float:
        """Squared residual norm ||y - G_l u||^2."""
        y = self._require_data()
        r = y - self.forward_matrix(level) @ u
        return float(r @ r)

    def log_gamma_from_stats(self, theta: np.ndarray, u: np.ndarray, stats: float) -> float:
        th = float(theta[0])
        if th <= 0.0:
            raise ValueError(f"theta must be > 0, got {th}")
        return (
            0.5 * self.j_obs * np.log(th)
            - 0.5 * th * stats
            - float(u @ u) / (2.0 * self.prior_var)
        )

    def grad_theta_from_stats(self, theta: np.ndarray, u: np.ndarray, stats: float) -> np.ndarray:
        th = float(theta[0])
        if th <= 0.0:
            raise ValueError(f"theta must be > 0, got {th}")
        return np.array([0.5 * self.j_obs / th - 0.5 * stats])

    def sample_prior(self, rng: np.random.Generator) -> np.ndarray:
        return np.sqrt(self.prior_var) * rng.standard_normal(self.d_u)

    # -- data and closed forms ----------------------------------------------

    def generate_data(
        self,
        theta_true: np.ndarray,
        rng: np.random.Generator,
        l_data: int = 12,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Synthetic observations at level ``l_data``; returns (y, u_true)."""
        theta_true = self.validate_theta(theta_true)
        u_true = self.sample_prior(rng)
        g = self.forward_matrix(l_data)
        noise = rng.standard_normal(self.j_obs) / np.sqrt(theta_true[0])
        return g @ u_true + noise, u_true

    def least_squares_latent(self, level: int | str = "exact") -> np.ndarray:
        """Minimizer of ||y - G u||^2, a burn-in-free chain start."""
        y = self._require_data()
        g = (
            self.analytic_forward_matrix()
            if level == "exact"
            else self.forward_matrix(int(level))
        )
        return np.linalg.lstsq(g, y, rcond=None)[0]

    def posterior_moments(self, theta: float, level: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean and covariance of X | y at fixed theta and level.

        The conditional posterior is Gaussian with precision
        ``theta G^T G + prior_var^-1 I`` and mean ``theta Sigma G^T y``.
        """
        y = self._require_data()
        g = self.forward_matrix(level)
        prec = theta * g.T @ g + np.eye(self.d_u) / self.prior_var
        cov = np.linalg.inv(prec)
        mean = theta * cov @ (g.T @ y)
        return mean, cov

    def marginal_log_likelihood(self, theta: float, level: int | str) -> float:
        """log N(y; 0, theta^-1 I + prior_var * G G^T) at a level or 'exact'."""
        y = self._require_data()
        if theta <= 0.0:
            raise ValueError(f"theta must be > 0, got {theta}")
        g = (
            self.analytic_forward_matrix()
            if level == "exact"
            else self.forward_matrix(int(level))
        )
        cov = np.eye(self.j_obs) / theta + self.prior_var * (g @ g.T)
        factor = cho_factor(cov, lower=True)
        logdet = 2.0 * np.sum(np.log(np.diag(factor[0])))
        quad = float(y @ cho_solve(factor, y))
        return -0.5 * (self.j_obs * np.log(2.0 * np.pi) + logdet + quad)

    def marginal_log_likelihood_grad(self, theta: float, level: int | str) -> float:
        """Derivative in theta of ``marginal_log_likelihood``.

        With C = theta^-1 I + prior_var G G^T this is
        ``(tr C^-1 - ||C^-1 y||^2) / (2 theta^2)``.
        """
        y = self._require_data()
        g = (
            self.analytic_forward_matrix()
            if level == "exact"
            else self.forward_matrix(int(level))
        )
        cov = np.eye(self.j_obs) / theta + self.prior_var * (g @ g.T)
        factor = cho_factor(cov, lower=True)
        cov_inv_y = cho_solve(factor, y)
        trace_inv = float(np.trace(cho_solve(factor, np.eye(self.j_obs))))
        return 0.5 * (trace_inv - float(cov_inv_y @ cov_inv_y)) / theta**2
