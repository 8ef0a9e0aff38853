"""Epidemic-compartment inverse problem with gamma-distributed under-reporting.

The latent variable ``x = (x1, x2, x3)`` collects a background removal rate,
a quarantine rate, and the outbreak lead time (days before t = 0).  The
four compartments (susceptible, infected, recovered, quarantined) evolve by

    S' = -a S I - x1 S
    I' =  a S I - (b + x1 + x2) I
    R' =  b I + x1 S
    Xi' = (x1 + x2) I

from ``(1 - 1/N, 1/N, 0, 0)`` at ``t = -x3``.  Daily new infections are
``G_i(x) = a * integral of S I over day i`` of the observation window, and
the observed proportions satisfy ``log y_i = log G_i(x) - Gamma_i`` with
``Gamma_i ~ Gamma(shape theta1, scale theta2)``, so the likelihood lives on
``{x : G_i(x) >= y_i for all i}``.  Level l integrates with classical RK4
at step ``0.1 * 2**-l``; the running integral of ``a S I`` is carried as a
fifth state so day boundaries are exact grid nodes (a single partial first
step absorbs the fractional start time ``-x3``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import digamma, gammaln

from .base import Model

__all__ = ["SirModel", "Trajectory"]


@njit(cache=True)
def _rhs(s, i, a, b, x1, x2):
    new_inf = a * s * i
    return (
        -new_inf - x1 * s,
        new_inf - (b + x1 + x2) * i,
        b * i + x1 * s,
        (x1 + x2) * i,
        new_inf,
    )


@njit(cache=True)
def _rk4_step(s, i, r, xi, c, h, a, b, x1, x2):
    k1 = _rhs(s, i, a, b, x1, x2)
    k2 = _rhs(s + 0.5 * h * k1[0], i + 0.5 * h * k1[1], a, b, x1, x2)
    k3 = _rhs(s + 0.5 * h * k2[0], i + 0.5 * h * k2[1], a, b, x1, x2)
    k4 = _rhs(s + h * k3[0], i + h * k3[1], a, b, x1, x2)
    w = h / 6.0
    return (
        s + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        i + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        r + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        xi + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
        c + w * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]),
    )


@njit(cache=True)
def _integrate_day_values(x1, x2, x3, a, b, init_i, dt, spd, first_day, last_day):
    """Cumulative a*S*I integral at integer days first_day..last_day.

    Integration starts at t = -x3 with one partial step onto the grid node
    ``k0 = ceil(-x3 / dt)``; from there day d sits exactly at node d * spd.
    """
    s = 1.0 - init_i
    i = init_i
    r = 0.0
    xi = 0.0
    c = 0.0
    k0 = int(np.ceil(-x3 / dt))
    h0 = k0 * dt + x3
    if h0 > 0.0:
        s, i, r, xi, c = _rk4_step(s, i, r, xi, c, h0, a, b, x1, x2)
    out = np.empty(last_day - first_day + 1)
    if k0 == first_day * spd:
        out[0] = c
    for node in range(k0, last_day * spd):
        s, i, r, xi, c = _rk4_step(s, i, r, xi, c, dt, a, b, x1, x2)
        nxt = node + 1
        if nxt % spd == 0:
            day = nxt // spd
            if day >= first_day:
                out[day - first_day] = c
    return out


@njit(cache=True)
def _integrate_trajectory(x1, x2, x3, a, b, init_i, dt, spd, last_day):
    k0 = int(np.ceil(-x3 / dt))
    h0 = k0 * dt + x3
    has_pre = h0 > 0.0
    m = (last_day * spd - k0) + 1 + (1 if has_pre else 0)
    times = np.empty(m)
    states = np.empty((m, 4))
    cum = np.empty(m)
    s = 1.0 - init_i
    i = init_i
    r = 0.0
    xi = 0.0
    c = 0.0
    pos = 0
    times[pos] = -x3
    states[pos, 0] = s
    states[pos, 1] = i
    states[pos, 2] = r
    states[pos, 3] = xi
    cum[pos] = c
    pos += 1
    if has_pre:
        s, i, r, xi, c = _rk4_step(s, i, r, xi, c, h0, a, b, x1, x2)
        times[pos] = k0 * dt
        states[pos, 0] = s
        states[pos, 1] = i
        states[pos, 2] = r
        states[pos, 3] = xi
        cum[pos] = c
        pos += 1
    for node in range(k0, last_day * spd):
        s, i, r, xi, c = _rk4_step(s, i, r, xi, c, dt, a, b, x1, x2)
        times[pos] = (node + 1) * dt
        states[pos, 0] = s
        states[pos, 1] = i
        states[pos, 2] = r
        states[pos, 3] = xi
        cum[pos] = c
        pos += 1
    return times, states, cum


@dataclass
class Trajectory:
    """RK4 path: grid times, (S, I, R, Xi) per node, running a*S*I integral.

    Grid spacing equals the level step except for the initial partial
    interval that moves the start -x3 onto the day-aligned grid.
    ``infections`` holds the per-day integrals G_i over the observation
    window when the horizon covers it.
    """

    times: np.ndarray
    states: np.ndarray
    cumulative: np.ndarray
    infections: np.ndarray | None


class SirModel(Model):
    """Level-discretized epidemic model with gamma reporting noise.

    Parameters
    ----------
    y : observed daily case proportions (length ``n_obs``), or None.
    a, b : transmission and recovery rates of the compartment dynamics.
    n_pop : population size fixing the initial infected fraction.
    n_offset : days from t = 0 to the first observed day.
    n_obs : number of observed days.
    delta0 : level-0 integration step; level l uses ``delta0 * 2**-l``.
    theta_box : admissible interval, shared by both gamma parameters.
    """

    d_theta = 2
    d_u = 3

    prior_box = np.array([[0.001, 0.003], [0.2, 0.4], [5.0, 25.0]])

    def __init__(
        self,
        y: np.ndarray | None = None,
        a: float = 0.35,
        b: float = 0.1,
        n_pop: float = 66_650_000.0,
        n_offset: int = 19,
        n_obs: int = 40,
        delta0: float = 0.1,
        theta_box: tuple[float, float] = (0.05, 50.0),
    ):
        self.a = float(a)
        self.b = float(b)
        self.n_pop = float(n_pop)
        self.n_offset = int(n_offset)
        self.n_obs = int(n_obs)
        self.delta0 = float(delta0)
        spd0 = round(1.0 / self.delta0)
        if spd0 < 1 or abs(spd0 * self.delta0 - 1.0) > 1e-9:
            raise ValueError(f"delta0 must divide one day, got {delta0}")
        self._spd0 = spd0
        if theta_box[0] <= 0.0:
            raise ValueError("theta_box must be strictly positive")
        self._theta_box = np.array([list(theta_box)] * self.d_theta, dtype=float)
        self.y = None if y is None else np.asarray(y, dtype=float).copy()
        if self.y is not None:
            if self.y.shape != (self.n_obs,):
                raise ValueError(f"y must have shape ({self.n_obs},), got {self.y.shape}")
            if np.any(self.y <= 0.0):
                raise ValueError("observations must be strictly positive")

    @property
    def theta_box(self) -> np.ndarray:
        return self._theta_box

    def with_data(self, y: np.ndarray) -> "SirModel":
        return SirModel(
            y=y,
            a=self.a,
            b=self.b,
            n_pop=self.n_pop,
            n_offset=self.n_offset,
            n_obs=self.n_obs,
            delta0=self.delta0,
            theta_box=tuple(self._theta_box[0]),
        )

    # -- forward integration -------------------------------------------------

    def step_size(self, level: int) -> float:
        return self.delta0 * 2.0 ** (-level)

    def _steps_per_day(self, level: int) -> int:
        return self._spd0 * (1 << level)

    def daily_infections(self, u: np.ndarray, level: int) -> np.ndarray:
        """Per-day new-infection integrals G_i over the observation window."""
        day_values = _integrate_day_values(
            float(u[0]),
            float(u[1]),
            float(u[2]),
            self.a,
            self.b,
            1.0 / self.n_pop,
            self.step_size(level),
            self._steps_per_day(level),
            self.n_offset,
            self.n_offset + self.n_obs,
        )
        return np.diff(day_values)

    def rk4_integrate(self, u: np.ndarray, level: int, horizon: int | None = None) -> Trajectory:
        """Full trajectory from t = -x3 up to day ``horizon`` (default n + P)."""
        if horizon is None:
            horizon = self.n_offset + self.n_obs
        dt = self.step_size(level)
        spd = self._steps_per_day(level)
        times, states, cum = _integrate_trajectory(
            float(u[0]), float(u[1]), float(u[2]),
            self.a, self.b, 1.0 / self.n_pop, dt, spd, int(horizon),
        )
        infections = None
        if horizon >= self.n_offset + self.n_obs:
            k0 = int(np.ceil(-float(u[2]) / dt))
            offset = 1 if k0 * dt + float(u[2]) > 0.0 else 0
            days = np.arange(self.n_offset, self.n_offset + self.n_obs + 1)
            infections = np.diff(cum[days * spd - k0 + offset])
        return Trajectory(times, states, cum, infections)

    # -- target density -------------------------------------------------------

    def u_in_prior_box(self, u: np.ndarray) -> bool:
        return bool(
            np.all(u >= self.prior_box[:, 0]) and np.all(u <= self.prior_box[:, 1])
        )

    def _require_data(self) -> np.ndarray:
        if self.y is None:
            raise RuntimeError("model has no data; construct with y or use with_data")
        return self.y

    def forward_stats(self, u: np.ndarray, level: int) -> np.ndarray | None:
        """Log reporting margins ``log(G_i / y_i)``, or None outside the prior box."""
        y = self._require_data()
        if not self.u_in_prior_box(u):
            return None
        g = self.daily_infections(u, level)
        with np.errstate(divide="ignore"):
            return np.log(g) - np.log(y)

    @staticmethod
    def _validate_theta_positive(theta: np.ndarray) -> tuple[float, float]:
        t1, t2 = float(theta[0]), float(theta[1])
        if t1 <= 0.0 or t2 <= 0.0:
            raise ValueError(f"gamma parameters must be > 0, got ({t1}, {t2})")
        return t1, t2

    def log_gamma_from_stats(
        self, theta: np.ndarray, u: np.ndarray, stats: np.ndarray | None
    ) -> float:
        t1, t2 = self._validate_theta_positive(theta)
        if stats is None or not np.all(stats > 0.0):
            # outside the prior box, some G_i < y_i, or a zero margin
            return -np.inf
        p = stats.size
        return float(
            p * (-gammaln(t1) - t1 * np.log(t2))
            + (t1 - 1.0) * np.sum(np.log(stats))
            - np.sum(stats) / t2
        )

    def grad_theta_from_stats(
        self, theta: np.ndarray, u: np.ndarray, stats: np.ndarray | None
    ) -> np.ndarray:
        t1, t2 = self._validate_theta_positive(theta)
        if stats is None or not np.all(stats > 0.0):
            raise ValueError("gradient undefined at a zero-density state")
        p = stats.size
        return np.array(
            [
                p * (-digamma(t1) - np.log(t2)) + np.sum(np.log(stats)),
                -p * t1 / t2 + np.sum(stats) / t2**2,
            ]
        )

    def sample_prior(self, rng: np.random.Generator) -> np.ndarray:
        lo, hi = self.prior_box[:, 0], self.prior_box[:, 1]
        return lo + (hi - lo) * rng.random(self.d_u)

    def generate_data(
        self,
        theta_true: np.ndarray,
        rng: np.random.Generator,
        l_data: int = 10,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Synthetic daily proportions at level ``l_data``; returns (y, u_true).

        ``log y_i = log G_i(u_true) - Gamma_i`` with Gamma_i >= 0, so the
        truth is admissible at l_data by construction.
        """
        theta_true = self.validate_theta(theta_true)
        u_true = self.sample_prior(rng)
        g = self.daily_infections(u_true, l_data)
        margins = rng.gamma(shape=theta_true[0], scale=theta_true[1], size=self.n_obs)
        return g * np.exp(-margins), u_true
