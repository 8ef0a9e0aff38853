"""Scikit-learn style front end.

``UmsaEstimator`` wraps the whole pipeline behind the usual estimator
surface: hyperparameters in ``__init__`` (so ``get_params`` / ``set_params``
/ ``clone`` work), data in ``fit``, results in trailing-underscore
attributes.  The observations are the data vector of the chosen built-in
inverse-problem model.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .config import apply_defaults, build_model, build_umsa_config
from .estimator import averaged_estimate

__all__ = ["UmsaEstimator"]

_CONFIG_KEYS = (
    "l_min",
    "l_max",
    "rho_zeta",
    "p_max",
    "phi0",
    "n0",
    "exponent",
    "rho_pcn",
    "sigma_scale",
    "coupling",
    "omega",
    "theta0",
    "theta_min",
    "theta_max",
    "prior_retry_cap",
)


class UmsaEstimator(BaseEstimator):
    """Unbiased estimator of a model's likelihood parameters.

    ``fit(y)`` ingests the observation vector of the selected model
    ("elliptic": noise precision; "sir": gamma reporting shape and scale),
    averages ``m_replicates`` independent single-term estimates, and exposes
    the result as ``theta_`` with the per-replicate ``records_`` and total
    ``cost_``.  Any hyperparameter left to None takes the model's default.

    Examples
    --------
    >>> est = UmsaEstimator(model="elliptic", m_replicates=8, random_state=3)
    >>> est.fit(y).theta_  # doctest: +SKIP
    array([...])
    """

    def __init__(
        self,
        model: str = "elliptic",
        l_min: int | None = None,
        l_max: int | None = None,
        rho_zeta: float | None = None,
        p_max: int | None = None,
        phi0: float | None = None,
        n0: float | None = None,
        exponent: float | None = None,
        rho_pcn: float | None = None,
        sigma_scale: float | None = None,
        coupling: str | None = None,
        omega: float | None = None,
        theta0=None,
        theta_min: float | None = None,
        theta_max: float | None = None,
        prior_retry_cap: int | None = None,
        m_replicates: int = 16,
        random_state: int | None = 0,
        n_jobs: int = 1,
    ):
        self.model = model
        self.l_min = l_min
        self.l_max = l_max
        self.rho_zeta = rho_zeta
        self.p_max = p_max
        self.phi0 = phi0
        self.n0 = n0
        self.exponent = exponent
        self.rho_pcn = rho_pcn
        self.sigma_scale = sigma_scale
        self.coupling = coupling
        self.omega = omega
        self.theta0 = theta0
        self.theta_min = theta_min
        self.theta_max = theta_max
        self.prior_retry_cap = prior_retry_cap
        self.m_replicates = m_replicates
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config_dict(self) -> dict:
        cfg: dict = {"model": self.model}
        for key in _CONFIG_KEYS:
            value = getattr(self, key)
            if value is not None:
                cfg[key] = list(value) if key == "theta0" else value
        return apply_defaults(cfg)

    def fit(self, y, X=None):
        """Estimate the parameters from the observation vector y."""
        y = check_array(y, ensure_2d=False, dtype=np.float64)
        if y.ndim != 1:
            raise ValueError(f"y must be a 1-d observation vector, got shape {y.shape}")
        cfg = self._config_dict()
        model = build_model(cfg, y=y)
        config = build_umsa_config(cfg, model)
        if self.random_state is None:
            master_seed = int(np.random.SeedSequence().generate_state(1)[0])
        else:
            master_seed = int(self.random_state)
        theta, records = averaged_estimate(
            config, self.m_replicates, master_seed, n_jobs=self.n_jobs
        )
        self.model_ = model
        self.config_ = config
        self.theta_ = theta
        self.records_ = records
        self.cost_ = float(sum(rec.cost for rec in records))
        return self

    def total_cost(self) -> float:
        check_is_fitted(self, "cost_")
        return self.cost_
