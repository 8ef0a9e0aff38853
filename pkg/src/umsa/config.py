"""Plain-text configuration: one ``key = value`` per line.

Lines starting with ``#`` (or blank) are skipped; values are typed per the
key schema below.  Vector values are comma-separated.  These keys drive the
command-line tools; library users can also build the objects directly.

Keys
----
model                elliptic | sir
l_min, l_max         level-law support (ints)
rho_zeta             level-law decay exponent, pmf(l) ~ 2**(-l * rho_zeta)
p_max                iteration-law truncation (int)
phi0, n0, exponent   step sizes phi_n = phi0 / (n + n0)**exponent
rho_pcn              proposal correlation in (-1, 1)
sigma_scale          proposal factor scale: sigma = sigma_scale * I for the
                     elliptic model, sigma_scale * diag(prior box widths)
                     for the epidemic model
coupling             synchronous | reflection
init                 chain start: prior | least-squares (elliptic only)
omega                per-step cost exponent, a level-l step costs 2**(l*omega)
theta0               starting iterate (comma vector)
theta_min, theta_max admissible box bounds, applied per coordinate
M                    replicates per averaged estimate (int)
repetitions          independent repetitions per sweep cell (int)
m_grid               replicate grid for sweeps (comma ints)
data                 path to the observation CSV
theta_true           data-generating parameters (comma vector)
l_data               data-generation level (int)
theta_ref            pinned reference for MSE (comma vector; required for
                     sir sweeps, elliptic defaults to the level-l_max oracle)
j_obs                elliptic observation count (int)
sir_a, sir_b         epidemic transmission / recovery rates
n_pop                population size
n_offset             days from t = 0 to the first observed day (int)
n_obs                observed day count (int)
prior_retry_cap      admissible-start retry budget (int)
oracle_level         level for the elliptic oracle (int, default l_max)
reference_level      level for the sir long-run reference (int, default l_max)
reference_steps      iteration count for the sir reference (int)
convergence_levels   levels for the forward-convergence table (comma ints)
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .estimator import UmsaConfig
from .kernels import PcnParams
from .laws import IterationLaw, LevelLaw, StepSchedule
from .models import EllipticModel, Model, SirModel

__all__ = ["parse_config", "load_config", "build_model", "build_umsa_config"]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",")]


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",")]


_SCHEMA = {
    "model": str,
    "l_min": int,
    "l_max": int,
    "rho_zeta": float,
    "p_max": int,
    "phi0": float,
    "n0": float,
    "exponent": float,
    "rho_pcn": float,
    "sigma_scale": float,
    "coupling": str,
    "init": str,
    "omega": float,
    "theta0": _float_list,
    "theta_min": float,
    "theta_max": float,
    "M": int,
    "repetitions": int,
    "m_grid": _int_list,
    "data": str,
    "theta_true": _float_list,
    "l_data": int,
    "theta_ref": _float_list,
    "j_obs": int,
    "sir_a": float,
    "sir_b": float,
    "n_pop": float,
    "n_offset": int,
    "n_obs": int,
    "prior_retry_cap": int,
    "oracle_level": int,
    "reference_level": int,
    "reference_steps": int,
    "convergence_levels": _int_list,
}

_COMMON_DEFAULTS = {
    "rho_zeta": 0.5,
    "p_max": 12,
    "n0": 0.0,
    "exponent": 1.0,
    "omega": 1.0,
    "M": 16,
    "repetitions": 50,
    "prior_retry_cap": 100,
}

_MODEL_DEFAULTS = {
    "elliptic": {
        "l_min": 2,
        "l_max": 9,
        "phi0": 1500.0,
        "n0": 2000.0,
        "rho_pcn": 0.999,
        "sigma_scale": 1.0,
        "coupling": "synchronous",
        "init": "prior",
        "theta0": [50.0],
        "theta_min": 1.0,
        "theta_max": 1e4,
        "theta_true": [100.0],
        "l_data": 12,
    },
    "sir": {
        "l_min": 3,
        "l_max": 7,
        "phi0": 0.01,
        "n0": 100.0,
        "rho_pcn": 0.999,
        "sigma_scale": 0.1,
        "coupling": "reflection",
        "init": "prior",
        "theta0": [1.0, 1.0],
        "theta_min": 0.05,
        "theta_max": 50.0,
        "theta_true": [2.0, 0.1],
        "l_data": 10,
        "repetitions": 100,
    },
}


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines into a typed dict (no defaults applied)."""
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SCHEMA:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        try:
            cfg[key] = _SCHEMA[key](value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    return cfg


def load_config(path: str | Path) -> dict:
    """Read a config file and fill in model-specific defaults."""
    cfg = parse_config(Path(path).read_text())
    return apply_defaults(cfg)


def apply_defaults(cfg: dict) -> dict:
    model_name = cfg.get("model")
    if model_name not in _MODEL_DEFAULTS:
        raise ValueError(f"config must set model = elliptic | sir, got {model_name!r}")
    merged = dict(_COMMON_DEFAULTS)
    merged.update(_MODEL_DEFAULTS[model_name])
    merged.update(cfg)
    return merged


def build_model(cfg: dict, y: np.ndarray | None = None) -> Model:
    box = (cfg["theta_min"], cfg["theta_max"])
    if cfg["model"] == "elliptic":
        return EllipticModel(y=y, j_obs=cfg.get("j_obs", 50), theta_box=box)
    kwargs = {}
    for key, name in (
        ("sir_a", "a"),
        ("sir_b", "b"),
        ("n_pop", "n_pop"),
        ("n_offset", "n_offset"),
        ("n_obs", "n_obs"),
    ):
        if key in cfg:
            kwargs[name] = cfg[key]
    return SirModel(y=y, theta_box=box, **kwargs)


def model_delta0(model: Model) -> float:
    if isinstance(model, EllipticModel):
        return model.domain_length
    if isinstance(model, SirModel):
        return model.delta0
    return 1.0


def build_pcn(cfg: dict, model: Model) -> PcnParams:
    """Proposal parameters; the epidemic factor tracks the prior box widths
    (an isotropic factor would overshoot the narrow coordinates)."""
    if isinstance(model, SirModel):
        widths = model.prior_box[:, 1] - model.prior_box[:, 0]
        return PcnParams(rho=cfg["rho_pcn"], sigma=cfg["sigma_scale"] * np.diag(widths))
    return PcnParams.isotropic(cfg["rho_pcn"], cfg["sigma_scale"], model.d_u)


def build_init_u(cfg: dict, model: Model) -> np.ndarray | None:
    init = cfg.get("init", "prior")
    if init == "prior":
        return None
    if init == "least-squares":
        if not isinstance(model, EllipticModel):
            raise ValueError("init = least-squares is elliptic-only")
        return model.least_squares_latent("exact")
    raise ValueError(f"init must be prior | least-squares, got {init!r}")


def build_umsa_config(cfg: dict, model: Model) -> UmsaConfig:
    return UmsaConfig(
        model=model,
        level_law=LevelLaw(
            l_min=cfg["l_min"],
            l_max=cfg["l_max"],
            rho_zeta=cfg["rho_zeta"],
            delta0=model_delta0(model),
        ),
        iteration_law=IterationLaw(p_max=cfg["p_max"]),
        schedule=StepSchedule(phi0=cfg["phi0"], n0=cfg["n0"], exponent=cfg["exponent"]),
        theta0=np.asarray(cfg["theta0"], dtype=float),
        pcn=build_pcn(cfg, model),
        coupling=cfg["coupling"],
        omega=cfg["omega"],
        prior_retry_cap=cfg["prior_retry_cap"],
        init_u=build_init_u(cfg, model),
    )
