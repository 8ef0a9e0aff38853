"""Command-line entry points.

Every subcommand reads one plain-text config (see :mod:`umsa.config`), a
master seed, and an output directory:

    umsa generate-data       --config cfg --seed 1 --out dir
    umsa oracle              --config cfg --seed 1 --out dir
    umsa forward-convergence --config cfg --seed 1 --out dir
    umsa estimate            --config cfg --seed 1 --out dir
    umsa sweep               --config cfg --seed 1 --out dir
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import build_model, build_umsa_config, load_config
from .estimator import averaged_estimate, write_records_csv
from .harness import (
    ExperimentPlan,
    forward_convergence_table,
    oracle_theta_star_elliptic,
    read_data_csv,
    run_sweep,
    sir_reference_estimate,
    write_convergence_csv,
    write_data_csv,
    write_sweep_csv,
)
from .laws import SeedPlan, iterations
from .msa import MsaConfig


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the config file")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", default=".", help="output directory")


def _load(args) -> tuple[dict, Path]:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def _model_with_data(cfg: dict):
    if "data" not in cfg:
        raise SystemExit("config must set data = <csv path> for this command")
    y = read_data_csv(cfg["data"], cfg["model"])
    return build_model(cfg, y=y)


def cmd_generate_data(args) -> int:
    cfg, out = _load(args)
    model = build_model(cfg)
    rng = SeedPlan(master_seed=args.seed).streams(1)[0]
    y, u_true = model.generate_data(
        np.asarray(cfg["theta_true"], dtype=float), rng, l_data=cfg["l_data"]
    )
    path = out / "data.csv"
    write_data_csv(path, model, y)
    print(f"wrote {path} ({y.size} observations, l_data={cfg['l_data']})")
    print(f"latent truth: {np.array2string(u_true, precision=6)}")
    return 0


def cmd_oracle(args) -> int:
    cfg, out = _load(args)
    model = _model_with_data(cfg)
    if cfg["model"] == "elliptic":
        level = cfg.get("oracle_level", cfg["l_max"])
        path = out / "oracle.txt"
        with open(path, "w") as fh:
            for lvl in (level, "exact"):
                res = oracle_theta_star_elliptic(model, lvl)
                fh.write(
                    f"level={lvl} theta={res.theta:.17g} at_boundary={int(res.at_boundary)}\n"
                )
                print(f"theta*({lvl}) = {res.theta:.12g}"
                      + (" [at boundary]" if res.at_boundary else ""))
        print(f"wrote {path}")
        return 0
    msa_cfg = MsaConfig(
        level=cfg.get("reference_level", cfg["l_max"]),
        n_steps=cfg.get("reference_steps", iterations(20)),
        schedule=build_umsa_config(cfg, model).schedule,
        theta0=np.asarray(cfg["theta0"], dtype=float),
        pcn=build_umsa_config(cfg, model).pcn,
        omega=cfg["omega"],
        prior_retry_cap=cfg["prior_retry_cap"],
    )
    theta_ref = sir_reference_estimate(model, msa_cfg, seed=args.seed)
    path = out / "reference_theta.txt"
    path.write_text(",".join(f"{v:.17g}" for v in theta_ref) + "\n")
    print(f"reference theta = {np.array2string(theta_ref, precision=8)}")
    print(f"wrote {path}")
    return 0


def cmd_forward_convergence(args) -> int:
    cfg, out = _load(args)
    if cfg["model"] != "elliptic":
        raise SystemExit("forward-convergence is defined for the elliptic model")
    model = build_model(cfg)
    levels = cfg.get("convergence_levels", list(range(3, cfg["l_max"] + 1)))
    rows = forward_convergence_table(model, levels)
    path = out / "convergence.csv"
    write_convergence_csv(path, rows)
    print(f"wrote {path} ({len(rows)} levels)")
    return 0


def cmd_estimate(args) -> int:
    cfg, out = _load(args)
    model = _model_with_data(cfg)
    config = build_umsa_config(cfg, model)
    mean, records = averaged_estimate(config, cfg["M"], master_seed=args.seed)
    path = out / "records.csv"
    write_records_csv(path, records)
    total_cost = sum(rec.cost for rec in records)
    print(f"estimate over M={cfg['M']} replicates: {np.array2string(mean, precision=8)}")
    print(f"total cost: {total_cost:.6g} units")
    print(f"wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    cfg, out = _load(args)
    model = _model_with_data(cfg)
    config = build_umsa_config(cfg, model)
    if "m_grid" not in cfg:
        raise SystemExit("config must set m_grid = M1,M2,... for sweep")
    if "theta_ref" in cfg:
        theta_ref = np.asarray(cfg["theta_ref"], dtype=float)
    elif cfg["model"] == "elliptic":
        theta_ref = np.array([oracle_theta_star_elliptic(model, cfg["l_max"]).theta])
    else:
        raise SystemExit("sir sweeps need theta_ref = ... (see the oracle command)")
    plan = ExperimentPlan(
        config=config,
        m_grid=cfg["m_grid"],
        repetitions=cfg["repetitions"],
        theta_ref=theta_ref,
        master_seed=args.seed,
    )
    rows = run_sweep(plan)
    path = out / "sweep.csv"
    write_sweep_csv(path, rows)
    for row in rows:
        print(f"M={row.m:6d}  cost={row.cost:.6g}  mse={np.array2string(row.mse, precision=6)}")
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="umsa",
        description="Unbiased parameter estimation for Bayesian inverse problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "generate-data": cmd_generate_data,
        "oracle": cmd_oracle,
        "forward-convergence": cmd_forward_convergence,
        "estimate": cmd_estimate,
        "sweep": cmd_sweep,
    }
    for name in commands:
        _add_common(sub.add_parser(name))
    args = parser.parse_args(argv)
    return commands[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
