import numpy as np
import pytest

from umsa.cli import main
from umsa.estimator import read_records_csv
from umsa.harness import read_data_csv


def _write(path, text):
    path.write_text("\n".join(line.strip() for line in text.strip().splitlines()) + "\n")
    return str(path)


@pytest.fixture()
def elliptic_cfg(tmp_path):
    cfg = tmp_path / "elliptic.cfg"
    data = tmp_path / "data.csv"
    _write(
        cfg,
        f"""
        model = elliptic
        l_min = 2
        l_max = 4
        p_max = 3
        phi0 = 1000
        n0 = 50
        rho_pcn = 0.99
        sigma_scale = 0.3
        theta0 = 100
        init = least-squares
        M = 4
        repetitions = 2
        m_grid = 2, 4
        l_data = 8
        data = {data}
        """,
    )
    return cfg, data, tmp_path


def test_generate_data_estimate_sweep_cycle(elliptic_cfg, capsys):
    cfg, data, out = elliptic_cfg
    assert main(["generate-data", "--config", str(cfg), "--seed", "1", "--out", str(out)]) == 0
    generated = out / "data.csv"
    assert generated.exists()
    y = read_data_csv(generated, "elliptic")
    assert y.shape == (50,)
    # the estimate command reads the data path from the config
    generated.rename(data)

    assert main(["estimate", "--config", str(cfg), "--seed", "2", "--out", str(out)]) == 0
    records = read_records_csv(out / "records.csv")
    assert len(records) == 4

    assert main(["sweep", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "M,cost,seconds_mean,mse_1"
    assert len(lines) == 3

    assert main(["oracle", "--config", str(cfg), "--seed", "4", "--out", str(out)]) == 0
    text = (out / "oracle.txt").read_text()
    assert "level=4" in text and "level=exact" in text

    assert main(["forward-convergence", "--config", str(cfg), "--seed", "5", "--out", str(out)]) == 0
    conv = (out / "convergence.csv").read_text().splitlines()
    assert conv[0] == "l,diff_sq"
    assert len(conv) == 3  # levels 3..4

    out_text = capsys.readouterr().out
    assert "estimate over M=4" in out_text


def test_sir_generate_and_estimate(tmp_path):
    cfg = tmp_path / "sir.cfg"
    data = tmp_path / "data.csv"
    _write(
        cfg,
        f"""
        model = sir
        l_min = 3
        l_max = 4
        p_max = 2
        M = 2
        theta0 = 2, 0.1
        l_data = 6
        data = {data}
        """,
    )
    assert main(["generate-data", "--config", str(cfg), "--seed", "7", "--out", str(tmp_path)]) == 0
    y = read_data_csv(tmp_path / "data.csv", "sir")
    assert y.shape == (40,)
    assert main(["estimate", "--config", str(cfg), "--seed", "8", "--out", str(tmp_path)]) == 0
    records = read_records_csv(tmp_path / "records.csv")
    assert len(records) == 2
    assert all(rec.estimate.shape == (2,) for rec in records)


def test_sir_reference_oracle(tmp_path):
    cfg = tmp_path / "sir.cfg"
    data = tmp_path / "data.csv"
    _write(
        cfg,
        f"""
        model = sir
        l_data = 6
        reference_level = 3
        reference_steps = 64
        data = {data}
        """,
    )
    main(["generate-data", "--config", str(cfg), "--seed", "7", "--out", str(tmp_path)])
    assert main(["oracle", "--config", str(cfg), "--seed", "9", "--out", str(tmp_path)]) == 0
    ref = np.array(
        [float(v) for v in (tmp_path / "reference_theta.txt").read_text().split(",")]
    )
    assert ref.shape == (2,)


def test_missing_data_key_fails(tmp_path):
    cfg = tmp_path / "elliptic.cfg"
    _write(cfg, "model = elliptic")
    with pytest.raises(SystemExit, match="data"):
        main(["estimate", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path)])
