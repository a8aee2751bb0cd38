import csv
import json

import numpy as np
import pytest

from verolift.bench import CSV_HEADER
from verolift.cli import main
from verolift.measure import MeasurementSet, gaussian_design

SMALL = {"variant": "real", "n": 4, "N": 16, "sparsity": [1, 2], "trials": 3, "seed": 5}


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_solve_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    x0 = np.array([0.0, 2.0, 0.0, 0.0])
    MeasurementSet.generate("real", gaussian_design(4, 12, False, rng), x0).save(tmp_path / "m.json")
    assert main(["solve", "--input", str(tmp_path / "m.json"), "--out", str(tmp_path / "o.json")]) == 0
    out = json.loads((tmp_path / "o.json").read_text())
    assert out["record"]["exact_success"]
    assert np.allclose(np.abs(out["x_hat"]), np.abs(x0), atol=1e-6)


def test_solve_infeasible_exit_code(tmp_path):
    MeasurementSet("real", np.array([[1.0], [1.0]]), np.array([1.0, 5.0])).save(tmp_path / "m.json")
    assert main(["solve", "--input", str(tmp_path / "m.json"), "--out", str(tmp_path / "o.json")]) == 3
    assert (tmp_path / "o.json").exists()


def test_solve_missing_input(tmp_path):
    assert main(["solve", "--input", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.json")]) == 2


def test_bench_writes_csv_and_svg(tmp_path):
    cfg = _write(tmp_path / "c.json", SMALL)
    code = main(["bench", "exact", "--config", cfg, "--csv", str(tmp_path / "r.csv"), "--svg", str(tmp_path / "r.svg")])
    assert code == 0
    rows = list(csv.reader((tmp_path / "r.csv").open()))
    assert rows[0] == CSV_HEADER
    assert [r[0] for r in rows[1:]] == ["1", "2"]
    assert all(0 <= float(r[2]) <= 1 for r in rows[1:])
    svg = (tmp_path / "r.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 3


def test_bench_is_deterministic_and_seed_sensitive(tmp_path):
    cfg = _write(tmp_path / "c.json", SMALL)
    outs = []
    for i, seed in enumerate(["5", "5", "6"]):
        path = tmp_path / f"r{i}.csv"
        assert main(["bench", "exact", "--config", cfg, "--seed", seed, "--csv", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("doc, mode", [
    ({**SMALL, "colour": "red"}, "exact"),
    ({**SMALL, "eps": 0.1}, "exact"),
    (SMALL, "noise"),
    (SMALL, "fourier"),
    ({**SMALL, "sparsity": [2, 1]}, "exact"),
    ({**SMALL, "variant": "fourier", "N": 7}, "fourier"),
])
def test_bench_config_errors(tmp_path, doc, mode):
    cfg = _write(tmp_path / "c.json", doc)
    assert main(["bench", mode, "--config", cfg, "--csv", str(tmp_path / "r.csv")]) == 2


def test_bench_needs_output_path(tmp_path):
    cfg = _write(tmp_path / "c.json", SMALL)
    assert main(["bench", "exact", "--config", cfg]) == 2


def test_unknown_mode_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["bench", "sideways"])
