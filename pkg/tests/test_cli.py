import json

import numpy as np
import pytest

from krylow.harness.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, EXIT_VERIFY, graph_adjacency, main
from krylow.errors import ValidationError
from krylow.matrix_market import read_matrix_market


def write_cfg(path, **kw):
    d = {"operator": {"kind": "laplacian2d", "grid": 5}, "function": {"kind": "exp_scaled", "t": 1.0},
         "k": 2, "ell": 3, "budget_schedule": [[2, 1]], "trials": 2, "methods": ["krylov_aware"]}
    d.update(kw)
    path.write_text(json.dumps(d))
    return str(path)


def test_run_and_plot(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o"), "--workers", "2"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["failed"] == 0
    assert main(["plot-data", "--results", str(tmp_path / "o" / "results.csv"), "--out", str(tmp_path / "o")]) \
        == EXIT_OK
    assert (tmp_path / "o" / "plotdata.csv").exists()


def test_bounds_command(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", ell=5, bounds=[{"kind": "thm35_expectation"}])
    assert main(["bounds", "--config", cfg, "--out", str(tmp_path / "b")]) == EXIT_OK
    assert (tmp_path / "b" / "bounds.csv").read_text().startswith("bound_name,")
    assert main(["bounds", "--config", write_cfg(tmp_path / "d.json"), "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_validation_exit(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", k="two")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert "k" in capsys.readouterr().err


def test_numerical_exit(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", dense_cap=5)
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == EXIT_NUMERICAL


def test_verify_exit_codes(tmp_path, capsys):
    report = tmp_path / "rep.json"
    assert main(["verify", "--suite", "fast", "--report", str(report)]) == EXIT_OK
    data = json.loads(report.read_text())
    assert data["passed"] and all(c["slack"] >= 0 for c in data["checks"])
    assert main(["verify", "--defl-tol", "1e-2"]) == EXIT_VERIFY
    assert "FAIL lanczos.krylov_nesting" in capsys.readouterr().out


def test_gen_matrix(tmp_path):
    out = tmp_path / "g" / "p.mtx"
    assert main(["gen-matrix", "--kind", "path:5", "--out", str(out)]) == EXIT_OK
    A = read_matrix_market(str(out)).toarray()
    np.testing.assert_array_equal(A, np.eye(5, k=1) + np.eye(5, k=-1))
    assert main(["gen-matrix", "--kind", "blob:3", "--out", str(out)]) == EXIT_VALIDATION


@pytest.mark.parametrize("kind,edges", [("path:10", 9), ("cycle:10", 10), ("cycle:2", 1)])
def test_graphs(kind, edges):
    A = graph_adjacency(kind)
    assert A.nnz == 2 * edges and (A != A.T).nnz == 0


def test_random_graph_seeded():
    a, b = graph_adjacency("random:40,0.2,7"), graph_adjacency("random:40,0.2,7")
    assert (a != b).nnz == 0 and a.diagonal().sum() == 0
    assert graph_adjacency("random:40,0.0").nnz == 0
    for bad in ("random:40", "random:40,2", "path:1", "path:x"):
        with pytest.raises(ValidationError):
            graph_adjacency(bad)
