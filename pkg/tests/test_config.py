import json

import pytest

from krylow.errors import ValidationError
from krylow.harness.config import config_from_dict, parse_config


def minimal():
    return {
        "operator": {"kind": "synthetic", "spectrum": {"family": "inverse_square_log", "n": 2000}},
        "function": {"kind": "log"},
        "k": 50,
        "ell": 50,
        "budget_schedule": {"s_equals_r": [2, 12]},
    }


def test_minimal_parses_with_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(minimal()))
    cfg = parse_config(path)
    assert cfg.trials == 10 and cfg.dense_cap == 12000 and cfg.workers == 1
    assert cfg.schedule() == [(s, s) for s in range(2, 13)]
    assert cfg.scalar_function().kind == "log"


def test_missing_k_named():
    d = minimal()
    del d["k"]
    with pytest.raises(ValidationError, match=r"\bk\b"):
        config_from_dict(d)


def test_ell_below_k_with_block_method():
    d = minimal() | {"ell": 10, "methods": ["rand_svd_matfun"]}
    with pytest.raises(ValidationError, match="rand_svd_matfun"):
        config_from_dict(d)
    assert config_from_dict(minimal() | {"ell": 10, "methods": ["krylov_aware"]}).ell == 10


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError, match="colour"):
        config_from_dict(minimal() | {"colour": "red"})
    d = minimal()
    d["operator"]["spectrum"]["extra"] = 1
    with pytest.raises(ValidationError, match="operator"):
        config_from_dict(d)


@pytest.mark.parametrize("patch", [
    {"budget_schedule": [[0, 1]]},
    {"budget_schedule": [[2, 0]], "methods": ["rand_svd_matfun"]},
    {"methods": ["krylov_aware", "krylov_aware"]},
    {"methods": ["bogus"]},
    {"bounds": [{"kind": "thm35_tail"}]},
    {"bounds": [{"kind": "thm51", "delta": 1.5}]},
    {"trials": 0},
    {"seed": -1},
])
def test_invalid(patch):
    with pytest.raises(ValidationError):
        config_from_dict(minimal() | patch)


def test_bad_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError, match="line 1"):
        parse_config(path)
    with pytest.raises(ValidationError):
        parse_config(tmp_path / "missing.json")
    with pytest.raises(ValidationError):
        config_from_dict([1, 2])


def test_operator_variants():
    for op in ({"kind": "laplacian2d", "grid": 10, "lambda": 0.5},
               {"kind": "spin_chain", "N": 4, "h": 10},
               {"kind": "synthetic", "spectrum": {"family": "explicit", "values": [1, 2, 3]}},
               {"kind": "matrix_market", "path": "x.mtx"}):
        assert config_from_dict(minimal() | {"operator": op}).operator.kind == op["kind"]
    cfg = config_from_dict(minimal() | {"operator": {"kind": "laplacian2d", "grid": 10, "lambda": 0.5}})
    assert cfg.operator.lam == 0.5


@pytest.mark.parametrize("name", ["integrator_grid40", "integrator_grid100", "spin_chain_n10", "synthetic_log",
                                  "estrada_roget", "estrada_fixture", "exp_decay_bounds"])
def test_shipped_configs_parse(name, request):
    root = request.config.rootpath
    parse_config(root / "configs" / f"{name}.json")
