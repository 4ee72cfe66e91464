import numpy as np
import pytest

from krylow.errors import ValidationError
from krylow.harness.verify import (
    CheckResult,
    cor_dominance,
    monte_carlo_E_omega,
    run_verification,
    tail_quantile,
)


@pytest.fixture(scope="module")
def fast():
    return run_verification("fast", seed=0)


def test_fast_suite_passes(fast):
    failed = [c.name for c in fast.checks if not c.passed]
    assert not failed
    assert fast.seconds < 60
    assert all(c.slack >= 0 for c in fast.checks)
    names = {c.name for c in fast.checks}
    assert {"lanczos.krylov_nesting", "bounds.structural", "lowrank.robustness_inequality"} <= names


def test_report_dict(fast):
    d = fast.to_dict()
    assert d["passed"] and d["suite"] == "fast" and len(d["checks"]) == len(fast.checks)


def test_negative_control_deflation_tolerance():
    rep = run_verification("fast", seed=0, defl_tol=1e-2)
    bad = {c.name: c for c in rep.checks if not c.passed}
    assert "lanczos.krylov_nesting" in bad
    assert bad["lanczos.krylov_nesting"].measured > 1e-3


def test_unknown_suite():
    with pytest.raises(ValidationError):
        run_verification("medium")


def test_check_result_slack():
    assert CheckResult("x", True, 1.0, 3.0).slack == 2.0


def test_monte_carlo_pieces():
    rng = np.random.default_rng(1)
    mean, bound, _ = monte_carlo_E_omega(rng)
    assert mean <= bound
    for delta in (0.1, 0.5):
        q, b = tail_quantile(rng, delta)
        assert q <= b
    worst, count = cor_dominance()
    assert count > 0 and worst <= 1e-12
