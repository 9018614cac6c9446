import numpy as np
import pytest

from ncelm.checks import (
    finite_diff_gradient,
    run_equiv_check,
    run_gradcheck,
)
from ncelm.model import init_params


def test_finite_diff_restores_parameters():
    p = init_params(3, 2, seed=0)
    before = p.target_emb.copy()
    finite_diff_gradient(lambda q: float(q.target_emb.sum()), p)
    assert np.array_equal(p.target_emb, before)


def test_finite_diff_on_linear_function_is_exact():
    p = init_params(3, 2, seed=1)
    g = finite_diff_gradient(lambda q: 2.0 * float(q.bias.sum()), p)
    assert np.allclose(g.bias, 2.0, atol=1e-9)
    assert np.allclose(g.target_emb, 0.0, atol=1e-9)


def test_gradcheck_single_suite_and_unknown():
    res = run_gradcheck(which="ns", seed=3)
    assert res.ok
    assert any("ns" in line for line in res.lines)
    with pytest.raises(ValueError):
        run_gradcheck(which="sgd")


def test_gradcheck_corrupt_negative_control():
    res = run_gradcheck(which="mle", seed=0, corrupt=True)
    assert not res.ok
    assert "FAIL" in res.report()


def test_equiv_check_negative_control_and_validation():
    assert run_equiv_check(vocab_size=8, seed=1).ok
    assert not run_equiv_check(vocab_size=8, seed=1, force_k=7).ok
    with pytest.raises(ValueError):
        run_equiv_check(vocab_size=1)
