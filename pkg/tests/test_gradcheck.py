import numpy as np

from hrsglab.gradcheck import check_params, dense_suite, lstm_suite
from hrsglab.nn import dense_backward


def corrupted_backward(net, tape, upstream, accumulate=True):
    grads, dx = dense_backward(net, tape, upstream, accumulate)
    grads[2] = grads[2] * 1.001  # second layer's weights
    return grads, dx


def test_dense_suite_passes():
    assert all(r.ok for r in dense_suite(0))


def test_corrupted_backward_is_caught_and_named():
    results = dense_suite(0, backward=corrupted_backward)
    bad = [r for r in results if not r.ok]
    assert [r.param for r in bad] == ["W1"]
    assert "FAIL" in bad[0].line() and "W1" in bad[0].line()


def test_reports_are_reproducible():
    a = [r.line() for r in lstm_suite(batch=1, steps=2)]
    b = [r.line() for r in lstm_suite(batch=1, steps=2)]
    assert a == b


def test_lstm_suite_without_dropout():
    assert all(r.ok for r in lstm_suite(batch=2, steps=3, with_dropout=False))


def test_check_params_restores_parameters():
    p = np.array([1.0, 2.0])
    keep = p.copy()
    res = check_params("q", ["p"], [p], [2 * p], lambda: float((p * p).sum()))
    assert res[0].ok and np.array_equal(p, keep)
