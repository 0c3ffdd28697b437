import numpy as np
import pytest
from hypothesis import given, strategies as st

from hrsglab.nn import (MLP, AdamState, LstmCell, ShapeError, StaleTapeError, adam_step,
                        dense_backward, dense_forward, gd_step, init_lstm, init_mlp,
                        load_arrays, lstm_backward, lstm_forward, save_arrays)

from oracles import fd_grads, scalar_lstm, scalar_mlp


def close(a, b, rtol=1e-6, atol=1e-8):
    return np.all(np.abs(a - b) <= np.maximum(rtol * np.maximum(np.abs(a), np.abs(b)), atol))


# ---------------------------------------------------------------- dense

def test_zero_network_outputs_zero():
    net = init_mlp((3, 4, 2), np.random.default_rng(0))
    net.set_params([np.zeros_like(p) for p in net.params])
    out, _ = dense_forward(net, [0.3, -2.0, 7.0])
    assert np.array_equal(out, np.zeros(2))


def test_single_affine_layer():
    net = MLP([np.array([[2.0]]), np.array([1.0])], ["linear"])
    out, _ = dense_forward(net, [3.0])
    assert out.tolist() == [7.0]


def test_forward_matches_scalar_oracle():
    net = init_mlp((3, 5, 4, 2), np.random.default_rng(7))
    out, _ = dense_forward(net, [0.1, -0.2, 0.3])
    assert np.allclose(out, scalar_mlp(net, [0.1, -0.2, 0.3]), rtol=0, atol=1e-14)


def test_zero_upstream_gives_zero_gradients():
    net = init_mlp((3, 5, 2), np.random.default_rng(1))
    out, tape = dense_forward(net, [0.4, 0.1, -0.3])
    grads, dx = dense_backward(net, tape, np.zeros(2))
    assert all(not g.any() for g in grads) and not dx.any()


def test_tanh_slope_at_origin():
    net = MLP([np.array([[0.0]]), np.array([0.0])], ["tanh"])
    out, tape = dense_forward(net, [1.0])
    grads, _ = dense_backward(net, tape, np.ones(1), accumulate=False)
    assert grads[0][0, 0] == 1.0


def test_dense_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    net = init_mlp((3, 6, 4, 2), rng)
    x, w = rng.normal(size=(5, 3)), rng.normal(size=(5, 2))

    def loss():
        return float((dense_forward(net, x)[0] * w).sum())

    _, tape = dense_forward(net, x)
    grads, _ = dense_backward(net, tape, w, accumulate=False)
    for a, b in zip(grads, fd_grads(loss, net.params)):
        assert close(a, b)


def test_input_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    net = init_mlp((3, 6, 2), rng)
    x = rng.normal(size=3)
    _, tape = dense_forward(net, x)
    _, dx = dense_backward(net, tape, np.array([1.0, -2.0]), accumulate=False)
    loss = lambda: float(dense_forward(net, x)[0] @ np.array([1.0, -2.0]))
    assert close(dx, fd_grads(loss, [x])[0])


def test_stale_tape_and_shape_errors():
    net = init_mlp((2, 3, 1), np.random.default_rng(0))
    _, tape = dense_forward(net, [0.1, 0.2])
    net.set_params([p + 0.1 for p in net.params])
    with pytest.raises(StaleTapeError):
        dense_backward(net, tape, np.ones(1))
    with pytest.raises(ShapeError):
        dense_forward(net, [1.0, 2.0, 3.0])
    with pytest.raises(ShapeError):
        MLP([np.zeros((2, 3)), np.zeros(2)], ["tanh"])


def test_gradients_accumulate_until_zeroed():
    net = init_mlp((2, 3, 1), np.random.default_rng(0))
    _, tape = dense_forward(net, [0.1, 0.2])
    g1, _ = dense_backward(net, tape, np.ones(1))
    dense_backward(net, tape, np.ones(1))
    assert np.allclose(net.grads[0], 2 * g1[0])
    net.zero_grad()
    assert all(not g.any() for g in net.grads)


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), st.integers(0, 1000))
def test_tanh_layers_stay_in_open_interval(x, seed):
    net = init_mlp((3, 8, 1), np.random.default_rng(seed), scale=3.0)
    _, tape = dense_forward(net, x)
    assert np.all(np.abs(tape.outputs[0]) <= 1.0)


# ---------------------------------------------------------------- lstm

def test_zero_lstm_gives_zero_hidden():
    cell = init_lstm(3, 4, np.random.default_rng(0))
    cell.set_params([np.zeros_like(cell.W), np.zeros_like(cell.b)])
    h, _ = lstm_forward(cell, np.random.default_rng(1).normal(size=(6, 3)))
    assert np.array_equal(h, np.zeros(4))


def test_forget_one_input_zero_keeps_cell_state():
    H = 3
    cell = init_lstm(2, H, np.random.default_rng(0))
    W, b = np.zeros_like(cell.W), np.zeros_like(cell.b)
    b[:H], b[H:2 * H] = -1e3, 1e3  # input gate 0, forget gate 1
    cell.set_params([W, b])
    c0 = np.array([0.5, -1.0, 2.0])
    _, tape = lstm_forward(cell, np.random.default_rng(2).normal(size=(5, 2)), c0=c0)
    assert np.allclose(tape.cs[-1][0], c0, rtol=0, atol=1e-12)


def test_recurrence_matches_scalar_oracle():
    cell = init_lstm(3, 4, np.random.default_rng(5))
    seq = np.random.default_rng(6).normal(size=(3, 3))
    h, tape = lstm_forward(cell, seq)
    h_ref, c_ref = scalar_lstm(cell, seq)
    assert np.allclose(h, h_ref, atol=1e-14) and np.allclose(tape.cs[-1][0], c_ref, atol=1e-14)


def test_lstm_zero_upstream_gives_zero_gradients():
    cell = init_lstm(3, 4, np.random.default_rng(5))
    _, tape = lstm_forward(cell, np.ones((4, 3)))
    (dW, db), dxs = lstm_backward(cell, tape, np.zeros(4))
    assert not dW.any() and not db.any() and not dxs.any()


def test_one_step_window_is_single_cell_backward():
    rng = np.random.default_rng(8)
    cell = init_lstm(2, 3, rng)
    x = rng.normal(size=(1, 2))
    w = rng.normal(size=3)
    _, tape = lstm_forward(cell, x)
    (dW, db), _ = lstm_backward(cell, tape, w)
    # single step from zero state: h = o * tanh(i * g)
    z = x[0] @ cell.W[:2] + cell.b
    H = 3
    s = lambda v: 1 / (1 + np.exp(-v))
    i, g, o = s(z[:H]), np.tanh(z[2 * H:3 * H]), s(z[3 * H:])
    c = i * g
    dz = np.zeros(4 * H)
    dc = w * o * (1 - np.tanh(c) ** 2)
    dz[:H] = dc * g * i * (1 - i)
    dz[2 * H:3 * H] = dc * i * (1 - g ** 2)
    dz[3 * H:] = w * np.tanh(c) * o * (1 - o)
    assert np.allclose(db, dz, atol=1e-15)
    assert np.allclose(dW[:2], np.outer(x[0], dz), atol=1e-15)
    assert not dW[2:].any()


@pytest.mark.parametrize("per_step", [False, True])
def test_bptt_matches_finite_differences(per_step):
    rng = np.random.default_rng(9)
    cell = init_lstm(3, 4, rng)
    seq = rng.normal(size=(2, 2, 3))
    w = rng.normal(size=(2, 2, 4) if per_step else (2, 4))

    def loss():
        h, tape = lstm_forward(cell, seq)
        return float(((tape.hs[1:] if per_step else h) * w).sum())

    _, tape = lstm_forward(cell, seq)
    (dW, db), dxs = lstm_backward(cell, tape, w)
    fW, fb = fd_grads(loss, cell.params)
    assert close(dW, fW) and close(db, fb)
    assert close(dxs, fd_grads(loss, [seq])[0])


def test_lstm_errors():
    cell = init_lstm(3, 4, np.random.default_rng(0))
    with pytest.raises(ValueError):
        lstm_forward(cell, np.zeros((0, 3)))
    with pytest.raises(ShapeError):
        lstm_forward(cell, np.zeros((2, 5)))
    _, tape = lstm_forward(cell, np.zeros((2, 3)))
    cell.set_params([cell.W * 2, cell.b])
    with pytest.raises(StaleTapeError):
        lstm_backward(cell, tape, np.zeros(4))
    with pytest.raises(ShapeError):
        LstmCell(np.zeros((3, 6)), np.zeros(6))


# ---------------------------------------------------------------- optimizers

def test_adam_zero_gradient_leaves_parameters():
    p = [np.array([1.0, -2.0])]
    st0 = AdamState.for_params(p)
    new, st1 = adam_step(p, [np.zeros(2)], st0)
    assert np.array_equal(new[0], p[0]) and st1.step == 1


def test_adam_first_step_moves_by_learning_rate():
    p = [np.array([0.5])]
    new, _ = adam_step(p, [np.array([1.0])], AdamState.for_params(p, lr=1e-3))
    # m_hat = 1, v_hat = 1 -> step lr / (1 + eps)
    assert 0.5 - new[0][0] == pytest.approx(1e-3 / (1 + 1e-8), rel=1e-12)


def test_adam_is_deterministic_and_pure():
    p = [np.array([0.3, 0.1])]
    g = [np.array([0.2, -4.0])]
    s = AdamState.for_params(p)
    a, sa = adam_step(p, g, s)
    b, sb = adam_step(p, g, s)
    assert np.array_equal(a[0], b[0]) and sa.step == sb.step == 1
    assert p[0].tolist() == [0.3, 0.1] and s.step == 0


def test_gd_step_examples():
    assert gd_step([np.array([1.0])], [np.array([2.0])], 0.1)[0][0] == pytest.approx(0.8)
    assert gd_step([np.array([1.0])], [np.array([0.0])], 0.1)[0][0] == 1.0


def test_gd_and_adam_differ_in_magnitude_not_direction():
    p, g = [np.array([0.0, 0.0])], [np.array([3.0, -0.5])]
    a, _ = adam_step(p, g, AdamState.for_params(p, lr=0.1))
    d = gd_step(p, g, 0.1)
    assert np.array_equal(np.sign(a[0]), np.sign(d[0]))
    assert not np.allclose(a[0], d[0])


def test_optimizer_shape_checks():
    with pytest.raises(ShapeError):
        gd_step([np.zeros(2)], [np.zeros(3)], 0.1)
    with pytest.raises(ShapeError):
        adam_step([np.zeros(2)], [np.zeros(2)], AdamState.for_params([np.zeros(3)]))


# ---------------------------------------------------------------- snapshots

def test_snapshot_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    arrays = {"W": rng.normal(size=(3, 4)), "b": rng.normal(size=4) * 1e-300,
              "s": np.array([np.pi])}
    save_arrays(tmp_path / "p.txt", arrays)
    back = load_arrays(tmp_path / "p.txt")
    assert all(np.array_equal(arrays[k], back[k]) for k in arrays)


def test_snapshot_rejects_foreign_files(tmp_path):
    (tmp_path / "x.txt").write_text("hello 1 0\n")
    with pytest.raises(ValueError):
        load_arrays(tmp_path / "x.txt")
