import math

import numpy as np
import pytest

from dementia_detection.generic_tools.exceptions import ShapeError
from dementia_detection.tensor_nn.gradient_check import numerical_gradient, relative_error
from dementia_detection.tensor_nn.initializers import init_dense, init_lstm
from dementia_detection.tensor_nn.layers import Activation, DenseParams, LstmParams, concat, concat_backward, \
    dense_backward, dense_forward, dropout, dropout_backward, lstm_backward, lstm_forward, mean_pool_time, \
    mean_pool_time_backward

TOLERANCE = 1e-6


def trailing_mask(lengths, length):
    return np.array([[t < n for t in range(length)] for n in lengths])


def test_dense_examples():
    y, _ = dense_forward(np.array([[1., 2.]]), DenseParams(np.eye(2), np.zeros(2), Activation.IDENTITY))
    np.testing.assert_array_equal(y, [[1., 2.]])
    y, _ = dense_forward(np.array([[0.]]), DenseParams(np.zeros((1, 1)), np.zeros(1), Activation.SIGMOID))
    np.testing.assert_array_equal(y, [[0.5]])
    y, _ = dense_forward(np.array([[1., 1.]]), DenseParams(np.array([[2., -2.]]), np.array([1.]),
                                                           Activation.IDENTITY))
    np.testing.assert_array_equal(y, [[1.]])


def test_dense_shape_error():
    with pytest.raises(ShapeError) as e:
        dense_forward(np.zeros((2, 3)), DenseParams(np.zeros((1, 4)), np.zeros(1)))
    assert "(2, 3)" in str(e.value)


def test_dense_squared_error_gradient():
    x = np.array([[1., -2., 0.5]])
    p = DenseParams(np.array([[0.3, 0.1, -0.2], [0.5, 0.5, 0.5]]), np.array([0.1, -0.1]), Activation.IDENTITY)
    target = np.array([[1., 0.]])
    y, cache = dense_forward(x, p)
    _, grads = dense_backward(y - target, cache)
    np.testing.assert_allclose(grads["W"], np.outer((y - target)[0], x[0]))
    np.testing.assert_allclose(grads["b"], (y - target)[0])


def test_lstm_zero_fixed_point():
    rng = np.random.default_rng(0)
    p = LstmParams(np.zeros((8, 3)), np.zeros((8, 2)), np.zeros(8), dropout=0., recurrent_dropout=0.)
    h_seq, h_last, _ = lstm_forward(rng.normal(size=(2, 4, 3)), np.ones((2, 4), dtype=bool), p)
    assert not h_seq.any()
    assert not h_last.any()


def scalar_lstm(xs, W, U, b):
    def sig(v):
        return 1. / (1. + math.exp(-v))

    h, c = 0., 0.
    for x in xs:
        i = sig(W[0] * x + U[0] * h + b[0])
        f = sig(W[1] * x + U[1] * h + b[1])
        g = math.tanh(W[2] * x + U[2] * h + b[2])
        o = sig(W[3] * x + U[3] * h + b[3])
        c = f * c + i * g
        h = o * math.tanh(c)
    return h


def test_lstm_scalar_oracle():
    W = [0.5, -0.3, 0.8, 0.1]
    U = [0.2, 0.4, -0.6, 0.7]
    b = [0.05, 1., -0.1, 0.2]
    xs = [0.9, -1.3]
    p = LstmParams(np.array(W)[:, None], np.array(U)[:, None], np.array(b), dropout=0., recurrent_dropout=0.)
    _, h_last, _ = lstm_forward(np.array(xs)[None, :, None], np.ones((1, 2), dtype=bool), p)
    assert abs(h_last[0, 0] - scalar_lstm(xs, W, U, b)) < 1e-12


def test_lstm_padding_invariance():
    rng = np.random.default_rng(1)
    p = init_lstm(4, 16, rng)
    x = rng.normal(size=(3, 3, 4))
    padded = np.concatenate([x, rng.normal(size=(3, 2, 4))], axis=1)
    _, h_last, _ = lstm_forward(x, trailing_mask([3, 3, 3], 3), p)
    _, h_padded, _ = lstm_forward(padded, trailing_mask([3, 3, 3], 5), p)
    assert np.max(np.abs(h_last - h_padded)) < 1e-12


def test_lstm_rejects_inner_padding():
    p = init_lstm(2, 3, np.random.default_rng(0))
    with pytest.raises(ShapeError):
        lstm_forward(np.zeros((1, 3, 2)), np.array([[True, False, True]]), p)


def test_lstm_parameter_counts():
    rng = np.random.default_rng(0)
    assert init_lstm(300, 16, rng).n_params == 20288
    assert init_lstm(302, 16, rng).n_params == 20416


def test_lstm_inference_is_deterministic():
    rng = np.random.default_rng(2)
    p = init_lstm(3, 4, rng)
    x = rng.normal(size=(2, 5, 3))
    mask = trailing_mask([5, 2], 5)
    a = lstm_forward(x, mask, p, training=False, rng=np.random.default_rng(1))[1]
    b = lstm_forward(x, mask, p, training=False, rng=np.random.default_rng(2))[1]
    np.testing.assert_array_equal(a, b)


def test_mean_pool_examples():
    y, _ = mean_pool_time(np.array([[[1., 3.], [3., 5.]]]), np.array([[True, True]]))
    np.testing.assert_array_equal(y, [[2., 4.]])
    y, _ = mean_pool_time(np.array([[[2., 2.], [9., 9.]]]), np.array([[True, False]]))
    np.testing.assert_array_equal(y, [[2., 2.]])
    with pytest.raises(ShapeError):
        mean_pool_time(np.zeros((1, 2, 2)), np.array([[False, False]]))


def test_mean_pool_rows_independent():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(2, 4, 3))
    mask = trailing_mask([4, 2], 4)
    y, _ = mean_pool_time(x, mask)
    x2 = x.copy()
    x2[1] += 10.
    y2, _ = mean_pool_time(x2, mask)
    np.testing.assert_array_equal(y[0], y2[0])
    padded = np.concatenate([x, np.ones((2, 3, 3))], axis=1)
    y3, _ = mean_pool_time(padded, trailing_mask([4, 2], 7))
    assert np.max(np.abs(y - y3)) < 1e-12


def test_dropout_examples():
    x = np.random.default_rng(0).normal(size=(4, 5))
    np.testing.assert_array_equal(dropout(x, 0.2, training=False)[0], x)
    np.testing.assert_array_equal(dropout(x, 0., training=True, rng=np.random.default_rng(0))[0], x)
    y, _ = dropout(np.ones(100000), 0.5, training=True, rng=np.random.default_rng(7))
    assert set(np.unique(y).tolist()) == {0., 2.}
    assert abs(np.mean(y > 0) - 0.5) < 0.01
    y, _ = dropout(np.full(100000, 3.), 0.2, training=True, rng=np.random.default_rng(8))
    assert abs(y.mean() - 3.) < 0.03


def test_concat_examples():
    y, _ = concat([np.array([[1.]]), np.array([[2., 3.]])])
    np.testing.assert_array_equal(y, [[1., 2., 3.]])
    x = np.array([[4., 5.]])
    np.testing.assert_array_equal(concat([x, np.zeros((1, 0))])[0], x)
    a, b = np.array([[1.]]), np.array([[2.]])
    assert not np.array_equal(concat([a, b])[0], concat([b, a])[0])
    with pytest.raises(ShapeError):
        concat([np.zeros((1, 2)), np.zeros((2, 2))])


def test_dense_gradient_check():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 3))
    p = init_dense(3, 2, rng)
    r = rng.normal(size=(4, 2))

    def loss():
        return float(np.sum(dense_forward(x, p)[0] * r))

    _, cache = dense_forward(x, p)
    dx, grads = dense_backward(r, cache)
    assert relative_error(dx, numerical_gradient(loss, x)) < TOLERANCE
    assert relative_error(grads["W"], numerical_gradient(loss, p.W)) < TOLERANCE
    assert relative_error(grads["b"], numerical_gradient(loss, p.b)) < TOLERANCE


@pytest.mark.parametrize("training", [False, True])
def test_lstm_gradient_check(training):
    rng = np.random.default_rng(4)
    p = init_lstm(3, 4, rng, dropout=0.3, recurrent_dropout=0.3)
    p.b += rng.normal(scale=0.1, size=p.b.shape)
    x = rng.normal(size=(3, 6, 3))
    mask = trailing_mask([6, 4, 1], 6)
    r_seq = rng.normal(size=(3, 6, 4))
    r_last = rng.normal(size=(3, 4))

    def loss():
        h_seq, h_last, _ = lstm_forward(x, mask, p, training=training, rng=np.random.default_rng(11))
        return float(np.sum(h_seq * r_seq) + np.sum(h_last * r_last))

    _, _, cache = lstm_forward(x, mask, p, training=training, rng=np.random.default_rng(11))
    dx, grads = lstm_backward(r_last, cache, dh_seq=r_seq)
    assert relative_error(dx, numerical_gradient(loss, x)) < TOLERANCE
    for name in ["W", "U", "b"]:
        assert relative_error(grads[name], numerical_gradient(loss, getattr(p, name))) < TOLERANCE
    assert not dx[2, 1:].any()


def test_pool_dropout_concat_gradient_check():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(3, 4, 2))
    mask = trailing_mask([4, 1, 3], 4)
    other = rng.normal(size=(3, 3))
    r = rng.normal(size=(3, 5))

    def forward():
        pooled, pool_cache = mean_pool_time(x, mask)
        dropped, drop_cache = dropout(pooled, 0.4, training=True, rng=np.random.default_rng(9))
        y, concat_cache = concat([other, dropped])
        return y, (pool_cache, drop_cache, concat_cache)

    def loss():
        return float(np.sum(forward()[0] * r))

    _, (pool_cache, drop_cache, concat_cache) = forward()
    d_other, d_dropped = concat_backward(r, concat_cache)
    dx = mean_pool_time_backward(dropout_backward(d_dropped, drop_cache), pool_cache)
    assert relative_error(dx, numerical_gradient(loss, x)) < TOLERANCE
    assert relative_error(d_other, numerical_gradient(loss, other)) < TOLERANCE


def test_zero_upstream_gives_zero_gradients():
    rng = np.random.default_rng(6)
    p = init_lstm(2, 3, rng)
    _, _, cache = lstm_forward(rng.normal(size=(2, 3, 2)), np.ones((2, 3), dtype=bool), p, training=True,
                               rng=rng)
    dx, grads = lstm_backward(np.zeros((2, 3)), cache)
    assert not dx.any()
    assert all(not g.any() for g in grads.values())
    _, cache = dense_forward(rng.normal(size=(2, 2)), init_dense(2, 1, rng))
    _, grads = dense_backward(np.zeros((2, 1)), cache)
    assert all(not g.any() for g in grads.values())
