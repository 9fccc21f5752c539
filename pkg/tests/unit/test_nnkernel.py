"""
Tests for the numpy deep-learning kernel
"""
import numpy as np
import pytest

from src.common.exceptions import ConfigurationError, ShapeError
from src.ml.nnkernel import (
    AdamState,
    BatchNorm2D,
    Conv2D,
    adam_update,
    class_fraction,
    conv2d,
    grad_check,
    loss_deep_supervision,
    lrelu,
    sigmoid,
)


def naive_conv(x, weight, bias, padding):
    """Direct-loop cross-correlation"""
    B, C, H, W = x.shape
    O, _, k, _ = weight.shape
    padded = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    out = np.zeros((B, O, H + 2 * padding - k + 1, W + 2 * padding - k + 1))
    for b in range(B):
        for o in range(O):
            for h in range(out.shape[2]):
                for w in range(out.shape[3]):
                    out[b, o, h, w] = np.sum(padded[b, :, h:h + k, w:w + k] * weight[o]) + bias[o]
    return out


class TestConvolution:

    def test_matches_direct_loops(self, rng):
        x = rng.normal(size=(2, 3, 5, 5))
        weight = rng.normal(size=(4, 3, 3, 3))
        bias = rng.normal(size=4)
        np.testing.assert_allclose(conv2d(x, weight, bias, padding=1), naive_conv(x, weight, bias, 1), atol=1e-12)

    def test_identity_kernel(self, rng):
        x = rng.normal(size=(1, 1, 4, 4))
        weight = np.zeros((1, 1, 3, 3))
        weight[0, 0, 1, 1] = 1.0
        np.testing.assert_allclose(conv2d(x, weight), x)

    def test_zero_weights_give_bias(self):
        layer = Conv2D(2, 3, 3, dtype=np.float64)
        layer.bias[...] = [0.5, -1.0, 2.0]
        out, _ = layer.forward(np.ones((2, 2, 4, 4)))
        assert out.shape == (2, 3, 4, 4)
        np.testing.assert_allclose(out[:, 1], -1.0)

    def test_channel_mismatch(self):
        with pytest.raises(ShapeError):
            conv2d(np.zeros((1, 2, 4, 4)), np.zeros((1, 3, 3, 3)))

    def test_even_kernel_rejected(self):
        with pytest.raises(ConfigurationError):
            Conv2D(1, 1, 2)

    def test_gradients_match_finite_differences(self, rng):
        layer = Conv2D(2, 2, 3, dtype=np.float64)
        layer.weight[...] = rng.normal(size=layer.weight.shape)
        layer.bias[...] = rng.normal(size=2)
        x = rng.normal(size=(2, 2, 4, 4))
        target = rng.normal(size=(2, 2, 4, 4))

        class Wrapper:
            def parameters(self):
                return layer.parameters()

        def loss_fn(inputs, labels):
            out, cache = layer.forward(inputs)
            _, grads = layer.backward(out - labels, cache)
            return 0.5 * float(np.sum((out - labels) ** 2)), grads

        assert grad_check(Wrapper(), x, target, n_samples=20, h=1e-3, loss_fn=loss_fn) < 1e-5


class TestBatchNorm:

    def test_train_mode_normalizes(self, rng):
        norm = BatchNorm2D(3, dtype=np.float64)
        x = rng.normal(2.0, 3.0, size=(4, 3, 5, 5))
        out, _ = norm.forward(x, training=True)
        np.testing.assert_allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.var(axis=(0, 2, 3)), 1.0, atol=1e-3)
        np.testing.assert_allclose(norm.running_mean, 0.1 * x.mean(axis=(0, 2, 3)))

    def test_infer_mode_uses_running_stats(self):
        norm = BatchNorm2D(1, dtype=np.float64)
        norm.running_mean[...] = 2.0
        norm.running_var[...] = 4.0
        out, _ = norm.forward(np.full((1, 1, 2, 2), 4.0), training=False)
        np.testing.assert_allclose(out, 2.0 / np.sqrt(4.0 + 1e-5))

    def test_batch_of_one_rejected_in_training(self):
        with pytest.raises(ShapeError):
            BatchNorm2D(1).forward(np.zeros((1, 1, 3, 3)), training=True)


def test_activations():
    np.testing.assert_allclose(lrelu(np.array([-1.0, 0.0, 2.0])), [-0.2, 0.0, 2.0])
    assert sigmoid(np.array(0.0)) == pytest.approx(0.5)
    assert sigmoid(np.array(800.0)) == pytest.approx(1.0)
    assert sigmoid(np.array(-800.0)) == pytest.approx(0.0)


class TestLoss:

    def test_class_fraction(self):
        labels = np.zeros((2, 1, 5, 5))
        labels[0, 0, 0, :3] = 1
        labels[1, 0, 1, :] = 1
        assert class_fraction(labels) == pytest.approx(8 / 50)

    def test_single_pixel_value(self):
        labels = np.ones((1, 1, 1, 1))
        p = np.full((1, 1, 1, 1), 0.8)
        loss, _ = loss_deep_supervision([p], labels, convention="direct")
        assert loss == pytest.approx(-np.log(0.8), abs=1e-6)
        assert loss == pytest.approx(0.22314, abs=1e-5)

    def test_weights_follow_class_fraction(self):
        labels = np.zeros((1, 1, 1, 10))
        labels[..., :3] = 1
        p = np.full(labels.shape, 0.5)
        direct, _ = loss_deep_supervision([p], labels, lam=1.1, convention="direct")
        rcf, _ = loss_deep_supervision([p], labels, lam=1.1, convention="rcf")
        ln2 = np.log(2.0)
        assert direct == pytest.approx((0.3 * 3 + 1.1 * 0.7 * 7) * ln2 / 10)
        assert rcf == pytest.approx((0.7 * 3 + 1.1 * 0.3 * 7) * ln2 / 10)

    def test_sums_over_outputs(self):
        labels = np.zeros((2, 1, 3, 3))
        labels[0, 0, 1] = 1
        p = np.full(labels.shape, 0.3)
        one, _ = loss_deep_supervision([p], labels)
        seven, grads = loss_deep_supervision([p] * 7, labels)
        assert seven == pytest.approx(7 * one)
        assert len(grads) == 7

    def test_clipped_pixels_have_zero_gradient(self):
        labels = np.ones((1, 1, 1, 2))
        p = np.array([[[[0.0, 0.5]]]])
        loss, grads = loss_deep_supervision([p], labels)
        assert np.isfinite(loss)
        assert grads[0][0, 0, 0, 0] == 0.0
        assert grads[0][0, 0, 0, 1] != 0.0

    def test_unknown_convention(self):
        with pytest.raises(ConfigurationError):
            loss_deep_supervision([np.full((1, 1, 1, 1), 0.5)], np.ones((1, 1, 1, 1)), convention="hed")


class TestAdam:

    def test_scalar_steps_match_formula(self):
        params = {'w': np.array([1.0])}
        state = AdamState.for_parameters(params)
        m = v = 0.0
        value = 1.0
        for t, g in enumerate([0.5, -0.2, 0.3], start=1):
            adam_update(params, {'w': np.array([g])}, state, lr=0.01)
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            value -= 0.01 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
            assert params['w'][0] == pytest.approx(value, rel=1e-10)
        assert state.step == 3

    def test_first_step_is_lr_times_sign(self):
        params = {'w': np.array([0.0, 0.0])}
        adam_update(params, {'w': np.array([3.0, -0.01])}, AdamState.for_parameters(params), lr=0.01)
        np.testing.assert_allclose(params['w'], [-0.01, 0.01], rtol=1e-5)

    def test_zero_gradient_leaves_parameters(self):
        params = {'w': np.array([1.5])}
        adam_update(params, {'w': np.zeros(1)}, AdamState.for_parameters(params), lr=0.1)
        assert params['w'][0] == 1.5

    def test_shape_mismatch(self):
        params = {'w': np.zeros(2)}
        with pytest.raises(ShapeError):
            adam_update(params, {'w': np.zeros(3)}, AdamState.for_parameters(params), lr=0.1)
