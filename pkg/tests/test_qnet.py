"""Q-network tests: forward arithmetic, gradients vs finite differences,
RMSProp update rule, target sync, checkpoints."""

import numpy as np
import pytest

from helpers import finite_diff_grads, gradcheck_relative_errors, sample_safe_gradcheck_case
from v2xrl.qnet import (
    QNetwork,
    RMSPropState,
    backward,
    loss,
    rmsprop_step,
    sync_target,
)


def rng(seed=0):
    return np.random.default_rng(seed)


class TestForward:
    def test_zero_parameters_zero_output(self):
        net = QNetwork.init((5, 7, 3), rng())
        for w in net.weights:
            w[:] = 0.0
        out = net.forward_1(rng(1).normal(size=5))
        assert np.array_equal(out, np.zeros(3))

    def test_linearity_on_relu_passthrough(self):
        # non-negative weights and inputs keep every ReLU active, so the
        # pre-activations (biases zero) scale linearly with the input
        net = QNetwork.init((4, 6, 2), rng(2))
        for w in net.weights:
            np.abs(w, out=w)
        x = np.abs(rng(3).normal(size=4))
        one = net.forward_1(x)
        two = net.forward_1(2.0 * x)
        assert np.allclose(two, 2.0 * one, rtol=1e-12)

    def test_hand_computed_tiny_net(self):
        net = QNetwork(
            (2, 3, 2),
            [
                np.array([[1.0, 0.0, -1.0], [2.0, 1.0, 0.0]]),
                np.array([[1.0, -1.0], [0.0, 2.0], [3.0, 1.0]]),
            ],
            [np.array([0.5, -1.0, 0.0]), np.array([0.0, 1.0])],
        )
        # x @ W1 + b1 = [5.5, 1, -1] -> relu [5.5, 1, 0] -> @ W2 + b2 = [5.5, -2.5]
        out = net.forward_1(np.array([1.0, 2.0]))
        assert np.allclose(out, [5.5, -2.5], atol=1e-12)

    def test_forward_is_pure(self):
        net = QNetwork.init((6, 8, 4), rng(4))
        x = rng(5).normal(size=6)
        assert np.array_equal(net.forward_1(x), net.forward_1(x))

    def test_batch_matches_single(self):
        net = QNetwork.init((6, 8, 4), rng(6))
        xs = rng(7).normal(size=(10, 6))
        batch = net.forward_batch(xs)
        for i, x in enumerate(xs):
            assert np.allclose(batch[i], net.forward_1(x), rtol=1e-12)

    def test_dimension_mismatch_rejected(self):
        net = QNetwork.init((6, 8, 4), rng(8))
        with pytest.raises(ValueError):
            net.forward_1(np.zeros(5))
        with pytest.raises(ValueError):
            net.forward_batch(np.zeros((3, 7)))


class TestBackward:
    def test_zero_gradient_at_fitted_targets(self):
        net = QNetwork.init((5, 9, 3), rng(10))
        obs = rng(11).normal(size=(6, 5))
        actions = rng(12).integers(0, 3, size=6)
        targets = net.forward_batch(obs)[np.arange(6), actions]
        grads = backward(net, obs, actions, targets)
        for dw, db in grads:
            assert np.allclose(dw, 0.0, atol=1e-12)
            assert np.allclose(db, 0.0, atol=1e-12)

    def test_matches_finite_differences(self):
        for seed in (0, 1):
            net, obs, actions, targets = sample_safe_gradcheck_case((8, 16, 8, 4), rng(seed))
            analytic = backward(net, obs, actions, targets)
            numeric = finite_diff_grads(net, obs, actions, targets)
            errs = gradcheck_relative_errors(analytic, numeric)
            assert errs.max() <= 1e-4

    def test_gradients_linear_in_residual(self):
        net, obs, actions, targets = sample_safe_gradcheck_case((6, 10, 4), rng(33))
        q = net.forward_batch(obs)[np.arange(len(obs)), actions]
        scaled_targets = q + 3.0 * (targets - q)
        base = backward(net, obs, actions, targets)
        scaled = backward(net, obs, actions, scaled_targets)
        for (dw, db), (sw, sb) in zip(base, scaled):
            assert np.allclose(sw, 3.0 * dw, rtol=1e-9, atol=1e-12)
            assert np.allclose(sb, 3.0 * db, rtol=1e-9, atol=1e-12)

    def test_only_taken_action_contributes(self):
        net = QNetwork.init((4, 6, 3), rng(14))
        obs = rng(15).normal(size=(1, 4))
        grads_loss = []
        for a in range(3):
            g = backward(net, obs, [a], [10.0])
            grads_loss.append(g[-1][1])  # output bias gradient
        for a, db in enumerate(grads_loss):
            nonzero = np.nonzero(db)[0]
            assert np.array_equal(nonzero, [a])

    def test_empty_batch_rejected(self):
        net = QNetwork.init((4, 6, 3), rng(16))
        with pytest.raises(ValueError):
            backward(net, np.zeros((0, 4)), np.zeros(0, dtype=int), np.zeros(0))


class TestRMSProp:
    def test_zero_gradient_leaves_parameters(self):
        net = QNetwork.init((3, 4, 2), rng(20))
        snap = [w.copy() for w in net.weights]
        opt = RMSPropState(net)
        zero = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
        rmsprop_step(net, zero, opt)
        for w, s in zip(net.weights, snap):
            assert np.array_equal(w, s)

    def test_single_step_hand_value(self):
        # decay 0.9, lr 1e-3, g=1: step = -lr / sqrt(0.1 + 1e-8)
        net = QNetwork((1, 1), [np.array([[0.0]])], [np.array([0.0])])
        opt = RMSPropState(net, learning_rate=0.001, decay=0.9, stabilizer=1e-8)
        rmsprop_step(net, [(np.array([[1.0]]), np.array([0.0]))], opt)
        expected = -0.001 / np.sqrt(0.1 + 1e-8)
        assert net.weights[0][0, 0] == pytest.approx(expected, rel=1e-12)
        assert net.weights[0][0, 0] == pytest.approx(-3.1623e-3, rel=1e-4)

    def test_constant_gradient_step_approaches_lr(self):
        net = QNetwork((1, 1), [np.array([[0.0]])], [np.array([0.0])])
        opt = RMSPropState(net, learning_rate=0.001, decay=0.9, stabilizer=1e-8)
        g = [(np.array([[1.0]]), np.array([0.0]))]
        prev = 0.0
        for _ in range(500):
            prev = float(net.weights[0][0, 0])
            rmsprop_step(net, g, opt)
        step = abs(net.weights[0][0, 0] - prev)
        assert step == pytest.approx(0.001, rel=0.01)


class TestTargetSync:
    def test_outputs_agree_after_sync(self):
        net = QNetwork.init((5, 8, 3), rng(30))
        target = QNetwork.init((5, 8, 3), rng(31))
        sync_target(net, target)
        for x in rng(32).normal(size=(100, 5)):
            assert np.array_equal(net.forward_1(x), target.forward_1(x))

    def test_target_fixed_while_training_net_moves(self):
        net = QNetwork.init((5, 8, 3), rng(33))
        target = net.copy()
        snap = [w.copy() for w in target.weights]
        net.weights[0] += 1.0
        for w, s in zip(target.weights, snap):
            assert np.array_equal(w, s)

    def test_sync_idempotent(self):
        net = QNetwork.init((5, 8, 3), rng(34))
        target = QNetwork.init((5, 8, 3), rng(35))
        sync_target(net, target)
        once = [w.copy() for w in target.weights]
        sync_target(net, target)
        for w, s in zip(target.weights, once):
            assert np.array_equal(w, s)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        net = QNetwork.init((7, 11, 5), rng(40))
        path = tmp_path / "agent.npz"
        net.save(path)
        loaded = QNetwork.load(path)
        assert loaded.dims == net.dims
        x = rng(41).normal(size=(50, 7))
        assert np.array_equal(net.forward_batch(x), loaded.forward_batch(x))

    def test_loss_definition_is_sum_squared(self):
        net = QNetwork.init((3, 5, 2), rng(42))
        obs = rng(43).normal(size=(4, 3))
        actions = np.array([0, 1, 0, 1])
        q = net.forward_batch(obs)[np.arange(4), actions]
        targets = q + np.array([1.0, -2.0, 0.5, 3.0])
        assert loss(net, obs, actions, targets) == pytest.approx(1 + 4 + 0.25 + 9, rel=1e-12)
