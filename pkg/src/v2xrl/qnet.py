"""Feed-forward Q-network with hand-rolled backprop and RMSProp.

No learning framework: parameters are plain float64 numpy arrays. Batched
math runs through numpy/BLAS; the single-observation forward used during
acting dispatches to the compiled kernel when available.
"""

import numpy as np

from . import kernels

CHECKPOINT_FORMAT = 1


class QNetwork:
    """Fully connected ReLU network with a linear action-value head."""

    def __init__(self, dims, weights, biases):
        self.dims = tuple(int(d) for d in dims)
        self.weights = weights
        self.biases = biases

    @classmethod
    def init(cls, dims, rng):
        """Uniform(+/- sqrt(6/(fan_in+fan_out))) weights, zero biases."""
        dims = tuple(int(d) for d in dims)
        if len(dims) < 2:
            raise ValueError("need at least input and output dimensions")
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(dims, weights, biases)

    def copy(self):
        return QNetwork(self.dims, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def forward_1(self, obs):
        """Action values for one observation vector."""
        x = np.ascontiguousarray(obs, dtype=np.float64)
        if x.shape != (self.dims[0],):
            raise ValueError(f"expected observation of length {self.dims[0]}, got {x.shape}")
        return kernels.qnet_forward_1(self.weights, self.biases, x)

    def forward_batch(self, obs_batch):
        """Action values for a batch of observations, shape (n, obs_dim)."""
        a = np.asarray(obs_batch, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] != self.dims[0]:
            raise ValueError(f"expected batch of shape (n, {self.dims[0]}), got {a.shape}")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i != last:
                np.maximum(a, 0.0, out=a)
        return a

    def save(self, path):
        arrays = {"format": np.array([CHECKPOINT_FORMAT]), "dims": np.array(self.dims, dtype=np.int64)}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"w{i}"] = w
            arrays[f"b{i}"] = b
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path):
        with np.load(path) as data:
            if int(data["format"][0]) != CHECKPOINT_FORMAT:
                raise ValueError(f"unsupported checkpoint format in {path}")
            dims = tuple(int(d) for d in data["dims"])
            weights = [data[f"w{i}"].copy() for i in range(len(dims) - 1)]
            biases = [data[f"b{i}"].copy() for i in range(len(dims) - 1)]
        return cls(dims, weights, biases)


def loss(net: QNetwork, obs_batch, actions, targets) -> float:
    """Sum-squared error of the taken actions' values against the targets."""
    q = net.forward_batch(obs_batch)
    taken = q[np.arange(len(q)), np.asarray(actions, dtype=np.int64)]
    resid = np.asarray(targets, dtype=np.float64) - taken
    return float(resid @ resid)


def backward(net: QNetwork, obs_batch, actions, targets):
    """Gradients of the sum-squared error w.r.t. all parameters.

    Only the taken action's output contributes per sample. Returns a list of
    (dW, db) pairs, one per layer.
    """
    x = np.asarray(obs_batch, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("backward expects a batch of observations")
    if len(x) == 0:
        raise ValueError("backward requires a non-empty batch")
    actions = np.asarray(actions, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.float64)

    last = len(net.weights) - 1
    activations = [x]
    pre = []
    a = x
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i != last else z
        activations.append(a)

    n = len(x)
    q = pre[-1]
    delta = np.zeros_like(q)
    rows = np.arange(n)
    delta[rows, actions] = -2.0 * (targets - q[rows, actions])

    grads = [None] * len(net.weights)
    for i in range(last, -1, -1):
        grads[i] = (activations[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ net.weights[i].T) * (pre[i - 1] > 0.0)
    return grads


class RMSPropState:
    """Per-parameter squared-gradient accumulators plus optimizer constants."""

    def __init__(self, net: QNetwork, learning_rate=0.001, decay=0.9, stabilizer=1e-8):
        self.learning_rate = learning_rate
        self.decay = decay
        self.stabilizer = stabilizer
        self.sq_weights = [np.zeros_like(w) for w in net.weights]
        self.sq_biases = [np.zeros_like(b) for b in net.biases]


def rmsprop_step(net: QNetwork, grads, opt: RMSPropState):
    """In-place RMSProp update; returns (net, opt) for chaining."""
    lr, decay, eps = opt.learning_rate, opt.decay, opt.stabilizer
    for i, (dw, db) in enumerate(grads):
        sw, sb = opt.sq_weights[i], opt.sq_biases[i]
        sw *= decay
        sw += (1.0 - decay) * dw * dw
        sb *= decay
        sb += (1.0 - decay) * db * db
        net.weights[i] -= lr * dw / np.sqrt(sw + eps)
        net.biases[i] -= lr * db / np.sqrt(sb + eps)
    return net, opt


def sync_target(net: QNetwork, target: QNetwork):
    """Copy the training parameters into the target network (idempotent)."""
    for tw, w in zip(target.weights, net.weights):
        tw[:] = w
    for tb, b in zip(target.biases, net.biases):
        tb[:] = b
    return target
