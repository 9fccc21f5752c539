"""
Minimal numpy deep-learning kernel

Dense (batch, channels, height, width) tensors, 2D convolution, batch
normalization, LReLU / sigmoid, the deep-supervision weighted cross-entropy
and Adam. Layers are stateless during forward: every forward returns a cache
that the matching backward consumes, so inference can run from several
threads on one set of parameters.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.common.exceptions import ConfigurationError, ShapeError
from src.common.logging import get_logger

LRELU_ALPHA = 0.2
BN_MOMENTUM = 0.1
BN_EPS = 1e-5
PROB_CLIP = 1e-7

logger = get_logger("nnkernel")


# Convolution

def _check_input(x: np.ndarray, channels: int, name: str) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{name}: expected a 4D tensor, got shape {x.shape}")
    if x.shape[1] != channels:
        raise ShapeError(f"{name}: expected {channels} input channels, got {x.shape[1]}")


def _windows(x: np.ndarray, k: int, padding: int, stride: int) -> np.ndarray:
    """(B, C, H_out, W_out, k, k) view of the zero-padded input"""
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    return sliding_window_view(x, (k, k), axis=(2, 3))[:, :, ::stride, ::stride]


def conv2d(
    x: np.ndarray,
    weight: np.ndarray,
    bias: Optional[np.ndarray] = None,
    padding: int = 1,
    stride: int = 1
) -> np.ndarray:
    """
    Cross-correlation with zero padding

    Args:
        x: (B, C_in, H, W)
        weight: (C_out, C_in, k, k)
        bias: (C_out,) or None

    Raises:
        ShapeError: channel or rank mismatch
    """
    _check_input(x, weight.shape[1], "conv2d")
    k = weight.shape[-1]
    out = np.einsum('bchwij,ocij->bohw', _windows(x, k, padding, stride), weight, optimize=True)
    if bias is not None:
        out = out + bias[None, :, None, None]
    return out


def conv2d_backward(
    grad_out: np.ndarray,
    x: np.ndarray,
    weight: np.ndarray,
    padding: int = 1,
    stride: int = 1
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (d_input, d_weight, d_bias) of conv2d"""
    k = weight.shape[-1]
    d_weight = np.einsum('bohw,bchwij->ocij', grad_out, _windows(x, k, padding, stride), optimize=True)
    d_bias = grad_out.sum(axis=(0, 2, 3))

    B, C, H, W = x.shape
    h_out, w_out = grad_out.shape[2:]
    d_padded = np.zeros((B, C, H + 2 * padding, W + 2 * padding), dtype=grad_out.dtype)
    for i in range(k):
        for j in range(k):
            d_padded[:, :, i:i + stride * h_out:stride, j:j + stride * w_out:stride] += np.einsum(
                'bohw,oc->bchw', grad_out, weight[:, :, i, j], optimize=True
            )
    d_input = d_padded[:, :, padding:padding + H, padding:padding + W]
    return d_input, d_weight, d_bias


class Conv2D:
    """Convolution layer holding weights (C_out, C_in, k, k) and optional bias"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int = 3,
        padding: Optional[int] = None,
        stride: int = 1,
        bias: bool = True,
        dtype=np.float32
    ):
        if kernel_size % 2 != 1:
            raise ConfigurationError(f"Kernel size must be odd, got {kernel_size}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.padding = (kernel_size - 1) // 2 if padding is None else padding
        self.stride = stride
        self.weight = np.zeros((out_channels, in_channels, kernel_size, kernel_size), dtype=dtype)
        self.bias = np.zeros(out_channels, dtype=dtype) if bias else None

    def parameters(self) -> Dict[str, np.ndarray]:
        params = {'weight': self.weight}
        if self.bias is not None:
            params['bias'] = self.bias
        return params

    def forward(self, x: np.ndarray):
        return conv2d(x, self.weight, self.bias, self.padding, self.stride), x

    def backward(self, grad_out: np.ndarray, cache) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        d_input, d_weight, d_bias = conv2d_backward(grad_out, cache, self.weight, self.padding, self.stride)
        grads = {'weight': d_weight}
        if self.bias is not None:
            grads['bias'] = d_bias
        return d_input, grads


# Batch normalization

@dataclass
class BatchNormCache:
    x_hat: np.ndarray
    inv_std: np.ndarray


class BatchNorm2D:
    """
    Per-channel batch normalization

    Train mode normalizes with the (biased) batch statistics and updates the
    running estimates; infer mode uses the frozen running estimates.
    """

    def __init__(self, channels: int, momentum: float = BN_MOMENTUM, eps: float = BN_EPS, dtype=np.float32):
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)

    def parameters(self) -> Dict[str, np.ndarray]:
        return {'gamma': self.gamma, 'beta': self.beta}

    def buffers(self) -> Dict[str, np.ndarray]:
        return {'running_mean': self.running_mean, 'running_var': self.running_var}

    def forward(self, x: np.ndarray, training: bool, update_stats: bool = True):
        _check_input(x, self.channels, "batchnorm")
        if training:
            if x.shape[0] < 2:
                raise ShapeError("Batch normalization in train mode needs a batch of at least 2")
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            if update_stats:
                self.running_mean *= (1.0 - self.momentum)
                self.running_mean += self.momentum * mean.astype(self.running_mean.dtype)
                self.running_var *= (1.0 - self.momentum)
                self.running_var += self.momentum * var.astype(self.running_var.dtype)
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        x_hat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
        out = self.gamma[None, :, None, None] * x_hat + self.beta[None, :, None, None]
        return out, BatchNormCache(x_hat=x_hat, inv_std=inv_std)

    def backward(self, grad_out: np.ndarray, cache: BatchNormCache) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        """Backward through train-mode normalization"""
        x_hat = cache.x_hat
        count = grad_out.shape[0] * grad_out.shape[2] * grad_out.shape[3]
        d_gamma = np.sum(grad_out * x_hat, axis=(0, 2, 3))
        d_beta = np.sum(grad_out, axis=(0, 2, 3))
        d_xhat = grad_out * self.gamma[None, :, None, None]
        d_input = (cache.inv_std[None, :, None, None] / count) * (
            count * d_xhat
            - d_xhat.sum(axis=(0, 2, 3))[None, :, None, None]
            - x_hat * np.sum(d_xhat * x_hat, axis=(0, 2, 3))[None, :, None, None]
        )
        return d_input, {'gamma': d_gamma, 'beta': d_beta}


# Activations

def lrelu(z: np.ndarray, alpha: float = LRELU_ALPHA) -> np.ndarray:
    return np.where(z > 0, z, alpha * z)


def lrelu_backward(grad_out: np.ndarray, z: np.ndarray, alpha: float = LRELU_ALPHA) -> np.ndarray:
    return np.where(z > 0, grad_out, alpha * grad_out)


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# Loss

def class_fraction(labels: np.ndarray) -> float:
    """Fraction of class-1 pixels in the mini-batch"""
    return float(np.mean(labels)) if labels.size else 0.0


def loss_deep_supervision(
    probabilities: List[np.ndarray],
    labels: np.ndarray,
    lam: float = 1.1,
    convention: str = "direct"
) -> Tuple[float, List[np.ndarray]]:
    """
    Weighted cross-entropy summed over deep-supervision outputs

        C = -(1/m) sum_b sum_l (1/S_Y) sum_s [w1 Y ln P + w0 (1-Y) ln(1-P)]

    "direct" weights are w1 = Lambda, w0 = lam (1 - Lambda); "rcf" swaps them
    to w1 = 1 - Lambda, w0 = lam Lambda. Lambda is the class-1 pixel fraction
    of the batch. Probabilities are clipped to [1e-7, 1 - 1e-7]; clipped
    pixels get zero gradient.

    Args:
        probabilities: L sigmoid maps shaped like labels
        labels: binary maps (m, 1, H, W)

    Returns:
        (loss, gradients with respect to the pre-sigmoid maps)
    """
    fraction = class_fraction(labels)
    if convention == "direct":
        w_pos, w_neg = fraction, lam * (1.0 - fraction)
    elif convention == "rcf":
        w_pos, w_neg = 1.0 - fraction, lam * fraction
    else:
        raise ConfigurationError(f"Unknown loss convention: {convention}")

    labels = labels.astype(probabilities[0].dtype, copy=False)
    scale = 1.0 / labels.size
    loss = 0.0
    grads = []
    for p in probabilities:
        if p.shape != labels.shape:
            raise ShapeError(f"Output map shape {p.shape} does not match labels {labels.shape}")
        clipped = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
        terms = w_pos * labels * np.log(clipped) + w_neg * (1.0 - labels) * np.log(1.0 - clipped)
        loss -= scale * float(np.sum(terms, dtype=np.float64))
        inside = (p > PROB_CLIP) & (p < 1.0 - PROB_CLIP)
        grad = -scale * (w_pos * labels * (1.0 - p) - w_neg * (1.0 - labels) * p)
        grads.append(np.where(inside, grad, 0.0).astype(p.dtype, copy=False))
    return loss, grads


# Optimizer

@dataclass
class AdamState:
    """Adam moment accumulators keyed by parameter name"""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_parameters(cls, params: Dict[str, np.ndarray], beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        return cls(
            m={name: np.zeros_like(p) for name, p in params.items()},
            v={name: np.zeros_like(p) for name, p in params.items()},
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_update(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: AdamState,
    lr: float
) -> Dict[str, np.ndarray]:
    """
    One bias-corrected Adam step, applied in place

    Raises:
        ShapeError: a gradient does not match its parameter
    """
    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"Gradient for {name} has shape {g.shape}, parameter {p.shape}")
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        p -= (lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype, copy=False)
    return params


# Gradient check

def grad_check(
    network,
    x: np.ndarray,
    labels: np.ndarray,
    n_samples: int = 200,
    h: float = 1e-5,
    floor: float = 1e-4,
    seed: int = 0,
    loss_fn: Optional[Callable] = None
) -> float:
    """
    Maximum relative error between analytic and central-difference gradients

    `network` provides parameters() and loss_and_gradients(x, labels); when it
    also exposes kink_signature(), parameters whose perturbation moves an
    LReLU input across zero are skipped. The relative error uses
    max(|a| + |n|, floor) as denominator.
    """
    if loss_fn is None:
        loss_fn = network.loss_and_gradients
    params = network.parameters()
    _, analytic = loss_fn(x, labels)
    base_signature = network.kink_signature() if hasattr(network, 'kink_signature') else None

    candidates = [(name, idx) for name, p in params.items() for idx in range(p.size)]
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(candidates), size=min(n_samples, len(candidates)), replace=False)

    worst = 0.0
    skipped = 0
    for pick in picks:
        name, flat = candidates[pick]
        values = params[name].reshape(-1)
        original = values[flat]

        values[flat] = original + h
        loss_plus, _ = loss_fn(x, labels)
        crossed = base_signature is not None and not np.array_equal(network.kink_signature(), base_signature)
        values[flat] = original - h
        loss_minus, _ = loss_fn(x, labels)
        crossed = crossed or (base_signature is not None and not np.array_equal(network.kink_signature(), base_signature))
        values[flat] = original

        if crossed:
            skipped += 1
            continue
        numeric = (loss_plus - loss_minus) / (2.0 * h)
        exact = float(analytic[name].reshape(-1)[flat])
        error = abs(exact - numeric) / max(abs(exact) + abs(numeric), floor)
        worst = max(worst, error)

    logger.debug(f"Gradient check: {len(picks) - skipped} parameters compared, {skipped} skipped at kinks")
    return worst
