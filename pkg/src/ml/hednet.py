"""
HED-style shock detection / localization network

Six 3x3 convolutions (1-16-16-32-32-64-64 channels), each followed by batch
normalization and LReLU. Every stage feeds a side-output convolution (1x1 by
default); a 1x1 fuse convolution combines the six pre-sigmoid side maps. The
prediction is the mean of the seven sigmoid maps. Spatial size (N+1)x(N+1)
is preserved throughout.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.common.exceptions import ConfigurationError, ShapeError
from src.common.logging import get_logger
from src.common.models import NodeFamily
from src.datagen.sampling import normalize
from src.ml.nnkernel import (
    BatchNorm2D,
    Conv2D,
    loss_deep_supervision,
    lrelu,
    lrelu_backward,
    sigmoid,
)

MAIN_CHANNELS = (16, 16, 32, 32, 64, 64)
INIT_STD = 0.01
FUSE_INIT_STD = 0.2
PIXEL_THRESHOLD = 0.5
INFERENCE_CHUNK = 1024
MIN_DEGREE = 3


@dataclass
class HedOutput:
    """Forward result; caches are only filled in train mode"""
    side_logits: List[np.ndarray]
    fused_logit: np.ndarray
    side_maps: List[np.ndarray]
    fused_map: np.ndarray
    average: np.ndarray
    caches: List[tuple] = field(default_factory=list)

    @property
    def probabilities(self) -> List[np.ndarray]:
        """The seven maps entering the loss: six side outputs then the fused map"""
        return self.side_maps + [self.fused_map]


class HedNetwork:
    """Shock indicator network for one polynomial degree and node family"""

    def __init__(
        self,
        degree: int,
        node_family: NodeFamily = NodeFamily.GAUSS,
        side_kernel: int = 1,
        dtype=np.float32
    ):
        if degree < MIN_DEGREE:
            raise ConfigurationError(f"Network degree must be >= {MIN_DEGREE}, got {degree}")
        if side_kernel not in (1, 3):
            raise ConfigurationError(f"Side kernel must be 1 or 3, got {side_kernel}")
        self.degree = degree
        self.node_family = NodeFamily(node_family)
        self.side_kernel = side_kernel
        self.dtype = np.dtype(dtype)
        self.logger = get_logger("HedNetwork")

        self.main: List[Conv2D] = []
        self.norms: List[BatchNorm2D] = []
        self.sides: List[Conv2D] = []
        in_channels = 1
        for channels in MAIN_CHANNELS:
            self.main.append(Conv2D(in_channels, channels, 3, dtype=dtype))
            self.norms.append(BatchNorm2D(channels, dtype=dtype))
            self.sides.append(Conv2D(channels, 1, side_kernel, dtype=dtype))
            in_channels = channels
        self.fuse = Conv2D(len(MAIN_CHANNELS), 1, 1, dtype=dtype)
        self._signature: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.degree + 1

    def _layers(self):
        for index, (conv, norm, side) in enumerate(zip(self.main, self.norms, self.sides)):
            yield f"main{index}", conv
            yield f"bn{index}", norm
            yield f"side{index}", side
        yield "fuse", self.fuse

    def parameters(self) -> Dict[str, np.ndarray]:
        """Trainable tensors by name (live references)"""
        params = {}
        for prefix, layer in self._layers():
            for name, value in layer.parameters().items():
                params[f"{prefix}.{name}"] = value
        return params

    def buffers(self) -> Dict[str, np.ndarray]:
        """Batch-norm running statistics by name (live references)"""
        buffers = {}
        for index, norm in enumerate(self.norms):
            for name, value in norm.buffers().items():
                buffers[f"bn{index}.{name}"] = value
        return buffers

    def state_dict(self) -> Dict[str, np.ndarray]:
        state = dict(self.parameters())
        state.update(self.buffers())
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """
        Copy tensors into the network

        Raises:
            ShapeError: a tensor is missing or has the wrong shape
        """
        for name, target in self.state_dict().items():
            if name not in state:
                raise ShapeError(f"Missing tensor {name}")
            value = np.asarray(state[name])
            if value.shape != target.shape:
                raise ShapeError(f"Tensor {name} has shape {value.shape}, expected {target.shape}")
            target[...] = value

    def n_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters().values()))

    def initialize(self, seed: int = 0) -> "HedNetwork":
        """Weights N(0, 0.01^2), fuse weights N(0, 0.2^2), zero biases, unit BN scale"""
        rng = np.random.default_rng(seed)
        for conv in self.main + self.sides:
            conv.weight[...] = rng.normal(0.0, INIT_STD, conv.weight.shape)
            conv.bias[...] = 0.0
        self.fuse.weight[...] = rng.normal(0.0, FUSE_INIT_STD, self.fuse.weight.shape)
        self.fuse.bias[...] = 0.0
        for norm in self.norms:
            norm.gamma[...] = 1.0
            norm.beta[...] = 0.0
            norm.running_mean[...] = 0.0
            norm.running_var[...] = 1.0
        return self

    def astype(self, dtype) -> "HedNetwork":
        """Copy of the network in another float precision"""
        other = HedNetwork(self.degree, self.node_family, self.side_kernel, dtype=dtype)
        other.load_state_dict({k: v.astype(dtype) for k, v in self.state_dict().items()})
        return other

    def _check_batch(self, x: np.ndarray) -> np.ndarray:
        if x.ndim == 3:
            x = x[:, None]
        if x.ndim != 4 or x.shape[1] != 1 or x.shape[2:] != (self.size, self.size):
            raise ShapeError(
                f"Network for N={self.degree} expects (batch, 1, {self.size}, {self.size}) input, got {x.shape}"
            )
        return x.astype(self.dtype, copy=False)

    def forward(self, x: np.ndarray, mode: str = "infer", update_stats: bool = True) -> HedOutput:
        """
        Forward pass

        Args:
            x: (batch, 1, N+1, N+1) or (batch, N+1, N+1)
            mode: "train" (batch statistics, caches kept) or "infer"

        Raises:
            ShapeError: input shape does not match the network degree
        """
        training = mode == "train"
        h = self._check_batch(x)
        caches = []
        side_logits = []
        signature = []
        for conv, norm, side in zip(self.main, self.norms, self.sides):
            z, conv_cache = conv.forward(h)
            a, norm_cache = norm.forward(z, training, update_stats)
            h = lrelu(a)
            s, side_cache = side.forward(h)
            side_logits.append(s)
            signature.append(a > 0)
            if training:
                caches.append((conv_cache, norm_cache, a, side_cache))

        stacked = np.concatenate(side_logits, axis=1)
        fused_logit, fuse_cache = self.fuse.forward(stacked)
        if training:
            caches.append(fuse_cache)
            self._signature = np.concatenate([s.reshape(-1) for s in signature])

        side_maps = [sigmoid(s) for s in side_logits]
        fused_map = sigmoid(fused_logit)
        average = (sum(side_maps) + fused_map) / (len(side_maps) + 1)
        return HedOutput(
            side_logits=side_logits,
            fused_logit=fused_logit,
            side_maps=side_maps,
            fused_map=fused_map,
            average=average,
            caches=caches,
        )

    def backward(self, output: HedOutput, grad_logits: List[np.ndarray]) -> Dict[str, np.ndarray]:
        """
        Parameter gradients from gradients of the seven pre-sigmoid maps

        Args:
            output: train-mode forward result
            grad_logits: six side-logit gradients followed by the fused-logit gradient
        """
        if not output.caches:
            raise ConfigurationError("Backward needs a train-mode forward pass")
        grads: Dict[str, np.ndarray] = {}
        n_stages = len(self.main)

        d_stacked, fuse_grads = self.fuse.backward(grad_logits[-1], output.caches[-1])
        for name, g in fuse_grads.items():
            grads[f"fuse.{name}"] = g

        d_h_above = None
        for index in reversed(range(n_stages)):
            conv_cache, norm_cache, a, side_cache = output.caches[index]
            d_side = grad_logits[index] + d_stacked[:, index:index + 1]
            d_h, side_grads = self.sides[index].backward(d_side, side_cache)
            if d_h_above is not None:
                d_h = d_h + d_h_above
            d_a = lrelu_backward(d_h, a)
            d_z, norm_grads = self.norms[index].backward(d_a, norm_cache)
            d_h_above, conv_grads = self.main[index].backward(d_z, conv_cache)

            for name, g in side_grads.items():
                grads[f"side{index}.{name}"] = g
            for name, g in norm_grads.items():
                grads[f"bn{index}.{name}"] = g
            for name, g in conv_grads.items():
                grads[f"main{index}.{name}"] = g
        return grads

    def loss_and_gradients(
        self,
        x: np.ndarray,
        labels: np.ndarray,
        lam: float = 1.1,
        convention: str = "direct",
        update_stats: bool = False
    ) -> Tuple[float, Dict[str, np.ndarray]]:
        """Deep-supervision loss and parameter gradients of one mini-batch"""
        output = self.forward(x, mode="train", update_stats=update_stats)
        labels = labels.reshape(output.fused_map.shape)
        loss, grad_logits = loss_deep_supervision(output.probabilities, labels, lam, convention)
        return loss, self.backward(output, grad_logits)

    def kink_signature(self) -> Optional[np.ndarray]:
        """LReLU input signs of the last train-mode forward"""
        return self._signature

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Averaged output map in infer mode, (batch, N+1, N+1)"""
        return self.forward(x, mode="infer").average[:, 0]


def build_network(
    degree: int,
    seed: int = 0,
    node_family: NodeFamily = NodeFamily.GAUSS,
    side_kernel: int = 1,
    dtype=np.float32
) -> HedNetwork:
    """Freshly initialized network for degree N"""
    return HedNetwork(degree, node_family, side_kernel, dtype).initialize(seed)


def predict_maps(network: HedNetwork, x: np.ndarray, threads: int = 1, chunk: int = INFERENCE_CHUNK) -> np.ndarray:
    """
    Averaged maps of a (batch, N+1, N+1) array

    Chunks are dispatched to a thread pool and gathered in index order, so
    the result does not depend on the thread count.
    """
    x = np.asarray(x)
    if x.shape[0] == 0:
        return np.zeros((0, network.size, network.size), dtype=network.dtype)
    starts = range(0, x.shape[0], chunk)
    if threads <= 1 or x.shape[0] <= chunk:
        parts = [network.predict(x[s:s + chunk]) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(lambda s: network.predict(x[s:s + chunk]), starts))
    return np.concatenate(parts, axis=0)


def _edge_maps(values: np.ndarray, network: HedNetwork, threshold: float, threads: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    single = values.ndim == 2
    if single:
        values = values[None]
    if values.shape[1:] != (network.size, network.size):
        raise ConfigurationError(
            f"Element data of shape {values.shape[1:]} does not match the network degree N={network.degree}"
        )
    inputs = np.stack([normalize(v) for v in values]) if len(values) else values
    maps = (predict_maps(network, inputs, threads) >= threshold).astype(np.uint8)
    return maps[0] if single else maps


def annsi_flag(
    density: np.ndarray,
    network: HedNetwork,
    threshold: float = PIXEL_THRESHOLD,
    threads: int = 1
):
    """
    Element flag(s) and edge map(s) from Gauss-node density

    Args:
        density: (N+1, N+1) or (n_elem, N+1, N+1)

    Returns:
        (flag, edge map) for one element, (flags, edge maps) for a batch
    """
    maps = _edge_maps(density, network, threshold, threads)
    flags = np.any(maps, axis=(-2, -1))
    if maps.ndim == 2:
        return bool(flags), maps
    return flags, maps


def annsl_localize(
    subcells: np.ndarray,
    network: HedNetwork,
    threshold: float = PIXEL_THRESHOLD,
    threads: int = 1
) -> np.ndarray:
    """Binary edge map(s) of sub-cell density on the equispaced grid"""
    return _edge_maps(subcells, network, threshold, threads)
