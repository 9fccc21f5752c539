"""
Network checkpoint files

Little-endian binary layout:

    magic        8s   b"SHOCKHED"
    version      H
    degree       H
    node family  B    0 gauss, 1 equispaced
    side kernel  B
    has adam     B
    reserved     B
    adam step    Q
    epoch        I
    tensor count I
    tensors      name length H, utf-8 name, rank B, dims I*rank, float32 data

Adam moments are stored as tensors named "adam.m.<param>" / "adam.v.<param>".
"""
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from src.common.exceptions import CheckpointError
from src.common.logging import get_logger
from src.common.models import NodeFamily
from src.ml.hednet import HedNetwork
from src.ml.nnkernel import AdamState

MAGIC = b"SHOCKHED"
VERSION = 1
HEADER = struct.Struct("<8sHHBBBBQII")
FAMILY_TAGS = {NodeFamily.GAUSS: 0, NodeFamily.EQUISPACED: 1}

logger = get_logger("checkpoint")


@dataclass
class CheckpointContents:
    """Everything a checkpoint file carries"""
    network: HedNetwork
    optimizer: Optional[AdamState] = None
    epoch: int = 0


def _pack_tensor(name: str, value: np.ndarray) -> bytes:
    encoded = name.encode("utf-8")
    data = np.ascontiguousarray(value, dtype="<f4")
    return b"".join([
        struct.pack("<H", len(encoded)),
        encoded,
        struct.pack("<B", data.ndim),
        struct.pack(f"<{data.ndim}I", *data.shape),
        data.tobytes(),
    ])


def checkpoint_bytes(network: HedNetwork, optimizer: Optional[AdamState] = None, epoch: int = 0) -> bytes:
    tensors = dict(network.state_dict())
    if optimizer is not None:
        for name in network.parameters():
            tensors[f"adam.m.{name}"] = optimizer.m[name]
            tensors[f"adam.v.{name}"] = optimizer.v[name]
    header = HEADER.pack(
        MAGIC,
        VERSION,
        network.degree,
        FAMILY_TAGS[network.node_family],
        network.side_kernel,
        1 if optimizer is not None else 0,
        0,
        optimizer.step if optimizer is not None else 0,
        epoch,
        len(tensors),
    )
    return header + b"".join(_pack_tensor(name, value) for name, value in tensors.items())


def save_checkpoint(
    network: HedNetwork,
    path: Union[str, Path],
    optimizer: Optional[AdamState] = None,
    epoch: int = 0
) -> Path:
    """Write a checkpoint; optimizer state is optional"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(network, optimizer, epoch))
    logger.info(f"Saved checkpoint {path} (N={network.degree}, {network.node_family.value}, epoch {epoch})")
    return path


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, count: int, what: str) -> bytes:
        end = self.offset + count
        if end > len(self.data):
            raise CheckpointError(f"Truncated checkpoint {self.path}: unexpected end of file in {what}")
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size, what))


def read_checkpoint(path: Union[str, Path]) -> CheckpointContents:
    """
    Read a checkpoint including any optimizer state

    Raises:
        CheckpointError: missing file, wrong magic/version, truncation or
            inconsistent tensors
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Checkpoint not found: {path}")
    reader = _Reader(path.read_bytes(), path)

    magic, version, degree, family_tag, side_kernel, has_adam, _, step, epoch, count = HEADER.unpack(
        reader.take(HEADER.size, "header")
    )
    if magic != MAGIC:
        raise CheckpointError(f"Bad magic in {path}: {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"Unsupported version in {path}: {version} (expected {VERSION})")
    families = {tag: family for family, tag in FAMILY_TAGS.items()}
    if family_tag not in families:
        raise CheckpointError(f"Unknown node family tag in {path}: {family_tag}")

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_length,) = reader.unpack("<H", "tensor name")
        name = reader.take(name_length, "tensor name").decode("utf-8")
        (rank,) = reader.unpack("<B", f"rank of {name}")
        shape = reader.unpack(f"<{rank}I", f"shape of {name}")
        size = int(np.prod(shape)) if rank else 1
        data = reader.take(4 * size, f"data of {name}")
        tensors[name] = np.frombuffer(data, dtype="<f4").reshape(shape).astype(np.float32)
    if reader.offset != len(reader.data):
        raise CheckpointError(f"Trailing bytes in checkpoint {path}")

    try:
        network = HedNetwork(degree, families[family_tag], side_kernel)
        network.load_state_dict(tensors)
    except Exception as e:
        raise CheckpointError(f"Inconsistent tensors in {path}: {e}") from e

    optimizer = None
    if has_adam:
        names = list(network.parameters())
        missing = [n for n in names if f"adam.m.{n}" not in tensors or f"adam.v.{n}" not in tensors]
        if missing:
            raise CheckpointError(f"Checkpoint {path} lacks optimizer moments for {missing[0]}")
        optimizer = AdamState(
            m={n: tensors[f"adam.m.{n}"].copy() for n in names},
            v={n: tensors[f"adam.v.{n}"].copy() for n in names},
            step=step,
        )
    return CheckpointContents(network=network, optimizer=optimizer, epoch=epoch)


def load_checkpoint(
    path: Union[str, Path],
    expected_degree: Optional[int] = None,
    expected_family: Optional[NodeFamily] = None
) -> HedNetwork:
    """
    Load the network from a checkpoint

    Raises:
        CheckpointError: unreadable file, or degree / node family differing
            from the expected values
    """
    network = read_checkpoint(path).network
    if expected_degree is not None and network.degree != expected_degree:
        raise CheckpointError(
            f"Checkpoint {path}: degree N={network.degree} does not match expected N={expected_degree}"
        )
    if expected_family is not None and network.node_family != NodeFamily(expected_family):
        raise CheckpointError(
            f"Checkpoint {path}: node family {network.node_family.value} does not match "
            f"expected {NodeFamily(expected_family).value}"
        )
    return network
