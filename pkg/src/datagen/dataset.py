"""
Training / validation dataset generation and dataset files

Dataset file layout (little-endian):

    magic        8s  b"SHOCKDAT"
    version      H
    degree       H
    node family  B   0 gauss, 1 equispaced
    reserved     B
    count        I
    class counts 14I (family 1..7, class 0 then class 1)
    X            count * (N+1)^2 float32
    Y            count * (N+1)^2 uint8
    classes      count uint8
    families     count uint8
"""
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.common.config import DataGenConfig
from src.common.exceptions import ConfigurationError, DatasetError
from src.common.logging import get_logger
from src.common.models import NodeFamily, SampleSet
from src.datagen.families import FAMILIES, SMOOTH_FAMILIES, draw_family
from src.datagen.labeling import label_edge_map
from src.datagen.sampling import normalize, sample_to_elements

MAGIC = b"SHOCKDAT"
VERSION = 1
HEADER = struct.Struct("<8sHHBBI14I")
FAMILY_TAGS = {NodeFamily.GAUSS: 0, NodeFamily.EQUISPACED: 1}
DRAW_BATCH = 64

# family -> (train class 0, train class 1, validation class 0, validation class 1)
DETECTION_COUNTS_N5 = {
    1: (20311, 0, 2046, 0),
    2: (66288, 0, 6638, 0),
    3: (6402, 0, 619, 0),
    4: (51, 37266, 6, 3758),
    5: (2377, 16297, 247, 1618),
    6: (102, 32308, 9, 3206),
    7: (59, 18551, 8, 1853),
}
DETECTION_COUNTS_N9 = {
    1: (20400, 0, 2388, 0),
    2: (66400, 0, 7289, 0),
    3: (6400, 0, 1195, 0),
    4: (40, 40023, 95, 6494),
    5: (2067, 15660, 251, 2184),
    6: (116, 31094, 21, 4206),
    7: (80, 18520, 2, 2938),
}
LOCALIZATION_COUNTS = {
    1: (21327, 0, 4253, 0),
    2: (69190, 0, 13769, 0),
    3: (6706, 0, 1345, 0),
    4: (4248, 35364, 861, 7115),
    5: (2281, 17239, 469, 3386),
    6: (80, 33858, 17, 6922),
    7: (253, 19454, 37, 3826),
}

TargetCounts = Dict[int, Tuple[int, int]]


def default_counts(table: str, degree: int) -> Dict[int, Tuple[int, int, int, int]]:
    """Reference per-family counts for the detection or localization network"""
    if table == "annsl":
        return LOCALIZATION_COUNTS
    return DETECTION_COUNTS_N5 if degree == 5 else DETECTION_COUNTS_N9


def split_targets(counts: Dict[int, Tuple[int, int, int, int]], scale: float, validation: bool) -> TargetCounts:
    """Scaled (class 0, class 1) targets of the training or validation split"""
    offset = 2 if validation else 0
    return {
        family: (int(round(values[offset] * scale)), int(round(values[offset + 1] * scale)))
        for family, values in counts.items()
    }


def validate_targets(targets: TargetCounts) -> None:
    """
    Raises:
        ConfigurationError: unknown family, negative count, or class 1
            requested from a smooth family
    """
    for family, (n0, n1) in targets.items():
        if family not in FAMILIES:
            raise ConfigurationError(f"Unknown function family {family}")
        if n0 < 0 or n1 < 0:
            raise ConfigurationError(f"Negative sample count for family {family}")
        if family in SMOOTH_FAMILIES and n1 > 0:
            raise ConfigurationError(f"Family {family} cannot produce class-1 samples")
    if sum(n0 + n1 for n0, n1 in targets.values()) == 0:
        raise ConfigurationError("Dataset targets are all zero")


@dataclass
class _Draw:
    X: np.ndarray
    Y: np.ndarray
    classes: np.ndarray


class DatasetBuilder:
    """
    Draws family samples until per-family class targets are met

    Every draw uses its own random stream seeded by (seed, split, family,
    draw index) and draws are consumed in index order, so the result does
    not depend on the number of worker threads. The class a family is meant
    to produce (class 0 for smooth families, class 1 otherwise) must reach
    its target; the other class is filled as draws allow.
    """

    def __init__(
        self,
        degree: int,
        node_family: NodeFamily,
        seed: int = 0,
        epsilon: float = 0.1,
        threads: int = 1,
        draw_limit_factor: int = 200,
        progress: bool = False
    ):
        self.degree = degree
        self.node_family = NodeFamily(node_family)
        self.seed = seed
        self.epsilon = epsilon
        self.threads = max(1, threads)
        self.draw_limit_factor = draw_limit_factor
        self.progress = progress
        self.logger = get_logger("DatasetBuilder")

    def draw(self, split: int, family: int, index: int) -> _Draw:
        """All element samples of one draw"""
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, split, family, index]))
        sample = draw_family(family, rng, self.degree)
        X, Y, classes = [], [], []
        for element in sample_to_elements(sample, self.degree, self.node_family):
            labels, cls = label_edge_map(sample, element, self.epsilon)
            X.append(normalize(element.values))
            Y.append(labels)
            classes.append(cls)
        return _Draw(X=np.array(X), Y=np.array(Y), classes=np.array(classes, dtype=np.uint8))

    def _family(self, split: int, family: int, n0: int, n1: int) -> Tuple[List[np.ndarray], ...]:
        needed = {0: n0, 1: n1}
        primary = 0 if family in SMOOTH_FAMILIES else 1
        limit = self.draw_limit_factor * max(n0 + n1, 1)
        X, Y, classes = [], [], []
        index = 0
        bar = tqdm(total=n0 + n1, desc=f"family {family}", disable=not self.progress, leave=False)

        executor = ThreadPoolExecutor(max_workers=self.threads) if self.threads > 1 else None
        try:
            while needed[primary] > 0:
                if index >= limit:
                    raise DatasetError(
                        f"Family {family}: class-{primary} target not reached after {index} draws "
                        f"({needed[primary]} missing)"
                    )
                batch = range(index, index + DRAW_BATCH)
                if executor is None:
                    draws = [self.draw(split, family, i) for i in batch]
                else:
                    draws = list(executor.map(lambda i: self.draw(split, family, i), batch))
                index += DRAW_BATCH
                for result in draws:
                    for x, y, cls in zip(result.X, result.Y, result.classes):
                        if needed[int(cls)] > 0:
                            needed[int(cls)] -= 1
                            X.append(x)
                            Y.append(y)
                            classes.append(cls)
                            bar.update(1)
                    if needed[primary] == 0:
                        break
        finally:
            bar.close()
            if executor is not None:
                executor.shutdown()

        secondary = 1 - primary
        if needed[secondary] > 0:
            self.logger.debug(f"Family {family}: {needed[secondary]} class-{secondary} sample(s) short of target")
        return X, Y, classes

    def build(self, targets: TargetCounts, split: int = 0) -> SampleSet:
        """
        Generate one split

        Raises:
            ConfigurationError: unreachable targets
            DatasetError: a primary target could not be met within the draw limit
        """
        validate_targets(targets)
        X, Y, classes, families = [], [], [], []
        for family in sorted(targets):
            n0, n1 = targets[family]
            if n0 + n1 == 0:
                continue
            fx, fy, fc = self._family(split, family, n0, n1)
            X.extend(fx)
            Y.extend(fy)
            classes.extend(fc)
            families.extend([family] * len(fc))
        n = self.degree + 1
        result = SampleSet(
            X=np.array(X, dtype=np.float32).reshape(-1, 1, n, n),
            Y=np.array(Y, dtype=np.uint8).reshape(-1, 1, n, n),
            classes=np.array(classes, dtype=np.uint8),
            families=np.array(families, dtype=np.uint8),
            degree=self.degree,
            node_family=self.node_family,
        )
        self.logger.info(
            f"Built split {split}: {len(result)} samples "
            f"({int(np.sum(result.classes == 0))} class 0, {int(np.sum(result.classes == 1))} class 1)"
        )
        return result


def build_dataset(
    config: DataGenConfig,
    threads: int = 1,
    targets: Optional[Dict[int, Tuple[int, int, int, int]]] = None,
    progress: bool = False
) -> Tuple[SampleSet, Optional[SampleSet]]:
    """Training and (optionally) validation split for a configuration"""
    counts = targets or default_counts(config.table, config.degree)
    builder = DatasetBuilder(
        degree=config.degree,
        node_family=config.node_family,
        seed=config.seed,
        epsilon=config.epsilon,
        threads=threads,
        draw_limit_factor=config.draw_limit_factor,
        progress=progress,
    )
    train = builder.build(split_targets(counts, config.scale, validation=False), split=0)
    validation = None
    if config.validation:
        validation = builder.build(split_targets(counts, config.scale, validation=True), split=1)
    return train, validation


def class_balance(samples: SampleSet) -> float:
    """|n0 - n1| / (n0 + n1)"""
    n1 = int(np.sum(samples.classes == 1))
    n0 = len(samples) - n1
    return abs(n0 - n1) / max(n0 + n1, 1)


# File I/O

def dataset_bytes(samples: SampleSet) -> bytes:
    counts = samples.family_counts()
    flat_counts = [counts[f][c] for f in FAMILIES for c in (0, 1)]
    header = HEADER.pack(
        MAGIC, VERSION, samples.degree, FAMILY_TAGS[NodeFamily(samples.node_family)], 0, len(samples), *flat_counts
    )
    return b"".join([
        header,
        np.ascontiguousarray(samples.X, dtype="<f4").tobytes(),
        np.ascontiguousarray(samples.Y, dtype=np.uint8).tobytes(),
        np.ascontiguousarray(samples.classes, dtype=np.uint8).tobytes(),
        np.ascontiguousarray(samples.families, dtype=np.uint8).tobytes(),
    ])


def write_dataset(samples: SampleSet, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dataset_bytes(samples))
    return path


def read_dataset(
    path: Union[str, Path],
    expected_degree: Optional[int] = None,
    expected_family: Optional[NodeFamily] = None
) -> SampleSet:
    """
    Raises:
        DatasetError: missing or malformed file, header/payload mismatch, or
            degree / node family differing from the expected values
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"Dataset not found: {path}")
    data = path.read_bytes()
    if len(data) < HEADER.size:
        raise DatasetError(f"Truncated dataset {path}: header incomplete")
    magic, version, degree, family_tag, _, count, *flat_counts = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DatasetError(f"Bad magic in {path}: {magic!r}")
    if version != VERSION:
        raise DatasetError(f"Unsupported dataset version in {path}: {version}")
    families_by_tag = {tag: family for family, tag in FAMILY_TAGS.items()}
    if family_tag not in families_by_tag:
        raise DatasetError(f"Unknown node family tag in {path}: {family_tag}")
    node_family = families_by_tag[family_tag]

    n = degree + 1
    pixels = count * n * n
    expected_size = HEADER.size + 4 * pixels + pixels + 2 * count
    if len(data) != expected_size:
        raise DatasetError(f"Dataset {path} has {len(data)} bytes, header implies {expected_size}")

    offset = HEADER.size
    X = np.frombuffer(data, dtype="<f4", count=pixels, offset=offset).reshape(count, 1, n, n).astype(np.float32)
    offset += 4 * pixels
    Y = np.frombuffer(data, dtype=np.uint8, count=pixels, offset=offset).reshape(count, 1, n, n).copy()
    offset += pixels
    classes = np.frombuffer(data, dtype=np.uint8, count=count, offset=offset).copy()
    offset += count
    families = np.frombuffer(data, dtype=np.uint8, count=count, offset=offset).copy()

    samples = SampleSet(X=X, Y=Y, classes=classes, families=families, degree=degree, node_family=node_family)
    counts = samples.family_counts()
    if [counts[f][c] for f in FAMILIES for c in (0, 1)] != list(flat_counts):
        raise DatasetError(f"Dataset {path}: per-family counts in header do not match payload")

    if expected_degree is not None and degree != expected_degree:
        raise DatasetError(f"Dataset {path}: degree N={degree} does not match expected N={expected_degree}")
    if expected_family is not None and node_family != NodeFamily(expected_family):
        raise DatasetError(
            f"Dataset {path}: node family {node_family.value} does not match expected {NodeFamily(expected_family).value}"
        )
    return samples


def dataset_summary(samples: SampleSet) -> pd.DataFrame:
    """Per-family class counts with a total row"""
    counts = samples.family_counts()
    frame = pd.DataFrame(
        [{'family': f, 'class_0': counts[f][0], 'class_1': counts[f][1]} for f in FAMILIES]
    ).set_index('family')
    frame.loc['total'] = frame.sum()
    return frame
