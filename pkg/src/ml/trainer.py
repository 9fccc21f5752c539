"""
Trainer - mini-batch Adam training of the shock network

Records per-epoch history, evaluates pixel F1 on the validation set and can
resume from a checkpoint's optimizer state.
"""
import time
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.metrics import f1_score as sklearn_f1
from tqdm import tqdm

from src.common.config import TrainConfig
from src.common.exceptions import ShapeError, TrainingError
from src.common.logging import get_logger
from src.common.models import SampleSet, TrainingRecord
from src.ml.hednet import HedNetwork, predict_maps
from src.ml.nnkernel import AdamState, adam_update, loss_deep_supervision

EVAL_CHUNK = 1024


def pixel_f1(labels: np.ndarray, predictions: np.ndarray) -> float:
    """
    2 TP / (2 TP + FP + FN) over all pixels

    No positives in labels and predictions gives 1.0.
    """
    return float(sklearn_f1(
        np.asarray(labels).reshape(-1).astype(np.uint8),
        np.asarray(predictions).reshape(-1).astype(np.uint8),
        zero_division=1.0,
    ))


def f1_score(network: HedNetwork, dataset: SampleSet, pixel_threshold: float = 0.5, threads: int = 1) -> float:
    """Pixel F1 of the thresholded averaged output map on a dataset"""
    maps = predict_maps(network, dataset.X, threads) >= pixel_threshold
    return pixel_f1(dataset.Y[:, 0], maps)


def check_dataset(network: HedNetwork, dataset: SampleSet, name: str) -> None:
    """
    Raises:
        ShapeError: empty dataset or degree mismatch
    """
    if len(dataset) == 0:
        raise ShapeError(f"The {name} set is empty")
    if dataset.degree != network.degree:
        raise ShapeError(f"The {name} set has degree N={dataset.degree}, network N={network.degree}")


class Trainer:
    """
    Mini-batch training with a stepped learning-rate schedule

    Features:
    - Adam with bias correction, state resumable from checkpoints
    - Deep-supervision loss over six side outputs and the fused map
    - Per-epoch validation loss and pixel F1
    - CSV history
    """

    def __init__(
        self,
        network: HedNetwork,
        config: TrainConfig,
        optimizer: Optional[AdamState] = None,
        start_epoch: int = 0,
        threads: int = 1,
        progress: bool = False
    ):
        """
        Initialize Trainer

        Args:
            network: network to train in place
            config: batch size, schedule, loss and optimizer settings
            optimizer: Adam state to resume from
            start_epoch: last completed epoch of a resumed run
            threads: worker threads for evaluation
            progress: show a tqdm bar over epochs
        """
        self.network = network
        self.config = config
        self.optimizer = optimizer or AdamState.for_parameters(
            network.parameters(), config.beta1, config.beta2, config.adam_eps
        )
        self.epoch = start_epoch
        self.threads = threads
        self.progress = progress
        self.history: List[TrainingRecord] = []
        self.logger = get_logger("Trainer")

    def evaluate(self, dataset: SampleSet) -> Tuple[float, float]:
        """
        Infer-mode loss and pixel F1 of a dataset

        Returns:
            (loss averaged over samples, F1)
        """
        total = 0.0
        predictions = []
        for start in range(0, len(dataset), EVAL_CHUNK):
            x = dataset.X[start:start + EVAL_CHUNK]
            y = dataset.Y[start:start + EVAL_CHUNK]
            output = self.network.forward(x, mode="infer")
            loss, _ = loss_deep_supervision(
                output.probabilities, y, self.config.lam, self.config.loss_convention
            )
            total += loss * len(x)
            predictions.append(output.average[:, 0] >= self.config.pixel_threshold)
        return total / len(dataset), pixel_f1(dataset.Y[:, 0], np.concatenate(predictions))

    def train_epoch(self, dataset: SampleSet, epoch: int, lr: float) -> float:
        """
        One pass over shuffled mini-batches; returns the mean batch loss

        Raises:
            TrainingError: non-finite loss
        """
        rng = np.random.default_rng(np.random.SeedSequence([self.config.seed, epoch]))
        order = rng.permutation(len(dataset))
        size = self.config.batch_size
        params = self.network.parameters()
        losses = []
        for step, start in enumerate(range(0, len(order), size)):
            index = order[start:start + size]
            if index.size < 2:
                continue
            loss, grads = self.network.loss_and_gradients(
                dataset.X[index],
                dataset.Y[index],
                lam=self.config.lam,
                convention=self.config.loss_convention,
                update_stats=True,
            )
            if not np.isfinite(loss):
                raise TrainingError(
                    f"Non-finite loss {loss} at epoch {epoch}, batch {step}, "
                    f"optimizer step {self.optimizer.step + 1}, lr {lr}"
                )
            adam_update(params, grads, self.optimizer, lr)
            losses.append(loss)
        if not losses:
            raise TrainingError("Training set yields no mini-batch of at least 2 samples")
        return float(np.mean(losses))

    def train(
        self,
        train_set: SampleSet,
        validation_set: Optional[SampleSet] = None,
        epochs: Optional[int] = None
    ) -> List[TrainingRecord]:
        """
        Train for `epochs` epochs after the last completed one

        Raises:
            ShapeError: empty datasets or degree mismatch
            TrainingError: non-finite loss
        """
        check_dataset(self.network, train_set, "training")
        if validation_set is not None:
            check_dataset(self.network, validation_set, "validation")
        epochs = self.config.epochs if epochs is None else epochs

        first = self.epoch + 1
        self.logger.info(
            f"Training N={self.network.degree} {self.network.node_family.value} network on "
            f"{len(train_set)} samples, epochs {first}-{self.epoch + epochs}"
        )
        for epoch in tqdm(range(first, first + epochs), desc="epochs", disable=not self.progress):
            lr = self.config.learning_rate_at(epoch)
            started = time.time()
            train_loss = self.train_epoch(train_set, epoch, lr)
            if validation_set is not None:
                val_loss, val_f1 = self.evaluate(validation_set)
            else:
                val_loss, val_f1 = float('nan'), float('nan')
            self.epoch = epoch
            record = TrainingRecord(epoch=epoch, lr=lr, train_loss=train_loss, val_loss=val_loss, val_f1=val_f1)
            self.history.append(record)
            self.logger.info(
                f"Epoch {epoch}: lr={lr:.6g} train_loss={train_loss:.6f} "
                f"val_loss={val_loss:.6f} val_f1={val_f1:.4f} ({time.time() - started:.1f}s)"
            )
        return self.history

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [vars(r) for r in self.history],
            columns=['epoch', 'lr', 'train_loss', 'val_loss', 'val_f1'],
        )

    def save_history(self, path: Union[str, Path]) -> Path:
        """Write (append to an existing file on resume) the per-epoch CSV history"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = self.history_frame()
        if path.exists() and self.history and self.history[0].epoch > 1:
            previous = pd.read_csv(path)
            frame = pd.concat([previous[previous['epoch'] < self.history[0].epoch], frame], ignore_index=True)
        frame.to_csv(path, index=False)
        return path
