"""
Shock detection network: numpy kernel, architecture, training and checkpoints
"""
from .hednet import HedNetwork, annsi_flag, annsl_localize, build_network
from .checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from .trainer import Trainer, f1_score, pixel_f1

__all__ = [
    'HedNetwork',
    'build_network',
    'annsi_flag',
    'annsl_localize',
    'load_checkpoint',
    'read_checkpoint',
    'save_checkpoint',
    'Trainer',
    'f1_score',
    'pixel_f1',
]
