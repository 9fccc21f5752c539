"""
Custom exceptions for the shock-capturing framework
"""
from typing import Any, Optional


class ShockCaptureError(Exception):
    """Base exception for all framework errors"""
    pass


class ConfigurationError(ShockCaptureError):
    """Invalid configuration"""
    pass


class ShapeError(ConfigurationError):
    """Tensor or field shapes do not match"""
    pass


class InvalidStateError(ShockCaptureError):
    """Non-physical conservative state (rho <= 0 or p <= 0)"""

    def __init__(self, message: str, states: Optional[Any] = None):
        super().__init__(message)
        self.states = states


class PositivityError(ShockCaptureError):
    """Positivity failure during a simulation"""

    def __init__(
        self,
        message: str,
        element: Optional[int] = None,
        time: Optional[float] = None,
        subcell: Optional[tuple] = None
    ):
        super().__init__(message)
        self.element = element
        self.time = time
        self.subcell = subcell


class SimulationError(ShockCaptureError):
    """Simulation driver error"""
    pass


class CheckpointError(ShockCaptureError):
    """Network checkpoint could not be read or does not match"""
    pass


class DatasetError(ShockCaptureError):
    """Dataset file error"""
    pass


class TrainingError(ShockCaptureError):
    """Training diverged or received inconsistent data"""
    pass


class StorageError(ShockCaptureError):
    """Storage operation error"""
    pass
