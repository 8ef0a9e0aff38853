from .base import Model
from .elliptic import EllipticModel
from .sir import SirModel, Trajectory

__all__ = ["Model", "EllipticModel", "SirModel", "Trajectory"]
