"""Regions of kinematically reproducible motions for guided
learning from demonstration."""

from .poses import Pose

__all__ = ["Pose"]
__version__ = "0.1.0"
