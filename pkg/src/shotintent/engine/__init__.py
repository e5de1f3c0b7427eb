"""Minimal training engine: tensors, taped gradients, layers, Adam."""
from .tensor import Tape, Tensor, check_finite
from .optim import Adam
from . import gradcheck, ops

__all__ = ["Tape", "Tensor", "Adam", "check_finite", "gradcheck", "ops"]
