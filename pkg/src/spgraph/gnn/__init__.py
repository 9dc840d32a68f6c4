"""Trainable graph classifiers with hand-written reverse-mode gradients."""

from .batch import Batch, as_batch, make_batch
from .layers import ChebConv, Dense, SpatialConv
from .model import (Model, ModelConfig, accuracy, backward, cross_entropy, cross_entropy_grad,
                    forward, loss_and_grads, softmax)
from .optim import Adam
from .train import (MetricRow, TrainConfig, evaluate, gradient_check, load_model, read_metrics,
                    save_model, train, write_metrics)

__all__ = [
    "Adam", "Batch", "ChebConv", "Dense", "MetricRow", "Model", "ModelConfig", "SpatialConv",
    "TrainConfig", "accuracy", "as_batch", "backward", "cross_entropy", "cross_entropy_grad",
    "evaluate", "forward", "gradient_check", "load_model", "loss_and_grads", "make_batch",
    "read_metrics", "save_model", "softmax", "train", "write_metrics",
]
