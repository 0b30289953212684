"""Python bindings for the pmn segmentation core."""

from ._pmn import (
    ConfigError,
    DimensionError,
    FormatError,
    InvariantError,
    NumericalError,
    ParameterError,
    f_measure,
    iou_loss,
    parameter_count,
    region_j,
    segment_scene,
    slic,
    synth,
    train_toy,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "FormatError",
    "InvariantError",
    "NumericalError",
    "ParameterError",
    "f_measure",
    "iou_loss",
    "parameter_count",
    "region_j",
    "segment_scene",
    "slic",
    "synth",
    "train_toy",
]
