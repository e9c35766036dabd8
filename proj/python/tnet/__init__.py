"""Stacked T-Net dehazing: haze synthesis, model inference, training and metrics.

Images are float32 arrays of shape (H, W, 3) with values in [0, 1].
"""

import json as _json

from . import _core
from ._core import (
    TrainingDiverged,
    apply_haze,
    build_dataset,
    invert_haze,
    make_depth,
    procedural_scene,
    psnr,
    read_png,
    smooth_l1,
    ssim,
    transmission,
    write_png,
)

__all__ = [
    "Model",
    "TrainingDiverged",
    "apply_haze",
    "build_dataset",
    "config",
    "invert_haze",
    "make_depth",
    "procedural_scene",
    "psnr",
    "read_png",
    "smooth_l1",
    "ssim",
    "train",
    "transmission",
    "write_png",
]


def _overrides(overrides):
    return _json.dumps(overrides) if overrides else ""


def config(preset="desk", **overrides):
    """Flat run configuration for a preset, with keyword overrides applied."""
    return _json.loads(_core.config_json(preset, _overrides(overrides)))


class Model:
    """A stacked T-Net, freshly initialised or loaded from a checkpoint."""

    def __init__(self, preset="desk", seed=0, **overrides):
        self._m = _core.Model(preset, _overrides(overrides), seed)

    @classmethod
    def load(cls, checkpoint):
        obj = cls.__new__(cls)
        obj._m = _core.Model.load(str(checkpoint))
        return obj

    @property
    def config(self):
        return _json.loads(self._m.config_json)

    @property
    def stages(self):
        return self._m.stages

    @property
    def parameter_count(self):
        return self._m.parameter_count

    def parameter_names(self):
        return self._m.parameter_names()

    def dehaze(self, hazy, stages=0):
        """Final-stage output; stages=0 uses the trained stage count."""
        return self._m.dehaze(hazy, stages)

    def dehaze_stages(self, hazy, stages=0):
        return self._m.dehaze_stages(hazy, stages)


def train(data, out, preset="desk", resume=None, progress=None, **overrides):
    """Train on a synthesized dataset directory; returns a summary dict."""
    return _core.train(str(data), str(out), preset, _overrides(overrides), str(resume or ""), progress)
