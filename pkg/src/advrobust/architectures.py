"""Desk-scale model family.

Classification: ``mlp`` and ``cnn``. Segmentation encoder-decoders differing
only in their skips: ``fcn-plain`` (none), ``fcn-skip`` (long-range
encoder-to-decoder concats) and ``fcn-dense`` (long-range plus short-range
concats inside every block).
"""

from __future__ import annotations

from .diffnet import (
    Conv2d,
    Dense,
    Flatten,
    GlobalAvgPool,
    MaxPool2,
    Network,
    ReLU,
    SkipConcat,
    Upsample2,
)

CLASSIFICATION = ("mlp", "cnn")
SEGMENTATION = ("fcn-plain", "fcn-skip", "fcn-dense")


def mlp(input_shape, n_classes, hidden=(64, 32)):
    d = 1
    for s in input_shape:
        d *= s
    layers = [Flatten()]
    for h in hidden:
        layers += [Dense(d, h), ReLU()]
        d = h
    layers.append(Dense(d, n_classes))
    return layers


def cnn(input_shape, n_classes, width=8):
    c = input_shape[-1]
    return [
        Conv2d(c, width), ReLU(), MaxPool2(),
        Conv2d(width, 2 * width), ReLU(), MaxPool2(),
        Conv2d(2 * width, 2 * width), ReLU(),
        GlobalAvgPool(),
        Dense(2 * width, n_classes),
    ]


class _Builder:
    """Appends layers while tracking indices and channel counts."""

    def __init__(self, channels):
        self.layers = []
        self.channels = channels

    def add(self, layer, channels=None):
        self.layers.append(layer)
        if channels is not None:
            self.channels = channels
        return len(self.layers) - 1

    def conv(self, c_out):
        self.add(Conv2d(self.channels, c_out), c_out)
        return self.add(ReLU())

    def skip(self, source, source_channels):
        return self.add(SkipConcat(source), self.channels + source_channels)


def fcn(input_shape, n_classes, width=8, long_skips=False, short_skips=False):
    b = _Builder(input_shape[-1])

    def block(c_out):
        if short_skips:
            start = len(b.layers) - 1
            c_in = b.channels
            b.conv(c_out // 2)
            b.skip(start, c_in)
            return b.conv(c_out)
        return b.conv(c_out)

    e1 = block(width)
    c1 = b.channels
    b.add(MaxPool2())
    e2 = block(2 * width)
    c2 = b.channels
    b.add(MaxPool2())
    block(2 * width)
    b.add(Upsample2())
    if long_skips:
        b.skip(e2, c2)
    block(2 * width)
    b.add(Upsample2())
    if long_skips:
        b.skip(e1, c1)
    block(width)
    b.add(Conv2d(b.channels, n_classes, kernel=1), n_classes)
    return b.layers


def build(arch: str, input_shape, n_classes: int, seed: int = 0, width: int = 8) -> Network:
    input_shape = tuple(input_shape)
    if arch == "mlp":
        return Network(mlp(input_shape, n_classes), input_shape, "classification", n_classes, seed=seed)
    if arch == "cnn":
        return Network(cnn(input_shape, n_classes, width), input_shape, "classification",
                       n_classes, seed=seed)
    flags = {
        "fcn-plain": (False, False),
        "fcn-skip": (True, False),
        "fcn-dense": (True, True),
    }
    if arch not in flags:
        raise ValueError(f"unknown architecture {arch!r}")
    long_skips, short_skips = flags[arch]
    layers = fcn(input_shape, n_classes, width, long_skips, short_skips)
    return Network(layers, input_shape, "segmentation", n_classes, seed=seed)
