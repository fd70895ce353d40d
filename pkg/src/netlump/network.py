"""Feed-forward network model: dense layers with ReLU-family activations.

Conventions used throughout the package:

* weight matrices are stored with rows = source neurons, columns = target
  neurons, so a layer with input width m and output width n has an (m, n)
  weight matrix and an (n,) bias vector;
* a network with k layers has boundaries 0..k, boundary 0 being the input;
  layer ell (1-based, 1 <= ell <= k) maps the valuation at boundary ell-1
  to the valuation at boundary ell;
* all arithmetic is double precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InputError

RELU = "relu"
LEAKY_RELU = "leaky_relu"


@dataclass(frozen=True, eq=False)
class Activation:
    """Activation kind, either "relu" or "leaky_relu" (with slope alpha > 0)."""

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind == LEAKY_RELU and self.alpha is not None:
            object.__setattr__(self, "alpha", float(self.alpha))

    def __eq__(self, other):
        if not isinstance(other, Activation):
            return NotImplemented
        return self.kind == other.kind and self.alpha == other.alpha


def relu(x):
    return np.maximum(x, 0.0)


def apply_activation(act: Activation, x):
    """Apply an activation elementwise to a scalar or array.

    Both supported kinds are positively homogeneous: scaling the input by
    c > 0 scales the output by c.
    """
    x = np.asarray(x, dtype=np.float64)
    if act.kind == RELU:
        return relu(x)
    if act.kind == LEAKY_RELU:
        return np.where(x >= 0.0, x, act.alpha * x)
    raise InputError(f"unknown activation kind: {act.kind!r}")


@dataclass(frozen=True, eq=False)
class Layer:
    """One dense layer: weights (in_width, out_width), bias (out_width,)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: Activation

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        object.__setattr__(self, "bias", np.asarray(self.bias, dtype=np.float64))

    @property
    def in_width(self) -> int:
        return self.weights.shape[0]

    @property
    def out_width(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True, eq=False)
class Network:
    """A stack of layers; the input layer is implicit (boundary 0)."""

    layers: tuple[Layer, ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def depth(self) -> int:
        """Number of layers k."""
        return len(self.layers)

    @property
    def input_width(self) -> int:
        return self.layers[0].in_width

    @property
    def output_width(self) -> int:
        return self.layers[-1].out_width

    @property
    def widths(self) -> tuple[int, ...]:
        """Neuron counts at boundaries 0..k."""
        return (self.input_width,) + tuple(l.out_width for l in self.layers)


class Violation(NamedTuple):
    """A single structural problem found by validate(); layer is 1-based
    (0 refers to the network as a whole)."""

    layer: int
    message: str


def validate(net: Network) -> list[Violation]:
    """Check structural well-formedness; an empty list means valid.

    Checks: at least one layer, weight/bias shapes, width chaining between
    consecutive layers, finite entries, supported activation kinds and
    alpha > 0 for leaky_relu.
    """
    out: list[Violation] = []
    if net.depth == 0:
        return [Violation(0, "network has no layers")]
    for i, layer in enumerate(net.layers, start=1):
        if layer.weights.ndim != 2:
            out.append(Violation(i, f"weights must be 2-D, got ndim={layer.weights.ndim}"))
            continue
        if layer.bias.ndim != 1:
            out.append(Violation(i, f"bias must be 1-D, got ndim={layer.bias.ndim}"))
            continue
        if layer.bias.shape[0] != layer.out_width:
            out.append(Violation(
                i, f"bias length {layer.bias.shape[0]} != out width {layer.out_width}"))
        if layer.weights.shape[0] == 0 or layer.weights.shape[1] == 0:
            out.append(Violation(i, "layer has zero width"))
        if i > 1 and net.layers[i - 2].out_width != layer.in_width:
            out.append(Violation(
                i, f"in width {layer.in_width} != previous out width "
                   f"{net.layers[i - 2].out_width}"))
        if not np.all(np.isfinite(layer.weights)):
            out.append(Violation(i, "weights contain non-finite entries"))
        if not np.all(np.isfinite(layer.bias)):
            out.append(Violation(i, "bias contains non-finite entries"))
        act = layer.activation
        if act.kind not in (RELU, LEAKY_RELU):
            out.append(Violation(i, f"unsupported activation kind {act.kind!r}"))
        elif act.kind == LEAKY_RELU:
            if act.alpha is None or not np.isfinite(act.alpha) or act.alpha <= 0.0:
                out.append(Violation(i, f"leaky_relu needs alpha > 0, got {act.alpha!r}"))
    return out


def require_valid(net: Network) -> None:
    problems = validate(net)
    if problems:
        lines = "; ".join(f"layer {v.layer}: {v.message}" for v in problems)
        raise InputError(f"invalid network: {lines}")


def _check_input(net: Network, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != net.input_width:
        raise InputError(
            f"input width {values.shape[-1] if values.ndim else 0} does not match "
            f"network input width {net.input_width}")
    return values


def forward_layer(net: Network, layer_index: int, values) -> np.ndarray:
    """Apply layer `layer_index` (1-based) to the valuation at the boundary
    below it.  `values` may be a single vector or a batch (last axis = width)."""
    if not 1 <= layer_index <= net.depth:
        raise InputError(f"layer index {layer_index} out of range 1..{net.depth}")
    layer = net.layers[layer_index - 1]
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != layer.in_width:
        raise InputError(
            f"valuation width {values.shape[-1]} does not match layer "
            f"{layer_index} input width {layer.in_width}")
    return apply_activation(layer.activation, values @ layer.weights + layer.bias)


def forward(net: Network, values) -> np.ndarray:
    """Full forward pass, boundary 0 to boundary k."""
    x = _check_input(net, values)
    for layer in net.layers:
        x = apply_activation(layer.activation, x @ layer.weights + layer.bias)
    return x


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    """Every intermediate valuation of one forward pass.

    valuations[i] is the valuation at boundary i (0..k); preactivations[i-1]
    is the pre-activation vector of layer i (the weighted sums plus bias,
    before the activation is applied).
    """

    valuations: tuple[np.ndarray, ...]
    preactivations: tuple[np.ndarray, ...] = field(default=())

    @property
    def output(self) -> np.ndarray:
        return self.valuations[-1]

    def preactivation(self, layer_index: int) -> np.ndarray:
        return self.preactivations[layer_index - 1]


def forward_trace(net: Network, values) -> ForwardTrace:
    """Forward pass that records every boundary valuation and every
    pre-activation vector.  The final valuation equals forward(net, values)
    bitwise, since both run the same operations in the same order."""
    x = _check_input(net, values)
    vals = [x]
    pres = []
    for layer in net.layers:
        pre = x @ layer.weights + layer.bias
        pres.append(pre)
        x = apply_activation(layer.activation, pre)
        vals.append(x)
    return ForwardTrace(tuple(vals), tuple(pres))
