"""Pull dense ReLU stacks out of trained models.

Two source kinds are supported: a torch ``nn.Sequential`` saved with
``torch.save``, and a Keras model saved as ``.keras``.  Extraction walks
the model's layers in order, folds every dense layer together with the
activation that follows it, and refuses anything it cannot represent
faithfully — a conversion that silently changed semantics would poison
every downstream comparison.

Weights come out in the row = source neuron, column = target neuron
convention of the network document format (torch stores the transpose),
widened to float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ExportError(Exception):
    """The source model, or the requested slice of it, cannot be exported."""


OUTPUT_CAVEAT = (
    "the document format represents relu/leaky_relu layers only; a linear "
    "or softmax output would come out clamped, changing the network. "
    "Dropping a trailing softmax preserves argmax decisions, so for "
    "classifier tails shrink --layers to end at the previous layer and "
    "compare argmax downstream."
)

# keras serializes a Dense layer's built-in activation to one of these
# names; the string form of leaky_relu carries keras' default slope.
_KERAS_DENSE_ACTIVATIONS = {
    "relu": ("relu", None),
    "leaky_relu": ("leaky_relu", 0.2),
    "linear": (None, None),
    "softmax": ("softmax", None),
}


@dataclass
class DenseStep:
    """One dense layer plus its activation, with the source objects kept
    around so a checker can run the framework's own forward on them."""

    name: str
    weights: np.ndarray
    bias: np.ndarray
    activation: str | None
    alpha: float | None
    source_objects: list = field(default_factory=list)
    dtype: str = "float32"

    @property
    def width_in(self) -> int:
        return self.weights.shape[0]

    @property
    def width_out(self) -> int:
        return self.weights.shape[1]


def _fold(primitives) -> tuple[list[DenseStep], list[tuple[int, str]]]:
    """Fold a primitive stream into dense steps plus barrier records.

    A barrier is a layer the document cannot express (conv, flatten, ...).
    Barriers are positional — (number of dense steps before it, name) — so
    range selection can tell a skipped backbone from a break inside the
    requested slice.  Activations directly after a barrier belong to the
    unsupported region and are swallowed with it.
    """
    steps: list[DenseStep] = []
    barriers: list[tuple[int, str]] = []
    after_barrier = False
    for prim in primitives:
        if prim[0] == "dense":
            _, name, weights, bias, act, alpha, obj, dtype = prim
            steps.append(DenseStep(name, weights, bias, act, alpha, [obj],
                                   dtype))
            after_barrier = False
        elif prim[0] == "barrier":
            barriers.append((len(steps), prim[1]))
            after_barrier = True
        else:
            _, name, kind, alpha, obj = prim
            if after_barrier:
                continue
            if not steps:
                raise ExportError(
                    f"activation layer {name} has no dense layer before it")
            step = steps[-1]
            if step.activation is not None:
                raise ExportError(
                    f"layer {name} stacks a second activation onto {step.name}")
            step.activation = kind
            step.alpha = alpha
            step.source_objects.append(obj)
    return steps, barriers


def _torch_steps(path: str) -> tuple[list[DenseStep], list[tuple[int, str]]]:
    try:
        import torch
        from torch import nn
    except ImportError as exc:
        raise ExportError(
            "source kind 'torch' needs the torch package installed") from exc
    try:
        model = torch.load(path, map_location="cpu", weights_only=False)
    except FileNotFoundError as exc:
        raise ExportError(f"cannot read {path}") from exc
    except Exception as exc:
        raise ExportError(f"cannot load {path}: {exc}") from exc
    if not isinstance(model, nn.Sequential):
        raise ExportError(
            f"expected an nn.Sequential, got {type(model).__name__}")
    model.eval()
    primitives = []
    for idx, mod in enumerate(model):
        name = f"layer {idx} ({type(mod).__name__})"
        if isinstance(mod, nn.Linear):
            weight = mod.weight.detach().cpu().numpy()
            bias = (mod.bias.detach().cpu().numpy().astype(np.float64)
                    if mod.bias is not None
                    else np.zeros(weight.shape[0]))
            primitives.append(("dense", name,
                               weight.T.astype(np.float64), bias,
                               None, None, mod, str(weight.dtype)))
        elif isinstance(mod, nn.ReLU):
            primitives.append(("act", name, "relu", None, mod))
        elif isinstance(mod, nn.LeakyReLU):
            primitives.append(("act", name, "leaky_relu",
                               float(mod.negative_slope), mod))
        elif isinstance(mod, nn.Softmax):
            primitives.append(("act", name, "softmax", None, mod))
        elif isinstance(mod, (nn.Dropout, nn.Identity)):
            continue  # identity at inference time
        else:
            primitives.append(("barrier", name))
    return _fold(primitives)


def _keras_steps(path: str) -> tuple[list[DenseStep], list[tuple[int, str]]]:
    try:
        import keras
    except ImportError as exc:
        raise ExportError(
            "source kind 'keras' needs tensorflow/keras installed") from exc
    try:
        model = keras.saving.load_model(path)
    except FileNotFoundError as exc:
        raise ExportError(f"cannot read {path}") from exc
    except Exception as exc:
        raise ExportError(f"cannot load {path}: {exc}") from exc
    primitives = []
    for layer in model.layers:
        name = f"layer '{layer.name}' ({type(layer).__name__})"
        cls = type(layer).__name__
        if cls == "Dense":
            kernel = np.asarray(layer.kernel)
            act_name = keras.activations.serialize(layer.activation)
            if not isinstance(act_name, str):
                act_name = "a custom activation"
            act, alpha = _KERAS_DENSE_ACTIVATIONS.get(act_name,
                                                      (act_name, None))
            bias = (np.asarray(layer.bias).astype(np.float64)
                    if layer.bias is not None
                    else np.zeros(kernel.shape[1]))
            primitives.append(("dense", name, kernel.astype(np.float64),
                               bias, act, alpha, layer, kernel.dtype.name))
        elif cls == "ReLU":
            if layer.max_value is not None or layer.threshold != 0.0:
                primitives.append(("act", name,
                                   "relu with max_value/threshold set",
                                   None, layer))
            elif layer.negative_slope and layer.negative_slope > 0.0:
                primitives.append(("act", name, "leaky_relu",
                                   float(layer.negative_slope), layer))
            else:
                primitives.append(("act", name, "relu", None, layer))
        elif cls == "LeakyReLU":
            primitives.append(("act", name, "leaky_relu",
                               float(layer.negative_slope), layer))
        elif cls == "Softmax":
            primitives.append(("act", name, "softmax", None, layer))
        elif cls == "Activation":
            act_name = keras.activations.serialize(layer.activation)
            if not isinstance(act_name, str):
                act_name = "a custom activation"
            act, alpha = _KERAS_DENSE_ACTIVATIONS.get(act_name,
                                                      (act_name, None))
            if act is None:
                continue  # an explicit linear activation is a no-op
            primitives.append(("act", name, act, alpha, layer))
        elif cls in ("Dropout", "InputLayer"):
            continue
        else:
            primitives.append(("barrier", name))
    return _fold(primitives)


def load_dense_steps(
        source: str, kind: str) -> tuple[list[DenseStep],
                                         list[tuple[int, str]]]:
    """Return (dense steps, barriers) for the checkpoint at `source`."""
    if kind == "torch":
        return _torch_steps(source)
    if kind == "keras":
        return _keras_steps(source)
    raise ExportError(f"unknown source kind {kind!r}; expected torch or keras")


def parse_layer_range(text: str | None, n_steps: int) -> tuple[int, int]:
    """1-based inclusive A..B over the model's dense layers."""
    if text is None:
        return 1, n_steps
    parts = text.split("..")
    if len(parts) != 2:
        raise ExportError(f"bad layer range {text!r}; expected A..B")
    try:
        first, last = int(parts[0]), int(parts[1])
    except ValueError:
        raise ExportError(f"bad layer range {text!r}; expected A..B") from None
    if not 1 <= first <= last <= n_steps:
        raise ExportError(f"layer range {text} falls outside 1..{n_steps}")
    return first, last


def select_range(steps: list[DenseStep], layers: str | None,
                 barriers: list[tuple[int, str]] = (),
                 ) -> tuple[list[DenseStep], tuple[int, int]]:
    """Slice the dense-layer chain and insist the slice is representable.

    Barriers outside an explicitly requested range are tolerated (that is
    how a dense tail gets pulled out of a conv backbone); with no --layers
    given, any barrier is refused so a backbone never drops silently.
    """
    if not steps:
        raise ExportError("the model contains no dense layers")
    first, last = parse_layer_range(layers, len(steps))
    if barriers and layers is None:
        raise ExportError(
            f"{barriers[0][1]} is not a dense layer or an activation the "
            f"document can express; pass an explicit --layers range to "
            f"export just the dense sub-stack")
    for pos, name in barriers:
        if first <= pos < last:
            raise ExportError(f"{name} falls inside the selected layer "
                              f"range and cannot be exported")
    picked = steps[first - 1:last]
    for left, right in zip(picked, picked[1:]):
        if left.width_out != right.width_in:
            raise ExportError(
                f"{left.name} feeds {left.width_out} values but {right.name} "
                f"expects {right.width_in}; the slice is not a plain chain")
    for position, step in enumerate(picked):
        if step.activation in ("relu", "leaky_relu"):
            continue
        hint = (f" (ends the selected range; try --layers {first}..{last - 1})"
                if position == len(picked) - 1 and last - 1 >= first
                else "")
        if step.activation in (None, "softmax"):
            shown = "no activation" if step.activation is None else "softmax"
            raise ExportError(
                f"{step.name} has {shown}{hint}: {OUTPUT_CAVEAT}")
        raise ExportError(
            f"{step.name} has {step.activation}, which the document "
            f"format cannot express{hint}")
    return picked, (first, last)
