"""Extraction-layer tests: what gets pulled out of a checkpoint, what is
refused, and how layer ranges are parsed.
"""

import numpy as np
import pytest
import torch

from netlump_exporter import (OUTPUT_CAVEAT, DenseStep, ExportError,
                              load_dense_steps, parse_layer_range,
                              select_range)


def _save_torch(tmp_path, model, name="m.pt"):
    path = str(tmp_path / name)
    torch.save(model, path)
    return path


def test_torch_weights_are_transposed(tmp_path):
    """torch keeps Linear weights as (out, in); the document wants
    (in, out), so the extracted matrix must be the exact transpose."""
    torch.manual_seed(0)
    model = torch.nn.Sequential(torch.nn.Linear(3, 2), torch.nn.ReLU())
    (step,), barriers = load_dense_steps(_save_torch(tmp_path, model),
                                         "torch")
    assert barriers == []
    weight = model[0].weight.detach().numpy().astype(np.float64)
    np.testing.assert_array_equal(step.weights, weight.T)
    np.testing.assert_array_equal(
        step.bias, model[0].bias.detach().numpy().astype(np.float64))
    assert step.activation == "relu"
    assert (step.width_in, step.width_out) == (3, 2)
    assert step.dtype == "float32"


def test_torch_missing_bias_becomes_zeros(tmp_path):
    model = torch.nn.Sequential(torch.nn.Linear(4, 3, bias=False),
                                torch.nn.ReLU())
    (step,), _ = load_dense_steps(_save_torch(tmp_path, model), "torch")
    np.testing.assert_array_equal(step.bias, np.zeros(3))


def test_torch_dropout_and_identity_are_skipped(tmp_path):
    model = torch.nn.Sequential(
        torch.nn.Linear(4, 4), torch.nn.ReLU(), torch.nn.Dropout(0.5),
        torch.nn.Identity(), torch.nn.Linear(4, 2), torch.nn.ReLU())
    steps, barriers = load_dense_steps(_save_torch(tmp_path, model), "torch")
    assert [s.name for s in steps] == ["layer 0 (Linear)", "layer 4 (Linear)"]
    assert barriers == []  # inference no-ops are skipped, not barriers


def test_torch_leaky_slope_is_captured(tmp_path):
    model = torch.nn.Sequential(torch.nn.Linear(2, 2),
                                torch.nn.LeakyReLU(0.01))
    (step,), _ = load_dense_steps(_save_torch(tmp_path, model), "torch")
    assert step.activation == "leaky_relu"
    assert step.alpha == 0.01


def test_conv_backbone_needs_an_explicit_range(tmp_path):
    """A conv backbone in front of a dense tail is fine once the caller
    names the slice; without --layers it must be refused by name, so a
    backbone never gets dropped silently."""
    torch.manual_seed(5)
    model = torch.nn.Sequential(
        torch.nn.Conv2d(1, 1, 3), torch.nn.ReLU(), torch.nn.Flatten(),
        torch.nn.Linear(9, 4), torch.nn.ReLU(),
        torch.nn.Linear(4, 2), torch.nn.ReLU())
    steps, barriers = load_dense_steps(_save_torch(tmp_path, model), "torch")
    assert [name for _, name in barriers] == ["layer 0 (Conv2d)",
                                              "layer 2 (Flatten)"]
    with pytest.raises(ExportError, match="Conv2d"):
        select_range(steps, None, barriers)
    picked, layer_range = select_range(steps, "1..2", barriers)
    assert [(s.width_in, s.width_out) for s in picked] == [(9, 4), (4, 2)]
    assert layer_range == (1, 2)


def test_conv_layer_inside_the_range_is_refused(tmp_path):
    torch.manual_seed(6)
    model = torch.nn.Sequential(
        torch.nn.Linear(4, 4), torch.nn.ReLU(),
        torch.nn.Conv2d(1, 1, 3), torch.nn.ReLU(),
        torch.nn.Linear(4, 2), torch.nn.ReLU())
    steps, barriers = load_dense_steps(_save_torch(tmp_path, model), "torch")
    with pytest.raises(ExportError, match="Conv2d"):
        select_range(steps, "1..2", barriers)
    picked, _ = select_range(steps, "2..2", barriers)
    assert [(s.width_in, s.width_out) for s in picked] == [(4, 2)]


def test_torch_non_sequential_is_refused(tmp_path):
    path = str(tmp_path / "m.pt")
    torch.save(torch.nn.Linear(2, 2), path)
    with pytest.raises(ExportError, match="Sequential"):
        load_dense_steps(path, "torch")


def test_double_activation_is_refused(tmp_path):
    model = torch.nn.Sequential(torch.nn.Linear(2, 2), torch.nn.ReLU(),
                                torch.nn.ReLU())
    with pytest.raises(ExportError, match="second activation"):
        load_dense_steps(_save_torch(tmp_path, model), "torch")


def test_activation_without_dense_is_refused(tmp_path):
    model = torch.nn.Sequential(torch.nn.ReLU(), torch.nn.Linear(2, 2),
                                torch.nn.ReLU())
    with pytest.raises(ExportError, match="no dense layer before"):
        load_dense_steps(_save_torch(tmp_path, model), "torch")


def test_missing_file_is_refused():
    with pytest.raises(ExportError, match="cannot read"):
        load_dense_steps("/nonexistent/m.pt", "torch")


def test_unknown_kind_is_refused():
    with pytest.raises(ExportError, match="unknown source kind"):
        load_dense_steps("whatever.onnx", "onnx")


# -- layer ranges and slicing -------------------------------------------------

def test_layer_range_parsing():
    assert parse_layer_range(None, 5) == (1, 5)
    assert parse_layer_range("2..4", 5) == (2, 4)
    assert parse_layer_range("3..3", 3) == (3, 3)
    for bad in ["2-4", "a..b", "..", "1..2..3", ""]:
        with pytest.raises(ExportError, match="expected A..B"):
            parse_layer_range(bad, 5)
    for outside in ["0..2", "3..2", "1..9"]:
        with pytest.raises(ExportError, match="outside"):
            parse_layer_range(outside, 5)


def _step(name, w_in, w_out, act="relu", alpha=None):
    return DenseStep(name, np.zeros((w_in, w_out)), np.zeros(w_out),
                     act, alpha)


def test_select_range_slices_one_based_inclusive():
    steps = [_step("a", 3, 4), _step("b", 4, 5), _step("c", 5, 2, act=None)]
    picked, layer_range = select_range(steps, "1..2")
    assert [s.name for s in picked] == ["a", "b"]
    assert layer_range == (1, 2)


def test_select_range_refuses_empty_models():
    with pytest.raises(ExportError, match="no dense layers"):
        select_range([], None)


def test_select_range_checks_the_width_chain():
    steps = [_step("a", 3, 4), _step("b", 5, 2)]
    with pytest.raises(ExportError, match="not a plain chain"):
        select_range(steps, None)


def test_linear_tail_is_refused_with_truncation_hint():
    steps = [_step("a", 3, 4), _step("b", 4, 2, act=None)]
    with pytest.raises(ExportError) as err:
        select_range(steps, None)
    msg = str(err.value)
    assert "no activation" in msg
    assert "--layers 1..1" in msg
    assert OUTPUT_CAVEAT in msg


def test_softmax_single_layer_gets_no_truncation_hint():
    with pytest.raises(ExportError) as err:
        select_range([_step("a", 3, 4, act="softmax")], None)
    assert "softmax" in str(err.value)
    assert "try --layers" not in str(err.value)


def test_linear_middle_layer_is_refused_without_hint():
    steps = [_step("a", 3, 4, act=None), _step("b", 4, 2)]
    with pytest.raises(ExportError) as err:
        select_range(steps, None)
    assert "try --layers" not in str(err.value)


def test_torch_softmax_tail_is_refused(tmp_path):
    model = torch.nn.Sequential(torch.nn.Linear(3, 4), torch.nn.ReLU(),
                                torch.nn.Linear(4, 2),
                                torch.nn.Softmax(dim=1))
    steps, _ = load_dense_steps(_save_torch(tmp_path, model), "torch")
    with pytest.raises(ExportError, match="softmax"):
        select_range(steps, None)
    picked, _ = select_range(steps, "1..1")
    assert len(picked) == 1


# -- keras specifics ----------------------------------------------------------

@pytest.fixture(scope="module")
def keras_models(tmp_path_factory):
    import keras

    keras.utils.set_random_seed(0)
    root = tmp_path_factory.mktemp("keras_models")

    mixed = keras.Sequential([
        keras.layers.Input((3,)),
        keras.layers.Dense(4),
        keras.layers.ReLU(negative_slope=0.3),
        keras.layers.Dense(3, activation="leaky_relu"),
        keras.layers.Dense(2),
        keras.layers.LeakyReLU(negative_slope=0.05),
    ])
    mixed.save(str(root / "mixed.keras"))

    clamped = keras.Sequential([
        keras.layers.Input((3,)),
        keras.layers.Dense(2),
        keras.layers.ReLU(max_value=6.0),
    ])
    clamped.save(str(root / "clamped.keras"))

    dropped = keras.Sequential([
        keras.layers.Input((5,)),
        keras.layers.Dense(4, activation="relu", use_bias=False),
        keras.layers.Dropout(0.25),
        keras.layers.Dense(2, activation="relu"),
    ])
    dropped.save(str(root / "dropped.keras"))

    tanh_head = keras.Sequential([
        keras.layers.Input((3,)),
        keras.layers.Dense(4, activation="tanh"),
        keras.layers.Dense(2, activation="relu"),
    ])
    tanh_head.save(str(root / "tanh.keras"))

    return {"mixed": str(root / "mixed.keras"),
            "clamped": str(root / "clamped.keras"),
            "dropped": str(root / "dropped.keras"),
            "tanh": str(root / "tanh.keras")}


def test_keras_kernel_is_taken_as_is(keras_models):
    import keras

    steps, _ = load_dense_steps(keras_models["mixed"], "keras")
    model = keras.saving.load_model(keras_models["mixed"])
    kernel = np.asarray(model.layers[0].kernel).astype(np.float64)
    np.testing.assert_array_equal(steps[0].weights, kernel)
    assert (steps[0].width_in, steps[0].width_out) == (3, 4)
    assert steps[0].dtype == "float32"


def test_keras_activation_variants(keras_models):
    steps, barriers = load_dense_steps(keras_models["mixed"], "keras")
    assert barriers == []
    assert [(s.activation, s.alpha) for s in steps] == [
        ("leaky_relu", 0.3),    # ReLU layer with a negative slope
        ("leaky_relu", 0.2),    # Dense(activation="leaky_relu") default
        ("leaky_relu", 0.05),   # explicit LeakyReLU layer
    ]


def test_keras_clamped_relu_is_refused(keras_models):
    steps, barriers = load_dense_steps(keras_models["clamped"], "keras")
    with pytest.raises(ExportError, match="max_value"):
        select_range(steps, None, barriers)


def test_keras_tanh_dense_refused_only_inside_the_range(keras_models):
    steps, barriers = load_dense_steps(keras_models["tanh"], "keras")
    with pytest.raises(ExportError, match="tanh"):
        select_range(steps, None, barriers)
    picked, _ = select_range(steps, "2..2", barriers)
    assert [(s.width_in, s.width_out) for s in picked] == [(4, 2)]


def test_keras_dropout_skipped_and_missing_bias_zeroed(keras_models):
    steps, _ = load_dense_steps(keras_models["dropped"], "keras")
    assert len(steps) == 2
    np.testing.assert_array_equal(steps[0].bias, np.zeros(4))
    assert steps[0].activation == "relu"
