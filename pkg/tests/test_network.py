import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netlump import (Activation, InputError, Layer, Network, apply_activation,
                     forward, forward_layer, forward_trace, validate)

from helpers import random_net


def two_layer():
    return Network((
        Layer([[1.0, 2.0], [3.0, 4.0]], [1.0, -1.0], Activation("relu")),
        Layer([[1.0], [-1.0]], [0.5], Activation("relu")),
    ))


def test_forward_hand_computed():
    net = two_layer()
    # x @ W + b = [1+3+1, 2+4-1] = [5, 5]; second layer: 5 - 5 + 0.5
    np.testing.assert_array_equal(forward(net, [1.0, 1.0]), [0.5])


def test_relu_clips_negative_preactivations():
    net = Network((Layer([[1.0, -1.0]], [0.0, 0.0], Activation("relu")),))
    np.testing.assert_array_equal(forward(net, [2.0]), [2.0, 0.0])


def test_leaky_relu_values():
    act = Activation("leaky_relu", 0.1)
    np.testing.assert_allclose(apply_activation(act, np.array([-2.0, 3.0])),
                               [-0.2, 3.0])


def test_forward_layer_matches_manual():
    net = two_layer()
    x = np.array([0.5, -0.25])
    man = np.maximum(x @ net.layers[0].weights + net.layers[0].bias, 0.0)
    np.testing.assert_array_equal(forward_layer(net, 1, x), man)


def test_forward_layer_bad_index():
    net = two_layer()
    with pytest.raises(InputError):
        forward_layer(net, 0, [1.0, 1.0])
    with pytest.raises(InputError):
        forward_layer(net, 3, [1.0, 1.0])


def test_forward_width_mismatch():
    with pytest.raises(InputError):
        forward(two_layer(), [1.0, 2.0, 3.0])


def test_forward_trace_records_everything():
    rng = np.random.default_rng(0)
    net = random_net(rng, (3, 5, 4, 2))
    x = rng.uniform(-1, 1, 3)
    trace = forward_trace(net, x)
    assert len(trace.valuations) == 4
    assert len(trace.preactivations) == 3
    np.testing.assert_array_equal(trace.valuations[0], x)
    np.testing.assert_array_equal(
        trace.preactivation(1), x @ net.layers[0].weights + net.layers[0].bias)
    # the final valuation is the forward pass, bitwise
    np.testing.assert_array_equal(trace.output, forward(net, x))


def test_forward_composition_bitwise():
    rng = np.random.default_rng(1)
    net = random_net(rng, (4, 6, 5, 3), kind="leaky_relu", alpha=0.02)
    x = rng.uniform(-1, 1, 4)
    step = x
    for ell in range(1, net.depth + 1):
        step = forward_layer(net, ell, step)
    np.testing.assert_array_equal(step, forward(net, x))


def test_forward_deterministic():
    rng = np.random.default_rng(2)
    net = random_net(rng, (5, 9, 3))
    x = rng.uniform(-1, 1, (20, 5))
    np.testing.assert_array_equal(forward(net, x), forward(net, x))


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    net = random_net(rng, (4, 7, 3))
    xs = rng.uniform(-1, 1, (10, 4))
    batch = forward(net, xs)
    for i in range(10):
        np.testing.assert_allclose(batch[i], forward(net, xs[i]),
                                   rtol=1e-12, atol=1e-15)


# magnitudes kept in the normal float range: products with subnormals round
# in coarser quanta than one ulp of the result
finite_values = st.lists(
    st.one_of(st.just(0.0), st.floats(1e-6, 1e6), st.floats(-1e6, -1e-6)),
    min_size=1, max_size=8)


@given(finite_values, st.floats(1e-3, 1e3))
@settings(max_examples=150, deadline=None)
def test_positive_homogeneity_relu(values, c):
    x = np.array(values)
    lhs = apply_activation(Activation("relu"), c * x)
    rhs = c * apply_activation(Activation("relu"), x)
    np.testing.assert_array_equal(lhs, rhs)  # relu commutes with scaling exactly


@given(finite_values, st.floats(1e-3, 1e3), st.floats(1e-3, 1.0))
@settings(max_examples=150, deadline=None)
def test_positive_homogeneity_leaky(values, c, alpha):
    x = np.array(values)
    act = Activation("leaky_relu", alpha)
    lhs = apply_activation(act, c * x)
    rhs = c * apply_activation(act, x)
    # associativity of the two products may differ by one ulp
    assert np.all(np.abs(lhs - rhs) <= np.spacing(np.maximum(np.abs(lhs),
                                                             np.abs(rhs))))


def test_validate_accepts_good_net():
    assert validate(random_net(np.random.default_rng(4), (3, 4, 2))) == []


def test_validate_width_chain():
    net = Network((
        Layer(np.ones((2, 3)), np.zeros(3), Activation("relu")),
        Layer(np.ones((4, 2)), np.zeros(2), Activation("relu")),
    ))
    problems = validate(net)
    assert [v.layer for v in problems] == [2]
    assert "in width" in problems[0].message


def test_validate_bias_length():
    net = Network((Layer(np.ones((2, 3)), np.zeros(4), Activation("relu")),))
    assert any(v.layer == 1 and "bias" in v.message for v in validate(net))


def test_validate_non_finite():
    w = np.ones((2, 2))
    w[0, 1] = np.nan
    net = Network((Layer(w, np.zeros(2), Activation("relu")),))
    assert any("non-finite" in v.message for v in validate(net))


def test_validate_alpha():
    for alpha in (0.0, -0.5, None):
        net = Network((Layer(np.ones((2, 2)), np.zeros(2),
                             Activation("leaky_relu", alpha)),))
        assert any("alpha" in v.message for v in validate(net))


def test_validate_unknown_kind():
    net = Network((Layer(np.ones((1, 1)), np.zeros(1), Activation("tanh")),))
    assert any("activation kind" in v.message for v in validate(net))


def test_validate_empty_network():
    assert validate(Network(()))[0].layer == 0
