import json

import numpy as np
import pytest

from netlump import Chain, InputError, StatePartition, max_lumpability
from netlump.formats import (load_chain, load_lumping, load_network,
                             load_state_partition, load_valuation,
                             relax_report_document, save_chain, save_lumping,
                             save_network, save_state_partition,
                             save_valuation)
from netlump.partition import Partition

from helpers import random_net, plant_scaled_copy


@pytest.fixture
def net():
    base = random_net(np.random.default_rng(0), (3, 6, 2), kind="leaky_relu",
                      alpha=0.01)
    return plant_scaled_copy(base, 1, 0, 5, 1.5)


def test_network_round_trip_is_exact(tmp_path, net):
    p = str(tmp_path / "net.json")
    save_network(net, p)
    back = load_network(p)
    assert back.widths == net.widths
    for a, b in zip(back.layers, net.layers):
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.bias, b.bias)
        assert a.activation == b.activation


def test_save_is_byte_deterministic(tmp_path, net):
    p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    save_network(net, p1)
    save_network(net, p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_network_document_shape(tmp_path):
    net = random_net(np.random.default_rng(1), (2, 3, 1))
    p = str(tmp_path / "net.json")
    save_network(net, p)
    doc = json.load(open(p))
    assert list(doc) == ["layers"]
    layer = doc["layers"][0]
    assert list(layer) == ["weights", "bias", "activation"]
    assert len(layer["weights"]) == 2 and len(layer["weights"][0]) == 3
    assert layer["activation"] == {"kind": "relu"}
    assert open(p).read().endswith("\n")


def test_network_loader_rejections(tmp_path):
    cases = [
        '{"layers": []}',
        '{"layers": [{"weights": [[1]], "bias": [0]}]}',
        '{"layers": [{"weights": [[1]], "bias": [0], '
        '"activation": {"kind": "relu"}, "extra": 1}]}',
        '{"layers": [{"weights": [[1], [1, 2]], "bias": [0], '
        '"activation": {"kind": "relu"}}]}',
        '{"layers": [{"weights": [[1]], "bias": [0], '
        '"activation": {"kind": "relu", "alpha": 0.1}}]}',
        '{"layers": [{"weights": [[1]], "bias": [0], '
        '"activation": {"kind": "leaky_relu"}}]}',
        '{"layers": [{"weights": [[1]], "bias": [0], '
        '"activation": {"kind": "softmax"}}]}',
        '{"layers": [{"weights": [[NaN]], "bias": [0], '
        '"activation": {"kind": "relu"}}]}',
        '{"layers": [{"weights": [["x"]], "bias": [0], '
        '"activation": {"kind": "relu"}}]}',
        '{"layers": [{"weights": [[1, 2]], "bias": [0], '
        '"activation": {"kind": "relu"}}]}',
        'not json',
    ]
    p = str(tmp_path / "bad.json")
    for text in cases:
        with open(p, "w") as f:
            f.write(text)
        with pytest.raises(InputError):
            load_network(p)
    with pytest.raises(InputError):
        load_network(str(tmp_path / "missing.json"))


def test_valuation_round_trip(tmp_path):
    p = str(tmp_path / "x.json")
    save_valuation(np.array([0.1, -2.5, 1e-17]), p)
    np.testing.assert_array_equal(load_valuation(p), [0.1, -2.5, 1e-17])
    with open(p, "w") as f:
        f.write('{"values": [1]}')
    with pytest.raises(InputError):
        load_valuation(p)


def test_chain_round_trip(tmp_path):
    rates = np.zeros((3, 3))
    rates[0, 1], rates[1, 2], rates[2, 0] = 0.25, 1.75, 3.5
    chain = Chain(3, rates, "ctmc")
    p = str(tmp_path / "chain.json")
    save_chain(chain, p)
    back = load_chain(p)
    assert back.n == 3 and back.mode == "ctmc"
    np.testing.assert_array_equal(back.rates, rates)
    doc = json.load(open(p))
    assert doc["edges"] == [[0, 1, 0.25], [1, 2, 1.75], [2, 0, 3.5]]


def test_chain_loader_rejections(tmp_path):
    p = str(tmp_path / "chain.json")
    cases = [
        '{"n": 2, "mode": "ctmc", "edges": [[0, 0, 1.0]]}',
        '{"n": 2, "mode": "ctmc", "edges": [[0, 1, 1.0], [0, 1, 2.0]]}',
        '{"n": 2, "mode": "ctmc", "edges": [[0, 2, 1.0]]}',
        '{"n": 2, "mode": "ctmc", "edges": [[0, 1, -1.0]]}',
        '{"n": 0, "mode": "ctmc", "edges": []}',
        '{"n": 2, "mode": "dtmc", "edges": []}',
        '{"n": 2, "mode": "ctmc", "edges": [[0, 1]]}',
        '{"n": 2, "mode": "ctmc"}',
    ]
    for text in cases:
        with open(p, "w") as f:
            f.write(text)
        with pytest.raises(InputError):
            load_chain(p)
    # a negative rate is fine in graph mode
    with open(p, "w") as f:
        f.write('{"n": 2, "mode": "graph", "edges": [[0, 1, -1.0]]}')
    assert load_chain(p).rates[0, 1] == -1.0


def test_lumping_round_trip(tmp_path, net):
    lump = max_lumpability(net)
    p = str(tmp_path / "lump.json")
    save_lumping(lump, p)
    back = load_lumping(p)
    assert back.mode == lump.mode
    assert tuple(back.partitions) == tuple(lump.partitions)
    for a, b in zip(back.scales, lump.scales):
        np.testing.assert_array_equal(a, b)


def test_lumping_document_is_zero_based_and_complete(tmp_path, net):
    p = str(tmp_path / "lump.json")
    save_lumping(max_lumpability(net), p)
    doc = json.load(open(p))
    assert len(doc["boundaries"]) == net.depth + 1
    first = doc["boundaries"][0]["blocks"]
    assert first[0]["members"] == [0]
    # partial coverage is rejected on load
    doc["boundaries"][1]["blocks"] = doc["boundaries"][1]["blocks"][1:]
    with open(p, "w") as f:
        json.dump(doc, f)
    with pytest.raises(InputError):
        load_lumping(p)


def test_state_partition_round_trip(tmp_path):
    sp = StatePartition(Partition(((0, 2), (1,))), np.array([1.0, 1.0, 0.5]))
    p = str(tmp_path / "part.json")
    save_state_partition(sp, p)
    back = load_state_partition(p)
    assert back.partition == sp.partition
    np.testing.assert_array_equal(back.scales, sp.scales)
    doc = json.load(open(p))
    assert doc["blocks"][0] == {"members": [0, 2], "scales": [1.0, 0.5]}


def test_relax_report_document_shape():
    from netlump import Elimination
    doc = relax_report_document(1, 2, [Elimination(1, 4, ((0, 0.5), (2, 1.5)),
                                                   1e-16)], None)
    assert doc["layer"] == 1 and doc["k_max"] == 2
    assert doc["eliminations"][0]["donors"] == [[0, 0.5], [2, 1.5]]
    assert doc["sign_condition"] is None
