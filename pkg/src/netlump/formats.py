"""On-disk document formats (JSON) and their strict loaders.

All indices on disk are 0-based.  Floats are written through Python's repr
(shortest round-trip form), documents are indented with two spaces, keys
appear in a fixed order, and every file ends with a newline — rerunning a
command on identical inputs produces byte-identical files.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .chains import Chain, StatePartition, require_valid_chain
from .errors import InputError
from .lumping import Lumping
from .network import (LEAKY_RELU, RELU, Activation, Layer, Network,
                      require_valid)
from .partition import Partition
from .quotient import ReductionReport
from .relax import Elimination, SignReport


def _load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e


def _dump_json(doc: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def _expect_keys(d: Any, required: set[str], optional: set[str], what: str) -> None:
    if not isinstance(d, dict):
        raise InputError(f"{what} must be an object")
    missing = required - d.keys()
    unknown = d.keys() - required - optional
    if missing:
        raise InputError(f"{what} is missing keys: {sorted(missing)}")
    if unknown:
        raise InputError(f"{what} has unknown keys: {sorted(unknown)}")


def _number(x: Any, what: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{what} must be a number, got {x!r}")
    return float(x)


def _index(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InputError(f"{what} must be an integer, got {x!r}")
    return x


def _matrix(x: Any, what: str) -> np.ndarray:
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise InputError(f"{what} must be a non-empty list of rows")
    ncol = len(x[0])
    if ncol == 0 or any(len(r) != ncol for r in x):
        raise InputError(f"{what} must be rectangular with at least one column")
    return np.array([[_number(v, what) for v in r] for r in x], dtype=np.float64)


def _vector(x: Any, what: str) -> np.ndarray:
    if not isinstance(x, list):
        raise InputError(f"{what} must be a list of numbers")
    return np.array([_number(v, what) for v in x], dtype=np.float64)


# -- networks ---------------------------------------------------------------

def _parse_activation(d: Any, what: str) -> Activation:
    _expect_keys(d, {"kind"}, {"alpha"}, what)
    kind = d["kind"]
    if kind == RELU:
        if "alpha" in d:
            raise InputError(f"{what}: relu takes no alpha")
        return Activation(RELU)
    if kind == LEAKY_RELU:
        if "alpha" not in d:
            raise InputError(f"{what}: leaky_relu requires alpha")
        return Activation(LEAKY_RELU, _number(d["alpha"], f"{what}.alpha"))
    raise InputError(f"{what}: unknown activation kind {kind!r}")


def load_network(path: str) -> Network:
    doc = _load_json(path)
    _expect_keys(doc, {"layers"}, set(), "network document")
    if not isinstance(doc["layers"], list) or not doc["layers"]:
        raise InputError("network document needs a non-empty layers list")
    layers = []
    for i, ld in enumerate(doc["layers"], start=1):
        what = f"layer {i}"
        _expect_keys(ld, {"weights", "bias", "activation"}, set(), what)
        layers.append(Layer(_matrix(ld["weights"], f"{what}.weights"),
                            _vector(ld["bias"], f"{what}.bias"),
                            _parse_activation(ld["activation"], f"{what}.activation")))
    net = Network(tuple(layers))
    require_valid(net)
    return net


def _activation_doc(act: Activation) -> dict:
    if act.kind == LEAKY_RELU:
        return {"kind": act.kind, "alpha": float(act.alpha)}
    return {"kind": act.kind}


def network_document(net: Network) -> dict:
    return {"layers": [{
        "weights": [[float(v) for v in row] for row in l.weights],
        "bias": [float(v) for v in l.bias],
        "activation": _activation_doc(l.activation),
    } for l in net.layers]}


def save_network(net: Network, path: str) -> None:
    _dump_json(network_document(net), path)


# -- valuations --------------------------------------------------------------

def load_valuation(path: str) -> np.ndarray:
    doc = _load_json(path)
    return _vector(doc, "valuation document")


def valuation_document(values: np.ndarray) -> list:
    return [float(v) for v in np.asarray(values).ravel()]


def save_valuation(values: np.ndarray, path: str) -> None:
    _dump_json(valuation_document(values), path)


# -- chains ------------------------------------------------------------------

def load_chain(path: str) -> Chain:
    doc = _load_json(path)
    _expect_keys(doc, {"n", "mode", "edges"}, set(), "chain document")
    n = _index(doc["n"], "n")
    if n < 1:
        raise InputError("n must be at least 1")
    mode = doc["mode"]
    if mode not in ("ctmc", "graph"):
        raise InputError(f"unknown chain mode {mode!r}")
    if not isinstance(doc["edges"], list):
        raise InputError("edges must be a list")
    rates = np.zeros((n, n))
    seen: set[tuple[int, int]] = set()
    for e in doc["edges"]:
        if not isinstance(e, list) or len(e) != 3:
            raise InputError(f"edge {e!r} must be [source, target, rate]")
        s = _index(e[0], "edge source")
        t = _index(e[1], "edge target")
        rate = _number(e[2], "edge rate")
        if not 0 <= s < n or not 0 <= t < n:
            raise InputError(f"edge ({s}, {t}) out of range for n={n}")
        if s == t:
            raise InputError(f"self-loop on state {s} is not allowed")
        if (s, t) in seen:
            raise InputError(f"duplicate edge ({s}, {t})")
        if mode == "ctmc" and rate < 0.0:
            raise InputError(f"negative rate on edge ({s}, {t}) in ctmc mode")
        seen.add((s, t))
        rates[s, t] = rate
    chain = Chain(n, rates, mode)
    require_valid_chain(chain)
    return chain


def chain_document(chain: Chain) -> dict:
    edges = []
    for s in range(chain.n):
        for t in range(chain.n):
            if s != t and chain.rates[s, t] != 0.0:
                edges.append([s, t, float(chain.rates[s, t])])
    return {"n": chain.n, "mode": chain.mode, "edges": edges}


def save_chain(chain: Chain, path: str) -> None:
    _dump_json(chain_document(chain), path)


# -- lumpings and state partitions -------------------------------------------

def _parse_block(d: Any, what: str) -> tuple[list[int], list[float]]:
    _expect_keys(d, {"members", "scales"}, set(), what)
    if not isinstance(d["members"], list) or not isinstance(d["scales"], list):
        raise InputError(f"{what}: members and scales must be lists")
    members = [_index(m, f"{what}.members") for m in d["members"]]
    scales = [_number(s, f"{what}.scales") for s in d["scales"]]
    if len(members) != len(scales):
        raise InputError(f"{what}: members and scales differ in length")
    if sorted(members) != members:
        raise InputError(f"{what}: members must be ascending")
    return members, scales


def _blocks_to_partition(blocks_doc: Any, what: str) -> tuple[Partition, np.ndarray]:
    if not isinstance(blocks_doc, list) or not blocks_doc:
        raise InputError(f"{what}: blocks must be a non-empty list")
    members_all: list[tuple[int, ...]] = []
    pairs: list[tuple[int, float]] = []
    for bd in blocks_doc:
        members, scales = _parse_block(bd, f"{what} block")
        members_all.append(tuple(members))
        pairs.extend(zip(members, scales))
    part = Partition(tuple(members_all))
    vec = np.ones(part.width)
    for m, s in pairs:
        vec[m] = s
    return part, vec


def load_lumping(path: str) -> Lumping:
    doc = _load_json(path)
    _expect_keys(doc, {"mode", "boundaries"}, set(), "lumping document")
    if not isinstance(doc["boundaries"], list) or not doc["boundaries"]:
        raise InputError("lumping document needs a boundaries list")
    parts, scales = [], []
    for i, bd in enumerate(doc["boundaries"]):
        _expect_keys(bd, {"blocks"}, set(), f"boundary {i}")
        p, s = _blocks_to_partition(bd["blocks"], f"boundary {i}")
        parts.append(p)
        scales.append(s)
    return Lumping(doc["mode"], tuple(parts), tuple(scales))


def lumping_document(lump: Lumping) -> dict:
    return {"mode": lump.mode, "boundaries": [
        {"blocks": [{"members": list(b), "scales": [float(s[i]) for i in b]}
                    for b in p.blocks]}
        for p, s in zip(lump.partitions, lump.scales)]}


def save_lumping(lump: Lumping, path: str) -> None:
    _dump_json(lumping_document(lump), path)


def load_state_partition(path: str) -> StatePartition:
    doc = _load_json(path)
    _expect_keys(doc, {"blocks"}, set(), "partition document")
    part, vec = _blocks_to_partition(doc["blocks"], "partition")
    return StatePartition(part, vec)


def state_partition_document(sp: StatePartition) -> dict:
    return {"blocks": [{"members": list(b),
                        "scales": [float(sp.scales[i]) for i in b]}
                       for b in sp.partition.blocks]}


def save_state_partition(sp: StatePartition, path: str) -> None:
    _dump_json(state_partition_document(sp), path)


# -- reports -----------------------------------------------------------------

def reduction_report_document(report: ReductionReport) -> dict:
    return {
        "mode": report.mode,
        "boundaries": [{"boundary": r.boundary, "neurons_before": r.before,
                        "neurons_after": r.after, "merged": r.merged}
                       for r in report.boundaries],
        "neurons_before": report.neurons_before,
        "neurons_after": report.neurons_after,
        "neurons_merged": report.neurons_merged,
        "parameters_before": report.parameters_before,
        "parameters_after": report.parameters_after,
        "detection_seconds": float(report.detection_seconds),
        "construction_seconds": float(report.construction_seconds),
    }


def save_reduction_report(report: ReductionReport, path: str) -> None:
    _dump_json(reduction_report_document(report), path)


def relax_report_document(layer: int, k_max: int, elims: list[Elimination],
                          sign: SignReport | None) -> dict:
    return {
        "layer": layer,
        "k_max": k_max,
        "eliminations": [{
            "neuron": e.neuron,
            "donors": [[v, float(c)] for v, c in e.donors],
            "residual": float(e.residual),
        } for e in elims],
        "sign_condition": None if sign is None else {
            "fraction": float(sign.fraction),
            "samples": sign.samples,
            "seed": sign.seed,
        },
    }


def save_relax_report(layer: int, k_max: int, elims: list[Elimination],
                      sign: SignReport | None, path: str) -> None:
    _dump_json(relax_report_document(layer, k_max, elims, sign), path)
