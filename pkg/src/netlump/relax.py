"""Eliminate neurons that are positive linear combinations of earlier ones.

A hidden neuron t can be removed when its raw signature (bias followed by
its incoming weight column) is a combination sum_i c_i * signature(v_i) of
earlier neurons with strictly positive coefficients.  Its downstream weights
are then redistributed onto the donors: W_next(v_i, z) += c_i * W_next(t, z).
The rewrite is exact on an input when the donor pre-activations share one
sign, since relu(sum c_i y_i) = sum c_i relu(y_i) exactly then; on other
inputs the output may change, which sign_condition_rate quantifies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .errors import InputError
from .network import Layer, Network, forward_trace
from .partition import match_scale, zero_threshold


@dataclass(frozen=True, eq=True)
class Elimination:
    """One removed neuron: boundary layer, its index, the donor neurons with
    their positive coefficients, and the fit residual (max-norm)."""

    layer: int
    neuron: int
    donors: tuple[tuple[int, float], ...]
    residual: float

    def __post_init__(self):
        object.__setattr__(
            self, "donors",
            tuple(sorted((int(v), float(c)) for v, c in self.donors)))
        if not self.donors:
            raise InputError("an elimination needs at least one donor")
        if any(c <= 0.0 for _, c in self.donors):
            raise InputError("donor coefficients must be strictly positive")


@dataclass(frozen=True)
class SignReport:
    """Fraction of sampled inputs on which every elimination was exact."""

    fraction: float
    samples: int
    seed: int


def _raw_signatures(net: Network, layer_index: int) -> np.ndarray:
    if not 1 <= layer_index <= net.depth - 1:
        raise InputError(
            f"layer index {layer_index} out of range 1..{net.depth - 1} "
            "(output neurons cannot be eliminated)")
    layer = net.layers[layer_index - 1]
    return np.vstack([layer.bias[None, :], layer.weights])


def find_linear_dependencies(net: Network, layer_index: int, k_max: int,
                             tol: float = 1e-9) -> list[Elimination]:
    """Scan a hidden boundary for neurons expressible through earlier ones.

    Neurons are visited in ascending order.  For each candidate the donor
    pool is every earlier neuron not already eliminated.  A single
    proportional donor is preferred (first match wins); otherwise a
    non-negative least-squares fit over the whole pool is accepted when it
    uses at most k_max donors, every coefficient exceeds tol, and the
    max-norm residual is within the relative tolerance.  Donors are final:
    because the scan is ascending, every donor has already survived its own
    elimination check, so no donor is ever eliminated afterwards.
    """
    if k_max < 1:
        raise InputError("k_max must be at least 1")
    sigs = _raw_signatures(net, layer_index)
    width = sigs.shape[1]
    zthr = zero_threshold(tol, float(np.abs(sigs).max()) if sigs.size else 0.0)
    out: list[Elimination] = []
    eliminated: set[int] = set()
    for t in range(width):
        pool = [v for v in range(t) if v not in eliminated]
        if not pool:
            continue
        target = sigs[:, t]
        found = None
        for v in pool:
            c = match_scale(target, sigs[:, v], zthr, tol)
            if c is not None and c > tol:
                resid = float(np.abs(target - c * sigs[:, v]).max())
                found = Elimination(layer_index, t, ((v, c),), resid)
                break
        if found is None and k_max >= 2:
            a = sigs[:, pool]
            try:
                coef, _ = nnls(a, target)
            except RuntimeError:  # iteration limit on ill-conditioned pools
                coef = np.zeros(len(pool))
            coef[coef <= tol] = 0.0
            support = np.nonzero(coef)[0]
            if 1 <= support.size <= k_max:
                resid_vec = target - a @ coef
                fit_mag = float(np.abs(a @ coef).max())
                resid = float(np.abs(resid_vec).max())
                if resid <= tol * (1.0 + max(float(np.abs(target).max()), fit_mag)):
                    donors = tuple((pool[i], float(coef[i])) for i in support)
                    found = Elimination(layer_index, t, donors, resid)
        if found is not None:
            out.append(found)
            eliminated.add(t)
    return out


def eliminate(net: Network, eliminations: list[Elimination]) -> Network:
    """Apply eliminations: redistribute downstream weights onto the donors,
    then drop the eliminated neurons from both adjacent layers.

    A neuron may not appear both as a donor and as eliminated (at the same
    boundary); such lists are rejected.
    """
    if not eliminations:
        return net
    by_layer: dict[int, list[Elimination]] = {}
    for e in eliminations:
        by_layer.setdefault(e.layer, []).append(e)
    layers = list(net.layers)
    for ell, elims in sorted(by_layer.items()):
        if not 1 <= ell <= net.depth - 1:
            raise InputError(f"cannot eliminate at boundary {ell}")
        width = layers[ell - 1].out_width
        gone = {e.neuron for e in elims}
        if len(gone) != len(elims):
            raise InputError("duplicate eliminations for one neuron")
        donors = {v for e in elims for v, _ in e.donors}
        if donors & gone:
            raise InputError(
                f"neurons {sorted(donors & gone)} are both donor and eliminated")
        if any(not 0 <= e.neuron < width for e in elims):
            raise InputError("eliminated neuron index out of range")
        if any(not 0 <= v < width for v in donors):
            raise InputError("donor index out of range")
        here, below = layers[ell - 1], layers[ell]
        w_next = below.weights.copy()
        for e in sorted(elims, key=lambda e: e.neuron):
            for v, c in e.donors:
                w_next[v, :] += c * below.weights[e.neuron, :]
        keep = [i for i in range(width) if i not in gone]
        layers[ell - 1] = Layer(here.weights[:, keep], here.bias[keep],
                                here.activation)
        layers[ell] = Layer(w_next[keep, :], below.bias, below.activation)
    return Network(tuple(layers))


def sign_condition_rate(net: Network, eliminations: list[Elimination],
                        samples: int, seed: int) -> SignReport:
    """Estimate how often every elimination is exact on random inputs.

    Inputs are drawn uniformly from [-1, 1]; an elimination is exact on an
    input when its donors' pre-activations (in the original network) all
    have the same sign.  The fraction counts inputs on which that holds for
    every elimination at once.
    """
    if samples < 1:
        raise InputError("samples must be positive")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(samples, net.input_width))
    trace = forward_trace(net, x)
    ok = np.ones(samples, dtype=bool)
    for e in eliminations:
        pre = trace.preactivation(e.layer)  # (samples, width)
        cols = [v for v, _ in e.donors]
        y = pre[:, cols]
        slack = 1e-12 * (1.0 + np.abs(y).max(initial=0.0))
        ok &= np.all(y >= -slack, axis=1) | np.all(y <= slack, axis=1)
    return SignReport(float(ok.mean()), samples, int(seed))
