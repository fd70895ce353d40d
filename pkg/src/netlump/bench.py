"""Synthetic networks with planted redundancy, and the degradation sweep.

gen_planted builds a random network and overwrites selected neurons so that
each is a known positive combination (or scaled copy) of earlier neurons in
the same layer; the construction is returned as ground truth.  The sweep
removes ground-truth neurons at increasing fractions of a layer and records
how much the network's argmax decisions degrade.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError
from .network import RELU, Activation, Layer, Network, forward
from .relax import Elimination, eliminate

PROPORTIONAL_KIND = "proportional"
COMBO_KIND = "combo"


@dataclass(frozen=True)
class PlantSpec:
    """What to plant: `count` targets in the layer at boundary `layer`,
    each a combination of `k` donors (combo) or a scaled copy of one donor
    (proportional), with coefficients from [coeff_lo, coeff_hi] or from the
    integer grid inside that range."""

    kind: str
    count: int
    layer: int = 1
    k: int = 2
    coeff_lo: float = 0.5
    coeff_hi: float = 1.5
    grid: bool = False


def _check_spec(widths: Sequence[int], spec: PlantSpec) -> None:
    depth = len(widths) - 1
    if depth < 2:
        raise InputError("planting needs at least two layers")
    if not 1 <= spec.layer <= depth - 1:
        raise InputError(f"plant layer {spec.layer} out of range 1..{depth - 1}")
    if spec.kind not in (PROPORTIONAL_KIND, COMBO_KIND):
        raise InputError(f"unknown plant kind {spec.kind!r}")
    width = widths[spec.layer]
    if not 0 <= spec.count < width:
        raise InputError(f"plant count must lie in 0..{width - 1}")
    donors_needed = spec.k if spec.kind == COMBO_KIND else 1
    if spec.kind == COMBO_KIND and spec.k < 2:
        raise InputError("combo planting needs k >= 2")
    if width - spec.count < donors_needed:
        raise InputError("not enough non-planted neurons to draw donors from")
    if not 0.0 < spec.coeff_lo <= spec.coeff_hi:
        raise InputError("coefficient range must satisfy 0 < lo <= hi")
    if spec.grid and math.floor(spec.coeff_hi) < max(1, math.ceil(spec.coeff_lo)):
        raise InputError("coefficient range contains no positive integers")


def _draw_coeffs(rng: np.random.Generator, spec: PlantSpec, k: int) -> np.ndarray:
    if spec.grid:
        lo = max(1, math.ceil(spec.coeff_lo))
        hi = math.floor(spec.coeff_hi)
        return rng.integers(lo, hi + 1, size=k).astype(np.float64)
    return rng.uniform(spec.coeff_lo, spec.coeff_hi, size=k)


def gen_planted(widths: Sequence[int], spec: PlantSpec,
                seed) -> tuple[Network, list[Elimination]]:
    """Random ReLU network with planted redundant neurons plus ground truth.

    The base network has i.i.d. uniform [-1, 1] weights and biases.  The
    planted targets are the last `count` indices of the chosen layer; donors
    are drawn from the non-planted indices, so ground-truth eliminations
    never conflict with each other.
    """
    _check_spec(widths, spec)
    rng = np.random.default_rng(seed)
    act = Activation(RELU)
    mats = []
    for m, n in zip(widths[:-1], widths[1:]):
        mats.append((rng.uniform(-1.0, 1.0, size=(m, n)),
                     rng.uniform(-1.0, 1.0, size=n)))
    w_l, b_l = mats[spec.layer - 1]
    width = widths[spec.layer]
    free = width - spec.count
    truth: list[Elimination] = []
    for t in range(free, width):
        if spec.kind == COMBO_KIND:
            donors = np.sort(rng.choice(free, size=spec.k, replace=False))
        else:
            donors = np.array([rng.integers(0, free)])
        coeffs = _draw_coeffs(rng, spec, len(donors))
        w_l[:, t] = w_l[:, donors] @ coeffs
        b_l[t] = b_l[donors] @ coeffs
        truth.append(Elimination(spec.layer, t,
                                 tuple(zip(donors.tolist(), coeffs.tolist())),
                                 0.0))
    net = Network(tuple(Layer(w, b, act) for w, b in mats))
    return net, truth


def argmax_agreement(a: np.ndarray, b: np.ndarray) -> float:
    """Fraction of rows whose largest component sits at the same index
    (ties resolve toward the smaller index on both sides)."""
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    return float(np.mean(np.argmax(a, axis=1) == np.argmax(b, axis=1)))


def max_deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


class AgreementMetrics(NamedTuple):
    k: int
    fraction: float
    seed: int
    agreement: float
    deviation: float


def degradation_sweep(widths: Sequence[int] = (16, 128, 10),
                      ks: Sequence[int] = (2, 3, 4),
                      fractions: Sequence[float] = (0.0, 0.1, 0.25, 0.5),
                      n_seeds: int = 10, samples: int = 256,
                      seed: int = 0) -> list[AgreementMetrics]:
    """Measure argmax degradation when ground-truth combinations are removed.

    For every (k, fraction, seed index) cell a fresh planted network is
    generated, all planted neurons are eliminated using the ground truth
    (no detection involved), and agreement plus maximum output deviation
    are measured on uniform [-1, 1] inputs.  Rows come back in (k,
    fraction, seed) iteration order.
    """
    if n_seeds < 1 or samples < 1:
        raise InputError("n_seeds and samples must be positive")
    plant_width = widths[1]
    rows: list[AgreementMetrics] = []
    for ki, k in enumerate(ks):
        for fi, fraction in enumerate(fractions):
            count = int(round(fraction * plant_width))
            for si in range(n_seeds):
                root = np.random.SeedSequence((seed, ki, fi, si))
                gen_seed, input_seed = root.spawn(2)
                spec = PlantSpec(COMBO_KIND, count, layer=1, k=k)
                net, truth = gen_planted(widths, spec, gen_seed)
                relaxed = eliminate(net, truth)
                rng = np.random.default_rng(input_seed)
                x = rng.uniform(-1.0, 1.0, size=(samples, widths[0]))
                out_a = forward(net, x)
                out_b = forward(relaxed, x)
                rows.append(AgreementMetrics(
                    k, float(fraction), si,
                    argmax_agreement(out_a, out_b),
                    max_deviation(out_a, out_b)))
    return rows


def write_sweep_csv(rows: list[AgreementMetrics], path: str) -> None:
    """Write sweep rows as CSV (fixed header, \\n line endings, floats in
    shortest round-trip form), so identical runs produce identical bytes."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["k", "fraction", "seed", "agreement", "deviation"])
        for r in rows:
            writer.writerow([r.k, repr(float(r.fraction)), r.seed,
                             repr(float(r.agreement)), repr(float(r.deviation))])
