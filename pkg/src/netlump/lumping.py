"""Merge-equivalence of hidden neurons: detection and verification.

Two hidden neurons of the same layer can be merged when their bias and
their per-block weighted input sums are proportional by a strictly positive
scale (exact mode: equal).  The input sum for a donor block is taken with
each donor weight divided by the donor's scale; this weighting is what
makes merged networks preserve the original outputs (plain unweighted sums
do not, see check_lumpability's plain_sums flag for the diagnostic).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .network import Network
from .partition import Partition, group_proportional, match_scale, zero_threshold

PROPORTIONAL = "proportional"
EXACT = "exact"


@dataclass(frozen=True, eq=False)
class Lumping:
    """Partitions of every boundary 0..k plus one positive scale per neuron.

    Boundaries 0 and k carry identity partitions; representatives have
    scale 1; in exact mode every scale is 1.
    """

    mode: str
    partitions: tuple[Partition, ...]
    scales: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "partitions", tuple(self.partitions))
        object.__setattr__(
            self, "scales",
            tuple(np.asarray(s, dtype=np.float64) for s in self.scales))

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(p.width for p in self.partitions)

    def merged_neurons(self) -> int:
        """Total count of non-representative neurons across boundaries."""
        return sum(p.width - p.n_blocks for p in self.partitions)

    @classmethod
    def identity(cls, net: Network, mode: str = PROPORTIONAL) -> "Lumping":
        parts = tuple(Partition.identity(w) for w in net.widths)
        scales = tuple(np.ones(w) for w in net.widths)
        return cls(mode, parts, scales)


class LumpingViolation(NamedTuple):
    """One failed merge equation: boundary layer, block index, the offending
    neuron pair, and the signature component (0 = bias, i >= 1 = donor
    block i-1 in block order)."""

    layer: int
    block: int
    neuron_a: int
    neuron_b: int
    component: int


def signatures(net: Network, layer_index: int, prev_partition: Partition,
               prev_scales: np.ndarray, plain_sums: bool = False) -> np.ndarray:
    """Signature matrix for the neurons at boundary `layer_index` (1..k).

    Column j is the signature of neuron j: its bias followed by one
    weighted input sum per block of the previous boundary (blocks in
    ascending-representative order).  Each weight is divided by its source
    neuron's scale unless plain_sums is set.
    """
    if not 1 <= layer_index <= net.depth:
        raise InputError(f"layer index {layer_index} out of range 1..{net.depth}")
    layer = net.layers[layer_index - 1]
    if prev_partition.width != layer.in_width:
        raise InputError(
            f"partition width {prev_partition.width} does not match layer "
            f"{layer_index} input width {layer.in_width}")
    prev_scales = np.asarray(prev_scales, dtype=np.float64)
    if prev_scales.shape != (layer.in_width,):
        raise InputError("scale vector length does not match layer input width")
    w = layer.weights if plain_sums else layer.weights / prev_scales[:, None]
    rows = [w[list(b)].sum(axis=0) for b in prev_partition.blocks]
    return np.vstack([layer.bias[None, :]] + [r[None, :] for r in rows])


def partition_layer(sigs: np.ndarray, mode: str = PROPORTIONAL,
                    tol: float = 1e-9) -> tuple[Partition, np.ndarray]:
    """Group one boundary's neurons by proportional (or equal) signatures.

    Returns the partition and the per-neuron scales (representatives get 1,
    a neuron whose signature is c times its representative's gets 1/c).
    """
    return group_proportional(sigs, mode, tol)


def max_lumpability(net: Network, mode: str = PROPORTIONAL,
                    tol: float = 1e-9) -> Lumping:
    """Coarsest merge structure, built top-down from the input boundary.

    Boundary 0 is fixed to the identity; each hidden boundary is grouped by
    the signatures induced by the previous boundary's blocks and scales;
    the output boundary is fixed to the identity.
    """
    if mode not in (PROPORTIONAL, EXACT):
        raise InputError(f"unknown mode {mode!r}")
    widths = net.widths
    parts = [Partition.identity(widths[0])]
    scales = [np.ones(widths[0])]
    for ell in range(1, net.depth):
        sigs = signatures(net, ell, parts[ell - 1], scales[ell - 1])
        p, s = partition_layer(sigs, mode, tol)
        parts.append(p)
        scales.append(s)
    parts.append(Partition.identity(widths[-1]))
    scales.append(np.ones(widths[-1]))
    return Lumping(mode, tuple(parts), tuple(scales))


def _check_structure(net: Network, lump: Lumping) -> None:
    """Reject structurally malformed lumpings (wrong shapes or invariants);
    these are input errors, distinct from failed merge equations."""
    k = net.depth
    if lump.mode not in (PROPORTIONAL, EXACT):
        raise InputError(f"unknown lumping mode {lump.mode!r}")
    if len(lump.partitions) != k + 1 or len(lump.scales) != k + 1:
        raise InputError(
            f"lumping has {len(lump.partitions)} boundaries, network needs {k + 1}")
    widths = net.widths
    for i, (p, s) in enumerate(zip(lump.partitions, lump.scales)):
        if p.width != widths[i]:
            raise InputError(
                f"boundary {i}: partition width {p.width} != layer width {widths[i]}")
        if s.shape != (widths[i],):
            raise InputError(f"boundary {i}: scale vector has wrong length")
        if not np.all(np.isfinite(s)) or not np.all(s > 0.0):
            raise InputError(f"boundary {i}: scales must be finite and positive")
        for b in p.blocks:
            if s[b[0]] != 1.0:
                raise InputError(
                    f"boundary {i}: representative {b[0]} must have scale 1")
        if lump.mode == EXACT and not np.all(s == 1.0):
            raise InputError(f"boundary {i}: exact mode requires all scales 1")
    if not lump.partitions[0].is_identity() or not lump.partitions[k].is_identity():
        raise InputError("input and output boundaries must carry identity partitions")


def check_lumpability(net: Network, lump: Lumping, tol: float = 1e-9,
                      plain_sums: bool = False) -> list[LumpingViolation]:
    """Verify every merge equation of a lumping; empty list means it holds.

    Each hidden boundary's neurons are compared blockwise against their
    representative: scale(v) * signature(v) must equal scale(rep) *
    signature(rep) componentwise within the relative tolerance.  With
    plain_sums the literal unweighted input sums are checked instead — a
    diagnostic only, since that condition does not guarantee output
    preservation.
    """
    _check_structure(net, lump)
    out: list[LumpingViolation] = []
    for ell in range(1, net.depth):
        part = lump.partitions[ell]
        sc = lump.scales[ell]
        sigs = signatures(net, ell, lump.partitions[ell - 1],
                          lump.scales[ell - 1], plain_sums=plain_sums)
        weighted = sigs * sc[None, :]
        mag = float(np.abs(weighted).max()) if weighted.size else 0.0
        thr = zero_threshold(tol, mag)
        for bi, block in enumerate(part.blocks):
            r = block[0]
            for t in block[1:]:
                a, b = weighted[:, t], weighted[:, r]
                diff = np.abs(a - b)
                pair_mag = max(float(np.abs(a).max()), float(np.abs(b).max()))
                bound = tol * (1.0 + pair_mag)
                # components that count as zero on both sides (layer-global
                # cut, the same rule detection uses) are consistent
                both_zero = (np.abs(a) <= thr) & (np.abs(b) <= thr)
                for comp in np.nonzero((diff > bound) & ~both_zero)[0]:
                    out.append(LumpingViolation(ell, bi, r, t, int(comp)))
    return out
