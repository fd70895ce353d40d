"""Build the reduced network for a verified lumping.

The reduced layer between boundary partitions P_prev and P_cur has one
neuron per block of P_cur.  Its incoming weight from block U is

    scale(rep(U)) * sum over w in U of  W(w, rep(V)) / scale(w)

and its bias is the representative's bias.  For any lumping that passes
check_lumpability, the reduced network computes the representative's value
at every boundary, so the overall input/output map is preserved.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .lumping import Lumping, check_lumpability, max_lumpability
from .network import Layer, Network


def _rep(block: tuple[int, ...], rule: str) -> int:
    if rule == "min":
        return block[0]
    if rule == "max":
        return block[-1]
    raise InputError(f"unknown representative rule {rule!r}")


def reduce_network(net: Network, lump: Lumping, tol: float = 1e-9,
                   representative: str = "min") -> Network:
    """Merge each block into its representative neuron.

    The lumping is re-verified first; a lumping that does not hold for this
    network is rejected.  An identity lumping returns a network whose
    arrays are bitwise equal to the input's.  The representative rule only
    changes which member's weights are read; the reduced input/output map
    is the same for either rule.
    """
    violations = check_lumpability(net, lump, tol)
    if violations:
        head = ", ".join(str(v) for v in violations[:3])
        raise InputError(
            f"lumping does not hold: {len(violations)} violated equations ({head}...)")
    layers = []
    for ell in range(1, net.depth + 1):
        layer = net.layers[ell - 1]
        p_prev, p_cur = lump.partitions[ell - 1], lump.partitions[ell]
        s_prev = lump.scales[ell - 1]
        scaled = layer.weights / s_prev[:, None]
        rows = np.stack([scaled[list(b)].sum(axis=0) for b in p_prev.blocks])
        prev_reps = [_rep(b, representative) for b in p_prev.blocks]
        cur_reps = [_rep(b, representative) for b in p_cur.blocks]
        w_new = rows[:, cur_reps] * s_prev[prev_reps][:, None]
        b_new = layer.bias[cur_reps]
        layers.append(Layer(w_new, b_new, layer.activation))
    return Network(tuple(layers))


def parameter_count(net: Network) -> int:
    """Stored parameters: every weight entry plus every bias entry."""
    return sum(l.in_width * l.out_width + l.out_width for l in net.layers)


class BoundaryRow(NamedTuple):
    boundary: int
    before: int
    after: int

    @property
    def merged(self) -> int:
        return self.before - self.after


@dataclass(frozen=True)
class ReductionReport:
    """Sizes before/after a reduction plus the wall times spent."""

    mode: str
    boundaries: tuple[BoundaryRow, ...]
    parameters_before: int
    parameters_after: int
    detection_seconds: float
    construction_seconds: float

    @property
    def neurons_before(self) -> int:
        return sum(r.before for r in self.boundaries)

    @property
    def neurons_after(self) -> int:
        return sum(r.after for r in self.boundaries)

    @property
    def neurons_merged(self) -> int:
        return self.neurons_before - self.neurons_after


def reduction_report(before: Network, after: Network, lump: Lumping,
                     detection_seconds: float = 0.0,
                     construction_seconds: float = 0.0) -> ReductionReport:
    wb, wa = before.widths, after.widths
    if len(wb) != len(wa):
        raise InputError("reduced network has a different depth")
    rows = tuple(BoundaryRow(i, wb[i], wa[i]) for i in range(len(wb)))
    return ReductionReport(lump.mode, rows, parameter_count(before),
                           parameter_count(after),
                           detection_seconds, construction_seconds)


def detect_and_reduce(net: Network, mode: str = "proportional",
                      tol: float = 1e-9) -> tuple[Network, Lumping, ReductionReport]:
    """Convenience pipeline: find the coarsest lumping, build the quotient,
    and assemble the report with measured wall times."""
    t0 = time.perf_counter()
    lump = max_lumpability(net, mode, tol)
    t1 = time.perf_counter()
    reduced = reduce_network(net, lump, tol)
    t2 = time.perf_counter()
    return reduced, lump, reduction_report(net, reduced, lump, t1 - t0, t2 - t1)
