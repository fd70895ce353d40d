"""Shared builders and oracles for the test suite."""

import itertools

import numpy as np

from netlump import Activation, Layer, Lumping, Network, check_lumpability
from netlump.chains import _set_partitions
from netlump.lumping import signatures
from netlump.partition import Partition, match_scale, zero_threshold


def random_net(rng, widths, kind="relu", alpha=0.05):
    act = Activation(kind, alpha if kind == "leaky_relu" else None)
    layers = []
    for m, n in zip(widths[:-1], widths[1:]):
        layers.append(Layer(rng.uniform(-1.0, 1.0, (m, n)),
                            rng.uniform(-1.0, 1.0, n), act))
    return Network(tuple(layers))


def plant_scaled_copy(net, boundary, source, target, scale):
    """Overwrite `target` in the layer at `boundary` with scale * source
    (incoming column and bias), so the two neurons become mergeable."""
    layers = list(net.layers)
    l = layers[boundary - 1]
    w = l.weights.copy()
    b = l.bias.copy()
    w[:, target] = scale * w[:, source]
    b[target] = scale * b[source]
    layers[boundary - 1] = Layer(w, b, l.activation)
    return Network(tuple(layers))


def solve_lumping_scales(net, partitions, mode, tol=1e-9):
    """Given one Partition per boundary, derive scales by ratio propagation;
    None when some block has no consistent scale."""
    scales = [np.ones(partitions[0].width)]
    for ell in range(1, net.depth):
        sigs = signatures(net, ell, partitions[ell - 1], scales[ell - 1])
        zthr = zero_threshold(tol, float(np.abs(sigs).max()))
        vec = np.ones(partitions[ell].width)
        for block in partitions[ell].blocks:
            r = block[0]
            for t in block[1:]:
                c = match_scale(sigs[:, t], sigs[:, r], zthr, tol,
                                require_unit=(mode == "exact"))
                if c is None:
                    return None
                vec[t] = 1.0 / c
        scales.append(vec)
    scales.append(np.ones(partitions[-1].width))
    return scales


def enumerate_valid_lumpings(net, mode, tol=1e-9):
    """Every valid lumping of a network, by exhaustive per-boundary
    enumeration (small widths only)."""
    hidden = range(1, net.depth)
    choices = [list(_set_partitions(net.widths[b])) for b in hidden]
    ident_in = Partition.identity(net.input_width)
    ident_out = Partition.identity(net.output_width)
    out = []
    for combo in itertools.product(*choices):
        parts = (ident_in,) + tuple(combo) + (ident_out,)
        scales = solve_lumping_scales(net, parts, mode, tol)
        if scales is None:
            continue
        lump = Lumping(mode, parts, tuple(scales))
        if not check_lumpability(net, lump, tol):
            out.append(lump)
    return out


def coarser_or_equal(a, b):
    """True when lumping a is at least as coarse as b at every boundary."""
    return all(pb.refines(pa) for pa, pb in zip(a.partitions, b.partitions))


def random_lumpable_chain(rng, n, mode="proportional"):
    """Random ctmc-mode chain built around a random planted partition, so a
    non-trivial lumping is guaranteed to exist."""
    n_blocks = int(rng.integers(1, n + 1))
    labels = rng.integers(0, n_blocks, size=n)
    labels[:n_blocks] = np.arange(n_blocks)  # every block non-empty
    blocks = [tuple(np.flatnonzero(labels == b)) for b in range(n_blocks)]
    rho = np.ones(n) if mode == "exact" else rng.uniform(0.5, 2.0, size=n)
    for b in blocks:
        rho[b[0]] = 1.0
    rates = np.zeros((n, n))
    for bi, src in enumerate(blocks):
        for bj, dst in enumerate(blocks):
            if bi == bj and len(dst) == 1:
                continue  # a singleton cannot receive from itself
            total = float(rng.uniform(0.0, 3.0)) * (rng.random() < 0.7)
            for v in dst:
                donors = [u for u in src if u != v]
                if not donors:
                    continue
                share = rng.dirichlet(np.ones(len(donors)))
                rates[donors, v] += share * total / rho[v]
    np.fill_diagonal(rates, 0.0)
    return rates
