"""Lumping of continuous-time Markov chains and labelled graphs.

States u, t in one block must have proportional incoming class sums:
scale(u) * (sum of edge rates into u from block B) must equal
scale(t) * (the same sum into t), for every block B.  Scales are strictly
positive; exact mode forces them all to 1.  Sums run over edge rates only
(self-loops do not exist in the document format and ctmc diagonals are
derived, never stored), so the same definitions serve both modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import InputError, InternalCheckError
from .partition import (Partition, group_proportional, match_scale,
                        zero_threshold)

CTMC = "ctmc"
GRAPH = "graph"


@dataclass(frozen=True, eq=False)
class Chain:
    """n states plus an (n, n) matrix of edge rates with zero diagonal.

    In ctmc mode the rates are the off-diagonal entries of the generator;
    the diagonal is derived as the negated row sum when needed.  In graph
    mode the rates are arbitrary finite edge labels.
    """

    n: int
    rates: np.ndarray
    mode: str = CTMC

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "rates", np.asarray(self.rates, dtype=np.float64))

    def generator(self) -> np.ndarray:
        """Full generator matrix (ctmc mode): diagonal = -(row sum)."""
        if self.mode != CTMC:
            raise InputError("generator() is only defined in ctmc mode")
        q = self.rates.copy()
        np.fill_diagonal(q, 0.0)
        np.fill_diagonal(q, -q.sum(axis=1))
        return q


class ChainViolation(NamedTuple):
    """A failed proportionality equation: block index, the state pair, and
    the donor-block index of the offending class sum."""

    block: int
    state_a: int
    state_b: int
    donor_block: int


def validate_chain(chain: Chain) -> list[str]:
    """Structural checks; an empty list means the chain is well-formed."""
    out = []
    if chain.n < 1:
        out.append("a chain needs at least one state")
        return out
    if chain.rates.shape != (chain.n, chain.n):
        out.append(f"rate matrix shape {chain.rates.shape} != ({chain.n}, {chain.n})")
        return out
    if chain.mode not in (CTMC, GRAPH):
        out.append(f"unknown mode {chain.mode!r}")
    if not np.all(np.isfinite(chain.rates)):
        out.append("rates contain non-finite entries")
        return out
    if np.any(np.diagonal(chain.rates) != 0.0):
        out.append("self-loop rates are not allowed (diagonal must be zero)")
    if chain.mode == CTMC and np.any(chain.rates < 0.0):
        out.append("ctmc mode requires non-negative edge rates")
    return out


def require_valid_chain(chain: Chain) -> None:
    problems = validate_chain(chain)
    if problems:
        raise InputError("invalid chain: " + "; ".join(problems))


@dataclass(frozen=True, eq=False)
class StatePartition:
    """A partition of the states together with one positive scale each."""

    partition: Partition
    scales: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scales",
                           np.asarray(self.scales, dtype=np.float64))

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return self.partition.blocks


def class_sums(chain: Chain, partition: Partition) -> np.ndarray:
    """Incoming class-sum matrix: entry (B, v) sums the edge rates into
    state v from the members of block B."""
    sums = np.zeros((partition.n_blocks, chain.n))
    for bi, block in enumerate(partition.blocks):
        sums[bi] = chain.rates[list(block), :].sum(axis=0)
    return sums


def _check_partition_structure(chain: Chain, sp: StatePartition) -> None:
    if sp.partition.width != chain.n:
        raise InputError(
            f"partition covers {sp.partition.width} states, chain has {chain.n}")
    if sp.scales.shape != (chain.n,):
        raise InputError("scale vector length does not match state count")
    if not np.all(np.isfinite(sp.scales)) or not np.all(sp.scales > 0.0):
        raise InputError("scales must be finite and positive")


def check_lumping(chain: Chain, sp: StatePartition,
                  tol: float = 1e-9) -> list[ChainViolation]:
    """Verify the proportionality equations; empty list means they hold.

    Any positive scale vector is admissible here (scales need not be 1 at
    representatives); with all scales 1 this is the plain exact-lumpability
    check.
    """
    require_valid_chain(chain)
    _check_partition_structure(chain, sp)
    sums = class_sums(chain, sp.partition)
    weighted = sums * sp.scales[None, :]
    mag = float(np.abs(weighted).max()) if weighted.size else 0.0
    thr = zero_threshold(tol, mag)
    out: list[ChainViolation] = []
    for bi, block in enumerate(sp.partition.blocks):
        r = block[0]
        for t in block[1:]:
            a, b = weighted[:, t], weighted[:, r]
            diff = np.abs(a - b)
            pair_mag = max(float(np.abs(a).max()), float(np.abs(b).max()))
            bound = tol * (1.0 + pair_mag)
            both_zero = (np.abs(a) <= thr) & (np.abs(b) <= thr)
            for donor in np.nonzero((diff > bound) & ~both_zero)[0]:
                out.append(ChainViolation(bi, r, t, int(donor)))
    return out


def _scales_for(chain: Chain, partition: Partition, mode: str,
                tol: float) -> np.ndarray | None:
    """Solve for scales making the partition a valid lumping, or None.

    Per block, the representative gets scale 1 and every member's scale is
    read off its signature ratio; all-zero signatures leave the scale free,
    which is pinned to 1.
    """
    sums = class_sums(chain, partition)
    zthr = zero_threshold(tol, float(np.abs(sums).max()) if sums.size else 0.0)
    scales = np.ones(chain.n)
    for block in partition.blocks:
        r = block[0]
        for t in block[1:]:
            c = match_scale(sums[:, t], sums[:, r], zthr, tol,
                            require_unit=(mode == "exact"))
            if c is None or not c > 0.0:
                return None
            scales[t] = 1.0 / c
    return scales


def max_lumping(chain: Chain, mode: str = "proportional",
                tol: float = 1e-9) -> StatePartition:
    """Coarsest valid lumping, by signature refinement from one block.

    Starting with all states in one block, each round recomputes the class
    sums against the current blocks and splits every block by proportional
    (exact mode: equal) signatures; a stable partition is reached after at
    most n-1 rounds.  The result is re-verified before returning.
    """
    require_valid_chain(chain)
    if mode not in ("proportional", "exact"):
        raise InputError(f"unknown mode {mode!r}")
    part = Partition.one_block(chain.n)
    for _ in range(chain.n):
        sums = class_sums(chain, part)
        refined, _ = group_proportional(sums, mode, tol, within=part)
        if refined == part:
            break
        part = refined
    scales = _scales_for(chain, part, mode, tol)
    if scales is None:
        raise InternalCheckError("refinement produced an unsolvable partition")
    sp = StatePartition(part, scales)
    if check_lumping(chain, sp, tol):
        raise InternalCheckError("refinement result failed its own verification")
    return sp


def quotient_chain(chain: Chain, sp: StatePartition,
                   tol: float = 1e-9) -> Chain:
    """Collapse each block to its representative state.

    The rate from block U to block V is scale(rep(U)) times the sum of
    rates from U's members into rep(V), each divided by the member's scale.
    Within-block rate mass has no representation in the edge format (no
    self-loops), so the quotient is returned in graph mode with a zero
    diagonal; the partition is verified first.
    """
    violations = check_lumping(chain, sp, tol)
    if violations:
        raise InputError(
            f"partition is not a valid lumping: {len(violations)} violations")
    m = sp.partition.n_blocks
    reps = sp.partition.representatives
    scaled = chain.rates / sp.scales[:, None]
    block_rows = np.stack([scaled[list(b)].sum(axis=0)
                           for b in sp.partition.blocks])
    out = block_rows[:, list(reps)] * sp.scales[list(reps)][:, None]
    np.fill_diagonal(out, 0.0)
    return Chain(m, out, GRAPH)


def _set_partitions(n: int) -> Iterator[Partition]:
    """All partitions of {0..n-1} via restricted growth strings."""
    codes = np.zeros(n, dtype=int)
    maxes = np.zeros(n + 1, dtype=int)
    while True:
        groups: dict[int, list[int]] = {}
        for i, c in enumerate(codes):
            groups.setdefault(int(c), []).append(i)
        yield Partition(tuple(tuple(g) for g in groups.values()))
        i = n - 1
        while i >= 1 and codes[i] == maxes[i] + 1:
            i -= 1
        if i < 1:
            return
        codes[i] += 1
        maxes[i + 1] = max(maxes[i], codes[i])
        for j in range(i + 1, n):
            codes[j] = 0
            maxes[j + 1] = maxes[i + 1]


def brute_force_max(chain: Chain, mode: str = "proportional",
                    tol: float = 1e-9) -> StatePartition:
    """Reference implementation: enumerate every partition (n <= 10 only),
    keep the valid ones, and return the unique coarsest.

    Raises an internal error if several incomparable maximal partitions are
    valid, which the refinement theory rules out.
    """
    require_valid_chain(chain)
    if chain.n > 10:
        raise InputError("brute force search is limited to 10 states")
    valid: list[tuple[Partition, np.ndarray]] = []
    for part in _set_partitions(chain.n):
        scales = _scales_for(chain, part, mode, tol)
        if scales is None:
            continue
        if not check_lumping(chain, StatePartition(part, scales), tol):
            valid.append((part, scales))
    maximal = [(p, s) for p, s in valid
               if not any(q is not p and p.refines(q) for q, _ in valid)]
    if len(maximal) != 1:
        raise InternalCheckError(
            f"{len(maximal)} incomparable maximal lumpings found")
    return StatePartition(*maximal[0])
