"""Partitions of index sets and proportional signature matching.

The same grouping rule is used for network layers and for chain states:
two signature vectors belong together when one is a strictly positive
multiple of the other (proportional mode) or equal (exact mode), up to a
relative tolerance.  The scale is read off at the pivot component, the
largest-magnitude entry of the block representative's signature (first
such index on ties).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True, eq=True)
class Partition:
    """A partition of {0, ..., width-1} into disjoint blocks.

    Blocks are stored sorted: members ascending inside each block, blocks
    ordered by their smallest member.  The representative of a block is its
    smallest member.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        norm = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        norm = tuple(sorted(norm, key=lambda b: b[0] if b else -1))
        object.__setattr__(self, "blocks", norm)
        seen: set[int] = set()
        count = 0
        for b in norm:
            if not b:
                raise InputError("partition contains an empty block")
            for i in b:
                if i < 0 or i in seen:
                    raise InputError(f"partition index {i} repeated or negative")
                seen.add(i)
                count += 1
        if seen and max(seen) != count - 1:
            raise InputError("partition does not cover a contiguous index range")

    @classmethod
    def identity(cls, width: int) -> "Partition":
        return cls(tuple((i,) for i in range(width)))

    @classmethod
    def one_block(cls, width: int) -> "Partition":
        return cls((tuple(range(width)),))

    @property
    def width(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def representatives(self) -> tuple[int, ...]:
        return tuple(b[0] for b in self.blocks)

    def block_index(self) -> np.ndarray:
        """Array mapping each member index to the index of its block."""
        out = np.empty(self.width, dtype=np.intp)
        for bi, b in enumerate(self.blocks):
            for i in b:
                out[i] = bi
        return out

    def is_identity(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def refines(self, other: "Partition") -> bool:
        """True when every block of self lies inside one block of other."""
        if self.width != other.width:
            return False
        idx = other.block_index()
        return all(len({idx[i] for i in b}) == 1 for b in self.blocks)


def zero_threshold(tol: float, magnitude: float) -> float:
    """Absolute cut below which a signature component counts as zero."""
    return tol * (1.0 + magnitude)


def close_rel(a: float, b: float, tol: float) -> bool:
    """Scale-aware closeness used by all equation checks."""
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


def match_scale(candidate: np.ndarray, rep: np.ndarray, zero_thr: float,
                tol: float, require_unit: bool = False) -> float | None:
    """Scale c > 0 with candidate ~ c * rep, or None when no such c exists.

    The pivot is rep's largest-magnitude component; components of rep below
    zero_thr must be matched by candidate components below zero_thr.  Two
    all-zero signatures match with c = 1.  With require_unit the only scale
    tried is 1 (exact mode).
    """
    rep_abs = np.abs(rep)
    cand_abs = np.abs(candidate)
    rep_max = rep_abs.max() if rep_abs.size else 0.0
    cand_max = cand_abs.max() if cand_abs.size else 0.0
    if rep_max <= zero_thr:
        return 1.0 if cand_max <= zero_thr else None
    if np.any((rep_abs <= zero_thr) & (cand_abs > zero_thr)):
        return None
    if require_unit:
        c = 1.0
    else:
        p = int(np.argmax(rep_abs))
        c = float(candidate[p] / rep[p])
        if not c > 0.0:
            return None
    resid = np.abs(candidate - c * rep).max()
    if resid <= tol * (1.0 + max(cand_max, abs(c) * rep_max)):
        return c
    return None


def group_proportional(sigs: np.ndarray, mode: str, tol: float,
                       within: Partition | None = None,
                       ) -> tuple[Partition, np.ndarray]:
    """Group the columns of a signature matrix into proportionality blocks.

    sigs has one column per element; scanning ascending, each element is
    compared against existing block representatives (first match wins) and
    opens a new block otherwise.  Returns the partition together with the
    scale of each element (1 / c relative to its representative; 1 for
    representatives).  With `within`, elements are only grouped inside the
    blocks of that partition (refinement).
    """
    if mode not in ("proportional", "exact"):
        raise InputError(f"unknown mode {mode!r}")
    require_unit = mode == "exact"
    width = sigs.shape[1]
    zthr = zero_threshold(tol, float(np.abs(sigs).max()) if sigs.size else 0.0)
    scales = np.ones(width)
    blocks: list[list[int]] = []
    if within is None:
        within = Partition.one_block(width) if width else Partition(())
    for outer in within.blocks:
        local_reps: list[int] = []
        local_blocks: list[list[int]] = []
        for j in outer:
            for bi, r in enumerate(local_reps):
                c = match_scale(sigs[:, j], sigs[:, r], zthr, tol, require_unit)
                if c is not None:
                    local_blocks[bi].append(j)
                    scales[j] = 1.0 / c
                    break
            else:
                local_reps.append(j)
                local_blocks.append([j])
        blocks.extend(local_blocks)
    return Partition(tuple(tuple(b) for b in blocks)), scales
