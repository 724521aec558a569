"""Contamination closure on Z^r, represented exactly by unions of axis-aligned flats.

A flat is a base point plus a set of free axes; the infected region after any
number of rounds is a finite union of such flats, so fullness can be decided
without truncating the lattice.  ``simulate_window`` is a separate brute-force
point simulation on a finite box used to cross-check the flat engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .core import DimVec, ExcSeq, Point, as_point

DEFAULT_MAX_ROUNDS = 64


class Flat(NamedTuple):
    """Axis-aligned affine flat ``base + span(e_k for k in free)``.

    ``mask`` has bit k set iff axis k is free; base coordinates on free axes are 0.
    """

    mask: int
    base: Point

    @classmethod
    def make(cls, base: Iterable[int], free: Iterable[int] = ()) -> "Flat":
        base = list(as_point(base))
        mask = 0
        for k in free:
            if not 0 <= k < len(base):
                raise ValueError(f"axis {k} out of range for rank {len(base)}")
            mask |= 1 << k
            base[k] = 0
        return cls(mask, tuple(base))

    @classmethod
    def point(cls, p: Iterable[int]) -> "Flat":
        return cls(0, as_point(p))

    @classmethod
    def space(cls, r: int) -> "Flat":
        return cls((1 << r) - 1, (0,) * r)

    @property
    def rank(self) -> int:
        return len(self.base)

    @property
    def free(self) -> tuple[int, ...]:
        return tuple(k for k in range(len(self.base)) if self.mask >> k & 1)

    @property
    def dim(self) -> int:
        return self.mask.bit_count()

    def shifted(self, axis: int, amount: int) -> "Flat":
        if self.mask >> axis & 1 or amount == 0:
            return self
        b = list(self.base)
        b[axis] += amount
        return Flat(self.mask, tuple(b))

    def spanned(self, axis: int) -> "Flat":
        if self.mask >> axis & 1:
            return self
        b = list(self.base)
        b[axis] = 0
        return Flat(self.mask | 1 << axis, tuple(b))

    def to_dict(self) -> dict:
        return {"base": list(self.base), "free": list(self.free)}


def flat_member(p: Point, f: Flat) -> bool:
    if len(p) != len(f.base):
        raise ValueError("rank mismatch")
    m = f.mask
    return all(m >> k & 1 or p[k] == b for k, b in enumerate(f.base))


def flat_intersect(f1: Flat, f2: Flat) -> Flat | None:
    """Intersection of two flats, or None when empty."""
    m1, b1 = f1
    m2, b2 = f2
    if len(b1) != len(b2):
        raise ValueError("rank mismatch")
    base = []
    for k in range(len(b1)):
        a, b = m1 >> k & 1, m2 >> k & 1
        if a and b:
            base.append(0)
        elif a:
            base.append(b2[k])
        elif b:
            base.append(b1[k])
        elif b1[k] != b2[k]:
            return None
        else:
            base.append(b1[k])
    return Flat(m1 & m2, tuple(base))


def flat_contains(big: Flat, small: Flat) -> bool:
    """True iff ``small`` is a subset of ``big``."""
    mb, bb = big
    ms, bs = small
    if ms & ~mb:
        return False
    return all(mb >> k & 1 or bb[k] == bs[k] for k in range(len(bb)))


def absorb(flats: Iterable[Flat]) -> frozenset[Flat]:
    """Drop every flat contained in another one."""
    by_dim = sorted(set(flats), key=lambda f: -f.dim)
    if not by_dim:
        return frozenset()
    r = len(by_dim[0].base)
    full = (1 << r) - 1
    # g contains f iff free(f) <= free(g) and g.base equals f.base zeroed on free(g)
    kept_by_mask: dict[int, set[Point]] = {}
    kept: list[Flat] = []
    for f in by_dim:
        m, b = f
        rest = full & ~m
        sub = rest
        covered = False
        while sub:
            bases = kept_by_mask.get(m | sub)
            if bases and tuple(0 if sub >> k & 1 else c for k, c in enumerate(b)) in bases:
                covered = True
                break
            sub = (sub - 1) & rest
        if not covered:
            kept.append(f)
            kept_by_mask.setdefault(m, set()).add(b)
    return frozenset(kept)


@dataclass(frozen=True)
class FlatSet:
    """Finite union of flats in absorption normal form (an antichain)."""

    rank: int
    flats: frozenset[Flat]

    @classmethod
    def of(cls, rank: int, flats: Iterable[Flat]) -> "FlatSet":
        flats = list(flats)
        for f in flats:
            if f.rank != rank:
                raise ValueError(f"flat {f} does not have rank {rank}")
        return cls(rank, absorb(flats))

    @classmethod
    def from_points(cls, points: Iterable[Iterable[int]], rank: int | None = None) -> "FlatSet":
        pts = [as_point(p) for p in points]
        if rank is None:
            if not pts:
                raise ValueError("cannot infer rank of an empty seed")
            rank = len(pts[0])
        return cls.of(rank, (Flat.point(p) for p in pts))

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.flats)

    def __contains__(self, p) -> bool:
        return self.covers(p)

    def covers(self, p: Point) -> bool:
        return any(flat_member(p, f) for f in self.flats)

    @property
    def is_full(self) -> bool:
        return Flat.space(self.rank) in self.flats

    def sorted(self) -> list[Flat]:
        return sorted(self.flats, key=lambda f: (-f.dim, f.mask, f.base))

    def translated(self, t: Sequence[int]) -> "FlatSet":
        out = []
        for f in self.flats:
            b = tuple(0 if f.mask >> k & 1 else c + t[k] for k, c in enumerate(f.base))
            out.append(Flat(f.mask, b))
        return FlatSet(self.rank, frozenset(out))

    def to_list(self) -> list[dict]:
        return [f.to_dict() for f in self.sorted()]


def _seeds_on_axis(flats: Sequence[Flat], axis: int, reach: int) -> set[Flat]:
    """Flats of points p with p, p+e, ..., p+reach*e all covered (e the axis unit)."""
    shifted = [[f.shifted(axis, -t) for f in flats] for t in range(reach + 1)]
    out: set[Flat] = set()

    def extend(t: int, g: Flat) -> None:
        if t > reach:
            out.add(g)
            return
        for h in shifted[t]:
            i = flat_intersect(g, h)
            if i is not None:
                extend(t + 1, i)

    for f in flats:
        # a seed already free along the axis only regenerates itself
        if f.mask >> axis & 1:
            continue
        extend(1, f)
    return out


def cont_step(u: FlatSet, d: DimVec | None = None) -> FlatSet:
    """One round of direct contamination, returned in absorption normal form."""
    r = u.rank
    if d is None:
        d = DimVec.ones(r)
    if d.rank != r:
        raise ValueError("rank mismatch")
    flats = list(u.flats)
    new = set(flats)
    for axis in range(r):
        for g in _seeds_on_axis(flats, axis, d.d[axis]):
            if not g.mask >> axis & 1:
                new.add(g.spanned(axis))
    return FlatSet(r, absorb(new))


def _unit_step(flats: frozenset[Flat], fresh: frozenset[Flat] | None, r: int) -> frozenset[Flat]:
    """cont_step for d = (1, ..., 1), restricted to pairs touching ``fresh``.

    Pairs of flats that were both present one round earlier have already
    contributed their lines, so only pairs with a fresh member can add anything.
    """
    out = set(flats)
    for k in range(r):
        bit = 1 << k
        free_k = []
        by_val: dict[int, list[Flat]] = {}
        for f in flats:
            if f.mask & bit:
                free_k.append(f)
            else:
                by_val.setdefault(f.base[k], []).append(f)
        for fi in flats:
            mi, bi = fi
            if mi & bit:
                continue
            fi_old = fresh is not None and fi not in fresh
            # fj - e_k must meet fi: fj free along k, or pinned one layer above fi
            for fj in itertools.chain(free_k, by_val.get(bi[k] + 1, ())):
                if fi_old and fj not in fresh:
                    continue
                mj, bj = fj
                base = list(bi)
                for a in range(r):
                    ab = 1 << a
                    if mi & ab:
                        base[a] = 0 if mj & ab else bj[a]
                    elif not mj & ab and a != k and bi[a] != bj[a]:
                        break
                else:
                    base[k] = 0
                    out.add(Flat(mi & mj | bit, tuple(base)))
    return absorb(out)


FULL = "full"
STABLE = "stable_not_full"
CAPPED = "round_cap_reached"


@dataclass(frozen=True)
class ClosureResult:
    status: str
    steps: int
    history: tuple[FlatSet, ...] = field(repr=False)

    @property
    def full(self) -> bool:
        return self.status == FULL

    @property
    def final(self) -> FlatSet:
        return self.history[-1]


class ClosureUndetermined(RuntimeError):
    """Raised when the round cap is hit before the closure stabilizes."""


def closure(
    seed: Iterable[Iterable[int]] | FlatSet,
    d: DimVec | None = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> ClosureResult:
    """Iterate contamination from ``seed``.

    ``steps`` is the least k with cont^k(S) equal to Z^r (status full) or equal
    to cont^{k+1}(S) (stable); ``history[k]`` is cont^k(S).
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    u = seed if isinstance(seed, FlatSet) else FlatSet.from_points(seed)
    if d is None:
        d = DimVec.ones(u.rank)
    history = [u]
    for k in range(max_rounds + 1):
        if u.is_full:
            return ClosureResult(FULL, k, tuple(history))
        if k == max_rounds:
            break
        if d.is_ones:
            prev = history[-2].flats if len(history) > 1 else None
            fresh = None if prev is None else u.flats - prev
            v = FlatSet(u.rank, _unit_step(u.flats, fresh, u.rank))
        else:
            v = cont_step(u, d)
        if v == u:
            return ClosureResult(STABLE, k, tuple(history))
        history.append(v)
        u = v
    return ClosureResult(CAPPED, max_rounds, tuple(history))


def is_full(
    seq: ExcSeq | Iterable[Iterable[int]],
    d: DimVec | None = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    shortcut: bool = True,
) -> bool:
    """Whether the point set contaminates all of Z^r.

    With ``shortcut`` a maximal (1,...,1)-sequence with a thin axis is decided by
    the layer recursion in :mod:`excseq.structure`; both paths agree.
    """
    if not isinstance(seq, ExcSeq):
        seq = ExcSeq.of(seq)
    if d is None:
        d = DimVec.ones(seq.rank)
    if shortcut and d.is_ones:
        from . import structure

        if structure.thin_axis(seq) is not None and structure.is_mes(seq):
            return structure.thin_fullness(seq)
    res = closure(seq.points, d, max_rounds)
    if res.status == CAPPED:
        raise ClosureUndetermined(
            f"no verdict after {max_rounds} rounds for {seq.as_lists()}"
        )
    return res.full


# -- finite windows -------------------------------------------------------------

Window = Sequence[tuple[int, int]]


def window_shape(window: Window) -> tuple[int, ...]:
    shape = tuple(hi - lo + 1 for lo, hi in window)
    if not shape or any(s < 1 for s in shape):
        raise ValueError(f"empty window {window}")
    return shape


def bounding_window(points: Iterable[Point], margin: int = 0) -> list[tuple[int, int]]:
    pts = list(points)
    return [(min(c) - margin, max(c) + margin) for c in zip(*pts)]


def window_raster(u: FlatSet, window: Window) -> np.ndarray:
    """Boolean grid marking the window cells covered by ``u``; index 0 is ``lo``."""
    shape = window_shape(window)
    if len(shape) != u.rank:
        raise ValueError("window rank mismatch")
    grid = np.zeros(shape, dtype=bool)
    for f in u.flats:
        idx = []
        for k, (lo, hi) in enumerate(window):
            if f.mask >> k & 1:
                idx.append(slice(None))
            elif lo <= f.base[k] <= hi:
                idx.append(f.base[k] - lo)
            else:
                break
        else:
            grid[tuple(idx)] = True
    return grid


def simulate_window(
    seed: Iterable[Iterable[int]],
    d: DimVec | None,
    window: Window,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> list[np.ndarray]:
    """Point-by-point contamination restricted to a box.

    Returns grids for rounds 0..k where round k is the first that is all-true
    or unchanged by a further round.
    """
    shape = window_shape(window)
    r = len(shape)
    if d is None:
        d = DimVec.ones(r)
    grid = np.zeros(shape, dtype=bool)
    for p in seed:
        idx = tuple(c - lo for c, (lo, hi) in zip(p, window))
        if any(not 0 <= i < s for i, s in zip(idx, shape)):
            raise ValueError(f"seed point {tuple(p)} lies outside the window")
        grid[idx] = True
    grids = [grid]
    for _ in range(max_rounds):
        if grid.all():
            break
        nxt = grid.copy()
        for axis in range(r):
            reach = d.d[axis]
            n = shape[axis]
            if n <= reach:
                continue
            run = np.ones_like(np.take(grid, range(n - reach), axis=axis))
            for t in range(reach + 1):
                run &= np.take(grid, range(t, n - reach + t), axis=axis)
            nxt |= run.any(axis=axis, keepdims=True)
        if np.array_equal(nxt, grid):
            break
        grid = nxt
        grids.append(grid)
    return grids


def raster_rows(grid: np.ndarray):
    """Nested lists of '.'/'#' strings; the last axis runs along each string."""
    if grid.ndim == 1:
        return "".join("#" if v else "." for v in grid)
    return [raster_rows(sub) for sub in grid]


def frame_records(result: ClosureResult, window: Window | None = None) -> list[dict]:
    frames = []
    for k, u in enumerate(result.history):
        rec = {"round": k, "flats": u.to_list()}
        if window is not None:
            rec["window"] = [list(w) for w in window]
            rec["raster"] = raster_rows(window_raster(u, window))
        frames.append(rec)
    return frames
