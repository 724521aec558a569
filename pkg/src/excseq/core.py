"""Lattice points, dimension vectors, exceptional sequences and their symmetries.

Points are plain tuples of ints. Axes are 0-based throughout the package.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Point = tuple[int, ...]


def as_point(p: Iterable[int]) -> Point:
    pt = tuple(p)
    for c in pt:
        if isinstance(c, bool) or not isinstance(c, int):
            raise TypeError(f"coordinates must be integers, got {c!r}")
    return pt


@dataclass(frozen=True)
class DimVec:
    """Dimension vector d = (d_1, ..., d_r) with every entry at least 1."""

    d: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        if not self.d:
            raise ValueError("dimension vector must have rank >= 1")
        if any(x < 1 for x in self.d):
            raise ValueError(f"all entries of d must be >= 1, got {self.d}")

    @classmethod
    def ones(cls, r: int) -> "DimVec":
        return cls((1,) * r)

    @property
    def rank(self) -> int:
        return len(self.d)

    @property
    def n(self) -> int:
        """Capacity n(d) = prod(d_nu + 1), the size of a maximal sequence."""
        return math.prod(x + 1 for x in self.d)

    @property
    def is_ones(self) -> bool:
        return all(x == 1 for x in self.d)


@dataclass(frozen=True)
class ExcSeq:
    """An ordered sequence of lattice points in Z^rank.

    Exceptionality is not enforced here; use :func:`is_exceptional`.
    """

    rank: int
    points: tuple[Point, ...]

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        pts = tuple(as_point(p) for p in self.points)
        for p in pts:
            if len(p) != self.rank:
                raise ValueError(f"point {p} does not have rank {self.rank}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, points: Iterable[Iterable[int]], rank: int | None = None) -> "ExcSeq":
        pts = [as_point(p) for p in points]
        if rank is None:
            if not pts:
                raise ValueError("cannot infer the rank of an empty sequence")
            rank = len(pts[0])
        return cls(rank, tuple(pts))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def as_lists(self) -> list[list[int]]:
        return [list(p) for p in self.points]


@dataclass(frozen=True)
class Verdict:
    exceptional: bool
    maximal: bool
    violations: tuple[tuple[int, int], ...] = ()


def _check_rank(seq: ExcSeq, d: DimVec) -> None:
    if seq.rank != d.rank:
        raise ValueError(f"rank mismatch: sequence has rank {seq.rank}, d has rank {d.rank}")


def admits(p: Point, q: Point, d: Sequence[int]) -> bool:
    """True iff q may follow p, i.e. some (q - p)_nu lies in {1, ..., d_nu}."""
    return any(1 <= b - a <= dv for a, b, dv in zip(p, q, d))


def is_exceptional(seq: ExcSeq, d: DimVec | None = None) -> Verdict:
    """Check the pairwise exceptionality condition and maximality.

    Every failing pair (i, j) with i < j is reported, not only the first.
    """
    if d is None:
        d = DimVec.ones(seq.rank)
    _check_rank(seq, d)
    pts = seq.points
    violations = tuple(
        (i, j)
        for i, j in itertools.combinations(range(len(pts)), 2)
        if not admits(pts[i], pts[j], d.d)
    )
    exceptional = not violations
    return Verdict(exceptional, exceptional and len(pts) == d.n, violations)


def is_mes(seq: ExcSeq, d: DimVec | None = None) -> bool:
    return is_exceptional(seq, d).maximal


def width(points: Iterable[Point], axis: int) -> int:
    """Number of consecutive layers along ``axis`` spanned by ``points``."""
    vals = [p[axis] for p in points]
    if not vals:
        raise ValueError("width of an empty point set is undefined")
    return max(vals) - min(vals) + 1


def widths(points: Iterable[Point]) -> tuple[int, ...]:
    pts = list(points)
    if not pts:
        raise ValueError("widths of an empty point set are undefined")
    return tuple(width(pts, k) for k in range(len(pts[0])))


# -- labeling -----------------------------------------------------------------

BitVec = tuple[int, ...]


@dataclass(frozen=True)
class CubeLabeling:
    """Images of a maximal sequence in (Z/2Z)^r, in sequence order."""

    order: tuple[BitVec, ...]

    @property
    def rank(self) -> int:
        return len(self.order[0])

    def is_permutation(self) -> bool:
        r = self.rank
        return len(self.order) == 2**r and set(self.order) == set(
            itertools.product((0, 1), repeat=r)
        )

    def normalized(self) -> "CubeLabeling":
        """Reflect the cube so that the first element lands on the origin."""
        first = self.order[0]
        return CubeLabeling(tuple(tuple(a ^ b for a, b in zip(v, first)) for v in self.order))

    def vertex_labels(self) -> dict[BitVec, int]:
        return {v: i for i, v in enumerate(self.order)}

    def coset_key(self) -> tuple[BitVec, ...]:
        """Representative of the labeling modulo cube reflections and S_r."""
        r = self.rank
        verts = [sum(b << k for k, b in enumerate(v)) for v in self.order]
        best = None
        for table in _perm_tables(r):
            v0 = table[verts[0]]
            cand = tuple(table[v] ^ v0 for v in verts)
            if best is None or cand < best:
                best = cand
        return tuple(tuple(x >> k & 1 for k in range(r)) for x in best)


@functools.lru_cache(maxsize=None)
def _perm_tables(r: int) -> tuple[tuple[int, ...], ...]:
    """For each coordinate permutation, its action on cube vertices encoded as ints."""
    tables = []
    for perm in itertools.permutations(range(r)):
        tables.append(
            tuple(sum((x >> perm[k] & 1) << k for k in range(r)) for x in range(2**r))
        )
    return tuple(tables)


def label(seq: ExcSeq) -> CubeLabeling:
    """Coordinates mod 2 of a maximal (1,...,1)-exceptional sequence."""
    v = is_exceptional(seq)
    if not v.exceptional:
        raise ValueError(f"sequence is not exceptional (violations {v.violations[:5]})")
    if not v.maximal:
        raise ValueError(f"sequence has {len(seq)} points, a maximal one has {2**seq.rank}")
    lab = CubeLabeling(tuple(tuple(c % 2 for c in p) for p in seq.points))
    # bijectivity follows from exceptionality; a failure here is a bug
    assert lab.is_permutation(), lab
    return lab


def labeling_coset_count(r: int) -> int:
    """Number of labelings of (Z/2Z)^r modulo reflections and coordinate permutations."""
    return math.factorial(2**r - 1) // math.factorial(r)


# -- symmetries ---------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryOp:
    kind: str
    vector: tuple[int, ...] = ()
    perm: tuple[int, ...] = ()

    KINDS = ("translate", "permute", "reverse_negate")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown symmetry kind {self.kind!r}")
        if self.kind == "permute" and sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")

    @classmethod
    def translate(cls, t: Iterable[int]) -> "SymmetryOp":
        return cls("translate", vector=tuple(t))

    @classmethod
    def permute(cls, perm: Iterable[int]) -> "SymmetryOp":
        """New coordinate k is old coordinate ``perm[k]``."""
        return cls("permute", perm=tuple(perm))

    @classmethod
    def reverse_negate(cls) -> "SymmetryOp":
        return cls("reverse_negate")


def apply_symmetry(seq: ExcSeq, op: SymmetryOp) -> ExcSeq:
    r = seq.rank
    if op.kind == "translate":
        if len(op.vector) != r:
            raise ValueError("translation vector has wrong rank")
        t = op.vector
        return ExcSeq(r, tuple(tuple(a + b for a, b in zip(p, t)) for p in seq.points))
    if op.kind == "permute":
        if len(op.perm) != r:
            raise ValueError("permutation has wrong rank")
        return ExcSeq(r, tuple(tuple(p[k] for k in op.perm) for p in seq.points))
    return ExcSeq(r, tuple(tuple(-c for c in p) for p in reversed(seq.points)))


class Group(str, enum.Enum):
    """Symmetry groups used for deduplication (translations are always included)."""

    TRANSLATIONS = "translations"
    PERMUTATIONS = "translations+permutations"
    FULL = "translations+permutations+reversal"


def normalize_translation(points: Sequence[Point]) -> tuple[Point, ...]:
    """Translate so that the bounding-box minimum is the origin."""
    if not points:
        return ()
    mins = [min(c) for c in zip(*points)]
    return tuple(tuple(a - m for a, m in zip(p, mins)) for p in points)


def group_images(points: Sequence[Point], group: Group | str) -> list[tuple[Point, ...]]:
    """All images of an ordered point list under ``group``, translation-normalized."""
    group = Group(group)
    r = len(points[0])
    bases = [tuple(points)]
    if group is Group.FULL:
        bases.append(tuple(tuple(-c for c in p) for p in reversed(points)))
    perms = [tuple(range(r))] if group is Group.TRANSLATIONS else list(itertools.permutations(range(r)))
    out = []
    for pts in bases:
        for perm in perms:
            out.append(normalize_translation([tuple(p[k] for k in perm) for p in pts]))
    return out


def canonical_form(seq: ExcSeq, group: Group | str = Group.TRANSLATIONS) -> ExcSeq:
    """Lexicographically least translation-normalized image of ``seq`` under ``group``."""
    if not seq.points:
        raise ValueError("canonical form of an empty sequence")
    return ExcSeq(seq.rank, min(group_images(seq.points, group)))


def standard_sequence(r: int) -> ExcSeq:
    """The 2^r vertices of {0,1}^r by coordinate sum, ties lexicographic."""
    if r < 1:
        raise ValueError("rank must be >= 1")
    pts = sorted(itertools.product((0, 1), repeat=r), key=lambda p: (sum(p), p))
    return ExcSeq(r, tuple(pts))
