"""Layer decomposition of exceptional sequences and the structural facts about it.

Everything here assumes d = (1, ..., 1).  The checks double as test oracles for
enumerated sequences and as sound pruning predicates for the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .core import DimVec, ExcSeq, is_exceptional, width


def is_mes(seq: ExcSeq) -> bool:
    return is_exceptional(seq, DimVec.ones(seq.rank)).maximal


@dataclass(frozen=True)
class Segment:
    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class LayerProfile:
    """Layer sizes along one axis, ``loads[i]`` being the size of layer ``offset + i``."""

    axis: int
    offset: int
    loads: tuple[int, ...]

    def load(self, c: int) -> int:
        i = c - self.offset
        return self.loads[i] if 0 <= i < len(self.loads) else 0

    @property
    def top(self) -> int:
        return self.offset + len(self.loads) - 1

    def segments(self) -> list[Segment]:
        segs = []
        start = None
        for i, v in enumerate(self.loads + (0,)):
            if v and start is None:
                start = i
            elif not v and start is not None:
                segs.append(Segment(self.offset + start, self.offset + i - 1))
                start = None
        return segs


def layer_loads(seq: ExcSeq, axis: int) -> LayerProfile:
    if not seq.points:
        raise ValueError("empty sequence has no layers")
    vals = [p[axis] for p in seq.points]
    lo, hi = min(vals), max(vals)
    loads = [0] * (hi - lo + 1)
    for v in vals:
        loads[v - lo] += 1
    return LayerProfile(axis, lo, tuple(loads))


def canonical_loads(loads: Iterable[int]) -> tuple[int, ...]:
    """Load sequence up to reversal (translation is implicit in the tuple)."""
    t = tuple(loads)
    return min(t, t[::-1])


def project_layers(seq: ExcSeq, axis: int, offsets: Iterable[int]) -> ExcSeq:
    """Drop coordinate ``axis`` from the points lying in the chosen layers.

    The offsets must be pairwise non-adjacent; the image is then exceptional in
    rank r-1 and the projection is injective.
    """
    cs = set(offsets)
    if any(c + 1 in cs for c in cs):
        raise ValueError(f"layer offsets {sorted(cs)} contain adjacent values")
    if seq.rank < 2:
        raise ValueError("cannot project a rank-1 sequence")
    img = [p[:axis] + p[axis + 1:] for p in seq.points if p[axis] in cs]
    if len(set(img)) != len(img):
        raise AssertionError(f"projection along axis {axis} is not injective on layers {sorted(cs)}")
    return ExcSeq(seq.rank - 1, tuple(img))


def parity_projections(seq: ExcSeq, axis: int) -> tuple[ExcSeq, ExcSeq]:
    """Projections of the even and the odd layers along ``axis``."""
    vals = {p[axis] for p in seq.points}
    even = [c for c in vals if c % 2 == 0]
    odd = [c for c in vals if c % 2]
    return project_layers(seq, axis, even), project_layers(seq, axis, odd)


# -- structural checks ------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    axis: int | None
    passed: bool
    witness: dict | None = None


DISTRIBUTIONS = ((3, 3, 3), (3, 3, 2), (3, 3, 1), (3, 2, 2))


def first_point_distribution(seq: ExcSeq) -> tuple[int, ...]:
    """How many later points lie in each hyperplane x_k = cl^0_k + 1, sorted descending."""
    p0 = seq.points[0]
    counts = [sum(1 for q in seq.points[1:] if q[k] == p0[k] + 1) for k in range(seq.rank)]
    return tuple(sorted(counts, reverse=True))


def distribution_tag(seq: ExcSeq) -> str:
    """Tag used in search reports.

    Sequences with a maximal layer are tagged ``thin``; the remaining rank-3
    maximal sequences must fall in one of :data:`DISTRIBUTIONS`.
    """
    if thin_axis(seq) is not None:
        return "thin"
    dist = first_point_distribution(seq)
    if seq.rank == 3 and dist in DISTRIBUTIONS:
        return ",".join(map(str, dist))
    return "other"


@dataclass
class StructReport:
    checks: list[Check] = field(default_factory=list)
    distribution: str = ""

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def add(self, name, axis, passed, **witness):
        self.checks.append(Check(name, axis, passed, None if passed else witness))


def check_structural_invariants(seq: ExcSeq, require_maximal: bool = True) -> StructReport:
    """Run every layer lemma on ``seq`` and report each check with a witness on failure.

    The checks are theorems for maximal sequences; pass ``require_maximal=False``
    to evaluate them on arbitrary point sequences.
    """
    if require_maximal and not is_mes(seq):
        raise ValueError("structural checks need a maximal exceptional sequence")
    r = seq.rank
    half = 2 ** (r - 1)
    rep = StructReport()
    profiles = [layer_loads(seq, k) for k in range(r)]

    need = math.ceil((2**r - 1) / r)
    heaviest = max(max(p.loads) for p in profiles)
    best_axis = max(range(r), key=lambda k: max(profiles[k].loads))
    rep.add("heavy_layer_exists", None, heaviest >= need, best_axis=best_axis, loads=profiles[best_axis].loads, need=need)

    for prof in profiles:
        k = prof.axis
        nonempty = [c for c in range(prof.offset, prof.top + 1) if prof.load(c)]
        bad = [
            (a, b)
            for i, a in enumerate(nonempty)
            for b in nonempty[i + 1:]
            if b - a > 1 and prof.load(a) + prof.load(b) > half
        ]
        rep.add("heavy_layers_adjacent", k, not bad, layers=bad[:1], loads=[(prof.load(a), prof.load(b)) for a, b in bad[:1]])

        bad = [
            c
            for c in range(prof.offset, prof.top + 1)
            if prof.load(c) > prof.load(c - 1) + prof.load(c + 1)
        ]
        rep.add(
            "load_at_most_neighbour_sum",
            k,
            not bad,
            layers=bad[:1],
            loads=[(prof.load(c - 1), prof.load(c), prof.load(c + 1)) for c in bad[:1]],
        )

        segs = prof.segments()
        alt = [(s, sum((-1) ** (c % 2) * prof.load(c) for c in range(s.lo, s.hi + 1))) for s in segs]
        bad = [(s, v) for s, v in alt if v != 0]
        rep.add(
            "segment_alternating_sum_zero",
            k,
            not bad,
            layers=[(s.lo, s.hi) for s, _ in bad[:1]],
            loads=[[prof.load(c) for c in range(s.lo, s.hi + 1)] for s, _ in bad[:1]],
        )

        bad = [
            s
            for s in segs
            if prof.load(s.lo) > prof.load(s.lo + 1) or prof.load(s.hi) > prof.load(s.hi - 1)
        ]
        rep.add(
            "outer_at_most_inner",
            k,
            not bad,
            layers=[(s.lo, s.hi) for s in bad[:1]],
            loads=[[prof.load(c) for c in range(s.lo, s.hi + 1)] for s in bad[:1]],
        )

        bad = [s for s in segs if s.width < 2]
        rep.add("segment_width_at_least_two", k, not bad, layers=[(s.lo, s.hi) for s in bad[:1]], loads=prof.loads)

        if r >= 2:
            try:
                even, odd = parity_projections(seq, k)
                ok = is_mes(even) if even.points else False
                ok = ok and (is_mes(odd) if odd.points else False)
                sizes = (len(even), len(odd))
            except (AssertionError, ValueError) as exc:
                ok, sizes = False, str(exc)
            rep.add("parity_projections_maximal", k, ok, layers="even/odd", loads=sizes)

    rep.distribution = distribution_tag(seq)
    return rep


# -- thin sequences ----------------------------------------------------------------


def thin_axis(seq: ExcSeq) -> int | None:
    """First axis along which the sequence spans at most three layers."""
    for k in range(seq.rank):
        if width(seq.points, k) <= 3:
            return k
    return None


def thin_fullness(seq: ExcSeq) -> bool:
    """Decide fullness of a maximal sequence with a thin axis by recursion on the rank.

    Along the thin axis the layers of one parity form a maximal layer; once that
    hyperplane and the projection of the other parity contaminate their own
    lattices, the whole lattice follows.  Subsequences without a thin axis fall
    back to the flat closure.
    """
    if not is_mes(seq):
        raise ValueError("thin_fullness needs a maximal exceptional sequence")
    r = seq.rank
    if r == 1:
        a, b = sorted(p[0] for p in seq.points)
        return b - a == 1
    k = thin_axis(seq)
    if k is None:
        raise ValueError("no axis of width <= 3")
    even, odd = parity_projections(seq, k)
    return _full_lower(even) and _full_lower(odd)


def _full_lower(seq: ExcSeq) -> bool:
    if seq.rank == 1 or thin_axis(seq) is not None:
        return thin_fullness(seq)
    from .contamination import is_full

    return is_full(seq, shortcut=False)


# -- empty layers --------------------------------------------------------------------


def reduce_empty_layers(seq: ExcSeq) -> ExcSeq:
    """Collapse every run of two or more consecutive empty layers to a single one, on every axis."""
    pts = [list(p) for p in seq.points]
    for k in range(seq.rank):
        vals = sorted({p[k] for p in pts})
        remap = {vals[0]: vals[0]}
        for prev, cur in zip(vals, vals[1:]):
            remap[cur] = remap[prev] + min(cur - prev, 2)
        for p in pts:
            p[k] = remap[p[k]]
    return ExcSeq(seq.rank, tuple(tuple(p) for p in pts))


def merge_shift(seq: ExcSeq, axis: int, m: int, layer: int = 0) -> ExcSeq:
    """Shift every point below the empty layer ``layer`` by ``m`` along ``axis``.

    m = 1 erases the empty layer; m >= 2 merges the two sides.  Negative m
    inserts |m| further empty layers (see :func:`insert_empty_layers`).
    """
    if any(p[axis] == layer for p in seq.points):
        raise ValueError(f"layer {layer} along axis {axis} is not empty")
    out = []
    for p in seq.points:
        if p[axis] < layer:
            p = p[:axis] + (p[axis] + m,) + p[axis + 1:]
        out.append(p)
    return ExcSeq(seq.rank, tuple(out))


def insert_empty_layers(seq: ExcSeq, axis: int, count: int, layer: int = 0) -> ExcSeq:
    """Duplicate the empty layer ``layer`` so that ``count`` more empty layers follow it."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return merge_shift(seq, axis, -count, layer)


def bounding_box_bound(r: int) -> int:
    """Side length of a cube that holds a representative of every fullness class."""
    if r < 1:
        raise ValueError("rank must be >= 1")
    return 3 * 2 ** (r - 1) - 1
