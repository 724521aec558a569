"""Exhaustive enumeration of maximal exceptional sequences in bounded grids.

The first point is pinned at the origin of a board that extends ``g - 1``
cells to both sides on each axis, so every translation class is visited
exactly once.  Candidate sets are Python ints used as bitsets over the board
cells: extending a partial sequence ANDs in the admissible set of the new
point, which is the union of the hyperplanes x_k = p_k + 1, ..., p_k + d_k.
"""

from __future__ import annotations

import itertools
import json
import logging
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .core import (
    DimVec,
    ExcSeq,
    Group,
    canonical_form,
    is_exceptional,
    label,
    normalize_translation,
)
from .contamination import CAPPED, DEFAULT_MAX_ROUNDS, FULL, closure
from .structure import check_structural_invariants, distribution_tag, thin_axis, thin_fullness

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    extents: tuple[int, ...]
    d: DimVec | None = None

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(g) for g in self.extents))
        if not self.extents or any(g < 1 for g in self.extents):
            raise ValueError(f"grid extents must be >= 1, got {self.extents}")
        if self.d is None:
            object.__setattr__(self, "d", DimVec.ones(len(self.extents)))
        elif self.d.rank != len(self.extents):
            raise ValueError("rank mismatch between extents and d")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``"6x6x11"``."""
        try:
            return cls(tuple(int(t) for t in text.lower().split("x")))
        except ValueError as exc:
            raise ValueError(f"bad grid spec {text!r}") from exc

    @property
    def rank(self) -> int:
        return len(self.extents)

    @property
    def name(self) -> str:
        return "x".join(map(str, self.extents))

    def fits(self, points: Sequence[Sequence[int]]) -> bool:
        return all(max(c) - min(c) < g for c, g in zip(zip(*points), self.extents))


@dataclass(frozen=True)
class SearchOptions:
    use_structural_pruning: bool = True
    dedupe_group: Group = Group.PERMUTATIONS
    parallel_shards: int = 1
    emit_every: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dedupe_group", Group(self.dedupe_group))
        if self.parallel_shards < 1:
            raise ValueError("parallel_shards must be >= 1")


@dataclass
class SearchStats:
    nodes: int = 0
    leaves: int = 0
    emitted: int = 0


class _Board:
    """Cell indexing and precomputed bitmasks for one grid."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        r = grid.rank
        self.r = r
        span = [range(-(g - 1), g) for g in grid.extents]
        self.cells = list(itertools.product(*span))
        self.index = {c: i for i, c in enumerate(self.cells)}
        self.slab = [dict() for _ in range(r)]
        for i, c in enumerate(self.cells):
            for k in range(r):
                self.slab[k][c[k]] = self.slab[k].get(c[k], 0) | 1 << i
        d = grid.d.d
        self.adm = []
        for c in self.cells:
            m = 0
            for k in range(r):
                for t in range(1, d[k] + 1):
                    m |= self.slab[k].get(c[k] + t, 0)
            self.adm.append(m)
        self.parity = [
            (
                sum(m for v, m in self.slab[k].items() if v % 2 == 0),
                sum(m for v, m in self.slab[k].items() if v % 2),
            )
            for k in range(r)
        ]
        self._interval: dict[tuple[int, int, int], int] = {}
        self._box: dict[tuple, int] = {}

    def interval(self, k: int, lo: int, hi: int) -> int:
        key = (k, lo, hi)
        m = self._interval.get(key)
        if m is None:
            m = 0
            for v in range(lo, hi + 1):
                m |= self.slab[k].get(v, 0)
            self._interval[key] = m
        return m

    def box(self, lo: tuple[int, ...], hi: tuple[int, ...]) -> int:
        """Cells that keep the bounding box within the grid extents."""
        key = (lo, hi)
        m = self._box.get(key)
        if m is None:
            m = -1
            for k, g in enumerate(self.grid.extents):
                m &= self.interval(k, hi[k] - g + 1, lo[k] + g - 1)
            self._box[key] = m
        return m


def _images(points, perms, reversal):
    bases = [points]
    if reversal:
        bases.append([tuple(-c for c in p) for p in reversed(points)])
    for pts in bases:
        for perm in perms:
            yield normalize_translation([tuple(p[k] for k in perm) for p in pts])


def is_grid_canonical(
    norm: tuple, group: Group, grid: GridSpec, exclude: Sequence[GridSpec] = ()
) -> bool:
    """Emission rule shared by all shards.

    ``norm`` is emitted iff it is the least image, under ``group``, among the
    images that fit ``grid``, and no image fits one of the ``exclude`` grids
    (which own that orbit instead).
    """
    group = Group(group)
    r = len(norm[0])
    perms = [tuple(range(r))] if group is Group.TRANSLATIONS else list(itertools.permutations(range(r)))
    reversal = group is Group.FULL
    for img in _images(norm, perms, reversal):
        if any(ex.fits(img) for ex in exclude):
            return False
        if img < norm and grid.fits(img):
            return False
    return True


def enumerate_mes(
    grid: GridSpec,
    opts: SearchOptions | None = None,
    *,
    shard: tuple[int, int] = (0, 1),
    exclude: Sequence[GridSpec] = (),
    stats: SearchStats | None = None,
) -> Iterator[ExcSeq]:
    """Yield maximal exceptional sequences fitting ``grid``, one per orbit.

    Sequences are translated so their bounding-box minimum is the origin.  The
    work is split by the position of the second point: shard ``(k, n)`` takes
    every n-th candidate starting at k.  Closing the generator cancels the run.
    """
    opts = opts or SearchOptions()
    stats = stats if stats is not None else SearchStats()
    k_shard, n_shards = shard
    if not 0 <= k_shard < n_shards:
        raise ValueError(f"bad shard {shard}")
    board = _Board(grid)
    r = grid.rank
    n = grid.d.n
    half = n // 2
    cells = board.cells
    adm = board.adm
    parity = board.parity
    prune = opts.use_structural_pruning
    prune_parity = prune and grid.d.is_ones
    group = opts.dedupe_group
    origin = board.index[(0,) * r]
    every = opts.emit_every

    seq: list[tuple[int, ...]] = [cells[origin]]

    def dfs(depth: int, cand: int, lo: tuple, hi: tuple, n_even: tuple) -> Iterator[ExcSeq]:
        stats.nodes += 1
        if depth == n:
            stats.leaves += 1
            norm = normalize_translation(seq)
            if is_grid_canonical(norm, group, grid, exclude):
                stats.emitted += 1
                if every and stats.emitted % every == 0:
                    log.info("grid %s shard %s: %d emitted, %d nodes", grid.name, shard, stats.emitted, stats.nodes)
                yield ExcSeq(r, norm)
            return
        cand &= board.box(lo, hi)
        if prune:
            # every later point lies in cand; a maximal sequence has exactly
            # half of its points in even layers along each axis
            if cand.bit_count() < n - depth:
                return
            if prune_parity:
                for k in range(r):
                    even_mask, odd_mask = parity[k]
                    if n_even[k] + (cand & even_mask).bit_count() < half:
                        return
                    if depth - n_even[k] + (cand & odd_mask).bit_count() < half:
                        return
        if depth == 1:
            bits = [i for i in range(len(cells)) if cand >> i & 1]
            bits = bits[k_shard::n_shards]
        else:
            bits = _bits(cand)
        for i in bits:
            p = cells[i]
            seq.append(p)
            nlo = tuple(min(a, b) for a, b in zip(lo, p))
            nhi = tuple(max(a, b) for a, b in zip(hi, p))
            ne = tuple(e + (c % 2 == 0) for e, c in zip(n_even, p))
            yield from dfs(depth + 1, cand & adm[i], nlo, nhi, ne)
            seq.pop()

    yield from dfs(1, adm[origin], cells[origin], cells[origin], (1,) * r)


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def dedupe_canonical(stream: Iterable[ExcSeq], group: Group | str = Group.PERMUTATIONS) -> Iterator[ExcSeq]:
    """Forward the first member of each orbit, in input order."""
    seen = set()
    for seq in stream:
        key = canonical_form(seq, group).points
        if key not in seen:
            seen.add(key)
            yield seq


# -- reports --------------------------------------------------------------------------


class SearchAborted(RuntimeError):
    def __init__(self, seq: ExcSeq, reason: str):
        super().__init__(f"{reason}: {seq.as_lists()}")
        self.seq = seq
        self.reason = reason


def _coset_str(key) -> str:
    return "".join("".join(map(str, v)) for v in key)


@dataclass
class SearchReport:
    sequences_found: int = 0
    all_full: bool = True
    max_steps: int = 0
    step_histogram: dict[int, int] = field(default_factory=dict)
    distribution_histogram: dict[str, int] = field(default_factory=dict)
    counterexamples: list[list[list[int]]] = field(default_factory=list)
    structural_failures: list[dict] = field(default_factory=list)
    thin_checked: int = 0
    labeling_cosets: set[str] = field(default_factory=set)
    nodes_visited: int = 0
    runtime_s: float = 0.0
    per_grid: dict[str, dict] = field(default_factory=dict)

    def merge(self, other: "SearchReport") -> "SearchReport":
        self.sequences_found += other.sequences_found
        self.all_full = self.all_full and other.all_full
        self.max_steps = max(self.max_steps, other.max_steps)
        for src, dst in ((other.step_histogram, self.step_histogram), (other.distribution_histogram, self.distribution_histogram)):
            for key, v in src.items():
                dst[key] = dst.get(key, 0) + v
        self.counterexamples = sorted(self.counterexamples + other.counterexamples)
        self.structural_failures += other.structural_failures
        self.thin_checked += other.thin_checked
        self.labeling_cosets |= other.labeling_cosets
        self.nodes_visited += other.nodes_visited
        self.runtime_s += other.runtime_s
        return self

    def summary(self) -> dict:
        """Everything except timing; equal for equal sequence sets."""
        d = self.to_dict()
        d.pop("runtime_s")
        d.pop("nodes_visited")
        d.pop("per_grid")
        return d

    def to_dict(self) -> dict:
        return {
            "sequences_found": self.sequences_found,
            "all_full": self.all_full,
            "max_steps": self.max_steps,
            "step_histogram": {str(k): v for k, v in sorted(self.step_histogram.items())},
            "distribution_histogram": dict(sorted(self.distribution_histogram.items())),
            "counterexamples": self.counterexamples,
            "structural_failures": self.structural_failures,
            "thin_checked": self.thin_checked,
            "labeling_cosets_observed": len(self.labeling_cosets),
            "labeling_cosets": sorted(self.labeling_cosets),
            "nodes_visited": self.nodes_visited,
            "runtime_s": round(self.runtime_s, 3),
            "per_grid": self.per_grid,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SearchReport":
        return cls(
            sequences_found=d["sequences_found"],
            all_full=d["all_full"],
            max_steps=d["max_steps"],
            step_histogram={int(k): v for k, v in d["step_histogram"].items()},
            distribution_histogram=dict(d["distribution_histogram"]),
            counterexamples=d["counterexamples"],
            structural_failures=d.get("structural_failures", []),
            thin_checked=d.get("thin_checked", 0),
            labeling_cosets=set(d.get("labeling_cosets", [])),
            nodes_visited=d.get("nodes_visited", 0),
            runtime_s=d.get("runtime_s", 0.0),
            per_grid=d.get("per_grid", {}),
        )


def _set_key(points) -> tuple:
    return tuple(sorted(normalize_translation(points)))


def verify_fullness_report(
    stream: Iterable[ExcSeq],
    d: DimVec | None = None,
    *,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    check_structure: bool = False,
    cache: dict | None = None,
    on_sequence=None,
) -> SearchReport:
    """Run the closure on each sequence and aggregate verdicts.

    Fullness and step counts depend only on the point set, so closures are
    cached per translation class of the set.  Sequences with a thin axis are
    additionally decided by the layer recursion, which must agree.
    """
    rep = SearchReport()
    cache = {} if cache is None else cache
    t0 = time.perf_counter()
    for seq in stream:
        dv = d or DimVec.ones(seq.rank)
        key = _set_key(seq.points)
        hit = cache.get(key)
        if hit is None:
            res = closure(seq.points, dv, max_rounds)
            if res.status == CAPPED:
                raise SearchAborted(seq, f"round cap {max_rounds} reached")
            thin = None
            if dv.is_ones and thin_axis(seq) is not None:
                thin = thin_fullness(seq)
                if thin != res.full:
                    raise SearchAborted(seq, "thin-width verdict disagrees with closure")
            hit = (res.status == FULL, res.steps, thin is not None)
            cache[key] = hit
        full, steps, thin_done = hit
        rep.sequences_found += 1
        rep.thin_checked += thin_done
        if full:
            rep.step_histogram[steps] = rep.step_histogram.get(steps, 0) + 1
            rep.max_steps = max(rep.max_steps, steps)
        else:
            rep.all_full = False
            rep.counterexamples.append(seq.as_lists())
        if dv.is_ones:
            tag = distribution_tag(seq)
            rep.distribution_histogram[tag] = rep.distribution_histogram.get(tag, 0) + 1
            rep.labeling_cosets.add(_coset_str(label(seq).coset_key()))
            if check_structure:
                sr = check_structural_invariants(seq)
                if not sr.ok:
                    rep.structural_failures.append(
                        {"points": seq.as_lists(), "failures": [c.__dict__ for c in sr.failures]}
                    )
        if on_sequence is not None:
            on_sequence(seq, full, steps)
    rep.counterexamples.sort()
    rep.runtime_s = time.perf_counter() - t0
    return rep


# -- profiles ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    name: str
    grids: tuple[GridSpec, ...]
    group: Group = Group.PERMUTATIONS
    check_structure: bool = False
    description: str = ""


def _grids(*specs: str) -> tuple[GridSpec, ...]:
    return tuple(GridSpec.parse(s) for s in specs)


PROFILES = {
    p.name: p
    for p in (
        Profile("smoke_2d_5x5", _grids("5x5"), check_structure=True, description="r=2, cube bound 3*2-1=5"),
        Profile("smoke_3d_2cube", _grids("2x2x2"), check_structure=True),
        Profile("smoke_3d_3cube", _grids("3x3x3"), check_structure=True),
        Profile("smoke_3d_4cube", _grids("4x4x4"), check_structure=True),
        Profile("grid_6_6_11", _grids("6x6x11")),
        Profile("grid_6_9_9", _grids("6x9x9")),
        Profile(
            "full_theorem",
            _grids("6x6x11", "6x9x9"),
            description="union of both grids; orbits fitting 6x6x11 are owned by it",
        ),
    )
}


def get_profile(name_or_grid: str) -> Profile:
    if name_or_grid in PROFILES:
        return PROFILES[name_or_grid]
    grid = GridSpec.parse(name_or_grid)
    return Profile(f"grid_{grid.name}", (grid,))


def _unit(profile: Profile, gi: int, shard: int, shards: int, prune: bool, seq_path: str | None) -> dict:
    """Enumerate and verify one (grid, shard) unit; runs in worker processes."""
    grid = profile.grids[gi]
    opts = SearchOptions(use_structural_pruning=prune, dedupe_group=profile.group, parallel_shards=shards)
    stats = SearchStats()
    fh = open(seq_path, "w") if seq_path else None
    try:

        def record(seq, full, steps):
            if fh:
                fh.write(json.dumps({"points": seq.as_lists(), "full": full, "steps": steps}) + "\n")

        t0 = time.perf_counter()
        stream = enumerate_mes(grid, opts, shard=(shard, shards), exclude=profile.grids[:gi], stats=stats)
        rep = verify_fullness_report(
            stream, grid.d, check_structure=profile.check_structure, on_sequence=record
        )
        rep.nodes_visited = stats.nodes
        rep.runtime_s = time.perf_counter() - t0
    finally:
        if fh:
            fh.close()
    return rep.to_dict()


def _load_done(records: Path, profile: Profile, shards: int, prune: bool) -> dict[tuple[int, int], dict]:
    done = {}
    if not records.exists():
        return done
    with open(records) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if (
                rec.get("kind") == "unit"
                and rec["profile"] == profile.name
                and rec["shards"] == shards
                and rec["prune"] == prune
            ):
                done[(rec["grid_index"], rec["shard"])] = rec["report"]
    return done


def theorem_run(
    profile: str | Profile,
    *,
    shards: int | None = None,
    workers: int = 1,
    prune: bool = True,
    records: str | os.PathLike | None = None,
    save_sequences: bool = False,
    resume: bool = True,
) -> SearchReport:
    """Enumerate and verify every grid of a profile.

    Each (grid, shard) unit appends one JSON line to ``records`` when it
    finishes, so an interrupted run picks up where it stopped.  With
    ``save_sequences`` each unit also writes its sequences next to the records.
    """
    if isinstance(profile, str):
        profile = get_profile(profile)
    if shards is None:
        shards = int(os.environ.get("EXCSEQ_SHARDS", "1"))
    rec_path = Path(records) if records else None
    if rec_path:
        rec_path.parent.mkdir(parents=True, exist_ok=True)
    done = _load_done(rec_path, profile, shards, prune) if rec_path and resume else {}
    units = [(gi, k) for gi in range(len(profile.grids)) for k in range(shards)]
    todo = [u for u in units if u not in done]

    def seq_path(gi, k):
        if not (rec_path and save_sequences):
            return None
        return str(rec_path.with_name(f"{rec_path.stem}.{profile.grids[gi].name}.{k}of{shards}.jsonl"))

    def finished(gi, k, rep):
        done[(gi, k)] = rep
        log.info("unit %s shard %d/%d: %d sequences", profile.grids[gi].name, k, shards, rep["sequences_found"])
        if rec_path:
            with open(rec_path, "a") as fh:
                fh.write(
                    json.dumps(
                        {
                            "kind": "unit",
                            "profile": profile.name,
                            "grid": profile.grids[gi].name,
                            "grid_index": gi,
                            "shard": k,
                            "shards": shards,
                            "prune": prune,
                            "report": rep,
                        }
                    )
                    + "\n"
                )
                for ce in rep["counterexamples"]:
                    fh.write(json.dumps({"kind": "counterexample", "grid": profile.grids[gi].name, "points": ce}) + "\n")

    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = {
                pool.submit(_unit, profile, gi, k, shards, prune, seq_path(gi, k)): (gi, k) for gi, k in todo
            }
            for fut, (gi, k) in futs.items():
                finished(gi, k, fut.result())
    else:
        for gi, k in todo:
            finished(gi, k, _unit(profile, gi, k, shards, prune, seq_path(gi, k)))

    total = SearchReport()
    for gi, grid in enumerate(profile.grids):
        sub = SearchReport()
        for k in range(shards):
            sub.merge(SearchReport.from_dict(done[(gi, k)]))
        total.merge(sub)
        total.per_grid[grid.name] = {
            "sequences_found": sub.sequences_found,
            "all_full": sub.all_full,
            "max_steps": sub.max_steps,
            "step_histogram": {str(k): v for k, v in sorted(sub.step_histogram.items())},
            "nodes_visited": sub.nodes_visited,
        }
    return total


def report_document(report: SearchReport, profile: Profile, options: dict, wall_time: float) -> dict:
    """The JSON report file: search report plus provenance."""
    from . import __version__

    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool": "excseq",
        "tool_version": __version__,
        "profile": profile.name,
        "grids": [g.name for g in profile.grids],
        "dedupe_group": profile.group.value,
        "options": options,
        "wall_time_s": round(wall_time, 3),
    }
    doc.update(report.to_dict())
    return doc
