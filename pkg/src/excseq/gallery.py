"""Named point sequences used as golden data."""

from __future__ import annotations

from .core import ExcSeq, standard_sequence

# Four-step infection of Z^3.
FOUR_STEP = [(0, 0, 0), (0, 0, 1), (0, 1, 2), (4, 1, 3), (5, 1, 3), (1, 4, 4), (1, 5, 4), (1, 2, 5)]

# The 5x5x5 example, last coordinate is the height; five steps.
FIVE_STEP = [(1, 0, 0), (0, 1, 1), (1, 3, 1), (1, 4, 1), (3, 1, 2), (4, 1, 2), (2, 2, 3), (2, 2, 4)]

# Slow infections: six and seven steps.  The *_SORTED lists are the point sets in
# sorted order; each set has exactly one exceptional order, held by SIX_STEP/SEVEN_STEP.
SIX_STEP_SORTED = [(0, 0, 0), (0, 0, 1), (0, 1, 4), (1, 2, 5), (1, 4, 4), (1, 5, 4), (4, 1, 3), (5, 1, 5)]
SEVEN_STEP_SORTED = [(0, 0, 0), (0, 1, 3), (1, 0, 4), (1, 4, 3), (1, 5, 5), (2, 2, 1), (4, 1, 4), (5, 1, 4)]
SIX_STEP = [(0, 0, 0), (0, 0, 1), (4, 1, 3), (0, 1, 4), (1, 4, 4), (1, 5, 4), (5, 1, 5), (1, 2, 5)]
SEVEN_STEP = [(0, 0, 0), (0, 1, 3), (1, 4, 3), (1, 0, 4), (4, 1, 4), (5, 1, 4), (1, 5, 5), (2, 2, 1)]

# Symmetric 4x4x4 example: two tilted triangles around the diagonal pair
# (1,1,1) < (2,2,2).  Within each triangle the order is free; this one is the
# order whose mod-2 labeling is TETRA_LABELING.
TETRA = [(0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1), (2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3)]
TETRA_LABELING = [(0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1), (0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]

# The two plane types, in their exceptional order.
PLANE_PAIRS = [(-1, -1), (0, -1), (6, 0), (7, 0)]
PLANE_SPLIT = [(-1, -1), (6, 0), (7, 0), (0, 1)]

# Translate of PLANE_SPLIT, and its transpose.
NOLEX_PLANE = [(0, 0), (7, 1), (8, 1), (1, 2)]
NOLEX_PLANE_T = [(0, 0), (1, 7), (1, 8), (2, 1)]

# Maximal subset of Z^2 (pairwise some |difference| = 1) that admits no
# exceptional order and infects nothing.
NOT_ORDERED = [(0, 2), (1, 0), (2, 3), (3, 1)]


def stretch(n: int) -> list[tuple[int, int, int]]:
    """Maximal sequence spanning n+2 layers in every direction."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [
        (0, 0, 0), (1, n, n), (1, n, n + 1), (1, n + 1, 0),
        (2, 1, 0), (2, n, 1), (n, n + 1, 1), (n + 1, n + 1, 1),
    ]


def nolex() -> list[tuple[int, int, int]]:
    """NOLEX_PLANE and its transpose stacked in adjacent layers."""
    return [p + (0,) for p in NOLEX_PLANE] + [p + (1,) for p in NOLEX_PLANE_T]


EXAMPLES = {
    "four_step": FOUR_STEP,
    "five_step": FIVE_STEP,
    "six_step": SIX_STEP,
    "seven_step": SEVEN_STEP,
    "tetra": TETRA,
    "plane_pairs": PLANE_PAIRS,
    "plane_split": PLANE_SPLIT,
    "nolex_plane": NOLEX_PLANE,
    "nolex_plane_t": NOLEX_PLANE_T,
    "not_ordered": NOT_ORDERED,
}

# Contamination steps of the reference sequences.
GOLDEN_STEPS = {"four_step": 4, "five_step": 5, "six_step": 6, "seven_step": 7}


def names() -> list[str]:
    return sorted([*EXAMPLES, "stretch", "nolex", "standard"])


def get(name: str, n: int = 1, r: int = 3) -> ExcSeq:
    """Look up a named sequence; ``n`` parametrizes ``stretch``, ``r`` ``standard``."""
    if name in EXAMPLES:
        return ExcSeq.of(EXAMPLES[name])
    if name == "stretch":
        return ExcSeq.of(stretch(n))
    if name == "nolex":
        return ExcSeq.of(nolex())
    if name == "standard":
        return standard_sequence(r)
    raise KeyError(f"unknown example {name!r}; known: {', '.join(names())}")
