import pytest

from excseq import gallery
from excseq.contamination import is_full
from excseq.core import ExcSeq, is_exceptional, standard_sequence
from excseq.structure import (
    LayerProfile,
    Segment,
    bounding_box_bound,
    canonical_loads,
    check_structural_invariants,
    distribution_tag,
    first_point_distribution,
    insert_empty_layers,
    layer_loads,
    merge_shift,
    parity_projections,
    project_layers,
    reduce_empty_layers,
    thin_axis,
    thin_fullness,
)

FOUR_STEP = ExcSeq.of(gallery.FOUR_STEP)


def test_layer_loads():
    prof = layer_loads(FOUR_STEP, 2)
    assert prof.loads == (1, 1, 1, 2, 2, 1) and prof.offset == 0
    assert prof.load(-1) == 0 and prof.load(6) == 0 and prof.top == 5
    for k in range(3):
        assert layer_loads(standard_sequence(3), k).loads == (4, 4)


def test_segments_split_on_empty_layers():
    prof = LayerProfile(axis=0, offset=3, loads=(1, 1, 0, 0, 2, 1, 1))
    assert prof.segments() == [Segment(3, 4), Segment(7, 9)]
    assert [s.width for s in prof.segments()] == [2, 3]


def test_canonical_loads():
    assert canonical_loads((3, 3, 1, 1)) == (1, 1, 3, 3)
    assert canonical_loads([1, 3, 3, 1]) == (1, 3, 3, 1)


def test_project_layers():
    plane = project_layers(standard_sequence(3), 2, {0})
    assert plane.points == ((0, 0), (0, 1), (1, 0), (1, 1))
    three = project_layers(FOUR_STEP, 2, {0, 3})
    assert len(three) == 3 and is_exceptional(three).exceptional
    with pytest.raises(ValueError):
        project_layers(FOUR_STEP, 2, {0, 1})
    with pytest.raises(ValueError):
        project_layers(ExcSeq.of([(0,), (1,)]), 0, {0})


@pytest.mark.parametrize("name", ["four_step", "five_step", "six_step", "seven_step", "tetra", "nolex", "standard"])
def test_parity_projections_are_maximal(name):
    seq = gallery.get(name)
    for k in range(3):
        even, odd = parity_projections(seq, k)
        assert len(even) == len(odd) == 4
        assert is_exceptional(even).maximal and is_exceptional(odd).maximal


@pytest.mark.parametrize("name", ["four_step", "five_step", "six_step", "seven_step", "tetra", "nolex", "standard", "plane_split"])
def test_structural_checks_pass_on_gallery(name):
    rep = check_structural_invariants(gallery.get(name))
    assert rep.ok, rep.failures
    assert {c.name for c in rep.checks} >= {
        "heavy_layer_exists",
        "heavy_layers_adjacent",
        "load_at_most_neighbour_sum",
        "segment_alternating_sum_zero",
        "outer_at_most_inner",
        "segment_width_at_least_two",
        "parity_projections_maximal",
    }


def test_some_layer_holds_three_points():
    assert max(max(layer_loads(FOUR_STEP, k).loads) for k in range(3)) >= 3


def test_isolated_singleton_is_reported_with_witness():
    # loads (2, 3, 2, 0, 0, 1) along x: only the singleton layer breaks the neighbour bound
    seq = ExcSeq.of([(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0), (1, 0, 1), (2, 0, 0), (2, 1, 1), (5, 0, 0)])
    assert not is_exceptional(seq).exceptional
    with pytest.raises(ValueError):
        check_structural_invariants(seq)
    rep = check_structural_invariants(seq, require_maximal=False)
    bad = {(c.name, c.axis): c.witness for c in rep.failures}
    assert bad[("load_at_most_neighbour_sum", 0)] == {"layers": [5], "loads": [(0, 1, 0)]}
    assert ("segment_width_at_least_two", 0) in bad


def test_two_heavy_layers_profile():
    seq = ExcSeq.of([(1, 1, 1), (0, 0, 2), (0, 1, 2), (0, 2, 3), (1, 1, 2), (1, 2, 0), (1, 2, 1), (2, 3, 3)])
    assert is_exceptional(seq).maximal
    assert layer_loads(seq, 1).loads == (1, 3, 3, 1)
    rep = check_structural_invariants(seq)
    assert rep.ok
    assert any(c.name == "segment_alternating_sum_zero" and c.axis == 1 and c.passed for c in rep.checks)


def test_distribution_tags():
    assert distribution_tag(standard_sequence(3)) == "thin"
    assert first_point_distribution(standard_sequence(3)) == (4, 4, 4)
    assert thin_axis(FOUR_STEP) is None
    assert distribution_tag(FOUR_STEP) in {"3,3,3", "3,3,2", "3,3,1", "3,2,2"}


def test_thin_fullness():
    assert thin_fullness(standard_sequence(3))
    assert thin_fullness(gallery.get("nolex")) == is_full(gallery.get("nolex"), shortcut=False)
    assert thin_fullness(ExcSeq.of([(0,), (1,)]))
    with pytest.raises(ValueError):
        thin_fullness(FOUR_STEP)
    with pytest.raises(ValueError):
        thin_fullness(ExcSeq.of(gallery.NOT_ORDERED))


def test_reduce_empty_layers():
    seq = ExcSeq.of([(0, 0), (1, 0), (4, 1), (5, 1)])
    assert layer_loads(seq, 0).loads == (1, 1, 0, 0, 1, 1)
    out = reduce_empty_layers(seq)
    assert layer_loads(out, 0).loads == (1, 1, 0, 1, 1)
    assert reduce_empty_layers(out) == out


def test_reduce_empty_layers_on_four_step_example():
    # x takes the values 0, 1, 4, 5: the two empty layers collapse to one
    assert layer_loads(FOUR_STEP, 0).loads == (3, 3, 0, 0, 1, 1)
    out = reduce_empty_layers(FOUR_STEP)
    assert [layer_loads(out, k).loads for k in range(3)] == [
        (3, 3, 0, 1, 1),
        layer_loads(FOUR_STEP, 1).loads,
        layer_loads(FOUR_STEP, 2).loads,
    ]
    assert is_exceptional(out).maximal and is_full(out)
    assert reduce_empty_layers(out) == out


def test_merge_shift():
    seq = ExcSeq.of([(-2, 0), (-1, 0), (1, 1), (2, 1)])
    assert merge_shift(seq, 0, 0) == seq
    assert merge_shift(seq, 0, 1).points == ((-1, 0), (0, 0), (1, 1), (2, 1))
    assert insert_empty_layers(seq, 0, 2).points == ((-4, 0), (-3, 0), (1, 1), (2, 1))
    with pytest.raises(ValueError):
        merge_shift(seq, 1, 1)
    with pytest.raises(ValueError):
        insert_empty_layers(seq, 0, -1)


@pytest.mark.parametrize("r, side", [(1, 2), (2, 5), (3, 11), (4, 23)])
def test_bounding_box_bound(r, side):
    assert bounding_box_bound(r) == side
