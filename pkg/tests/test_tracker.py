import math
import warnings

import numpy as np
import pytest

from topotrack.errors import FrameError, InputError, InvariantError, ParameterError
from topotrack.oracle import brute_force_assignment
from topotrack.persistence import EdgeRef, LoopDescriptor, TriangleRef
from topotrack.scenegen import SceneSpec, gen_scene
from topotrack.tracker import (
    FORBIDDEN,
    CostMatrix,
    IdCounter,
    Matching,
    SeqPH,
    TopologicalState,
    TrackerParams,
    assign,
    frame_descriptors,
    gated_cost_matrix,
    hausdorff,
    propagate_ids,
    track_sequence,
)
from topotrack.validation import random_cost, square


def desc(birth, death, p, q, loop_id=None):
    tri = TriangleRef((0, 1, 2), (p, q, p), death, True)
    return LoopDescriptor(birth, death, EdgeRef((0, 1), (tuple(p), tuple(q)), death), (tri,),
                          id=loop_id)


def params(alpha=0.3, beta=0.3, epsilon=0.1):
    return TrackerParams(alpha, beta, epsilon)


def test_hausdorff_examples():
    a = [(0, 0, 0), (1, 0, 0)]
    assert hausdorff(a, a) == 0
    assert hausdorff(a, [(0, 2, 0), (1, 2, 0)]) == 2
    assert hausdorff([(0, 0, 0)], [(3, 4, 0)]) == 5
    with pytest.raises(InputError):
        hausdorff([], a)


def test_hausdorff_matches_double_loop():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
        ab = max(min(math.dist(x, y) for y in b) for x in a)
        ba = max(min(math.dist(x, y) for x in a) for y in b)
        assert hausdorff(a, b) == pytest.approx(max(ab, ba), rel=1e-15)


def test_params_validation_and_warning():
    with pytest.raises(ParameterError):
        TrackerParams(0.0, 0.1, 0.0)
    with pytest.raises(ParameterError):
        TrackerParams(0.1, -1.0, 0.0)
    with pytest.warns(UserWarning):
        TrackerParams(0.1, 0.1, 0.06)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        TrackerParams(0.1, 0.1, 0.04)


def test_identical_lists_give_zero_diagonal():
    loops = [desc(0.1, 0.9, (0, 0, 0), (1, 0, 0)), desc(0.2, 0.7, (5, 0, 0), (6, 0, 0))]
    c = gated_cost_matrix(loops, loops, params()).values
    assert c[0, 0] == 0 and c[1, 1] == 0


def test_birth_gate_forbids_regardless_of_distance():
    p = params(alpha=0.3, epsilon=0.1)
    a = [desc(0.1, 0.9, (0, 0, 0), (1, 0, 0))]
    b = [desc(0.1 + 3 * 0.3, 0.9, (0, 0, 0), (1, 0, 0))]
    assert gated_cost_matrix(a, b, p).values[0, 0] == FORBIDDEN


def test_gates_are_strict():
    p = params(alpha=0.25, beta=0.5, epsilon=0.0625)
    gate = p.persistence_gate
    a = [desc(0.0, 1.0, (0, 0, 0), (1, 0, 0))]
    assert not CostMatrix(gated_cost_matrix(a, [desc(gate, 1.0, (0, 0, 0), (1, 0, 0))], p).values).allowed(0, 0)
    far = p.distance_gate
    assert gated_cost_matrix(a, [desc(0.0, 1.0, (0, far, 0), (1, far, 0))], p).values[0, 0] == FORBIDDEN
    near = far * (1 - 1e-9)
    assert gated_cost_matrix(a, [desc(0.0, 1.0, (0, near, 0), (1, near, 0))], p).values[0, 0] == near


def test_two_loop_scene_only_true_pairs_finite():
    spec = SceneSpec("two-annulus", points_per_frame=240, frames=2, separation=8.0,
                     step_motion=0.01, seed=2)
    frames, truth = gen_scene(spec)
    p = TrackerParams(truth.alpha, truth.beta, 0.02)
    d0, d1 = (frame_descriptors(f, p) for f in frames)
    c = gated_cost_matrix(d1, d0, p).values
    centre = lambda d: np.mean(d.killer_edge.coords, axis=0)[0] > 4
    truth_pairs = {(r, q) for r in range(len(d1)) for q in range(len(d0))
                   if centre(d1[r]) == centre(d0[q])}
    assert {(r, q) for r, q in zip(*np.nonzero(np.isfinite(c)))} == truth_pairs


def test_assign_examples():
    m = assign(np.array([[1, 10], [10, 1]], float))
    assert m.as_set() == {(0, 0), (1, 1)} and m.total == 2
    assert assign(np.array([[2.0]])).as_set() == {(0, 0)}
    m = assign(np.full((2, 3), FORBIDDEN))
    assert m.pairs == () and m.unmatched_rows == (0, 1) and m.unmatched_cols == (0, 1, 2)


def test_assign_prefers_more_pairs_over_cheaper_fewer():
    c = np.array([[1.0, 2.0], [FORBIDDEN, 1e6]])
    assert assign(c).as_set() == {(0, 0), (1, 1)}


def test_assign_tie_break_lowest_index():
    assert assign(np.ones((2, 2))).pairs == ((0, 0), (1, 1))


@pytest.mark.parametrize("shape", [(3, 5), (5, 3), (6, 6), (7, 7), (1, 4)])
def test_assign_matches_brute_force(shape):
    rng = np.random.default_rng(sum(shape))
    for _ in range(15):
        c = random_cost(rng, *shape)
        m = assign(c)
        assert m.as_set() == brute_force_assignment(c)


def test_assign_integer_ties_match_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(30):
        c = rng.integers(0, 3, (5, 5)).astype(float)
        c[rng.random((5, 5)) < 0.3] = FORBIDDEN
        assert assign(c).as_set() == brute_force_assignment(c)


def test_propagate_first_frame_and_counter():
    counter = IdCounter()
    loops = [desc(0.1, 0.9, (0, 0, 0), (1, 0, 0)), desc(0.2, 0.5, (5, 0, 0), (6, 0, 0))]
    s0 = propagate_ids(Matching((), (0, 1), (), 0.0), None, loops, counter)
    assert s0.ids == [0, 1]
    curr = loops + [desc(0.3, 0.5, (9, 0, 0), (9, 1, 0))]
    cost = CostMatrix(np.array([[FORBIDDEN, FORBIDDEN], [FORBIDDEN, 0.5], [FORBIDDEN, FORBIDDEN]]))
    s1 = propagate_ids(Matching(((1, 1),), (0, 2), (0,), 0.5), s0, curr, counter, cost, 1)
    assert s1.ids == [2, 1, 3]
    assert s1.loops[1].hausdorff_prev == 0.5 and s1.loops[0].hausdorff_prev is None


def test_propagate_keeps_previous_id():
    prev = TopologicalState(0, (desc(0.1, 0.9, (0, 0, 0), (1, 0, 0), loop_id=7),))
    s = propagate_ids(Matching(((0, 0),), (), (), 0.0), prev,
                      [desc(0.1, 0.9, (0, 0, 0), (1, 0, 0))], IdCounter(8))
    assert s.ids == [7]


def test_propagate_rejects_duplicate_inheritance():
    prev = TopologicalState(0, (desc(0.1, 0.9, (0, 0, 0), (1, 0, 0), loop_id=7),))
    loops = [desc(0.1, 0.9, (0, 0, 0), (1, 0, 0))] * 2
    with pytest.raises(InvariantError):
        propagate_ids(Matching(((0, 0), (1, 0)), (), (), 0.0), prev, loops, IdCounter(8))


def test_static_sequence_keeps_ids_with_zero_distance():
    pts = np.concatenate([square(), square() + [3.0, 0, 0]])
    states = track_sequence([pts] * 10, TrackerParams(0.1, 0.1, 0.01, r_max=1.0))
    assert all(s.ids == [0, 1] for s in states)
    for s in states[1:]:
        assert all(d.hausdorff_prev == 0.0 for d in s.loops)
    assert all(d.hausdorff_prev is None for d in states[0].loops)


def test_translated_square_keeps_its_id():
    # a unit square lives 0.207 < alpha; side 2 lives 0.414
    frames = [2 * square() + [0.01 * t, 0, 0] for t in range(20)]
    states = track_sequence(frames, TrackerParams(0.3, 0.3, 0.02))
    assert [s.ids for s in states] == [[0]] * 20
    assert [s.frame_index for s in states] == list(range(20))


def test_vanished_loop_gets_new_id():
    line = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]], float)
    p = TrackerParams(0.1, 0.1, 0.01)
    states = track_sequence([square(), line, square()], p)
    assert [s.ids for s in states] == [[0], [], [1]]


def test_tracking_is_deterministic():
    frames, truth = gen_scene(SceneSpec("annulus", points_per_frame=150, frames=4,
                                        step_motion=0.01, seed=9))
    p = TrackerParams(truth.alpha, truth.beta, 0.02, max_points=120, seed=3)
    assert track_sequence(frames, p) == track_sequence(frames, p)


def test_frame_errors_carry_index():
    tracker = SeqPH(TrackerParams(0.1, 0.1, 0.01, r_max=1.0))
    tracker.step(square())
    with pytest.raises(FrameError) as info:
        tracker.step(np.array([[0.0, 0.0, np.inf]]))
    assert info.value.frame_index == 1 and info.value.exit_code == 1
    with pytest.raises(InputError):
        track_sequence([], TrackerParams(0.1, 0.1, 0.01))
