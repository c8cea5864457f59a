"""Sequential loop tracking: gated Hausdorff costs, assignment and loop IDs."""

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import FrameError, InputError, InvariantError, ParameterError, TopoTrackError
from .persistence import (
    LoopDescriptor,
    compute_ph1,
    extract_descriptors,
    filter_significant,
)
from .vr_complex import PointCloud, build_filtration, farthest_point_subsample

FORBIDDEN = math.inf
SENTINEL = 1e9


@dataclass(frozen=True)
class TrackerParams:
    """Sampling density ``alpha``, killer localization ``beta``, motion ``epsilon``.

    ``r_max=None`` truncates every filtration at its enclosing radius;
    ``max_points`` caps each frame by farthest-point subsampling.
    """

    alpha: float
    beta: float
    epsilon: float
    r_max: Optional[float] = None
    max_points: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha", "beta", "epsilon"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.beta < 0:
            raise ParameterError(f"beta must be non-negative, got {self.beta}")
        if self.epsilon < 0:
            raise ParameterError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.r_max is not None and not self.r_max > 0:
            raise ParameterError(f"r_max must be positive, got {self.r_max}")
        if self.max_points is not None and self.max_points < 1:
            raise ParameterError(f"max_points must be at least 1, got {self.max_points}")
        if not self.epsilon < self.alpha / 2:
            warnings.warn(f"epsilon={self.epsilon} is not below alpha/2={self.alpha / 2}; "
                          "loop correspondence is no longer guaranteed", stacklevel=3)

    @property
    def persistence_gate(self):
        return 2 * self.alpha + self.epsilon

    @property
    def distance_gate(self):
        return 2 * self.alpha + self.beta + self.epsilon


@dataclass(frozen=True)
class TopologicalState:
    frame_index: int
    loops: tuple = ()

    def __post_init__(self):
        ids = [d.id for d in self.loops]
        if len(set(ids)) != len(ids):
            raise InvariantError(f"duplicate loop IDs in frame {self.frame_index}: {ids}")

    @property
    def ids(self):
        return [d.id for d in self.loops]

    def by_id(self, loop_id):
        for d in self.loops:
            if d.id == loop_id:
                return d
        raise KeyError(loop_id)


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise InputError("Hausdorff distance needs two non-empty point sets")
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass(frozen=True)
class CostMatrix:
    """Rows are current-frame loops, columns previous-frame loops."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise InputError(f"cost matrix must be two-dimensional, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    def allowed(self, row, col):
        return math.isfinite(self.values[row, col])


def gated_cost_matrix(curr: Sequence[LoopDescriptor], prev: Sequence[LoopDescriptor],
                      params: TrackerParams) -> CostMatrix:
    """Hausdorff distance between killer edges where every gate passes, else FORBIDDEN.

    All three comparisons are strict, so a value on a gate boundary is forbidden.
    """
    out = np.full((len(curr), len(prev)), FORBIDDEN)
    pgate = params.persistence_gate
    dgate = params.distance_gate
    for r, c in enumerate(curr):
        for q, p in enumerate(prev):
            if not (abs(c.birth - p.birth) < pgate and abs(c.death - p.death) < pgate):
                continue
            dist = hausdorff(c.killer_edge.coords, p.killer_edge.coords)
            if dist < dgate:
                out[r, q] = dist
    return CostMatrix(out)


@dataclass(frozen=True)
class Matching:
    pairs: tuple
    unmatched_rows: tuple
    unmatched_cols: tuple
    total: float

    def as_set(self):
        return set(self.pairs)


def _solve(c, rows, cols):
    """Most finite pairs, then least cost, on the submatrix ``rows x cols``."""
    if not rows or not cols:
        return 0, 0.0, []
    sub = c[np.ix_(rows, cols)]
    finite = np.isfinite(sub)
    scale = float(np.abs(sub[finite]).sum()) if finite.any() else 0.0
    # the sentinel has to dominate any sum of genuine costs
    sentinel = max(SENTINEL, 4.0 * (scale + 1.0))
    ri, ci = linear_sum_assignment(np.where(finite, sub, sentinel))
    keep = finite[ri, ci]
    pairs = [(rows[a], cols[b]) for a, b in zip(ri[keep], ci[keep])]
    return len(pairs), math.fsum(c[r, q] for r, q in pairs), pairs


def assign(cost) -> Matching:
    """Minimum-cost partial assignment over the finite entries.

    The solver maximises the number of finite pairs, then minimises their
    total.  Among optimal matchings (total within ``1e-9`` relative) it
    returns the one whose sorted pair list is lexicographically smallest:
    each row in turn takes the lowest column that still admits an optimal
    completion.
    """
    c = CostMatrix(getattr(cost, "values", cost)).values
    n_rows, n_cols = c.shape
    best_card, best_cost, _ = _solve(c, list(range(n_rows)), list(range(n_cols)))
    tol = 1e-9 * (1.0 + abs(best_cost))
    rows_left = list(range(n_rows))
    cols_left = list(range(n_cols))
    pairs = []
    fixed = 0.0
    for r in range(n_rows):
        rows_left.remove(r)
        for q in list(cols_left):
            if not math.isfinite(c[r, q]):
                continue
            rest = [x for x in cols_left if x != q]
            card, total, _ = _solve(c, rows_left, rest)
            if len(pairs) + 1 + card == best_card and fixed + c[r, q] + total <= best_cost + tol:
                pairs.append((r, q))
                fixed += c[r, q]
                cols_left = rest
                break
        if len(pairs) == best_card:
            break
    matched_rows = {r for r, _ in pairs}
    matched_cols = {q for _, q in pairs}
    return Matching(
        pairs=tuple(pairs),
        unmatched_rows=tuple(r for r in range(n_rows) if r not in matched_rows),
        unmatched_cols=tuple(q for q in range(n_cols) if q not in matched_cols),
        total=math.fsum(c[r, q] for r, q in pairs),
    )


@dataclass
class IdCounter:
    """Source of fresh loop IDs; never hands out the same value twice."""

    next_id: int = 0

    def take(self):
        value = self.next_id
        self.next_id += 1
        return value


def propagate_ids(matching: Matching, prev: Optional[TopologicalState],
                  curr: Sequence[LoopDescriptor], counter: IdCounter,
                  cost: Optional[CostMatrix] = None, frame_index: int = 0) -> TopologicalState:
    """Matched loops inherit the previous ID; the rest get fresh IDs in order."""
    inherited = {}
    for r, q in matching.pairs:
        if prev is None or not (0 <= r < len(curr) and 0 <= q < len(prev.loops)):
            raise InvariantError(f"matching pair {(r, q)} is out of range")
        inherited[r] = (prev.loops[q].id,
                        None if cost is None else float(cost.values[r, q]))
    ids = [v[0] for v in inherited.values()]
    if len(set(ids)) != len(ids):
        raise InvariantError(f"two loops inherit the same ID: {sorted(ids)}")
    loops = []
    for r, d in enumerate(curr):
        if r in inherited:
            loop_id, dist = inherited[r]
            loops.append(d.with_id(loop_id, dist))
        else:
            loops.append(d.with_id(counter.take(), None))
    return TopologicalState(frame_index, tuple(loops))


def frame_descriptors(cloud, params: TrackerParams) -> List[LoopDescriptor]:
    """Significant loops of one frame, in canonical descriptor order."""
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(np.asarray(cloud))
    if params.max_points is not None:
        cloud = farthest_point_subsample(cloud, params.max_points, seed=params.seed)
    filtration = build_filtration(cloud, params.r_max)
    diagram = filter_significant(compute_ph1(filtration), params.alpha)
    return extract_descriptors(diagram, filtration, cloud)


@dataclass
class SeqPH:
    """Stateful tracker: feed frames in order, get one state per frame."""

    params: TrackerParams
    counter: IdCounter = field(default_factory=IdCounter)
    previous: Optional[TopologicalState] = None
    frames_seen: int = 0

    def step(self, cloud) -> TopologicalState:
        t = self.frames_seen
        try:
            if isinstance(cloud, PointCloud):
                cloud = PointCloud(cloud.points, t)
            else:
                cloud = PointCloud(np.asarray(cloud), t)
            descs = frame_descriptors(cloud, self.params)
            state = self.match(descs, t)
        except TopoTrackError as exc:
            raise FrameError(t, exc) from exc
        except (ValueError, ArithmeticError) as exc:
            raise FrameError(t, exc) from exc
        self.previous = state
        self.frames_seen += 1
        return state

    def match(self, descs, frame_index) -> TopologicalState:
        if self.previous is None:
            empty = Matching((), tuple(range(len(descs))), (), 0.0)
            return propagate_ids(empty, None, descs, self.counter, frame_index=frame_index)
        cost = gated_cost_matrix(descs, self.previous.loops, self.params)
        matching = assign(cost)
        return propagate_ids(matching, self.previous, descs, self.counter, cost, frame_index)


def track_sequence(frames: Sequence, params: TrackerParams) -> List[TopologicalState]:
    """Run the tracker over a whole sequence; frame ``t`` gets index ``t``."""
    if len(frames) < 1:
        raise InputError("a sequence needs at least one frame")
    tracker = SeqPH(params)
    return [tracker.step(cloud) for cloud in frames]
