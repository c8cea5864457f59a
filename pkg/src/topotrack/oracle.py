"""Brute-force references used to validate the fast paths.

Nothing here is optimised.  The reduction enumerates every simplex and
reduces the full boundary matrix; the assignment oracle enumerates every
partial matching.  Both refuse inputs large enough to make that painful.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Optional

import numpy as np

from .errors import ContractError, InputError
from .persistence import (
    LoopFeature,
    PersistenceDiagram1,
    compute_ph1,
)
from .vr_complex import PointCloud, build_filtration

MAX_ORACLE_POINTS = 64
MAX_ORACLE_SIDE = 8


def _points(cloud):
    return cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)


def naive_distances(cloud):
    pts = _points(cloud)
    n = len(pts)
    d = [[0.0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            dx = float(pts[a][0]) - float(pts[b][0])
            dy = float(pts[a][1]) - float(pts[b][1])
            dz = float(pts[a][2]) - float(pts[b][2])
            d[a][b] = math.sqrt(dx * dx + dy * dy + dz * dz)
    return d


def naive_simplices(cloud, r_max):
    """All simplices of dimension <= 2 with value <= r_max, canonically sorted."""
    d = naive_distances(cloud)
    n = len(d)
    out = [((v,), 0, 0.0) for v in range(n)]
    for dim in (1, 2):
        for vs in combinations(range(n), dim + 1):
            value = max(d[a][b] for a, b in combinations(vs, 2)) / 2
            if value <= r_max:
                out.append((vs, dim, value))
    out.sort(key=lambda s: (s[2], s[1], s[0]))
    return out


def naive_pairs(cloud, r_max):
    """Standard column reduction of the whole boundary matrix.

    Returns ``(simplices, pairs, essential)`` where ``pairs`` maps the index of
    every negative simplex to the index of the positive simplex it kills.
    """
    pts = _points(cloud)
    if len(pts) > MAX_ORACLE_POINTS:
        raise ContractError(f"oracle limited to {MAX_ORACLE_POINTS} points, got {len(pts)}")
    simplices = naive_simplices(cloud, r_max)
    index = {s[0]: k for k, s in enumerate(simplices)}
    low_owner = {}
    pairs = {}
    for k, (vs, dim, _) in enumerate(simplices):
        col = {index[f] for f in combinations(vs, dim)} if dim > 0 else set()
        while col:
            low = max(col)
            if low not in low_owner:
                break
            col ^= low_owner[low]
        if col:
            low = max(col)
            low_owner[low] = col
            pairs[k] = low
    killed = set(pairs.values())
    essential = [k for k in range(len(simplices)) if k not in killed and k not in pairs]
    return simplices, pairs, essential


def naive_reduction_ph1(cloud, r_max: Optional[float] = None) -> PersistenceDiagram1:
    """H1 diagram by textbook reduction, in the same feature order as the engine."""
    if r_max is None:
        r_max = 0.5 * min(max(row) for row in naive_distances(cloud))
    simplices, pairs, essential = naive_pairs(cloud, r_max)
    features = []
    for neg, pos in pairs.items():
        e_vs, e_dim, birth = simplices[pos]
        t_vs, _, death = simplices[neg]
        if e_dim == 1 and death > birth:
            features.append((pos, LoopFeature(birth, death, e_vs, t_vs)))
    for k in essential:
        vs, dim, birth = simplices[k]
        if dim == 1:
            features.append((k, LoopFeature(birth, math.inf, vs, None)))
    features.sort(key=lambda kv: kv[0])
    frame = cloud.frame_index if isinstance(cloud, PointCloud) else 0
    return PersistenceDiagram1(tuple(f for _, f in features), frame)


def brute_force_assignment(cost) -> set:
    """Best partial matching by exhaustive search.

    Objective: as many finite pairs as possible, then the smallest total cost,
    then the lexicographically smallest sorted pair list.
    """
    c = np.asarray(getattr(cost, "values", cost), dtype=float)
    if c.ndim != 2:
        raise InputError("cost matrix must be two-dimensional")
    rows, cols = c.shape
    if rows > MAX_ORACLE_SIDE or cols > MAX_ORACLE_SIDE:
        raise ContractError(f"oracle limited to {MAX_ORACLE_SIDE}x{MAX_ORACLE_SIDE}")
    finite = np.isfinite(c)
    candidates = []
    for size in range(min(rows, cols), -1, -1):
        for rsel in combinations(range(rows), size):
            for csel in permutations(range(cols), size):
                if all(finite[r, q] for r, q in zip(rsel, csel)):
                    total = math.fsum(c[r, q] for r, q in zip(rsel, csel))
                    candidates.append((total, sorted(zip(rsel, csel))))
        if candidates:
            break
    best = min(t for t, _ in candidates)
    tol = 1e-9 * (1.0 + abs(best))
    chosen = min(m for t, m in candidates if t <= best + tol)
    return set(chosen)


@dataclass
class LemmaReport:
    """Outcome of a bound check between two diagrams."""

    tolerance: float
    matched: list = field(default_factory=list)
    unmatched: list = field(default_factory=list)
    worst_birth: float = 0.0
    worst_death: float = 0.0

    @property
    def ok(self):
        return not self.unmatched

    @property
    def worst_slack(self):
        """Smallest distance from any observed shift to its bound."""
        return self.tolerance - max(self.worst_birth, self.worst_death)

    def summary(self):
        status = "ok" if self.ok else "VIOLATED"
        return (f"{status}: {len(self.matched)} matched, {len(self.unmatched)} unmatched, "
                f"max |dbirth|={self.worst_birth:.6g}, max |ddeath|={self.worst_death:.6g}, "
                f"bound={self.tolerance:.6g}")


def _greedy_match(sources, targets, accept, tolerance):
    """Match each source, longest lifetime first, to the closest admissible target."""
    report = LemmaReport(tolerance)
    used = set()
    for f in sorted(sources, key=lambda f: (-f.lifetime, f.birth, f.creator_edge)):
        best = None
        for k, g in enumerate(targets):
            if k in used:
                continue
            db, dd = g.birth - f.birth, g.death - f.death
            if accept(db, dd):
                score = max(abs(db), abs(dd))
                if best is None or score < best[0]:
                    best = (score, k, db, dd)
        if best is None:
            report.unmatched.append(f)
            continue
        _, k, db, dd = best
        used.add(k)
        report.matched.append((f, targets[k], db, dd))
        report.worst_birth = max(report.worst_birth, abs(db))
        report.worst_death = max(report.worst_death, abs(dd))
    return report


def _finite_features(cloud):
    return [f for f in compute_ph1(build_filtration(cloud)).features if f.finite]


def verify_lemma2(dense, sub, alpha: float, features=None) -> LemmaReport:
    """Check the subsampling bounds ``0 <= sub - dense <= alpha`` on birth and death.

    Every dense feature with lifetime above ``alpha`` must find a partner.
    """
    dense_pts, sub_pts = _points(dense), _points(sub)
    members = {tuple(p) for p in dense_pts.tolist()}
    if any(tuple(p) not in members for p in sub_pts.tolist()):
        raise ContractError("subsample is not a subset of the dense cloud")
    src = features if features is not None else _finite_features(dense)
    src = [f for f in src if f.lifetime > alpha]
    dst = _finite_features(sub)
    return _greedy_match(src, dst, lambda db, dd: 0 <= db <= alpha and 0 <= dd <= alpha, alpha)


def verify_lemma3(cloud, moved, epsilon: float) -> LemmaReport:
    """Check that features with lifetime above ``epsilon`` shift by at most ``epsilon``."""
    a, b = _points(cloud), _points(moved)
    if a.shape != b.shape:
        raise ContractError("clouds must have the same cardinality")
    disp = np.sqrt(((a - b) ** 2).sum(axis=1)).max() if len(a) else 0.0
    if not disp < epsilon:
        raise ContractError(f"displacement {disp:.6g} is not below epsilon {epsilon:.6g}")
    src = [f for f in _finite_features(cloud) if f.lifetime > epsilon]
    dst = _finite_features(moved)
    return _greedy_match(src, dst, lambda db, dd: abs(db) <= epsilon and abs(dd) <= epsilon,
                         epsilon)
