"""Vietoris-Rips filtrations of 3-D point clouds (dimensions 0 to 2).

Filtration values follow the half-diameter convention: an edge between points
at distance ``d`` enters at ``d / 2`` and a triangle enters with its longest
edge.  Simplices are totally ordered by ``(value, dim, vertices)``; that order
decides every tie in the package.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import _engine
from .errors import InputError, ParameterError, StructuralError


@dataclass(frozen=True, eq=False)
class PointCloud:
    """One observation: an ordered set of 3-D points."""

    points: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1 and pts.size == 3:
            pts = pts.reshape(1, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InputError(f"expected an (n, 3) array of points, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise InputError("a point cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise InputError("point coordinates must be finite")
        if self.frame_index < 0:
            raise InputError("frame_index must be non-negative")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.frame_index == other.frame_index and np.array_equal(self.points, other.points)


@dataclass(frozen=True, order=False)
class FiltrationSimplex:
    vertices: tuple
    dim: int
    value: float

    @property
    def sort_key(self):
        return (self.value, self.dim, self.vertices)


def _as_cloud(cloud):
    return cloud if isinstance(cloud, PointCloud) else PointCloud(np.asarray(cloud))


def pairwise_distances(cloud) -> np.ndarray:
    """Euclidean distance matrix of a cloud.

    Each entry is ``sqrt(dx*dx + dy*dy + dz*dz)`` evaluated in that order, so a
    scalar loop using the same expression reproduces the matrix bit for bit.
    """
    pts = _as_cloud(cloud).points
    dx = pts[:, None, 0] - pts[None, :, 0]
    dy = pts[:, None, 1] - pts[None, :, 1]
    dz = pts[:, None, 2] - pts[None, :, 2]
    return np.sqrt(dx * dx + dy * dy + dz * dz)


def enclosing_radius(cloud) -> float:
    """Half of the smallest eccentricity; the Rips complex is a cone beyond it."""
    d = pairwise_distances(cloud)
    return 0.5 * float(d.max(axis=1).min())


class Filtration:
    """A canonically ordered, face-closed Rips filtration up to ``r_max``.

    Built from a cloud, the filtration is stored implicitly: the distinct edge
    values, a per-pair rank matrix and the sorted edge list.  Triangles are
    generated on demand; ``simplices`` materialises the full list and is only
    sensible for small clouds.  ``Filtration.from_simplices`` wraps an
    arbitrary explicit simplex list instead.
    """

    def __init__(self, *, r_max, source_count, frame_index=0, points=None, distances=None,
                 values=None, rank=None, edges=None, simplices=None):
        self.r_max = float(r_max)
        self.source_count = int(source_count)
        self.frame_index = int(frame_index)
        self.points = points
        self.distances = distances
        self.values = values
        self.rank = rank
        self._edges = edges
        if simplices is not None:
            self.__dict__["simplices"] = tuple(simplices)

    @property
    def is_metric(self):
        return self.rank is not None

    @classmethod
    def from_simplices(cls, simplices: Sequence[FiltrationSimplex], r_max=None, source_count=None,
                       frame_index=0):
        simplices = tuple(simplices)
        if r_max is None:
            r_max = max((s.value for s in simplices), default=0.0)
        if source_count is None:
            source_count = sum(1 for s in simplices if s.dim == 0)
        return cls(r_max=r_max, source_count=source_count, frame_index=frame_index,
                   simplices=simplices)

    @property
    def edges(self):
        """``(i, j, rank)`` arrays of the edges in canonical order (metric only)."""
        return self._edges

    def value_of_rank(self, r):
        return float(self.values[r])

    def edge_index(self, i, j) -> int:
        """Position of edge ``{i, j}`` in the canonical edge order (metric only)."""
        i, j = (i, j) if i < j else (j, i)
        r = int(self.rank[i, j])
        if r < 0:
            raise KeyError((i, j))
        n = self.source_count
        ei, ej, er = self._edges
        keys = self.__dict__.get("_edge_keys")
        if keys is None:
            keys = er * (n * n) + ei * n + ej
            self.__dict__["_edge_keys"] = keys
        return int(np.searchsorted(keys, r * (n * n) + i * n + j))

    def simplex_value(self, vertices) -> float:
        """Filtration value of a simplex given by vertex indices (metric only)."""
        vs = tuple(vertices)
        if len(vs) == 1:
            return 0.0
        r = max(int(self.rank[a, b]) for a, b in combinations(vs, 2))
        if r < 0:
            return float("inf")
        return float(self.values[r])

    @cached_property
    def simplices(self):
        n = self.source_count
        out = [FiltrationSimplex((i,), 0, 0.0) for i in range(n)]
        ei, ej, er = self._edges
        out.extend(
            FiltrationSimplex((int(i), int(j)), 1, float(self.values[r]))
            for i, j, r in zip(ei, ej, er)
        )
        tri = _engine.enumerate_triangles(self.rank, n)
        out.extend(
            FiltrationSimplex((int(a), int(b), int(c)), 2, float(self.values[r]))
            for a, b, c, r in tri
        )
        out.sort(key=lambda s: s.sort_key)
        return tuple(out)

    def __len__(self):
        return len(self.simplices)

    def validate(self):
        """Check canonical order and face closure of the explicit simplex list."""
        seen = {}
        prev = None
        for s in self.simplices:
            if s.dim != len(s.vertices) - 1 or s.dim not in (0, 1, 2):
                raise StructuralError(f"bad simplex {s}")
            if list(s.vertices) != sorted(set(s.vertices)):
                raise StructuralError(f"vertices of {s} are not a sorted tuple")
            if prev is not None and s.sort_key < prev:
                raise StructuralError(f"simplex {s.vertices} breaks the canonical order")
            prev = s.sort_key
            if s.dim > 0:
                for face in combinations(s.vertices, s.dim):
                    if face not in seen:
                        raise StructuralError(f"face {face} of {s.vertices} is missing")
                    if seen[face] > s.value:
                        raise StructuralError(f"face {face} enters after {s.vertices}")
            seen[s.vertices] = s.value
        return self


def build_filtration(cloud, r_max: Optional[float] = None) -> Filtration:
    """Rips filtration of ``cloud`` truncated at ``r_max``.

    ``r_max=None`` uses the enclosing radius, which leaves the H1 diagram
    unchanged.
    """
    cloud = _as_cloud(cloud)
    d = pairwise_distances(cloud)
    n = d.shape[0]
    if r_max is None:
        r_max = 0.5 * float(d.max(axis=1).min())
    elif not r_max > 0:
        raise ParameterError(f"r_max must be positive, got {r_max}")
    iu, ju = np.triu_indices(n, 1)
    vals = 0.5 * d[iu, ju]
    keep = vals <= r_max
    iu, ju, vals = iu[keep], ju[keep], vals[keep]
    # pairs arrive in lex order: sort by value, then restore lex order inside ties
    order = np.argsort(vals)
    vals = vals[order]
    fresh = np.empty(vals.shape[0], dtype=bool)
    fresh[:1] = True
    np.not_equal(vals[1:], vals[:-1], out=fresh[1:])
    er = np.cumsum(fresh, dtype=np.int64) - 1
    values = vals[fresh]
    if values.shape[0] < vals.shape[0]:
        tie_key = er * vals.shape[0] + order
        if np.any(tie_key[1:] < tie_key[:-1]):
            order = order[np.argsort(tie_key)]
    iu, ju = iu[order].astype(np.int64), ju[order].astype(np.int64)
    rank = np.full((n, n), -1, dtype=np.int64)
    rank[iu, ju] = er
    rank[ju, iu] = er
    for arr in (d, values, rank, iu, ju, er):
        arr.setflags(write=False)
    return Filtration(r_max=r_max, source_count=n, frame_index=cloud.frame_index,
                      points=cloud.points, distances=d, values=values, rank=rank,
                      edges=(iu, ju, er))


def farthest_point_indices(cloud, n: int, seed: int = 0, start: Optional[int] = None) -> np.ndarray:
    """Indices chosen by farthest-point traversal, in selection order."""
    pts = _as_cloud(cloud).points
    if n < 1:
        raise ParameterError("subsample size must be at least 1")
    total = pts.shape[0]
    if start is None:
        start = int(np.random.default_rng(seed).integers(total))
    elif not 0 <= start < total:
        raise ParameterError(f"start index {start} out of range")
    n = min(n, total)
    chosen = np.empty(n, dtype=np.int64)
    chosen[0] = start
    dist = np.linalg.norm(pts - pts[start], axis=1)
    for k in range(1, n):
        nxt = int(np.argmax(dist))
        chosen[k] = nxt
        dist = np.minimum(dist, np.linalg.norm(pts - pts[nxt], axis=1))
    return chosen


def farthest_point_subsample(cloud, n: int, seed: int = 0, start: Optional[int] = None) -> PointCloud:
    """Subsample to at most ``n`` points by farthest-point traversal.

    Clouds already within the budget are returned unchanged.  Selected points
    keep their original relative order.
    """
    cloud = _as_cloud(cloud)
    if n < 1:
        raise ParameterError("subsample size must be at least 1")
    if len(cloud) <= n:
        return cloud
    idx = np.sort(farthest_point_indices(cloud, n, seed=seed, start=start))
    return PointCloud(cloud.points[idx], cloud.frame_index)


def covering_radius(reference, sample) -> float:
    """Largest distance from a reference point to its nearest sample point."""
    ref = reference.points if isinstance(reference, PointCloud) else np.asarray(reference, float)
    smp = sample.points if isinstance(sample, PointCloud) else np.asarray(sample, float)
    dist, _ = cKDTree(smp).query(ref, k=1)
    return float(np.max(dist))


def sampling_radius(cloud) -> float:
    """Half the largest nearest-neighbour gap; a self-contained density estimate."""
    pts = _as_cloud(cloud).points
    if pts.shape[0] < 2:
        return 0.0
    dist, _ = cKDTree(pts).query(pts, k=2)
    return 0.5 * float(np.max(dist[:, 1]))
