"""One-dimensional persistence with explicit creator/killer pairing."""

import math
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Optional

import numpy as np

from . import _engine
from .errors import ContractError, InvariantError
from .vr_complex import Filtration, PointCloud

INF = math.inf


@dataclass(frozen=True)
class LoopFeature:
    birth: float
    death: float
    creator_edge: tuple
    killer_triangle: Optional[tuple] = None

    @property
    def lifetime(self):
        return self.death - self.birth

    @property
    def finite(self):
        return self.killer_triangle is not None


@dataclass(frozen=True)
class PersistenceDiagram1:
    features: tuple = ()
    frame_index: int = 0

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def as_array(self):
        return np.array([(f.birth, f.death) for f in self.features], dtype=float).reshape(-1, 2)


@dataclass(frozen=True)
class EdgeRef:
    vertices: tuple
    coords: tuple
    value: float


@dataclass(frozen=True)
class TriangleRef:
    vertices: tuple
    coords: tuple
    value: float
    paired: bool = False

    @property
    def centroid(self):
        return np.mean(np.asarray(self.coords), axis=0)


@dataclass(frozen=True)
class LoopDescriptor:
    """Geometric summary of one significant loop in one frame."""

    birth: float
    death: float
    killer_edge: EdgeRef
    killer_triangles: tuple
    neighbor_triangles: tuple = ()
    id: Optional[int] = None
    hausdorff_prev: Optional[float] = None
    frame_index: int = 0

    @property
    def lifetime(self):
        return self.death - self.birth

    def with_id(self, loop_id, hausdorff_prev=None):
        return replace(self, id=loop_id, hausdorff_prev=hausdorff_prev)


def _pivots(filtration):
    cached = filtration.__dict__.get("_pivots")
    if cached is None:
        ei, ej, er = filtration.edges
        n = filtration.source_count
        if (len(filtration.values) + 1) * n ** 3 >= 2 ** 62:
            raise ContractError(f"{n} points exceed the triangle key range; subsample first")
        cleared = _engine.h0_death_mask(n, ei, ej)
        cached = _engine.h1_pivots(filtration.rank, filtration.values, n, ei, ej, er, cleared)
        filtration.__dict__["_pivots"] = cached
    return cached


def _decode(key, n):
    lex = int(key) % (n * n * n)
    return (lex // (n * n), (lex // n) % n, lex % n), int(key) // (n * n * n)


def _ph1_metric(filtration):
    n = filtration.source_count
    ei, ej, er = filtration.edges
    partner = _pivots(filtration)
    n3 = n * n * n
    # zero-persistence pairs and cleared edges drop out here
    keep = (partner == -1) | ((partner >= 0) & (partner // n3 > er))
    features = []
    for e in np.flatnonzero(keep):
        birth = float(filtration.values[er[e]])
        key = partner[e]
        edge = (int(ei[e]), int(ej[e]))
        if key == -1:
            features.append(LoopFeature(birth, INF, edge, None))
        else:
            tri, r = _decode(key, n)
            features.append(LoopFeature(birth, float(filtration.values[r]), edge, tri))
    return features


def _ph1_explicit(filtration):
    filtration.validate()
    simplices = filtration.simplices
    vertex_pos = {}
    edge_pos = {}
    edges = []
    for s in simplices:
        if s.dim == 0:
            vertex_pos[s.vertices[0]] = len(vertex_pos)
        elif s.dim == 1:
            edge_pos[s.vertices] = len(edges)
            edges.append(s)
    parent = list(range(len(vertex_pos)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    creator = [False] * len(edges)
    for k, s in enumerate(edges):
        a, b = find(vertex_pos[s.vertices[0]]), find(vertex_pos[s.vertices[1]])
        if a == b:
            creator[k] = True
        else:
            parent[max(a, b)] = min(a, b)

    reduced = {}
    killed = {}
    for s in simplices:
        if s.dim != 2:
            continue
        col = {edge_pos[f] for f in combinations(s.vertices, 2)}
        while col:
            low = max(col)
            if low not in reduced:
                break
            col ^= reduced[low]
        if col:
            low = max(col)
            if not creator[low]:
                raise InvariantError(f"triangle {s.vertices} reduced onto a tree edge")
            reduced[low] = col
            killed[low] = s
    features = []
    for k, s in enumerate(edges):
        if not creator[k]:
            continue
        if k in killed:
            t = killed[k]
            if t.value > s.value:
                features.append(LoopFeature(s.value, t.value, s.vertices, t.vertices))
        else:
            features.append(LoopFeature(s.value, INF, s.vertices, None))
    return features


def compute_ph1(filtration: Filtration) -> PersistenceDiagram1:
    """Persistence pairs of 1-dimensional classes over GF(2).

    Features come out in the canonical order of their creator edges.
    Zero-lifetime pairs are dropped; classes alive at ``r_max`` get an infinite
    death and no killer triangle.
    """
    if filtration.is_metric:
        features = _ph1_metric(filtration)
    else:
        features = _ph1_explicit(filtration)
    return PersistenceDiagram1(tuple(features), filtration.frame_index)


def filter_significant(diagram: PersistenceDiagram1, alpha: float) -> PersistenceDiagram1:
    if alpha < 0:
        raise ContractError("alpha must be non-negative")
    kept = tuple(f for f in diagram.features if f.finite and f.lifetime > alpha)
    return PersistenceDiagram1(kept, diagram.frame_index)


def _coords(points, vertices):
    return tuple(tuple(float(x) for x in points[v]) for v in vertices)


def _edge_order_key(filtration, i, j):
    return (int(filtration.rank[i, j]), i, j)


def extract_loop_descriptor(feature: LoopFeature, filtration: Filtration,
                            cloud: Optional[PointCloud] = None) -> LoopDescriptor:
    """Killer edge, killer triangles and their triangle neighbourhood.

    The killer edge is the last edge of the paired triangle in canonical order,
    so its value equals the death.  The killer triangles are the paired
    triangle and, when it enters at the same value, the triangle that the
    reduction pairs with the killer edge itself; on a triangulated surface
    these are the two triangles on either side of the edge.  Neighbours are
    triangles present at the death value that share an edge with a killer
    triangle.
    """
    if not feature.finite:
        raise ContractError("cannot describe a feature that never dies")
    if not filtration.is_metric:
        raise ContractError("descriptors need a filtration built from a point cloud")
    points = filtration.points if cloud is None else cloud.points
    if points.shape[0] != filtration.source_count:
        raise ContractError("cloud does not match the filtration")
    rank = filtration.rank
    n = filtration.source_count
    a, b, c = feature.killer_triangle
    i, j = max(((a, b), (a, c), (b, c)), key=lambda e: _edge_order_key(filtration, *e))
    r = int(rank[i, j])
    death = float(filtration.values[r])
    if death != feature.death:
        raise ContractError("feature does not belong to this filtration")

    killers = [tuple(feature.killer_triangle)]
    key = _pivots(filtration)[filtration.edge_index(i, j)]
    if key >= 0:
        tri, tr = _decode(key, n)
        if tr == r and tri not in killers:
            killers.append(tri)

    def admissible(p, q):
        ok = (rank[p] >= 0) & (rank[p] <= r) & (rank[q] >= 0) & (rank[q] <= r)
        ok[p] = False
        ok[q] = False
        return np.flatnonzero(ok)

    killer_set = set(killers)
    neighbors = set()
    for tri in killers:
        for p, q in combinations(tri, 2):
            for k in admissible(p, q):
                t = tuple(sorted((p, q, int(k))))
                if t not in killer_set:
                    neighbors.add(t)

    def tri_value(t):
        x, y, z = t
        return max(int(rank[x, y]), int(rank[x, z]), int(rank[y, z]))

    killers.sort(key=lambda t: (tri_value(t), t))
    neighbor_list = sorted(neighbors, key=lambda t: (tri_value(t), t))
    paired = tuple(feature.killer_triangle)
    return LoopDescriptor(
        birth=feature.birth,
        death=feature.death,
        killer_edge=EdgeRef((int(i), int(j)), _coords(points, (i, j)), death),
        killer_triangles=tuple(
            TriangleRef(tuple(int(v) for v in t), _coords(points, t),
                        float(filtration.values[tri_value(t)]), t == paired)
            for t in killers
        ),
        neighbor_triangles=tuple(
            TriangleRef(tuple(int(v) for v in t), _coords(points, t),
                        float(filtration.values[tri_value(t)]))
            for t in neighbor_list
        ),
        frame_index=filtration.frame_index,
    )


def descriptor_order_key(d: LoopDescriptor):
    """Canonical descriptor order: longest lifetime first, then earliest birth."""
    return (-d.lifetime, d.birth, d.killer_edge.vertices)


def extract_descriptors(diagram: PersistenceDiagram1, filtration: Filtration,
                        cloud: Optional[PointCloud] = None):
    descs = [extract_loop_descriptor(f, filtration, cloud) for f in diagram.features]
    descs.sort(key=descriptor_order_key)
    return descs
