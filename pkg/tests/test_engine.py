"""The seam restart and the lazy reduction must agree pivot for pivot."""

import numpy as np
import pytest

from topotrack import _engine
from topotrack.oracle import naive_reduction_ph1
from topotrack.persistence import compute_ph1
from topotrack.scenegen import SceneSpec, gen_scene
from topotrack.validation import annulus_cloud
from topotrack.vr_complex import build_filtration


def pivots(pts, seam_after):
    f = build_filtration(pts)
    ei, ej, er = f.edges
    n = f.source_count
    cleared = _engine.h0_death_mask(n, ei, ej)
    return _engine.h1_pivots(f.rank, f.values, n, ei, ej, er, cleared, seam_after)


def clouds():
    rng = np.random.default_rng(2024)
    out = []
    for k in range(40):
        kind = k % 4
        if kind == 0:
            pts = rng.random((30, 3))
        elif kind == 1:
            pts = np.round(rng.random((30, 3)) * 3) / 3
        elif kind == 2:
            pts = annulus_cloud(k, 60)
        else:
            t = rng.permutation(48) * (2 * np.pi / 48)
            pts = np.stack([np.cos(t), np.sin(t), 0.05 * rng.random(48)], axis=1)
        out.append(pts)
    return out


@pytest.mark.parametrize("seam_after", [-1, 0, 3])
def test_seam_restart_matches_plain_reduction(seam_after):
    for pts in clouds():
        assert np.array_equal(pivots(pts, seam_after), pivots(pts, 10 ** 9))


def test_default_path_matches_oracle_on_mid_size_clouds():
    for k, pts in enumerate(clouds()[:16]):
        assert compute_ph1(build_filtration(pts)).features == naive_reduction_ph1(pts).features, k


def test_seam_path_on_scene_frames():
    for kind in ("annulus", "two-annulus"):
        frames, _ = gen_scene(SceneSpec(kind, points_per_frame=240, frames=1, seed=3,
                                        separation=8.0))
        pts = frames[0].points
        assert np.array_equal(pivots(pts, -1), pivots(pts, 10 ** 9))


def test_hash_table_round_trip():
    keys, vals = _engine._table_new(1000)
    rng = np.random.default_rng(0)
    # keys that differ only above bit 27, like triangle keys of one value
    ks = np.unique(rng.integers(0, 2 ** 20, 900)) << 28
    for v, k in enumerate(ks):
        _engine._table_put(keys, vals, k, v)
    assert [_engine._table_get(keys, vals, k) for k in ks] == list(range(len(ks)))
    assert _engine._table_get(keys, vals, (1 << 50) + 5) == -1
