"""Self-checks behind ``topotrack validate``.

Each suite returns a :class:`SuiteResult` with a pass flag and a few report
lines.  Seeds make every suite reproducible; the performance suite is the
only one whose verdict depends on the machine.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from .oracle import brute_force_assignment, naive_reduction_ph1, verify_lemma2, verify_lemma3
from .persistence import compute_ph1
from .scenegen import SceneSpec, gen_scene
from .tracker import FORBIDDEN, SeqPH, TrackerParams, assign
from .vr_complex import PointCloud, build_filtration, covering_radius, farthest_point_subsample

PERF_BUDGET = {768: 0.5, 512: 0.2}
_GRID = 2.0 ** -20


@dataclass
class SuiteResult:
    name: str
    passed: bool
    lines: List[str] = field(default_factory=list)
    data: Dict[str, object] = field(default_factory=dict)

    def report(self):
        head = f"{'PASS' if self.passed else 'FAIL'} {self.name}"
        return "\n".join([head] + ["  " + s for s in self.lines])


def square():
    return np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)


def hexagon():
    t = np.arange(6) * (np.pi / 3)
    return np.stack([np.cos(t), np.sin(t), np.zeros(6)], axis=1)


def random_cost(rng, rows=6, cols=6, forbidden=0.3):
    c = rng.uniform(0.0, 10.0, (rows, cols))
    c[rng.random((rows, cols)) < forbidden] = FORBIDDEN
    return c


def annulus_cloud(seed, n=200, radius=1.0, width=0.2):
    """A planar annulus sample with random angles and radii."""
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi, n)
    r = radius + rng.uniform(-width / 2, width / 2, n)
    z = rng.uniform(-width / 4, width / 4, n)
    return np.stack([r * np.cos(th), r * np.sin(th), z], axis=1)


def oracle_suite(seed=0, clouds=100, size=12) -> SuiteResult:
    lines = []
    sq = compute_ph1(build_filtration(square())).features
    hx = compute_ph1(build_filtration(hexagon())).features
    hx_naive = naive_reduction_ph1(hexagon()).features
    fixtures = (len(sq) == 1 and abs(sq[0].birth - 0.5) <= 1e-12
                and abs(sq[0].death - math.sqrt(2) / 2) <= 1e-12
                and len(hx) == 1 and abs(hx[0].birth - 0.5) <= 1e-12
                and abs(hx[0].death - math.sqrt(3) / 2) <= 1e-12 and hx == hx_naive)
    lines.append(f"square {[(f.birth, f.death) for f in sq]}, "
                 f"hexagon {[(f.birth, f.death) for f in hx]}")
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(clouds):
        pts = rng.random((size, 3))
        if compute_ph1(build_filtration(pts)).features != naive_reduction_ph1(pts).features:
            bad += 1
    lines.append(f"{clouds} random {size}-point clouds: {bad} discrepancies")
    return SuiteResult("oracle", fixtures and bad == 0, lines, {"discrepancies": bad})


def assignment_suite(seed=0, trials=100) -> SuiteResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        c = random_cost(rng)
        m = assign(c)
        if m.as_set() != brute_force_assignment(c):
            bad += 1
    lines = [f"{trials} random 6x6 matrices, ~30% forbidden: {bad} discrepancies"]
    return SuiteResult("assignment", bad == 0, lines, {"discrepancies": bad})


def dominant(features):
    finite = [f for f in features if f.finite]
    return max(finite, key=lambda f: (f.lifetime, -f.birth)) if finite else None


def lemma2_trial(seed, dense_n=200, sub_n=60):
    dense = annulus_cloud(seed, dense_n)
    sub = farthest_point_subsample(PointCloud(dense), sub_n, seed=seed).points
    alpha = covering_radius(dense, sub)
    top = dominant(compute_ph1(build_filtration(dense)).features)
    return verify_lemma2(dense, sub, alpha, features=[top]), alpha


def lemma2_suite(seed=0, scenes=50) -> SuiteResult:
    failed = []
    worst = math.inf
    for k in range(scenes):
        rep, _ = lemma2_trial(seed + k)
        if not rep.ok:
            failed.append(seed + k)
        worst = min(worst, rep.worst_slack)
    lines = [f"{scenes - len(failed)}/{scenes} scenes within 0 <= shift <= alpha, "
             f"smallest slack {worst:.6g}"]
    if failed:
        lines.append(f"failing seeds {failed}")
    return SuiteResult("lemma2", not failed, lines, {"failed": failed})


def on_grid(points):
    """Round to a dyadic grid so translations by grid multiples are exact."""
    return np.round(np.asarray(points) / _GRID) * _GRID


def lemma3_trial(seed, radius=1.0):
    rng = np.random.default_rng(seed)
    cloud = annulus_cloud(seed, 120, radius)
    eps = 0.1 * radius
    direction = rng.normal(size=cloud.shape)
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    # magnitudes strictly below eps even after rounding
    moved = cloud + direction * rng.uniform(0, 0.99 * eps, (len(cloud), 1))
    return verify_lemma3(cloud, moved, eps)


def translation_trial(seed):
    rng = np.random.default_rng(seed)
    cloud = on_grid(annulus_cloud(seed, 80))
    shift = np.round(rng.uniform(-4, 4, 3) * 1024) / 1024
    a = compute_ph1(build_filtration(cloud)).features
    b = compute_ph1(build_filtration(cloud + shift)).features
    return all(x.birth == y.birth and x.death == y.death for x, y in zip(a, b)) and len(a) == len(b)


def lemma3_suite(seed=0, trials=50) -> SuiteResult:
    failed = []
    worst = math.inf
    for k in range(trials):
        rep = lemma3_trial(seed + k)
        if not rep.ok:
            failed.append(seed + k)
        worst = min(worst, rep.worst_slack)
    rigid = sum(translation_trial(seed + k) for k in range(10))
    lines = [f"{trials - len(failed)}/{trials} perturbations within |shift| <= eps, "
             f"smallest slack {worst:.6g}",
             f"{rigid}/10 rigid translations with identical diagrams"]
    return SuiteResult("lemma3", not failed and rigid == 10, lines, {"failed": failed})


def frame_times(points, frames=50, seed=0):
    """Per-frame wall time of the full tracker step on a moving annulus."""
    spec = SceneSpec("annulus", points_per_frame=points, frames=frames, tube_width=0.1,
                     noise_sigma=0.005, step_motion=0.01, seed=seed)
    clouds, truth = gen_scene(spec)
    a = 2 * truth.alpha
    tracker = SeqPH(TrackerParams(a, a, 0.45 * a, max_points=768, seed=seed))
    # compile and load the kernels outside the timed loop
    SeqPH(tracker.params).step(clouds[0])
    times = []
    for c in clouds:
        t0 = time.perf_counter()
        tracker.step(c)
        times.append(time.perf_counter() - t0)
    return np.array(times)


def performance_suite(seed=0, frames=50) -> SuiteResult:
    lines, data, ok = [], {}, True
    for n, budget in sorted(PERF_BUDGET.items(), reverse=True):
        t = frame_times(n, frames, seed)
        med = float(np.median(t))
        data[n] = med
        ok &= med <= budget
        lines.append(f"{n} points: median {1000 * med:.1f} ms, max {1000 * t.max():.1f} ms "
                     f"over {frames} frames (budget {1000 * budget:.0f} ms)")
    return SuiteResult("performance", ok, lines, data)


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "oracle": oracle_suite,
    "lemma2": lemma2_suite,
    "lemma3": lemma3_suite,
    "assignment": assignment_suite,
    "performance": performance_suite,
}
