"""Synthetic annulus scenes with known loops and bounded motion.

Points are material: each keeps its tube offset and noise for the whole
sequence and only the rigid motion (plus optional breathing) changes, so the
per-step displacement bound is a property of the motion alone.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import InvariantError, ParameterError
from .vr_complex import PointCloud, covering_radius

KINDS = ("annulus", "two-annulus", "breathing-annulus")

# per-step budget shares; they sum to 0.95 so displacement stays strictly below step_motion
_SHARE_TRANSLATE = 0.5
_SHARE_SPIN = 0.25
_SHARE_TILT = 0.1
_SHARE_BREATHE = 0.1
_BREATHE_AMPLITUDE = 0.2


@dataclass(frozen=True)
class SceneSpec:
    kind: str = "annulus"
    points_per_frame: int = 512
    frames: int = 10
    radius: float = 1.0
    tube_width: float = 0.1
    noise_sigma: float = 0.0
    step_motion: float = 0.0
    separation: Optional[float] = None
    seed: int = 0
    alpha: Optional[float] = None
    beta: Optional[float] = None
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown scene kind {self.kind!r}; expected one of {KINDS}")
        if self.frames < 1:
            raise ParameterError("a scene needs at least one frame")
        loops = 2 if self.kind == "two-annulus" else 1
        if self.points_per_frame < 3 * loops:
            raise ParameterError("too few points per frame")
        if not self.radius > 0:
            raise ParameterError("radius must be positive")
        if self.tube_width < 0 or self.noise_sigma < 0 or self.step_motion < 0:
            raise ParameterError("tube_width, noise_sigma and step_motion must be non-negative")
        if self.tube_width >= self.radius:
            raise ParameterError("tube_width must be smaller than the radius")
        if self.epsilon is not None and self.step_motion > 0 and not self.step_motion < self.epsilon:
            raise ParameterError(f"step_motion {self.step_motion} must be below epsilon {self.epsilon}")
        if self.kind == "two-annulus":
            if self.separation is None:
                raise ParameterError("two-annulus scenes need a separation")
            gap = self.separation - 2 * self.outer_radius
            need = self.tracking_bound
            if not gap > need:
                raise ParameterError(
                    f"annuli {self.separation} apart leave a gap of {gap:.6g}, "
                    f"which must exceed 2*alpha + beta + epsilon = {need:.6g}")

    @property
    def n_loops(self):
        return 2 if self.kind == "two-annulus" else 1

    @property
    def outer_radius(self):
        """Radius bound of one annulus, including breathing and a 6-sigma noise margin."""
        grow = 1 + _BREATHE_AMPLITUDE if self.kind == "breathing-annulus" else 1
        return self.radius * grow + self.tube_width / 2 + 6 * self.noise_sigma

    @property
    def beta_bound(self):
        """Any two edges on one annulus lie within its outer diameter of each other."""
        return self.beta if self.beta is not None else 2 * self.outer_radius

    @property
    def tracking_bound(self):
        alpha = self.alpha or 0.0
        eps = self.epsilon if self.epsilon is not None else self.step_motion
        return 2 * alpha + self.beta_bound + eps


@dataclass(frozen=True)
class LoopTruth:
    center: tuple
    normal: tuple
    radius: float
    thickness: float


@dataclass
class GroundTruth:
    """Per frame, per loop geometry plus the measured scene bounds."""

    loops: List[List[LoopTruth]]
    covering_radius: List[float]
    max_step_displacement: List[float]
    alpha: float
    beta: float
    epsilon: Optional[float]
    spec: SceneSpec = field(repr=False, default=None)

    @property
    def frames(self):
        return len(self.loops)


def _rotation(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    cc = 1 - c
    return np.array([[c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
                     [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
                     [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc]])


def _tube_offsets(rng, n, half_width):
    """Uniform points in a disk of radius ``half_width``: (radial, normal) offsets."""
    r = half_width * np.sqrt(rng.random(n))
    phi = rng.uniform(0, 2 * np.pi, n)
    return r * np.cos(phi), r * np.sin(phi)


def _reference_offsets(n_angles, half_width, phase=0.0):
    """Dense structured sample of the solid tube, used to measure covering radius.

    With ``phase`` at a sample angle and ``n_angles`` a multiple of the sample count,
    the grid holds the arc midpoints between samples, where the thin-tube maximum sits.
    """
    theta = phase + np.arange(n_angles) * (2 * np.pi / n_angles)
    rings = [(0.0, 1)]
    if half_width > 0:
        rings += [(half_width / 2, 6), (half_width, 12)]
    u, z, th = [], [], []
    for rad, k in rings:
        phi = np.arange(k) * (2 * np.pi / k)
        for p in phi:
            u.append(np.full(n_angles, rad * math.cos(p)))
            z.append(np.full(n_angles, rad * math.sin(p)))
            th.append(theta)
    return np.concatenate(th), np.concatenate(u), np.concatenate(z)


@dataclass
class _Loop:
    theta: np.ndarray
    u: np.ndarray
    z: np.ndarray
    noise: np.ndarray
    center0: np.ndarray
    velocity: np.ndarray
    spin: float
    tilt_axis: np.ndarray
    tilt: float
    breathe_period: float

    def radius_at(self, base, t, breathing):
        if not breathing or self.breathe_period == 0:
            return base
        return base * (1 + _BREATHE_AMPLITUDE * math.sin(2 * math.pi * t / self.breathe_period))

    def frame(self, base_radius, t, breathing, theta=None, u=None, z=None, noise=None):
        theta = self.theta if theta is None else theta
        u = self.u if u is None else u
        z = self.z if z is None else z
        rho = self.radius_at(base_radius, t, breathing) + u
        local = np.stack([rho * np.cos(theta), rho * np.sin(theta), z], axis=1)
        if noise is not None:
            local = local + noise
        rot = _rotation(self.tilt_axis, self.tilt * t) @ _rotation((0, 0, 1), self.spin * t)
        return local @ rot.T + self.center0 + self.velocity * t

    def truth(self, base_radius, t, breathing, thickness):
        rot = _rotation(self.tilt_axis, self.tilt * t)
        normal = rot @ np.array([0.0, 0.0, 1.0])
        center = self.center0 + self.velocity * t
        return LoopTruth(tuple(float(x) for x in center), tuple(float(x) for x in normal),
                         float(self.radius_at(base_radius, t, breathing)), float(thickness))


def _make_loop(rng, spec, n, center0, breathing):
    theta = np.arange(n) * (2 * np.pi / n) + rng.uniform(0, 2 * np.pi)
    u, z = _tube_offsets(rng, n, spec.tube_width / 2)
    noise = rng.normal(0.0, spec.noise_sigma, (n, 3)) if spec.noise_sigma > 0 else np.zeros((n, 3))
    step = spec.step_motion
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    tilt_axis = np.array([*rng.normal(size=2), 0.0])
    tilt_axis /= np.linalg.norm(tilt_axis)
    # every material point stays within this distance of the loop centre
    reach = (spec.radius * (1 + _BREATHE_AMPLITUDE) + spec.tube_width / 2
             + float(np.abs(noise).sum(axis=1).max(initial=0.0)))
    spin = _SHARE_SPIN * step / reach
    tilt = _SHARE_TILT * step / reach
    period = 0.0
    if breathing and step > 0:
        # |d/dt R(t)| <= R * A * 2 pi / P per frame
        period = 2 * math.pi * spec.radius * _BREATHE_AMPLITUDE / (_SHARE_BREATHE * step)
    return _Loop(theta, u, z, noise, np.asarray(center0, float), _SHARE_TRANSLATE * step * direction,
                 spin, tilt_axis, tilt, period)


def gen_scene(spec: SceneSpec) -> Tuple[List[PointCloud], GroundTruth]:
    """Frames and ground truth for ``spec``; identical specs give identical frames."""
    rng = np.random.default_rng(spec.seed)
    breathing = spec.kind == "breathing-annulus"
    if spec.n_loops == 2:
        sizes = [spec.points_per_frame - spec.points_per_frame // 2, spec.points_per_frame // 2]
        centers = [np.zeros(3), np.array([spec.separation, 0.0, 0.0])]
    else:
        sizes = [spec.points_per_frame]
        centers = [np.zeros(3)]
    loops = [_make_loop(rng, spec, n, c, breathing) for n, c in zip(sizes, centers)]
    thickness = spec.radius

    refs = [_reference_offsets(4 * n * max(1, -(-16 // n)), spec.tube_width / 2, lp.theta[0])
            for n, lp in zip(sizes, loops)]

    frames, truth, cover = [], [], []
    for t in range(spec.frames):
        pts = np.concatenate([lp.frame(spec.radius, t, breathing, noise=lp.noise) for lp in loops])
        frames.append(PointCloud(pts, t))
        truth.append([lp.truth(spec.radius, t, breathing, thickness) for lp in loops])
        if t == 0 or breathing:
            reference = np.concatenate([lp.frame(spec.radius, t, breathing, *ref)
                                        for lp, ref in zip(loops, refs)])
            cover.append(covering_radius(reference, pts))
        else:
            # rigid motion moves the set and the sample together
            cover.append(cover[0])

    steps = [float(np.linalg.norm(b.points - a.points, axis=1).max())
             for a, b in zip(frames, frames[1:])]
    if spec.step_motion > 0 and steps and not max(steps) < spec.step_motion:
        raise InvariantError(f"generated displacement {max(steps)} breaks step_motion {spec.step_motion}")
    if spec.step_motion == 0 and steps and max(steps) > 0:
        raise InvariantError("static scene moved")
    alpha = max(cover)
    if spec.alpha is not None:
        if alpha > spec.alpha:
            raise ParameterError(f"measured covering radius {alpha:.6g} exceeds declared alpha "
                                 f"{spec.alpha}; add points or narrow the tube")
        alpha = spec.alpha
    if spec.n_loops == 2:
        eps = spec.epsilon if spec.epsilon is not None else spec.step_motion
        need = 2 * alpha + spec.beta_bound + eps
        gap = spec.separation - 2 * spec.outer_radius
        if not gap > need:
            raise ParameterError(f"annuli {spec.separation} apart leave a gap of {gap:.6g}, "
                                 f"which must exceed 2*alpha + beta + epsilon = {need:.6g} "
                                 f"with the measured alpha {alpha:.6g}")
    gt = GroundTruth(loops=truth, covering_radius=cover, max_step_displacement=steps,
                     alpha=float(alpha), beta=float(spec.beta_bound),
                     epsilon=spec.epsilon, spec=spec)
    return frames, gt


def distance_to_circle(loop: LoopTruth, point) -> float:
    p = np.asarray(point, dtype=float) - np.asarray(loop.center)
    n = np.asarray(loop.normal)
    h = float(p @ n)
    planar = math.sqrt(max(float(p @ p) - h * h, 0.0))
    return math.hypot(planar - loop.radius, h)


def check_membership(truth: GroundTruth, frame: int, loop_point, loop: Optional[int] = None) -> bool:
    """True when the point lies within ``thickness`` of a loop circle.

    ``loop=None`` accepts any loop of the frame; an index restricts to that loop.
    """
    if not 0 <= frame < truth.frames:
        raise ParameterError(f"frame {frame} out of range 0..{truth.frames - 1}")
    candidates = truth.loops[frame] if loop is None else [truth.loops[frame][loop]]
    return any(distance_to_circle(lt, loop_point) <= lt.thickness for lt in candidates)
