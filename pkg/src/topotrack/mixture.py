"""Gaussian-mixture reading of a tracked loop.

Each triangle of a loop descriptor becomes one Gaussian: the centroid as
mean, the sample covariance of its three vertices (regularised) as
covariance, and its filtration value as the unnormalised weight.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, InvariantError, ParameterError
from .persistence import LoopDescriptor

DEFAULT_EPS_REG = 1e-6
_LOG_2PI = math.log(2.0 * math.pi)
_UNIT_ROUNDOFF = np.finfo(float).eps / 2
_GUARD_ULPS = 32


def simplex_gaussian(v1, v2, v3, eps_reg=DEFAULT_EPS_REG):
    """Centroid and regularised unbiased covariance of a triangle's vertices."""
    if not eps_reg > 0:
        raise ParameterError(f"eps_reg must be positive, got {eps_reg}")
    v = np.array([v1, v2, v3], dtype=float)
    mean = v.mean(axis=0)
    dev = v - mean
    scatter = 0.5 * (dev.T @ dev)
    scatter = 0.5 * (scatter + scatter.T)
    # A triangle's scatter has rank <= 2, so the smallest eigenvalue sits
    # exactly on eps_reg; a few ulps of headroom keep it there after rounding.
    guard = _GUARD_ULPS * _UNIT_ROUNDOFF * (np.trace(scatter) + eps_reg)
    return mean, scatter + (eps_reg + guard) * np.eye(3)


@dataclass(frozen=True, eq=False)
class LoopMixture:
    loop_id: int
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    component_source: tuple
    weight_seeds: np.ndarray
    eps_reg: float = DEFAULT_EPS_REG

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        mu = np.asarray(self.means, dtype=float).reshape(-1, 3)
        cov = np.asarray(self.covariances, dtype=float).reshape(-1, 3, 3)
        seeds = np.asarray(self.weight_seeds, dtype=float).reshape(-1)
        k = w.shape[0]
        if k == 0:
            raise ContractError("a mixture needs at least one component")
        if not (mu.shape[0] == cov.shape[0] == seeds.shape[0] == len(self.component_source) == k):
            raise InvariantError("mixture component arrays disagree in length")
        if np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise InvariantError(f"weights must be non-negative and sum to 1, got {w}")
        if not np.array_equal(cov, np.swapaxes(cov, 1, 2)):
            raise InvariantError("covariances must be symmetric")
        for name, arr in (("weights", w), ("means", mu), ("covariances", cov),
                          ("weight_seeds", seeds)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "component_source", tuple(self.component_source))

    def __len__(self):
        return self.weights.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LoopMixture):
            return NotImplemented
        return (self.loop_id == other.loop_id and self.eps_reg == other.eps_reg
                and self.component_source == other.component_source
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("weights", "means", "covariances", "weight_seeds")))

    @property
    def mean(self):
        """Mean of the whole mixture."""
        return self.weights @ self.means

    def min_eigenvalues(self):
        return np.linalg.eigvalsh(self.covariances)[:, 0]


def loop_mixture(descriptor: LoopDescriptor, eps_reg=DEFAULT_EPS_REG) -> LoopMixture:
    """One component per killer and neighbour triangle, weights from filtration values.

    Killer triangles are seeded with the death value, neighbours with their
    own filtration value; seeds are then normalised to sum to one.
    """
    if not descriptor.killer_triangles:
        raise ContractError("descriptor has no killer triangle")
    triangles = list(descriptor.killer_triangles) + list(descriptor.neighbor_triangles)
    sources = (["killer"] * len(descriptor.killer_triangles)
               + ["neighbor"] * len(descriptor.neighbor_triangles))
    seeds = np.array([descriptor.death] * len(descriptor.killer_triangles)
                     + [t.value for t in descriptor.neighbor_triangles], dtype=float)
    total = math.fsum(seeds)
    if not total > 0:
        raise ContractError("weight seeds must have a positive sum")
    weights = seeds / total
    means = np.empty((len(triangles), 3))
    covs = np.empty((len(triangles), 3, 3))
    for k, tri in enumerate(triangles):
        means[k], covs[k] = simplex_gaussian(*tri.coords, eps_reg=eps_reg)
    loop_id = -1 if descriptor.id is None else descriptor.id
    return LoopMixture(loop_id, weights, means, covs, tuple(sources), seeds, eps_reg)


def mixture_logpdf(mixture: LoopMixture, x):
    """Log density at one point (shape ``(3,)``) or many (shape ``(m, 3)``)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x.reshape(-1, 3)
    try:
        chol = np.linalg.cholesky(mixture.covariances)
    except np.linalg.LinAlgError as exc:
        raise ContractError("mixture has a singular covariance") from exc
    log_det = 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    inv_chol = np.linalg.inv(chol)
    with np.errstate(divide="ignore"):
        log_w = np.log(mixture.weights)
    const = log_w - 0.5 * (3 * _LOG_2PI + log_det)
    out = np.empty(pts.shape[0])
    step = max(1, 2_000_000 // len(mixture))
    for lo in range(0, pts.shape[0], step):
        diff = pts[None, lo:lo + step, :] - mixture.means[:, None, :]
        # whitened residuals L^{-1} (x - mu), one block per component
        z = np.einsum("kij,kmj->kmi", inv_chol, diff)
        terms = const[:, None] - 0.5 * (z * z).sum(axis=2)
        peak = terms.max(axis=0)
        peak = np.where(np.isfinite(peak), peak, 0.0)
        out[lo:lo + step] = peak + np.log(np.exp(terms - peak).sum(axis=0))
    return float(out[0]) if single else out


def mixture_sample(mixture: LoopMixture, n: int, seed: int = 0, return_components=False):
    """``n`` i.i.d. draws: a component by weight, then a Gaussian draw from it."""
    if n < 1:
        raise ParameterError(f"sample count must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    comp = rng.choice(len(mixture), size=n, p=mixture.weights)
    chol = np.linalg.cholesky(mixture.covariances)
    noise = rng.standard_normal((n, 3))
    pts = mixture.means[comp] + np.einsum("nij,nj->ni", chol[comp], noise)
    if return_components:
        return pts, comp
    return pts
