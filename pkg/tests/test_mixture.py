import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from topotrack.errors import ContractError, InvariantError, ParameterError
from topotrack.mixture import (
    LoopMixture,
    loop_mixture,
    mixture_logpdf,
    mixture_sample,
    simplex_gaussian,
)
from topotrack.persistence import (
    EdgeRef,
    LoopDescriptor,
    TriangleRef,
    compute_ph1,
    extract_descriptors,
)
from topotrack.validation import square
from topotrack.vr_complex import build_filtration


def mixture(weights, means, covs):
    k = len(weights)
    return LoopMixture(0, np.array(weights, float), np.array(means, float), np.array(covs, float),
                       ("killer",) * k, np.array(weights, float))


def tri(value, offset=0.0):
    pts = ((offset, 0.0, 0.0), (offset + 1.0, 0.0, 0.0), (offset, 1.0, 0.0))
    return TriangleRef((0, 1, 2), pts, value)


def test_simplex_gaussian_example():
    mu, cov = simplex_gaussian((0, 0, 0), (1, 0, 0), (0, 1, 0), 1e-6)
    assert mu == pytest.approx([1 / 3, 1 / 3, 0], abs=1e-15)
    want = np.array([[1 / 3, -1 / 6, 0], [-1 / 6, 1 / 3, 0], [0, 0, 0]]) + 1e-6 * np.eye(3)
    assert cov == pytest.approx(want, abs=1e-14)
    assert np.array_equal(cov, cov.T)


def test_simplex_gaussian_degenerate():
    mu, cov = simplex_gaussian((1, 2, 3), (1, 2, 3), (1, 2, 3), 1e-6)
    assert mu.tolist() == [1, 2, 3]
    assert cov == pytest.approx(1e-6 * np.eye(3), rel=1e-12)
    assert np.linalg.eigvalsh(cov).min() >= 1e-6


def test_simplex_gaussian_min_eigenvalue():
    rng = np.random.default_rng(0)
    for _ in range(200):
        scale = 10.0 ** rng.uniform(-3, 3)
        v = rng.normal(size=(3, 3)) * scale
        if rng.random() < 0.5:
            v[2] = v[0] + 0.37 * (v[1] - v[0])  # collinear
        _, cov = simplex_gaussian(*v, eps_reg=1e-6)
        assert np.linalg.eigvalsh(cov).min() >= 1e-6


def test_simplex_gaussian_rejects_bad_eps():
    with pytest.raises(ParameterError):
        simplex_gaussian((0, 0, 0), (1, 0, 0), (0, 1, 0), 0.0)


def test_loop_mixture_weights_from_seeds():
    d = LoopDescriptor(0.1, 0.7, EdgeRef((1, 2), ((1, 0, 0), (0, 1, 0)), 0.7),
                       (tri(0.7),), (tri(0.2, 3.0), tri(0.1, 6.0)))
    m = loop_mixture(d)
    assert m.weights == pytest.approx([0.7, 0.2, 0.1], abs=1e-15)
    assert m.weight_seeds.tolist() == [0.7, 0.2, 0.1]
    assert m.component_source == ("killer", "neighbor", "neighbor")


def test_equal_seeds_split_evenly():
    d = LoopDescriptor(0.1, 1.0, EdgeRef((1, 2), ((1, 0, 0), (0, 1, 0)), 1.0),
                       (tri(1.0), tri(1.0, 2.0)))
    assert loop_mixture(d).weights.tolist() == [0.5, 0.5]


def test_square_mixture():
    f = build_filtration(square())
    (d,) = extract_descriptors(compute_ph1(f), f)
    m = loop_mixture(d)
    # two killers plus the two neighbouring triangles, all at the death value
    assert len(m) == 4 and m.weights.tolist() == [0.25] * 4
    killers = m.means[[s == "killer" for s in m.component_source]]
    assert np.allclose(sorted(map(tuple, killers)), [(1 / 3, 2 / 3, 0), (2 / 3, 1 / 3, 0)],
                       atol=1e-15)


def test_loop_mixture_needs_killer():
    d = LoopDescriptor(0.1, 0.7, EdgeRef((1, 2), ((1, 0, 0), (0, 1, 0)), 0.7), ())
    with pytest.raises(ContractError):
        loop_mixture(d)


def test_invariants_enforced():
    with pytest.raises(InvariantError):
        mixture([0.6, 0.6], [[0, 0, 0]] * 2, [np.eye(3)] * 2)
    asym = np.eye(3)
    asym[0, 1] = 0.1
    with pytest.raises(InvariantError):
        mixture([1.0], [[0, 0, 0]], [asym])


def test_logpdf_peak():
    s2 = 0.3
    m = mixture([1.0], [[1, 2, 3]], [s2 * np.eye(3)])
    assert mixture_logpdf(m, [1, 2, 3]) == pytest.approx(-1.5 * math.log(2 * math.pi * s2), rel=1e-14)


def test_logpdf_symmetric_midpoint():
    m = mixture([0.5, 0.5], [[-1, 0, 0], [1, 0, 0]], [np.eye(3)] * 2)
    one = multivariate_normal([1, 0, 0], np.eye(3)).pdf([0, 0, 0])
    assert mixture_logpdf(m, [0, 0, 0]) == pytest.approx(math.log(one), rel=1e-14)


def test_logpdf_matches_scipy():
    rng = np.random.default_rng(4)
    for _ in range(10):
        k = 4
        w = rng.dirichlet(np.ones(k))
        mu = rng.normal(size=(k, 3))
        a = rng.normal(size=(k, 3, 3))
        cov = a @ np.swapaxes(a, 1, 2) + 0.1 * np.eye(3)
        cov = 0.5 * (cov + np.swapaxes(cov, 1, 2))
        m = mixture(w, mu, cov)
        x = rng.normal(size=(50, 3))
        want = np.log(sum(w[i] * multivariate_normal(mu[i], cov[i]).pdf(x) for i in range(k)))
        assert mixture_logpdf(m, x) == pytest.approx(want, rel=1e-10)


def test_logpdf_far_point_is_finite():
    m = mixture([1.0], [[0, 0, 0]], [1e-6 * np.eye(3)])
    assert np.isfinite(mixture_logpdf(m, [100.0, 0, 0]))


def test_sample_mean_single_component():
    sigma = 0.5
    m = mixture([1.0], [[1, -2, 3]], [sigma ** 2 * np.eye(3)])
    n = 100_000
    pts = mixture_sample(m, n, seed=1)
    assert np.all(np.abs(pts.mean(axis=0) - [1, -2, 3]) <= 4 * sigma / math.sqrt(n))


def test_sample_zero_weight_component_never_drawn():
    m = mixture([1.0, 0.0], [[0, 0, 0], [5, 5, 5]], [np.eye(3)] * 2)
    _, comp = mixture_sample(m, 5000, seed=0, return_components=True)
    assert np.all(comp == 0)


def test_sample_deterministic():
    m = mixture([0.3, 0.7], [[0, 0, 0], [5, 5, 5]], [np.eye(3)] * 2)
    assert np.array_equal(mixture_sample(m, 100, seed=7), mixture_sample(m, 100, seed=7))
    with pytest.raises(ParameterError):
        mixture_sample(m, 0)
