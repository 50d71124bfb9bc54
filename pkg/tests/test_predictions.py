import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergolab.exceptions import DimensionMismatch
from ergolab.expanding_map import MapParams
from ergolab.grid import discretize
from ergolab.measure import AtomicMeasure, PiecewiseDensity, cramer_sq, cramer_sq_terms, lebesgue
from ergolab.predictions import (ProcessSpec, combine_density, combine_polys, expected_process_distance,
                                 floor_counts, initial_poly_field, injectivity_limit, injectivity_limits,
                                 mean_densities, mean_density_step, pk_prediction, pk_series, pk_theorem,
                                 pk_verbatim, poly_product, poly_product_signed, preimage_poly_fields,
                                 preimage_poly_step, q_recursion_pointwise, rate_of_injectivity,
                                 rate_of_injectivity_series, sample_process)
from ergolab.transfer_op import TransferOperator

DEFAULT = MapParams.default()
DOUBLING = MapParams.doubling()


@pytest.fixture(scope="module")
def op():
    return TransferOperator(DEFAULT, 2 ** 12)


@pytest.fixture(scope="module")
def dop():
    return TransferOperator(DOUBLING, 64)


# -- mean density -------------------------------------------------------------

def test_mean_density_hand_recursion(dop):
    D = mean_densities(dop, 6)
    hand = [Fraction(1)]
    for _ in range(6):
        hand.append(1 - (1 - hand[-1] / 2) ** 2)
    assert hand[1] == Fraction(3, 4) and hand[2] == Fraction(39, 64)
    for k in range(7):
        assert np.max(np.abs(D[k] - float(hand[k]))) < 1e-12


def test_mean_density_absorbing(op):
    assert np.all(mean_density_step(op, np.zeros(op.M)) == 0.0)


def test_mean_density_bounds_and_monotone(op):
    D = mean_densities(op, 60)
    assert D.min() >= 0 and D.max() <= 1
    assert np.all(np.diff(D, axis=0) <= 1e-12)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_combine_density_is_survival_probability(d0, d1, w0, w1):
    # probability that at least one of two independent kept-and-surviving branches exists
    enum = sum(p0 * p1 for (s0, p0), (s1, p1) in itertools.product(
        [(1, w0 * d0), (0, 1 - w0 * d0)], [(1, w1 * d1), (0, 1 - w1 * d1)]) if s0 or s1)
    assert combine_density(d0, d1, w0, w1) == pytest.approx(enum, abs=1e-12)


# -- injectivity -----------------------------------------------------------------

def test_injectivity_limit_examples(dop, op):
    assert injectivity_limit(op, 0) == 1.0
    assert injectivity_limit(dop, 1) == pytest.approx(0.75, abs=1e-15)
    lim = injectivity_limits(op, 50)
    assert np.all(np.diff(lim) < 0)
    with pytest.raises(ValueError):
        injectivity_limit(op, -1)


def test_rate_of_injectivity_examples():
    f = discretize(DEFAULT, 1000)
    assert rate_of_injectivity(f, 0) == 1.0
    for j in (3, 8, 12):
        assert rate_of_injectivity(discretize(DOUBLING, 2 ** j), 1) == 0.5
    series = rate_of_injectivity_series(f, 30)
    assert np.all(np.diff(series) <= 0)


def test_rate_of_injectivity_brute_force():
    f = discretize(DEFAULT, 500)
    for k in (1, 2, 5):
        assert rate_of_injectivity(f, k) == len(set(f.power(k).tolist())) / 500


def test_injectivity_converges_toward_limit(op):
    # the relative error shrinks from small to large N at short times
    lim = injectivity_limits(op, 10)
    errs = [np.max(np.abs(rate_of_injectivity_series(discretize(DEFAULT, N), 10) - lim) / lim)
            for N in (10 ** 3, 10 ** 5)]
    assert errs[1] < errs[0]
    assert errs[1] < 0.02


# -- preimage-count polynomials ------------------------------------------------------

def _enumerate(probs, depth):
    """Law of surviving root-to-leaf paths of a full binary tree by brute force."""
    n_edges = 2 ** (depth + 1) - 2
    assert len(probs) == n_edges
    law = np.zeros(2 ** depth + 1)
    for keep in itertools.product((0, 1), repeat=n_edges):
        pr = np.prod([p if k else 1 - p for k, p in zip(keep, probs)])
        # edges listed level by level; children of edge i on the next level follow heap order
        alive = [1]
        start = 0
        for level in range(depth):
            width = 2 ** (level + 1)
            kept = keep[start:start + width]
            alive = [alive[i // 2] * kept[i] for i in range(width)]
            start += width
        law[sum(alive)] += pr
    return law


def _recursion(probs, depth, m_max):
    X = initial_poly_field(1, m_max)
    # bottom level first
    levels = []
    start = 0
    for level in range(depth):
        width = 2 ** (level + 1)
        levels.append(probs[start:start + width])
        start += width
    fields = [X] * 2 ** depth
    for level in reversed(range(depth)):
        w = levels[level]
        fields = [combine_polys(fields[2 * i], fields[2 * i + 1], w[2 * i], w[2 * i + 1], m_max)
                  for i in range(len(w) // 2)]
    return fields[0][0]


def test_poly_depth2_enumeration():
    probs = [1 / 2, 1 / 3, 1 / 4, 1 / 5, 1 / 6, 1 / 7]
    law = _enumerate(probs, 2)
    P = _recursion(probs, 2, 4)
    assert np.max(np.abs(P - law)) < 1e-12


@given(st.lists(st.floats(0, 1), min_size=6, max_size=6))
def test_poly_depth2_enumeration_property(probs):
    assert np.max(np.abs(_recursion(probs, 2, 4) - _enumerate(probs, 2))) < 1e-12


def test_poly_depth3_enumeration():
    rng = np.random.default_rng(2)
    probs = list(rng.random(14))
    assert np.max(np.abs(_recursion(probs, 3, 8) - _enumerate(probs, 3))) < 1e-12


def test_poly_product_routes_agree():
    rng = np.random.default_rng(0)
    A, B = rng.random((5, 9)), rng.random((5, 9))
    assert np.allclose(poly_product(A, B, 8), poly_product_signed(A, B, 8), atol=1e-13)
    full = np.array([np.convolve(a, b)[:9] for a, b in zip(A, B)])
    assert np.allclose(poly_product(A, B, 8), full, atol=1e-13)


def test_q_recursion_matches_branch_form():
    rng = np.random.default_rng(4)
    m = 12
    P0 = rng.dirichlet(np.ones(m + 1), size=20)
    P1 = rng.dirichlet(np.ones(m + 1), size=20)
    P0[:, 7:] = P1[:, 7:] = 0  # keep products inside the truncation
    P0 /= P0.sum(1, keepdims=True)
    P1 /= P1.sum(1, keepdims=True)
    w0, w1 = rng.random(20), rng.random(20)
    one = np.zeros(m + 1)
    one[0] = 1
    Q = q_recursion_pointwise(P0 - one, P1 - one, w0, w1, m) + one
    assert np.allclose(Q, combine_polys(P0, P1, w0, w1, m), atol=1e-13)


def test_poly_field_identities(op):
    D = mean_densities(op, 10)
    L1 = op.density_iterates(10)
    for k, P in enumerate(preimage_poly_fields(op, 10, 256)):
        assert P.min() >= 0
        assert np.max(np.abs(P.sum(axis=1) - 1)) < 1e-6
        assert np.max(np.abs(P[:, 0] - (1 - D[k]))) < 1e-8
        # expected path count = preimage weight sum = L^k 1
        mean_paths = P @ np.arange(P.shape[1])
        assert np.max(np.abs(mean_paths - L1[k].values)) < 1e-6


def test_poly_step_shape_check(op):
    with pytest.raises(DimensionMismatch):
        preimage_poly_step(op, np.zeros((10, 5)))


# -- point process -----------------------------------------------------------------

def test_process_examples():
    leb = lebesgue()
    for N in (1, 10, 100):
        assert expected_process_distance(ProcessSpec([leb], [1], [N]), leb) == pytest.approx(1 / (12 * N))
    mu = PiecewiseDensity.from_values([1, 2, 3, 2])
    N = 25
    got = expected_process_distance(ProcessSpec([mu] * N, [1] * N), mu)
    assert got == pytest.approx((1 / 12 - cramer_sq(mu, leb)) / N, rel=1e-12)


def test_process_spec_validation():
    with pytest.raises(ValueError):
        ProcessSpec([lebesgue()], [1, 2])
    with pytest.raises(ValueError):
        ProcessSpec([lebesgue()], [0])
    assert ProcessSpec([lebesgue(), lebesgue()], [1, 3], [2, 2]).N == 8


def test_process_invariances():
    a = PiecewiseDensity.from_values([1, 3])
    b = AtomicMeasure([0.3, 0.8], [0.5, 0.5])
    base = PiecewiseDensity.from_values([2, 1, 1])
    e1 = expected_process_distance(ProcessSpec([a, b], [1, 2], [3, 2]), base)
    e2 = expected_process_distance(ProcessSpec([b, a], [2, 1], [2, 3]), base)
    e3 = expected_process_distance(ProcessSpec([a, a, a, b, b], [1, 1, 1, 2, 2]), base)
    assert e1 == pytest.approx(e2, rel=1e-12)
    assert e1 == pytest.approx(e3, rel=1e-12)


def test_process_monte_carlo_srb_components():
    op = TransferOperator(DEFAULT, 2 ** 10)
    srb = op.srb_density()
    lebit = op.density_iterates(3)[3]
    spec = ProcessSpec([srb, lebit], [1, 2], [30, 10])
    assert spec.N == 50
    rng = np.random.default_rng(17)
    mc = np.mean([cramer_sq(srb, sample_process(spec, rng)) for _ in range(20000)])
    assert mc == pytest.approx(expected_process_distance(spec, srb), rel=0.02)


def test_floor_counts():
    assert np.array_equal(floor_counts([0.5, 0.3, 0.2], 100), [50, 15, 6])


def test_second_term_dominates():
    comps = [PiecewiseDensity.from_values([3, 1, 1]), PiecewiseDensity.from_values([1, 1, 2, 1]),
             PiecewiseDensity.from_values([1, 4])]
    lam = np.array([0.5137, 0.3011, 0.1852])
    base_terms = [(l, c) for l, c in zip(lam, comps)]
    ps = np.unique(np.logspace(2, 4, 25).astype(int))
    first, second = [], []
    for p in ps:
        counts = floor_counts(lam, p)
        spec = ProcessSpec(comps, [1, 2, 3], counts)
        N = spec.N
        f = cramer_sq_terms(base_terms + [(-m * c / N, comp) for m, c, comp in zip([1, 2, 3], counts, comps)])
        first.append(f)
        second.append(expected_process_distance_total(spec, base_terms) - f)
    s1 = np.polyfit(np.log(ps), np.log(np.maximum(first, 1e-300)), 1)[0]
    s2 = np.polyfit(np.log(ps), np.log(second), 1)[0]
    assert s2 == pytest.approx(-1, abs=0.05)
    assert s1 < -1.5
    assert np.all(np.array(first) < np.array(second))


def expected_process_distance_total(spec, base_terms):
    # the base measure is the mixture itself, resampled on a common partition
    M = 120
    x = (np.arange(M) + 0.5) / M
    vals = sum(l * c.values[np.minimum((x * c.M).astype(int), c.M - 1)] for l, c in base_terms)
    return expected_process_distance(spec, PiecewiseDensity.from_values(vals))


# -- p(k) -------------------------------------------------------------------------

def test_pk_examples(dop, op):
    assert pk_verbatim(op, 0, 16) == pytest.approx(1 / 12, abs=1e-15)
    assert pk_prediction(dop, 1, 16) == pytest.approx((0.5 ** 2 + 0.25 ** 2) / 12, abs=1e-15)
    N = 1000
    assert pk_theorem(op, 0, N, 16) == pytest.approx(1 / (12 * N), rel=1e-12)


def test_pk_series_variants(op):
    s = pk_series(op, 5, 32, n_points=10 ** 4)
    assert set(s) == {"verbatim", "theorem"}
    assert s["verbatim"][3] == pytest.approx(pk_verbatim(op, 3, 32), rel=1e-14)
    assert np.all(s["theorem"] > 0)
    assert "theorem" not in pk_series(op, 2, 8)


def test_pk_truncation_stability():
    op = TransferOperator(DEFAULT, 2 ** 9)
    a = pk_series(op, 250, 256)["verbatim"]
    b = pk_series(op, 250, 512)["verbatim"]
    assert np.max(np.abs(a - b) / b) < 1e-3
