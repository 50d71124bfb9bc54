import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergolab.expanding_map import MapParams
from ergolab.grid import DiscretizedMap, discretize
from ergolab.measure import GridMeasure, pushforward_table
from ergolab.orbits import (asymptotic_measure, decompose, mean_orbit_cardinality, random_table,
                            rho_length_asymptotic)

tables = st.integers(1, 60).flatmap(lambda n: st.lists(st.integers(0, n - 1), min_size=n, max_size=n))


def naive_orbit(table, x):
    """(tail, cycle length, frozenset of cycle) by walking until a repeat."""
    seen = {}
    path = []
    while x not in seen:
        seen[x] = len(path)
        path.append(x)
        x = table[x]
    start = seen[x]
    return start, len(path) - start, frozenset(path[start:])


def test_identity_table():
    d = decompose(np.arange(5))
    assert len(d.cycles) == 5
    assert np.all(d.basin_size == 1)
    assert mean_orbit_cardinality(np.arange(5)) == 1.0


def test_doubling_eight():
    d = decompose(discretize(MapParams.doubling(), 8))
    assert len(d.cycles) == 1 and list(d.cycles[0]) == [0]
    assert d.basin_size[0] == 8
    assert d.tail_length.max() == 3


def test_constant_table():
    d = decompose(np.zeros(9, dtype=int))
    assert len(d.cycles) == 1 and d.basin_size[0] == 9
    assert d.tail_length.max() <= 1


@given(tables)
def test_decompose_matches_naive_walk(table):
    d = decompose(DiscretizedMap(np.array(table)))
    assert d.basin_size.sum() == len(table)
    cyc_sets = [frozenset(c.tolist()) for c in d.cycles]
    assert len(set(cyc_sets)) == len(cyc_sets)
    for x in range(len(table)):
        tail, length, cyc = naive_orbit(table, x)
        assert d.tail_length[x] == tail
        assert d.cycle_length[x] == length
        assert cyc_sets[d.cycle_id[x]] == cyc
    for c in d.cycles:
        # listed in dynamical order and closed under the map
        assert all(table[c[i]] == c[(i + 1) % len(c)] for i in range(len(c)))


@given(tables)
def test_asymptotic_measure_invariant(table):
    t = np.array(table)
    mu = asymptotic_measure(DiscretizedMap(t))
    assert abs(mu.weights.sum() - 1) < 1e-12
    assert np.allclose(pushforward_table(mu, t).weights, mu.weights, atol=1e-12)


def test_asymptotic_examples():
    for j in (1, 5, 12):
        mu = asymptotic_measure(discretize(MapParams.doubling(), 2 ** j))
        assert mu.weights[0] == 1.0
    perm = np.random.default_rng(0).permutation(50)
    assert np.allclose(asymptotic_measure(perm).weights, 1 / 50)


def test_asymptotic_matches_cesaro():
    rng = np.random.default_rng(1)
    t = random_table(1000, rng).table
    mu = GridMeasure.uniform(1000)
    acc = np.zeros(1000)
    # the Cesaro bias is about (mean tail + cycle length) / steps
    steps = 10 ** 5
    for _ in range(steps):
        acc += mu.weights
        mu = pushforward_table(mu, t)
    tv = 0.5 * np.abs(acc / steps - asymptotic_measure(t).weights).sum()
    assert tv < 1e-3


def test_decompose_long_chain_no_recursion_limit():
    N = 300000
    table = np.arange(1, N + 1) % N  # one cycle through every point
    d = decompose(table)
    assert len(d.cycles) == 1 and d.cycle_length[0] == N
    chain = np.maximum(np.arange(N) - 1, 0)  # tails of length up to N - 1
    assert decompose(chain).tail_length.max() == N - 1


def test_rho_length():
    assert rho_length_asymptotic(750) == pytest.approx(34.3, abs=0.05)
    assert rho_length_asymptotic(120000) == pytest.approx(434.2, abs=0.1)


def test_random_tables_rho_length():
    cards = [mean_orbit_cardinality(random_table(750, np.random.default_rng(s))) for s in range(50)]
    assert np.mean(cards) == pytest.approx(rho_length_asymptotic(750), rel=0.25)


def test_random_tables_large_n():
    cards = [mean_orbit_cardinality(random_table(120000, np.random.default_rng(s))) for s in range(5)]
    assert np.mean(cards) == pytest.approx(rho_length_asymptotic(120000), rel=0.25)
