"""Acceptance checks, one function per criterion.

Each check returns a :class:`CheckResult`; none of them raises on failure.
``run_all`` is what ``ergolab verify`` and the acceptance tests call.
"""
from __future__ import annotations

import itertools
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .expanding_map import MapParams
from .grid import discretize
from .measure import (AtomicMeasure, GridMeasure, PiecewiseDensity, cramer, cramer_sq, inner_jump, lebesgue,
                      zero_identity_check)
from .orbits import asymptotic_measure, mean_orbit_cardinality, random_table, rho_length_asymptotic
from .predictions import (ProcessSpec, combine_polys, expected_process_distance, initial_poly_field,
                          injectivity_limits, mean_densities, preimage_poly_fields, rate_of_injectivity_series,
                          sample_process)
from .rng import make_rng
from .transfer_op import TransferOperator


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.detail}; {self.seconds:.1f}s)"


def distance_identities() -> tuple[bool, str]:
    worst = 0.0
    leb = lebesgue()
    for N in (10, 100, 1000):
        worst = max(worst, abs(cramer(GridMeasure.uniform(N), leb) - 1.0 / (N * np.sqrt(12.0))))
        atoms = AtomicMeasure((np.arange(N) + 0.5) / N, np.full(N, 1.0 / N))
        worst = max(worst, abs(cramer_sq(atoms, leb) - 1.0 / (12.0 * N * N)))
    rng = make_rng("acceptance", 1)
    gap, top = 0.0, -np.inf
    for _ in range(100):
        n = int(rng.integers(1, 50))
        w = rng.random(n)
        mu = AtomicMeasure(rng.random(n), w / w.sum())
        z = zero_identity_check(mu)
        gap = max(gap, abs(z - (cramer_sq(mu, leb) - 1.0 / 12.0)))
        top = max(top, z)
    single = max(abs(zero_identity_check(AtomicMeasure.dirac(p))) for p in rng.random(20))
    ok = worst < 1e-12 and gap < 1e-10 and top <= 0.0 and single < 1e-12
    return ok, f"closed forms {worst:.1e}, zero identity {gap:.1e}, max {top:.2e}, single atoms {single:.1e}"


def _numeric_inner(p, q):
    # g_p = 1_[p,1] - (1 - p); the product is constant between breakpoints
    cuts = np.unique(np.concatenate([[0.0, 1.0], [p, q]]))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        t = 0.5 * (a + b)
        gp = (t >= p) - (1.0 - p)
        gq = (t >= q) - (1.0 - q)
        total += gp * gq * (b - a)
    return total


def inner_products() -> tuple[bool, str]:
    ps = (np.arange(100) + 0.5) / 100
    worst = 0.0
    for p in ps:
        for q in ps:
            worst = max(worst, abs(float(inner_jump(p, q)) - _numeric_inner(p, q)))
    return worst < 1e-10, f"max deviation {worst:.1e}"


def point_process(draws: int = 20000) -> tuple[bool, str]:
    leb = lebesgue()
    spec_a = ProcessSpec([leb], [1], [100])
    rng = make_rng("acceptance", 3, "a")
    mc_a = np.mean([cramer_sq(leb, sample_process(spec_a, rng)) for _ in range(draws)])
    exp_a = expected_process_distance(spec_a, leb)
    comps = [PiecewiseDensity.from_values([3.0, 1.0, 1.0, 1.0]),
             AtomicMeasure([0.2, 0.7], [0.4, 0.6]),
             PiecewiseDensity.from_values([1.0, 2.0, 4.0, 2.0, 1.0])]
    spec_b = ProcessSpec(comps, [1, 2, 3], [4, 3, 2])
    base = PiecewiseDensity.from_values([1.0, 1.5, 2.0, 1.0, 0.5, 1.0])
    rng = make_rng("acceptance", 3, "b")
    mc_b = np.mean([cramer_sq(base, sample_process(spec_b, rng)) for _ in range(draws)])
    exp_b = expected_process_distance(spec_b, base)
    ra = abs(mc_a - exp_a) / exp_a
    rb = abs(mc_b - exp_b) / exp_b
    ok = ra < 0.02 and rb < 0.02 and abs(exp_a - 1.0 / 1200.0) < 1e-15
    return ok, f"(a) MC {mc_a:.6g} vs {exp_a:.6g} rel {ra:.2%}; (b) MC {mc_b:.6g} vs {exp_b:.6g} rel {rb:.2%}"


def _enumerate_depth2(a, b, c, d, e, g):
    """Law of the surviving root-to-leaf path count in a depth-2 binary tree."""
    probs = (a, b, c, d, e, g)
    law = {}
    for keep in itertools.product((0, 1), repeat=6):
        pr = 1.0
        for kept, p in zip(keep, probs):
            pr *= p if kept else 1.0 - p
        count = keep[0] * (keep[2] + keep[3]) + keep[1] * (keep[4] + keep[5])
        law[count] = law.get(count, 0.0) + pr
    return law


def percolation() -> tuple[bool, str]:
    # constant slope 2: every edge kept with probability 1/2
    op = TransferOperator(MapParams.doubling(), 64)
    D = mean_densities(op, 6)
    hand = [Fraction(1)]
    for _ in range(6):
        hand.append(1 - (1 - hand[-1] / 2) ** 2)
    dev_d = max(float(np.max(np.abs(D[k] - float(hand[k])))) for k in range(7))
    # depth-2 tree with distinct edge probabilities
    a, b, c, d, e, g = (1 / 2, 1 / 3, 1 / 4, 1 / 5, 1 / 6, 1 / 7)
    X = initial_poly_field(1, 4)
    left = combine_polys(X, X, c, d, 4)
    right = combine_polys(X, X, e, g, 4)
    P = combine_polys(left, right, a, b, 4)[0]
    law = _enumerate_depth2(a, b, c, d, e, g)
    dev_p = max(abs(P[m] - law.get(m, 0.0)) for m in range(5))
    # depth 1 against the same enumeration restricted to one level
    P1 = combine_polys(X, X, a, b, 4)[0]
    law1 = {0: (1 - a) * (1 - b), 1: a * (1 - b) + b * (1 - a), 2: a * b}
    dev_p = max(dev_p, max(abs(P1[m] - law1.get(m, 0.0)) for m in range(5)))
    # field identities on the default map
    op = TransferOperator(MapParams.default(), 2 ** 12)
    Dbar = mean_densities(op, 10)
    dev_one = dev_zero = 0.0
    for k, field in enumerate(preimage_poly_fields(op, 10, 256)):
        dev_one = max(dev_one, abs(field.sum(axis=1).mean() - 1.0))
        dev_zero = max(dev_zero, abs(field[:, 0].mean() - (1.0 - Dbar[k].mean())))
    ok = dev_d < 1e-12 and dev_p < 1e-12 and dev_one < 1e-6 and dev_zero < 1e-6
    return ok, (f"mean density {dev_d:.1e}, enumeration {dev_p:.1e}, "
                f"P(1)-1 {dev_one:.1e}, P(0)-(1-D) {dev_zero:.1e}")


def injectivity(N: int = 10 ** 5, k_max: int = 50) -> tuple[bool, str]:
    params = MapParams.default()
    tau = rate_of_injectivity_series(discretize(params, N), k_max)
    pred = injectivity_limits(TransferOperator(params), k_max)
    rel = np.abs(tau - pred) / pred
    k = int(np.argmax(rel))
    return bool(rel.max() < 0.05), f"max relative error {rel.max():.2%} at k={k}"


def short_term(N: int = 2 ** 20, k_max: int = 10) -> tuple[bool, str]:
    params = MapParams.default()
    op = TransferOperator(params)
    pred = op.mainteo_predictions(k_max)
    fN = discretize(params, N)
    mu = GridMeasure.uniform(N)
    phi = PiecewiseDensity(np.ones(op.M))
    rel = np.empty(k_max + 1)
    emp0 = None
    for k in range(k_max + 1):
        emp = N * N * cramer_sq(mu, phi)
        if k == 0:
            emp0 = emp
        rel[k] = abs(emp - pred[k]) / pred[k]
        mu = GridMeasure(np.bincount(fN.table, weights=mu.weights, minlength=N))
        phi = op.rpf_apply(phi)
    d0 = max(abs(emp0 - 1.0 / 12.0), abs(pred[0] - 1.0 / 12.0))
    ok = rel.max() < 0.10 and d0 < 1e-6
    return ok, f"max relative error {rel.max():.2%} at k={int(np.argmax(rel))}, k=0 offset {d0:.1e}"


def resonance(j_max: int = 20) -> tuple[bool, str]:
    params = MapParams.doubling()
    bad = []
    for j in range(1, j_max + 1):
        fN = discretize(params, 2 ** j)
        if np.any(fN.power(j) != 0):
            bad.append(f"f^j j={j}")
        mu = asymptotic_measure(fN)
        if mu.weights[0] != 1.0:
            bad.append(f"mu j={j}")
    return not bad, "exact for all j" if not bad else ", ".join(bad)


def cycles(N: int = 750, seeds: int = 50) -> tuple[bool, str]:
    cards = [mean_orbit_cardinality(random_table(N, make_rng("acceptance", 8, s))) for s in range(seeds)]
    mean = float(np.mean(cards))
    target = rho_length_asymptotic(N)
    rel = abs(mean - target) / target
    params = MapParams.default()
    js = np.arange(8, 19)
    logs = [np.log2(mean_orbit_cardinality(discretize(params, 2 ** int(j)))) for j in js]
    slope = float(np.polyfit(js, logs, 1)[0])
    ok = rel < 0.25 and 0.3 <= slope <= 0.7
    return ok, f"random mean {mean:.2f} vs {target:.2f} ({rel:.1%}); slope {slope:.3f}"


def transfer_operator() -> tuple[bool, str]:
    op = TransferOperator(MapParams.default(), 2 ** 16)
    raw = op.rpf_apply(PiecewiseDensity(np.ones(op.M))).raw_mass
    mass = abs(raw - 1.0)
    rho = op.srb_density()
    resid = float(np.max(np.abs(op.rpf_apply(rho).values - rho.values)))
    dbl = TransferOperator(MapParams.doubling(), 2 ** 16).srb_density()
    flat = float(np.max(np.abs(dbl.values - 1.0)))
    ok = mass < 1e-6 and resid < 1e-10 and flat < 1e-12
    return ok, f"mass deviation {mass:.1e}, SRB residual {resid:.1e}, doubling {flat:.1e}"


def determinism(N: int = 5 * 10 ** 4, k_max: int = 500, seeds=(0, 1, 2, 3, 4),
                schemes=("StepwiseRandom", "PointsRandomOnGrid", "PointsPerturbed"),
                resolution: int = 2 ** 12) -> tuple[bool, str]:
    from .harness import ExperimentSpec, ResultStore, RunInterrupted, run

    spec = ExperimentSpec("scheme-comparison", n=[N], kmax=k_max, seeds=list(seeds), schemes=list(schemes),
                          resolution=resolution, predictions=False)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        full = run(spec, ResultStore(tmp / "a"), tmp / "out-a")
        store = ResultStore(tmp / "b")
        half = full.computed // 2
        try:
            run(spec, store, tmp / "out-b", max_cells=half)
            return False, "interrupted run did not stop"
        except RunInterrupted:
            pass
        resumed = run(spec, store, tmp / "out-b")
        same = full.csv_path.read_bytes() == resumed.csv_path.read_bytes()
        return same, (f"{full.computed} cells, resumed {resumed.computed} after {half}; "
                      f"CSV {'identical' if same else 'differs'}")


CRITERIA = [
    (1, "exact distance identities", distance_identities),
    (2, "inner products of centred jumps", inner_products),
    (3, "point-process expectation", point_process),
    (4, "percolation recursions", percolation),
    (5, "injectivity prediction", injectivity),
    (6, "short-term prediction", short_term),
    (7, "resonance of the doubling map", resonance),
    (8, "cycle statistics", cycles),
    (9, "transfer operator", transfer_operator),
    (10, "determinism and resume", determinism),
]


def check(number: int) -> CheckResult:
    _, title, fn = CRITERIA[number - 1]
    t = time.time()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported like one
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(number, title, bool(ok), detail, time.time() - t)


def run_all(numbers=None, echo=print) -> list[CheckResult]:
    out = []
    for number, _, _ in CRITERIA:
        if numbers and number not in numbers:
            continue
        res = check(number)
        if echo:
            echo(res.line())
        out.append(res)
    return out
