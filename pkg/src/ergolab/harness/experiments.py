"""Cell planning, cell computation and table aggregation for every experiment.

A cell is the unit of work stored in the result store. Its payload is a
list of table rows ``[k, N, scheme, seed, statistic, value]``; ``None``
marks a column that does not apply.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..expanding_map import MapParams
from ..grid import Scheme, SchemeKind, discretize
from ..measure import GridMeasure, PiecewiseDensity, cramer, cramer_sq, lebesgue, pushforward_table
from ..orbits import asymptotic_measure, decompose, mean_orbit_cardinality, random_table, rho_length_asymptotic
from ..predictions import (injectivity_limits, mean_densities, pk_series, preimage_poly_fields,
                           rate_of_injectivity_series)
from ..rng import make_rng
from ..transfer_op import TransferOperator
from .analysis import PeriodDetector, ensemble, linear_fit, local_preimage_histogram, min_distance_time, threshold_time
from .spec import ExperimentSpec

NOTES = {
    "scheme-comparison": (
        "pk_verbatim is the raw sum over m >= 1 of (int a_m)^2 (1/12 - d_C(a_m, Leb)^2), unscaled; "
        "dC_pk_theorem is the square root of the expected squared distance between f^k Leb and the "
        "weighted point process with N points; dC_random_srb is sqrt((1/12 - d_C(SRB, Leb)^2) / N)"),
    "short-term-vs-prediction": "relative differences are (empirical - predicted) / predicted",
    "local-preimage-density": "statistics encode m and the window centre x; values are local frequencies",
}

LOCAL_M_REPORT = 10
LOCAL_CENTERS = 100
MAINTEO_KMAX = 40


@dataclass(frozen=True)
class Cell:
    kind: str
    params: tuple  # sorted (name, value) pairs

    @property
    def kw(self) -> dict:
        return dict(self.params)

    def description(self, settings: dict) -> dict:
        return {"kind": self.kind, "params": self.kw, "settings": settings}


def _cell(kind, **params):
    return Cell(kind, tuple(sorted(params.items())))


def settings_for(spec: ExperimentSpec) -> dict:
    return {
        "kmax": spec.kmax,
        "k_values": list(spec.k_values),
        "resolution": spec.resolution,
        "mmax": spec.mmax,
        "window": spec.window,
    }


# -- shared references, memoized per process ---------------------------------

def _params(d) -> MapParams:
    return MapParams(**d)


@lru_cache(maxsize=4)
def operator(params: MapParams, M: int) -> TransferOperator:
    return TransferOperator(params, M)


@lru_cache(maxsize=4)
def srb(params: MapParams, M: int) -> PiecewiseDensity:
    return operator(params, M).srb_density()


@lru_cache(maxsize=4)
def _lebit_prefix(params: MapParams, M: int) -> tuple:
    """``L^k 1`` until the iterates stop changing."""
    op = operator(params, M)
    out = [PiecewiseDensity(np.ones(M))]
    while len(out) < 5000:
        nxt = op.rpf_apply(out[-1])
        done = np.max(np.abs(nxt.values - out[-1].values)) <= 1e-15
        out.append(nxt)
        if done:
            break
    return tuple(out)


def lebit(params: MapParams, M: int, k: int) -> PiecewiseDensity:
    """Density of ``f^k_* Leb`` at resolution ``M``."""
    seq = _lebit_prefix(params, M)
    return seq[min(k, len(seq) - 1)]


def maps_for(spec: ExperimentSpec) -> list:
    base = spec.map_params
    if spec.ensemble_step is None:
        return [("", base)]
    return [(f"map{j:02d}", p) for j, p in enumerate(ensemble(base, spec.ensemble_step))]


def _stat(name, label):
    return f"{name}@{label}" if label else name


# -- cell computations ----------------------------------------------------------

def _discrete_srb(c, s, rng):
    params, N = _params(c["map"]), c["N"]
    ref = srb(params, s["resolution"])
    fN = discretize(params, N)
    mu = GridMeasure.uniform(N)
    det = PeriodDetector()
    rows = []
    for k in range(s["kmax"] + 1):
        rows.append([k, N, "MapToClosest", None, _stat("dC_discrete_srb", c["label"]), cramer(mu, ref)])
        det.add(k, mu.weights)
        mu = pushforward_table(mu, fN)
    if det.period is not None:
        rows.append([det.start, N, "MapToClosest", None, _stat("period", c["label"]), float(det.period)])
    return rows


def _continuous_srb(c, s, rng):
    params, M = _params(c["map"]), s["resolution"]
    ref = srb(params, M)
    return [[k, None, None, None, _stat("dC_continuous_srb", c["label"]), cramer(lebit(params, M, k), ref)]
            for k in range(s["kmax"] + 1)]


def _iterate_distance(c, s, rng):
    params, N, M = _params(c["map"]), c["N"], s["resolution"]
    fN = discretize(params, N)
    mu = GridMeasure.uniform(N)
    rows = []
    for k in range(s["kmax"] + 1):
        rows.append([k, N, "MapToClosest", None, _stat("N_dC_iterate", c["label"]),
                     N * cramer(mu, lebit(params, M, k))])
        mu = pushforward_table(mu, fN)
    return rows


def _short_term(c, s, rng):
    params, N, M = _params(c["map"]), c["N"], s["resolution"]
    fN = discretize(params, N)
    mu = GridMeasure.uniform(N)
    rows = []
    for k in range(s["kmax"] + 1):
        rows.append([k, N, "MapToClosest", None, _stat("N2_dC2_empirical", c["label"]),
                     N * N * cramer_sq(mu, lebit(params, M, k))])
        mu = pushforward_table(mu, fN)
    return rows


def _mainteo(c, s, rng):
    params = _params(c["map"])
    pred = operator(params, s["resolution"]).mainteo_predictions(c["kmax"])
    return [[k, None, None, None, _stat("N2_dC2_predicted", c["label"]), float(v)]
            for k, v in enumerate(pred)]


def _injectivity_empirical(c, s, rng):
    params, N = _params(c["map"]), c["N"]
    tau = rate_of_injectivity_series(discretize(params, N), s["kmax"])
    return [[k, N, "MapToClosest", None, _stat("tau_empirical", c["label"]), float(v)]
            for k, v in enumerate(tau)]


def _injectivity_predicted(c, s, rng):
    params = _params(c["map"])
    lim = injectivity_limits(operator(params, s["resolution"]), s["kmax"])
    return [[k, None, None, None, _stat("tau_predicted", c["label"]), float(v)]
            for k, v in enumerate(lim)]


def _local_preimage(c, s, rng):
    params, N, k = _params(c["map"]), c["N"], c["k"]
    M, R = s["resolution"], s["window"]
    m_rep = min(LOCAL_M_REPORT, s["mmax"])
    hist = local_preimage_histogram(discretize(params, N), k, R, m_rep)
    op = operator(params, M)
    fields = list(preimage_poly_fields(op, k, s["mmax"]))
    field = fields[-1]
    centers = (np.arange(LOCAL_CENTERS) + 0.5) / LOCAL_CENTERS
    grid_idx = np.floor(centers * N).astype(np.int64) % N
    node_idx = np.floor(centers * M).astype(np.int64) % M
    rows = []
    for m in range(m_rep + 1):
        for x, gi, ni in zip(centers, grid_idx, node_idx):
            tag = _stat(f"m={m}:x={x:.4f}", c["label"])
            rows.append([k, N, "MapToClosest", None, f"empirical:{tag}", float(hist[m, gi])])
            rows.append([k, N, None, None, f"predicted:{tag}", float(field[ni, m])])
    return rows


def _scheme(c, s, rng):
    params, N, M = _params(c["map"]), c["N"], s["resolution"]
    scheme = Scheme(c["scheme"], params, N, rng)
    state = scheme.initial_state()
    rows = []
    stat = _stat("dC_to_lebit", c["label"])
    for k in range(s["kmax"] + 1):
        rows.append([k, N, c["scheme"], c["seed"], stat, cramer(scheme.measure(state), lebit(params, M, k))])
        if k < s["kmax"]:
            state = scheme.push(state, rng)
    return rows


def _pk(c, s, rng):
    params, N, M = _params(c["map"]), c["N"], s["resolution"]
    op = operator(params, M)
    series = pk_series(op, s["kmax"], s["mmax"], n_points=N)
    srb_curve = np.sqrt((1.0 / 12.0 - cramer_sq(srb(params, M), lebesgue())) / N)
    rows = []
    for k in range(s["kmax"] + 1):
        rows.append([k, N, None, None, _stat("pk_verbatim", c["label"]), float(series["verbatim"][k])])
        rows.append([k, N, None, None, _stat("dC_pk_theorem", c["label"]),
                     float(np.sqrt(series["theorem"][k]))])
        rows.append([k, N, None, None, _stat("dC_random_srb", c["label"]), float(srb_curve)])
    return rows


def _asymptotic_mu(c, s, rng):
    params, N = _params(c["map"]), c["N"]
    fN = discretize(params, N)
    d = decompose(fN)
    mu = asymptotic_measure(fN, d)
    label = c["label"]
    return [
        [None, N, "MapToClosest", None, _stat("dC_muN_srb", label), cramer(mu, srb(params, s["resolution"]))],
        [None, N, "MapToClosest", None, _stat("n_cycles", label), float(len(d.cycles))],
        [None, N, "MapToClosest", None, _stat("largest_basin_fraction", label), float(d.basin_size.max() / N)],
    ]


def _orbit_card(c, s, rng):
    params, N = _params(c["map"]), c["N"]
    v = mean_orbit_cardinality(discretize(params, N))
    return [[None, N, "MapToClosest", None, _stat("mean_orbit_cardinality", c["label"]), v]]


def _random_orbit_card(c, s, rng):
    N = c["N"]
    return [[None, N, "random", c["seed"], "mean_orbit_cardinality_random",
             mean_orbit_cardinality(random_table(N, rng))]]


COMPUTE = {
    "discrete-srb": _discrete_srb,
    "continuous-srb": _continuous_srb,
    "iterate-distance": _iterate_distance,
    "short-term": _short_term,
    "mainteo": _mainteo,
    "injectivity-empirical": _injectivity_empirical,
    "injectivity-predicted": _injectivity_predicted,
    "local-preimage": _local_preimage,
    "scheme": _scheme,
    "pk": _pk,
    "asymptotic-mu": _asymptotic_mu,
    "orbit-card": _orbit_card,
    "random-orbit-card": _random_orbit_card,
}


def compute_cell(cell: Cell, settings: dict, key: str) -> list:
    rng = make_rng("cell", key)
    rows = COMPUTE[cell.kind](cell.kw, settings, rng)
    return [[_json_num(v) for v in row] for row in rows]


def _json_num(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


# -- planning ---------------------------------------------------------------------

def plan(spec: ExperimentSpec) -> list[Cell]:
    maps = maps_for(spec)
    ex = spec.experiment
    cells = []
    for label, p in maps:
        m = p.as_dict()
        if ex == "srb-distance":
            cells.append(_cell("continuous-srb", map=m, label=label))
            cells += [_cell("discrete-srb", map=m, label=label, N=N) for N in spec.n]
        elif ex == "min-distance-time":
            cells += [_cell("discrete-srb", map=m, label=label, N=N) for N in spec.n]
        elif ex == "iterate-distance":
            cells += [_cell("iterate-distance", map=m, label=label, N=N) for N in spec.n]
        elif ex == "short-term-vs-prediction":
            cells.append(_cell("mainteo", map=m, label=label, kmax=spec.kmax))
            cells += [_cell("short-term", map=m, label=label, N=N) for N in spec.n]
        elif ex == "injectivity":
            cells.append(_cell("injectivity-predicted", map=m, label=label))
            cells += [_cell("injectivity-empirical", map=m, label=label, N=N) for N in spec.n]
        elif ex == "local-preimage-density":
            cells += [_cell("local-preimage", map=m, label=label, N=N, k=k)
                      for N in spec.n for k in spec.k_values]
        elif ex == "scheme-comparison":
            if spec.predictions:
                cells.append(_cell("mainteo", map=m, label=label, kmax=min(spec.kmax, MAINTEO_KMAX)))
                cells += [_cell("pk", map=m, label=label, N=N) for N in spec.n]
            for N in spec.n:
                for scheme in spec.schemes:
                    seeds = [0] if SchemeKind(scheme) is SchemeKind.MAP_TO_CLOSEST \
                        or SchemeKind(scheme) is SchemeKind.MAP_TO_COMBINATION else spec.seeds
                    cells += [_cell("scheme", map=m, label=label, N=N, scheme=scheme, seed=sd)
                              for sd in seeds]
        elif ex == "asymptotic-mu":
            cells += [_cell("asymptotic-mu", map=m, label=label, N=N) for N in spec.n]
        elif ex == "time-to-cycle":
            cells += [_cell("orbit-card", map=m, label=label, N=N) for N in spec.n]
    if ex == "time-to-cycle":
        cells += [_cell("random-orbit-card", N=N, seed=sd) for N in spec.n for sd in spec.seeds]
    return cells


# -- aggregation -------------------------------------------------------------------

def _series(rows, stat_prefix):
    """{(N, scheme, label): {k: [values]}} for rows whose statistic starts with ``stat_prefix``."""
    out = {}
    for k, N, scheme, seed, stat, value in rows:
        name, _, label = stat.partition("@")
        if name != stat_prefix:
            continue
        out.setdefault((N, scheme, label), {}).setdefault(k, []).append(value)
    return out


def aggregate(spec: ExperimentSpec, rows: list) -> list:
    ex = spec.experiment
    out = []
    if ex == "scheme-comparison":
        groups = {}
        for k, N, scheme, seed, stat, value in rows:
            if stat.partition("@")[0] == "dC_to_lebit":
                groups.setdefault((N, scheme), {}).setdefault(k, []).append(value)
        for (N, scheme), by_k in groups.items():
            for k in sorted(by_k):
                v = np.asarray(by_k[k])
                out.append([k, N, scheme, None, "dC_to_lebit_mean", float(v.mean())])
                out.append([k, N, scheme, None, "dC_to_lebit_std", float(v.std())])
    elif ex == "short-term-vs-prediction":
        pred = {label: by_k for (_, _, label), by_k in _series(rows, "N2_dC2_predicted").items()}
        emp = _series(rows, "N2_dC2_empirical")
        for N in spec.n:
            members = sorted(label for (n, _, label) in emp if n == N)
            ks = sorted(emp[(N, "MapToClosest", members[0])])
            E = np.array([[emp[(N, "MapToClosest", lb)][k][0] for k in ks] for lb in members])
            P = np.array([[pred[lb][k][0] for k in ks] for lb in members])
            rel = (E - P) / P
            for j, k in enumerate(ks):
                out.append([k, N, "MapToClosest", None, "N2_dC2_empirical_mean", float(E[:, j].mean())])
                out.append([k, N, "MapToClosest", None, "N2_dC2_empirical_std", float(E[:, j].std())])
                out.append([k, N, None, None, "N2_dC2_predicted_mean", float(P[:, j].mean())])
                out.append([k, N, "MapToClosest", None, "relative_difference_mean", float(rel[:, j].mean())])
                out.append([k, N, "MapToClosest", None, "relative_difference_std", float(rel[:, j].std())])
            out.append([None, N, "MapToClosest", None, "threshold_time",
                        float(threshold_time(E, P, spec.band))])
    elif ex == "injectivity":
        pred = _series(rows, "tau_predicted")
        emp = _series(rows, "tau_empirical")
        for (N, scheme, label), by_k in emp.items():
            p = pred[(None, None, label)]
            for k in sorted(by_k):
                rel = (by_k[k][0] - p[k][0]) / p[k][0]
                out.append([k, N, scheme, None, _stat("tau_relative_difference", label), float(rel)])
    elif ex == "min-distance-time":
        series = _series(rows, "dC_discrete_srb")
        by_label = {}
        for (N, scheme, label), by_k in series.items():
            t = min_distance_time([by_k[k][0] for k in sorted(by_k)])
            out.append([None, N, scheme, None, _stat("t_N", label), float(t)])
            by_label.setdefault(label, []).append((np.log10(N), t))
        for label, pts in by_label.items():
            if len(pts) > 1:
                x, y = zip(*pts)
                fit = linear_fit(x, y)
                for name in ("slope", "intercept", "correlation"):
                    out.append([None, None, None, None, _stat(f"t_N_vs_log10N_{name}", label), fit[name]])
    elif ex == "time-to-cycle":
        rand = {}
        own = []
        for k, N, scheme, seed, stat, value in rows:
            if stat == "mean_orbit_cardinality_random":
                rand.setdefault(N, []).append(value)
            elif stat.partition("@")[0] == "mean_orbit_cardinality":
                own.append((N, value))
        for N in spec.n:
            out.append([None, N, "random", None, "mean_orbit_cardinality_random_mean",
                        float(np.mean(rand[N]))])
            out.append([None, N, None, None, "sqrt_pi_N_over_2", rho_length_asymptotic(N)])
        if len(own) > 1:
            x, y = zip(*own)
            fit = linear_fit(np.log2(x), np.log2(y))
            out.append([None, None, "MapToClosest", None, "log2_card_vs_log2N_slope", fit["slope"]])
    return out
