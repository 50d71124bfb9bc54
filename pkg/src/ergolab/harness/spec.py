"""Experiment specifications and their JSON config files."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

from ..exceptions import InvalidSpec
from ..expanding_map import MapParams, check_expanding
from ..grid import SchemeKind

EXPERIMENTS = (
    "srb-distance",
    "iterate-distance",
    "short-term-vs-prediction",
    "injectivity",
    "local-preimage-density",
    "scheme-comparison",
    "asymptotic-mu",
    "time-to-cycle",
    "min-distance-time",
)

# desk-scale defaults, far below full-scale multi-day sweeps
DEFAULTS = {
    "srb-distance": dict(n=[2 ** 10, 2 ** 12, 2 ** 14, 2 ** 16], kmax=60),
    "iterate-distance": dict(n=[2 ** 10, 2 ** 12, 2 ** 14, 2 ** 16], kmax=60),
    "short-term-vs-prediction": dict(n=[2 ** 20], kmax=25, ensemble_step=0.001),
    "injectivity": dict(n=[10 ** 3, 10 ** 4, 10 ** 5], kmax=50),
    "local-preimage-density": dict(n=[10 ** 6], k_values=[1, 2, 4, 10], window=40, mmax=32),
    "scheme-comparison": dict(n=[5 * 10 ** 4], kmax=500, seeds=[0, 1, 2, 3, 4],
                              schemes=[s.value for s in SchemeKind]),
    "asymptotic-mu": dict(n=[2 ** j for j in range(10, 21)], kmax=0),
    "time-to-cycle": dict(n=[2 ** j for j in range(8, 19)], kmax=0, seeds=list(range(50))),
    "min-distance-time": dict(n=[2 ** j for j in range(10, 21, 2)], kmax=80),
}

SCALE_NOTES = {
    "srb-distance": "grid orders up to 2^16 (full scale 2^23)",
    "short-term-vs-prediction": "N = 2^20 (full scale 2^23)",
    "injectivity": "N up to 1e5, k <= 50 (full scale 1e6, k <= 200)",
    "scheme-comparison": "N = 5e4, k <= 500 (full scale 1.2e5, k <= 3000)",
    "asymptotic-mu": "N up to 2^20 (full scale 2^25)",
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to regenerate one figure-family table.

    Fields left as ``None`` take the experiment's desk-scale default.
    """

    experiment: str
    map: dict = field(default_factory=lambda: MapParams().as_dict())
    ensemble_step: Optional[float] = None
    n: Optional[list] = None
    kmax: Optional[int] = None
    k_values: Optional[list] = None
    schemes: Optional[list] = None
    seeds: Optional[list] = None
    resolution: int = 2 ** 16
    mmax: Optional[int] = None
    window: Optional[int] = None
    band: float = 0.05
    predictions: bool = True

    def resolved(self) -> "ExperimentSpec":
        """Copy with defaults filled in and every field validated."""
        if self.experiment not in EXPERIMENTS:
            raise InvalidSpec(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        base = dict(n=None, kmax=0, k_values=None, schemes=["MapToClosest"], seeds=[0],
                    mmax=256, window=40)
        base.update(DEFAULTS[self.experiment])
        updates = {k: v for k, v in base.items() if getattr(self, k, None) is None}
        spec = replace(self, **updates)
        if spec.k_values is None:
            spec = replace(spec, k_values=list(range(spec.kmax + 1)))
        spec._validate()
        return spec

    def _validate(self):
        try:
            params = self.map_params
        except TypeError as exc:
            raise InvalidSpec(f"bad map parameters: {exc}") from None
        if not check_expanding(params):
            raise InvalidSpec(f"map {params} is not expanding")
        if not self.n or any(int(v) != v or v < 1 for v in self.n):
            raise InvalidSpec("n must be a non-empty list of positive integers")
        if self.kmax < 0 or any(k < 0 for k in self.k_values):
            raise InvalidSpec("times must be non-negative")
        for s in self.schemes:
            try:
                SchemeKind(s)
            except ValueError:
                raise InvalidSpec(f"unknown scheme {s!r}") from None
        if not self.seeds:
            raise InvalidSpec("seeds must be non-empty")
        if self.resolution < 2 or self.mmax < 1 or self.window < 1:
            raise InvalidSpec("resolution, mmax and window must be positive")
        if self.band <= 0:
            raise InvalidSpec("band must be positive")
        if self.ensemble_step is not None and self.ensemble_step < 0:
            raise InvalidSpec("ensemble_step must be >= 0")

    @property
    def map_params(self) -> MapParams:
        return MapParams(**self.map)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidSpec(f"unknown config keys: {', '.join(unknown)}")
        if "experiment" not in data:
            raise InvalidSpec("config needs an 'experiment' key")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidSpec(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidSpec(f"{path}: top level must be an object")
        return cls.from_dict(data)
