"""Drive an experiment: plan cells, reuse or compute them, write the table."""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..exceptions import ErgolabError, StoreCorruption
from .experiments import NOTES, aggregate, compute_cell, plan, settings_for
from .spec import SCALE_NOTES, ExperimentSpec
from .store import ResultStore, cell_key

COLUMNS = ("k", "N", "scheme", "seed", "statistic", "value")


class RunInterrupted(ErgolabError):
    """Raised when ``max_cells`` stops a run before every cell exists."""

    def __init__(self, computed: int, remaining: int):
        super().__init__(f"stopped after computing {computed} cells; {remaining} still missing")
        self.computed = computed
        self.remaining = remaining


@dataclass
class RunResult:
    rows: list
    computed: int
    reused: int
    csv_path: Path = None
    meta_path: Path = None
    recomputed_corrupt: list = field(default_factory=list)


def _format(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_table(rows, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow([_format(v) for v in row])


def _version() -> str:
    from .. import __version__
    return __version__


def _compute(args):
    cell, settings, key = args
    return compute_cell(cell, settings, key)


def run(spec: ExperimentSpec, store: ResultStore, out_dir=None, *, resume: bool = True,
        max_cells: int = None, jobs: int = 1, log=None) -> RunResult:
    """Compute every missing cell of ``spec`` and emit its output table.

    Parameters
    ----------
    spec : ExperimentSpec
    store : ResultStore
    out_dir : path-like, optional
        Where ``<experiment>.csv`` and ``<experiment>.json`` are written.
        Nothing is written when omitted.
    resume : bool
        Reuse cells already in the store. With ``False`` every cell is
        recomputed and overwritten.
    max_cells : int, optional
        Stop after computing this many cells and raise ``RunInterrupted``
        if any are still missing. Stored cells are kept.
    jobs : int
        Worker processes for missing cells. Results do not depend on it.

    Raises
    ------
    InvalidSpec
    RunInterrupted
    """
    started = time.time()
    spec = spec.resolved()
    settings = settings_for(spec)
    cells = plan(spec)
    keys = [cell_key(c.description(settings)) for c in cells]
    payloads = [None] * len(cells)
    corrupt = []
    if resume:
        for i, key in enumerate(keys):
            try:
                payloads[i] = store.get(key)
            except StoreCorruption:
                corrupt.append(key)
                store.discard(key)
    missing = [i for i, p in enumerate(payloads) if p is None]
    reused = len(cells) - len(missing)
    todo = missing if max_cells is None else missing[:max_cells]

    def done(i, payload):
        payloads[i] = payload
        store.put(keys[i], payload, cells[i].description(settings),
                  {"experiment": spec.experiment, "version": _version(), "created": time.time()})
        if log:
            log(f"cell {keys[i][:12]} ({cells[i].kind}) done")

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            args = [(cells[i], settings, keys[i]) for i in todo]
            for i, payload in zip(todo, pool.map(_compute, args)):
                done(i, payload)
    else:
        for i in todo:
            done(i, compute_cell(cells[i], settings, keys[i]))
    if len(todo) < len(missing):
        raise RunInterrupted(len(todo), len(missing) - len(todo))

    rows = [row for p in payloads for row in p]
    rows += aggregate(spec, rows)
    result = RunResult(rows, len(todo), reused, recomputed_corrupt=corrupt)
    if out_dir is not None:
        out = Path(out_dir)
        result.csv_path = out / f"{spec.experiment}.csv"
        result.meta_path = out / f"{spec.experiment}.json"
        write_table(rows, result.csv_path)
        meta = {
            "spec": spec.to_dict(),
            "seeds": list(spec.seeds),
            "columns": list(COLUMNS),
            "version": _version(),
            "started": started,
            "finished": time.time(),
            "cells": keys,
            "computed": result.computed,
            "reused": reused,
            "scale": SCALE_NOTES.get(spec.experiment, "desk scale"),
            "notes": NOTES.get(spec.experiment, ""),
        }
        with open(result.meta_path, "w") as fh:
            json.dump(meta, fh, indent=1)
    return result
