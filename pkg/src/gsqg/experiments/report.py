"""Experiment reports: a JSON document plus a flat CSV of per-index records."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np


def _plain(x):
    """Convert numpy scalars/arrays and dataclasses into JSON-ready values."""
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {k: _plain(v) for k, v in dataclasses.asdict(x).items()}
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    return x


@dataclass
class ExperimentReport:
    name: str
    config: dict
    records: list = field(default_factory=list)
    thresholds: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    verdict: bool = False
    seeds: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)

    def to_dict(self, with_timing: bool = True) -> dict:
        d = {
            "name": self.name,
            "config": _plain(self.config),
            "records": _plain(self.records),
            "thresholds": _plain(self.thresholds),
            "summary": _plain(self.summary),
            "verdict": bool(self.verdict),
            "seeds": _plain(self.seeds),
            "sections": {k: v.to_dict(with_timing) if isinstance(v, ExperimentReport) else _plain(v)
                         for k, v in self.sections.items()},
        }
        if with_timing:
            d["timing"] = _plain(self.timing)
        return d

    def to_json(self, with_timing: bool = True) -> str:
        return json.dumps(self.to_dict(with_timing), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        rows = self.records
        buf = io.StringIO()
        if not rows:
            return ""
        keys = []
        for r in rows:
            for k in r:
                if k not in keys and not isinstance(r[k], (list, dict, np.ndarray)):
                    keys.append(k)
        w = csv.DictWriter(buf, fieldnames=keys, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _plain(r.get(k, "")) for k in keys})
        return buf.getvalue()

    def write(self, directory: str, stem: str | None = None) -> None:
        os.makedirs(directory, exist_ok=True)
        stem = stem or self.name
        with open(os.path.join(directory, f"{stem}.json"), "w") as fh:
            fh.write(self.to_json())
        with open(os.path.join(directory, f"{stem}.csv"), "w") as fh:
            fh.write(self.to_csv())


def parallel_map(fn: Callable, items: Iterable, workers: int = 1) -> list[Any]:
    """``map`` over independent runs, in worker processes when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
