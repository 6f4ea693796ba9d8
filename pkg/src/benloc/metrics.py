"""Performance table, shifted geometric mean, baselines and improvement
arithmetic.

The ground truth is a table (family, permutation seed, configuration) ->
solve time, capped at the time limit (no PAR-style penalty).  Per-Dataset
best minimizes the shifted geometric mean over all instances; Per-Instance
best takes the argmin per instance.  Ties break toward Default, then
lexicographically, so results are deterministic across runs.

The shift defaults to 10 seconds (the conventional MIPLIB choice) and is
configurable everywhere.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SHIFT = 10.0
DEFAULT_TIME_LIMIT = 7200.0

PARAM_NAMES = (
    "RootCutLevel",
    "TreeCutLevel",
    "RoundingHeurLevel",
    "DivingHeurLevel",
    "SubMipHeurLevel",
    "StrongBranching",
)
PARAM_VALUES = (-1, 0, 1, 2, 3)

# which parameters influence root-node processing (tree cutting happens only
# after the root node is finished, so assigning it late costs nothing)
AFFECTS_ROOT = {
    "RootCutLevel": True,
    "TreeCutLevel": False,
    "RoundingHeurLevel": True,
    "DivingHeurLevel": True,
    "SubMipHeurLevel": True,
    "StrongBranching": True,
}


class MissingEntryError(KeyError):
    """PerfTable lookup for an absent (instance, configuration) pair."""


@dataclass(frozen=True)
class ConfigId:
    """One solver parameter set to a level, or the distinguished Default."""

    param: str | None = None
    value: int | None = None

    def __post_init__(self):
        if self.param is None:
            if self.value is not None:
                raise ValueError("Default takes no value")
        else:
            if self.param not in PARAM_NAMES:
                raise ValueError(f"unknown parameter {self.param!r}")
            if self.value not in PARAM_VALUES:
                raise ValueError(f"value {self.value!r} not in {PARAM_VALUES}")

    @classmethod
    def default(cls):
        return cls()

    @property
    def is_default(self):
        return self.param is None

    @property
    def affects_root(self):
        return False if self.is_default else AFFECTS_ROOT[self.param]

    def sort_key(self):
        # Default first, then lexicographic: the documented tie-break order
        return (0, "", 0) if self.is_default else (1, self.param, self.value)

    def __str__(self):
        return "Default" if self.is_default else f"{self.param}={self.value}"

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if text == "Default":
            return cls.default()
        if "=" not in text:
            raise ValueError(f"bad configuration id {text!r}")
        param, value = text.split("=", 1)
        return cls(param, int(value))


class PerfTable:
    """(family, permutation seed, configuration) -> capped solve time."""

    def __init__(self, time_limit=DEFAULT_TIME_LIMIT):
        self.time_limit = float(time_limit)
        self._times = {}
        self._status = {}

    def add(self, family, seed, config, time, status="optimal"):
        if time <= 0:
            raise ValueError(f"nonpositive time {time} for {family}.{seed}")
        key = (family, int(seed), config)
        self._times[key] = min(float(time), self.time_limit)
        self._status[key] = status

    def __len__(self):
        return len(self._times)

    def instances(self):
        return sorted({(f, s) for f, s, _ in self._times})

    def families(self):
        return sorted({f for f, _, _ in self._times})

    def configs(self):
        return sorted({c for _, _, c in self._times}, key=ConfigId.sort_key)

    def time(self, family, seed, config):
        try:
            return self._times[(family, int(seed), config)]
        except KeyError:
            raise MissingEntryError(f"no entry for ({family}, {seed}, {config})")

    def status(self, family, seed, config):
        return self._status[(family, int(seed), config)]

    def times_for_config(self, config, instances=None):
        if instances is None:
            instances = self.instances()
        return np.array([self.time(f, s, config) for f, s in instances])

    def subset(self, instances):
        """Restriction to the given (family, seed) pairs."""
        wanted = set(instances)
        out = PerfTable(self.time_limit)
        for (f, s, c), t in self._times.items():
            if (f, s) in wanted:
                out.add(f, s, c, t, self._status[(f, s, c)])
        return out

    def validate(self):
        """Every instance must have every config; Default must be present."""
        configs = self.configs()
        if ConfigId.default() not in configs:
            raise ValueError("table lacks the Default configuration")
        for f, s in self.instances():
            for c in configs:
                if (f, s, c) not in self._times:
                    raise ValueError(f"missing entry ({f}, {s}, {c})")

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["family", "seed", "config", "time", "status"])
        for (f, s, c) in sorted(self._times, key=lambda k: (k[0], k[1],
                                                            k[2].sort_key())):
            w.writerow([f, s, str(c), repr(self._times[(f, s, c)]),
                        self._status[(f, s, c)]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, time_limit=DEFAULT_TIME_LIMIT):
        table = cls(time_limit)
        reader = csv.DictReader(io.StringIO(text))
        for row in reader:
            table.add(row["family"], int(row["seed"]),
                      ConfigId.parse(row["config"]), float(row["time"]),
                      row.get("status", "optimal"))
        return table


def shifted_geomean(times, shift=DEFAULT_SHIFT):
    """exp(mean(ln(t + shift))) - shift."""
    times = np.asarray(list(times), dtype=float)
    if times.size == 0:
        raise ValueError("shifted_geomean of an empty list")
    if np.any(times <= 0):
        raise ValueError("times must be positive")
    if shift < 0:
        raise ValueError("shift must be nonnegative")
    return float(math.exp(np.mean(np.log(times + shift))) - shift)


def pd_best(table, shift=DEFAULT_SHIFT, instances=None):
    """Configuration minimizing the dataset-level shifted geometric mean."""
    best_cfg, best_val = None, None
    for cfg in table.configs():  # Default first, then lexicographic
        val = shifted_geomean(table.times_for_config(cfg, instances), shift)
        if best_val is None or val < best_val:
            best_cfg, best_val = cfg, val
    if best_cfg is None:
        raise ValueError("empty performance table")
    return best_cfg


def pd_best_geomean(table, shift=DEFAULT_SHIFT, instances=None):
    cfg = pd_best(table, shift, instances)
    return cfg, shifted_geomean(table.times_for_config(cfg, instances), shift)


def pi_best(table, shift=DEFAULT_SHIFT, instances=None):
    """Per-instance argmin map, plus the shifted geomean of the chosen times."""
    if instances is None:
        instances = table.instances()
    configs = table.configs()
    if not instances or not configs:
        raise ValueError("empty performance table")
    chosen = {}
    times = []
    for f, s in instances:
        best_cfg, best_t = None, None
        for cfg in configs:
            t = table.time(f, s, cfg)
            if best_t is None or t < best_t:
                best_cfg, best_t = cfg, t
        chosen[(f, s)] = best_cfg
        times.append(best_t)
    return chosen, shifted_geomean(times, shift)


def improvement(baseline_time, predict_time):
    """(baseline - predict) / baseline; may be negative."""
    if baseline_time <= 0:
        raise ValueError("baseline must be positive")
    return (baseline_time - predict_time) / baseline_time


def improvement_upper_bound(table, shift=DEFAULT_SHIFT, instances=None):
    """PI-best improvement over Default minus PD-best improvement over Default.

    This is the headroom any per-instance learning method has over simply
    picking the best single configuration for the dataset.
    """
    default = ConfigId.default()
    d = shifted_geomean(table.times_for_config(default, instances), shift)
    _, pd_g = pd_best_geomean(table, shift, instances)
    _, pi_g = pi_best(table, shift, instances)
    return improvement(d, pi_g) - improvement(d, pd_g)
