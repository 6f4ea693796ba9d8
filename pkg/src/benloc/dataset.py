"""In-memory benchmark dataset: instances, features, logs and ground truth.

A BenchmarkData bundles everything the pipeline consumes: the performance
table, per-instance static features, and parsed solver logs (one per
configuration; the Default log supplies prediction-time dynamic features).
It can be built from the planted oracle for desk-scale experiments, written
out to a directory, or loaded back from a manifest.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .instance import parse_mps, permute_instance, write_mps
from .learners import build_examples
from .logs import FeatureStage, assemble_features, dynamic_features, parse_log
from .metrics import DEFAULT_SHIFT, ConfigId, PerfTable
from .splits import DatasetManifest
from .static_features import extract_static
from .synth import OracleSpec, gen_indset, gen_setcover, oracle_times, planted_optimum


@dataclass
class BenchmarkData:
    name: str
    perf: PerfTable
    static: dict  # (family, seed) -> StaticFeatureVector
    logs: dict  # (family, seed) -> {str(config): SolveLog}
    instances: dict = field(default_factory=dict)  # optional MipInstances
    planted_pi: dict = field(default_factory=dict)  # oracle ground truth
    spec: OracleSpec | None = None

    def pairs(self):
        return sorted(self.static)

    def families(self):
        return sorted({f for f, _ in self.static})

    def manifest(self, base_dir=""):
        families = {}
        for f, s in self.pairs():
            families.setdefault(f, {})[s] = os.path.join(
                base_dir, "instances", f"{f}.perm{s}.mps")
        return DatasetManifest(name=self.name, families=families,
                               perf_path=os.path.join(base_dir, "perf.csv"),
                               log_dir=os.path.join(base_dir, "logs"))

    def default_log(self, family, seed):
        from .logs import MissingStageError
        per_cfg = self.logs.get((family, seed), {})
        log = per_cfg.get(str(ConfigId.default()))
        if log is None:
            raise MissingStageError(
                f"no Default-configuration log for ({family}, {seed})")
        return log

    def root_time(self, family, seed, config):
        return self.logs[(family, seed)][str(config)].root_time

    def feature_map(self, stage):
        """(names, values) per instance at the given feature stage."""
        out = {}
        for key, static in self.static.items():
            dyn = None
            if stage != FeatureStage.STATIC_ONLY:
                dyn = dynamic_features(self.default_log(*key))
            out[key] = assemble_features(static, dyn, stage)
        return out

    def examples(self, stage, shift=DEFAULT_SHIFT):
        return build_examples(self.perf, self.feature_map(stage), shift)


def _family_rng(seed, idx):
    return np.random.default_rng(np.random.SeedSequence([seed, idx]))


def build_oracle_dataset(n_families=60, n_perms=10, spec=None, kind="setcover",
                         seed=0, keep_instances=False, name="oracle"):
    """Generate families, permute each, and label everything with the oracle.

    Instance sizes and densities vary per family; densities avoid a margin
    around the planted threshold so the rule stays crisp.
    """
    spec = spec or OracleSpec(seed=seed)
    perf = PerfTable(spec.time_limit)
    static = {}
    logs = {}
    instances = {}
    planted = {}

    for idx in range(n_families):
        family = f"fam{idx:03d}"
        rng = _family_rng(seed, idx)
        lo = rng.random() < 0.5
        density = 0.15 + 0.3 * rng.random() if lo else 0.55 + 0.3 * rng.random()
        if kind == "setcover":
            rows = int(rng.integers(8, 20))
            cols = int(rng.integers(15, 40))
            base = gen_setcover(rows, cols, density, seed=seed * 1000 + idx)
        elif kind == "indset":
            nodes = int(rng.integers(10, 30))
            base = gen_indset(nodes, density, seed=seed * 1000 + idx)
        else:
            raise ValueError(f"unknown generator kind {kind!r}")

        n_int = sum(t != "continuous" for t in base.var_types)
        stats = (base.num_rows, base.num_cols, n_int)
        for s in range(n_perms):
            inst, _ = permute_instance(base, s)
            feats = extract_static(inst)
            key = (family, s)
            static[key] = feats
            if keep_instances:
                instances[key] = inst
            times, raw_logs = oracle_times(family, s, feats, spec,
                                           instance_stats=stats)
            logs[key] = {}
            for cfg, t in times.items():
                status = "time_limit" if t >= spec.time_limit else "optimal"
                perf.add(family, s, cfg, t, status)
                logs[key][str(cfg)] = parse_log(raw_logs[cfg])
            planted[key] = planted_optimum(spec, family, feats)

    return BenchmarkData(name=name, perf=perf, static=static, logs=logs,
                         instances=instances, planted_pi=planted, spec=spec)


def write_dataset(data, out_dir):
    """Write instances (when kept), logs, perf.csv and manifest.json."""
    os.makedirs(os.path.join(out_dir, "instances"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "logs"), exist_ok=True)
    for (f, s), inst in data.instances.items():
        path = os.path.join(out_dir, "instances", f"{f}.perm{s}.mps")
        with open(path, "w") as fh:
            fh.write(write_mps(inst))
    for (f, s), per_cfg in data.logs.items():
        for cfg_str, log in per_cfg.items():
            path = os.path.join(out_dir, "logs", f"{f}.perm{s}.{cfg_str}.log")
            with open(path, "w") as fh:
                fh.write(_render_log(log))
    with open(os.path.join(out_dir, "perf.csv"), "w") as fh:
        fh.write(data.perf.to_csv())
    manifest = data.manifest(out_dir)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(manifest.to_json())
    return os.path.join(out_dir, "manifest.json")


_STAGE_LINE = {
    "presolve": "PRESOLVE",
    "global_cut": "GLOBALCUT",
    "first_root_lp": "ROOTLP",
    "root_end": "ROOT_END",
}

def _render_log(log):
    """Re-emit a SolveLog in the canonical schema."""
    lines = []
    if log.instance_id or log.config_id:
        lines.append(f"META instance={log.instance_id} config={log.config_id}")
    for stage in ("presolve", "global_cut", "first_root_lp", "root_end"):
        kv = log.stage_values(stage)
        if kv:
            body = " ".join(f"{k}={v!r}" for k, v in kv.items())
            lines.append(f"{_STAGE_LINE[stage]} {body}")
    lines.append(f"STATUS status={log.status} total_time={log.total_time!r} "
                 f"root_time={log.root_time!r}")
    return "\n".join(lines) + "\n"


def load_dataset(manifest_path):
    """Load a written dataset back: parses MPS files, logs and perf.csv."""
    with open(manifest_path) as fh:
        manifest = DatasetManifest.from_json(fh.read())
    manifest.validate(check_files=True)
    with open(manifest.perf_path) as fh:
        perf = PerfTable.from_csv(fh.read())
    static = {}
    instances = {}
    logs = {}
    configs = perf.configs()
    for fam, seeds in manifest.families.items():
        for s, path in seeds.items():
            with open(path) as fh:
                inst = parse_mps(fh.read())
            instances[(fam, s)] = inst
            static[(fam, s)] = extract_static(inst)
            logs[(fam, s)] = {}
            for cfg in configs:
                log_path = os.path.join(manifest.log_dir,
                                        f"{fam}.perm{s}.{cfg}.log")
                if os.path.exists(log_path):
                    with open(log_path) as fh:
                        logs[(fam, s)][str(cfg)] = parse_log(fh.read())
    return BenchmarkData(name=manifest.name, perf=perf, static=static,
                         logs=logs, instances=instances)
