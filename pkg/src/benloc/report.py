"""End-to-end evaluation and report tables.

evaluate_split runs one train/predict/evaluate pass: the Per-Dataset best
baseline is chosen on the training side only, predicted configurations pay
the root re-solve cost when root-end features were consumed, and all summary
numbers are shifted geometric means over the test instances.

Because it is ambiguous whether multi-seed improvements should be the mean of
per-split improvements or the improvement of averaged times (the two differ),
summaries report both, labeled mean_imp_* and imp_of_mean_* respectively.

Percentages print with two decimals, half-even rounding.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np

from .learners import build_examples, predict_config, train
from .logs import FeatureStage, extra_cost
from .metrics import (DEFAULT_SHIFT, ConfigId, improvement,
                      improvement_upper_bound, pd_best, pi_best,
                      shifted_geomean)
from .splits import split_by_instance, split_by_permutation, stratified_split


def format_pct(fraction, decimals=2):
    """Half-even percentage formatting, e.g. 0.0249195 -> '2.49%'."""
    q = Decimal(1).scaleb(-decimals)
    return f"{Decimal(fraction * 100).quantize(q, ROUND_HALF_EVEN)}%"


@dataclass
class EvalResult:
    stage: FeatureStage
    kind: str
    split_seed: int
    pd_config: ConfigId
    default_geomean: float
    pd_geomean: float
    pi_geomean: float
    pred_geomean: float
    predictions: dict  # (family, seed) -> ConfigId

    @property
    def imp_default(self):
        return improvement(self.default_geomean, self.pred_geomean)

    @property
    def imp_pd(self):
        return improvement(self.pd_geomean, self.pred_geomean)


def evaluate_split(data, assignment, stage, kind="reg_forest",
                   hyperparams=None, shift=DEFAULT_SHIFT, train_seed=0):
    """Train on the assignment's train side, evaluate on its test side."""
    feature_map = data.feature_map(stage)
    examples = {(ex.family, ex.seed): ex
                for ex in build_examples(data.perf, feature_map, shift)}
    train_ex = [examples[p] for p in assignment.train]
    test_ex = [examples[p] for p in assignment.test]

    # family-disjoint strategies declare their test registry; the leaky
    # by_permutation strategy cannot (training would rightly refuse)
    registry = None
    if assignment.family_overlap() == 0:
        registry = set(assignment.test_families())
    model = train(kind, train_ex, hyperparams=hyperparams, seed=train_seed,
                  test_registry=registry)

    default = ConfigId.default()
    test_pairs = assignment.test
    default_g = shifted_geomean(
        data.perf.times_for_config(default, test_pairs), shift)
    pd_cfg = pd_best(data.perf, shift, instances=assignment.train)
    pd_g = shifted_geomean(
        data.perf.times_for_config(pd_cfg, test_pairs), shift)
    _, pi_g = pi_best(data.perf, shift, instances=test_pairs)

    predictions = {}
    pred_times = []
    for ex in test_ex:
        cfg = predict_config(model, ex.features)
        predictions[(ex.family, ex.seed)] = cfg
        t = data.perf.time(ex.family, ex.seed, cfg)
        t = extra_cost(t, data.root_time(ex.family, ex.seed, cfg), stage,
                       cfg.affects_root)
        pred_times.append(t)
    pred_g = shifted_geomean(pred_times, shift)

    return EvalResult(stage=stage, kind=kind, split_seed=assignment.seed,
                      pd_config=pd_cfg, default_geomean=default_g,
                      pd_geomean=pd_g, pi_geomean=pi_g, pred_geomean=pred_g,
                      predictions=predictions)


_SPLITTERS = {
    "by_instance": lambda data, frac, seed: split_by_instance(
        data.manifest(), frac, seed),
    "by_permutation": lambda data, frac, seed: split_by_permutation(
        data.manifest(), frac, seed),
    "stratified": lambda data, frac, seed: stratified_split(
        data.manifest(), data.perf, frac, seed),
}


def run_experiment(data, stage, kind="reg_forest", strategy="by_instance",
                   split_seeds=(0,), test_fraction=0.2, hyperparams=None,
                   shift=DEFAULT_SHIFT):
    """One evaluation per split seed; the learner seed follows the split seed."""
    results = []
    for s in split_seeds:
        assignment = _SPLITTERS[strategy](data, test_fraction, s)
        results.append(evaluate_split(data, assignment, stage, kind,
                                      hyperparams, shift, train_seed=s))
    return results


def summarize(results):
    """Both aggregation conventions over a list of EvalResults."""
    imp_pd = [r.imp_pd for r in results]
    imp_default = [r.imp_default for r in results]
    mean_pred = float(np.mean([r.pred_geomean for r in results]))
    mean_pd = float(np.mean([r.pd_geomean for r in results]))
    mean_default = float(np.mean([r.default_geomean for r in results]))
    return {
        "n_splits": len(results),
        "mean_pred_geomean": mean_pred,
        "mean_pd_geomean": mean_pd,
        "mean_default_geomean": mean_default,
        "mean_imp_pd": float(np.mean(imp_pd)),
        "mean_imp_default": float(np.mean(imp_default)),
        "imp_of_mean_pd": improvement(mean_pd, mean_pred),
        "imp_of_mean_default": improvement(mean_default, mean_pred),
    }


def experiment_report_csv(results):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["split_seed", "stage", "kind", "pd_config", "default_geomean",
                "pd_geomean", "pi_geomean", "pred_geomean", "imp_default",
                "imp_pd"])
    for r in results:
        w.writerow([r.split_seed, r.stage.value, r.kind, str(r.pd_config),
                    f"{r.default_geomean:.6f}", f"{r.pd_geomean:.6f}",
                    f"{r.pi_geomean:.6f}", f"{r.pred_geomean:.6f}",
                    format_pct(r.imp_default), format_pct(r.imp_pd)])
    s = summarize(results)
    w.writerow([])
    w.writerow(["mean", "", "", "", f"{s['mean_default_geomean']:.6f}",
                f"{s['mean_pd_geomean']:.6f}", "",
                f"{s['mean_pred_geomean']:.6f}",
                format_pct(s["mean_imp_default"]),
                format_pct(s["mean_imp_pd"])])
    return buf.getvalue()


def experiment_report_text(results, label=""):
    s = summarize(results)
    lines = [
        f"{'Run':<22} {'Pred.':>10} {'PD Best':>10} {'Default':>10} "
        f"{'Imp.Def':>9} {'Imp.PD':>9}",
    ]
    for r in results:
        lines.append(
            f"{label + ' seed ' + str(r.split_seed):<22} "
            f"{r.pred_geomean:>10.4f} {r.pd_geomean:>10.4f} "
            f"{r.default_geomean:>10.4f} {format_pct(r.imp_default):>9} "
            f"{format_pct(r.imp_pd):>9}")
    lines.append(
        f"{'mean of improvements':<22} {s['mean_pred_geomean']:>10.4f} "
        f"{s['mean_pd_geomean']:>10.4f} {s['mean_default_geomean']:>10.4f} "
        f"{format_pct(s['mean_imp_default']):>9} "
        f"{format_pct(s['mean_imp_pd']):>9}")
    lines.append(
        f"{'improvement of means':<22} {'':>10} {'':>10} {'':>10} "
        f"{format_pct(s['imp_of_mean_default']):>9} "
        f"{format_pct(s['imp_of_mean_pd']):>9}")
    return "\n".join(lines) + "\n"


def suitability_rows(perf, shift=DEFAULT_SHIFT, name="dataset"):
    """One suitability row: instance count, PD/PI improvements, headroom."""
    default = ConfigId.default()
    instances = perf.instances()
    d = shifted_geomean(perf.times_for_config(default), shift)
    pd_cfg = pd_best(perf, shift)
    pd_g = shifted_geomean(perf.times_for_config(pd_cfg), shift)
    _, pi_g = pi_best(perf, shift)
    return {
        "dataset": name,
        "instance_count": len(instances),
        "pd_best_config": str(pd_cfg),
        "imp_pd_best": improvement(d, pd_g),
        "imp_pi_best": improvement(d, pi_g),
        "imp_upper_bound": improvement_upper_bound(perf, shift),
    }


def suitability_report_text(rows):
    lines = [f"{'Dataset':<16} {'Instance Cnt.':>13} {'PD Best (%)':>12} "
             f"{'PI Best (%)':>12} {'Imp. UB (%)':>12}"]
    for r in rows:
        lines.append(f"{r['dataset']:<16} {r['instance_count']:>13} "
                     f"{format_pct(r['imp_pd_best']):>12} "
                     f"{format_pct(r['imp_pi_best']):>12} "
                     f"{format_pct(r['imp_upper_bound']):>12}")
    return "\n".join(lines) + "\n"


def suitability_report_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["dataset", "instance_count", "pd_best_config", "imp_pd_best",
                "imp_pi_best", "imp_upper_bound"])
    for r in rows:
        w.writerow([r["dataset"], r["instance_count"], r["pd_best_config"],
                    format_pct(r["imp_pd_best"]), format_pct(r["imp_pi_best"]),
                    format_pct(r["imp_upper_bound"])])
    return buf.getvalue()
