"""benloc: a benchmark toolkit for learning per-instance MIP optimizer
configurations."""

from .instance import (MipInstance, PermutationRecord, apply_permutation,
                       parse_mps, permute_instance, write_mps)
from .static_features import (CONSTRAINT_CLASSES, STATIC_FEATURE_NAMES,
                              StaticFeatureVector, classify_constraint,
                              extract_static)
from .logs import (DynamicFeatureVector, FeatureStage, SolveLog,
                   assemble_features, dynamic_features, extra_cost,
                   gap_features, parse_log)
from .graph import (BipartiteGraph, build_graph, canonical_signature,
                    export_graph, import_graph)
from .metrics import (ConfigId, PerfTable, improvement,
                      improvement_upper_bound, pd_best, pi_best,
                      shifted_geomean)
from .splits import (DatasetManifest, SplitAssignment, split_by_instance,
                     split_by_permutation, stratified_split)
from .learners import (LabeledExample, TrainedSelector, build_examples,
                       feature_importance, make_labels, predict_config,
                       random_search, train)
from .synth import OracleSpec, gen_indset, gen_setcover, oracle_times
from .dataset import BenchmarkData, build_oracle_dataset, load_dataset, write_dataset
from .report import evaluate_split, run_experiment, summarize

__version__ = "0.1.0"
