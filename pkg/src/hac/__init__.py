"""Streaming detection of dense regions in metric spaces.

The sketch keeps a fixed number of reservoir samples that hop between stream
points and count arrivals in exponentially spaced radius buckets; queries
return representatives of every region holding at least a requested fraction
of the (optionally time-decayed) stream weight.
"""

from .baselines import EvalReport, eval_top_n, maximal_independent_set, random_sample
from .data import Dataset, Point, load_points, save_points
from .errors import ContractViolation, FormatError, HacError
from .metric import (
    ChebyshevComposite,
    CosineAngular,
    Euclidean,
    MetricSpec,
    composite_max_distance,
    distance,
    distances,
)
from .oracle import coverage_stats, is_dense, r_f, verify_output
from .postprocess import DedupPolicy, dedup_theorem, dedup_threshold
from .sketch import (
    HacConfig,
    Output,
    Sketch,
    bucket_index,
    hop_probability,
    load_snapshot,
    merge_outputs,
    save_snapshot,
)
from .tracker import (
    InteractionRecord,
    TrackerConfig,
    attribute,
    query_top_human,
    run_tracker,
    snapshot_diff,
)

__version__ = "0.1.0"

__all__ = [
    "ChebyshevComposite",
    "ContractViolation",
    "CosineAngular",
    "Dataset",
    "DedupPolicy",
    "Euclidean",
    "EvalReport",
    "FormatError",
    "HacConfig",
    "HacError",
    "InteractionRecord",
    "MetricSpec",
    "Output",
    "Point",
    "Sketch",
    "TrackerConfig",
    "attribute",
    "bucket_index",
    "composite_max_distance",
    "coverage_stats",
    "dedup_theorem",
    "dedup_threshold",
    "distance",
    "distances",
    "eval_top_n",
    "hop_probability",
    "is_dense",
    "load_points",
    "load_snapshot",
    "maximal_independent_set",
    "merge_outputs",
    "query_top_human",
    "r_f",
    "random_sample",
    "run_tracker",
    "save_points",
    "save_snapshot",
    "snapshot_diff",
    "verify_output",
]
