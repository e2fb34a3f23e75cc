"""Streaming concept-drift detection.

The core detector watches a sliding window of error values, split at a
precomputed optimal cut, and flags drift when a Welch t test or an
F test between the two parts exceeds its critical value. Five classic
baseline detectors, synthetic stream generators, a prequential Naive
Bayes pipeline, and an evaluation harness round the package out.

Quick start::

    from optwin import OptwinConfig, OptwinDetector

    detector = OptwinDetector(OptwinConfig(rho=0.5, w_max=1000))
    for error in error_stream:
        if detector.add_element(error).verdict.name == "DRIFT":
            ...  # retrain
"""

from .baselines import (
    AdwinDetector,
    DdmDetector,
    EcddDetector,
    EddmDetector,
    StepdDetector,
    calibrate_ecdd_limit,
)
from .detection import Detection, DriftDetail, Verdict
from .detector import (
    CutTable,
    OptwinConfig,
    OptwinDetector,
    build_cut_table,
    min_detectable_shift,
    optimal_split,
)
from .evaluation import (
    EvalReport,
    MatchConfig,
    aggregate,
    match_detections,
    write_detection_trace,
    write_report,
)
from .pipeline import NaiveBayesModel, PrequentialResult, prequential_run
from .streams import (
    Bernoulli,
    CsvFormatError,
    Gaussian,
    Gradual,
    GroundTruth,
    StaggerInstance,
    StreamSpec,
    Sudden,
    UniformChoice,
    generate,
    read_csv_stream,
    stagger_stream,
)

__version__ = "0.1.0"

__all__ = [
    "Verdict",
    "Detection",
    "DriftDetail",
    "OptwinConfig",
    "OptwinDetector",
    "CutTable",
    "build_cut_table",
    "optimal_split",
    "min_detectable_shift",
    "AdwinDetector",
    "DdmDetector",
    "EddmDetector",
    "StepdDetector",
    "EcddDetector",
    "calibrate_ecdd_limit",
    "Bernoulli",
    "Gaussian",
    "UniformChoice",
    "Sudden",
    "Gradual",
    "StreamSpec",
    "GroundTruth",
    "generate",
    "StaggerInstance",
    "stagger_stream",
    "CsvFormatError",
    "read_csv_stream",
    "NaiveBayesModel",
    "PrequentialResult",
    "prequential_run",
    "MatchConfig",
    "EvalReport",
    "match_detections",
    "aggregate",
    "write_report",
    "write_detection_trace",
    "__version__",
]
