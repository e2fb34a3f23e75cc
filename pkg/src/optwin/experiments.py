"""Config-driven experiment runner: streams x detectors x seeds.

A JSON config names a set of experiments (each one stream definition)
and a set of detector configurations; every (experiment, detector,
seed) cell runs in isolation, detections are matched against ground
truth, and the per-cell reports are micro-averaged into one row per
(experiment, detector). Cells are independent, so they can execute in
a process pool; results are merged in sorted order so parallel and
serial runs produce identical reports.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Union

from .baselines import (
    AdwinDetector,
    DdmDetector,
    EcddDetector,
    EddmDetector,
    StepdDetector,
)
from .detection import Verdict
from .detector import CutTable, OptwinConfig, OptwinDetector, build_cut_table
from .evaluation import EvalReport, MatchConfig, aggregate, match_detections
from .pipeline import NaiveBayesModel, prequential_run
from .streams import (
    STAGGER_ATTRIBUTE_VALUES,
    Gradual,
    StreamSpec,
    generate,
    read_csv_stream,
    stagger_stream,
)

__all__ = [
    "ConfigError",
    "DetectorDef",
    "ExperimentDef",
    "Suite",
    "SuiteResult",
    "parse_config",
    "load_config",
    "run_suite",
]


class ConfigError(ValueError):
    """The experiment config is structurally or semantically invalid."""


@dataclass(frozen=True, slots=True)
class SyntheticStreamDef:
    spec: StreamSpec


@dataclass(frozen=True, slots=True)
class StaggerStreamDef:
    schedule: tuple[tuple[int, int], ...]
    seed: int


@dataclass(frozen=True, slots=True)
class CsvStreamDef:
    path: str
    column: int | str
    truth: tuple[int, ...]


StreamDef = Union[SyntheticStreamDef, StaggerStreamDef, CsvStreamDef]


@dataclass(frozen=True, slots=True)
class ExperimentDef:
    name: str
    stream: StreamDef
    match_window: int


@dataclass(slots=True)
class DetectorDef:
    name: str
    kind: str
    params: dict
    reset_policy: str = "hard"


@dataclass(slots=True)
class Suite:
    experiments: list[ExperimentDef]
    detectors: list[DetectorDef]
    seeds: int
    output: str


@dataclass(slots=True)
class SuiteResult:
    """Aggregated rows plus the seed-0 detections for plotting."""

    rows: list[tuple[str, str, EvalReport]]
    first_run_detections: dict[tuple[str, str], list[int]]
    truths: dict[str, list[int]]
    total_lengths: dict[str, int]


_BASELINE_KINDS = {
    "adwin": AdwinDetector,
    "ddm": DdmDetector,
    "eddm": EddmDetector,
    "stepd": StepdDetector,
    "ecdd": EcddDetector,
}


def _default_match_window(stream: StreamDef) -> int:
    """Base window of 1,000 steps, widened by the largest gradual ramp."""
    widest = 0
    if isinstance(stream, SyntheticStreamDef):
        for tr in stream.spec.transitions:
            if isinstance(tr, Gradual):
                widest = max(widest, tr.width)
    return 1000 + widest


def _parse_stream(doc: dict, where: str) -> StreamDef:
    kind = doc.get("kind")
    if kind == "synthetic":
        try:
            return SyntheticStreamDef(StreamSpec.from_dict(doc))
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    if kind == "stagger":
        try:
            schedule = tuple(
                (int(concept), int(length)) for concept, length in doc["schedule"]
            )
            return StaggerStreamDef(schedule, int(doc["seed"]))
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"{where}: bad stagger stream: {exc}") from exc
    if kind == "csv":
        try:
            truth = tuple(int(p) for p in doc.get("truth", []))
            return CsvStreamDef(str(doc["path"]), doc.get("column", 0), truth)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"{where}: bad csv stream: {exc}") from exc
    raise ConfigError(f"{where}: unknown stream kind {kind!r}")


def _validate_detector(d: DetectorDef) -> None:
    """Construct a probe (cheap for every kind) so bad params fail early."""
    try:
        if d.kind == "optwin":
            OptwinConfig(**d.params)
        else:
            _BASELINE_KINDS[d.kind](**d.params)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"detector {d.name!r}: {exc}") from exc


def parse_config(doc: dict) -> Suite:
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be an object, got {type(doc).__name__}")
    unknown = set(doc) - {"experiments", "detectors", "seeds", "output"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        seeds = int(doc.get("seeds", 1))
        output = str(doc["output"])
        raw_experiments = doc["experiments"]
        raw_detectors = doc["detectors"]
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from exc
    if seeds < 1:
        raise ConfigError(f"seeds must be at least 1, got {seeds}")
    if not raw_experiments:
        raise ConfigError("need at least one experiment")
    if not raw_detectors:
        raise ConfigError("need at least one detector")

    experiments = []
    for i, entry in enumerate(raw_experiments):
        name = entry.get("name")
        if not name or not isinstance(name, str):
            raise ConfigError(f"experiment #{i}: missing name")
        if "stream" not in entry:
            raise ConfigError(f"experiment {name!r}: missing stream")
        stream = _parse_stream(entry["stream"], f"experiment {name!r}")
        window = entry.get("match_window")
        if window is None:
            window = _default_match_window(stream)
        elif int(window) < 1:
            raise ConfigError(f"experiment {name!r}: match_window must be positive")
        experiments.append(ExperimentDef(name, stream, int(window)))
    if len({e.name for e in experiments}) != len(experiments):
        raise ConfigError("experiment names must be unique")

    detectors = []
    for i, entry in enumerate(raw_detectors):
        name = entry.get("name")
        if not name or not isinstance(name, str):
            raise ConfigError(f"detector #{i}: missing name")
        kind = entry.get("kind")
        if kind != "optwin" and kind not in _BASELINE_KINDS:
            raise ConfigError(
                f"detector {name!r}: unknown kind {kind!r}; expected one of "
                f"{['optwin', *sorted(_BASELINE_KINDS)]}"
            )
        reset_policy = entry.get("reset_policy", "hard")
        if reset_policy not in ("hard", "shadow"):
            raise ConfigError(
                f"detector {name!r}: reset_policy must be 'hard' or 'shadow'"
            )
        params = {
            k: v
            for k, v in entry.items()
            if k not in ("name", "kind", "reset_policy")
        }
        d = DetectorDef(str(name), kind, params, reset_policy)
        _validate_detector(d)
        detectors.append(d)
    if len({d.name for d in detectors}) != len(detectors):
        raise ConfigError("detector names must be unique")

    return Suite(experiments, detectors, seeds, output)


def load_config(path: str | os.PathLike[str]) -> Suite:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


# Cut tables are expensive; cache per geometry. Built in the parent
# before any pool spawns so forked workers inherit them.
_table_cache: dict[tuple[float, float, int, int], CutTable] = {}


def _table_for(config: OptwinConfig) -> CutTable:
    key = (config.delta, config.rho, config.w_min, config.w_max)
    table = _table_cache.get(key)
    if table is None:
        table = build_cut_table(config)
        _table_cache[key] = table
    return table


def warm_tables(suite: Suite) -> None:
    """Build every cut table the suite will need (idempotent)."""
    for d in suite.detectors:
        if d.kind == "optwin":
            _table_for(OptwinConfig(**d.params))


def _make_detector(d: DetectorDef):
    if d.kind == "optwin":
        config = OptwinConfig(**d.params)
        return OptwinDetector(config, _table_for(config))
    return _BASELINE_KINDS[d.kind](**d.params)


def _run_cell(
    suite: Suite, exp_idx: int, det_idx: int, run_idx: int, seed_base: int
) -> tuple[int, int, int, int, int, int, list[int], list[int]]:
    """One (experiment, detector, seed) execution.

    Returns match counts, delays, and the raw detection indices so the
    parent can both aggregate and plot without rerunning anything.
    """
    experiment = suite.experiments[exp_idx]
    detector_def = suite.detectors[det_idx]
    detector = _make_detector(detector_def)
    stream = experiment.stream
    offset = seed_base + run_idx

    if isinstance(stream, SyntheticStreamDef):
        spec = dataclasses.replace(stream.spec, seed=stream.spec.seed + offset)
        values, truth = generate(spec)
        detections = []
        for step, x in enumerate(values):
            if detector.add_element(x).verdict is Verdict.DRIFT:
                detections.append(step)
        truth_positions = list(truth.positions)
    elif isinstance(stream, StaggerStreamDef):
        instances, truth = stagger_stream(stream.schedule, stream.seed + offset)
        model = NaiveBayesModel(STAGGER_ATTRIBUTE_VALUES, (False, True))
        result = prequential_run(
            instances, model, detector, reset_policy=detector_def.reset_policy
        )
        detections = result.drifts
        truth_positions = list(truth.positions)
    else:
        detections = []
        for step, x in enumerate(read_csv_stream(stream.path, stream.column)):
            if detector.add_element(x).verdict is Verdict.DRIFT:
                detections.append(step)
        truth_positions = list(stream.truth)

    report = match_detections(
        truth_positions, detections, MatchConfig(experiment.match_window)
    )
    return (
        exp_idx,
        det_idx,
        run_idx,
        report.tp,
        report.fp,
        report.fn,
        report.delays,
        detections,
    )


def _cell_task(args: tuple) -> tuple:
    suite, exp_idx, det_idx, run_idx, seed_base = args
    return _run_cell(suite, exp_idx, det_idx, run_idx, seed_base)


def _stream_length(stream: StreamDef) -> int:
    if isinstance(stream, SyntheticStreamDef):
        return stream.spec.total_length
    if isinstance(stream, StaggerStreamDef):
        return sum(length for _, length in stream.schedule)
    return sum(1 for _ in read_csv_stream(stream.path, stream.column))


def _truth_positions(stream: StreamDef) -> list[int]:
    if isinstance(stream, SyntheticStreamDef):
        positions = []
        total = 0
        for _, length in stream.spec.segments[:-1]:
            total += length
            positions.append(total)
        return positions
    if isinstance(stream, StaggerStreamDef):
        positions = []
        total = 0
        for _, length in stream.schedule[:-1]:
            total += length
            positions.append(total)
        return positions
    return list(stream.truth)


def run_suite(suite: Suite, jobs: int = 1, seed_base: int = 0) -> SuiteResult:
    """Execute all cells and micro-average into one row per (experiment, detector).

    CSV streams are deterministic inputs, so they run once instead of
    once per seed. With jobs > 1 the cells run in a process pool; the
    merge order is fixed by (experiment, detector, seed), so the report
    content does not depend on jobs.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    warm_tables(suite)
    tasks = []
    for exp_idx, experiment in enumerate(suite.experiments):
        runs = 1 if isinstance(experiment.stream, CsvStreamDef) else suite.seeds
        for det_idx in range(len(suite.detectors)):
            for run_idx in range(runs):
                tasks.append((suite, exp_idx, det_idx, run_idx, seed_base))

    if jobs == 1 or len(tasks) == 1:
        outcomes = [_cell_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, len(tasks) // (jobs * 4))
            outcomes = list(pool.map(_cell_task, tasks, chunksize=chunk))

    outcomes.sort(key=lambda o: (o[0], o[1], o[2]))
    per_cell: dict[tuple[int, int], list[EvalReport]] = {}
    first_run: dict[tuple[str, str], list[int]] = {}
    for exp_idx, det_idx, run_idx, tp, fp, fn, delays, detections in outcomes:
        per_cell.setdefault((exp_idx, det_idx), []).append(
            EvalReport(tp=tp, fp=fp, fn=fn, delays=list(delays))
        )
        if run_idx == 0:
            key = (suite.experiments[exp_idx].name, suite.detectors[det_idx].name)
            first_run[key] = list(detections)

    rows = []
    for (exp_idx, det_idx), reports in sorted(per_cell.items()):
        rows.append(
            (
                suite.experiments[exp_idx].name,
                suite.detectors[det_idx].name,
                aggregate(reports),
            )
        )
    truths = {e.name: _truth_positions(e.stream) for e in suite.experiments}
    lengths = {e.name: _stream_length(e.stream) for e in suite.experiments}
    return SuiteResult(rows, first_run, truths, lengths)
