"""Running experiment cells and whole sweeps.

Random streams
--------------
Every stream is a ``numpy.random.SeedSequence`` with the master seed as
entropy and a spawn key built from fixed integer codes:

* the *data* stream, keyed by ``(example, ir, rep)``, draws the training and
  test sets. All paradigms, resamplers and learners of one repetition see
  the same data, so comparisons between them are paired.
* the *fit* stream, keyed by ``(example, ir, rep, resampler, learner,
  pipeline)``, drives the NP class-0 split, the resampler and the learner
  seed. ``pipeline`` is 0 for the whole-training-set pipeline shared by CC
  and CS (they threshold the same fitted model) and 1 for the NP pipeline.

Results therefore depend only on the coordinates of a cell, never on the
order or process in which cells run.
"""

from __future__ import annotations

import struct
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .. import learners
from ..datagen import LabeledDataset, make_dataset
from ..learners.base import LearnerKind
from ..metrics import METRIC_NAMES, MetricsReport, full_report
from ..paradigms import ParadigmKind, ParadigmSpec, fixed_threshold, np_calibrate, np_split
from ..resample import ResampleKind, resample
from .config import ExperimentConfig
from .results import Failure, ResultRecord, aggregate

_DATA, _FIT = 1, 2
WHOLE, NP_PIPELINE = 0, 1
_RESAMPLER_CODE = {
    ResampleKind.Original: 0,
    ResampleKind.Under: 1,
    ResampleKind.Smote: 2,
    ResampleKind.Hybrid: 3,
}
_LEARNER_CODE = {
    LearnerKind.LogisticRegression: 0,
    LearnerKind.NeuralNet: 1,
    LearnerKind.RandomForest: 2,
    LearnerKind.Svm: 3,
    LearnerKind.GradientBoostedTrees: 4,
}


def _ir_code(ir: float) -> int:
    # the IEEE-754 bit pattern: injective over floats
    return struct.unpack("<Q", struct.pack("<d", float(ir)))[0]


def pipeline_of(paradigm) -> int:
    tag = paradigm.tag if isinstance(paradigm, ParadigmSpec) else ParadigmKind.parse(paradigm)
    return NP_PIPELINE if tag is ParadigmKind.NP else WHOLE


def data_seed(cfg: ExperimentConfig, ir: float, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.master_seed, spawn_key=(_DATA, cfg.example.value, _ir_code(ir), int(rep)))


def fit_seed(cfg: ExperimentConfig, ir: float, rep: int, resampler, learner, pipeline: int) -> np.random.SeedSequence:
    key = (
        _FIT,
        cfg.example.value,
        _ir_code(ir),
        int(rep),
        _RESAMPLER_CODE[ResampleKind.parse(resampler)],
        _LEARNER_CODE[LearnerKind.parse(learner)],
        int(pipeline),
    )
    return np.random.SeedSequence(cfg.master_seed, spawn_key=key)


def draw_sets(cfg: ExperimentConfig, ir: float, rep: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Training set (``n0_train`` minority points) and test set (``m0_test``) for one repetition."""
    rng = np.random.default_rng(data_seed(cfg, ir, rep))
    train = make_dataset(cfg.example, ir, cfg.n0_train, rng)
    test = make_dataset(cfg.example, ir, cfg.m0_test, rng)
    return train, test


@dataclass
class FittedPipeline:
    model: learners.ScoringModel
    heldout: np.ndarray | None  # class-0 calibration rows (NP only)
    train_size: tuple[int, int]
    warnings: list = field(default_factory=list)
    seconds: float = 0.0


def fit_pipeline(cfg, train: LabeledDataset, resampler, learner, pipeline: int, rng) -> FittedPipeline:
    """Resample and fit; for the NP pipeline first hold out part of class 0."""
    t0 = time.perf_counter()
    learner = LearnerKind.parse(learner)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        heldout = None
        fit_set = train
        if pipeline == NP_PIPELINE:
            fit_set, heldout = np_split(train, rng, cfg.np_split)
        data = resample(resampler, fit_set, cfg.smote, rng)
        hp = replace(cfg.params_for(learner), seed=int(rng.integers(2**63)))
        model = learners.fit(learner, data, hp)
    messages = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    return FittedPipeline(model, heldout, (data.n0, data.n1), messages, time.perf_counter() - t0)


def evaluate(cfg: ExperimentConfig, spec: ParadigmSpec, fitted: FittedPipeline, test: LabeledDataset, ir: float, test_scores=None) -> MetricsReport:
    """Threshold the fitted model under ``spec`` and score it on ``test``."""
    c0, c1 = cfg.costs(spec, ir)
    if spec.tag is ParadigmKind.NP:
        rule = np_calibrate(fitted.model, fitted.heldout, spec.alpha, spec.delta)
    elif spec.tag is ParadigmKind.CS:
        rule = fixed_threshold(spec.with_costs(c0, c1))
    else:
        rule = fixed_threshold(spec)
    scores = fitted.model.score(test.features) if test_scores is None else test_scores
    return full_report(scores, rule, test.labels, c0, c1)


def run_cell(cfg: ExperimentConfig, paradigm, resampler, learner, ir: float, rep: int) -> MetricsReport:
    """Metrics of one repetition of one cell. Errors propagate."""
    spec = paradigm if isinstance(paradigm, ParadigmSpec) else cfg.paradigm(paradigm)
    pipeline = pipeline_of(spec)
    train, test = draw_sets(cfg, ir, rep)
    rng = np.random.default_rng(fit_seed(cfg, ir, rep, resampler, learner, pipeline))
    fitted = fit_pipeline(cfg, train, resampler, learner, pipeline, rng)
    return evaluate(cfg, spec, fitted, test, ir)


@dataclass(frozen=True)
class Task:
    ir: float
    rep: int
    resampler: ResampleKind
    learner: LearnerKind


@dataclass
class TaskResult:
    task: Task
    reports: dict  # paradigm tag -> MetricsReport or Failure
    warnings: list
    seconds: dict  # pipeline -> fit seconds


def _failure(cfg, spec, task, exc) -> Failure:
    return Failure(
        cfg.example.name,
        spec.tag.value,
        task.resampler.value,
        task.learner.value,
        float(task.ir),
        task.rep,
        type(exc).__name__,
        str(exc),
    )


def run_task(cfg: ExperimentConfig, task: Task) -> TaskResult:
    """Every paradigm of one (ir, rep, resampler, learner) combination.

    A failing pipeline or evaluation is recorded as a ``Failure`` for the
    affected paradigms; the remaining ones still run.
    """
    train, test = draw_sets(cfg, task.ir, task.rep)
    reports, notes, seconds = {}, [], {}
    by_pipeline = {}
    for spec in cfg.paradigms:
        by_pipeline.setdefault(pipeline_of(spec), []).append(spec)
    for pipeline, specs in sorted(by_pipeline.items()):
        rng = np.random.default_rng(fit_seed(cfg, task.ir, task.rep, task.resampler, task.learner, pipeline))
        try:
            fitted = fit_pipeline(cfg, train, task.resampler, task.learner, pipeline, rng)
            scores = fitted.model.score(test.features)
        except Exception as exc:  # recorded, never dropped
            for spec in specs:
                reports[spec.tag.value] = _failure(cfg, spec, task, exc)
            continue
        notes.extend(fitted.warnings)
        seconds[pipeline] = fitted.seconds
        for spec in specs:
            try:
                reports[spec.tag.value] = evaluate(cfg, spec, fitted, test, task.ir, scores)
            except Exception as exc:
                reports[spec.tag.value] = _failure(cfg, spec, task, exc)
    return TaskResult(task, reports, notes, seconds)


def tasks_for(cfg: ExperimentConfig) -> list[Task]:
    # largest ratios first: they are the slowest, which helps load balancing
    return [
        Task(ir, rep, res, lrn)
        for ir in sorted(cfg.ir_list, reverse=True)
        for rep in range(cfg.repetitions)
        for res in cfg.resamplers
        for lrn in cfg.learners
    ]


@dataclass
class ExperimentRun:
    config: ExperimentConfig
    records: list
    failures: list
    warnings: dict  # message -> number of fits that raised it
    seconds: float

    @property
    def n_failures(self) -> int:
        return len(self.failures)


def aggregate_results(cfg: ExperimentConfig, results) -> tuple[list, list, dict]:
    """Fold task results into per-cell records; deterministic whatever the completion order."""
    by_key = {(r.task.ir, r.task.rep, r.task.resampler, r.task.learner): r for r in results}
    records, failures, notes = [], [], {}
    for r in results:
        for msg in r.warnings:
            notes[msg] = notes.get(msg, 0) + 1
    for spec in cfg.paradigms:
        tag = spec.tag.value
        for res in cfg.resamplers:
            for lrn in cfg.learners:
                for ir in cfg.ir_list:
                    per_metric = {m: [] for m in METRIC_NAMES}
                    for rep in range(cfg.repetitions):
                        out = by_key[(ir, rep, res, lrn)].reports[tag]
                        if isinstance(out, Failure):
                            failures.append(out)
                            continue
                        for m, v in out.as_dict().items():
                            if v is not None:
                                per_metric[m].append(v)
                    for m in METRIC_NAMES:
                        if per_metric[m]:
                            mean, se, n = aggregate(per_metric[m])
                            records.append(ResultRecord(cfg.example.name, tag, res.value, lrn.value, float(ir), m, mean, se, n))
    return records, failures, notes


def run_experiment(cfg: ExperimentConfig, threads: int = 1, progress=None) -> ExperimentRun:
    """Run every cell and repetition of ``cfg`` and aggregate.

    Parameters
    ----------
    threads : number of worker processes; 1 runs in-process.
    progress : optional callable ``progress(done, total)``.
    """
    t0 = time.perf_counter()
    tasks = tasks_for(cfg)
    work = partial(run_task, cfg)
    results = []
    if threads <= 1:
        for task in tasks:
            results.append(work(task))
            if progress:
                progress(len(results), len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for r in pool.map(work, tasks, chunksize=1):
                results.append(r)
                if progress:
                    progress(len(results), len(tasks))
    records, failures, notes = aggregate_results(cfg, results)
    return ExperimentRun(cfg, records, failures, notes, time.perf_counter() - t0)
