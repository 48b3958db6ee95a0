"""Experiment configuration: JSON loading, validation and defaults.

A config is a JSON object. Every field is optional; unknown fields are
rejected so that a typo cannot silently fall back to a default::

    {
      "example": 1,
      "paradigms": ["CC", "CS", {"tag": "NP", "alpha": 0.05, "delta": 0.5}],
      "resamplers": ["Original", "Under", "Smote", "Hybrid"],
      "learners": ["LogisticRegression", "RandomForest"],
      "ir_list": [1, 2, 4, 8],
      "n0_train": 300,
      "m0_test": 2000,
      "repetitions": 100,
      "smote": {"k_neighbors": 5, "gap_mode": "ScalarPerPoint"},
      "hyperparams": {"RandomForest": {"n_trees": 500}},
      "master_seed": 0,
      "cost_rule": "AutoIr",
      "np_split": 0.5
    }
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..datagen import ExampleId
from ..errors import ParseError, ValidationError
from ..learners.base import DEFAULT_PARAMS, LearnerKind
from ..paradigms import ParadigmKind, ParadigmSpec
from ..resample import GapMode, ResampleKind, SmoteParams

SEED_ENV = "IMBLAB_SEED"
DEFAULT_IRS = tuple(float(2**i) for i in range(8))
FAST_IRS = (1.0, 8.0, 128.0)


class CostRule(enum.Enum):
    AutoIr = "AutoIr"  # CS costs and the cost metric use C0 = IR, C1 = 1
    Explicit = "Explicit"  # every CS paradigm carries its own costs


def _default_paradigms():
    return (ParadigmSpec.cc(), ParadigmSpec.cs(), ParadigmSpec.np(0.05, 0.5))


@dataclass(frozen=True)
class ExperimentConfig:
    example: ExampleId = ExampleId.Example1
    paradigms: tuple = field(default_factory=_default_paradigms)
    resamplers: tuple = tuple(ResampleKind)
    learners: tuple = tuple(LearnerKind)
    ir_list: tuple = DEFAULT_IRS
    n0_train: int = 300
    m0_test: int = 2000
    repetitions: int = 100
    smote: SmoteParams = SmoteParams()
    hyperparams: dict = field(default_factory=lambda: {k: cls() for k, cls in DEFAULT_PARAMS.items()})
    master_seed: int = 0
    cost_rule: CostRule = CostRule.AutoIr
    np_split: float = 0.5

    def __post_init__(self):
        _validate(self)

    def params_for(self, learner: LearnerKind):
        return self.hyperparams.get(learner) or DEFAULT_PARAMS[learner]()

    def paradigm(self, tag) -> ParadigmSpec:
        tag = ParadigmKind.parse(tag)
        for p in self.paradigms:
            if p.tag is tag:
                return p
        raise KeyError(tag)

    def costs(self, spec: ParadigmSpec, ir: float) -> tuple[float, float]:
        """Cost weights ``(C0, C1)`` used for thresholding (CS) and for the cost metric."""
        if self.cost_rule is CostRule.AutoIr:
            return float(ir), 1.0
        if spec.tag is ParadigmKind.CS:
            return spec.cost0, spec.cost1
        cs = [p for p in self.paradigms if p.tag is ParadigmKind.CS]
        return (cs[0].cost0, cs[0].cost1) if cs else (1.0, 1.0)

    @property
    def n_cells(self) -> int:
        return len(self.paradigms) * len(self.resamplers) * len(self.learners) * len(self.ir_list)


def _validate(cfg: ExperimentConfig):
    for name in ("paradigms", "resamplers", "learners", "ir_list"):
        if len(getattr(cfg, name)) == 0:
            raise ValidationError(f"{name}: must not be empty")
    for name in ("resamplers", "learners", "ir_list"):
        values = getattr(cfg, name)
        if len(set(values)) != len(values):
            raise ValidationError(f"{name}: duplicate entries")
    tags = [p.tag for p in cfg.paradigms]
    if len(set(tags)) != len(tags):
        raise ValidationError("paradigms: each tag (CC, CS, NP) may appear at most once")
    for ir in cfg.ir_list:
        if not ir >= 1:
            raise ValidationError(f"ir_list: every ratio must be >= 1, got {ir}")
    for name in ("n0_train", "m0_test", "repetitions"):
        v = getattr(cfg, name)
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ValidationError(f"{name}: must be a positive integer, got {v!r}")
    if isinstance(cfg.master_seed, bool) or not isinstance(cfg.master_seed, int) or cfg.master_seed < 0:
        raise ValidationError(f"master_seed: must be a non-negative integer, got {cfg.master_seed!r}")
    if not 0 < cfg.np_split < 1:
        raise ValidationError(f"np_split: must lie in (0, 1), got {cfg.np_split}")
    for p in cfg.paradigms:
        if p.tag is not ParadigmKind.CS:
            continue
        if cfg.cost_rule is CostRule.Explicit and not p.has_costs:
            raise ValidationError("paradigms: cost_rule Explicit requires cost0 and cost1 on the CS paradigm")
        if cfg.cost_rule is CostRule.AutoIr and p.has_costs:
            raise ValidationError("paradigms: CS costs are given but cost_rule is AutoIr; set cost_rule to Explicit")


_FIELDS = {
    "example",
    "paradigms",
    "resamplers",
    "learners",
    "ir_list",
    "n0_train",
    "m0_test",
    "repetitions",
    "smote",
    "hyperparams",
    "master_seed",
    "cost_rule",
    "np_split",
}


def _field(name, fn, value):
    try:
        return fn(value)
    except ValidationError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ValidationError(f"{name}: {exc}") from None


def _paradigm(item) -> ParadigmSpec:
    if isinstance(item, str):
        return ParadigmSpec(ParadigmKind.parse(item))
    if not isinstance(item, dict):
        raise TypeError(f"expected a tag or an object, got {item!r}")
    unknown = set(item) - {"tag", "cost0", "cost1", "alpha", "delta"}
    if unknown:
        raise ValueError(f"unknown paradigm fields {sorted(unknown)}")
    if "tag" not in item:
        raise ValueError("paradigm object needs a 'tag'")
    return ParadigmSpec(**item)


def _smote(obj) -> SmoteParams:
    if not isinstance(obj, dict):
        raise TypeError("expected an object")
    unknown = set(obj) - {"k_neighbors", "gap_mode"}
    if unknown:
        raise ValueError(f"unknown fields {sorted(unknown)}")
    k = obj.get("k_neighbors", 5)
    if isinstance(k, bool) or not isinstance(k, int):
        raise TypeError(f"k_neighbors must be an integer, got {k!r}")
    return SmoteParams(k, GapMode(obj.get("gap_mode", "ScalarPerPoint")))


def _hyperparams(obj) -> dict:
    if not isinstance(obj, dict):
        raise TypeError("expected an object keyed by learner")
    out = {k: cls() for k, cls in DEFAULT_PARAMS.items()}
    for key, values in obj.items():
        kind = LearnerKind.parse(key)
        if not isinstance(values, dict):
            raise TypeError(f"{key}: expected an object")
        out[kind] = DEFAULT_PARAMS[kind].from_dict(values)
    return out


def _ratios(values) -> tuple:
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TypeError(f"ratios must be numbers, got {v!r}")
        out.append(float(v))
    return tuple(out)


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"expected an integer, got {v!r}")
    return v


def _list(v):
    if not isinstance(v, list):
        raise TypeError(f"expected a list, got {v!r}")
    return v


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(doc) - _FIELDS
    if unknown:
        raise ValidationError(f"unknown config fields: {sorted(unknown)}")
    kw = {}
    if "example" in doc:
        kw["example"] = _field("example", ExampleId.parse, doc["example"])
    if "paradigms" in doc:
        kw["paradigms"] = _field("paradigms", lambda v: tuple(_paradigm(p) for p in _list(v)), doc["paradigms"])
    if "resamplers" in doc:
        kw["resamplers"] = _field("resamplers", lambda v: tuple(ResampleKind.parse(r) for r in _list(v)), doc["resamplers"])
    if "learners" in doc:
        kw["learners"] = _field("learners", lambda v: tuple(LearnerKind.parse(r) for r in _list(v)), doc["learners"])
    if "ir_list" in doc:
        kw["ir_list"] = _field("ir_list", lambda v: _ratios(_list(v)), doc["ir_list"])
    for name in ("n0_train", "m0_test", "repetitions", "master_seed"):
        if name in doc:
            kw[name] = _field(name, _int, doc[name])
    if "smote" in doc:
        kw["smote"] = _field("smote", _smote, doc["smote"])
    if "hyperparams" in doc:
        kw["hyperparams"] = _field("hyperparams", _hyperparams, doc["hyperparams"])
    if "cost_rule" in doc:
        kw["cost_rule"] = _field("cost_rule", CostRule, doc["cost_rule"])
    if "np_split" in doc:
        kw["np_split"] = _field("np_split", float, doc["np_split"])
    return ExperimentConfig(**kw)


def load_config(source) -> ExperimentConfig:
    """Parse a config from a path or from JSON text.

    An empty (or whitespace-only) document yields all defaults.

    Raises
    ------
    ParseError
        Malformed JSON, with line and column.
    ValidationError
        A field has the wrong type or violates an invariant.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and os.path.isfile(source)):
        text = Path(source).read_text()
    else:
        text = str(source)
    if not text.strip():
        return ExperimentConfig()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc)


def fast_profile(cfg: ExperimentConfig) -> ExperimentConfig:
    """Reduced sweep for CI: 30 repetitions, 500 test minority points, IR in {1, 8, 128}."""
    return replace(cfg, repetitions=30, m0_test=500, ir_list=FAST_IRS)


def apply_seed_env(cfg: ExperimentConfig, environ=None) -> ExperimentConfig:
    """Override ``master_seed`` from the ``IMBLAB_SEED`` environment variable when set."""
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return cfg
    try:
        seed = int(raw)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    return replace(cfg, master_seed=seed)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """JSON-serialisable form of ``cfg`` (round-trips through ``config_from_dict``)."""

    def paradigm(p):
        d = {"tag": p.tag.value}
        if p.tag is ParadigmKind.CS and p.has_costs:
            d.update(cost0=p.cost0, cost1=p.cost1)
        if p.tag is ParadigmKind.NP:
            d.update(alpha=p.alpha, delta=p.delta)
        return d

    return {
        "example": cfg.example.value,
        "paradigms": [paradigm(p) for p in cfg.paradigms],
        "resamplers": [r.value for r in cfg.resamplers],
        "learners": [k.value for k in cfg.learners],
        "ir_list": list(cfg.ir_list),
        "n0_train": cfg.n0_train,
        "m0_test": cfg.m0_test,
        "repetitions": cfg.repetitions,
        "smote": {"k_neighbors": cfg.smote.k_neighbors, "gap_mode": cfg.smote.gap_mode.value},
        "hyperparams": {k.value: asdict(v) for k, v in cfg.hyperparams.items()},
        "master_seed": cfg.master_seed,
        "cost_rule": cfg.cost_rule.value,
        "np_split": cfg.np_split,
    }
