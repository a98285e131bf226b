"""Classifier specifications (family + hyperparameters + seed)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from ..errors import ConfigError

FAMILIES = ("dt", "rf", "svm", "nb")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 30
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    ig_epsilon: float = 1e-12

    def validate(self):
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")
        if self.ig_epsilon < 0:
            raise ConfigError("ig_epsilon must be >= 0")


@dataclass(frozen=True)
class ForestParams(TreeParams):
    tree_count: int = 100
    # None means ceil(sqrt(feature count))
    feature_subsample: int | None = None
    bootstrap: bool = True

    def validate(self):
        super().validate()
        if self.tree_count < 1:
            raise ConfigError("tree_count must be >= 1")
        if self.feature_subsample is not None and self.feature_subsample < 1:
            raise ConfigError("feature_subsample must be >= 1")

    def features_per_split(self, feature_count: int) -> int:
        if self.feature_subsample is None:
            return math.ceil(math.sqrt(feature_count))
        return min(self.feature_subsample, feature_count)


@dataclass(frozen=True)
class BayesParams:
    alpha: float = 1.0
    variance_floor: float = 1e-9

    def validate(self):
        if self.alpha <= 0:
            raise ConfigError("alpha must be > 0")
        if self.variance_floor <= 0:
            raise ConfigError("variance_floor must be > 0")


@dataclass(frozen=True)
class SvmParams:
    lam: float = 1e-4
    epochs: int = 50
    batch_size: int = 64

    def validate(self):
        if self.lam <= 0:
            raise ConfigError("lam (regularization) must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")


PARAMS = {"dt": TreeParams, "rf": ForestParams, "svm": SvmParams, "nb": BayesParams}


@dataclass(frozen=True)
class ClassifierSpec:
    family: str
    params: object = None
    seed: int = 0

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in FAMILIES:
            raise ConfigError(f"unknown classifier family {self.family!r} (choose from {', '.join(FAMILIES)})")
        object.__setattr__(self, "family", fam)
        if self.params is None:
            object.__setattr__(self, "params", PARAMS[fam]())
        if not isinstance(self.params, PARAMS[fam]):
            raise ConfigError(f"{fam} expects {PARAMS[fam].__name__}")
        self.params.validate()
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def name(self) -> str:
        return self.family

    def params_dict(self) -> dict:
        return asdict(self.params)

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return replace(self, seed=seed)

    @classmethod
    def from_dict(cls, family: str, params: dict, seed: int = 0) -> "ClassifierSpec":
        kind = PARAMS.get(family)
        if kind is None:
            raise ConfigError(f"unknown classifier family {family!r}")
        known = {f.name for f in fields(kind)}
        extra = set(params) - known
        if extra:
            raise ConfigError(f"{family}: unknown hyperparameters {sorted(extra)}")
        return cls(family, kind(**params), seed)


def default_roster(seed: int = 0) -> list[ClassifierSpec]:
    return [ClassifierSpec(f, seed=seed) for f in FAMILIES]


def roster_from_names(names, seed: int = 0, overrides: dict | None = None) -> list[ClassifierSpec]:
    """Comma list or sequence of family names; ``overrides`` maps family -> hyperparameter dict."""
    if isinstance(names, str):
        names = [n for n in (x.strip() for x in names.split(",")) if n]
    if not names:
        raise ConfigError("empty classifier roster")
    overrides = overrides or {}
    return [ClassifierSpec.from_dict(n.lower(), overrides.get(n.lower(), {}), seed) for n in names]

