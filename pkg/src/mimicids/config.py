"""Pipeline configuration and its line-oriented ``namespace.key: value`` file format.

Recognised keys::

    pipeline.seed, pipeline.release_threshold
    cv.k, cv.seed, cv.stratified
    teacher.roster, student.roster          (comma lists of dt, rf, svm, nb)
    dt.<param>, rf.<param>, svm.<param>, nb.<param>   (hyperparameter overrides)

``#`` starts a comment. Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .classifiers import FAMILIES, ClassifierSpec, roster_from_names
from .classifiers.spec import PARAMS
from .errors import ConfigError, UsageError
from .eval import CvConfig


@dataclass(frozen=True)
class PipelineConfig:
    teacher_roster: tuple[ClassifierSpec, ...]
    student_roster: tuple[ClassifierSpec, ...]
    cv: CvConfig = CvConfig()
    release_threshold: float = 0.01
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "teacher_roster", tuple(self.teacher_roster))
        object.__setattr__(self, "student_roster", tuple(self.student_roster))
        if not self.teacher_roster or not self.student_roster:
            raise ConfigError("teacher and student rosters must be non-empty")
        if not self.release_threshold >= 0:
            raise ConfigError("release_threshold must be >= 0")

    @classmethod
    def default(cls, seed: int = 0, **kw) -> "PipelineConfig":
        return build_config({}, seed_override=seed, **kw)

    def snapshot(self) -> dict:
        def roster(r):
            return [{"family": s.family, "hyperparams": s.params_dict(), "seed": s.seed} for s in r]

        return {
            "seed": self.seed,
            "release_threshold": self.release_threshold,
            "cv": dataclasses.asdict(self.cv),
            "teacher_roster": roster(self.teacher_roster),
            "student_roster": roster(self.student_roster),
        }


def _coerce(raw: str, annotation, key: str):
    ann = str(annotation)
    raw = raw.strip()
    try:
        if "bool" in ann:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if "None" in ann and raw.lower() in ("none", "auto", ""):
            return None
        if "int" in ann:
            return int(raw)
        if "float" in ann:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {ann}") from None
    return raw


def parse_config_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or "." not in key:
            raise ConfigError(f"config line {lineno}: expected 'namespace.key: value', got {raw!r}")
        if key in entries:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        entries[key] = value.strip()
    return entries


def load_config_file(path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"))


def build_config(entries: dict[str, str], seed_override: int | None = None,
                 teacher_roster=None, student_roster=None, cv_k: int | None = None,
                 release_threshold: float | None = None) -> PipelineConfig:
    """Combine file entries with explicit overrides (overrides win)."""
    overrides: dict[str, dict] = {f: {} for f in FAMILIES}
    seed = 0
    threshold = 0.01
    cv = {"k": 10, "seed": None, "stratified": True}
    rosters = {"teacher": ",".join(FAMILIES), "student": ",".join(FAMILIES)}
    for key, value in entries.items():
        ns, name = key.split(".", 1)
        if ns == "pipeline" and name == "seed":
            seed = _coerce(value, int, key)
        elif ns == "pipeline" and name == "release_threshold":
            threshold = _coerce(value, float, key)
        elif ns == "cv" and name in cv:
            cv[name] = _coerce(value, bool if name == "stratified" else int, key)
        elif ns in rosters and name == "roster":
            rosters[ns] = value
        elif ns in overrides:
            kinds = {f.name: f.type for f in dataclasses.fields(PARAMS[ns])}
            if name not in kinds:
                raise ConfigError(f"unknown hyperparameter {key!r}")
            overrides[ns][name] = _coerce(value, kinds[name], key)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if seed_override is not None:
        seed = seed_override
    if release_threshold is not None:
        threshold = release_threshold
    if cv_k is not None:
        cv["k"] = cv_k
    if cv["seed"] is None:
        cv["seed"] = seed
    teacher = teacher_roster if teacher_roster is not None else rosters["teacher"]
    student = student_roster if student_roster is not None else rosters["student"]
    return PipelineConfig(
        teacher_roster=roster_from_names(teacher, seed, overrides),
        student_roster=roster_from_names(student, seed, overrides),
        cv=CvConfig(**cv),
        release_threshold=threshold,
        seed=seed,
    )

