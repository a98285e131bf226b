"""Schema, CSV ingestion, label normalization and the three-way split.

Datasets are stored column-wise: one float64 matrix for the continuous
columns and one object matrix of string tokens for the categorical columns,
in schema order within each kind. Labels are an int8 vector (0 benign,
1 malicious) or ``None`` for unlabeled data.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    ContractError,
    LabelError,
    ParseError,
    SizeError,
    StateError,
    UsageError,
)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"
_KINDS = (CONTINUOUS, CATEGORICAL)
_RESERVED = ("label", "negative", "positive", "labels")


class Label(enum.IntEnum):
    BENIGN = 0
    MALICIOUS = 1


@dataclass(frozen=True)
class Column:
    name: str
    kind: str


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]
    label_column: str = "label"
    negative_label: str = "normal"
    positive_label: str = "attack"
    # closed label vocabulary; None accepts any token
    label_vocabulary: frozenset[str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.columns:
            raise UsageError("schema needs at least one feature column")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise UsageError("duplicate column names in schema")
        if self.label_column in names:
            raise UsageError(f"label column {self.label_column!r} is also a feature column")
        for c in self.columns:
            if c.kind not in _KINDS:
                raise UsageError(f"column {c.name!r}: unknown kind {c.kind!r}")
        if self.label_vocabulary is not None:
            object.__setattr__(self, "label_vocabulary", frozenset(self.label_vocabulary))

    @property
    def feature_count(self) -> int:
        return len(self.columns)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def continuous_index(self) -> list[int]:
        return [i for i, c in enumerate(self.columns) if c.kind == CONTINUOUS]

    @property
    def categorical_index(self) -> list[int]:
        return [i for i, c in enumerate(self.columns) if c.kind == CATEGORICAL]

    def canonical_text(self) -> str:
        lines = [f"{c.name}:{c.kind}" for c in self.columns]
        lines.append(f"label:{self.label_column}")
        lines.append(f"negative:{self.negative_label}")
        lines.append(f"positive:{self.positive_label}")
        if self.label_vocabulary is not None:
            lines.append("labels:" + ",".join(sorted(self.label_vocabulary)))
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()

    @classmethod
    def parse(cls, text: str) -> "Schema":
        """Parse the line-oriented ``name:kind`` schema grammar (see README)."""
        columns = []
        opts: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition(":")
            key, value = key.strip(), value.strip()
            if not sep or not key or not value:
                raise ParseError(f"expected 'name:value', got {raw!r}", lineno)
            if key in _RESERVED:
                if key in opts:
                    raise ParseError(f"duplicate {key!r} entry", lineno)
                opts[key] = value
            elif value in _KINDS:
                columns.append(Column(key, value))
            else:
                raise ParseError(f"unknown column kind {value!r}", lineno)
        vocab = None
        if "labels" in opts:
            vocab = frozenset(t.strip() for t in opts["labels"].split(",") if t.strip())
        return cls(
            columns=tuple(columns),
            label_column=opts.get("label", "label"),
            negative_label=opts.get("negative", "normal"),
            positive_label=opts.get("positive", "attack"),
            label_vocabulary=vocab,
        )

    @classmethod
    def load(cls, path) -> "Schema":
        path = Path(path)
        if not path.is_file():
            raise UsageError(f"schema file not found: {path}")
        return cls.parse(path.read_text(encoding="utf-8"))


class FeatureVector(NamedTuple):
    values: tuple
    label: Label | None = None


@dataclass(frozen=True, eq=False)
class Dataset:
    schema: Schema
    continuous: np.ndarray  # (n, n_continuous) float64
    categorical: np.ndarray  # (n, n_categorical) object (str tokens)
    labels: np.ndarray | None = None  # (n,) int8
    _n: int = field(init=False, repr=False)

    def __post_init__(self):
        n_cont = len(self.schema.continuous_index)
        n_cat = len(self.schema.categorical_index)
        cont = np.asarray(self.continuous, dtype=np.float64)
        cat = np.asarray(self.categorical, dtype=object)
        cont = cont.reshape(-1, n_cont) if n_cont else cont.reshape(len(cont), 0)
        cat = cat.reshape(-1, n_cat) if n_cat else cat.reshape(len(cat), 0)
        n = cont.shape[0] if n_cont else cat.shape[0]
        if n_cont and n_cat and cat.shape[0] != n:
            raise ContractError("continuous and categorical blocks differ in row count")
        if not n_cont:
            cont = np.zeros((n, 0))
        if not n_cat:
            cat = np.empty((n, 0), dtype=object)
        cont.setflags(write=False)
        cat.setflags(write=False)
        object.__setattr__(self, "continuous", cont)
        object.__setattr__(self, "categorical", cat)
        object.__setattr__(self, "_n", n)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int8).reshape(-1)
            if lab.shape[0] != n:
                raise ContractError("label vector length differs from row count")
            if lab.size and (lab.min() < 0 or lab.max() > 1):
                raise ContractError("labels must be 0 (benign) or 1 (malicious)")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    def __len__(self):
        return self._n

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    def row(self, i: int) -> FeatureVector:
        cont = iter(self.continuous[i].tolist())
        cat = iter(self.categorical[i].tolist())
        values = tuple(next(cont) if c.kind == CONTINUOUS else next(cat) for c in self.schema.columns)
        label = Label(int(self.labels[i])) if self.labels is not None else None
        return FeatureVector(values, label)

    def rows(self) -> Iterable[FeatureVector]:
        for i in range(len(self)):
            yield self.row(i)

    def take(self, index) -> "Dataset":
        index = np.asarray(index, dtype=np.intp)
        labels = None if self.labels is None else self.labels[index]
        return Dataset(self.schema, self.continuous[index], self.categorical[index], labels)

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.schema, self.continuous, self.categorical, np.asarray(labels, dtype=np.int8))

    def without_labels(self) -> "Dataset":
        return Dataset(self.schema, self.continuous, self.categorical, None)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.schema != other.schema or len(self) != len(other) or self.labeled != other.labeled:
            return False
        if not np.array_equal(self.continuous, other.continuous):
            return False
        if not np.array_equal(self.categorical, other.categorical):
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)

    __hash__ = None

    @classmethod
    def from_rows(cls, schema: Schema, rows: Sequence[FeatureVector | Sequence]) -> "Dataset":
        """Build from FeatureVectors (or bare value sequences, giving an unlabeled set)."""
        ci, ki = schema.continuous_index, schema.categorical_index
        cont, cat, labels = [], [], []
        for r in rows:
            if isinstance(r, FeatureVector):
                values, label = r.values, r.label
            else:
                values, label = tuple(r), None
            if len(values) != schema.feature_count:
                raise ContractError(f"row has {len(values)} values, schema has {schema.feature_count}")
            cont.append([float(values[i]) for i in ci])
            cat.append([str(values[i]) for i in ki])
            labels.append(label)
        has = [lab is not None for lab in labels]
        if any(has) and not all(has):
            raise ContractError("either every row carries a label or none does")
        lab = np.array([int(x) for x in labels], dtype=np.int8) if labels and all(has) else None
        return cls(schema, np.array(cont, dtype=np.float64).reshape(len(rows), len(ci)),
                   np.array(cat, dtype=object).reshape(len(rows), len(ki)), lab)


def normalize_label(raw: str, schema: Schema) -> Label:
    """Binary collapse: the configured negative token is benign, everything else malicious."""
    token = raw.strip()
    if token.endswith("."):  # KDD-99 writes "normal."
        token = token[:-1]
    return Label.BENIGN if token == schema.negative_label else Label.MALICIOUS


def _label_token(token: str) -> str:
    token = token.strip()
    return token[:-1] if token.endswith(".") else token


def load_dataset(path, schema: Schema, has_header: bool = False, labeled: bool | None = None) -> Dataset:
    """Read a comma-separated file.

    ``labeled=None`` infers labeling from the arity of the first record
    (feature count + 1 means a trailing label column).
    """
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"data file not found: {path}")
    nf = schema.feature_count
    ci, ki = schema.continuous_index, schema.categorical_index
    cont_rows, cat_rows, labels = [], [], []
    vocab = schema.label_vocabulary
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if has_header and lineno == 1:
                continue
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if '"' in line or "'" in line:
                raise ParseError("quoted fields are not supported", lineno)
            fields = [f.strip() for f in line.split(",")]
            if labeled is None:
                if len(fields) == nf + 1:
                    labeled = True
                elif len(fields) == nf:
                    labeled = False
                else:
                    raise ParseError(f"expected {nf} or {nf + 1} fields, got {len(fields)}", lineno)
            want = nf + 1 if labeled else nf
            if len(fields) != want:
                raise ParseError(f"expected {want} fields, got {len(fields)}", lineno)
            crow = []
            for j in ci:
                try:
                    v = float(fields[j])
                except ValueError:
                    raise ParseError(
                        f"column {schema.columns[j].name!r}: non-numeric value {fields[j]!r}", lineno
                    ) from None
                if not math.isfinite(v):
                    raise ParseError(f"column {schema.columns[j].name!r}: non-finite value", lineno)
                crow.append(v)
            krow = []
            for j in ki:
                if not fields[j]:
                    raise ParseError(f"column {schema.columns[j].name!r}: empty token", lineno)
                krow.append(fields[j])
            cont_rows.append(crow)
            cat_rows.append(krow)
            if labeled:
                raw = fields[nf]
                if not raw:
                    raise ParseError("empty label", lineno)
                if vocab is not None and _label_token(raw) not in vocab:
                    raise LabelError(f"line {lineno}: unknown label {raw!r}")
                labels.append(int(normalize_label(raw, schema)))
    if not cont_rows:
        raise ParseError("no rows")
    n = len(cont_rows)
    return Dataset(
        schema,
        np.array(cont_rows, dtype=np.float64).reshape(n, len(ci)),
        np.array(cat_rows, dtype=object).reshape(n, len(ki)),
        np.array(labels, dtype=np.int8) if labeled else None,
    )


def format_number(x: float) -> str:
    """Shortest round-trip decimal; integral values without a trailing '.0'."""
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_dataset(ds: Dataset, path, header: bool = False) -> None:
    schema = ds.schema
    ci = {j: p for p, j in enumerate(schema.continuous_index)}
    ki = {j: p for p, j in enumerate(schema.categorical_index)}
    cont = ds.continuous.tolist()
    cat = ds.categorical.tolist()
    tokens = (schema.negative_label, schema.positive_label)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        if header:
            names = schema.names + ([schema.label_column] if ds.labeled else [])
            fh.write(",".join(names) + "\n")
        for i in range(len(ds)):
            fields = [
                format_number(cont[i][ci[j]]) if j in ci else cat[i][ki[j]]
                for j in range(schema.feature_count)
            ]
            if ds.labeled:
                fields.append(tokens[int(ds.labels[i])])
            fh.write(",".join(fields) + "\n")


@dataclass(frozen=True)
class SplitSpec:
    labeled_count: int
    unlabeled_count: int
    test_count: int
    seed: int = 0
    stratified: bool = False

    @property
    def total(self) -> int:
        return self.labeled_count + self.unlabeled_count + self.test_count


def split_dataset(source: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Shuffle with a seeded RNG and cut into (sensitive, public unlabeled, test).

    The unlabeled part has its labels dropped. With ``spec.stratified`` the
    shuffle interleaves classes so each part keeps the source class ratio
    (to within one row per cut).
    """
    if not source.labeled:
        raise StateError("split_dataset needs a labeled source")
    for name in ("labeled_count", "unlabeled_count", "test_count"):
        if getattr(spec, name) < 0:
            raise SizeError(f"{name} must be non-negative")
    if spec.total > len(source):
        raise SizeError(f"split needs {spec.total} rows, source has {len(source)}")
    order = shuffled_order(source.labels, spec.seed, spec.stratified)
    a = spec.labeled_count
    b = a + spec.unlabeled_count
    c = b + spec.test_count
    return (
        source.take(order[:a]),
        source.take(order[a:b]).without_labels(),
        source.take(order[b:c]),
    )


def shuffled_order(labels: np.ndarray, seed: int, stratified: bool = False) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = len(labels)
    if not stratified:
        return rng.permutation(n)
    # spread each class evenly over [0, 1) and merge by position
    keys = np.empty(n)
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        keys[idx] = (np.arange(len(idx)) + 0.5) / max(len(idx), 1)
    return np.lexsort((np.arange(n), keys))


def class_balance(ds: Dataset) -> tuple[float, float]:
    if not ds.labeled:
        raise StateError("class_balance needs a labeled dataset")
    if len(ds) == 0:
        raise StateError("class_balance of an empty dataset")
    mal = int(ds.labels.sum())
    malicious = mal / len(ds)
    return 1.0 - malicious, malicious


def file_checksum(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def kdd_schema() -> Schema:
    """The 41-column KDD Cup 99 / NSL-KDD profile bundled with the package."""
    from importlib.resources import files

    return Schema.parse(files("mimicids").joinpath("schemas/kdd41.schema").read_text(encoding="utf-8"))
