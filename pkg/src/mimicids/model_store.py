"""Canonical JSON model files.

Layout (UTF-8, keys sorted, floats in shortest round-trip form)::

    {"format_version": 1,
     "metadata": {"family", "hyperparams", "seed", "role", "created_at",
                  "train_rows", "schema", "schema_fingerprint"},
     "body": {"vocabulary": {column: [tokens]}, ...family payload...}}

Trees are flat node lists in pre-order; node 0 is the root. A file holds
aggregate statistics only (leaf counts and fractions, class-conditional
means and variances, token frequencies, hyperplane weights), never rows.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .classifiers import (
    ClassifierSpec,
    DecisionTreeModel,
    NaiveBayesModel,
    RandomForestModel,
    SvmModel,
    TrainedModel,
)
from .classifiers.encoding import CategoricalEncoder
from .classifiers.tree import TreeArrays
from .data import CATEGORICAL, Schema
from .errors import IntegrityError, StorageError, VersionError

FORMAT_VERSION = 1
_CLASSES = ("benign", "malicious")


def canonical_json(obj, indent: int | None = None) -> str:
    seps = (",", ":") if indent is None else (",", ": ")
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, allow_nan=False,
                      separators=seps, indent=indent) + "\n"


def write_json(obj, path, indent: int | None = None) -> None:
    try:
        Path(path).write_text(canonical_json(obj, indent), encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


# -- encoding ---------------------------------------------------------------

def _tree_to_json(t: TreeArrays, schema: Schema, encoder: CategoricalEncoder) -> list:
    cat_pos = {j: p for p, j in enumerate(schema.categorical_index)}
    nodes = []
    for i in range(t.node_count):
        j = int(t.feature[i])
        if j < 0:
            nodes.append({"sample_count": int(t.count[i]), "malicious_fraction": float(t.value[i])})
            continue
        name = schema.columns[j].name
        if t.br_len[i] > 0:
            vocab = encoder.vocab[cat_pos[j]]
            a, k = int(t.br_start[i]), int(t.br_len[i])
            branches = {vocab[int(c)]: int(ch) for c, ch in zip(t.br_code[a:a + k], t.br_child[a:a + k])}
            nodes.append({"column": name, "branches": branches, "fallback": int(t.fallback[i])})
        else:
            nodes.append({"column": name, "threshold": float(t.threshold[i]),
                          "left": int(t.left[i]), "right": int(t.right[i])})
    return nodes


def _body(model: TrainedModel) -> dict:
    schema, enc = model.schema, model.encoder
    cat_names = [schema.columns[j].name for j in schema.categorical_index]
    cont_names = [schema.columns[j].name for j in schema.continuous_index]
    body = {"vocabulary": {n: list(v) for n, v in zip(cat_names, enc.vocab)}}
    b = model.body
    if model.family == "dt":
        body["nodes"] = _tree_to_json(b.tree, schema, enc)
    elif model.family == "rf":
        body["feature_subsample"] = b.feature_subsample
        body["tree_count"] = b.tree_count
        body["trees"] = [_tree_to_json(t, schema, enc) for t in b.trees]
    elif model.family == "nb":
        body["priors"] = {c: float(b.priors[k]) for k, c in enumerate(_CLASSES)}
        body["continuous"] = {
            n: {c: {"mean": float(b.means[k, p]), "variance": float(b.variances[k, p])}
                for k, c in enumerate(_CLASSES)}
            for p, n in enumerate(cont_names)
        }
        body["categorical"] = {
            n: {c: {"tokens": dict(zip(enc.vocab[p], b.categorical[p][k, :-1].tolist())),
                    "unseen": float(b.categorical[p][k, -1])}
                for k, c in enumerate(_CLASSES)}
            for p, n in enumerate(cat_names)
        }
    else:
        body["bias"] = float(b.bias)
        body["standardization"] = {
            n: {"mean": float(b.mean[p]), "std": float(b.std[p])} for p, n in enumerate(cont_names)
        }
        body["weights"] = {
            "continuous": {n: float(b.weights[p]) for p, n in enumerate(cont_names)},
            "categorical": {
                n: dict(zip(enc.vocab[p], b.weights[b.offsets[p]:b.offsets[p] + b.vocab_sizes[p]].tolist()))
                for p, n in enumerate(cat_names)
            },
        }
    return body


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "metadata": {
            "family": model.family,
            "hyperparams": model.spec.params_dict(),
            "seed": model.spec.seed,
            "role": model.role,
            "created_at": model.created_at,
            "train_rows": model.train_rows,
            "schema": model.schema.canonical_text(),
            "schema_fingerprint": model.schema_fingerprint,
        },
        "body": _body(model),
    }


def save_model(model: TrainedModel, path) -> None:
    write_json(model_to_dict(model), path)


# -- decoding ---------------------------------------------------------------

def _fail(msg):
    raise IntegrityError(msg)


def _tree_from_json(nodes, schema: Schema, encoder: CategoricalEncoder, params) -> TreeArrays:
    if not isinstance(nodes, list) or not nodes:
        _fail("tree has no nodes")
    index = {c.name: j for j, c in enumerate(schema.columns)}
    cat_pos = {j: p for p, j in enumerate(schema.categorical_index)}
    n = len(nodes)
    feature = np.full(n, -1, np.int64)
    threshold = np.zeros(n)
    left = np.full(n, -1, np.int64)
    right = np.full(n, -1, np.int64)
    br_start = np.zeros(n, np.int64)
    br_len = np.zeros(n, np.int64)
    fallback = np.full(n, -1, np.int64)
    value = np.zeros(n)
    count = np.zeros(n, np.int64)
    br_code, br_child = [], []
    parent_seen = np.zeros(n, np.int64)
    for i, node in enumerate(nodes):
        if "malicious_fraction" in node:
            v, c = node["malicious_fraction"], node["sample_count"]
            if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0):
                _fail(f"node {i}: malicious_fraction outside [0, 1]")
            if not isinstance(c, int) or c < params.min_samples_leaf:
                _fail(f"node {i}: sample_count below min_samples_leaf")
            value[i], count[i] = v, c
            continue
        name = node.get("column")
        if name not in index:
            _fail(f"node {i}: unknown column {name!r}")
        j = index[name]
        feature[i] = j
        if "branches" in node:
            if schema.columns[j].kind != CATEGORICAL:
                _fail(f"node {i}: multiway split on a continuous column")
            lookup = encoder._lookup[cat_pos[j]]
            items = sorted(node["branches"].items(), key=lambda kv: lookup.get(kv[0], -1))
            if len(items) < 2:
                _fail(f"node {i}: categorical split with fewer than two branches")
            br_start[i] = len(br_code)
            br_len[i] = len(items)
            for tok, ch in items:
                if tok not in lookup:
                    _fail(f"node {i}: branch token {tok!r} missing from vocabulary")
                br_code.append(lookup[tok])
                br_child.append(ch)
            fallback[i] = node["fallback"]
            kids = [ch for _, ch in items]
            if fallback[i] not in kids:
                _fail(f"node {i}: fallback is not one of the branches")
        else:
            if schema.columns[j].kind == CATEGORICAL:
                _fail(f"node {i}: threshold split on a categorical column")
            threshold[i] = node["threshold"]
            left[i], right[i] = node["left"], node["right"]
            kids = [left[i], right[i]]
        for ch in kids:
            if not isinstance(ch, (int, np.integer)) or not i < ch < n:
                _fail(f"node {i}: child index {ch} breaks pre-order")
            parent_seen[ch] += 1
    if parent_seen[0] != 0 or (parent_seen[1:] != 1).any():
        _fail("tree nodes do not form a single tree")
    t = TreeArrays(feature, threshold, left, right, br_start, br_len,
                   np.array(br_code, np.int64), np.array(br_child, np.int64), fallback, value, count)
    if t.depth() > params.max_depth:
        _fail("tree deeper than max_depth")
    return t


def model_from_dict(doc: dict) -> TrainedModel:
    if not isinstance(doc, dict) or "format_version" not in doc:
        _fail("not a model file")
    version = doc["format_version"]
    if not isinstance(version, int) or version > FORMAT_VERSION or version < 1:
        raise VersionError(f"unsupported model format_version {version!r} (this build reads {FORMAT_VERSION})")
    try:
        meta, body = doc["metadata"], doc["body"]
        schema = Schema.parse(meta["schema"])
        if schema.fingerprint() != meta["schema_fingerprint"]:
            _fail("schema fingerprint does not match the embedded schema")
        spec = ClassifierSpec.from_dict(meta["family"], meta["hyperparams"], meta["seed"])
        cat_names = [schema.columns[j].name for j in schema.categorical_index]
        cont_names = [schema.columns[j].name for j in schema.continuous_index]
        vocab = body["vocabulary"]
        if sorted(vocab) != sorted(cat_names):
            _fail("vocabulary columns differ from the schema's categorical columns")
        encoder = CategoricalEncoder([vocab[n] for n in cat_names])
        for v in encoder.vocab:
            if v != sorted(set(v)):
                _fail("vocabulary must be sorted and unique")
        fam = spec.family
        if fam == "dt":
            model_body = DecisionTreeModel(_tree_from_json(body["nodes"], schema, encoder, spec.params))
        elif fam == "rf":
            trees = [_tree_from_json(t, schema, encoder, spec.params) for t in body["trees"]]
            if not trees or len(trees) != body["tree_count"]:
                _fail("forest tree_count does not match its trees")
            model_body = RandomForestModel(trees, int(body["feature_subsample"]), int(body["tree_count"]))
        elif fam == "nb":
            model_body = _nb_from_json(body, cont_names, cat_names, encoder, spec.params)
        else:
            model_body = _svm_from_json(body, cont_names, cat_names, encoder)
        return TrainedModel(spec, schema, encoder, model_body, int(meta["train_rows"]),
                            meta.get("created_at"), meta.get("role"))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise IntegrityError(f"malformed model file: {exc!r}") from exc


def _nb_from_json(body, cont_names, cat_names, encoder, params) -> NaiveBayesModel:
    priors = np.array([body["priors"][c] for c in _CLASSES], dtype=np.float64)
    if (priors <= 0).any() or abs(priors.sum() - 1.0) > 1e-12:
        _fail("naive Bayes priors must be positive and sum to 1")
    cont = body["continuous"]
    if sorted(cont) != sorted(cont_names):
        _fail("naive Bayes continuous columns differ from the schema")
    means = np.array([[cont[n][c]["mean"] for n in cont_names] for c in _CLASSES]).reshape(2, len(cont_names))
    var = np.array([[cont[n][c]["variance"] for n in cont_names] for c in _CLASSES]).reshape(2, len(cont_names))
    if (var < params.variance_floor).any():
        _fail("naive Bayes variance below the floor")
    tables = []
    for p, n in enumerate(cat_names):
        table = np.empty((2, len(encoder.vocab[p]) + 1))
        for k, c in enumerate(_CLASSES):
            entry = body["categorical"][n][c]
            if sorted(entry["tokens"]) != encoder.vocab[p]:
                _fail(f"naive Bayes tokens for {n!r} differ from the vocabulary")
            table[k, :-1] = [entry["tokens"][t] for t in encoder.vocab[p]]
            table[k, -1] = entry["unseen"]
            if (table[k] <= 0).any() or abs(table[k].sum() - 1.0) > 1e-9:
                _fail(f"naive Bayes likelihoods for {n!r} do not sum to 1")
        tables.append(table)
    return NaiveBayesModel(priors, means, var, tables)


def _svm_from_json(body, cont_names, cat_names, encoder) -> SvmModel:
    st = body["standardization"]
    mean = np.array([st[n]["mean"] for n in cont_names], dtype=np.float64)
    std = np.array([st[n]["std"] for n in cont_names], dtype=np.float64)
    if (std < 1e-12).any():
        _fail("svm standard deviation below 1e-12")
    wc = body["weights"]["continuous"]
    wk = body["weights"]["categorical"]
    parts = [np.array([wc[n] for n in cont_names], dtype=np.float64)]
    offsets, pos = [], len(cont_names)
    for p, n in enumerate(cat_names):
        if sorted(wk[n]) != encoder.vocab[p]:
            _fail(f"svm weights for {n!r} differ from the vocabulary")
        parts.append(np.array([wk[n][t] for t in encoder.vocab[p]], dtype=np.float64))
        offsets.append(pos)
        pos += len(encoder.vocab[p])
    weights = np.concatenate(parts) if parts else np.zeros(0)
    bias = float(body["bias"])
    if not (np.isfinite(weights).all() and math.isfinite(bias)):
        _fail("svm weights must be finite")
    return SvmModel(weights, bias, mean, std, offsets, encoder.sizes())


def load_model(path) -> TrainedModel:
    path = Path(path)
    if not path.is_file():
        raise StorageError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise IntegrityError(f"{path}: not valid JSON ({exc})") from exc
    return model_from_dict(doc)
