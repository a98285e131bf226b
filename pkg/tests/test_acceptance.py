"""Acceptance criteria 1-8, each at its stated tolerance.

Every test prints one ``CRITERION n: PASS|FAIL ...`` line; the same lines are
repeated in the terminal summary (see conftest).

Criteria 5 and 6 need a real KDD-style benchmark file (41 features plus a
label column, at least 136,073 rows). Point ``MIMIC_IDS_KDD`` at it, e.g. the
output of ``scripts/prepare_nsl_kdd.py``. Without it those two criteria fail
with a BLOCKED reason; they are never satisfied with synthetic data.
"""

from __future__ import annotations

import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from mimicids.classifiers import ClassifierSpec, ForestParams, entropy, information_gain, train
from mimicids.cli import main as cli_main
from mimicids.data import Dataset, FeatureVector, Label, Schema, SplitSpec, file_checksum, kdd_schema, load_dataset, split_dataset
from mimicids.eval import ConfusionMatrix, auc_rank, metrics, roc_auc, roc_points, trapezoid_area
from mimicids.model_store import load_model, save_model
from mimicids.pipeline import annotate
from mimicids.synthetic import synthetic_kdd

from conftest import TENNIS_ROWS, TENNIS_SCHEMA_TEXT, clusters, xor

RESULTS: list[str] = []
DATA_ENV = "MIMIC_IDS_KDD"
BENCH_SPLIT = (57_900, 57_900, 20_173)


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# -- 1 ---------------------------------------------------------------------------

def test_criterion_1_metric_oracle():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst, mismatches = 0.0, 0
    for _ in range(150):
        n = int(rng.integers(1, 400))
        truth = rng.integers(0, 2, n).tolist()
        pred = rng.integers(0, 2, n).tolist()
        c = ConfusionMatrix.from_predictions(truth, pred)
        r = metrics(c)
        # brute force straight from the two lists
        tp = sum(1 for t, p in zip(truth, pred) if t == 1 and p == 1)
        tn = sum(1 for t, p in zip(truth, pred) if t == 0 and p == 0)
        fp = sum(1 for t, p in zip(truth, pred) if t == 0 and p == 1)
        fn = sum(1 for t, p in zip(truth, pred) if t == 1 and p == 0)
        expect = {
            "acc": (tp + tn) / n,
            "tpr": tp / (tp + fn) if tp + fn else math.nan,
            "fpr": fp / (fp + tn) if fp + tn else math.nan,
            "tnr": tn / (tn + fp) if tn + fp else math.nan,
            "fnr": fn / (fn + tp) if fn + tp else math.nan,
        }
        for k, v in expect.items():
            got = getattr(r, k)
            if not (got == v or (math.isnan(got) and math.isnan(v))):
                mismatches += 1
        if tp + fn:
            worst = max(worst, abs(r.tpr + r.fnr - 1))
        if tn + fp:
            worst = max(worst, abs(r.tnr + r.fpr - 1))
    dt = time.perf_counter() - t0
    verdict(1, mismatches == 0 and worst <= 1e-12 and dt < 1.0,
            f"150 matrices, {mismatches} mismatches, max identity error {worst:.1e}, {dt:.3f}s (< 1s)")


# -- 2 ---------------------------------------------------------------------------

def _brute_h(counts):
    n = sum(counts)
    return -sum(c / n * math.log2(c / n) for c in counts if c) if n else 0.0


def test_criterion_2_entropy_gain_oracle():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 30))
        labels = rng.integers(0, 2, n).tolist()
        groups = rng.integers(0, int(rng.integers(1, 6)), n).tolist()
        parent = _brute_h([labels.count(0), labels.count(1)])
        children = 0.0
        for g in set(groups):
            sub = [lab for lab, grp in zip(labels, groups) if grp == g]
            children += len(sub) / n * _brute_h([sub.count(0), sub.count(1)])
        worst = max(worst, abs(information_gain(labels, groups) - max(parent - children, 0.0)))
        worst = max(worst, abs(entropy((labels.count(0), labels.count(1))) - parent))
    dt = time.perf_counter() - t0
    y = [1 if r[4] == "no" else 0 for r in TENNIS_ROWS]
    ig = information_gain(y, [r[0] for r in TENNIS_ROWS])
    hand = entropy((5, 5)) == 1.0 and abs(ig - 0.246750) <= 1e-6
    verdict(2, worst <= 1e-9 and hand and dt < 1.0,
            f"1000 partitions max error {worst:.1e}, H(5,5)={entropy((5, 5))}, tennis IG={ig:.6f}, {dt:.3f}s (< 1s)")


# -- 3 ---------------------------------------------------------------------------

def test_criterion_3_auc_double_computation():
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(200):
        n = int(rng.integers(2, 300))
        truth = rng.integers(0, 2, n)
        truth[0], truth[1] = 0, 1
        # alternate continuous and heavily tied score sets
        scores = rng.random(n) if i % 2 else rng.integers(0, 5, n) / 4
        worst = max(worst, abs(auc_rank(scores, truth) - trapezoid_area(roc_points(scores, truth))))
    perfect = roc_auc([0.9, 0.8, 0.7, 0.2, 0.1], [1, 1, 1, 0, 0])[0]
    tied = roc_auc([0.3] * 6, [1, 0, 0, 1, 0, 1])[0]
    verdict(3, worst <= 1e-9 and perfect == 1.0 and tied == 0.5,
            f"200 score sets max |rank - trapezoid| {worst:.1e}, ordered AUC {perfect}, all-tied AUC {tied}")


# -- 4 ---------------------------------------------------------------------------

def test_criterion_4_sanity_ladder():
    schema = Schema.parse("proto:categorical\nx:continuous\ny:continuous\n")
    tennis_schema = Schema.parse(TENNIS_SCHEMA_TEXT)
    tennis = Dataset.from_rows(tennis_schema, [
        FeatureVector(r[:4], Label.MALICIOUS if r[4] == "no" else Label.BENIGN) for r in TENNIS_ROWS])
    # one-off JIT compilation of the tree kernels (cached on disk afterwards) is timed separately
    t0 = time.perf_counter()
    train(tennis, ClassifierSpec("dt")).predict_many(tennis)
    train(clusters(schema), ClassifierSpec("dt")).predict_many(clusters(schema))
    compile_s = time.perf_counter() - t0

    t0 = time.perf_counter()
    checks = {}
    fixtures = {"tennis": tennis, "clusters": clusters(schema, n=200, seed=4),
                "kdd-fixture": synthetic_kdd(400, seed=4, label_noise=0.0)}
    for name, ds in fixtures.items():
        keys = [tuple(r.values) for r in ds.rows()]
        consistent = len({(k, int(lab)) for k, lab in zip(keys, ds.labels)}) == len(set(keys))
        assert consistent, name
        dt = train(ds, ClassifierSpec("dt"))
        rf = train(ds, ClassifierSpec("rf", ForestParams(tree_count=25), seed=1))
        checks[f"dt acc 1.0 ({name})"] = (dt.predict_many(ds) == ds.labels).all()
        checks[f"rf acc 1.0 ({name})"] = (rf.predict_many(ds) == ds.labels).all()
        single = ForestParams(tree_count=1, feature_subsample=ds.schema.feature_count, bootstrap=False)
        rf1 = train(ds, ClassifierSpec("rf", single, seed=8))
        checks[f"rf1 == dt ({name})"] = np.array_equal(rf1.predict_many(ds), dt.predict_many(ds))
        nb = train(ds, ClassifierSpec("nb"))
        lj = nb.body.log_joint(ds.continuous, nb.encoder.codes(ds))
        post = np.exp(lj - np.logaddexp(lj[:, 0], lj[:, 1])[:, None])
        checks[f"nb posteriors sum to 1 ({name})"] = np.abs(post.sum(axis=1) - 1).max() <= 1e-9
    sep = clusters(schema, n=100, seed=5)
    checks["svm acc 1.0 on separated clusters"] = (train(sep, ClassifierSpec("svm")).predict_many(sep) == sep.labels).all()
    xd = xor(schema, per_cell=25)
    xor_acc = float((train(xd, ClassifierSpec("svm")).predict_many(xd) == xd.labels).mean())
    checks["svm <= 0.75 on XOR"] = xor_acc <= 0.75
    elapsed = time.perf_counter() - t0
    failed = [k for k, v in checks.items() if not v]
    verdict(4, not failed and elapsed < 10.0,
            f"{len(checks) - len(failed)}/{len(checks)} checks, svm XOR acc {xor_acc:.2f}, "
            f"{elapsed:.2f}s (< 10s; one-off JIT warm-up {compile_s:.1f}s excluded)"
            + (f", failed: {failed}" if failed else ""))


# -- 5 / 6: real benchmark ------------------------------------------------------

@pytest.fixture(scope="module")
def benchmark_run(tmp_path_factory):
    """Split + full default pipeline on the real benchmark, through the CLI."""
    raw = os.environ.get(DATA_ENV, "").strip()
    if not raw or not Path(raw).is_file():
        return {"blocked": f"BLOCKED: no KDD-style benchmark file ({DATA_ENV} unset or missing); "
                           "no network route to NSL-KDD from this build environment"}
    work = tmp_path_factory.mktemp("benchmark")
    t0 = time.perf_counter()
    code = cli_main(["split", "--input", raw, "--labeled-n", str(BENCH_SPLIT[0]), "--unlabeled-n",
                     str(BENCH_SPLIT[1]), "--test-n", str(BENCH_SPLIT[2]), "--seed", "0",
                     "--out-dir", str(work / "parts")])
    if code != 0:
        return {"blocked": f"split of {raw} failed with exit {code}"}
    p = work / "parts"
    code = cli_main(["pipeline", "--sensitive", str(p / "sensitive.csv"), "--unlabeled", str(p / "unlabeled.csv"),
                     "--test", str(p / "test.csv"), "--seed", "0", "--out-dir", str(work / "run")])
    elapsed = time.perf_counter() - t0
    report = json.loads((work / "run" / "report.json").read_text())
    return {"report": report, "exit": code, "elapsed": elapsed, "dir": work}


def test_criterion_5_benchmark_shape(benchmark_run):
    if "blocked" in benchmark_run:
        verdict(5, False, benchmark_run["blocked"])
    r = benchmark_run["report"]
    t_acc = {row["classifier"]: row["mean"]["acc"] for row in r["teacher_selection"]}
    s_acc = {row["classifier"]: row["mean"]["acc"] for row in r["student_selection"]}
    teacher_rf = r["teacher"]["family"] == "rf"
    student_rf = r["student"]["family"] == "rf"
    test_acc = r["teacher_eval"]["acc"]
    order = t_acc["rf"] >= t_acc["dt"] > t_acc["svm"] > t_acc["nb"]
    gap = min(t_acc["rf"], t_acc["dt"]) - max(t_acc["svm"], t_acc["nb"])
    fast = benchmark_run["elapsed"] < 15 * 60
    ok = teacher_rf and student_rf and test_acc >= 0.990 and order and gap >= 0.01 and fast
    verdict(5, ok, f"(a) teacher={r['teacher']['family']} student={r['student']['family']}; "
                   f"(b) teacher test acc {100 * test_acc:.2f}% (>= 99.0); "
                   f"(c) CV acc rf {100 * t_acc['rf']:.2f} dt {100 * t_acc['dt']:.2f} svm {100 * t_acc['svm']:.2f} "
                   f"nb {100 * t_acc['nb']:.2f}, tree-vs-rest gap {100 * gap:.2f}pp (>= 1); "
                   f"student CV rf {100 * s_acc['rf']:.2f}; {benchmark_run['elapsed'] / 60:.1f} min (< 15)")


def test_criterion_6_mimic_gap(benchmark_run):
    if "blocked" in benchmark_run:
        verdict(6, False, benchmark_run["blocked"])
    r = benchmark_run["report"]
    gap = r["relative_score_difference"]
    s_auc = r["student_eval"]["auc"]
    verdict(6, gap < 0.01 and s_auc is not None and s_auc >= 0.98,
            f"relative score difference {gap:.6f} (< 0.01), student AUC {s_auc:.4f} (>= 0.98), "
            f"teacher {100 * r['teacher_eval']['acc']:.2f}% vs student {100 * r['student_eval']['acc']:.2f}%")


# -- 7 ---------------------------------------------------------------------------

def test_criterion_7_determinism_round_trip(tmp_path):
    from mimicids.data import write_dataset

    src = synthetic_kdd(4000, seed=17)
    sens, unl, test = split_dataset(src, SplitSpec(1600, 1600, 800, seed=1))
    for name, ds in (("s.csv", sens), ("u.csv", unl), ("t.csv", test)):
        write_dataset(ds, tmp_path / name)
    args = ["pipeline", "--sensitive", str(tmp_path / "s.csv"), "--unlabeled", str(tmp_path / "u.csv"),
            "--test", str(tmp_path / "t.csv"), "--seed", "3", "--out-dir", str(tmp_path / "run"),
            "--created-at", "2024-01-01T00:00:00Z"]
    first = cli_main(args)
    rerun = cli_main(["reproduce", str(tmp_path / "run" / "manifest.json"), "--into", str(tmp_path / "again")])
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    same_files = all(file_checksum(tmp_path / "again" / o["name"]) == o["sha256"] for o in manifest["outputs"])

    probe = synthetic_kdd(1000, seed=999)
    specs = [ClassifierSpec("dt"), ClassifierSpec("rf", seed=2), ClassifierSpec("nb"), ClassifierSpec("svm", seed=2)]
    exact = {}
    for spec in specs:
        m = train(sens, spec)
        save_model(m, tmp_path / f"{spec.family}.json")
        back = load_model(tmp_path / f"{spec.family}.json")
        exact[spec.family] = (np.array_equal(back.predict_many(probe), m.predict_many(probe))
                              and np.array_equal(back.score_many(probe), m.score_many(probe)))
    ok = first in (0, 1) and rerun == 0 and same_files and all(exact.values())
    verdict(7, ok, f"pipeline rerun from manifest: {len(manifest['outputs'])} outputs "
                   f"{'identical' if same_files else 'DIFFER'}; save/load exact on 1000 rows: "
                   + ", ".join(f"{k}={'yes' if v else 'NO'}" for k, v in exact.items()))


# -- 8 ---------------------------------------------------------------------------

def test_criterion_8_annotation_fidelity(benchmark_run):
    if "report" in benchmark_run:
        where = benchmark_run["dir"]
        teacher = load_model(where / "run" / "teacher.model.json")
        unlabeled = load_dataset(where / "parts" / "unlabeled.csv", kdd_schema(), labeled=False)
        source = "benchmark unlabeled partition"
    else:
        src = synthetic_kdd(sum(BENCH_SPLIT), seed=8)
        sens, unlabeled, _ = split_dataset(src, SplitSpec(*BENCH_SPLIT, seed=0))
        teacher = train(sens, ClassifierSpec("rf", seed=0))
        source = "synthetic KDD-shaped partition (benchmark unavailable)"
    annotated = annotate(teacher, unlabeled)
    single = np.array([int(teacher.predict(unlabeled.row(i))) for i in range(len(unlabeled))], np.int8)
    agree = int((annotated.labels == single).sum())
    ok = len(annotated) == len(unlabeled) == BENCH_SPLIT[1] and agree == len(unlabeled)
    verdict(8, ok, f"{agree}/{len(unlabeled)} annotated labels equal {teacher.family} teacher.predict "
                   f"row-for-row ({source})")

