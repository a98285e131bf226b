"""``mimic-ids`` command line.

Subcommands: split, train-teacher, train-student, annotate, evaluate,
pipeline, reproduce. Every command except ``reproduce`` writes a JSON run
manifest next to its outputs; ``reproduce`` replays a manifest and checks
that the outputs come back byte-identical.

Exit status: 0 success / released, 1 gate failed, 2 usage or contract
error, 3 data / training / storage error, 4 internal error.
"""

from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .config import build_config, load_config_file
from .data import Schema, SplitSpec, file_checksum, format_number, kdd_schema, load_dataset, split_dataset, write_dataset
from .errors import ContractError, MimicError, StageError, UsageError
from .eval import evaluate, format_table
from .model_store import load_model, save_model, write_json
from .pipeline import (
    annotate,
    evaluate_models,
    run_pipeline,
    selection_table_dict,
    student_model_generation,
    teacher_model_generation,
)

log = logging.getLogger("mimicids")

BUILTIN_SCHEMA = "kdd41"
# flags naming outputs; reproduce --into rewrites these
DIR_FLAGS = ("--out-dir", "--roc-dir")
FILE_FLAGS = ("--out-model", "--report", "--out", "--manifest")


class Run:
    """Collects what a manifest needs while a command executes."""

    def __init__(self, command: str, argv: list[str], created_at: str):
        self.command = command
        self.argv = argv
        self.created_at = created_at
        self.inputs: dict[str, str] = {}
        self.outputs: list[dict] = []
        self.timings: dict[str, float] = {}
        self.config: dict | None = None
        self.seed: int | None = None

    def input(self, path) -> Path:
        path = Path(path)
        if not path.is_file():
            raise UsageError(f"input file not found: {path}")
        self.inputs[str(path)] = file_checksum(path)
        return path

    def output(self, path, flag: str, name: str = "") -> None:
        self.outputs.append({"flag": flag, "name": name, "path": str(path),
                             "sha256": file_checksum(path)})

    @contextlib.contextmanager
    def timed(self, phase: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[phase] = round(time.perf_counter() - t0, 6)

    def write(self, path, exit_code: int) -> None:
        doc = {
            "command": self.command,
            "argv": self.argv,
            "cwd": os.getcwd(),
            "created_at": self.created_at,
            "seed": self.seed,
            "version": __version__,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "exit_code": exit_code,
            "timings": self.timings,
        }
        write_json(doc, path, indent=2)


def resolve_created_at(explicit: str | None) -> str:
    if explicit:
        return explicit
    epoch = os.environ.get("SOURCE_DATE_EPOCH", "").strip()
    when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch.isdigit()
            else _dt.datetime.now(_dt.timezone.utc))
    return when.replace(microsecond=0).isoformat().replace("+00:00", "Z")


def _schema(run: Run, value: str) -> Schema:
    if value == BUILTIN_SCHEMA:
        return kdd_schema()
    return Schema.load(run.input(value))


def _config(run: Run, args, **kw):
    entries = load_config_file(run.input(args.config)) if getattr(args, "config", None) else {}
    cfg = build_config(entries, seed_override=args.seed, **kw)
    run.config = cfg.snapshot()
    run.seed = cfg.seed
    return cfg


def write_roc(points, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("fpr,tpr\n")
        for f, t in points:
            fh.write(f"{format_number(float(f))},{format_number(float(t))}\n")


def _selection_report(role, cfg, table, model) -> dict:
    return {
        "role": role,
        "cv": cfg.snapshot()["cv"],
        "selected": model.spec.name,
        "train_rows": model.train_rows,
        "selection": selection_table_dict(table, model.spec),
    }


def _print_selection(title, table) -> None:
    print(title)
    print(format_table([(spec.name.upper(), res.mean) for spec, res in table]))


def _print_comparison(t_eval, s_eval=None) -> None:
    rows = [("Teacher", t_eval.as_dict())]
    if s_eval is not None:
        rows.append(("Student", s_eval.as_dict()))
    print(format_table(rows))


# -- commands ------------------------------------------------------------------

def cmd_split(args, run: Run) -> int:
    schema = _schema(run, args.schema)
    spec = SplitSpec(args.labeled_n, args.unlabeled_n, args.test_n, args.seed, args.stratified)
    run.seed = args.seed
    run.config = {"split": {"labeled_n": spec.labeled_count, "unlabeled_n": spec.unlabeled_count,
                            "test_n": spec.test_count, "stratified": spec.stratified}}
    with run.timed("load"):
        source = load_dataset(run.input(args.input), schema, has_header=args.header, labeled=True)
    with run.timed("split"):
        parts = split_dataset(source, spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in zip(("sensitive.csv", "unlabeled.csv", "test.csv"), parts):
        write_dataset(part, out / name)
        run.output(out / name, "--out-dir", name)
        print(f"{name}: {len(part)} rows")
    return 0


def _cmd_train(args, run: Run, role: str) -> int:
    roster = {"teacher_roster" if role == "teacher" else "student_roster": args.roster}
    cfg = _config(run, args, cv_k=args.cv_k, **roster)
    schema = _schema(run, args.schema)
    with run.timed("load"):
        data = load_dataset(run.input(args.data), schema, has_header=args.header, labeled=True)
    gen = teacher_model_generation if role == "teacher" else student_model_generation
    with run.timed("select_and_train"):
        model, table = gen(data, cfg, created_at=run.created_at)
    _print_selection(f"{role} selection ({cfg.cv.k}-fold CV, {len(data)} rows)", table)
    print(f"selected: {model.spec.name}")
    save_model(model, args.out_model)
    run.output(args.out_model, "--out-model")
    if args.report:
        write_json(_selection_report(role, cfg, table, model), args.report, indent=2)
        run.output(args.report, "--report")
    return 0


def cmd_train_teacher(args, run: Run) -> int:
    return _cmd_train(args, run, "teacher")


def cmd_train_student(args, run: Run) -> int:
    return _cmd_train(args, run, "student")


def _has_rows(path: Path) -> bool:
    with path.open("r", encoding="utf-8") as fh:
        return any(line.strip() for line in fh)


def cmd_annotate(args, run: Run) -> int:
    schema = _schema(run, args.schema)
    model = load_model(run.input(args.model))
    path = run.input(args.data)
    if not _has_rows(path):
        raise ContractError(f"{path}: no rows to annotate")
    with run.timed("load"):
        data = load_dataset(path, schema, has_header=args.header)
    if data.labeled:
        raise ContractError(f"{path}: annotate expects unlabeled rows (found a label column)")
    with run.timed("annotate"):
        labeled = annotate(model, data)
    write_dataset(labeled, args.out)
    run.output(args.out, "--out")
    mal = int(labeled.labels.sum())
    print(f"annotated {len(labeled)} rows: {mal} malicious, {len(labeled) - mal} benign")
    return 0


def cmd_evaluate(args, run: Run) -> int:
    schema = _schema(run, args.schema)
    teacher = load_model(run.input(args.teacher))
    student = load_model(run.input(args.student)) if args.student else None
    with run.timed("load"):
        test = load_dataset(run.input(args.test), schema, has_header=args.header, labeled=True)
    run.config = {"threshold": args.threshold}
    with run.timed("evaluate"):
        if student is None:
            teacher.check(test)
            t_eval, s_eval, gap = evaluate(teacher, test), None, None
        else:
            t_eval, s_eval, gap = evaluate_models(teacher, student, test)
    _print_comparison(t_eval, s_eval)
    doc = {"teacher": {"family": teacher.family, **t_eval.as_dict()}}
    code = 0
    if student is not None:
        passed = gap < args.threshold
        code = 0 if passed else 1
        doc["student"] = {"family": student.family, **s_eval.as_dict()}
        doc.update(relative_score_difference=gap, release_threshold=args.threshold, released=passed)
        print(f"relative score difference: {gap:.6f} (threshold {args.threshold}) -> "
              f"{'released' if passed else 'held back'}")
    if args.report:
        write_json(doc, args.report, indent=2)
        run.output(args.report, "--report")
    if args.roc_dir:
        out = Path(args.roc_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, ev in (("teacher_roc.csv", t_eval), ("student_roc.csv", s_eval)):
            if ev is not None and ev.roc_points:
                write_roc(ev.roc_points, out / name)
                run.output(out / name, "--roc-dir", name)
    return code


def cmd_pipeline(args, run: Run) -> int:
    cfg = _config(run, args, release_threshold=args.threshold)
    schema = _schema(run, args.schema)
    with run.timed("load"):
        try:
            sensitive = load_dataset(run.input(args.sensitive), schema, has_header=args.header, labeled=True)
            unlabeled = load_dataset(run.input(args.unlabeled), schema, has_header=args.header, labeled=False)
            test = load_dataset(run.input(args.test), schema, has_header=args.header, labeled=True)
        except UsageError:
            raise
        except MimicError as exc:
            raise StageError("load", exc) from exc
    with run.timed("pipeline"):
        report = run_pipeline(sensitive, unlabeled, test, cfg, created_at=run.created_at)
    _print_selection("teacher selection", report.teacher_selection)
    _print_selection("student selection", report.student_selection)
    print("held-out comparison")
    _print_comparison(report.teacher_eval, report.student_eval)
    print(f"relative score difference: {report.relative_score_difference:.6f} "
          f"(threshold {cfg.release_threshold}) -> {'released' if report.released else 'held back'}")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "teacher.model.json": lambda p: save_model(report.teacher, p),
        "annotated.csv": lambda p: write_dataset(report.annotated, p),
        "student.model.json": lambda p: save_model(report.student, p),
        "teacher_roc.csv": lambda p: write_roc(report.teacher_eval.roc_points, p),
        "student_roc.csv": lambda p: write_roc(report.student_eval.roc_points, p),
        "report.json": lambda p: write_json({"config": cfg.snapshot(), "created_at": run.created_at,
                                             **report.as_dict()}, p, indent=2),
    }
    for name, writer in files.items():
        writer(out / name)
        run.output(out / name, "--out-dir", name)
    return 0 if report.released else 1


# -- reproduce -------------------------------------------------------------------

def _flag_value(argv: list[str], flag: str) -> str | None:
    for i, tok in enumerate(argv):
        if tok == flag and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith(flag + "="):
            return tok.split("=", 1)[1]
    return None


def _set_flag(argv: list[str], flag: str, value: str) -> list[str]:
    out, i, found = [], 0, False
    while i < len(argv):
        tok = argv[i]
        if tok == flag:
            out += [flag, value]
            i += 2
            found = True
            continue
        if tok.startswith(flag + "="):
            out.append(f"{flag}={value}")
            found = True
        else:
            out.append(tok)
        i += 1
    if not found and flag == "--manifest":
        out += [flag, value]
    return out


def cmd_reproduce(args) -> int:
    import json

    path = Path(args.manifest)
    if not path.is_file():
        raise UsageError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        argv, cwd, recorded = list(doc["argv"]), doc["cwd"], doc["outputs"]
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a run manifest ({exc})") from exc
    if args.into:
        into = Path(args.into).resolve()
        into.mkdir(parents=True, exist_ok=True)
        for flag in DIR_FLAGS:
            if _flag_value(argv, flag) is not None:
                argv = _set_flag(argv, flag, str(into))
        for flag in FILE_FLAGS:
            value = _flag_value(argv, flag) or (str(path) if flag == "--manifest" else None)
            if value is not None:
                argv = _set_flag(argv, flag, str(into / Path(value).name))
    old = os.getcwd()
    os.chdir(cwd)
    try:
        code = main(argv)
        mismatches = 0
        for item in recorded:
            base = _flag_value(argv, item["flag"])
            new = Path(base) / item["name"] if item["name"] else Path(base)
            now = file_checksum(new) if new.is_file() else "missing"
            same = now == item["sha256"]
            mismatches += not same
            print(f"{'match' if same else 'DIFFER'} {new}")
    finally:
        os.chdir(old)
    if code != doc.get("exit_code", code):
        print(f"exit status {code} differs from recorded {doc['exit_code']}")
        mismatches += 1
    print("reproduce: " + ("all outputs identical" if mismatches == 0 else f"{mismatches} mismatch(es)"))
    return 0 if mismatches == 0 else 1


# -- argument parsing -----------------------------------------------------------

def _nonneg_int(raw: str) -> int:
    v = int(raw)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mimic-ids", description="Teacher/student mimic learning for intrusion detection.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--schema", default=BUILTIN_SCHEMA,
                        help=f"schema file, or '{BUILTIN_SCHEMA}' for the bundled 41-column profile")
        sp.add_argument("--header", action="store_true", help="input CSVs start with a header line")
        sp.add_argument("--created-at", help="timestamp recorded in outputs (default: SOURCE_DATE_EPOCH or now)")
        sp.add_argument("--manifest", help="where to write the run manifest")
        if seed:
            sp.add_argument("--seed", type=_nonneg_int, default=None)

    sp = sub.add_parser("split", help="cut a labeled CSV into sensitive / unlabeled / test parts")
    common(sp, seed=False)
    sp.add_argument("--input", required=True)
    sp.add_argument("--labeled-n", type=_nonneg_int, required=True)
    sp.add_argument("--unlabeled-n", type=_nonneg_int, required=True)
    sp.add_argument("--test-n", type=_nonneg_int, required=True)
    sp.add_argument("--seed", type=_nonneg_int, default=0)
    sp.add_argument("--stratified", action="store_true")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_split)

    for name, func in (("train-teacher", cmd_train_teacher), ("train-student", cmd_train_student)):
        sp = sub.add_parser(name, help=f"select and fit the {name.split('-')[1]} model")
        common(sp)
        sp.add_argument("--data", required=True)
        sp.add_argument("--roster", default=None, help="comma list of dt,rf,svm,nb (default: all four)")
        sp.add_argument("--cv-k", type=int, default=None, help="folds (default 10)")
        sp.add_argument("--config")
        sp.add_argument("--out-model", required=True)
        sp.add_argument("--report")
        sp.set_defaults(func=func)

    sp = sub.add_parser("annotate", help="label an unlabeled CSV with a model's predictions")
    common(sp, seed=False)
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_annotate)

    sp = sub.add_parser("evaluate", help="score one model, or compare teacher and student")
    common(sp, seed=False)
    sp.add_argument("--teacher", required=True)
    sp.add_argument("--student")
    sp.add_argument("--test", required=True)
    sp.add_argument("--report")
    sp.add_argument("--roc-dir", help="write fpr,tpr CSV files here")
    sp.add_argument("--threshold", type=float, default=0.01)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("pipeline", help="teacher -> annotate -> student -> release gate")
    common(sp)
    sp.add_argument("--sensitive", required=True)
    sp.add_argument("--unlabeled", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--config")
    sp.add_argument("--threshold", type=float, default=None, help="release threshold (default 0.01)")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("reproduce", help="replay a run manifest and compare output checksums")
    sp.add_argument("manifest")
    sp.add_argument("--into", help="write the replayed outputs here instead of over the originals")
    sp.set_defaults(func=None)
    return p


def _manifest_path(args) -> Path | None:
    if args.manifest:
        return Path(args.manifest)
    if getattr(args, "out_dir", None):
        return Path(args.out_dir) / "manifest.json"
    for attr in ("out_model", "out", "report"):
        value = getattr(args, attr, None)
        if value:
            return Path(str(value) + ".manifest.json")
    return None


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.func is None:
            return cmd_reproduce(args)
        created_at = resolve_created_at(args.created_at)
        if _flag_value(argv, "--created-at") is None:
            argv = argv + ["--created-at", created_at]
        run = Run(args.command, argv, created_at)
        with run.timed("total"):
            code = args.func(args, run)
        target = _manifest_path(args)
        if target is not None:
            target.parent.mkdir(parents=True, exist_ok=True)
            run.write(target, code)
        return code
    except MimicError as exc:
        print(f"mimic-ids {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # pragma: no cover - last-resort guard
        log.exception("internal error")
        print(f"mimic-ids {args.command}: internal error: {exc}", file=sys.stderr)
        return 4


__all__ = ["main", "build_parser"]

if __name__ == "__main__":
    sys.exit(main())
