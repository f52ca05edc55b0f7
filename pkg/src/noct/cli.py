"""Command-line interface.

    noct analyze   MODEL.json [--constraints PRESET] [--out REPORT.json]
    noct convert   MODEL.json [--constraints PRESET] [--out MODEL.json]
    noct check-null MODEL.json VECTOR.json [--constraints PRESET]
    noct simulate  SCENARIO [--runs N] [--out-dir DIR] [--jobs J]

Exit codes: 0 success (check-null: verified), 1 check-null not verified,
2 model/usage errors, 3 analysis truncated at the order cap, 4 filter
divergence during simulation.  NOCT_SEED in the environment overrides
--seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys
from pathlib import Path

from . import __version__
from .expr import ParseError, parse
from .modelio import ModelFileError, dumps_model, load_model
from .models import PRESET_NAMES, vio_constraints
from .observability import DEFAULT_MAX_ORDER, DEFAULT_POINTS, analyze
from .system import ConversionError, apply_constraints, validate

EXIT_OK = 0
EXIT_NOT_VERIFIED = 1
EXIT_MODEL_ERROR = 2
EXIT_TRUNCATED = 3
EXIT_DIVERGED = 4


def _error(args, code: int, message: str) -> int:
    if getattr(args, "json_errors", False):
        print(json.dumps({"error": message, "exit_code": code}), file=_sys.stderr)
    else:
        print(f"noct: error: {message}", file=_sys.stderr)
    return code


def _effective_seed(args) -> int:
    env = os.environ.get("NOCT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"NOCT_SEED must be an integer, got {env!r}")
    return args.seed


def _load_with_preset(args):
    sys_model = load_model(args.model)
    if args.constraints is not None:
        from dataclasses import replace
        sys_model = replace(sys_model, constraints=vio_constraints(args.constraints))
    return sys_model


def cmd_analyze(args) -> int:
    try:
        seed = _effective_seed(args)
        model = _load_with_preset(args)
        report = analyze(model, max_order=args.max_order, points=args.points, seed=seed)
    except (ModelFileError, ConversionError, ValueError) as e:
        return _error(args, EXIT_MODEL_ERROR, str(e))
    doc = report.to_json_dict()
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        _sys.stdout.write(text)
    if report.truncated:
        print("noct: analysis truncated at the order cap before rank saturation",
              file=_sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_convert(args) -> int:
    try:
        seed = _effective_seed(args)
        model = _load_with_preset(args)
        converted = apply_constraints(model, seed=seed)
        diags = validate(converted)
        if diags:
            return _error(args, EXIT_MODEL_ERROR,
                          "converted model failed validation: " + "; ".join(diags))
    except (ModelFileError, ConversionError, ValueError) as e:
        return _error(args, EXIT_MODEL_ERROR, str(e))
    text = dumps_model(converted)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        _sys.stdout.write(text)
    return EXIT_OK


def _load_vectors(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "vector" in doc:
        doc = doc["vector"]
    if not isinstance(doc, list) or not doc:
        raise ModelFileError(f"{path}: expected a JSON array of expression strings "
                             "(or an array of such arrays)")
    if isinstance(doc[0], list):
        vector_docs = doc
    else:
        vector_docs = [doc]
    vectors = []
    for vi, vec in enumerate(vector_docs):
        entries = []
        for k, text in enumerate(vec):
            try:
                entries.append(parse(text))
            except ParseError as e:
                raise ModelFileError(f"{path}: vector {vi} entry {k}: {e}") from None
        vectors.append(tuple(entries))
    return vectors


def cmd_check_null(args) -> int:
    from .observability import build_codistribution, verify_null_vector

    try:
        seed = _effective_seed(args)
        model = _load_with_preset(args)
        vectors = _load_vectors(args.vector)
        standard = apply_constraints(model, seed=seed)
        cod = build_codistribution(standard, max_order=args.max_order,
                                   points=args.points, seed=seed)
        for vec in vectors:
            if len(vec) != standard.n_states:
                return _error(args, EXIT_MODEL_ERROR,
                              f"vector has {len(vec)} entries but the converted "
                              f"system has {standard.n_states} state variables")
    except (ModelFileError, ConversionError, ValueError, json.JSONDecodeError, OSError) as e:
        return _error(args, EXIT_MODEL_ERROR, str(e))
    results = [verify_null_vector(cod, vec) for vec in vectors]
    for i, ok in enumerate(results):
        print(f"vector {i}: {'verified annihilator' if ok else 'NOT in the null space'}")
    return EXIT_OK if all(results) else EXIT_NOT_VERIFIED


def cmd_simulate(args) -> int:
    from .sim.runner import SCENARIO_NAMES, FilterDivergedError, run_batch

    if args.runs < 1:
        return _error(args, EXIT_MODEL_ERROR, "--runs must be at least 1")
    if args.scenario not in SCENARIO_NAMES:
        return _error(args, EXIT_MODEL_ERROR,
                      f"unknown scenario '{args.scenario}'; "
                      f"expected one of {', '.join(SCENARIO_NAMES)}")
    try:
        seed = _effective_seed(args)
    except ValueError as e:
        return _error(args, EXIT_MODEL_ERROR, str(e))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = run_batch(args.scenario, runs=args.runs, seed=seed,
                        out_dir=out_dir, jobs=args.jobs)
    print(f"wrote {args.runs} run(s) to {out_dir}")
    if summary["diverged_runs"]:
        print(f"noct: filter diverged in runs {summary['diverged_runs']}",
              file=_sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noct",
        description="Observability analysis for control-affine systems "
                    "with linear constraints.")
    parser.add_argument("--version", action="version", version=f"noct {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--points", type=int, default=DEFAULT_POINTS,
                       help="number of shared random sample points")
        p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER,
                       help="Lie-derivative order cap")
        p.add_argument("--seed", type=int, default=0,
                       help="RNG seed (NOCT_SEED overrides)")
        p.add_argument("--json-errors", action="store_true",
                       help="emit machine-readable errors on stderr")
        p.add_argument("--constraints", choices=PRESET_NAMES, default=None,
                       help="replace the model's constraints with a built-in preset")

    p = sub.add_parser("analyze", help="run the observability analysis")
    p.add_argument("model")
    p.add_argument("--out", help="report path (default: stdout)")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("convert", help="emit the constraint-free standard form")
    p.add_argument("model")
    p.add_argument("--out", help="output model path (default: stdout)")
    common(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("check-null", help="verify candidate null vectors")
    p.add_argument("model")
    p.add_argument("vector", help="JSON array of expression strings")
    common(p)
    p.set_defaults(func=cmd_check_null)

    p = sub.add_parser("simulate", help="run EKF simulation batches")
    p.add_argument("scenario")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="sim_out")
    p.add_argument("--jobs", type=int, default=1,
                   help="concurrent runs (1 = sequential)")
    p.add_argument("--json-errors", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
