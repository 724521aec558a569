"""Command-line front end: check, contaminate, enumerate, label, examples.

Exit codes
    0  success (exceptional / full / all sequences full)
    1  negative verdict (not exceptional, not maximal, or not full)
    2  malformed input or unknown name
    3  undetermined: round cap reached
    4  a maximal sequence that is not full was found
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import jsonschema

from . import __version__, gallery
from .contamination import (
    CAPPED,
    DEFAULT_MAX_ROUNDS,
    FULL,
    bounding_window,
    closure,
    frame_records,
)
from .core import DimVec, ExcSeq, is_exceptional, label, widths
from .search import SearchAborted, get_profile, report_document, theorem_run
from .structure import layer_loads

EXIT_OK, EXIT_NEGATIVE, EXIT_MALFORMED, EXIT_UNKNOWN, EXIT_FALSIFIED = 0, 1, 2, 3, 4

SEQUENCE_SCHEMA = {
    "type": "object",
    "required": ["rank", "points"],
    "properties": {
        "rank": {"type": "integer", "minimum": 1},
        "d": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "points": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
    },
}

_HIST = {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}}
REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version", "tool_version", "profile", "options", "wall_time_s",
        "sequences_found", "all_full", "max_steps", "step_histogram",
        "distribution_histogram", "counterexamples", "nodes_visited",
    ],
    "properties": {
        "schema_version": {"const": 1},
        "tool_version": {"type": "string"},
        "profile": {"type": "string"},
        "grids": {"type": "array", "items": {"type": "string"}},
        "options": {"type": "object"},
        "wall_time_s": {"type": "number", "minimum": 0},
        "sequences_found": {"type": "integer", "minimum": 0},
        "all_full": {"type": "boolean"},
        "max_steps": {"type": "integer", "minimum": 0},
        "step_histogram": _HIST,
        "distribution_histogram": _HIST,
        "counterexamples": {"type": "array"},
        "nodes_visited": {"type": "integer", "minimum": 0},
    },
}


class InputError(ValueError):
    pass


def read_sequence_file(path: str | os.PathLike) -> tuple[ExcSeq, DimVec]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        jsonschema.validate(doc, SEQUENCE_SCHEMA)
        seq = ExcSeq(doc["rank"], tuple(tuple(p) for p in doc["points"]))
        d = DimVec(tuple(doc["d"])) if "d" in doc else DimVec.ones(seq.rank)
        if d.rank != seq.rank:
            raise InputError("d has the wrong rank")
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not seq.points:
        raise InputError(f"{path}: no points")
    return seq, d


def sequence_document(seq: ExcSeq, d: DimVec | None = None) -> dict:
    doc = {"rank": seq.rank, "points": seq.as_lists()}
    if d is not None and not d.is_ones:
        doc["d"] = list(d.d)
    return doc


def write_sequence_file(path, seq: ExcSeq, d: DimVec | None = None) -> None:
    Path(path).write_text(json.dumps(sequence_document(seq, d)) + "\n")


def parse_window(text: str, rank: int) -> list[tuple[int, int]]:
    """``"lo:hi,lo:hi,..."`` with inclusive bounds."""
    try:
        parts = [tuple(int(x) for x in part.split(":")) for part in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad window {text!r}") from exc
    if len(parts) != rank or any(len(p) != 2 or p[0] > p[1] for p in parts):
        raise InputError(f"window {text!r} must give lo:hi for each of {rank} axes")
    return parts


def _emit(obj) -> None:
    print(json.dumps(obj))


def cmd_check(args) -> int:
    seq, d = read_sequence_file(args.path)
    v = is_exceptional(seq, d)
    profiles = [layer_loads(seq, k) for k in range(seq.rank)]
    _emit(
        {
            "exceptional": v.exceptional,
            "maximal": v.maximal,
            "violations": [list(p) for p in v.violations],
            "widths": list(widths(seq.points)),
            "layer_loads": [{"axis": p.axis, "offset": p.offset, "loads": list(p.loads)} for p in profiles],
        }
    )
    return EXIT_OK if v.exceptional else EXIT_NEGATIVE


def cmd_contaminate(args) -> int:
    seq, d = read_sequence_file(args.path)
    res = closure(seq.points, d, args.max_rounds)
    _emit(
        {
            "full": res.status == FULL,
            "status": res.status,
            "steps": res.steps,
            "flats_per_round": [len(u) for u in res.history],
        }
    )
    if args.frames:
        window = parse_window(args.window, seq.rank) if args.window else bounding_window(seq.points, 1)
        with open(args.frames, "w") as fh:
            for rec in frame_records(res, window):
                fh.write(json.dumps(rec) + "\n")
    if res.status == CAPPED:
        return EXIT_UNKNOWN
    return EXIT_OK if res.status == FULL else EXIT_NEGATIVE


def cmd_enumerate(args) -> int:
    if bool(args.grid) == bool(args.profile):
        raise InputError("give exactly one of --grid or --profile")
    try:
        profile = get_profile(args.profile or args.grid)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = Path(args.out) if args.out else None
    records = Path(args.records) if args.records else (out.with_suffix(".records.jsonl") if out else None)
    options = {
        "shards": args.shards,
        "workers": args.workers,
        "prune": not args.no_prune,
        "save_sequences": args.save_sequences,
        "resume": not args.no_resume,
    }
    t0 = time.perf_counter()
    try:
        rep = theorem_run(
            profile,
            shards=args.shards,
            workers=args.workers,
            prune=not args.no_prune,
            records=records,
            save_sequences=args.save_sequences,
            resume=not args.no_resume,
        )
    except SearchAborted as exc:
        print(json.dumps({"error": exc.reason, "points": exc.seq.as_lists()}), file=sys.stderr)
        return EXIT_UNKNOWN
    doc = report_document(rep, profile, options, time.perf_counter() - t0)
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(doc, indent=1) + "\n")
    summary = {k: doc[k] for k in ("profile", "sequences_found", "all_full", "max_steps", "step_histogram", "distribution_histogram")}
    _emit(summary)
    if not rep.all_full:
        for ce in rep.counterexamples:
            print(json.dumps({"not_full": ce}), file=sys.stderr)
        return EXIT_FALSIFIED
    return EXIT_OK


def cmd_label(args) -> int:
    seq, _ = read_sequence_file(args.path)
    try:
        lab = label(seq)
    except ValueError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_NEGATIVE
    _emit({"labeling": [list(v) for v in lab.order], "normalized": [list(v) for v in lab.normalized().order]})
    return EXIT_OK


def cmd_examples(args) -> int:
    try:
        seq = gallery.get(args.which, n=args.n, r=args.r)
    except (KeyError, ValueError) as exc:
        raise InputError(str(exc).strip("'\"")) from exc
    if args.out:
        write_sequence_file(args.out, seq)
    else:
        _emit(sequence_document(seq))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="excseq", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="exceptionality verdict, widths and layer loads")
    c.add_argument("path")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("contaminate", help="run the contamination closure")
    c.add_argument("path")
    c.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
    c.add_argument("--frames", help="write one JSON line per round to this file")
    c.add_argument("--window", help="raster window lo:hi,... (default: bounding box + 1)")
    c.set_defaults(func=cmd_contaminate)

    c = sub.add_parser("enumerate", help="enumerate and verify maximal sequences in a grid")
    c.add_argument("--grid", help="extents such as 4x4x4")
    c.add_argument("--profile", help="named profile, e.g. smoke_3d_3cube or full_theorem")
    c.add_argument("--out", help="report file (JSON)")
    c.add_argument("--records", help="append-only record file (default: next to --out)")
    c.add_argument("--shards", type=int, default=int(os.environ.get("EXCSEQ_SHARDS", "1")))
    c.add_argument("--workers", type=int, default=1, help="worker processes")
    c.add_argument("--no-prune", action="store_true", help="disable the layer-count pruners")
    c.add_argument("--save-sequences", action="store_true", help="write every sequence next to the records")
    c.add_argument("--no-resume", action="store_true", help="ignore finished units in the record file")
    c.set_defaults(func=cmd_enumerate)

    c = sub.add_parser("label", help="mod-2 labeling of a maximal sequence")
    c.add_argument("path")
    c.set_defaults(func=cmd_label)

    c = sub.add_parser("examples", help="write a named example as a sequence file")
    c.add_argument("--which", required=True, help=", ".join(gallery.names()))
    c.add_argument("--n", type=int, default=1, help="parameter of 'stretch'")
    c.add_argument("--r", type=int, default=3, help="rank of 'standard'")
    c.add_argument("--out")
    c.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(asctime)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
