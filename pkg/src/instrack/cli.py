"""Command-line pipelines: track, eval, eval-suite, difficulty, synth, split.

Exit codes: 0 success, 1 internal error, 2 input error, 3 empty evaluation.
All outputs are deterministic given identical inputs and seeds.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .difficulty import Level, parse_attribute_annotations, score
from .errors import (
    EmptyEvaluationError,
    InstrackError,
    ParseError,
    ProtocolError,
    ValidationError,
)
from .formats import (
    load_task,
    parse_gt,
    read_detections,
    split_frames,
    split_tasks,
    write_tracks,
)
from .metrics import aggregate, evaluate_task, render_report, report_to_json
from .synth import CorruptionSpec, SceneSpec, corrupt, emit_task, generate
from .tracker import TrackerConfig, make_propagator, run

_LEVEL_DIRS = ("easy", "medium", "meidum", "hard")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Configuration echo + input digests embedded in every report."""

    command: str
    config: dict
    inputs: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "tool": "instrack",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
        }


def _manifest(command: str, config: dict, input_paths: list[Path]) -> RunManifest:
    inputs = {str(p): _sha256(p) for p in sorted(input_paths, key=str) if p.is_file()}
    return RunManifest(command, config, inputs)


def _cmd_track(args) -> int:
    task = load_task(args.task)
    stream_path = Path(args.detections)
    if not stream_path.is_file():
        raise ValidationError(f"detection stream not found: {stream_path}")
    stream = read_detections(stream_path.read_text(encoding="utf-8"))
    propagator = make_propagator(args.propagator, timeout=args.propagator_timeout)
    config = TrackerConfig(
        max_age=args.max_age,
        iou_gate=args.gate,
        propagator=propagator,
        min_score=args.min_score,
        emit_propagated=args.emit_propagated,
    )
    try:
        trajectories = run(task.frame_paths, stream, config)
    finally:
        propagator.close()

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(
        write_tracks(trajectories, task.frame_names, include_extrapolated=args.emit_propagated),
        encoding="utf-8",
    )

    if args.overlay:
        overlay_lines = []
        for traj in trajectories:
            frames = dict(traj.committed)
            if args.emit_propagated:
                for frame, box in traj.extrapolated.items():
                    frames.setdefault(frame, box)
            for frame in sorted(frames):
                overlay_lines.append(
                    json.dumps(
                        {
                            "frame": frame,
                            "frame_name": task.frame_names[frame],
                            "track_id": traj.track_id,
                            "box": list(frames[frame].as_tuple()),
                        }
                    )
                )
        overlay_lines.sort()
        Path(args.overlay).write_text("\n".join(overlay_lines) + "\n", encoding="utf-8")

    manifest = _manifest(
        "track",
        {
            "max_age": args.max_age,
            "gate": args.gate,
            "propagator": args.propagator,
            "min_score": args.min_score,
            "emit_propagated": args.emit_propagated,
        },
        [stream_path, Path(args.task) / "description.txt"],
    )
    manifest_path = Path(args.manifest) if args.manifest else out_path.with_suffix(out_path.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"tracked {len(trajectories)} trajectories -> {out_path}")
    return 0


def _cmd_eval(args) -> int:
    task = load_task(args.task)
    pred_path = Path(args.pred)
    if not pred_path.is_file():
        raise ValidationError(f"prediction file not found: {pred_path}")
    predictions = parse_gt(pred_path.read_text(encoding="utf-8"))
    result = evaluate_task(task, predictions, tp_iou=args.tp_iou)
    report = aggregate([result], tp_iou=args.tp_iou)
    manifest = _manifest("eval", {"tp_iou": args.tp_iou}, [pred_path])
    _write_report(report, manifest, args, show_levels=False)
    return 0


def _discover_tasks(root: Path) -> list[Path]:
    """Task directories under a split root, leveled (easy/medium/hard) or flat."""
    if not root.is_dir():
        raise ValidationError(f"benchmark root not found: {root}")
    found: list[Path] = []
    level_dirs = [root / name for name in _LEVEL_DIRS if (root / name).is_dir()]
    search_dirs = level_dirs if level_dirs else [root]
    for directory in search_dirs:
        for child in sorted(directory.iterdir()):
            if child.is_dir() and (child / "description.txt").is_file():
                found.append(child)
    return found


def _cmd_eval_suite(args) -> int:
    root = Path(args.root)
    pred_root = Path(args.pred_root)
    task_dirs = _discover_tasks(root)
    if not task_dirs:
        raise EmptyEvaluationError(f"no instruction directories under {root}")

    skipped: list[str] = []
    jobs: list[tuple[Path, Path]] = []
    for task_dir in task_dirs:
        pred_path = pred_root / f"{task_dir.name}.txt"
        if pred_path.is_file():
            jobs.append((task_dir, pred_path))
        else:
            skipped.append(task_dir.name)
            print(f"warning: no prediction file for {task_dir.name}, skipped", file=sys.stderr)

    if not jobs:
        raise EmptyEvaluationError("no instruction had a prediction file")

    def evaluate_one(entry: tuple[Path, Path]):
        task_dir, pred_path = entry
        task = load_task(task_dir)
        predictions = parse_gt(pred_path.read_text(encoding="utf-8"))
        return evaluate_task(task, predictions, tp_iou=args.tp_iou)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(evaluate_one, jobs))
    else:
        results = [evaluate_one(job) for job in jobs]

    report = aggregate(results, tp_iou=args.tp_iou)
    manifest = _manifest(
        "eval-suite",
        {"tp_iou": args.tp_iou, "by_level": args.by_level, "skipped": sorted(skipped)},
        [pred for _, pred in jobs],
    )
    _write_report(report, manifest, args, show_levels=args.by_level or bool(report.by_level))
    return 0


def _write_report(report, manifest: RunManifest, args, show_levels: bool) -> None:
    text = render_report(report, show_levels=show_levels)
    if getattr(args, "report", None):
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if getattr(args, "json", None):
        Path(args.json).write_text(
            report_to_json(report, manifest.to_dict()), encoding="utf-8"
        )


def _cmd_difficulty(args) -> int:
    attrs_path = Path(args.attrs)
    if not attrs_path.is_file():
        raise ValidationError(f"attribute annotation file not found: {attrs_path}")
    annotations = parse_attribute_annotations(attrs_path.read_text(encoding="utf-8"))
    if not annotations:
        raise ValidationError(f"no annotations in {attrs_path}")
    rows = []
    for annotation in annotations:
        result = score(list(annotation.tags))
        rows.append((annotation.task_id, result.total, result.level.value))
    print(f"{'task_id':<40} {'total':>5} level")
    for task_id, total, level in rows:
        print(f"{task_id:<40} {total:>5} {level}")
    if args.json:
        payload = [
            {"task_id": task_id, "total": total, "level": level} for task_id, total, level in rows
        ]
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return 0


def _parse_canvas(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise ValidationError(f"canvas must look like 1280x720, got {text!r}") from exc


def _cmd_synth(args) -> int:
    spec = SceneSpec(
        n_objects=args.objects,
        n_frames=args.frames,
        canvas=_parse_canvas(args.canvas),
        lateral_amplitude=args.lateral,
        window_fraction=args.window_fraction,
        seed=args.seed,
    )
    scene = generate(spec)
    corruption = CorruptionSpec(
        miss_prob=args.miss,
        fp_rate=args.fp,
        jitter_sigma=args.jitter,
        fragment_prob=args.fragment_prob,
        fragment_gap=args.fragment_gap,
        seed=args.seed,
    )
    stream = corrupt(scene, corruption)
    level = Level(args.level) if args.level else None
    task_id = args.name or f"synth_scene_{args.seed:04d}_conversation0"
    task_dir = emit_task(args.out, scene, task_id, level=level, detections=stream)
    print(f"wrote {task_dir} ({len(scene.gt)} gt boxes, {stream.total_boxes()} detections)")
    return 0


def _cmd_split(args) -> int:
    if args.task_list:
        names = [
            line.strip()
            for line in Path(args.task_list).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        train, test = split_tasks(names, args.fraction)
        print(f"train ({len(train)}): " + ", ".join(train))
        print(f"test ({len(test)}): " + ", ".join(test))
        return 0
    if args.frames is None:
        raise ValidationError("provide --frames N or --task-list FILE")
    train, test = split_frames(args.frames, args.fraction)

    def span(r: range) -> str:
        return f"{r.start}..{r.stop - 1}" if len(r) else "(empty)"

    print(f"train {span(train)}, test {span(test)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="instrack",
        description="Instruction-scoped multi-object tracking pipelines and evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"instrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="run the tracker over a detection stream")
    p_track.add_argument("--task", required=True, help="instruction task directory")
    p_track.add_argument("--detections", required=True, help="detection stream (jsonl)")
    p_track.add_argument("--out", required=True, help="track output file (gt-format lines)")
    p_track.add_argument("--max-age", type=int, default=10)
    p_track.add_argument("--gate", type=float, default=0.3)
    p_track.add_argument("--propagator", default="persist", help="persist | cv | extern:<command>")
    p_track.add_argument("--propagator-timeout", type=float, default=30.0)
    p_track.add_argument("--min-score", type=float, default=None)
    p_track.add_argument("--emit-propagated", action="store_true")
    p_track.add_argument("--overlay", default=None, help="per-frame box/id records (jsonl)")
    p_track.add_argument("--manifest", default=None)
    p_track.set_defaults(func=_cmd_track)

    p_eval = sub.add_parser("eval", help="evaluate one instruction")
    p_eval.add_argument("--task", required=True)
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--tp-iou", type=float, default=0.5)
    p_eval.add_argument("--report", default=None, help="write the text report here instead of stdout")
    p_eval.add_argument("--json", default=None, help="machine-readable report path")
    p_eval.set_defaults(func=_cmd_eval)

    p_suite = sub.add_parser("eval-suite", help="evaluate a whole split root")
    p_suite.add_argument("--root", required=True, help="split root (contains level dirs or tasks)")
    p_suite.add_argument("--pred-root", required=True, help="directory of <task_id>.txt predictions")
    p_suite.add_argument("--tp-iou", type=float, default=0.5)
    p_suite.add_argument("--by-level", action="store_true")
    p_suite.add_argument("--jobs", type=int, default=1)
    p_suite.add_argument("--report", default=None)
    p_suite.add_argument("--json", default=None)
    p_suite.set_defaults(func=_cmd_eval_suite)

    p_diff = sub.add_parser("difficulty", help="score attribute annotations")
    p_diff.add_argument("--attrs", required=True, help="attribute annotations (jsonl)")
    p_diff.add_argument("--json", default=None)
    p_diff.set_defaults(func=_cmd_difficulty)

    p_synth = sub.add_parser("synth", help="generate a synthetic benchmark task")
    p_synth.add_argument("--objects", type=int, required=True)
    p_synth.add_argument("--frames", type=int, required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--canvas", default="1280x720")
    p_synth.add_argument("--miss", type=float, default=0.0)
    p_synth.add_argument("--fp", type=float, default=0.0)
    p_synth.add_argument("--jitter", type=float, default=0.0)
    p_synth.add_argument("--fragment-prob", type=float, default=0.0)
    p_synth.add_argument("--fragment-gap", type=int, default=5)
    p_synth.add_argument("--lateral", type=float, default=0.0)
    p_synth.add_argument("--window-fraction", type=float, default=0.0)
    p_synth.add_argument("--level", choices=[lv.value for lv in Level], default=None)
    p_synth.add_argument("--name", default=None)
    p_synth.set_defaults(func=_cmd_synth)

    p_split = sub.add_parser("split", help="train/test split rule")
    p_split.add_argument("--frames", type=int, default=None)
    p_split.add_argument("--task-list", default=None)
    p_split.add_argument("--fraction", type=float, default=0.4)
    p_split.set_defaults(func=_cmd_split)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptyEvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ParseError, ProtocolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InstrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal faults
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
