"""Bridge commands: render prompts, serve the propagator protocol, emit
detection streams from a (stub) detector backend."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .boxparse import COORD_MODES
from .detect import write_detection_stream
from .models import LinearStubDetector, make_model
from .prompts import PromptFamily, render_prompt
from .server import serve


def _cmd_prompt(args) -> int:
    print(render_prompt(args.family, args.instruction))
    return 0


def _cmd_serve(args) -> int:
    return serve(make_model(args.model))


def _parse_stub_box(text: str):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 6:
        raise ValueError(f"stub box needs x1,y1,x2,y2,vx,vy: {text!r}")
    return (parts[0], parts[1], parts[2], parts[3]), (parts[4], parts[5])


def _cmd_detect(args) -> int:
    w, h = (int(v) for v in args.dims.lower().split("x"))
    backend = LinearStubDetector([_parse_stub_box(s) for s in args.stub_box])
    skipped = write_detection_stream(
        args.out, backend, args.instruction, args.frames, (w, h),
        family=args.family, coord_mode=args.coord_mode,
    )
    print(f"wrote {args.frames} frames to {args.out} ({skipped} fragments skipped)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlmbridge",
        description="Vision-language detector and mask-propagator bridge.",
    )
    parser.add_argument("--version", action="version", version=f"vlmbridge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_prompt = sub.add_parser("prompt", help="render a detection prompt")
    p_prompt.add_argument("--family", required=True,
                          choices=[f.value for f in PromptFamily])
    p_prompt.add_argument("--instruction", required=True)
    p_prompt.set_defaults(func=_cmd_prompt)

    p_serve = sub.add_parser("serve", help="speak the propagator protocol on stdio")
    p_serve.add_argument("--model", default="static",
                         help="translate:<vx>,<vy> | static | empty")
    p_serve.set_defaults(func=_cmd_serve)

    p_detect = sub.add_parser("detect", help="emit a detection stream from the stub detector")
    p_detect.add_argument("--instruction", required=True)
    p_detect.add_argument("--frames", type=int, required=True)
    p_detect.add_argument("--dims", default="1280x720")
    p_detect.add_argument("--family", default=PromptFamily.LLAVA_STYLE.value,
                          choices=[f.value for f in PromptFamily])
    p_detect.add_argument("--coord-mode", default="auto", choices=COORD_MODES)
    p_detect.add_argument("--stub-box", action="append", default=[],
                          help="x1,y1,x2,y2,vx,vy (repeatable)")
    p_detect.add_argument("--out", required=True)
    p_detect.set_defaults(func=_cmd_detect)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
