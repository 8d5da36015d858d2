"""Propagator protocol server: newline-delimited JSON over stdin/stdout.

Handshake `{"op": "hello", "protocol": 1}` in each direction, then exactly one
response per predict request, in order. Model failures and empty masks reply
with a null box; the tracker side treats that as "fall back to persistence".
"""

from __future__ import annotations

import json
import sys

from .models import PropagationModel, mask_bounds

PROTOCOL_VERSION = 1


def serve(model: PropagationModel, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    hello_line = stdin.readline()
    if not hello_line:
        return 1
    try:
        hello = json.loads(hello_line)
    except json.JSONDecodeError:
        return 1
    if hello.get("op") != "hello" or hello.get("protocol") != PROTOCOL_VERSION:
        return 1
    stdout.write(json.dumps({"op": "hello", "protocol": PROTOCOL_VERSION}) + "\n")
    stdout.flush()

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            continue
        if request.get("op") != "predict":
            continue
        track_id = request.get("track_id")
        try:
            mask = model.propagate(
                int(request["init_frame"]),
                tuple(float(v) for v in request["init_box"]),
                list(request.get("history_frames", [])),
                str(request.get("current_frame", "")),
            )
            box = mask_bounds(mask)
        except Exception:
            box = None
        reply = {"track_id": track_id, "box": list(box) if box is not None else None}
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()
    return 0
