"""Online tracking state machine: propagate live trajectories, associate incoming
detections by gated IoU matching, then apply the lifecycle update."""

from __future__ import annotations

import json
import os
import select
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .assignment import build_cost_matrix, solve
from .errors import ConsistencyError, ProtocolError, SequencingError, ValidationError
from .formats import DetectionStream
from .geometry import BoundingBox, Detection, box_from_sequence

PROTOCOL_VERSION = 1


@dataclass
class Trajectory:
    """Identity-carrying track.

    `committed` holds only boxes from the creation frame or detection matches;
    propagator predictions are never committed (they may be recorded in
    `extrapolated` when the opt-in emit mode is on, kept separate so the output
    trajectory stays faithful to what was matched).
    """

    track_id: int
    first_frame: int
    first_box: BoundingBox
    committed: dict[int, BoundingBox]
    last_matched_frame: int
    last_matched_box: BoundingBox
    extrapolated: dict[int, BoundingBox] = field(default_factory=dict)

    @classmethod
    def create(cls, track_id: int, frame: int, box: BoundingBox) -> "Trajectory":
        return cls(
            track_id=track_id,
            first_frame=frame,
            first_box=box,
            committed={frame: box},
            last_matched_frame=frame,
            last_matched_box=box,
        )

    def age_at(self, frame: int) -> int:
        """Frames since the last detection match."""
        return frame - self.last_matched_frame


class Propagator:
    """Predicts a live trajectory's box in the current frame.

    Implementations must not mutate the trajectory; `frame_context` is the
    frame-path list covering the trajectory's lifetime up to and including the
    current frame (the paths are passed through opaquely, never decoded here).
    """

    name = "base"

    def predict(
        self, trajectory: Trajectory, current_frame: int, frame_context: Sequence[str]
    ) -> BoundingBox | None:
        raise NotImplementedError

    def close(self) -> None:
        pass


class PersistencePropagator(Propagator):
    """Predicts the last matched box, unchanged."""

    name = "persist"

    def predict(self, trajectory, current_frame, frame_context):
        return trajectory.last_matched_box


class ConstantVelocityPropagator(Propagator):
    """Extrapolates the last box by the mean per-frame displacement of the last
    two committed boxes; falls back to persistence with fewer than two."""

    name = "cv"

    def predict(self, trajectory, current_frame, frame_context):
        frames = sorted(trajectory.committed)
        if len(frames) < 2:
            return trajectory.last_matched_box
        f1, f2 = frames[-2], frames[-1]
        b1, b2 = trajectory.committed[f1], trajectory.committed[f2]
        gap = f2 - f1
        vx = (b2.x1 - b1.x1) / gap
        vy = (b2.y1 - b1.y1) / gap
        dt = current_frame - f2
        return b2.translate(vx * dt, vy * dt)


class _LineChannel:
    """Timeout-guarded line reader over a child's stdout file descriptor."""

    def __init__(self, stream, timeout: float):
        self._fd = stream.fileno()
        self._timeout = timeout
        self._buffer = b""

    def read_line(self) -> str:
        while b"\n" not in self._buffer:
            ready, _, _ = select.select([self._fd], [], [], self._timeout)
            if not ready:
                raise TimeoutError(f"no response within {self._timeout}s")
            chunk = os.read(self._fd, 65536)
            if not chunk:
                raise EOFError("propagator process closed its output")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line.decode("utf-8")


class ExternalPropagator(Propagator):
    """Speaks the line protocol to a child process over its standard streams.

    Startup handshake is `{"op": "hello", "protocol": 1}` in each direction;
    afterwards one predict request maps to exactly one response, in order. Any
    failure (timeout, malformed reply, dead process) yields None for that
    prediction so the tracker can fall back to persistence; hard channel
    failures mark the propagator broken for the rest of the run.
    """

    name = "extern"

    def __init__(self, command: str, timeout: float = 30.0):
        argv = shlex.split(command)
        if not argv:
            raise ValidationError("empty external propagator command")
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, bufsize=0
            )
        except OSError as exc:
            raise ProtocolError(f"cannot start propagator {command!r}: {exc}") from exc
        self._channel = _LineChannel(self._proc.stdout, timeout)
        self._broken = False
        self.failures = 0
        try:
            self._send({"op": "hello", "protocol": PROTOCOL_VERSION})
            reply = json.loads(self._channel.read_line())
        except (TimeoutError, EOFError, OSError, json.JSONDecodeError) as exc:
            self.close()
            raise ProtocolError(f"propagator handshake failed: {exc}") from exc
        if reply.get("op") != "hello" or reply.get("protocol") != PROTOCOL_VERSION:
            self.close()
            raise ProtocolError(f"unexpected handshake reply: {reply!r}")

    def _send(self, obj: dict) -> None:
        self._proc.stdin.write((json.dumps(obj) + "\n").encode("utf-8"))
        self._proc.stdin.flush()

    def predict(self, trajectory, current_frame, frame_context):
        if self._broken:
            return None
        context = list(frame_context)
        request = {
            "op": "predict",
            "track_id": trajectory.track_id,
            "init_frame": trajectory.first_frame,
            "init_box": list(trajectory.first_box.as_tuple()),
            "history_frames": context[:-1],
            "current_frame": context[-1] if context else "",
        }
        try:
            self._send(request)
            reply = json.loads(self._channel.read_line())
        except (TimeoutError, EOFError, OSError, json.JSONDecodeError):
            # Channel state is unknown after an I/O fault; stop using it.
            self._broken = True
            self.failures += 1
            return None
        if reply.get("track_id") != trajectory.track_id:
            self._broken = True
            self.failures += 1
            return None
        box_values = reply.get("box")
        if box_values is None:
            self.failures += 1
            return None
        try:
            return box_from_sequence(box_values)
        except (ValidationError, TypeError):
            self.failures += 1
            return None

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


BUILTIN_PROPAGATORS: dict[str, Callable[[], Propagator]] = {
    "persist": PersistencePropagator,
    "cv": ConstantVelocityPropagator,
}


def make_propagator(spec: str, timeout: float = 30.0) -> Propagator:
    """Build a propagator from a CLI-style spec: persist | cv | extern:<command>."""
    if spec in BUILTIN_PROPAGATORS:
        return BUILTIN_PROPAGATORS[spec]()
    if spec.startswith("extern:"):
        return ExternalPropagator(spec[len("extern:"):], timeout=timeout)
    raise ValidationError(f"unknown propagator {spec!r} (use persist, cv, or extern:<command>)")


@dataclass
class TrackerConfig:
    max_age: int = 10
    iou_gate: float = 0.3
    propagator: Propagator = field(default_factory=PersistencePropagator)
    min_score: float | None = None
    emit_propagated: bool = False

    def __post_init__(self) -> None:
        if self.max_age < 1:
            raise ValidationError(f"max_age must be >= 1, got {self.max_age}")
        if not (0.0 <= self.iou_gate <= 1.0):
            raise ValidationError(f"iou_gate must lie in [0, 1], got {self.iou_gate}")


def trajectory_update(
    matched: Sequence[tuple[Trajectory, BoundingBox]],
    unmatched_tracks: Sequence[Trajectory],
    unmatched_detections: Sequence[BoundingBox],
    current_frame: int,
    max_age: int,
    allocate_id: Callable[[], int],
) -> list[Trajectory]:
    """Lifecycle transition for one frame.

    Matched trajectories commit the matching detection box at the current frame
    and advance their last-matched bookkeeping; every unmatched detection spawns
    one new trajectory anchored at (current_frame, box); an unmatched trajectory
    survives exactly while current_frame - last_matched_frame <= max_age, with
    its last-matched state untouched.
    """
    output: list[Trajectory] = []
    for trajectory, box in matched:
        trajectory.committed[current_frame] = box
        trajectory.last_matched_frame = current_frame
        trajectory.last_matched_box = box
        output.append(trajectory)
    for box in unmatched_detections:
        output.append(Trajectory.create(allocate_id(), current_frame, box))
    for trajectory in unmatched_tracks:
        if current_frame - trajectory.last_matched_frame <= max_age:
            output.append(trajectory)
    return output


class OnlineTracker:
    """Strictly frame-ordered tracker over one instruction's video."""

    def __init__(self, config: TrackerConfig, frame_paths: Sequence[str] | None = None):
        self.config = config
        self.frame_paths = list(frame_paths) if frame_paths is not None else None
        self.live: list[Trajectory] = []
        self.retired: list[Trajectory] = []
        self.dropped_detections = 0
        self.propagator_failures = 0
        self._next_id = 1
        self._last_frame: int | None = None

    def _allocate_id(self) -> int:
        track_id = self._next_id
        self._next_id += 1
        return track_id

    def _context_for(self, trajectory: Trajectory, frame: int) -> list[str]:
        if self.frame_paths is not None:
            return self.frame_paths[trajectory.first_frame : frame + 1]
        return [f"{i:06d}" for i in range(trajectory.first_frame, frame + 1)]

    def _predict(self, trajectory: Trajectory, frame: int) -> BoundingBox:
        try:
            box = self.config.propagator.predict(
                trajectory, frame, self._context_for(trajectory, frame)
            )
        except Exception:
            box = None
        if box is None:
            self.propagator_failures += 1
            box = trajectory.last_matched_box
        return box

    def step(self, frame: int, detections: Sequence[Detection]) -> list[Trajectory]:
        """Run propagate -> cost matrix -> matching -> lifecycle update for one frame."""
        if self._last_frame is not None and frame <= self._last_frame:
            raise SequencingError(
                f"frame {frame} not after previously stepped frame {self._last_frame}"
            )
        for det in detections:
            if det.frame_index != frame:
                raise SequencingError(
                    f"detection at frame {det.frame_index} fed to step({frame})"
                )

        usable: list[Detection] = []
        for det in detections:
            if det.box.area <= 0:
                self.dropped_detections += 1
                continue
            if (
                self.config.min_score is not None
                and det.score is not None
                and det.score < self.config.min_score
            ):
                self.dropped_detections += 1
                continue
            usable.append(det)

        predictions = [self._predict(traj, frame) for traj in self.live]
        cost = build_cost_matrix([d.box for d in usable], predictions)
        result = solve(cost, self.config.iou_gate)

        matched = [
            (self.live[m.track_index], usable[m.detection_index].box) for m in result.matches
        ]
        unmatched_tracks = [self.live[k] for k in result.unmatched_tracks]
        unmatched_boxes = [usable[k].box for k in result.unmatched_detections]

        survivors = trajectory_update(
            matched, unmatched_tracks, unmatched_boxes, frame, self.config.max_age, self._allocate_id
        )

        if self.config.emit_propagated:
            surviving_unmatched = {
                t.track_id for t in survivors if t.last_matched_frame != frame
            }
            for traj, prediction in zip(self.live, predictions):
                if traj.track_id in surviving_unmatched:
                    traj.extrapolated[frame] = prediction

        survivor_ids = {t.track_id for t in survivors}
        self.retired.extend(t for t in self.live if t.track_id not in survivor_ids)
        self.live = sorted(survivors, key=lambda t: t.track_id)
        self._last_frame = frame
        return list(self.live)

    def all_trajectories(self) -> list[Trajectory]:
        """Every trajectory ever created, retired ones included, by id."""
        return sorted(self.retired + self.live, key=lambda t: t.track_id)


def run(
    frame_paths: Sequence[str],
    stream: DetectionStream,
    config: TrackerConfig,
) -> list[Trajectory]:
    """Drive the tracker over a full sequence; frames absent from the stream are
    zero-detection frames. Returns every trajectory created during the run."""
    n_frames = len(frame_paths)
    if n_frames == 0:
        raise ValidationError("cannot track an empty frame list")
    if stream.max_frame() >= n_frames:
        raise ConsistencyError(
            f"detection stream reaches frame {stream.max_frame()}, "
            f"but the task has only {n_frames} frames"
        )
    tracker = OnlineTracker(config, frame_paths)
    for frame in range(n_frames):
        tracker.step(frame, stream.detections_at(frame))
    return tracker.all_trajectories()
