"""Instruction-scoped multi-object tracking toolkit: geometry, benchmark formats,
gated Hungarian association, online trajectory lifecycle, instruction-averaged
metrics, difficulty scoring, and synthetic scene generation."""

__version__ = "0.1.0"

from .assignment import AssignmentResult, Match, build_cost_matrix, solve
from .difficulty import (
    AttributeTag,
    Category,
    DifficultyResult,
    Level,
    rulebook,
    score,
)
from .errors import (
    ConsistencyError,
    EmptyEvaluationError,
    InstrackError,
    LoadError,
    ParseError,
    ProtocolError,
    SequencingError,
    ValidationError,
)
from .formats import (
    DetectionStream,
    GtRecord,
    InstructionTask,
    format_gt,
    load_task,
    parse_gt,
    read_detections,
    split_frames,
    split_tasks,
    write_detections,
    write_tracks,
)
from .geometry import BinaryMask, BoundingBox, Detection, iou, iou_matrix, mask_to_box
from .metrics import (
    InstructionCounts,
    InstructionResult,
    MetricsReport,
    aggregate,
    evaluate_instruction,
    evaluate_task,
    idf1,
    match_frames,
    mota,
    render_report,
)
from .synth import CorruptionSpec, ObjectMotion, Scene, SceneSpec, corrupt, emit_task, generate
from .tracker import (
    ConstantVelocityPropagator,
    ExternalPropagator,
    OnlineTracker,
    PersistencePropagator,
    Propagator,
    TrackerConfig,
    Trajectory,
    run,
    trajectory_update,
)
