"""Egocentric 3-D instance tracking toolkit.

Capabilities: pinhole back-projection and projection, enrollment
templates with cosine-similarity proposal matching, a size-1 location
memory with optional constant-velocity Kalman smoothing and relocation
resets, the full 3-D/2-D evaluation protocol, bit-exact dataset file
formats, and a synthetic egocentric scene simulator for desk-scale
experiments.
"""

from .errors import (
    BehindCameraError,
    DataIOError,
    DataValidationError,
    DegenerateRayError,
    DegenerateTemplateError,
    DimensionMismatchError,
    Ego3DTrackError,
    EvaluationError,
    FormatError,
    GeometryError,
    InvalidDepthError,
    OutOfBoundsError,
    SceneSpecError,
    TrackingError,
)
from .geometry import (
    CameraIntrinsics,
    CameraPose,
    DepthMap,
    angular_error,
    lift_to_world,
    project_to_pixel,
    sample_depth,
)
from .tracking import (
    MVPE,
    SVOE,
    KalmanState,
    Proposal,
    Template,
    TrackerConfig,
    TrackState,
    Trajectory,
    guided_2d_select,
    kalman_predict,
    kalman_step_with_reset,
    kalman_update,
    make_template,
    match_proposals,
    track_instance,
)
from .evaluation import (
    EvalConfig,
    GroundTruthInstance,
    Metrics2D,
    MetricsReport,
    accumulate_pr,
    bbox_iou,
    format_report_table,
    match_frame,
    metrics_2d,
    oracle_match_frame,
    paired_errors,
)
from .simulation import (
    CameraPathSpec,
    FrameBundle,
    InstanceSpec,
    Placement,
    SceneSpec,
    export_dataset,
    generate_scene,
    render_frame,
)

__version__ = "0.1.0"
