"""gesturekit: few-shot hand gesture recognition on detector landmarks.

The pipeline: augment the input image per stage, retry landmark detection
on each stage, vectorize the first successful detection, gate it through a
prototype-similarity filter, and classify. Dynamic gestures are spotted
online by matching quantized centroid trajectories against templates.
"""

from .augment import (
    AugmentationSetting,
    AugmentationStage,
    Image,
    adjust_brightness,
    apply_stage,
    builtin_setting,
    rotate,
)
from .classify import (
    ClassId,
    KnnClassifier,
    LogisticRegressionClassifier,
    NearestCentroidClassifier,
    StaticClassifier,
    make_classes,
)
from .detection import (
    Detector,
    MockDetector,
    MockDetectorSpec,
    ReplayKey,
    ReplayStore,
    detect_with_augmentations,
    load_replay,
    load_sequence,
    replay_detector,
    save_replay,
)
from .errors import (
    DegenerateTrajectoryError,
    DimensionMismatchError,
    EmptyClassError,
    EmptyFrameError,
    GestureKitError,
    InsufficientSamplesError,
    InvalidCountsError,
    MissingContextError,
    NoHandDetectedError,
    NonFiniteLossError,
    NotFittedError,
    ReplayFormatError,
    UnknownSettingError,
    UnsupportedVersionError,
    ZeroVectorError,
)
from .evaluate import (
    ClassifierConfig,
    EvalReport,
    FilterConfig,
    NShotPlan,
    StaticDataset,
    VectorConfig,
    compute_metric,
    load_labels,
    load_static_dataset,
    run_nshot,
)
from .filtering import (
    Fusion,
    RepresentativeSet,
    Similarity,
    build_filter,
    classify,
    passes_filter,
)
from .landmarks import (
    FeatureVector,
    Hand,
    Handedness,
    Landmark,
    LandmarkFrame,
    strip_handedness,
    vectorize,
)
from .models import (
    StaticModel,
    load_dynamic_model,
    load_static_model,
    save_dynamic_model,
    save_static_model,
)
from .spotting import (
    Candidate,
    CandidateEngine,
    DynamicModel,
    GestureTemplate,
    SpotterConfig,
    SpotterState,
    candidate_step,
    fit_dynamic,
)
from .trajectory import (
    Direction,
    QuantizedTrajectory,
    TrajectoryPoint,
    centroid_trajectory,
    encode_trajectory,
    extract_keyframes,
    quantize_step,
    remove_outliers,
)

__version__ = "0.1.0"
