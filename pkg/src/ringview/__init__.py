"""ringview: circular viewpoint-estimation toolkit.

Core pieces: a Von Mises weighted SoftMax loss over a circular label space
(with exact analytic gradients), a deterministic rotated-glyph dataset for
end-to-end verification, render-job sampling, an augmentation pipeline
with replayable audits, label-histogram balancing, and circular evaluation
metrics. The ``ringview`` CLI chains them into reproducible experiments.
"""

from .circular import (
    CircularLabelSpace,
    KernelConfig,
    KernelVariant,
    WeightMatrix,
    bin_to_degrees,
    build_weight_matrix,
    circular_distance,
    degrees_to_bin,
    kernel_value,
    von_mises_weight,
)
from .errors import DivergenceError, InputError
from .loss import (
    LogitsBatch,
    LossValue,
    log_softmax,
    min_loss,
    softmax,
    weighted_softmax_gradient,
    weighted_softmax_loss,
)
from .manifest import DatasetManifest, ManifestRow, Source, read_manifest, write_manifest
from .metrics import (
    EvalReport,
    accuracy_by_bin,
    accuracy_entropy,
    circular_error_deg,
    evaluate,
    label_histogram,
    median_angular_error,
)

__version__ = "0.1.0"

__all__ = [
    "CircularLabelSpace",
    "KernelConfig",
    "KernelVariant",
    "WeightMatrix",
    "bin_to_degrees",
    "build_weight_matrix",
    "circular_distance",
    "degrees_to_bin",
    "kernel_value",
    "von_mises_weight",
    "DivergenceError",
    "InputError",
    "LogitsBatch",
    "LossValue",
    "log_softmax",
    "min_loss",
    "softmax",
    "weighted_softmax_gradient",
    "weighted_softmax_loss",
    "DatasetManifest",
    "ManifestRow",
    "Source",
    "read_manifest",
    "write_manifest",
    "EvalReport",
    "accuracy_by_bin",
    "accuracy_entropy",
    "circular_error_deg",
    "evaluate",
    "label_histogram",
    "median_angular_error",
    "__version__",
]
