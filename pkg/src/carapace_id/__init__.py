"""Individual sea turtle identification from carapace crops.

HOG template descriptors are matched against a gallery with a nearest
neighbour distance ratio rule; an ORB-style keypoint pipeline serves as
the baseline, and :mod:`carapace_id.evaluation` runs the cross-validated
ROC / confusion-matrix protocol.
"""

from ._kernels import BACKEND
from .dataset import RoiRect, SampleRecord, dataset_stats, load_image, load_manifest, write_manifest
from .evaluation import (
    average_accuracy,
    build_confusion,
    compute_rates,
    make_folds,
    random_guess_baseline,
    sweep_thresholds,
)
from .hog import HogDescriptor, HogParams, compute_hog, descriptor_len, hog_distance
from .imgproc import crop_roi, gaussian_kernel, gaussian_smooth, resize, rotate, to_grayscale
from .keypoints import describe_brief, detect_fast, keypoint_image_score, match_keypoints
from .nndr import MANY, GalleryEntry, classify, nndr_score, outcome

__version__ = "0.1.0"
