"""Gesture-imitation game session engine.

Ingests 2D skeleton keypoint streams, filters detection artifacts,
matches exercise gestures against keyframe templates, and drives a
phased caregiver/participant interaction session with a coded scoring
rubric, recording and reporting each session.
"""

__version__ = "0.1.0"

from .errors import ImigameError  # noqa: F401
from .model import (  # noqa: F401
    AngleFeatures, Frame, Keypoint, NormalizedSkeleton, Skeleton,
    extract_features, mirror, normalize, similarity,
)
