"""Emotion-profile matching and group recommendation over MovieLens-style data."""

from .affect import (
    LABELS,
    EmotionLabel,
    EmotionVector,
    ItemProfile,
    UserProfile,
    aii,
    dominant_mood,
    inner,
    l1_normalize,
    mean_profile,
    update_uvec,
)

__version__ = "0.1.0"

__all__ = [
    "LABELS",
    "EmotionLabel",
    "EmotionVector",
    "ItemProfile",
    "UserProfile",
    "aii",
    "dominant_mood",
    "inner",
    "l1_normalize",
    "mean_profile",
    "update_uvec",
]
