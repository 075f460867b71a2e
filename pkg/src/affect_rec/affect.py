"""Emotion vectors and the similarity math built on them.

Every profile in the package, whether it belongs to a user or an item, is a
7-component nonnegative vector over a fixed label set. Closeness between two
profiles is their cosine similarity, called the affective index indicator
(AII) throughout.
"""

from __future__ import annotations

import enum
import math
import operator
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Optional, Sequence

from .errors import EmptyList, ZeroVector

N_EMOTIONS = 7


class EmotionLabel(enum.IntEnum):
    NEUTRAL = 0
    HAPPINESS = 1
    SADNESS = 2
    HATE = 3
    ANGER = 4
    DISGUST = 5
    SURPRISE = 6

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "EmotionLabel":
        """Parse a mood label, accepting the short column spellings too."""
        key = text.strip().lower()
        key = _LABEL_ALIASES.get(key, key)
        try:
            return cls[key.upper()]
        except KeyError:
            raise ValueError(f"unknown emotion label {text!r}") from None


_LABEL_ALIASES = {"happy": "happiness", "joy": "happiness", "sad": "sadness"}

LABELS: tuple[str, ...] = tuple(e.label for e in EmotionLabel)


@dataclass(frozen=True)
class EmotionVector:
    """Seven nonnegative affect weights in canonical label order.

    The constructor validates shape and sign only. Use :func:`l1_normalize`
    when the input has to become a probability distribution; published
    profiles are stored as given so their rounded digits survive.
    """

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if len(vals) != N_EMOTIONS:
            raise ValueError(f"expected {N_EMOTIONS} components, got {len(vals)}")
        for v in vals:
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"emotion components must be finite and >= 0, got {v!r}")
        object.__setattr__(self, "values", vals)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __len__(self) -> int:
        return N_EMOTIONS

    def __getitem__(self, idx: int) -> float:
        return self.values[idx]

    def scaled(self, c: float) -> "EmotionVector":
        return EmotionVector(tuple(c * v for v in self.values))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(LABELS, self.values))

    @classmethod
    def zeros(cls) -> "EmotionVector":
        return cls((0.0,) * N_EMOTIONS)


def _raw(x: Sequence[float]) -> Sequence[float]:
    return x.values if isinstance(x, EmotionVector) else x


def inner(x: Sequence[float], y: Sequence[float]) -> float:
    """Dot product of two 7-vectors, summed in label order."""
    return sum(map(operator.mul, _raw(x), _raw(y)))


def norm(x: Sequence[float]) -> float:
    return math.sqrt(inner(x, x))


def aii(x: Sequence[float], y: Sequence[float]) -> float:
    """Cosine similarity of two emotion profiles.

    The expression is symmetric term by term (products and the norm product
    commute exactly in IEEE arithmetic), so ``aii(x, y) == aii(y, x)``
    bit for bit. The result is clipped to 1.0 to absorb rounding on
    self-comparisons.

    Raises:
        ZeroVector: if either argument has zero norm.
    """
    nx = norm(x)
    ny = norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ZeroVector("cannot compare against an all-zero emotion profile")
    sim = inner(x, y) / (nx * ny)
    return min(sim, 1.0)


def aii_many(x: Sequence[float], ys: Iterable[Sequence[float]]) -> list[float]:
    """``[aii(x, y) for y in ys]`` with the norm of ``x`` computed once.

    Same operations in the same order, so results match :func:`aii` exactly.
    """
    x = _raw(x)
    nx = norm(x)
    if nx == 0.0:
        raise ZeroVector("cannot compare against an all-zero emotion profile")
    out = []
    for y in ys:
        y = _raw(y)
        ny = math.sqrt(sum(map(operator.mul, y, y)))
        if ny == 0.0:
            raise ZeroVector("cannot compare against an all-zero emotion profile")
        out.append(min(sum(map(operator.mul, x, y)) / (nx * ny), 1.0))
    return out


def l1_normalize(raw: Iterable[float]) -> EmotionVector:
    vals = [float(v) for v in raw]
    if len(vals) != N_EMOTIONS:
        raise ValueError(f"expected {N_EMOTIONS} components, got {len(vals)}")
    if any(v < 0.0 for v in vals):
        raise ValueError("emotion components must be >= 0")
    total = math.fsum(vals)
    if total == 0.0:
        raise ZeroVector("cannot normalize an all-zero emotion row")
    return EmotionVector(tuple(v / total for v in vals))


def mean_profile(vectors: Iterable[Sequence[float]]) -> EmotionVector:
    """Componentwise arithmetic mean, accumulated with ``math.fsum``."""
    vs = list(vectors)
    if not vs:
        raise EmptyList("mean of an empty profile list")
    n = len(vs)
    return EmotionVector(tuple(math.fsum(v[i] for v in vs) / n for i in range(N_EMOTIONS)))


def dominant_mood(v: Sequence[float]) -> EmotionLabel:
    best = 0
    for i in range(1, N_EMOTIONS):
        if v[i] > v[best]:
            best = i
    return EmotionLabel(best)


@dataclass(frozen=True)
class ItemProfile:
    """An item's emotion profile (MVEC). Immutable once built."""

    item_id: Hashable
    mvec: EmotionVector
    tmdb_id: Optional[int] = None
    imdb_id: Optional[int] = None
    vote_count: Optional[int] = None
    title: Optional[str] = None

    def __post_init__(self) -> None:
        if self.vote_count is not None and self.vote_count < 0:
            raise ValueError("vote_count must be nonnegative")

    @property
    def mood(self) -> EmotionLabel:
        return dominant_mood(self.mvec)


@dataclass(frozen=True)
class UserProfile:
    """A user's emotion profile (UVEC): the mean MVEC of watched items."""

    user_id: Hashable
    uvec: EmotionVector
    watch_count: int

    @classmethod
    def empty(cls, user_id: Hashable) -> "UserProfile":
        return cls(user_id, EmotionVector.zeros(), 0)


def update_uvec(profile: UserProfile, new_item: ItemProfile) -> UserProfile:
    """Fold one more watched item into a user's running mean."""
    n = profile.watch_count
    if n == 0:
        return UserProfile(profile.user_id, new_item.mvec, 1)
    vals = tuple(
        (n * u + m) / (n + 1) for u, m in zip(profile.uvec.values, new_item.mvec.values)
    )
    return UserProfile(profile.user_id, EmotionVector(vals), n + 1)
