"""Loading MovieLens-style ratings and emotion-label files into datasets.

A :class:`Dataset` is the join of a ratings file with an emotion-label file:
only ratings whose movie carries an MVEC survive, and every surviving user
gets a UVEC equal to the mean MVEC of the movies they rated.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .affect import (
    LABELS,
    EmotionLabel,
    EmotionVector,
    ItemProfile,
    UserProfile,
    dominant_mood,
    l1_normalize,
    mean_profile,
)
from .errors import (
    DuplicateRating,
    EmptyJoin,
    MissingVoteCount,
    NegativeEmotion,
    ParseError,
    UnknownItem,
    UnknownUser,
    ZeroVector,
)

logger = logging.getLogger(__name__)

RATINGS_HEADER = ("userId", "movieId", "rating", "timestamp")
EMOTION_COLUMNS = ("neutral", "happy", "sad", "hate", "anger", "disgust", "surprise")
EMOTION_HEADER = ("tid", "mid", "iid", "mood") + EMOTION_COLUMNS


@dataclass(frozen=True)
class RatingRecord:
    user_id: int
    movie_id: int
    rating: float
    timestamp: int


@dataclass(frozen=True)
class EmotionRecord:
    tmdb_id: Optional[int]
    movie_id: int
    imdb_id: Optional[int]
    mood: EmotionLabel
    mvec: EmotionVector
    vote_count: Optional[int] = None

    @property
    def mood_mismatch(self) -> bool:
        """True when the printed mood differs from the vector's argmax."""
        return self.mood != dominant_mood(self.mvec)

    def to_item(self) -> ItemProfile:
        return ItemProfile(
            item_id=self.movie_id,
            mvec=self.mvec,
            tmdb_id=self.tmdb_id,
            imdb_id=self.imdb_id,
            vote_count=self.vote_count,
        )


@dataclass(frozen=True)
class DatasetStats:
    n_users: int = 0
    n_movies: int = 0
    n_ratings: int = 0
    n_emotion_labeled: int = 0
    n_ratings_dropped: int = 0
    n_users_dropped: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "n_users": self.n_users,
            "n_movies": self.n_movies,
            "n_ratings": self.n_ratings,
            "n_emotion_labeled": self.n_emotion_labeled,
            "n_ratings_dropped": self.n_ratings_dropped,
            "n_users_dropped": self.n_users_dropped,
        }


@dataclass(frozen=True)
class Dataset:
    """Immutable store of ratings, item profiles and user profiles.

    User and item ids are only meaningful inside one dataset; linking a user
    here to one elsewhere goes through :mod:`affect_rec.association`.
    """

    dataset_id: str
    ratings: tuple[RatingRecord, ...] = ()
    items: Mapping[Hashable, ItemProfile] = field(default_factory=dict)
    users: Mapping[Hashable, UserProfile] = field(default_factory=dict)
    watched: Mapping[Hashable, tuple[Hashable, ...]] = field(default_factory=dict)
    stats: DatasetStats = field(default_factory=DatasetStats)

    def __post_init__(self) -> None:
        for name in ("items", "users", "watched"):
            value = getattr(self, name)
            if not isinstance(value, MappingProxyType):
                object.__setattr__(self, name, MappingProxyType(dict(value)))
        object.__setattr__(self, "ratings", tuple(self.ratings))
        object.__setattr__(
            self,
            "_rating_index",
            {(r.user_id, r.movie_id): r.rating for r in self.ratings},
        )

    @classmethod
    def from_profiles(
        cls,
        dataset_id: str,
        users: Iterable[UserProfile] = (),
        items: Iterable[ItemProfile] = (),
    ) -> "Dataset":
        """Build a ratings-free dataset straight from precomputed profiles."""
        users = list(users)
        items = list(items)
        stats = DatasetStats(
            n_users=len(users),
            n_movies=len(items),
            n_emotion_labeled=len(items),
        )
        return cls(
            dataset_id=dataset_id,
            items={i.item_id: i for i in items},
            users={u.user_id: u for u in users},
            stats=stats,
        )

    def user(self, user_id: Hashable) -> UserProfile:
        try:
            return self.users[user_id]
        except KeyError:
            raise UnknownUser(f"user {user_id!r} not in dataset {self.dataset_id!r}") from None

    def item(self, item_id: Hashable) -> ItemProfile:
        try:
            return self.items[item_id]
        except KeyError:
            raise UnknownItem(f"item {item_id!r} not in dataset {self.dataset_id!r}") from None

    def rating(self, user_id: Hashable, item_id: Hashable) -> Optional[float]:
        return self._rating_index.get((user_id, item_id))  # type: ignore[attr-defined]

    def to_json_dict(self) -> dict[str, Any]:
        users = [
            {
                "user_id": u.user_id,
                "watch_count": u.watch_count,
                "uvec": list(u.uvec.values),
            }
            for _, u in sorted(self.users.items())
        ]
        items = []
        for _, it in sorted(self.items.items()):
            entry: dict[str, Any] = {
                "movie_id": it.item_id,
                "tmdb_id": it.tmdb_id,
                "mood": it.mood.label,
                "mvec": list(it.mvec.values),
            }
            if it.vote_count is not None:
                entry["vote_count"] = it.vote_count
            items.append(entry)
        return {
            "dataset_id": self.dataset_id,
            "stats": self.stats.as_dict(),
            "users": users,
            "items": items,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1) + "\n"


def dataset_from_json(doc: Mapping[str, Any]) -> Dataset:
    users = [
        UserProfile(u["user_id"], EmotionVector(tuple(u["uvec"])), int(u["watch_count"]))
        for u in doc.get("users", [])
    ]
    items = [
        ItemProfile(
            item_id=i["movie_id"],
            mvec=EmotionVector(tuple(i["mvec"])),
            tmdb_id=i.get("tmdb_id"),
            vote_count=i.get("vote_count"),
        )
        for i in doc.get("items", [])
    ]
    ds = Dataset.from_profiles(doc["dataset_id"], users, items)
    if "stats" in doc:
        ds = replace(ds, stats=DatasetStats(**doc["stats"]))
    return ds


def load_dataset_json(path: str | os.PathLike) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return dataset_from_json(json.load(fh))


class DatasetStore:
    """Datasets addressable by their short id, for cross-dataset queries."""

    def __init__(self, datasets: Iterable[Dataset] = ()):
        self._by_id: dict[str, Dataset] = {}
        for ds in datasets:
            self.add(ds)

    def add(self, ds: Dataset) -> None:
        if ds.dataset_id in self._by_id:
            raise ValueError(f"dataset id {ds.dataset_id!r} already registered")
        self._by_id[ds.dataset_id] = ds

    def __getitem__(self, dataset_id: str) -> Dataset:
        return self._by_id[dataset_id]

    def __contains__(self, dataset_id: object) -> bool:
        return dataset_id in self._by_id

    def __iter__(self):
        return iter(self._by_id.values())

    def __len__(self) -> int:
        return len(self._by_id)


# ---------------------------------------------------------------- parsing


def _open_csv(path: str | os.PathLike):
    if not os.path.exists(path):
        raise FileNotFoundError(str(path))
    return open(path, newline="", encoding="utf-8")


def _parse_int(text: str, line: int, path: str, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"bad integer {text!r} in column {column}", line, path) from None


def _parse_float(text: str, line: int, path: str, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"bad number {text!r} in column {column}", line, path) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r} in column {column}", line, path)
    return value


def load_ratings(path: str | os.PathLike) -> list[RatingRecord]:
    """Parse a ``userId,movieId,rating,timestamp`` file, keeping row order.

    Raises:
        ParseError: on a bad header, wrong field count or unparseable value.
        DuplicateRating: when a (user, movie) pair appears twice.
    """
    spath = str(path)
    records: list[RatingRecord] = []
    seen: set[tuple[int, int]] = set()
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return records
        if tuple(h.strip() for h in header) != RATINGS_HEADER:
            raise ParseError(f"expected header {','.join(RATINGS_HEADER)}", 1, spath)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", line, spath)
            user = _parse_int(row[0], line, spath, "userId")
            movie = _parse_int(row[1], line, spath, "movieId")
            rating = _parse_float(row[2], line, spath, "rating")
            if not (0.5 <= rating <= 5.0) or rating * 2 != int(rating * 2):
                raise ParseError(f"rating {rating} outside 0.5..5.0 in 0.5 steps", line, spath)
            ts = _parse_int(row[3], line, spath, "timestamp")
            if (user, movie) in seen:
                raise DuplicateRating(f"repeated rating for user {user}, movie {movie}", line, spath)
            seen.add((user, movie))
            records.append(RatingRecord(user, movie, rating, ts))
    return records


def load_emotion_labels(path: str | os.PathLike) -> list[EmotionRecord]:
    """Parse an emotion-label file with columns ``tid,mid,iid,mood`` plus the
    seven emotion columns. A leading index column and an optional
    ``vote_count`` column are accepted.

    Each emotion row is l1-normalized. A printed mood that disagrees with the
    row's argmax is logged and kept.
    """
    spath = str(path)
    records: list[EmotionRecord] = []
    seen: set[int] = set()
    mismatches = 0
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return records
        names = [h.strip().lower() for h in header]
        missing = [c for c in EMOTION_HEADER if c not in names]
        if missing:
            raise ParseError(f"missing columns {missing}", 1, spath)
        col = {name: names.index(name) for name in EMOTION_HEADER}
        vote_col = names.index("vote_count") if "vote_count" in names else None
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(names):
                raise ParseError(f"expected {len(names)} fields, got {len(row)}", line, spath)
            tid_text = row[col["tid"]].strip()
            iid_text = row[col["iid"]].strip()
            tmdb_id = _parse_int(tid_text, line, spath, "tid") if tid_text else None
            movie_id = _parse_int(row[col["mid"]], line, spath, "mid")
            imdb_id = _parse_int(iid_text, line, spath, "iid") if iid_text else None
            try:
                mood = EmotionLabel.parse(row[col["mood"]])
            except ValueError as exc:
                raise ParseError(str(exc), line, spath) from None
            raw = [_parse_float(row[col[c]], line, spath, c) for c in EMOTION_COLUMNS]
            for c, v in zip(EMOTION_COLUMNS, raw):
                if v < 0:
                    raise NegativeEmotion(f"negative {c} value {v}", line, spath)
            try:
                mvec = l1_normalize(raw)
            except ZeroVector:
                raise ParseError("all emotion values are zero", line, spath) from None
            vote_count = None
            if vote_col is not None and row[vote_col].strip():
                vote_count = _parse_int(row[vote_col], line, spath, "vote_count")
            if movie_id in seen:
                raise ParseError(f"duplicate movie id {movie_id}", line, spath)
            seen.add(movie_id)
            rec = EmotionRecord(tmdb_id, movie_id, imdb_id, mood, mvec, vote_count)
            if rec.mood_mismatch:
                mismatches += 1
                logger.warning(
                    "%s:%d: mood column says %s but argmax is %s",
                    spath, line, mood.label, dominant_mood(mvec).label,
                )
            records.append(rec)
    if mismatches:
        logger.info("%s: %d mood/argmax mismatches tolerated", spath, mismatches)
    return records


def count_mood_mismatches(records: Iterable[EmotionRecord]) -> int:
    return sum(1 for r in records if r.mood_mismatch)


def write_emotion_labels(path: str | os.PathLike, records: Iterable[EmotionRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        records = list(records)
        has_votes = any(r.vote_count is not None for r in records)
        writer.writerow(EMOTION_HEADER + (("vote_count",) if has_votes else ()))
        for r in records:
            row = [
                "" if r.tmdb_id is None else r.tmdb_id,
                r.movie_id,
                "" if r.imdb_id is None else r.imdb_id,
                r.mood.label,
                *(repr(v) for v in r.mvec.values),
            ]
            if has_votes:
                row.append("" if r.vote_count is None else r.vote_count)
            writer.writerow(row)


def write_ratings(path: str | os.PathLike, ratings: Iterable[RatingRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RATINGS_HEADER)
        for r in ratings:
            writer.writerow([r.user_id, r.movie_id, repr(r.rating), r.timestamp])


def load_movie_ids(path: str | os.PathLike) -> list[int]:
    """Read the ``movieId`` column of a MovieLens ``movies.csv``."""
    spath = str(path)
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "movieId" not in reader.fieldnames:
            raise ParseError("missing movieId column", 1, spath)
        return [_parse_int(row["movieId"], reader.line_num, spath, "movieId") for row in reader]


# ---------------------------------------------------------------- joining


def merge(
    ratings: Sequence[RatingRecord],
    emotion_records: Iterable[EmotionRecord],
    dataset_id: str,
    movie_ids: Optional[Iterable[int]] = None,
) -> Dataset:
    """Inner-join ratings with emotion labels on movie id and build profiles.

    Ratings of unlabeled movies are dropped and counted. ``movie_ids`` (e.g.
    from ``movies.csv``) only widens the movie count in the stats.

    Raises:
        EmptyJoin: if no rating survives the join.
    """
    items = {r.movie_id: r.to_item() for r in emotion_records}
    kept = [r for r in ratings if r.movie_id in items]
    if not kept:
        raise EmptyJoin(f"no rating in {dataset_id!r} references an emotion-labeled movie")
    all_movies = {r.movie_id for r in ratings} | set(items)
    if movie_ids is not None:
        all_movies |= set(movie_ids)
    stats = DatasetStats(
        n_users=len({r.user_id for r in ratings}),
        n_movies=len(all_movies),
        n_ratings=len(ratings),
        n_emotion_labeled=len(items),
        n_ratings_dropped=len(ratings) - len(kept),
    )
    ds = Dataset(dataset_id=dataset_id, ratings=tuple(kept), items=items, stats=stats)
    return build_profiles(ds)


def build_profiles(dataset: Dataset) -> Dataset:
    """Populate one UVEC per user from the dataset's (already joined) ratings."""
    watched: dict[Hashable, list[Hashable]] = {}
    for r in dataset.ratings:
        watched.setdefault(r.user_id, []).append(r.movie_id)
    users = {}
    for uid in sorted(watched):
        mvecs = [dataset.items[m].mvec for m in watched[uid]]
        users[uid] = UserProfile(uid, mean_profile(mvecs), len(mvecs))
    dropped = dataset.stats.n_users - len(users) if dataset.stats.n_users else 0
    stats = replace(dataset.stats, n_users_dropped=max(dropped, 0))
    return replace(
        dataset,
        users=users,
        watched={u: tuple(ms) for u, ms in sorted(watched.items())},
        stats=stats,
    )


def normalize_group_mvec(item: ItemProfile) -> EmotionVector:
    """The rater-group profile an item stands for, divided by its vote count.

    On a stored (already l1-normalized) MVEC this returns the same vector;
    the point is to refuse items that carry no vote count.
    """
    if item.vote_count is None or item.vote_count < 1:
        raise MissingVoteCount(f"item {item.item_id!r} has no vote count")
    return l1_normalize(v / item.vote_count for v in item.mvec.values)


# ---------------------------------------------------------------- synthetic


def _synth_counts(rng: np.random.Generator, n_users: int, lo: int, hi: int) -> list[int]:
    if lo == hi:
        return [lo] * n_users
    # heavy tail: most users near lo, a handful near hi
    u = rng.random(n_users)
    counts = np.floor(lo * (hi / lo) ** (u**4)).astype(int)
    counts[int(np.argmax(counts))] = hi
    return [int(min(max(c, lo), hi)) for c in counts]


def synth_dataset(
    seed: int,
    n_users: int,
    n_items: int,
    ratings_per_user: int | tuple[int, int],
    dataset_id: str = "synth",
    alpha: float = 2.0,
) -> Dataset:
    """Reproducible pseudo-random dataset for tests and benchmarks.

    MVECs are normalized gamma(alpha) draws (a Dirichlet sample); each user's
    watch list is sampled without replacement. ``ratings_per_user`` is either
    a fixed count or a ``(lo, hi)`` range drawn from a heavy-tailed law.
    """
    if min(n_users, n_items) < 1:
        raise ValueError("n_users and n_items must be >= 1")
    if isinstance(ratings_per_user, int):
        lo = hi = ratings_per_user
    else:
        lo, hi = ratings_per_user
    if lo < 1 or hi < lo:
        raise ValueError("ratings_per_user must be >= 1")
    if hi > n_items:
        raise ValueError("ratings_per_user cannot exceed n_items")
    rng = np.random.default_rng(seed)
    raw = rng.gamma(alpha, size=(n_items, 7)) + 1e-9
    records = []
    for idx in range(n_items):
        mvec = l1_normalize(float(v) for v in raw[idx])
        mid = idx + 1
        records.append(
            EmotionRecord(
                tmdb_id=100000 + mid,
                movie_id=mid,
                imdb_id=None,
                mood=dominant_mood(mvec),
                mvec=mvec,
                vote_count=int(rng.integers(1, 1000)),
            )
        )
    counts = _synth_counts(rng, n_users, lo, hi)
    ratings = []
    ts = 1_000_000_000
    for uid in range(1, n_users + 1):
        picks = rng.choice(n_items, size=counts[uid - 1], replace=False)
        stars = rng.integers(1, 11, size=len(picks))
        for p, s in zip(picks, stars):
            ratings.append(RatingRecord(uid, int(p) + 1, float(s) / 2.0, ts))
            ts += 1
    return merge(ratings, records, dataset_id)


def synth_emotion_records(
    seed: int, movie_ids: Iterable[int], alpha: float = 2.0
) -> list[EmotionRecord]:
    """Random emotion labels for a given id list (e.g. a real movies.csv)."""
    rng = np.random.default_rng(seed)
    out = []
    for mid in movie_ids:
        mvec = l1_normalize(float(v) + 1e-9 for v in rng.gamma(alpha, size=7))
        out.append(EmotionRecord(None, mid, None, dominant_mood(mvec), mvec))
    return out


__all__ = [
    "LABELS",
    "RatingRecord",
    "EmotionRecord",
    "DatasetStats",
    "Dataset",
    "DatasetStore",
    "load_ratings",
    "load_emotion_labels",
    "load_movie_ids",
    "load_dataset_json",
    "dataset_from_json",
    "merge",
    "build_profiles",
    "normalize_group_mvec",
    "synth_dataset",
    "synth_emotion_records",
    "count_mood_mismatches",
    "write_ratings",
    "write_emotion_labels",
]
