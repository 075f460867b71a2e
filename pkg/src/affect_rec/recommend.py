"""Top-N production: AII reranking, group strategies and rating aggregation.

A candidate list (for instance a published "greatest movies" list) is the
shared top-N. Personalizing it for one user means reordering it by AII
between the user's UVEC and each candidate MVEC.
"""

from __future__ import annotations

import csv
import enum
import heapq
import json
import math
import os
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Optional, Sequence

from .affect import EmotionVector, aii_many
from .errors import (
    DuplicateCandidate,
    EmptyCandidates,
    EmptySlice,
    InsufficientRaters,
    ParseError,
    UnknownItem,
)
from .grouping import (
    GroupLike,
    SimulcastGroup,
    _members,
    dominant_member,
    group_uvec,
    least_misery_member,
)
from .ingest import Dataset

GROUP_AVERAGE_OWNER = "group-average"


@dataclass(frozen=True)
class Candidate:
    item_id: Hashable
    mvec: EmotionVector
    display_rank: int
    title: Optional[str] = None


@dataclass(frozen=True)
class RankedEntry:
    item_id: Hashable
    score: float
    title: Optional[str] = None


@dataclass(frozen=True)
class RankedList:
    """An ordered top-N for one user or group.

    ``strategy`` and ``profile_owner`` are only set by group recommendation:
    they record which decision strategy ran and whose profile drove it.
    """

    owner: Hashable
    entries: tuple[RankedEntry, ...]
    strategy: Optional[str] = None
    profile_owner: Optional[Hashable] = None

    @property
    def item_ids(self) -> list[Hashable]:
        return [e.item_id for e in self.entries]

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"owner": self.owner}
        if self.strategy is not None:
            doc["strategy"] = self.strategy
            doc["profile_owner"] = self.profile_owner
        doc["entries"] = [
            {"rank": i, "item_id": e.item_id, "score": e.score, "title": e.title}
            for i, e in enumerate(self.entries, start=1)
        ]
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "RankedList":
        entries = tuple(
            RankedEntry(e["item_id"], float(e["score"]), e.get("title"))
            for e in sorted(doc["entries"], key=lambda e: e["rank"])
        )
        return cls(doc["owner"], entries, doc.get("strategy"), doc.get("profile_owner"))


@dataclass
class WorkCounter:
    """Instrumented call counts; every figure is an exact integer."""

    topn_generations: int = 0
    rerank_calls: int = 0
    aii_evaluations: int = 0


class Strategy(str, enum.Enum):
    DOMINANT = "dominant"
    LEAST_MISERY = "least-misery"
    AVERAGE_PROFILE = "average"


class Aggregation(str, enum.Enum):
    LEAST_MISERY = "least-misery"
    AVERAGE = "average"
    AVERAGE_WITHOUT_MISERY = "average-without-misery"


DEFAULT_TAU = 3.0


def rerank(
    uvec: Sequence[float],
    candidates: Sequence[Candidate],
    n: int,
    owner: Hashable = None,
    counter: Optional[WorkCounter] = None,
) -> RankedList:
    """Top ``n`` candidates by AII to ``uvec``.

    Ties fall back to the candidate's incoming display rank, then its id.

    Raises:
        EmptyCandidates: if ``candidates`` is empty.
        DuplicateCandidate: if an item id appears twice.
    """
    if not candidates:
        raise EmptyCandidates("no candidates to rank")
    if not 1 <= n <= len(candidates):
        raise ValueError(f"n must be in 1..{len(candidates)}, got {n}")
    seen: set[Hashable] = set()
    for c in candidates:
        if c.item_id in seen:
            raise DuplicateCandidate(f"item {c.item_id!r} listed twice")
        seen.add(c.item_id)
    scores = aii_many(uvec, [c.mvec for c in candidates])
    # item ids are unique, so the candidate itself is never compared
    scored = heapq.nsmallest(
        n, ((-s, c.display_rank, c.item_id, c) for s, c in zip(scores, candidates))
    )
    if counter is not None:
        counter.rerank_calls += 1
        counter.aii_evaluations += len(candidates)
    entries = tuple(RankedEntry(c.item_id, -neg, c.title) for neg, _, _, c in scored[:n])
    return RankedList(owner, entries)


def effective_profile(group: GroupLike, strategy: Strategy | str) -> tuple[Hashable, EmotionVector]:
    """The (owner, profile) a group strategy reranks with."""
    strategy = Strategy(strategy)
    if strategy is Strategy.DOMINANT:
        u = dominant_member(group)
        return u.user_id, u.uvec
    if strategy is Strategy.LEAST_MISERY:
        u = least_misery_member(group)
        return u.user_id, u.uvec
    return GROUP_AVERAGE_OWNER, group_uvec(group)


def recommend_for_group(
    group: GroupLike,
    candidates: Sequence[Candidate],
    strategy: Strategy | str,
    n: int,
    group_id: Hashable = None,
) -> RankedList:
    """Rerank ``candidates`` with the profile the chosen strategy picks.

    Raises:
        GroupTooSmall: least-misery on a group with fewer than two members.
        EmptyCandidates: if ``candidates`` is empty.
    """
    strategy = Strategy(strategy)
    if not candidates:
        raise EmptyCandidates("no candidates to rank")
    who, profile = effective_profile(group, strategy)
    ranked = rerank(profile, candidates, n, owner=group_id)
    return RankedList(group_id, ranked.entries, strategy.value, who)


def simulcast(
    group: GroupLike,
    candidates: Sequence[Candidate],
    n: int,
    counter: Optional[WorkCounter] = None,
) -> dict[Hashable, RankedList]:
    """Personalize one shared candidate list for every member of a group."""
    if not candidates:
        raise EmptyCandidates("no candidates to rank")
    return {
        u.user_id: rerank(u.uvec, candidates, n, owner=u.user_id, counter=counter)
        for u in _members(group)
    }


def broadcast(
    groups: Iterable[SimulcastGroup],
    candidates: Sequence[Candidate],
    n: int,
    counter: Optional[WorkCounter] = None,
) -> dict[int, dict[Hashable, RankedList]]:
    """Send the same candidate list to every group, simulcast within each."""
    return {grp.group_index: simulcast(grp, candidates, n, counter) for grp in groups}


# ---------------------------------------------------------------- aggregation


@dataclass(frozen=True)
class GroupRatingsSlice:
    """Member-by-item rating matrix; ``None`` marks an unrated cell."""

    members: tuple[Hashable, ...]
    items: tuple[Hashable, ...]
    ratings: tuple[tuple[Optional[float], ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "ratings", tuple(tuple(row) for row in self.ratings))
        if len(self.ratings) != len(self.members):
            raise ValueError("one rating row per member required")
        for row in self.ratings:
            if len(row) != len(self.items):
                raise ValueError("rating rows must match the item list")

    @classmethod
    def from_dataset(
        cls, dataset: Dataset, members: Sequence[Hashable], items: Sequence[Hashable]
    ) -> "GroupRatingsSlice":
        return cls(
            tuple(members),
            tuple(items),
            tuple(tuple(dataset.rating(u, i) for i in items) for u in members),
        )

    def column(self, j: int) -> list[Optional[float]]:
        return [row[j] for row in self.ratings]

    def incomplete_items(self) -> list[Hashable]:
        """Items some member has not rated; these are left out of aggregation."""
        return [it for j, it in enumerate(self.items) if None in self.column(j)]


def aggregate_ratings(
    slice_: GroupRatingsSlice,
    fn: Aggregation | str,
    tau: float = DEFAULT_TAU,
) -> list[tuple[Hashable, float]]:
    """Group score per fully rated item, best first.

    ``least-misery`` takes the lowest member rating, ``average`` the mean, and
    ``average-without-misery`` the mean over items nobody rated below ``tau``
    (other items are dropped). Equal scores keep the slice's item order.
    """
    fn = Aggregation(fn)
    if not slice_.members or not slice_.items:
        raise EmptySlice("no members or no items to aggregate")
    scores = []
    for j, item in enumerate(slice_.items):
        col = slice_.column(j)
        if None in col:
            continue
        if fn is Aggregation.LEAST_MISERY:
            scores.append((item, min(col)))
        elif fn is Aggregation.AVERAGE:
            scores.append((item, math.fsum(col) / len(col)))
        elif min(col) >= tau:
            scores.append((item, math.fsum(col) / len(col)))
    scores.sort(key=lambda pair: -pair[1])
    return scores


def predict_group_item_rating(
    group: GroupLike | Sequence[Hashable],
    item_id: Hashable,
    dataset: Dataset,
    min_raters: int = 1,
) -> float:
    """Mean rating of ``item_id`` over the members who rated it.

    Raises:
        InsufficientRaters: if fewer than ``min_raters`` members rated it.
    """
    ids = [getattr(u, "user_id", u) for u in _members(group)]  # type: ignore[arg-type]
    present = [r for r in (dataset.rating(u, item_id) for u in ids) if r is not None]
    if len(present) < max(min_raters, 1):
        raise InsufficientRaters(
            f"{len(present)} member(s) rated item {item_id!r}, need {max(min_raters, 1)}"
        )
    return math.fsum(present) / len(present)


# ---------------------------------------------------------------- files


def load_candidates(path: str | os.PathLike, dataset: Dataset) -> list[Candidate]:
    """Read a ``rank,item_id,title`` file and attach each item's MVEC.

    Raises:
        UnknownItem: if a listed item has no profile in ``dataset``.
    """
    spath = str(path)
    if not os.path.exists(spath):
        raise FileNotFoundError(spath)
    out = []
    with open(spath, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"rank", "item_id"} <= set(reader.fieldnames):
            raise ParseError("expected columns rank,item_id,title", 1, spath)
        for row in reader:
            try:
                rank = int(row["rank"])
                item_id = int(row["item_id"])
            except ValueError:
                raise ParseError("bad rank or item_id", reader.line_num, spath) from None
            if item_id not in dataset.items:
                raise UnknownItem(f"{spath}:{reader.line_num}: item {item_id} has no emotion profile")
            title = (row.get("title") or "").strip() or None
            out.append(Candidate(item_id, dataset.items[item_id].mvec, rank, title))
    return out


def write_candidates(path: str | os.PathLike, candidates: Iterable[Candidate]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "item_id", "title"])
        for c in candidates:
            writer.writerow([c.display_rank, c.item_id, c.title or ""])


def write_ranked_csv(path: str | os.PathLike, ranked: RankedList) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if ranked.strategy is not None:
            fh.write(f"# strategy={ranked.strategy} profile_owner={ranked.profile_owner}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "item_id", "score", "title"])
        for i, e in enumerate(ranked.entries, start=1):
            writer.writerow([i, e.item_id, repr(e.score), e.title or ""])


def read_ranked_csv(path: str | os.PathLike, owner: Hashable = None) -> RankedList:
    meta: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            for part in line[1:].split():
                key, _, value = part.partition("=")
                meta[key] = value
        else:
            body.append(line)
    entries = []
    for row in csv.DictReader(body):
        entries.append(RankedEntry(int(row["item_id"]), float(row["score"]), row["title"] or None))
    profile_owner: Any = meta.get("profile_owner")
    if profile_owner is not None and profile_owner.lstrip("-").isdigit():
        profile_owner = int(profile_owner)
    return RankedList(owner, tuple(entries), meta.get("strategy"), profile_owner)


def write_ranked_json(path: str | os.PathLike, ranked: RankedList) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ranked.to_dict(), fh, indent=1)
        fh.write("\n")


def read_ranked_json(path: str | os.PathLike) -> RankedList:
    with open(path, encoding="utf-8") as fh:
        return RankedList.from_dict(json.load(fh))


def write_broadcast(
    directory: str | os.PathLike, results: Mapping[int, Mapping[Hashable, RankedList]]
) -> list[str]:
    """One ``ssg_<index>.json`` per group, members in group order."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for idx in sorted(results):
        path = os.path.join(directory, f"ssg_{idx}.json")
        doc = {
            "group_index": idx,
            "lists": [rl.to_dict() for rl in results[idx].values()],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        paths.append(path)
    return paths


def read_broadcast_file(path: str | os.PathLike) -> tuple[int, dict[Hashable, RankedList]]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    lists = [RankedList.from_dict(d) for d in doc["lists"]]
    return int(doc["group_index"]), {rl.owner: rl for rl in lists}
