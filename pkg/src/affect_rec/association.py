"""Pseudo association connections (PAC) between disjoint datasets.

Two users in different datasets never share an id. They can still be linked
when their emotion profiles are close enough: the best-AII match in the
target dataset stands in for "the same person" there.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Sequence

from .affect import ItemProfile, aii, aii_many
from .errors import EmptyTarget
from .ingest import Dataset, normalize_group_mvec


@dataclass(frozen=True)
class EntityRef:
    dataset: str
    id: Hashable
    kind: str  # "user" | "item"

    def to_dict(self) -> dict[str, Any]:
        return {"dataset": self.dataset, "id": self.id, "kind": self.kind}


@dataclass(frozen=True)
class PacMatch:
    source: EntityRef
    target: EntityRef
    aii: float

    def to_dict(self) -> dict[str, Any]:
        return {"source": self.source.to_dict(), "target": self.target.to_dict(), "aii": self.aii}

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "PacMatch":
        return cls(EntityRef(**doc["source"]), EntityRef(**doc["target"]), float(doc["aii"]))


def top_k_by_aii(
    query: Sequence[float],
    candidates: Iterable[tuple[Hashable, Sequence[float]]],
    k: int,
) -> list[tuple[Hashable, float]]:
    """Full scan: the ``k`` (id, aii) pairs with highest AII, ties by ascending id."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    ids, vecs = [], []
    for cid, vec in candidates:
        ids.append(cid)
        vecs.append(vec)
    scored = ((-s, cid) for s, cid in zip(aii_many(query, vecs), ids))
    return [(cid, -neg) for neg, cid in heapq.nsmallest(k, scored)]


def pac_user_to_user(
    source: Dataset, user_id: Hashable, target: Dataset, k: int = 1
) -> list[PacMatch]:
    """Best-matching users in ``target`` for one user of ``source``.

    Raises:
        UnknownUser: if ``user_id`` is not in ``source``.
        EmptyTarget: if ``target`` has no users.
    """
    query = source.user(user_id)
    if not target.users:
        raise EmptyTarget(f"dataset {target.dataset_id!r} has no users")
    src = EntityRef(source.dataset_id, user_id, "user")
    ranked = top_k_by_aii(query.uvec, ((u.user_id, u.uvec) for u in target.users.values()), k)
    return [PacMatch(src, EntityRef(target.dataset_id, uid, "user"), s) for uid, s in ranked]


def pac_item_to_item(
    source: Dataset, item_id: Hashable, target: Dataset, k: int = 1
) -> list[PacMatch]:
    query = source.item(item_id)
    if not target.items:
        raise EmptyTarget(f"dataset {target.dataset_id!r} has no items")
    src = EntityRef(source.dataset_id, item_id, "item")
    ranked = top_k_by_aii(query.mvec, ((i.item_id, i.mvec) for i in target.items.values()), k)
    return [PacMatch(src, EntityRef(target.dataset_id, iid, "item"), s) for iid, s in ranked]


def pac_user_to_item_group(
    source: Dataset, user_id: Hashable, target_item: ItemProfile, target_dataset: str = "tmdb"
) -> PacMatch:
    """One-to-many link: a user against the rater group an item stands for.

    The item needs a vote count; its normalized MVEC plays the role of the
    average UVEC of everyone who voted on it.
    """
    query = source.user(user_id)
    group_vec = normalize_group_mvec(target_item)
    return PacMatch(
        EntityRef(source.dataset_id, user_id, "user"),
        EntityRef(target_dataset, target_item.item_id, "item"),
        aii(query.uvec, group_vec),
    )
