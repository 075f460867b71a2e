"""Group formation and group-member analytics.

Two kinds of groups exist. System simulcast groups (SSG) are formed by the
system: the most active users become anchors and each anchor collects the
users whose UVEC is closest to its own. Multi-groups (MG) are created and
administered by users themselves.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import os
import threading
from dataclasses import dataclass, replace
from typing import Any, Hashable, Iterable, Mapping, Optional, Sequence, Union

from .affect import EmotionVector, UserProfile, aii, mean_profile
from .association import top_k_by_aii
from .errors import (
    AlreadyMember,
    EmptyGroup,
    GroupTooSmall,
    InsufficientUsers,
    NotAMember,
    NotOwner,
    UnknownGroup,
)
from .ingest import Dataset

SSG_CSV_HEADER = ("group_index", "rank", "user_id", "aii_to_anchor", "watch_count")


@dataclass(frozen=True)
class SimulcastGroup:
    """An anchor user plus the members drawn for it, anchor first.

    ``aii_to_anchor[i]`` is the AII between ``members[i]`` and the anchor.
    """

    group_index: int
    anchor: UserProfile
    members: tuple[UserProfile, ...]
    aii_to_anchor: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def member_ids(self) -> list[Hashable]:
        return [u.user_id for u in self.members]


GroupLike = Union[SimulcastGroup, Sequence[UserProfile]]


def _members(group: GroupLike) -> list[UserProfile]:
    if isinstance(group, SimulcastGroup):
        return list(group.members)
    return list(group)


def rank_by_interaction(users: Iterable[UserProfile]) -> list[UserProfile]:
    """Users ordered by watch count, most active first, ties by ascending id."""
    return sorted(users, key=lambda u: (-u.watch_count, u.user_id))


def _draw_members(
    anchor: UserProfile, pool: Mapping[Hashable, UserProfile], m: int
) -> list[tuple[UserProfile, float]]:
    ranked = top_k_by_aii(anchor.uvec, ((uid, u.uvec) for uid, u in pool.items()), m)
    return [(pool[uid], s) for uid, s in ranked]


def _form(
    users: Sequence[UserProfile], g: int, m: int, disjoint: bool
) -> list[SimulcastGroup]:
    anchors = rank_by_interaction(users)[:g]
    anchor_ids = {a.user_id for a in anchors}
    pool = {u.user_id: u for u in users if u.user_id not in anchor_ids}
    groups = []
    for idx, anchor in enumerate(anchors, start=1):
        drawn = _draw_members(anchor, pool, m) if m > 0 and pool else []
        if disjoint:
            for u, _ in drawn:
                del pool[u.user_id]
        groups.append(
            SimulcastGroup(
                group_index=idx,
                anchor=anchor,
                members=(anchor,) + tuple(u for u, _ in drawn),
                aii_to_anchor=(1.0,) + tuple(s for _, s in drawn),
            )
        )
    return groups


def form_ssg(dataset: Dataset, g: int, m: int) -> list[SimulcastGroup]:
    """Form ``g`` simulcast groups of ``m + 1`` users each.

    The ``g`` most active users become anchors, in rank order. Every anchor
    then takes the ``m`` non-anchor users with the highest AII to it. Only
    anchors are exclusive; a non-anchor may join several groups.

    Raises:
        InsufficientUsers: if fewer than ``g`` users exist, or fewer than
            ``m`` remain once the anchors are set aside.
    """
    if g < 1 or m < 1:
        raise ValueError("g and m must be positive")
    users = list(dataset.users.values())
    if len(users) < g:
        raise InsufficientUsers(f"{len(users)} users cannot anchor {g} groups")
    if len(users) - g < m:
        raise InsufficientUsers(f"only {len(users) - g} non-anchor users for m={m}")
    return _form(users, g, m, disjoint=False)


def partition_ssg(dataset: Dataset, m: int) -> list[SimulcastGroup]:
    """Disjoint variant: every user lands in exactly one group.

    Uses ``ceil(n / (m + 1))`` anchors; each group, in anchor rank order,
    draws its members from the users nobody has claimed yet, so the last
    group may come up short.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    users = list(dataset.users.values())
    if not users:
        raise InsufficientUsers("dataset has no users")
    g = math.ceil(len(users) / (m + 1))
    return _form(users, g, m, disjoint=True)


def rank_members_by_aii(
    group: GroupLike, reference: Hashable
) -> list[tuple[UserProfile, float]]:
    """Members by descending AII to ``reference``, which is always first."""
    members = _members(group)
    ref = next((u for u in members if u.user_id == reference), None)
    if ref is None:
        raise NotAMember(f"user {reference!r} is not in the group")
    others = [(u, aii(ref.uvec, u.uvec)) for u in members if u.user_id != reference]
    others.sort(key=lambda pair: (-pair[1], pair[0].user_id))
    return [(ref, 1.0)] + others


def dominant_member(group: GroupLike) -> UserProfile:
    members = _members(group)
    if not members:
        raise EmptyGroup("group has no members")
    return rank_by_interaction(members)[0]


def least_misery_member(group: GroupLike) -> UserProfile:
    """The member whose UVEC is least similar to the dominant member's.

    The dominant member itself is not a candidate. Ties go to the lower id.
    """
    members = _members(group)
    if len(members) < 2:
        raise GroupTooSmall("least-misery needs at least two members")
    dom = dominant_member(members)
    rest = [u for u in members if u.user_id != dom.user_id]
    return min(rest, key=lambda u: (aii(u.uvec, dom.uvec), u.user_id))


def median_member(group: GroupLike) -> UserProfile:
    """The member halfway down the AII ranking to the dominant member.

    Position ``ceil(size / 2)`` counting from one, so list index 30 in a
    group of 61.
    """
    members = _members(group)
    if not members:
        raise EmptyGroup("group has no members")
    ranking = rank_members_by_aii(members, dominant_member(members).user_id)
    return ranking[math.ceil(len(ranking) / 2) - 1][0]


def group_uvec(group: GroupLike) -> EmotionVector:
    members = _members(group)
    if not members:
        raise EmptyGroup("group has no members")
    return mean_profile(u.uvec for u in members)


# ---------------------------------------------------------------- SSG files


def write_ssg_csv(path: str | os.PathLike, groups: Iterable[SimulcastGroup]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SSG_CSV_HEADER)
        for grp in groups:
            for rank, (u, s) in enumerate(zip(grp.members, grp.aii_to_anchor), start=1):
                writer.writerow([grp.group_index, rank, u.user_id, repr(s), u.watch_count])


def read_ssg_csv(path: str | os.PathLike, dataset: Dataset) -> list[SimulcastGroup]:
    """Rebuild groups from an SSG CSV, resolving user ids against ``dataset``."""
    rows: dict[int, list[tuple[int, UserProfile, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            uid = _coerce_id(row["user_id"], dataset.users)
            rows.setdefault(int(row["group_index"]), []).append(
                (int(row["rank"]), dataset.user(uid), float(row["aii_to_anchor"]))
            )
    groups = []
    for idx in sorted(rows):
        entries = sorted(rows[idx], key=lambda e: e[0])
        groups.append(
            SimulcastGroup(
                group_index=idx,
                anchor=entries[0][1],
                members=tuple(e[1] for e in entries),
                aii_to_anchor=tuple(e[2] for e in entries),
            )
        )
    return groups


def _coerce_id(text: str, known: Mapping[Hashable, Any]) -> Hashable:
    if text in known:
        return text
    try:
        return int(text)
    except ValueError:
        return text


# ---------------------------------------------------------------- multi-groups


class Visibility(str, enum.Enum):
    PMG = "PMG"  # private, invitation only
    OMG = "OMG"  # open to the public


@dataclass(frozen=True)
class MultiGroup:
    group_id: str
    name: str
    owner: Hashable
    visibility: Visibility
    members: tuple[Hashable, ...]

    def resolve(self, dataset: Dataset) -> list[UserProfile]:
        return [dataset.user(uid) for uid in self.members]

    def to_dict(self) -> dict[str, Any]:
        return {
            "group_id": self.group_id,
            "name": self.name,
            "owner": self.owner,
            "visibility": self.visibility.value,
            "members": list(self.members),
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "MultiGroup":
        return cls(
            group_id=str(doc["group_id"]),
            name=str(doc["name"]),
            owner=doc["owner"],
            visibility=Visibility(doc.get("visibility", "PMG")),
            members=tuple(doc["members"]),
        )


class MultiGroupRegistry:
    """User-managed groups with owner-only mutation.

    Groups are immutable snapshots swapped under a lock, so a reader sees a
    group either before or after a mutation, never halfway through one.
    """

    def __init__(self, groups: Iterable[MultiGroup] = ()):
        self._lock = threading.Lock()
        self._groups: dict[str, MultiGroup] = {}
        self._next = 1
        for grp in groups:
            self._groups[grp.group_id] = grp
            self._bump(grp.group_id)

    def _bump(self, group_id: str) -> None:
        if group_id.startswith("mg") and group_id[2:].isdigit():
            self._next = max(self._next, int(group_id[2:]) + 1)

    def _get(self, group_id: str) -> MultiGroup:
        try:
            return self._groups[group_id]
        except KeyError:
            raise UnknownGroup(f"no group {group_id!r}") from None

    @staticmethod
    def _check_owner(grp: MultiGroup, actor: Hashable) -> None:
        if actor != grp.owner:
            raise NotOwner(f"user {actor!r} does not own group {grp.group_id!r}")

    def create(
        self, name: str, owner: Hashable, visibility: Visibility | str = Visibility.PMG
    ) -> MultiGroup:
        with self._lock:
            group_id = f"mg{self._next}"
            self._next += 1
            grp = MultiGroup(group_id, name, owner, Visibility(visibility), (owner,))
            self._groups[group_id] = grp
            return grp

    def delete(self, group_id: str, actor: Hashable) -> None:
        with self._lock:
            self._check_owner(self._get(group_id), actor)
            del self._groups[group_id]

    def add(self, group_id: str, actor: Hashable, user: Hashable) -> MultiGroup:
        with self._lock:
            grp = self._get(group_id)
            self._check_owner(grp, actor)
            if user in grp.members:
                raise AlreadyMember(f"user {user!r} already in {group_id!r}")
            grp = replace(grp, members=grp.members + (user,))
            self._groups[group_id] = grp
            return grp

    def remove(self, group_id: str, actor: Hashable, user: Hashable) -> Optional[MultiGroup]:
        """Drop a member. Removing the owner deletes the group (returns None)."""
        with self._lock:
            grp = self._get(group_id)
            self._check_owner(grp, actor)
            if user not in grp.members:
                raise NotAMember(f"user {user!r} not in {group_id!r}")
            if user == grp.owner:
                del self._groups[group_id]
                return None
            grp = replace(grp, members=tuple(u for u in grp.members if u != user))
            self._groups[group_id] = grp
            return grp

    def list(self, group_id: str) -> tuple[Hashable, ...]:
        return self.get(group_id).members

    def get(self, group_id: str) -> MultiGroup:
        with self._lock:
            return self._get(group_id)

    def groups(self) -> list[MultiGroup]:
        with self._lock:
            return [self._groups[k] for k in sorted(self._groups)]

    def save(self, directory: str | os.PathLike) -> None:
        """Write one ``<group_id>.json`` per group and prune deleted ones."""
        os.makedirs(directory, exist_ok=True)
        with self._lock:
            snapshot = dict(self._groups)
        for name in os.listdir(directory):
            if name.endswith(".json") and name[:-5] not in snapshot:
                os.remove(os.path.join(directory, name))
        for gid, grp in sorted(snapshot.items()):
            write_group_json(os.path.join(directory, f"{gid}.json"), grp)

    @classmethod
    def load(cls, directory: str | os.PathLike) -> "MultiGroupRegistry":
        groups = []
        if os.path.isdir(directory):
            for name in sorted(os.listdir(directory)):
                if name.endswith(".json"):
                    groups.append(read_group_json(os.path.join(directory, name)))
        return cls(groups)


def write_group_json(path: str | os.PathLike, grp: MultiGroup) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(grp.to_dict(), fh, indent=1)
        fh.write("\n")


def read_group_json(path: str | os.PathLike) -> MultiGroup:
    with open(path, encoding="utf-8") as fh:
        return MultiGroup.from_dict(json.load(fh))
