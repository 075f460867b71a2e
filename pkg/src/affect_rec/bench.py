"""Counting harness for the simulcast throughput argument.

Personalized mode runs one full top-N generation per user. Grouped mode
runs one per simulcast group (with the anchor's profile) and then only
reranks that short list for each member. With groups of ``m + 1`` users the
number of top-N generations falls by a factor of ``m + 1``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .grouping import partition_ssg
from .ingest import Dataset
from .recommend import Candidate, WorkCounter, rerank, simulcast


@dataclass
class BenchReport:
    n_users: int
    m: int
    n: int
    groups_formed: int
    topn_generations_personalized: int
    topn_generations_grouped: int
    aii_evaluations_personalized: int
    aii_evaluations_grouped: int
    member_reranks_grouped: int
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def reduction_factor(self) -> float:
        return self.topn_generations_personalized / self.topn_generations_grouped

    def to_dict(self, include_timings: bool = False) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "n_users": self.n_users,
            "m": self.m,
            "n": self.n,
            "groups_formed": self.groups_formed,
            "topn_generations_personalized": self.topn_generations_personalized,
            "topn_generations_grouped": self.topn_generations_grouped,
            "reduction_factor": self.reduction_factor,
            "aii_evaluations_personalized": self.aii_evaluations_personalized,
            "aii_evaluations_grouped": self.aii_evaluations_grouped,
            "member_reranks_grouped": self.member_reranks_grouped,
        }
        if include_timings:
            doc["timings"] = dict(self.timings)
        return doc


def catalog_candidates(dataset: Dataset) -> list[Candidate]:
    """Every item of the dataset as a candidate, ranked by ascending id."""
    return [
        Candidate(it.item_id, it.mvec, rank)
        for rank, (_, it) in enumerate(sorted(dataset.items.items()), start=1)
    ]


def run_bench(
    dataset: Dataset,
    m: int,
    n: int = 10,
    candidates: Optional[Sequence[Candidate]] = None,
) -> BenchReport:
    catalog = list(candidates) if candidates is not None else catalog_candidates(dataset)
    n = min(n, len(catalog))
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    personal = WorkCounter()
    for _, user in sorted(dataset.users.items()):
        personal.topn_generations += 1
        rerank(user.uvec, catalog, n, owner=user.user_id, counter=personal)
    timings["personalized"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    groups = partition_ssg(dataset, m)
    timings["formation"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    grouped = WorkCounter()
    member_counter = WorkCounter()
    by_id = {c.item_id: c for c in catalog}
    for grp in groups:
        grouped.topn_generations += 1
        shared = rerank(grp.anchor.uvec, catalog, n, owner=grp.group_index, counter=grouped)
        short_list = [by_id[e.item_id] for e in shared.entries]
        simulcast(grp, short_list, n, counter=member_counter)
    timings["grouped"] = time.perf_counter() - t0

    return BenchReport(
        n_users=len(dataset.users),
        m=m,
        n=n,
        groups_formed=len(groups),
        topn_generations_personalized=personal.topn_generations,
        topn_generations_grouped=grouped.topn_generations,
        aii_evaluations_personalized=personal.aii_evaluations,
        aii_evaluations_grouped=grouped.aii_evaluations + member_counter.aii_evaluations,
        member_reranks_grouped=member_counter.rerank_calls,
        timings=timings,
    )
