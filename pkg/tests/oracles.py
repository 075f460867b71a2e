"""Brute-force reference implementations used as test oracles.

These deliberately avoid the package's own helpers: similarity goes through
numpy, selection through plain full sorts written out longhand.
"""

import math

import numpy as np


def cos(a, b) -> float:
    a = np.asarray(list(a), dtype=float)
    b = np.asarray(list(b), dtype=float)
    return float(min(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)), 1.0))


def ordered(pairs):
    """Sort (id, score) pairs: score descending, then id ascending."""
    by_id = sorted(pairs, key=lambda p: p[0])
    return sorted(by_id, key=lambda p: p[1], reverse=True)


def top_k(query, entities, k):
    """entities: list of (id, vector)."""
    return ordered([(eid, cos(query, vec)) for eid, vec in entities])[:k]


def form_ssg(users, g, m):
    """users: list of UserProfile. Returns [(anchor_id, [member ids...])]."""
    by_count = sorted(users, key=lambda u: u.user_id)
    by_count = sorted(by_count, key=lambda u: u.watch_count, reverse=True)
    anchors = by_count[:g]
    anchor_ids = {a.user_id for a in anchors}
    out = []
    for a in anchors:
        pool = [(u.user_id, cos(a.uvec, u.uvec)) for u in users if u.user_id not in anchor_ids]
        out.append((a.user_id, [uid for uid, _ in ordered(pool)[:m]]))
    return out


def dominant(users):
    best = None
    for u in users:
        if best is None or u.watch_count > best.watch_count or (
            u.watch_count == best.watch_count and u.user_id < best.user_id
        ):
            best = u
    return best


def least_misery(users):
    dom = dominant(users)
    best = None
    best_s = math.inf
    for u in sorted(users, key=lambda u: u.user_id):
        if u.user_id == dom.user_id:
            continue
        s = cos(u.uvec, dom.uvec)
        if s < best_s:
            best, best_s = u, s
    return best


def median(users):
    dom = dominant(users)
    rest = ordered([(u.user_id, cos(dom.uvec, u.uvec)) for u in users if u.user_id != dom.user_id])
    ranking = [dom.user_id] + [uid for uid, _ in rest]
    return ranking[math.ceil(len(ranking) / 2) - 1]


def mean_vec(vectors):
    arr = np.asarray([list(v) for v in vectors], dtype=float)
    return arr.sum(axis=0) / len(arr)


def rerank(uvec, candidates, n):
    """candidates: list of Candidate. Returns item ids in rank order."""
    scored = [(cos(uvec, c.mvec), c.display_rank, c.item_id) for c in candidates]
    scored.sort(key=lambda t: t[2])
    scored.sort(key=lambda t: t[1])
    scored.sort(key=lambda t: t[0], reverse=True)
    return [t[2] for t in scored[:n]]


def aggregate(members_ratings, fn, tau):
    """members_ratings: dict item -> list of ratings (no None). Item order kept
    for ties."""
    out = []
    for item, rs in members_ratings.items():
        if fn == "least-misery":
            out.append((item, min(rs)))
        elif fn == "average":
            out.append((item, sum(rs) / len(rs)))
        else:
            if all(r >= tau for r in rs):
                out.append((item, sum(rs) / len(rs)))
    return sorted(out, key=lambda p: p[1], reverse=True)
