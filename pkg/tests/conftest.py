import random
import sys

import pytest

from affect_rec.affect import EmotionVector, ItemProfile, UserProfile, l1_normalize
from affect_rec.ingest import Dataset

# Published user profiles: mlsm user 400 and its matches in three other datasets.
MATCH_UVECS = {
    ("mlsm", 400): (0.16353, 0.08874, 0.12709, 0.20332, 0.11934, 0.15881, 0.13918),
    ("ml20m", 66274): (0.16250, 0.08609, 0.12654, 0.20701, 0.11776, 0.16005, 0.14005),
    ("ml25m", 95459): (0.16353, 0.08874, 0.12709, 0.20332, 0.11934, 0.15881, 0.13918),
    ("ml27m", 89195): (0.16353, 0.08874, 0.12709, 0.20332, 0.11934, 0.15881, 0.13918),
}
MATCH_WATCH = {"mlsm": 43, "ml20m": 22, "ml25m": 43, "ml27m": 43}

# Published five-member multi-group: id -> (watched, uvec).
GROUP_MEMBERS = {
    195: (187, (0.1639455, 0.0902557, 0.1176815, 0.1726736, 0.1185870, 0.1777129, 0.1591437)),
    602: (135, (0.1639545, 0.0869860, 0.1168919, 0.16947266, 0.1156349, 0.1817310, 0.1653290)),
    190: (66, (0.1603803, 0.0849701, 0.1254172, 0.17182250, 0.1135154, 0.1797844, 0.1641099)),
    521: (40, (0.1574143, 0.0944750, 0.1240710, 0.14589457, 0.1083259, 0.1795868, 0.1902323)),
    463: (33, (0.1558253, 0.0968441, 0.1140474, 0.19975860, 0.1226243, 0.1571110, 0.1537890)),
}
GROUP_AVERAGE = (0.1603040, 0.0907061, 0.1196220, 0.17192440, 0.1157376, 0.1751852, 0.1665208)

# Published item rows (tmdb id, movie id, printed mood, 7 emotion values).
ITEM_ROWS = [
    (2, 4470, "disgust",
     (0.15705037, 0.08608995, 0.15583897, 0.07506061, 0.08469571, 0.26612538, 0.17513901)),
    (525662, 189111, "hate",
     (0.11876434, 0.05086204, 0.12669845, 0.3391073, 0.13069303, 0.13746719, 0.096407644)),
]
LABEL_CSV = """Index,tid,mid,iid,mood,neutral,happy,sad,hate,anger,disgust,surprise
1,2,4470,94675,disgust,0.157,0.086,0.156,0.075,0.085,0.266,0.175
2,5,18,113101,disgust,0.121,0.060,0.098,0.128,0.133,0.244,0.216
3,6,479,107286,hate,0.075,0.114,0.054,0.433,0.095,0.128,0.100
4,11,260,76759,neutral,0.299,0.262,0.079,0.030,0.017,0.083,0.230
5,12,6377,266543,surprise,0.150,0.080,0.055,0.083,0.103,0.153,0.376
"""

PUBLISHED_UVECS = {
    400: (0.163529, 0.088735, 0.1270899, 0.203318, 0.119338, 0.158812, 0.1391753),
    414: (0.166351, 0.097305, 0.1180924, 0.164195, 0.115177, 0.172503, 0.1663736),
    474: (0.168858, 0.099746, 0.1187206, 0.160877, 0.112612, 0.171919, 0.1672649),
    448: (0.172833, 0.096858, 0.1160457, 0.161207, 0.112276, 0.170985, 0.1697938),
}


def match_datasets() -> dict[str, Dataset]:
    return {
        ds_id: Dataset.from_profiles(
            ds_id, [UserProfile(uid, EmotionVector(vec), MATCH_WATCH[ds_id])]
        )
        for (ds_id, uid), vec in MATCH_UVECS.items()
    }


def published_group() -> list[UserProfile]:
    return [UserProfile(uid, EmotionVector(v), w) for uid, (w, v) in GROUP_MEMBERS.items()]


def random_vector(rng: random.Random) -> EmotionVector:
    return l1_normalize(rng.random() + 1e-6 for _ in range(7))


def random_users(
    rng: random.Random, n: int, dup_rate: float = 0.1, max_watch: int = 300
) -> list[UserProfile]:
    """Random users; a share of them copy an earlier user's UVEC (and maybe
    watch count) so tie-breaking gets exercised."""
    users: list[UserProfile] = []
    for uid in rng.sample(range(1, 10 * n + 1), n):
        if users and rng.random() < dup_rate:
            src = rng.choice(users)
            watch = src.watch_count if rng.random() < 0.5 else rng.randint(1, max_watch)
            users.append(UserProfile(uid, src.uvec, watch))
        else:
            users.append(UserProfile(uid, random_vector(rng), rng.randint(1, max_watch)))
    return users


def random_items(rng: random.Random, n: int, dup_rate: float = 0.1) -> list[ItemProfile]:
    items: list[ItemProfile] = []
    for iid in rng.sample(range(1, 10 * n + 1), n):
        if items and rng.random() < dup_rate:
            items.append(ItemProfile(iid, rng.choice(items).mvec, vote_count=rng.randint(1, 500)))
        else:
            items.append(ItemProfile(iid, random_vector(rng), vote_count=rng.randint(1, 500)))
    return items


@pytest.fixture
def rng():
    return random.Random(20201)


@pytest.fixture
def pub_group():
    return published_group()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
