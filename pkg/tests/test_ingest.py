import json

import pytest

from affect_rec.affect import EmotionLabel, EmotionVector, ItemProfile, dominant_mood, l1_normalize
from affect_rec.errors import (
    DuplicateRating,
    EmptyJoin,
    MissingVoteCount,
    NegativeEmotion,
    ParseError,
)
from affect_rec.ingest import (
    Dataset,
    DatasetStore,
    EmotionRecord,
    RatingRecord,
    count_mood_mismatches,
    dataset_from_json,
    load_emotion_labels,
    load_ratings,
    merge,
    normalize_group_mvec,
    synth_dataset,
    write_emotion_labels,
    write_ratings,
)

from conftest import LABEL_CSV, PUBLISHED_UVECS, random_vector
import oracles


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def label(mid, vec, mood=None, votes=None):
    vec = l1_normalize(vec)
    return EmotionRecord(None, mid, None, mood or dominant_mood(vec), vec, votes)


class TestLoadRatings:
    def test_header_only(self, tmp_path):
        assert load_ratings(write(tmp_path, "r.csv", "userId,movieId,rating,timestamp\n")) == []

    def test_three_rows(self, tmp_path):
        path = write(
            tmp_path,
            "r.csv",
            "userId,movieId,rating,timestamp\n1,1,4.0,964982703\n1,3,4.5,964981247\n2,6,0.5,964982224\n",
        )
        assert load_ratings(path) == [
            RatingRecord(1, 1, 4.0, 964982703),
            RatingRecord(1, 3, 4.5, 964981247),
            RatingRecord(2, 6, 0.5, 964982224),
        ]

    def test_bad_rating_reports_line(self, tmp_path):
        rows = "userId,movieId,rating,timestamp\n1,1,4,1\n1,2,4,1\n1,3,4,1\n1,4,abc,1\n"
        with pytest.raises(ParseError) as exc:
            load_ratings(write(tmp_path, "r.csv", rows))
        assert exc.value.line == 5

    @pytest.mark.parametrize("value", ["0.0", "5.5", "3.3"])
    def test_rating_scale(self, tmp_path, value):
        with pytest.raises(ParseError):
            load_ratings(write(tmp_path, "r.csv", f"userId,movieId,rating,timestamp\n1,1,{value},1\n"))

    def test_duplicate(self, tmp_path):
        rows = "userId,movieId,rating,timestamp\n1,1,4,1\n1,1,3,2\n"
        with pytest.raises(DuplicateRating) as exc:
            load_ratings(write(tmp_path, "r.csv", rows))
        assert exc.value.line == 3

    def test_bad_header(self, tmp_path):
        with pytest.raises(ParseError):
            load_ratings(write(tmp_path, "r.csv", "user,movie,rating,ts\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_ratings(tmp_path / "nope.csv")


class TestLoadEmotionLabels:
    def test_published_label_rows(self, tmp_path):
        recs = load_emotion_labels(write(tmp_path, "e.csv", LABEL_CSV))
        assert [r.movie_id for r in recs] == [4470, 18, 479, 260, 6377]
        first = recs[0]
        assert (first.tmdb_id, first.imdb_id) == (2, 94675)
        assert first.to_item().mood is EmotionLabel.DISGUST
        assert sum(first.mvec) == pytest.approx(1.0, abs=1e-12)
        assert count_mood_mismatches(recs) == 0

    def test_mismatch_is_tolerated(self, tmp_path, caplog):
        text = LABEL_CSV.replace("1,2,4470,94675,disgust", "1,2,4470,94675,hate")
        recs = load_emotion_labels(write(tmp_path, "e.csv", text))
        assert len(recs) == 5
        assert recs[0].mood is EmotionLabel.HATE
        assert recs[0].to_item().mood is EmotionLabel.DISGUST
        assert count_mood_mismatches(recs) == 1
        assert "argmax is disgust" in caplog.text

    def test_empty_file(self, tmp_path):
        assert load_emotion_labels(write(tmp_path, "e.csv", "")) == []

    def test_negative(self, tmp_path):
        text = LABEL_CSV.replace("0.157,0.086", "-0.157,0.086")
        with pytest.raises(NegativeEmotion):
            load_emotion_labels(write(tmp_path, "e.csv", text))

    def test_without_index_column_and_with_votes(self, tmp_path):
        text = "tid,mid,iid,mood,neutral,happy,sad,hate,anger,disgust,surprise,vote_count\n" \
               "2,4470,,disgust,0.157,0.086,0.156,0.075,0.085,0.266,0.175,57\n"
        (rec,) = load_emotion_labels(write(tmp_path, "e.csv", text))
        assert rec.imdb_id is None and rec.vote_count == 57

    def test_missing_column(self, tmp_path):
        with pytest.raises(ParseError):
            load_emotion_labels(write(tmp_path, "e.csv", "tid,mid,mood\n1,2,hate\n"))

    def test_round_trip(self, tmp_path, rng):
        recs = [label(i, [rng.random() for _ in range(7)], votes=i) for i in range(1, 6)]
        path = tmp_path / "e.csv"
        write_emotion_labels(path, recs)
        loaded = load_emotion_labels(path)
        assert [(r.movie_id, r.mood, r.vote_count) for r in loaded] == [
            (r.movie_id, r.mood, r.vote_count) for r in recs
        ]
        # rows are re-normalized on load, which may move the last bit
        for a, b in zip(loaded, recs):
            assert a.mvec.values == pytest.approx(b.mvec.values, abs=1e-15)


class TestMerge:
    def test_partial_join(self, rng):
        ratings = [RatingRecord(1, m, 4.0, 0) for m in (1, 2, 3)] + [RatingRecord(2, 1, 3.0, 0)]
        labels = [label(2, random_vector(rng)), label(3, random_vector(rng))]
        ds = merge(ratings, labels, "t")
        assert set(ds.items) == {2, 3}
        assert ds.stats.n_ratings == 4
        assert ds.stats.n_ratings_dropped == 2
        assert ds.stats.n_ratings - ds.stats.n_ratings_dropped == len(ds.ratings)
        assert set(ds.users) == {1}
        assert ds.stats.n_users_dropped == 1
        assert ds.stats.n_movies == 3

    def test_disjoint(self, rng):
        with pytest.raises(EmptyJoin):
            merge([RatingRecord(1, 1, 4.0, 0)], [label(2, random_vector(rng))], "t")

    def test_single_rated_item(self, rng):
        rec = label(5, random_vector(rng))
        ds = merge([RatingRecord(9, 5, 2.0, 0)], [rec], "t")
        assert ds.users[9].uvec == rec.mvec
        assert ds.users[9].watch_count == 1

    def test_profiles_are_batch_means(self, rng):
        labels = [label(m, random_vector(rng)) for m in range(1, 80)]
        ratings = [
            RatingRecord(u, m, 3.0, 0)
            for u in range(1, 15)
            for m in rng.sample(range(1, 90), 43)
        ]
        ds = merge(ratings, labels, "t")
        by_mid = {r.movie_id: r.mvec for r in labels}
        for uid, user in ds.users.items():
            watched = [r.movie_id for r in ratings if r.user_id == uid and r.movie_id in by_mid]
            assert user.watch_count == len(watched) == len(ds.watched[uid])
            expected = oracles.mean_vec(by_mid[m] for m in watched)
            for a, b in zip(user.uvec, expected):
                assert abs(a - b) <= 1e-12

    def test_seeded_published_profile(self):
        # a single movie whose MVEC is user 400's published mean reproduces it exactly
        vec = PUBLISHED_UVECS[400]
        rec = EmotionRecord(None, 1, None, EmotionLabel.HATE, EmotionVector(vec))
        ds = merge([RatingRecord(400, 1, 4.0, 0)], [rec], "mlsm")
        assert ds.users[400].uvec.values == vec


class TestNormalizeGroupMvec:
    def test_identity_on_distribution(self, rng):
        v = random_vector(rng)
        got = normalize_group_mvec(ItemProfile(1, v, vote_count=57))
        assert got.values == pytest.approx(v.values, abs=1e-15)

    def test_raw_mass(self):
        item = ItemProfile(1, EmotionVector((0.2 * 57,) * 7), vote_count=57)
        assert normalize_group_mvec(item).values == pytest.approx((1 / 7,) * 7, abs=1e-15)

    def test_missing(self, rng):
        with pytest.raises(MissingVoteCount):
            normalize_group_mvec(ItemProfile(1, random_vector(rng)))


class TestSynth:
    def test_deterministic_bytes(self):
        a = synth_dataset(42, 30, 60, 10).dumps()
        b = synth_dataset(42, 30, 60, 10).dumps()
        assert a == b
        assert synth_dataset(43, 30, 60, 10).dumps() != a

    def test_single_item(self):
        ds = synth_dataset(1, 5, 1, 1)
        (item,) = ds.items.values()
        assert all(u.uvec == item.mvec for u in ds.users.values())

    def test_power_law_unique_top10(self):
        ds = synth_dataset(7, 610, 2698, (20, 2698))
        counts = sorted((u.watch_count for u in ds.users.values()), reverse=True)
        assert counts[0] == 2698
        assert min(counts) >= 20
        assert len(set(counts[:10])) == 10
        assert counts[9] > counts[10]

    def test_stats_match_parameters(self):
        ds = synth_dataset(3, 25, 40, 8)
        assert ds.stats.n_users == 25
        assert ds.stats.n_movies == 40
        assert ds.stats.n_ratings == 25 * 8
        assert ds.stats.n_ratings_dropped == 0
        assert all(u.watch_count == 8 for u in ds.users.values())


class TestDatasetExport:
    def test_schema_and_key_order(self):
        ds = synth_dataset(2, 4, 6, 3, dataset_id="mlsm")
        doc = json.loads(ds.dumps())
        assert list(doc) == ["dataset_id", "stats", "users", "items"]
        assert list(doc["users"][0]) == ["user_id", "watch_count", "uvec"]
        assert list(doc["items"][0]) == ["movie_id", "tmdb_id", "mood", "mvec", "vote_count"]

    def test_round_trip(self):
        ds = synth_dataset(2, 10, 20, 5)
        again = dataset_from_json(json.loads(ds.dumps()))
        assert again.dumps() == ds.dumps()
        assert dict(again.users) == dict(ds.users)

    def test_immutable(self):
        ds = synth_dataset(2, 4, 6, 3)
        with pytest.raises(TypeError):
            ds.users[99] = None  # type: ignore[index]

    def test_from_files(self, tmp_path):
        ds = synth_dataset(5, 12, 30, 6)
        write_ratings(tmp_path / "r.csv", ds.ratings)
        recs = [
            EmotionRecord(i.tmdb_id, i.item_id, None, i.mood, i.mvec, i.vote_count)
            for i in ds.items.values()
        ]
        write_emotion_labels(tmp_path / "e.csv", recs)
        again = merge(load_ratings(tmp_path / "r.csv"), load_emotion_labels(tmp_path / "e.csv"), "synth")
        assert again.ratings == ds.ratings
        assert again.stats == ds.stats
        for uid, user in ds.users.items():
            assert again.users[uid].watch_count == user.watch_count
            assert again.users[uid].uvec.values == pytest.approx(user.uvec.values, abs=1e-15)


def test_store():
    store = DatasetStore([Dataset.from_profiles("a"), Dataset.from_profiles("b")])
    assert "a" in store and len(store) == 2
    assert store["b"].dataset_id == "b"
    with pytest.raises(ValueError):
        store.add(Dataset.from_profiles("a"))


def test_rating_lookup():
    ds = synth_dataset(1, 3, 10, 4)
    r = ds.ratings[0]
    assert ds.rating(r.user_id, r.movie_id) == r.rating
    assert ds.rating(-1, -1) is None


def test_synth_moods_vary():
    ds = synth_dataset(11, 5, 50, 5)
    assert len({i.mood for i in ds.items.values()}) > 1
