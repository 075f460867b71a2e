"""Command line interface.

Exit codes: 0 on success, 1 on usage errors, 2 on data or domain errors.
Domain errors are reported on stderr as ``error: <ErrorName>: <detail>``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .association import pac_item_to_item, pac_user_to_user
from .bench import run_bench
from .errors import AffectRecError, GroupTooSmall, InsufficientRaters
from .grouping import (
    MultiGroupRegistry,
    Visibility,
    form_ssg,
    read_group_json,
    write_ssg_csv,
)
from .ingest import (
    Dataset,
    load_dataset_json,
    load_emotion_labels,
    load_movie_ids,
    load_ratings,
    merge,
    synth_dataset,
)
from .recommend import (
    DEFAULT_TAU,
    Aggregation,
    GroupRatingsSlice,
    RankedEntry,
    RankedList,
    Strategy,
    aggregate_ratings,
    broadcast,
    load_candidates,
    predict_group_item_rating,
    recommend_for_group,
    rerank,
    write_broadcast,
    write_ranked_csv,
    write_ranked_json,
)


DEFAULT_OUT = "affect_rec_out"
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _user_id(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def output_dir(args: argparse.Namespace) -> str:
    out = args.out or os.environ.get("AFFECT_REC_HOME") or DEFAULT_OUT
    os.makedirs(out, exist_ok=True)
    return out


def load_source(args: argparse.Namespace) -> Dataset:
    """Dataset from ``--dataset`` JSON, else from ``--ratings`` + ``--emotions``."""
    if getattr(args, "dataset", None):
        return load_dataset_json(args.dataset)
    if not args.ratings or not args.emotions:
        raise UsageError("need --dataset, or both --ratings and --emotions")
    ratings = load_ratings(args.ratings)
    labels = load_emotion_labels(args.emotions)
    movies = load_movie_ids(args.movies) if getattr(args, "movies", None) else None
    return merge(ratings, labels, args.dataset_id, movie_ids=movies)


def _stats_line(ds: Dataset) -> str:
    s = ds.stats
    return (
        f"{ds.dataset_id}\tusers={s.n_users}\tmovies={s.n_movies}\tratings={s.n_ratings}"
        f"\tlabeled={s.n_emotion_labeled}\tdropped={s.n_ratings_dropped}"
    )


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_ranked(path_stem: str, ranked, fmt: str) -> str:
    path = f"{path_stem}.{fmt}"
    if fmt == "csv":
        write_ranked_csv(path, ranked)
    else:
        write_ranked_json(path, ranked)
    return path


# ---------------------------------------------------------------- commands


def cmd_ingest(args: argparse.Namespace) -> int:
    ds = load_source(args)
    out = output_dir(args)
    path = os.path.join(out, f"{ds.dataset_id}.json")
    _write_text(path, ds.dumps())
    print("dataset\tusers\tmovies\tratings\tlabeled\tdropped")
    s = ds.stats
    print(
        f"{ds.dataset_id}\t{s.n_users}\t{s.n_movies}\t{s.n_ratings}"
        f"\t{s.n_emotion_labeled}\t{s.n_ratings_dropped}"
    )
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    print(_stats_line(load_source(args)))
    return 0


def cmd_pac(args: argparse.Namespace) -> int:
    source = load_source(args)
    out = output_dir(args)
    docs = []
    for target_path in args.target:
        target = load_dataset_json(target_path)
        if args.kind == "user":
            matches = pac_user_to_user(source, args.user, target, args.k)
        else:
            matches = pac_item_to_item(source, args.user, target, args.k)
        for rank, m in enumerate(matches, start=1):
            print(f"{rank}\t{m.target.dataset}\t{m.target.id}\taii={m.aii:.6f}")
        docs.extend(m.to_dict() for m in matches)
    path = os.path.join(out, f"pac_{source.dataset_id}_{args.kind}_{args.user}.json")
    _write_text(path, json.dumps(docs, indent=1) + "\n")
    return 0


def cmd_form_ssg(args: argparse.Namespace) -> int:
    ds = load_source(args)
    groups = form_ssg(ds, args.g, args.m)
    out = output_dir(args)
    path = os.path.join(out, f"ssg_{ds.dataset_id}.csv")
    write_ssg_csv(path, groups)
    print("rank\tanchor\twatch_count\tsize")
    for grp in groups:
        print(f"{grp.group_index}\t{grp.anchor.user_id}\t{grp.anchor.watch_count}\t{grp.size}")
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_group(args: argparse.Namespace) -> int:
    out = output_dir(args)
    store = os.path.join(out, "groups")
    registry = MultiGroupRegistry.load(store)
    action = args.action
    if action == "create":
        if args.owner is None:
            raise UsageError("group create needs --owner")
        grp = registry.create(args.name or "", args.owner, args.visibility)
        print(grp.group_id)
    elif action == "list":
        members = registry.list(_require(args.group_id, "--group-id"))
        print("\n".join(str(m) for m in members))
    else:
        gid = _require(args.group_id, "--group-id")
        actor = _require(args.actor, "--actor")
        if action == "delete":
            registry.delete(gid, actor)
        elif action == "add":
            registry.add(gid, actor, _require(args.user, "--user"))
        elif action == "remove":
            registry.remove(gid, actor, _require(args.user, "--user"))
    registry.save(store)
    return 0


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"missing {flag}")
    return value


def cmd_rerank(args: argparse.Namespace) -> int:
    ds = load_source(args)
    user = ds.user(args.user)
    candidates = load_candidates(_require(args.candidates, "--candidates"), ds)
    ranked = rerank(user.uvec, candidates, min(args.n, len(candidates)), owner=user.user_id)
    out = output_dir(args)
    path = _write_ranked(os.path.join(out, f"rerank_{user.user_id}"), ranked, args.format)
    for i, e in enumerate(ranked.entries, start=1):
        print(f"{i}\t{e.item_id}\t{e.score:.6f}\t{e.title or ''}")
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_group_recommend(args: argparse.Namespace) -> int:
    ds = load_source(args)
    grp = read_group_json(_require(args.group, "--group"))
    members = grp.resolve(ds)
    strategy = Strategy(args.strategy)
    if strategy is Strategy.LEAST_MISERY and len(members) < 2:
        raise GroupTooSmall(f"group {grp.group_id} has {len(members)} member(s)")
    candidates = load_candidates(_require(args.candidates, "--candidates"), ds)
    if args.aggregate:
        ranked = _aggregate_candidates(args, ds, grp, candidates)
        stem = os.path.join(output_dir(args), f"group_{grp.group_id}_agg_{args.aggregate}")
    else:
        ranked = recommend_for_group(
            members, candidates, strategy, min(args.n, len(candidates)), group_id=grp.group_id
        )
        stem = os.path.join(output_dir(args), f"group_{grp.group_id}_{strategy.value}")
    path = _write_ranked(stem, ranked, args.format)
    print(f"# strategy={ranked.strategy} profile_owner={ranked.profile_owner}")
    for i, e in enumerate(ranked.entries, start=1):
        print(f"{i}\t{e.item_id}\t{e.score:.6f}\t{e.title or ''}")
    print(f"wrote {path}", file=sys.stderr)
    return 0


def _aggregate_candidates(args, ds: Dataset, grp, candidates) -> RankedList:
    """Rank candidates by aggregated member ratings instead of AII."""
    titles = {c.item_id: c.title for c in candidates}
    slice_ = GroupRatingsSlice.from_dataset(ds, grp.members, [c.item_id for c in candidates])
    scores = aggregate_ratings(slice_, args.aggregate, tau=args.tau)
    for item in slice_.incomplete_items():
        try:
            mean = predict_group_item_rating(grp.members, item, ds, args.min_raters)
        except InsufficientRaters:
            continue
        print(f"incomplete\t{item}\tpredicted={mean:.4f}", file=sys.stderr)
    entries = tuple(RankedEntry(i, s, titles.get(i)) for i, s in scores[: args.n])
    return RankedList(grp.group_id, entries, f"aggregate-{args.aggregate}", None)


def cmd_simulcast(args: argparse.Namespace) -> int:
    ds = load_source(args)
    groups = form_ssg(ds, args.g, args.m)
    candidates = load_candidates(_require(args.candidates, "--candidates"), ds)
    results = broadcast(groups, candidates, min(args.n, len(candidates)))
    out = output_dir(args)
    paths = write_broadcast(os.path.join(out, "broadcast"), results)
    print(f"{len(paths)} groups, {sum(len(r) for r in results.values())} member lists")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if args.dataset or args.ratings:
        ds = load_source(args)
    else:
        ds = synth_dataset(
            args.seed, args.users, args.items, (args.min_watch, args.max_watch), "bench"
        )
    report = run_bench(ds, args.m, args.n)
    out = output_dir(args)
    path = os.path.join(out, "bench.json")
    _write_text(path, json.dumps(report.to_dict(), indent=1) + "\n")
    doc = report.to_dict()
    for key in (
        "n_users", "m", "groups_formed", "topn_generations_personalized",
        "topn_generations_grouped", "reduction_factor",
        "aii_evaluations_personalized", "aii_evaluations_grouped",
    ):
        print(f"{key}\t{doc[key]}")
    for phase, secs in report.timings.items():
        print(f"time_{phase}\t{secs:.4f}s", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--ratings", help="MovieLens ratings.csv")
    data.add_argument("--emotions", help="emotion label CSV (tid,mid,iid,mood,...)")
    data.add_argument("--movies", help="optional movies.csv, only used for stats")
    data.add_argument("--dataset", help="dataset JSON written by `ingest`")
    data.add_argument("--dataset-id", default="dataset")
    data.add_argument("--out", help="output directory (default $AFFECT_REC_HOME or ./affect_rec_out)")
    data.add_argument("--format", choices=("csv", "json"), default="csv")
    data.add_argument("--seed", type=int, default=0)
    data.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(
        prog="affect-rec",
        description="Emotion-profile matching and group recommendation over MovieLens-style data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[data], help="join ratings with emotion labels")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", parents=[data], help="print dataset statistics")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pac", parents=[data], help="pseudo-associate a user or item")
    p.add_argument("--user", type=_user_id, required=True, help="source user (or item) id")
    p.add_argument("--target", action="append", required=True, help="target dataset JSON")
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--kind", choices=("user", "item"), default="user")
    p.set_defaults(func=cmd_pac)

    p = sub.add_parser("form-ssg", parents=[data], help="form system simulcast groups")
    p.add_argument("--g", type=_positive_int, default=10)
    p.add_argument("--m", type=_positive_int, default=60)
    p.set_defaults(func=cmd_form_ssg)

    p = sub.add_parser("group", parents=[data], help="administer user multi-groups")
    p.add_argument("action", choices=("create", "delete", "add", "remove", "list"))
    p.add_argument("--group-id")
    p.add_argument("--name")
    p.add_argument("--owner", type=_user_id)
    p.add_argument("--actor", type=_user_id)
    p.add_argument("--user", type=_user_id)
    p.add_argument("--visibility", choices=[v.value for v in Visibility], default="PMG")
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("rerank", parents=[data], help="rerank candidates for one user")
    p.add_argument("--user", type=_user_id, required=True)
    p.add_argument("--candidates")
    p.add_argument("--n", type=_positive_int, default=10)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("group-recommend", parents=[data], help="top-N for a multi-group")
    p.add_argument("--group", help="group JSON file")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="dominant")
    p.add_argument("--candidates")
    p.add_argument("--n", type=_positive_int, default=10)
    p.add_argument(
        "--aggregate",
        choices=[a.value for a in Aggregation],
        help="rank by aggregated member ratings (needs --ratings) instead of AII",
    )
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--min-raters", type=_positive_int, default=1)
    p.set_defaults(func=cmd_group_recommend)

    p = sub.add_parser("simulcast", parents=[data], help="broadcast candidates to all SSGs")
    p.add_argument("--g", type=_positive_int, default=10)
    p.add_argument("--m", type=_positive_int, default=60)
    p.add_argument("--candidates")
    p.add_argument("--n", type=_positive_int, default=10)
    p.set_defaults(func=cmd_simulcast)

    p = sub.add_parser("bench", parents=[data], help="count top-N work, personalized vs grouped")
    p.add_argument("--m", type=_positive_int, default=60)
    p.add_argument("--n", type=_positive_int, default=10)
    p.add_argument("--users", type=_positive_int, default=610)
    p.add_argument("--items", type=_positive_int, default=3000)
    p.add_argument("--min-watch", type=_positive_int, default=20)
    p.add_argument("--max-watch", type=_positive_int, default=200)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"affect-rec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: FileNotFound: {exc.filename or exc}", file=sys.stderr)
        return EXIT_DATA
    except AffectRecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
