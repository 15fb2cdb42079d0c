#!/usr/bin/env python3
"""
cuesync - Cued Speech lip/hand re-synchronization pipeline

Measures how far the hand runs ahead of the lips in Cued Speech, fits the
normalized hand-preceding-time model, predicts hand target instants from
lip timing alone and scores the predictions against hand annotations.

Pipeline:
    parse      TextGrid (lip) + EAF (hand) annotations -> canonical JSONL
    measure    canonical JSONL -> per-vowel measure table (CSV)
    stats      measure table -> descriptive statistics per cuer / group
    fit        measure table -> fitted predictor (JSON)
    predict    predictor + measure table -> predicted hand target instants
    eval       predictors + landmark tracks -> score report
    synth      seeded synthetic corpus with known ground truth
    plot-data  CSV data behind the error, distance and polar figures

Usage:
    # Generate a synthetic corpus and analyse it end to end
    cuesync synth --n 200 --seed 7 --out corpus/
    cuesync measure --in corpus/corpus.jsonl --out measures.csv
    cuesync stats --in measures.csv --group summary
    cuesync fit --in measures.csv --subset ALL --variant combined --holdout --out a-lr.json
    cuesync fit --in measures.csv --subset ALL --variant audio --holdout --out audio.json
    cuesync eval --models a-lr.json audio.json --in measures.csv --tracks corpus/tracks

    # Parse a directory of paired annotations for one cuer
    cuesync parse --lip textgrids/ --hand eafs/ --cuer NF1 --hearing normal --out nf1.jsonl

Every output file starts with a '# cuesync <version> config=<hash>' line.
"""

import argparse
import logging
import sys
from pathlib import Path

from cuesync import CANONICAL_EXTENSIONS, EAF_EXTENSIONS, TEXTGRID_EXTENSIONS, __version__
from cuesync.annot_io import (
    Hearing,
    SentenceTimeline,
    align_tiers,
    filter_vowels,
    parse_eaf,
    parse_textgrid,
    read_corpus,
    read_landmarks,
    write_corpus,
)
from cuesync.config import RunConfig, load_config, provenance_line, with_overrides
from cuesync.errors import (
    CountMismatchError,
    CueSyncError,
    InputNotFoundError,
    LabelMismatchError,
    MalformedFileError,
    MissingTrackError,
)
from cuesync.evaluate import (
    compare_predictors,
    frame_to_csv,
    mhcd_summary,
    mse_matrix,
    polar_frame,
    reports_frame,
    split_sentences,
)
from cuesync.measures import MeasureTable, Subset, assemble_table
from cuesync.normalize import (
    Grouping,
    descriptive_stats,
    normalize_table,
    stats_to_csv,
    summary_stats,
)
from cuesync.regression import (
    HptPredictor,
    Variant,
    fit_predictor,
    predict_table,
    search_gamma,
)
from cuesync.synth import SynthOptions, gen_corpus, load_profiles, save_corpus, reference_profiles

logger = logging.getLogger(__name__)


# ─────────────────────────────────────────────────────────────────────────────
# Shared helpers
# ─────────────────────────────────────────────────────────────────────────────


def require_path(path_str: str) -> Path:
    """Return the path, or raise InputNotFoundError if it does not exist."""
    path = Path(path_str)
    if not path.exists():
        raise InputNotFoundError(f"input not found: {path}")
    return path


def get_files(paths: list[str], extensions: set[str]) -> list[Path]:
    """
    Given a list of paths (files or directories), return all files with a matching suffix.
    """
    files = []
    for path_str in paths:
        path = require_path(path_str)
        if path.is_dir():
            for file in sorted(path.iterdir()):
                if file.is_file() and file.suffix.lower() in extensions:
                    files.append(file)
        elif path.suffix.lower() in extensions:
            files.append(path)
        else:
            print(f"Warning: Skipping file with unexpected type: {path}")
    return files


def write_output(path_str: str | None, body: str, config: RunConfig) -> None:
    """Write body after the provenance line, to a file or to stdout."""
    text = provenance_line(config) + body
    if path_str is None:
        sys.stdout.write(text)
        return
    path = Path(path_str)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def load_table(path_str: str) -> MeasureTable:
    return MeasureTable.from_csv(require_path(path_str).read_text())


def load_predictors(paths: list[str]) -> list[HptPredictor]:
    return [HptPredictor.from_json(require_path(p).read_text()) for p in paths]


def load_tracks(tracks_dir: str, keys: list[tuple[str, str]]) -> dict:
    """Landmark tracks stored as <tracks_dir>/<cuer>/<sentence>.csv for the given sentences."""
    root = require_path(tracks_dir)
    tracks = {}
    for cuer_id, sentence_id in keys:
        path = root / cuer_id / f"{sentence_id}.csv"
        if not path.is_file():
            raise MissingTrackError(f"no landmark track at {path}")
        tracks[(cuer_id, sentence_id)] = read_landmarks(path.read_text())
    return tracks


def resolve_config(args: argparse.Namespace, **overrides) -> RunConfig:
    """Config file values overridden by the flags that were given."""
    config = load_config(Path(args.config) if args.config else None)
    return with_overrides(config, **overrides)


def _fmt(value: float) -> str:
    return f"{value:.4f}"


# ─────────────────────────────────────────────────────────────────────────────
# Subcommands
# ─────────────────────────────────────────────────────────────────────────────


def _pick_tier(tiers, name: str | None, path: Path):
    if not tiers:
        raise MalformedFileError(f"{path}: no annotation tiers")
    if name is None:
        return tiers[0]
    for tier in tiers:
        if tier.tier_name == name:
            return tier
    raise MalformedFileError(f"{path}: no tier named {name!r}")


def _parse_pair(
    lip_path: Path, hand_path: Path, sentence_id: str, args, config: RunConfig
) -> SentenceTimeline:
    lip_tier = _pick_tier(parse_textgrid(lip_path.read_text()), args.lip_tier, lip_path)
    hand_tier = _pick_tier(parse_eaf(hand_path.read_text()), args.hand_tier, hand_path)
    lip_tier, _ = filter_vowels(lip_tier, config.vowel_labels)
    hand_tier, _ = filter_vowels(hand_tier, config.vowel_labels)
    return align_tiers(lip_tier, hand_tier, sentence_id, args.cuer, Hearing(args.hearing))


def cmd_parse(args: argparse.Namespace) -> None:
    """Handle the 'parse' subcommand: annotation pairs -> canonical JSONL."""
    config = resolve_config(args)
    lip = require_path(args.lip)
    hand = require_path(args.hand)

    if lip.is_file() and hand.is_file():
        timelines = [_parse_pair(lip, hand, args.sentence_id or lip.stem, args, config)]
        print(f"Parsed 1 sentence from {lip.name} + {hand.name}")
    else:
        lip_files = {f.stem: f for f in get_files([args.lip], TEXTGRID_EXTENSIONS)}
        hand_files = {f.stem: f for f in get_files([args.hand], EAF_EXTENSIONS)}
        unpaired = sorted(set(lip_files) ^ set(hand_files))
        if unpaired:
            print(f"Warning: {len(unpaired)} annotation file(s) without a partner")

        timelines = []
        failures = 0
        for stem in sorted(set(lip_files) & set(hand_files)):
            try:
                timelines.append(_parse_pair(lip_files[stem], hand_files[stem], stem, args, config))
            except (CountMismatchError, LabelMismatchError) as e:
                failures += 1
                print(f"  Excluded {stem}: {type(e).__name__}: {e}")
        print(f"Parsed {len(timelines)} sentence(s), excluded {failures} alignment failure(s)")

    write_output(args.out, write_corpus(timelines), config)
    print(f"Saved: {args.out}")


def cmd_measure(args: argparse.Namespace) -> None:
    """Handle the 'measure' subcommand: canonical JSONL -> measure table CSV."""
    config = resolve_config(args, lvi_convention=args.lvi_convention)

    timelines = []
    for path in get_files(args.inputs, CANONICAL_EXTENSIONS):
        timelines.extend(read_corpus(path.read_text()))

    table = assemble_table(timelines, config.lvi_convention, skip_invalid=True)
    write_output(args.out, table.to_csv(), config)

    print(f"Measured {len(table)} vowel(s) from {len(timelines)} sentence(s)")
    for cuer_id, sentence_id, reason in table.excluded:
        print(f"  Excluded {cuer_id}/{sentence_id}: {reason}")
    print(f"Saved: {args.out}")


def cmd_stats(args: argparse.Namespace) -> None:
    """Handle the 'stats' subcommand: descriptive statistics in milliseconds."""
    config = resolve_config(args)
    table = load_table(args.input)

    if args.group == "summary":
        stats = summary_stats(table)
    else:
        stats = descriptive_stats(table, Grouping(args.group))
    write_output(args.out, stats_to_csv(stats), config)
    if args.out:
        print(f"Saved statistics for {len(stats)} group(s): {args.out}")


def _train_table(table: MeasureTable, config: RunConfig, holdout: bool) -> MeasureTable:
    if not holdout:
        return table
    train_keys, test_keys = split_sentences(table, config.split_ratio, config.seed)
    print(f"  Holding out {len(test_keys)} of {len(train_keys) + len(test_keys)} sentences")
    return table.select_sentences(train_keys)


def cmd_fit(args: argparse.Namespace) -> None:
    """Handle the 'fit' subcommand: fit one predictor variant on one subset."""
    config = resolve_config(
        args,
        gamma=args.gamma,
        norm_policy=args.norm_policy,
        fit_f1f2_on=args.fit_f1f2_on,
        f1f2_estimator=args.estimator,
        seed=args.seed,
        split_ratio=args.split,
    )
    table = _train_table(load_table(args.input), config, args.holdout)

    stats = descriptive_stats(table, config.norm_policy.grouping)
    normalized = normalize_table(table, stats, config.norm_policy)

    gamma = config.gamma
    if args.search_gamma:
        gamma, curve = search_gamma(normalized.subset(args.subset))
        print(f"  Searched {len(curve)} breakpoints, best gamma = {gamma:.2f}")

    predictor = fit_predictor(
        normalized,
        subset=args.subset,
        variant=args.variant,
        gamma=gamma,
        fit_f1f2_on=config.fit_f1f2_on,
        estimator=config.f1f2_estimator,
    )
    write_output(args.out, predictor.to_json() + "\n", config)

    print(f"Fitted {predictor.predictor_id} on {len(normalized.subset(args.subset))} rows")
    for name in ("f1", "f2"):
        line = getattr(predictor, name)
        if line is not None:
            print(f"  {name}: slope {_fmt(line.slope)}  intercept {_fmt(line.intercept)}")
    if predictor.f0 is not None:
        for side in ("left", "right"):
            line = getattr(predictor.f0, side)
            print(f"  f0.{side}: slope {_fmt(line.slope)}  intercept {_fmt(line.intercept)}")
    print(f"Saved: {args.out}")


def cmd_predict(args: argparse.Namespace) -> None:
    """Handle the 'predict' subcommand: predicted HPT and hand target instants."""
    config = resolve_config(args)
    (predictor,) = load_predictors([args.model])
    table = load_table(args.input)

    normalized = normalize_table(table, list(predictor.groups), predictor.norm_policy)
    frame = predict_table(predictor, normalized)
    write_output(args.out, frame_to_csv(frame), config)
    if args.out:
        print(f"Predicted {len(frame)} hand target instant(s) with {predictor.predictor_id}")
        print(f"Saved: {args.out}")


def _eval_setup(args: argparse.Namespace):
    config = resolve_config(
        args, seed=args.seed, split_ratio=args.split, mhcd_interpolate=args.interpolate or None
    )
    table = load_table(args.input)
    predictors = load_predictors(args.models)
    split = split_sentences(table, config.split_ratio, config.seed)
    return config, table, predictors, split


def cmd_eval(args: argparse.Namespace) -> None:
    """Handle the 'eval' subcommand: score predictors on held-out sentences."""
    config, table, predictors, split = _eval_setup(args)
    tracks = load_tracks(args.tracks, table.sentence_keys())

    reports = compare_predictors(
        table,
        predictors,
        tracks,
        split,
        position_map=config.position_map,
        subset=args.subset,
        interpolate=config.mhcd_interpolate,
    )
    write_output(args.out, frame_to_csv(reports_frame(reports)), config)

    if args.out:
        print(f"\n{'predictor':<24} {'e_hpt':>8} {'d_hpt_px':>10} {'accuracy':>9}")
        print("─" * 54)
        for report in reports:
            print(
                f"{report.predictor_id:<24} {_fmt(report.e_hpt):>8} "
                f"{report.d_hpt_px:>10.2f} {report.position_accuracy:>9.3f}"
            )
        print(f"\nSaved: {args.out}")


def cmd_synth(args: argparse.Namespace) -> None:
    """Handle the 'synth' subcommand: generate a seeded synthetic corpus."""
    config = resolve_config(args, seed=args.seed)
    if args.profiles:
        profiles, model = load_profiles(require_path(args.profiles))
    else:
        profiles, model = reference_profiles(), None

    options = SynthOptions(
        quantum=None if args.exact_times else 0.001,
        dwell=args.dwell,
        vowel_labels=config.vowel_labels,
        position_map=config.position_map,
    )
    corpus = gen_corpus(profiles, model, args.n, config.seed, options)
    written = save_corpus(
        corpus, Path(args.out), header=provenance_line(config), annotations=not args.no_annotations
    )
    print(
        f"Generated {len(corpus.timelines)} sentence(s), {len(corpus.truth)} vowel(s) "
        f"for {len(profiles)} cuer(s)"
    )
    print(f"Saved {len(written)} file(s) under {args.out}")


def cmd_plot_data(args: argparse.Namespace) -> None:
    """Handle the 'plot-data' subcommand: CSV data for figures."""
    config, table, predictors, split = _eval_setup(args)

    if args.kind == "mse":
        frame = mse_matrix(table, predictors, split[1])
        body = frame_to_csv(frame, index=True)
    else:
        if args.tracks is None:
            raise InputNotFoundError(f"plot-data --kind {args.kind} needs --tracks")
        tracks = load_tracks(args.tracks, table.sentence_keys())
        reports = compare_predictors(
            table,
            predictors,
            tracks,
            split,
            position_map=config.position_map,
            subset=args.subset,
            interpolate=config.mhcd_interpolate,
        )
        frame = polar_frame(reports) if args.kind == "polar" else mhcd_summary(reports)
        body = frame_to_csv(frame)

    write_output(args.out, body, config)
    if args.out:
        print(f"Saved {args.kind} data ({len(frame)} rows): {args.out}")


# ─────────────────────────────────────────────────────────────────────────────
# Argument parsing
# ─────────────────────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuesync",
        description="Re-synchronize the lip and hand streams of Cued Speech.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Synthetic corpus, measures and the descriptive statistics table
  %(prog)s synth --n 200 --seed 7 --out corpus/
  %(prog)s measure --in corpus/corpus.jsonl --out measures.csv
  %(prog)s stats --in measures.csv --group summary

  # Fit on the training split, then score on the held-out sentences
  %(prog)s fit --in measures.csv --variant combined --holdout --out combined.json
  %(prog)s eval --models combined.json --in measures.csv --tracks corpus/tracks
""",
    )
    parser.add_argument("-v", "--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file of default settings (flags override it)")
    common.add_argument("--verbose", action="store_true", help="Show debug logging")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # ─────────────────────────────────────────────────────────────────────────
    # 'parse' subcommand - annotations to canonical sentences
    # ─────────────────────────────────────────────────────────────────────────
    parse_parser = subparsers.add_parser(
        "parse",
        parents=[common],
        help="Pair TextGrid (lip) and EAF (hand) annotations into canonical JSONL",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --lip s001.TextGrid --hand s001.eaf --cuer NF1 --hearing normal --out s001.jsonl
  %(prog)s --lip textgrids/ --hand eafs/ --cuer DF1 --hearing deaf --out df1.jsonl

Directories are paired by file stem; pairs whose vowels do not align are
excluded and counted.
""",
    )
    parse_parser.add_argument("--lip", required=True, help="TextGrid file or directory")
    parse_parser.add_argument("--hand", required=True, help="EAF file or directory")
    parse_parser.add_argument("--cuer", required=True, help="Cuer id")
    parse_parser.add_argument(
        "--hearing", required=True, choices=[h.value for h in Hearing], help="Hearing status"
    )
    parse_parser.add_argument("--sentence-id", help="Sentence id (single pair; default: stem)")
    parse_parser.add_argument("--lip-tier", help="TextGrid tier name (default: first tier)")
    parse_parser.add_argument("--hand-tier", help="EAF tier name (default: first tier)")
    parse_parser.add_argument("-o", "--out", required=True, help="Output JSONL file")

    # ─────────────────────────────────────────────────────────────────────────
    # 'measure' subcommand - per-vowel measure table
    # ─────────────────────────────────────────────────────────────────────────
    measure_parser = subparsers.add_parser(
        "measure",
        parents=[common],
        help="Compute HPT, LVE, LVI and LVD for every vowel",
    )
    measure_parser.add_argument(
        "--in", dest="inputs", nargs="+", required=True, help="JSONL files or directories"
    )
    measure_parser.add_argument(
        "--lvi-convention",
        choices=["backward", "forward"],
        help="Measure LVI to the previous (backward) or next (forward) vowel",
    )
    measure_parser.add_argument("-o", "--out", required=True, help="Output CSV file")

    # ─────────────────────────────────────────────────────────────────────────
    # 'stats' subcommand - descriptive statistics
    # ─────────────────────────────────────────────────────────────────────────
    stats_parser = subparsers.add_parser(
        "stats",
        parents=[common],
        help="Mean and standard deviation of HPT and LVD (milliseconds)",
    )
    stats_parser.add_argument("--in", dest="input", required=True, help="Measure table CSV")
    stats_parser.add_argument(
        "--group",
        default="per-cuer",
        choices=[g.value for g in Grouping] + ["summary"],
        help="Grouping; summary gives per-cuer rows plus NORMAL, DEAF and ALL (default: per-cuer)",
    )
    stats_parser.add_argument("-o", "--out", help="Output CSV file (default: stdout)")

    # ─────────────────────────────────────────────────────────────────────────
    # 'fit' subcommand - fit a predictor
    # ─────────────────────────────────────────────────────────────────────────
    fit_parser = subparsers.add_parser(
        "fit",
        parents=[common],
        help="Fit an HPT predictor on a subset of the measure table",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --in measures.csv --subset DEAF --variant combined --out d-lr.json
  %(prog)s --in measures.csv --variant lve --gamma -0.3 --out lve.json
  %(prog)s --in measures.csv --holdout --search-gamma --out combined.json
""",
    )
    fit_parser.add_argument("--in", dest="input", required=True, help="Measure table CSV")
    fit_parser.add_argument(
        "--subset", default="ALL", choices=[s.value for s in Subset], help="Rows to fit on"
    )
    fit_parser.add_argument(
        "--variant",
        default="combined",
        choices=[v.value for v in Variant],
        help="Predictor variant (default: combined)",
    )
    fit_parser.add_argument("--gamma", type=float, help="LVE breakpoint, log10 seconds")
    fit_parser.add_argument(
        "--search-gamma",
        action="store_true",
        help="Grid-search the breakpoint instead of using --gamma",
    )
    fit_parser.add_argument(
        "--norm-policy", choices=["per-cuer", "per-group", "global"], help="Normalization groups"
    )
    fit_parser.add_argument(
        "--fit-f1f2-on", choices=["right", "all"], help="Rows the LVI/LVD lines are fit on"
    )
    fit_parser.add_argument(
        "--estimator", choices=["separate", "joint"], help="How the LVI/LVD lines are estimated"
    )
    fit_parser.add_argument(
        "--holdout",
        action="store_true",
        help="Fit on the training side of the seeded sentence split only",
    )
    fit_parser.add_argument("--split", help="Train:test ratio for --holdout (default: 4:1)")
    fit_parser.add_argument("--seed", type=int, help="Split seed for --holdout (default: 0)")
    fit_parser.add_argument("-o", "--out", required=True, help="Output predictor JSON")

    # ─────────────────────────────────────────────────────────────────────────
    # 'predict' subcommand - apply a predictor
    # ─────────────────────────────────────────────────────────────────────────
    predict_parser = subparsers.add_parser(
        "predict",
        parents=[common],
        help="Predict hand target instants from lip timing",
    )
    predict_parser.add_argument("--model", required=True, help="Predictor JSON")
    predict_parser.add_argument("--in", dest="input", required=True, help="Measure table CSV")
    predict_parser.add_argument("-o", "--out", help="Output CSV file (default: stdout)")

    # ─────────────────────────────────────────────────────────────────────────
    # 'eval' and 'plot-data' subcommands - scoring
    # ─────────────────────────────────────────────────────────────────────────
    scoring = argparse.ArgumentParser(add_help=False)
    scoring.add_argument("--models", nargs="+", required=True, help="Predictor JSON files")
    scoring.add_argument("--in", dest="input", required=True, help="Measure table CSV")
    scoring.add_argument("--split", help="Train:test ratio (default: 4:1)")
    scoring.add_argument("--seed", type=int, help="Split seed (default: 0)")
    scoring.add_argument(
        "--subset", default="ALL", choices=[s.value for s in Subset], help="Rows to score"
    )
    scoring.add_argument(
        "--interpolate",
        action="store_true",
        help="Interpolate hand positions between frames instead of nearest frame",
    )

    eval_parser = subparsers.add_parser(
        "eval",
        parents=[common, scoring],
        help="Score predictors on the held-out sentences",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --models combined.json lve.json mean.json audio.json --in measures.csv \\
      --tracks corpus/tracks --split 4:1 --seed 0 --out report.csv
""",
    )
    eval_parser.add_argument("--tracks", required=True, help="Directory of <cuer>/<sentence>.csv")
    eval_parser.add_argument("-o", "--out", help="Output report CSV (default: stdout)")

    plot_parser = subparsers.add_parser(
        "plot-data",
        parents=[common, scoring],
        help="Emit figure data: e_hpt matrix, polar hand positions or MHCD summaries",
    )
    plot_parser.add_argument("--kind", required=True, choices=["mse", "polar", "mhcd"])
    plot_parser.add_argument("--tracks", help="Directory of <cuer>/<sentence>.csv")
    plot_parser.add_argument("-o", "--out", help="Output CSV file (default: stdout)")

    # ─────────────────────────────────────────────────────────────────────────
    # 'synth' subcommand - synthetic corpus
    # ─────────────────────────────────────────────────────────────────────────
    synth_parser = subparsers.add_parser(
        "synth",
        parents=[common],
        help="Generate a seeded synthetic corpus with known ground truth",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --n 1000 --seed 0 --out corpus/
  %(prog)s --profiles cuers.yaml --n 50 --seed 3 --out small/ --no-annotations
""",
    )
    synth_parser.add_argument(
        "--profiles", help="YAML cuer profiles (default: five reference cuers)"
    )
    synth_parser.add_argument(
        "--n", type=int, default=100, help="Sentences per cuer (default: 100)"
    )
    synth_parser.add_argument("--seed", type=int, help="Generator seed (default: 0)")
    synth_parser.add_argument(
        "--exact-times", action="store_true", help="Do not snap annotation times to milliseconds"
    )
    synth_parser.add_argument(
        "--dwell",
        type=float,
        help="Seconds the hand holds each anchor (default: the vowel's hand-interval duration)",
    )
    synth_parser.add_argument(
        "--no-annotations", action="store_true", help="Skip TextGrid/EAF renderings"
    )
    synth_parser.add_argument("-o", "--out", required=True, help="Output directory")

    return parser


COMMANDS = {
    "parse": cmd_parse,
    "measure": cmd_measure,
    "stats": cmd_stats,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "synth": cmd_synth,
    "plot-data": cmd_plot_data,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Handle case where no command specified
    if args.command is None:
        parser.print_help()
        return 0

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        COMMANDS[args.command](args)
    except CueSyncError as e:
        print(f"Error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
