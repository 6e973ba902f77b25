"""Command-line entry point: ``ghostsmell {run,check,stats,sample,leakage}``.

Exit codes: 0 success, 1 negative heuristic verdict (``check`` only),
2 usage or data error.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import DataError, Dataset, load_csv, leakage_zero_fraction, minmax_fit_transform, save_csv
from .evalstats import METRICS, compare_pair
from .ghost import GhostConfig, read_results_csv, run_experiment, write_results_csv
from .heuristic import AUTOENCODER_TRAINING, DEFAULT_THRESHOLD, complexity_check
from .sampling import FuzzyConfig, SmoteConfig, fuzzy_sample, preprocess_ghost
from .tuner import ConfigSpace

log = logging.getLogger("ghostsmell")

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


@dataclass
class ExperimentConfig:
    data: list[Path] = field(default_factory=list)
    test_fraction: float = 0.30
    repeats: int = 20
    base_seed: int = 0
    jobs: int = 1
    out: Path = Path("results")
    ghost: GhostConfig = field(default_factory=GhostConfig)

    def validate(self) -> None:
        if not self.data:
            raise DataError("no data files given (use --data or a config file)")
        if self.repeats < 1:
            raise DataError("repeats must be >= 1")
        for path in self.data:
            if not path.is_file():
                raise DataError(f"data file not readable: {path}")


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _range(text: str, cast):
    lo, hi = (cast(part) for part in text.split(","))
    return lo, hi


def load_experiment(args) -> ExperimentConfig:
    """Merge an optional INI file (section ``[experiment]``) with flags; flags win."""
    values: dict[str, str] = {}
    if args.config:
        parser = configparser.ConfigParser()
        if not parser.read(args.config, encoding="utf-8"):
            raise DataError(f"config file not readable: {args.config}")
        if parser.has_section("experiment"):
            values = dict(parser["experiment"])

    def pick(flag, key, cast):
        value = getattr(args, flag, None)
        if value is not None:
            return value
        if key in values:
            return cast(values[key])
        return None

    data = args.data or [p.strip() for p in values.get("data", "").replace("\n", ",").split(",")
                         if p.strip()]
    exp = ExperimentConfig(data=[Path(p) for p in data])
    for flag, key, cast in [
        ("test_fraction", "test_fraction", float),
        ("repeats", "repeats", int),
        ("seed", "seed", int),
        ("jobs", "jobs", int),
        ("out", "out", Path),
    ]:
        value = pick(flag, key, cast)
        if value is not None:
            setattr(exp, "base_seed" if flag == "seed" else flag, value)

    space_kwargs = {}
    if "preprocessors" in values:
        space_kwargs["preprocessors"] = tuple(p.strip() for p in values["preprocessors"].split(","))
    for key, cast in [("n_layers", int), ("units", int), ("epochs", int), ("learning_rate", float)]:
        if key in values:
            space_kwargs[key] = _range(values[key], cast)

    ghost_kwargs = {"space": ConfigSpace(**space_kwargs)}
    for flag, key, cast in [
        ("tau", "tau", float),
        ("epsilon", "epsilon", float),
        ("iterations", "iterations", int),
    ]:
        value = pick(flag, key, cast)
        if value is not None:
            ghost_kwargs[key] = value
    delta_r = pick("delta_r", "delta_r", float)
    if delta_r is not None:
        ghost_kwargs["fuzzy"] = FuzzyConfig(delta_r)
    if "k_neighbors" in values:
        ghost_kwargs["smote"] = SmoteConfig(int(values["k_neighbors"]))
    for key, cast in [("batch_size", int), ("metric", str), ("validation_fraction", float)]:
        if key in values:
            ghost_kwargs[key] = cast(values[key])
    exp.ghost = GhostConfig(**ghost_kwargs)
    return exp


def _median_table(rows) -> list[str]:
    lines = ["| dataset | " + " | ".join(METRICS) + " |",
             "|---|" + "---|" * len(METRICS)]
    names = list(dict.fromkeys(r.dataset_name for r in rows))
    for name in names:
        mine = [r.metrics for r in rows if r.dataset_name == name]
        medians = [np.median([getattr(m, k) for m in mine]) for k in METRICS]
        lines.append(f"| {name} | " + " | ".join(f"{v:.1f}" for v in medians) + " |")
    return lines


def cmd_run(args) -> int:
    try:
        exp = load_experiment(args)
        exp.validate()
    except (DataError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    exp.out.mkdir(parents=True, exist_ok=True)
    results_path = exp.out / "results.csv"
    all_rows, failed = [], []
    for path in exp.data:
        name = path.stem
        try:
            d = load_csv(path)
            rows = run_experiment(d, name, exp.ghost, exp.repeats, exp.base_seed,
                                  exp.test_fraction, exp.jobs)
        except Exception as err:  # one bad dataset must not sink the others
            print(f"error: dataset {name} ({path}) failed: {err}", file=sys.stderr)
            failed.append(name)
            continue
        all_rows.extend(rows)
    write_results_csv(all_rows, results_path)
    report = ["# GHOST results (median over repeats)", ""] + _median_table(all_rows)
    if failed:
        report += ["", "Failed datasets: " + ", ".join(failed)]
    (exp.out / "report.md").write_text("\n".join(report) + "\n", encoding="utf-8")
    print(f"wrote {results_path} ({len(all_rows)} rows)")
    return EXIT_ERROR if failed else EXIT_OK


def cmd_check(args) -> int:
    try:
        d = load_csv(args.data)
    except (OSError, DataError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    cfg = replace(
        AUTOENCODER_TRAINING,
        epochs=args.epochs or AUTOENCODER_TRAINING.epochs,
        learning_rate=args.learning_rate or AUTOENCODER_TRAINING.learning_rate,
        batch_size=args.batch_size or AUTOENCODER_TRAINING.batch_size,
        seed=args.seed,
    )
    verdict = complexity_check(d, args.bottleneck, cfg, args.threshold)
    print("layers: " + "-".join(str(s) for s in verdict.spec.layer_sizes))
    for i, loss in enumerate(verdict.attempt_losses, start=1):
        print(f"attempt {i}: loss {loss:.4g}")
    if verdict.recommended:
        print(f"feedforward recommended (min loss {verdict.min_loss:.4g} < {verdict.threshold:g})")
        return EXIT_OK
    print(f"feedforward not recommended (min loss {verdict.min_loss:.4g} >= {verdict.threshold:g})")
    return EXIT_NEGATIVE


def _by_dataset(rows) -> dict[str, list]:
    out: dict[str, list] = {}
    for r in rows:
        out.setdefault(r.dataset_name, []).append(r.metrics)
    return out


def cmd_stats(args) -> int:
    try:
        ours = _by_dataset(read_results_csv(args.ours))
        base = _by_dataset(read_results_csv(args.baseline))
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    missing = [n for n in ours if n not in base]
    extra = [n for n in base if n not in ours]
    if missing or extra:
        if missing:
            print(f"error: baseline has no results for dataset(s): {', '.join(missing)}",
                  file=sys.stderr)
        if extra:
            print(f"error: ours has no results for dataset(s): {', '.join(extra)}",
                  file=sys.stderr)
        return EXIT_ERROR

    header = "| dataset | " + " | ".join(f"{m} (baseline) | {m} (ours)" for m in METRICS) + " |"
    lines = [header, "|---|" + "---|" * (2 * len(METRICS))]
    tally = {m: {"win": 0, "tie": 0, "loss": 0} for m in METRICS}
    for name in ours:
        cells = []
        for m in METRICS:
            mine = [getattr(r, m) for r in ours[name]]
            theirs = [getattr(r, m) for r in base[name]]
            verdict = compare_pair(mine, theirs)
            tally[m][verdict] += 1
            cell = f"{np.median(mine):.1f}"
            if verdict != "tie":
                cell += f" *{verdict}*"
            cells += [f"{np.median(theirs):.1f}", cell]
        lines.append(f"| {name} | " + " | ".join(cells) + " |")

    total = {k: sum(t[k] for t in tally.values()) for k in ("win", "tie", "loss")}
    lines += ["", "| metric | win | tie | loss |", "|---|---|---|---|"]
    for m in METRICS:
        t = tally[m]
        lines.append(f"| {m} | {t['win']} | {t['tie']} | {t['loss']} |")
    lines.append(f"| total | {total['win']} | {total['tie']} | {total['loss']} |")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def cmd_sample(args) -> int:
    try:
        d = load_csv(args.data)
        scaled, scaler = minmax_fit_transform(d)
        fuzzy = FuzzyConfig(args.delta_r)
        if args.fuzzy_only:
            out = fuzzy_sample(scaled, fuzzy)
            if args.two_sample:
                out = fuzzy_sample(out, fuzzy)
        else:
            out = preprocess_ghost(scaled, args.two_sample, fuzzy,
                                   SmoteConfig(args.k_neighbors), args.seed)
    except (OSError, DataError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    # originals are written verbatim; only appended rows come back from [0, 1]
    added = scaler.inverse_transform(out.features[len(d):])
    result = Dataset(np.vstack([d.features, added]), out.labels, d.feature_names)
    save_csv(result, args.out)
    n0 = int((result.labels == 0).sum())
    print(f"wrote {args.out}: {len(result)} rows (class 0: {n0}, class 1: {len(result) - n0})")
    return EXIT_OK


def cmd_leakage(args) -> int:
    try:
        train, test = load_csv(args.train), load_csv(args.test)
        pct = leakage_zero_fraction(train, test)
    except (OSError, DataError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    print(pct)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghostsmell", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="repeated split + GHOST runs over one or more datasets")
    run.add_argument("--config", help="INI file with an [experiment] section")
    run.add_argument("--data", action="append", help="feature CSV (repeatable)")
    run.add_argument("--repeats", type=positive_int)
    run.add_argument("--seed", type=int, help="base seed; repeat i uses seed + i")
    run.add_argument("--test-fraction", type=float)
    run.add_argument("--tau", type=float)
    run.add_argument("--delta-r", type=float)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--iterations", type=positive_int)
    run.add_argument("--jobs", type=positive_int)
    run.add_argument("--out", type=Path, help="output directory (default: results)")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="autoencoder test: is a feedforward net worth trying?")
    check.add_argument("--data", required=True)
    check.add_argument("--bottleneck", type=positive_int,
                       help="bottleneck width (default 32, or 128 above 512 features)")
    check.add_argument("--epochs", type=positive_int)
    check.add_argument("--learning-rate", type=float)
    check.add_argument("--batch-size", type=positive_int)
    check.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    check.add_argument("--seed", type=int, default=0)
    check.set_defaults(func=cmd_check)

    stats = sub.add_parser("stats", help="Scott-Knott comparison of two results CSVs")
    stats.add_argument("--ours", required=True)
    stats.add_argument("--baseline", required=True)
    stats.add_argument("--out", help="also write the markdown here")
    stats.set_defaults(func=cmd_stats)

    sample = sub.add_parser("sample", help="oversample a CSV and write it back")
    sample.add_argument("--data", required=True)
    sample.add_argument("--out", required=True)
    sample.add_argument("--delta-r", type=float, default=0.01)
    sample.add_argument("--k-neighbors", type=positive_int, default=5)
    sample.add_argument("--two-sample", action="store_true")
    sample.add_argument("--fuzzy-only", action="store_true", help="skip the SMOTE step")
    sample.add_argument("--seed", type=int, default=0)
    sample.set_defaults(func=cmd_sample)

    leak = sub.add_parser("leakage", help="percent of exactly-zero train/test distances")
    leak.add_argument("--train", required=True)
    leak.add_argument("--test", required=True)
    leak.set_defaults(func=cmd_leakage)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
