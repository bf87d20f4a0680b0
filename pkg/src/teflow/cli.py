"""Command-line front end: ingestion, index construction, and reproducible analyses.

Exit codes: 0 success, 2 input/validation error, 3 statistical-procedure failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import ParseError, TeflowError, ValueOutOfRange
from .market import garman_klass_volatility, load_ohlc_csv, log_returns, parkinson_volatility
from .pipeline import AnalysisReport, AnalysisSpec, WindowScheme, run_analysis
from .series import DatedSeries, format_value, load_series_csv
from .te import TeConfig
from .trends import PRESET_NAMES, build_composite, first_difference, load_keyword_file, load_trend_csv, preset
from .synth import ProcessSpec, generate

log = logging.getLogger(__name__)

SIGNIFICANCE = 0.05


def _parse_quantiles(text: str) -> tuple[float, ...]:
    try:
        cuts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad quantile list {text!r}") from None
    return cuts


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimator")
    g.add_argument("--k", type=int, default=1, help="target history length")
    g.add_argument("--l", type=int, default=1, help="source history length")
    g.add_argument("--quantiles", type=_parse_quantiles, default=(0.05, 0.95),
                   metavar="Q1,Q2,...", help="symbolization quantile cuts (default 0.05,0.95)")
    g.add_argument("--base", type=float, default=2.0, help="logarithm base (default 2, bits)")
    g.add_argument("--shuffles", type=int, default=100, help="surrogate shuffle count")
    g.add_argument("--boot", type=int, default=300,
                   help="bootstrap replications for std.err/p-value (0 disables inference)")
    g.add_argument("--block-order", type=int, default=None,
                   help="Markov order of the bootstrap source regeneration (default: l)")
    g.add_argument("--seed", type=int, default=0, help="master seed")
    g.add_argument("--threads", type=int, default=1,
                   help="worker threads for replications (never changes results)")


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--config", type=Path, default=None,
                   help="key=value file supplying flag defaults")
    p.add_argument("--plot-data", action="store_true",
                   help="also write plot-ready CSVs where applicable")
    p.add_argument("--json-errors", action="store_true",
                   help="emit errors as machine-readable JSON on stderr")


def _te_config(args) -> TeConfig:
    return TeConfig(k=args.k, l=args.l, quantile_cuts=tuple(args.quantiles),
                    log_base=args.base, n_shuffles=args.shuffles, n_bootstrap=args.boot,
                    block_order=args.block_order, seed=args.seed)


def _write_run_config(args, command: str) -> None:
    """Audit trail: the fully resolved configuration next to the outputs."""
    skip = {"func", "json_errors", "config"}
    lines = [f"command = {command}"]
    for key in sorted(vars(args)):
        if key in skip or key == "command":
            continue
        value = getattr(args, key)
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    out = Path(args.out) if hasattr(args, "out") else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{command}_config.txt").write_text("\n".join(lines) + "\n")


def read_config_file(path: Path) -> dict[str, str]:
    """Plain key=value configuration; # starts a comment, blank lines ignored."""
    values: dict[str, str] = {}
    for i, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected key = value", path=path, line=i)
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _inject_config(argv: list[str]) -> list[str]:
    """Expand --config FILE into leading flags so explicit flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    path = Path(argv[idx + 1])
    values = read_config_file(path)
    injected: list[str] = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                injected.append(flag)
            continue
        for part in value.split(",") if key in ("target", "target_label") else [value]:
            injected.extend([flag, part])
    # keep the subcommand first, then config-derived flags, then explicit flags
    return argv[:1] + injected + argv[1:]


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    wrote = 0
    if args.ohlc:
        series = load_ohlc_csv(args.ohlc)
        dest = out / (Path(args.ohlc).stem + ".csv")
        series.to_csv(dest)
        print(f"ohlc: {len(series)} bars -> {dest}")
        wrote += 1
    trend_files: list[Path] = []
    if args.trends_dir:
        trend_files.extend(sorted(Path(args.trends_dir).glob("*.csv")))
    trend_files.extend(Path(f) for f in args.trend)
    for f in trend_files:
        series = load_trend_csv(f, keyword=f.stem, tolerant=True)
        dest = out / (f.stem + ".csv")
        series.to_csv(dest)
        print(f"trend {f.stem!r}: {len(series)} rows -> {dest}")
        wrote += 1
    if not wrote:
        raise ParseError("nothing to ingest; pass --ohlc and/or --trends-dir/--trend")
    _write_run_config(args, "ingest")
    return 0


def cmd_index(args) -> int:
    if args.set:
        kw_set = preset(args.set)
    elif args.keywords:
        kw_set = load_keyword_file(args.keywords)
    else:
        raise ValueOutOfRange(f"pass --set (one of {', '.join(PRESET_NAMES)}) or --keywords FILE")
    input_dir = Path(args.input_dir)
    series_by_keyword = {}
    for kw in kw_set.keywords:
        candidates = [input_dir / f"{kw}.csv", input_dir / f"{kw.casefold()}.csv"]
        found = next((c for c in candidates if c.exists()), None)
        if found is None:
            log.warning("no file for keyword %r; composite coverage reduced", kw)
            continue
        series_by_keyword[kw] = load_trend_csv(found, keyword=kw, tolerant=True)
    composite = build_composite(series_by_keyword, kw_set)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    levels_path = out / f"{kw_set.name}.csv"
    composite.levels.to_csv(levels_path)
    with open(out / f"{kw_set.name}_coverage.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "coverage"])
        for d, c in zip(composite.levels.dates, composite.coverage):
            w.writerow([d.isoformat(), c])
    print(f"index {kw_set.name!r}: {len(composite.levels)} days, "
          f"{len(series_by_keyword)}/{len(kw_set)} keywords -> {levels_path}")
    if args.diff:
        diff_path = out / f"{kw_set.name}_diff.csv"
        first_difference(composite.levels).to_csv(diff_path)
        print(f"first differences -> {diff_path}")
    _write_run_config(args, "index")
    return 0


def cmd_returns(args) -> int:
    series = load_ohlc_csv(args.ohlc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dest = out / "returns.csv"
    log_returns(series).to_csv(dest)
    print(f"log returns: {len(series) - 1} rows -> {dest}")
    _write_run_config(args, "returns")
    return 0


def cmd_vol(args) -> int:
    series = load_ohlc_csv(args.ohlc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.method == "parkinson":
        vol = parkinson_volatility(series)
        dest = out / "vol_parkinson.csv"
    else:
        vol = garman_klass_volatility(series).drop_missing()
        dest = out / "vol_gk.csv"
    vol.to_csv(dest)
    print(f"{args.method} volatility: {len(vol)} rows -> {dest}")
    _write_run_config(args, "vol")
    return 0


def _load_te_inputs(args) -> tuple[DatedSeries, list[DatedSeries]]:
    source = load_series_csv(args.source, label=args.source_label)
    targets = []
    labels = list(args.target_label)
    for i, path in enumerate(args.target):
        label = labels[i] if i < len(labels) else None
        targets.append(load_series_csv(path, label=label))
    return source, targets


def _analysis_spec(args, source: DatedSeries, targets: list[DatedSeries], *,
                   lag_range=(1, 1), window_scheme=None, include_base_rows=True,
                   lag_mode="history") -> tuple[AnalysisSpec, dict[str, DatedSeries]]:
    series = {source.label: source}
    pairs = []
    transforms = {source.label: args.source_transform}
    for t in targets:
        series[t.label] = t
        pairs.append((source.label, t.label, True))
        transforms[t.label] = args.target_transform
    spec = AnalysisSpec(pairs=tuple(pairs), te_config=_te_config(args),
                        lag_range=lag_range, window_scheme=window_scheme,
                        transforms=transforms, lag_mode=lag_mode,
                        include_base_rows=include_base_rows)
    return spec, series


def _emit_report(report: AnalysisReport, out: Path, stem: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / f"{stem}_report.csv")
    report.write_json(out / f"{stem}_report.json")
    print(f"report -> {out / (stem + '_report.csv')} and .json")


def cmd_te(args) -> int:
    source, targets = _load_te_inputs(args)
    spec, series = _analysis_spec(args, source, targets)
    report = run_analysis(spec, series, n_jobs=args.threads)
    _emit_report(report, Path(args.out), "te")
    for est in report.rows:
        p = "n/a" if est.p_value is None else format_value(est.p_value)
        print(f"  {est.direction}: TE={est.te:.4f} ETE={est.ete:.4f} p={p}")
    _write_run_config(args, "te")
    return 0


def cmd_lagsweep(args) -> int:
    source, targets = _load_te_inputs(args)
    spec, series = _analysis_spec(args, source, targets,
                                  lag_range=(args.min_lag, args.max_lag),
                                  include_base_rows=False, lag_mode=args.mode)
    report = run_analysis(spec, series, n_jobs=args.threads)
    out = Path(args.out)
    _emit_report(report, out, "lagsweep")
    if args.plot_data:
        with open(out / "lagsweep_plot.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["direction", "lag", "ete", "p_value", "significant"])
            for direction, curve in report.lag_curves.items():
                for lag, est in curve:
                    sig = "" if est.p_value is None else int(est.p_value < SIGNIFICANCE)
                    w.writerow([direction, lag, format_value(est.ete),
                                "" if est.p_value is None else format_value(est.p_value), sig])
        print(f"plot data -> {out / 'lagsweep_plot.csv'}")
    _write_run_config(args, "lagsweep")
    return 0


def cmd_windows(args) -> int:
    scheme = WindowScheme(count=args.count, size=args.size)
    source, targets = _load_te_inputs(args)
    spec, series = _analysis_spec(args, source, targets, window_scheme=scheme,
                                  include_base_rows=False)
    report = run_analysis(spec, series, n_jobs=args.threads)
    out = Path(args.out)
    _emit_report(report, out, "windows")
    if args.plot_data:
        with open(out / "windows_plot.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["direction", "window_index", "window_start", "window_end",
                        "ete", "p_value", "significant"])
            for wr in report.window_results:
                for est in (wr.forward, wr.backward):
                    sig = "" if est.p_value is None else int(est.p_value < SIGNIFICANCE)
                    w.writerow([est.direction, wr.index, wr.start.isoformat(),
                                wr.end.isoformat(), format_value(est.ete),
                                "" if est.p_value is None else format_value(est.p_value), sig])
        print(f"plot data -> {out / 'windows_plot.csv'}")
    _write_run_config(args, "windows")
    return 0


def cmd_synthgen(args) -> int:
    tables = {}
    if args.tables:
        raw = json.loads(Path(args.tables).read_text())
        tables["source_transitions"] = tuple(tuple(r) for r in raw["source"])
        tables["target_transitions"] = tuple(tuple(tuple(rr) for rr in r) for r in raw["target"])
    spec = ProcessSpec(kind=args.kind, length=args.length, seed=args.seed,
                       delay=args.delay, noise=args.noise, phi=args.phi, **tables)
    src, tgt = generate(spec)
    start = date(2015, 1, 1)
    dates = tuple(start + timedelta(days=i) for i in range(args.length))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    DatedSeries(dates=dates, values=np.asarray(src, dtype=float),
                label="synth_source").to_csv(out / "synth_source.csv")
    DatedSeries(dates=dates, values=np.asarray(tgt, dtype=float),
                label="synth_target").to_csv(out / "synth_target.csv")
    print(f"{args.kind} pair of length {args.length} -> {out / 'synth_source.csv'}, "
          f"{out / 'synth_target.csv'}")
    _write_run_config(args, "synthgen")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teflow",
        description="Directional information flow between time series: transfer entropy, "
                    "effective transfer entropy, and the market/attention data pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize input CSVs")
    p.add_argument("--ohlc", type=Path, default=None, help="OHLC CSV to validate")
    p.add_argument("--trends-dir", type=Path, default=None, help="directory of keyword CSVs")
    p.add_argument("--trend", type=Path, action="append", default=[],
                   help="single keyword CSV (repeatable)")
    _add_io_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build a composite attention index")
    p.add_argument("--set", default=None,
                   help=f"built-in keyword set: one of {', '.join(PRESET_NAMES)}")
    p.add_argument("--keywords", type=Path, default=None, help="custom keyword list file")
    p.add_argument("--input-dir", type=Path, required=True, help="directory of keyword CSVs")
    p.add_argument("--diff", action="store_true", help="also write first differences")
    _add_io_flags(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("returns", help="log returns from OHLC closes")
    p.add_argument("--ohlc", type=Path, required=True)
    _add_io_flags(p)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("vol", help="daily range volatility from OHLC bars")
    p.add_argument("--ohlc", type=Path, required=True)
    p.add_argument("--method", choices=("parkinson", "gk"), default="parkinson")
    _add_io_flags(p)
    p.set_defaults(func=cmd_vol)

    def add_pair_flags(p):
        p.add_argument("--source", type=Path, required=True, help="source series CSV")
        p.add_argument("--target", type=Path, action="append", required=True,
                       help="target series CSV (repeatable)")
        p.add_argument("--source-label", default=None)
        p.add_argument("--target-label", action="append", default=[])
        p.add_argument("--source-transform", choices=("levels", "diff"), default="levels")
        p.add_argument("--target-transform", choices=("levels", "diff"), default="levels")
        _add_estimator_flags(p)
        _add_io_flags(p)

    p = sub.add_parser("te", help="both-direction effective transfer entropy")
    add_pair_flags(p)
    p.set_defaults(func=cmd_te)

    p = sub.add_parser("lagsweep", help="estimates across a range of lags")
    add_pair_flags(p)
    p.add_argument("--min-lag", type=int, default=1)
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--mode", choices=("history", "shift"), default="history",
                   help="history: k=l=lag; shift: shift the source back lag-1 days")
    p.set_defaults(func=cmd_lagsweep)

    p = sub.add_parser("windows", help="non-overlapping window analysis")
    add_pair_flags(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--count", type=int, default=None, help="number of equal windows")
    g.add_argument("--size", type=int, default=None, help="window length in observations")
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("synthgen", help="generate a synthetic pair with known coupling")
    p.add_argument("--kind", choices=("iid_binary", "copy", "coupled_markov", "gaussian_ar1"),
                   required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--delay", type=int, default=1, help="copy delay")
    p.add_argument("--noise", type=float, default=0.0, help="copy flip probability")
    p.add_argument("--phi", type=float, default=0.5, help="AR(1) coefficient")
    p.add_argument("--tables", type=Path, default=None,
                   help="JSON file with coupled_markov transition tables")
    p.add_argument("--seed", type=int, default=0)
    _add_io_flags(p)
    p.set_defaults(func=cmd_synthgen)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv:
        argv = _inject_config(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except TeflowError as err:
        if getattr(args, "json_errors", False):
            payload = {"error": type(err).__name__, "message": str(err),
                       "exit_code": err.exit_code}
            print(json.dumps(payload), file=sys.stderr)
        else:
            print(f"error: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
