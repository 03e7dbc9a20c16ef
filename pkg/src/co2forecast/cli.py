"""Command-line interface.

Every subcommand reads its options from the command line and, optionally,
from a config file given with ``--config``. The file holds one ``key = value``
per line; keys are the long option names with ``-`` or ``_``, ``#`` starts a
comment and blank lines are ignored. Boolean options take ``true``/``false``.
Command-line flags override the file. Unknown keys are an error.

Each run writes its outputs to ``--out`` together with ``manifest.json``
(resolved options, seed, library versions, wall time) and ``run.cfg``, a
config file that replays the run exactly::

    co2forecast forecast --config OUT/run.cfg --out OUT2

Exit status is 0 on success, 1 on a usage or input error and 2 on an
internal error.
"""

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import platform
import sys
import time
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .composite import Method1Forecaster, Method2Forecaster, preset_assignment
from .decomposition.classical import decompose_classical, detect_period
from .decomposition.emd import EEMDDecomposer
from .evaluation import (BenchmarkReport, friedman_methods, improvement_table, run_benchmark)
from .exceptions import Co2ForecastError, ConfigError
from .models.arima import ArimaForecaster
from .models.base import Strategy, multi_step_forecast
from .models.ffnn import FFNNForecaster
from .models.psf import DPSFForecaster, PSFForecaster
from .scheduler import (FORECAST_HOURS, WINDOW, DayAheadFrame, annual_savings, evaluate_schedule,
                        ratio_stats, schedule_flexible)
from .series import fill_gaps, format_timestamp, load_csv, write_csv

logger = logging.getLogger(__name__)

MODELS = ("arima", "ffnn", "psf", "dpsf", "method1", "method2")
SUBCOMMANDS = ("ingest", "decompose", "forecast", "benchmark", "schedule", "savings", "ratio-stats")
_NOT_CONFIG = {"config", "out", "command"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


# ---------------------------------------------------------------- parsing

def _order(text):
    parts = [int(p) for p in str(text).replace("(", "").replace(")", "").split(",")]
    if len(parts) != 3 or min(parts) < 0:
        raise argparse.ArgumentTypeError(f"order must be p,d,q with non-negative integers: {text!r}")
    return tuple(parts)


def _durations(text):
    """``"1..24"``, ``"4"`` or ``"1,2,4"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("no durations given")
    return out


def _day(text):
    try:
        return date.fromisoformat(str(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _common(p):
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--out", help="output directory (required)")
    p.add_argument("--input", help="hourly CSV with header timestamp,intensity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker cap for parallel steps")
    p.add_argument("--max-gap", type=int, default=6, help="longest missing run to interpolate")


def _model_options(p, default_model="method1"):
    p.add_argument("--model", choices=MODELS, default=default_model)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="recursive")
    p.add_argument("--preset", choices=["france-2019"], default=None)
    p.add_argument("--order", type=_order, default=None, help="ARIMA order p,d,q (default: AICc search)")
    p.add_argument("--lags", type=int, default=28)
    p.add_argument("--hidden", type=int, default=14)
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--window", type=int, default=None, help="PSF window (default 4, DPSF 5)")
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--period", type=int, default=None)
    p.add_argument("--ensemble-size", type=int, default=100)
    p.add_argument("--noise-amplitude", type=float, default=0.2)


def build_parser():
    parser = _Parser(prog="co2forecast", description="Forecast hourly CO2 intensity and "
                     "schedule flexible consumption.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", help="validate a CSV and interpolate short gaps")
    _common(p)

    p = sub.add_parser("decompose", help="classical or EEMD decomposition")
    _common(p)
    p.add_argument("--method", choices=["classical", "eemd"], default="classical")
    p.add_argument("--period", type=int, default=None)
    p.add_argument("--ensemble-size", type=int, default=100)
    p.add_argument("--noise-amplitude", type=float, default=0.2)

    p = sub.add_parser("forecast", help="forecast from the end of the input series")
    _common(p)
    _model_options(p)
    p.add_argument("--horizon", type=int, default=48)

    p = sub.add_parser("benchmark", help="Monte-Carlo comparison of several models")
    _common(p)
    _model_options(p)
    p.add_argument("--methods", default="arima,method1,method2",
                   help=f"comma-separated subset of {','.join(MODELS)}")
    p.add_argument("--patches", type=int, default=25)
    p.add_argument("--patch-len", type=int, default=1248)
    p.add_argument("--horizon", type=int, default=48)
    p.add_argument("--baseline", default="arima", help="method the improvement table is relative to")
    p.add_argument("--friedman", action=argparse.BooleanOptionalAction, default=False)

    p = sub.add_parser("schedule", help="schedule one day of flexible consumption")
    _common(p)
    _model_options(p)
    p.add_argument("--duration", type=int, default=4)
    p.add_argument("--date", type=_day, required=False, help="issue day D (forecast at 12:00 UTC)")
    p.add_argument("--train-len", type=int, default=1200)

    p = sub.add_parser("savings", help="scheduled vs random-time emissions over many days")
    _common(p)
    _model_options(p)
    p.add_argument("--durations", type=_durations, default=list(range(1, 25)))
    p.add_argument("--from", dest="from_day", type=_day, default=None)
    p.add_argument("--to", dest="to_day", type=_day, default=None)
    p.add_argument("--train-len", type=int, default=1200)
    p.add_argument("--baseline", choices=["set", "contiguous"], default="set")

    p = sub.add_parser("ratio-stats", help="forecast/realized ratio per lead hour")
    _common(p)
    _model_options(p)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--train-len", type=int, default=1200)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _option_map(subparser):
    """dest -> action for every long option of a subcommand."""
    out = {}
    for action in subparser._actions:
        if action.option_strings and action.dest not in ("help",):
            out[action.dest] = action
            for flag in action.option_strings:
                if flag.startswith("--") and not flag.startswith("--no-"):
                    out.setdefault(flag[2:].replace("-", "_"), action)
    return out


def read_config(path):
    """Parse a ``key = value`` file into an ordered dict of strings."""
    entries = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key.replace("-", "_")] = value
    return entries


def _config_tokens(entries, options):
    tokens = []
    for key, value in entries.items():
        if key == "command":
            continue
        if key in _NOT_CONFIG or key not in options:
            raise ConfigError(f"unknown config key {key!r}")
        action = options[key]
        flag = max(action.option_strings, key=len)
        if isinstance(action, argparse.BooleanOptionalAction):
            v = value.lower()
            if v not in ("true", "false"):
                raise ConfigError(f"{key} must be true or false, got {value!r}")
            flag = action.option_strings[0] if v == "true" else action.option_strings[1]
            tokens.append(flag)
        elif value != "":
            tokens.extend([flag, value])
    return tokens


def parse_args(argv):
    """Resolve flags and config file into a namespace."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        entries = read_config(args.config)
        cmd = entries.get("command")
        if cmd is not None and cmd != args.command:
            raise ConfigError(f"config is for {cmd!r}, not {args.command!r}")
        sub = _subparser(parser, args.command)
        tokens = _config_tokens(entries, _option_map(sub))
        # config first, then the user's own flags so they win
        args = parser.parse_args([args.command, *tokens, *argv[argv.index(args.command) + 1:]])
    if not args.out:
        raise UsageError(f"co2forecast {args.command}: error: --out is required")
    if not args.input:
        raise UsageError(f"co2forecast {args.command}: error: --input is required")
    return args


def _cfg_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def resolved_options(args):
    """Options that define the run, in stable order (``None`` omitted)."""
    return {k: v for k, v in sorted(vars(args).items())
            if k not in _NOT_CONFIG and v is not None}


def write_run_config(args, path):
    lines = [f"command = {args.command}"]
    lines += [f"{k} = {_cfg_value(v)}" for k, v in resolved_options(args).items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- reports

def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return f"{float(value):.6g}"
    return str(value)


def _jsonable(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return _jsonable(dataclasses.asdict(value))
    if hasattr(value, "to_dict"):
        return _jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (date,)):
        return value.isoformat()
    return value


def _rows(report):
    if hasattr(report, "rows"):
        return list(report.rows())
    return list(report)


def emit_report(report, fmt, path, columns=None):
    """Write ``report`` as CSV (6 significant digits) or JSON (full precision).

    ``report`` is a list of row dicts or an object with ``rows()`` (CSV) and
    ``to_dict()`` or dataclass fields (JSON). CSV columns follow ``columns``
    or the key order of the first row; an empty report yields the header
    alone when ``columns`` is given, otherwise an empty file.
    """
    path = Path(path)
    if fmt == "json":
        text = json.dumps(_jsonable(report), indent=2, sort_keys=False) + "\n"
        path.write_text(text, encoding="utf-8")
        return
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    rows = _rows(report)
    cols = list(columns) if columns is not None else (list(rows[0]) if rows else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if cols:
        writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in cols])
    path.write_text(buf.getvalue(), encoding="utf-8")


def load_json_report(path):
    """Read a benchmark JSON written by :func:`emit_report`."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    data.pop("friedman", None)
    data.pop("improvement", None)
    return BenchmarkReport.from_dict(data)


# ---------------------------------------------------------------- models

def make_model(name, args, seed=None):
    seed = args.seed if seed is None else seed
    if name == "arima":
        return ArimaForecaster(order=args.order)
    if name == "ffnn":
        return FFNNForecaster(lags=args.lags, hidden=args.hidden, repeats=args.repeats, seed=seed)
    if name == "psf":
        return PSFForecaster(window=4 if args.window is None else args.window,
                             clusters=args.clusters, seed=seed)
    if name == "dpsf":
        return DPSFForecaster(window=5 if args.window is None else args.window,
                              clusters=args.clusters, seed=seed)
    preset = preset_assignment(args.preset, name) if args.preset and name.startswith("method") else None
    if name == "method1":
        return Method1Forecaster(assignment=preset, period=args.period, strategy=args.strategy,
                                 seed=seed)
    if name == "method2":
        return Method2Forecaster(assignment=preset, strategy=args.strategy,
                                 ensemble_size=args.ensemble_size,
                                 noise_amplitude=args.noise_amplitude, seed=seed,
                                 n_jobs=args.threads if args.threads > 1 else None)
    raise UsageError(f"unknown model {name!r}; choose from {', '.join(MODELS)}")


def _forecast_values(model, name, values, horizon, strategy):
    if name.startswith("method"):
        model.fit(values)
        return np.asarray(model.predict(horizon)), getattr(model, "component_forecasts_", None)
    return multi_step_forecast(model, values, horizon, strategy).values, None


# ---------------------------------------------------------------- commands

def _load(args):
    series = load_csv(args.input)
    if series.has_missing:
        series = fill_gaps(series, args.max_gap)
    return series


def _timestamps_after(series, horizon):
    last = series.timestamp(len(series) - 1)
    return [format_timestamp(last + timedelta(hours=h + 1)) for h in range(horizon)]


def cmd_ingest(args, out):
    raw = load_csv(args.input)
    n_missing = int(np.isnan(raw.values).sum())
    series = fill_gaps(raw, args.max_gap) if n_missing else raw
    write_csv(series, out / "series.csv")
    summary = {"n": len(series), "start": format_timestamp(series.start_time),
               "end": format_timestamp(series.timestamp(len(series) - 1)),
               "filled": n_missing}
    emit_report(summary, "json", out / "summary.json")


def cmd_decompose(args, out):
    series = _load(args)
    x = series.values
    if args.method == "classical":
        period = args.period if args.period is not None else detect_period(x)
        d = decompose_classical(x, period)
        rows = [{"original": o, "seasonal": s, "trend": t, "random": r}
                for o, s, t, r in zip(x, d.seasonal, d.trend, d.random)]
        emit_report(rows, "csv", out / "components.csv",
                    columns=["original", "seasonal", "trend", "random"])
        emit_report({"period": period}, "json", out / "summary.json")
        return
    dec = EEMDDecomposer(ensemble_size=args.ensemble_size, noise_amplitude=args.noise_amplitude,
                         seed=args.seed, n_jobs=args.threads if args.threads > 1 else None).fit(x)
    imfs = dec.imfs_
    cols = [f"imf_{i + 1}" for i in range(imfs.m)] + ["residual"]
    rows = [dict(zip(cols, [*imfs.imfs[:, t], imfs.residual[t]])) for t in range(x.size)]
    emit_report(rows, "csv", out / "imfs.csv", columns=cols)
    comps = dec.split_.components()
    rows = [{"high": h, "low": lo, "trend": tr}
            for h, lo, tr in zip(comps["high"], comps["low"], comps["trend"])]
    emit_report(rows, "csv", out / "split.csv", columns=["high", "low", "trend"])
    emit_report({"n_imfs": imfs.m, "split_index": dec.split_.split_index,
                 "p_values": list(dec.split_.p_values)}, "json", out / "summary.json")


def cmd_forecast(args, out):
    series = _load(args)
    model = make_model(args.model, args)
    values, parts = _forecast_values(model, args.model, series.values, args.horizon,
                                     args.strategy)
    stamps = _timestamps_after(series, args.horizon)
    rows = [{"timestamp": ts, "forecast": v} for ts, v in zip(stamps, values)]
    emit_report(rows, "csv", out / "forecast.csv", columns=["timestamp", "forecast"])
    if parts:
        roles = list(parts)
        rows = [{"timestamp": ts, **{r: parts[r][i] for r in roles}} for i, ts in enumerate(stamps)]
        emit_report(rows, "csv", out / "components.csv", columns=["timestamp", *roles])


def cmd_benchmark(args, out):
    series = _load(args)
    names = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not names:
        raise UsageError("co2forecast benchmark: error: --methods is empty")
    methods = {name: make_model(name, args) for name in names}
    report = run_benchmark(series.values, methods, n_patches=args.patches,
                           patch_len=args.patch_len, horizon=args.horizon, seed=args.seed)
    emit_report(report, "csv", out / "benchmark.csv",
                columns=["method", "rmse", "mae", "mape", "failed"])
    data = report.to_dict()
    if args.baseline in report.methods:
        try:
            table = improvement_table(report, args.baseline)
            emit_report([{"method": n, **table[n]} for n in report.methods], "csv",
                        out / "improvement.csv", columns=["method", "rmse", "mae", "mape"])
            data["improvement"] = table
        except Co2ForecastError as exc:
            logger.warning("no improvement table: %s", exc)
    if args.friedman:
        rows = []
        for metric in ("rmse", "mae", "mape"):
            try:
                res = friedman_methods(report, metric)
                rows.append({"metric": metric, "statistic": res.statistic, "p_value": res.p_value})
            except ValueError as exc:
                logger.warning("Friedman test on %s skipped: %s", metric, exc)
        emit_report(rows, "csv", out / "friedman.csv", columns=["metric", "statistic", "p_value"])
        data["friedman"] = rows
    emit_report(data, "json", out / "benchmark.json")


def _issue_index(series, day):
    issue = datetime(day.year, day.month, day.day, 12, tzinfo=timezone.utc)
    idx = series.index_of(issue)
    if not 0 <= idx < len(series):
        raise UsageError(f"issue time {format_timestamp(issue)} is outside the input series")
    return idx


def cmd_schedule(args, out):
    series = _load(args)
    x = series.values
    day = args.date
    if day is None:
        # latest day whose 12:00 issue time has history behind it
        day = (series.timestamp(len(series) - 1) - timedelta(hours=12)).date()
    idx = _issue_index(series, day)
    if idx < args.train_len:
        raise UsageError(f"need {args.train_len} hours before the issue time, have {idx}")
    model = make_model(args.model, args)
    fc, _ = _forecast_values(model, args.model, x[idx - args.train_len:idx], FORECAST_HOURS,
                             args.strategy)
    frame = DayAheadFrame(series.timestamp(idx), fc)
    result = schedule_flexible(frame, args.duration)
    realized = x[idx:idx + FORECAST_HOURS][WINDOW] if idx + WINDOW.stop <= x.size else None
    if realized is not None:
        result = evaluate_schedule(result, realized)
    chosen = set(result.chosen_hours)
    rows = [{"timestamp": format_timestamp(series.timestamp(idx) + timedelta(hours=WINDOW.start + h)),
             "forecast": frame.target_window[h],
             "realized": None if realized is None else realized[h],
             "chosen": h in chosen} for h in range(WINDOW.stop - WINDOW.start)]
    emit_report(rows, "csv", out / "schedule.csv",
                columns=["timestamp", "forecast", "realized", "chosen"])
    emit_report({"issue_time": format_timestamp(frame.issue_time), "duration": result.duration,
                 "chosen_hours": list(result.chosen_hours), "forecast_mean": result.forecast_mean,
                 "realized_mean": result.realized_mean}, "json", out / "summary.json")


def cmd_savings(args, out):
    series = _load(args)
    report = annual_savings(series, make_model(args.model, args), durations=args.durations,
                            seed=args.seed, train_len=args.train_len, first_day=args.from_day,
                            last_day=args.to_day,
                            contiguous_baseline=args.baseline == "contiguous")
    emit_report(report, "csv", out / "savings.csv",
                columns=["duration", "scheduled", "baseline", "ratio"])
    emit_report(report, "json", out / "savings.json")


def cmd_ratio_stats(args, out):
    series = _load(args)
    rows = ratio_stats(series, make_model(args.model, args), iterations=args.iterations,
                       seed=args.seed, train_len=args.train_len)
    emit_report(rows, "csv", out / "ratio_stats.csv",
                columns=["hour", "mean", "std", "q1", "median", "q3"])


COMMANDS = {"ingest": cmd_ingest, "decompose": cmd_decompose, "forecast": cmd_forecast,
            "benchmark": cmd_benchmark, "schedule": cmd_schedule, "savings": cmd_savings,
            "ratio-stats": cmd_ratio_stats}


def _versions():
    import joblib
    import scipy
    import sklearn
    return {"co2forecast": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__, "joblib": joblib.__version__}


def write_manifest(args, out, wall_time):
    manifest = {"command": args.command, "seed": args.seed, "input": args.input,
                "config": _jsonable(resolved_options(args)), "versions": _versions(),
                "wall_time_s": round(wall_time, 3)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def run(argv=None):
    """Execute one command; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # --help and --version
        return 0 if exc.code in (0, None) else 1
    except (UsageError, ConfigError) as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 1
    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_run_config(args, out / "run.cfg")
        COMMANDS[args.command](args, out)
    except (UsageError, Co2ForecastError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"co2forecast {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort handler maps to exit 2
        logger.exception("internal error")
        print(f"co2forecast {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 2
    write_manifest(args, out, time.perf_counter() - t0)
    return 0


def main():
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())
