"""Command line: ``unicorns simulate | detect | evaluate | repro``.

Exit codes: 0 success, 2 parameter error, 3 data error, 4 numeric failure.
Settings resolve as flags > ``--config`` JSON > defaults, and the resolved
configuration is written next to every output.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, benchmarks, ecg, simulators
from .embedding import EmbeddingParams
from .errors import DataError, ParameterError, UnicornError
from .evaluation import median_mad, precision_recall_f1, roc_auc, spearman
from .lof import lof_detect, lof_score
from .neighbors import build_index, knn_all
from .embedding import embed
from .preprocess import align_mask, bandpass, first_difference, load_series, log_difference, save_series
from .simulators import load_dataset, save_dataset
from .tof import TofConfig, detect, threshold_from_event_length, tof_score

GENERATORS = {
    "logistic-tent": simulators.gen_logistic_tent,
    "logistic-linear": simulators.gen_logistic_linear,
    "logistic-double-tent": simulators.gen_logistic_double_tent,
    "randwalk-linear": simulators.gen_randwalk_linear,
    "ecg": ecg.gen_ecg,
    "ecg-unique-twave": ecg.gen_ecg_unique_twave,
}
METRICS = ("roc_auc", "f1", "precision", "recall")


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(simulators._jsonable(payload), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _resolved(args) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# --- simulate -------------------------------------------------------------

def cmd_simulate(args):
    kwargs = {}
    if args.generator.startswith("logistic") or args.generator == "randwalk-linear":
        if args.n is not None:
            kwargs["n"] = args.n
        if args.len_range is not None:
            kwargs["len_range"] = tuple(args.len_range)
    else:
        if args.duration is not None:
            kwargs["duration"] = args.duration
        if args.len_range is not None and args.generator == "ecg":
            kwargs["tachy_len"] = tuple(args.len_range)
    dataset = GENERATORS[args.generator](args.seed, **kwargs)
    if args.noise:
        dataset = simulators.add_observation_noise(dataset, args.noise, args.seed)
    dataset.meta["version"] = __version__
    dataset.meta["config"] = _resolved(args)
    csv_path, meta_path = save_dataset(dataset, args.output)
    print(f"wrote {csv_path} ({len(dataset)} samples) and {meta_path}")


# --- detect ---------------------------------------------------------------

def _preprocess(series, args, mask=None):
    offset = 0
    if args.log_difference:
        series, offset = log_difference(series), offset + 1
    if args.first_difference:
        series, offset = first_difference(series), offset + 1
    if args.bandpass:
        series = bandpass(series, *args.bandpass)
    if mask is not None:
        mask = align_mask(mask, offset)
    return series, mask, offset


def _embedding(args, dt) -> EmbeddingParams:
    if args.tau_samples is not None:
        delay = args.tau_samples
    elif args.tau is not None:
        delay = int(round(args.tau / dt))
        if delay < 1:
            raise ParameterError(f"tau = {args.tau} s is shorter than one sample (dt = {dt})")
    else:
        delay = 1
    return EmbeddingParams(args.dim, delay)


def _max_event_len(args, dt):
    if args.max_event_len is not None:
        return args.max_event_len
    if args.max_event_samples is not None:
        return args.max_event_samples * dt
    raise ParameterError("TOF needs --max-event-len (seconds) or --max-event-samples")


def _score(series, params, args):
    embedded = embed(series, params)
    table = knn_all(build_index(embedded), args.k)
    info = {}
    if args.method == "tof":
        m = _max_event_len(args, series.dt)
        config = TofConfig(args.k, m, args.q, args.pad_w)
        config.validate(series.dt)
        scores = tof_score(table, embedded.time_index, series.dt, args.q)
        theta = threshold_from_event_length(m, args.k, series.dt)
        mask = detect(scores, theta, config.padding, len(series))
        info.update(threshold=theta, max_event_len=m, pad_w=config.padding)
    else:
        scores = lof_score(table, embedded.time_index, series.dt)
        mask = lof_detect(scores, args.top_fraction, len(series))
        info.update(threshold=mask.threshold_used, top_fraction=args.top_fraction)
    info.update(delay_samples=params.delay, dim=params.dim, n_flagged=int(mask.flags.sum()))
    return scores, mask, info


def cmd_detect(args):
    series = load_series(args.input, args.format, args.dt)
    series, _, offset = _preprocess(series, args)
    params = _embedding(args, series.dt)
    scores, mask, info = _score(series, params, args)
    per_point = np.full(len(series), np.nan)
    per_point[scores.time_index] = scores.scores
    out = Path(args.output)
    with out.open("w", encoding="utf-8", newline="") as fh:
        fh.write("t,score,flag\n")
        for t, s, f in zip(series.times, per_point, mask.flags):
            fh.write(f"{float(t)!r},{float(s)!r},{int(f)}\n")
    info.update(index_offset=offset, n=len(series), version=__version__, config=_resolved(args))
    _write_json(out.with_name(out.name + ".json"), info)
    if args.method == "tof":
        print(f"threshold theta = {info['threshold']!r} s (M = {info['max_event_len']!r} s, k = {args.k})")
    print(f"flagged {info['n_flagged']} of {len(series)} samples -> {out}")


# --- evaluate -------------------------------------------------------------

def _expand(patterns):
    paths = []
    for pattern in patterns:
        hits = sorted(glob.glob(pattern))
        paths.extend(hits if hits else [pattern])
    return [Path(p) for p in paths if not p.endswith(".json")]


def _k_values(args):
    if args.k_range:
        lo, hi = args.k_range
        if not 1 <= lo <= hi:
            raise ParameterError(f"invalid k range {args.k_range}")
        return list(range(lo, hi + 1))
    return [args.k]


def cmd_evaluate(args):
    paths = _expand(args.datasets)
    if not paths:
        raise DataError("no datasets matched")
    ks = _k_values(args)
    long_rows, realizations, iei_rows = [], [], []
    for path in paths:
        dataset = load_dataset(path)
        series, truth, _ = _preprocess(dataset.series, args, dataset.anomaly_mask)
        if truth.size != len(series):
            raise DataError(f"{path}: label and series lengths differ")
        params = _embedding(args, series.dt)
        seed = dataset.meta.get("seed", "")
        for k in ks:
            args.k = k
            scores, mask, _ = _score(series, params, args)
            report = precision_recall_f1(mask, truth)
            report.roc_auc = roc_auc(scores, truth)
            values = report.as_dict()
            realizations.append(dict(dataset=str(path), seed=seed, k=k, **values))
            for metric in METRICS:
                long_rows.append((str(path), args.method, k, seed, metric, values[metric]))
            if "iei" in dataset.meta:
                iei_rows.append((dataset.meta["iei"], k, report.roc_auc))
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(f"{out}.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "detector", "k", "seed", "metric", "value"])
        for row in long_rows:
            w.writerow([*row[:5], repr(float(row[5]))])
    aggregate = []
    for k in ks:
        entry = dict(k=k)
        for metric in METRICS:
            entry[metric] = median_mad([r[metric] for r in realizations if r["k"] == k])
        aggregate.append(entry)
    if len(ks) > 1:
        with open(f"{out}_k.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "median_auc", "mad_auc"])
            for entry in aggregate:
                w.writerow([entry["k"], repr(entry["roc_auc"][0]), repr(entry["roc_auc"][1])])
    summary = dict(version=__version__, config=_resolved(args), realizations=realizations,
                   aggregate=aggregate)
    if iei_rows:
        with open(f"{out}_iei.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iei", "k", "roc_auc"])
            for iei, k, auc in iei_rows:
                w.writerow([iei, k, repr(auc)])
        summary["iei_spearman"] = {
            k: spearman([r[0] for r in iei_rows if r[1] == k], [r[2] for r in iei_rows if r[1] == k])
            for k in ks if sum(r[1] == k for r in iei_rows) >= 2
        }
    _write_json(Path(f"{out}.json"), summary)
    print(f"evaluated {len(paths)} dataset(s) x {len(ks)} k value(s) -> {out}.csv, {out}.json")


# --- repro ----------------------------------------------------------------

def _write_rows(path, rows):
    if not rows:
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for k, v in row.items()})


def cmd_repro(args):
    families = args.families or benchmarks.TABLE_FAMILIES
    for name in families:
        benchmarks.get_family(name)
    n, w = args.realizations, args.workers
    ks = range(args.k_range[0], args.k_range[1] + 1)
    if args.what == "table1":
        rows = benchmarks.table_auc(n, ks, families, args.seed0, w)
    elif args.what == "table2":
        rows = benchmarks.table_f1(n, families, args.seed0, w)
    elif args.what == "table3":
        rows = benchmarks.table_density(n, 20, families, args.seed0, w)
    elif args.what == "fig3":
        rows = []
        for name in families:
            for det in benchmarks.DETECTORS:
                sweep = benchmarks.k_sweep(name, det, range(args.seed0, args.seed0 + n), ks, w)
                rows.extend(dict(dataset=name, detector=det, **r) for r in sweep["rows"])
    else:
        res = benchmarks.iei_analysis(range(args.seed0, args.seed0 + n), workers=w)
        rows = [dict(seed=s, iei=int(i), tof_auc=a, lof_auc=b)
                for s, i, a, b in zip(res["seeds"], res["iei"], res["auc_tof"], res["auc_lof"])]
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_rows(f"{out}.csv", rows)
    _write_json(Path(f"{out}.json"), dict(version=__version__, config=_resolved(args), rows=rows))
    for row in rows if args.what != "fig4" else []:
        print("  ".join(f"{k}={v:.3f}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    print(f"wrote {out}.csv and {out}.json")


# --- parser ---------------------------------------------------------------

def _detector_options(p, need_k=True):
    p.add_argument("--method", choices=("tof", "lof"), default="tof")
    p.add_argument("--dim", "-E", type=int, default=3, help="embedding dimension")
    p.add_argument("--tau", type=float, help="embedding delay in seconds")
    p.add_argument("--tau-samples", type=int, help="embedding delay in samples (overrides --tau)")
    if need_k:
        p.add_argument("--k", type=int, default=4)
    p.add_argument("--max-event-len", "-M", type=float, help="TOF: longest event, seconds")
    p.add_argument("--max-event-samples", type=float, help="TOF: longest event, samples")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--pad-w", type=int, help="TOF: padding in samples (default k//2)")
    p.add_argument("--top-fraction", type=float, default=0.055, help="LOF: fraction flagged")
    p.add_argument("--log-difference", action="store_true")
    p.add_argument("--first-difference", action="store_true")
    p.add_argument("--bandpass", type=float, nargs=2, metavar=("LO_HZ", "HI_HZ"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unicorns", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a labeled benchmark series")
    p.add_argument("generator", choices=sorted(GENERATORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, help="series length (map and walk generators)")
    p.add_argument("--duration", type=float, help="seconds (ECG generators)")
    p.add_argument("--len-range", type=float, nargs=2, metavar=("MIN", "MAX"),
                   help="anomaly length range (samples; seconds for ecg)")
    p.add_argument("--noise", type=float, default=0.0, help="observation noise sigma")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="score a series and flag anomalies")
    p.add_argument("input")
    p.add_argument("--format", choices=("csv_single_column", "csv_t_value"), default="csv_t_value")
    p.add_argument("--dt", type=float, help="sampling period override, seconds")
    _detector_options(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score labeled datasets against their labels")
    p.add_argument("datasets", nargs="+", help="dataset CSV files or glob patterns")
    _detector_options(p)
    p.add_argument("--k-range", type=int, nargs=2, metavar=("K_MIN", "K_MAX"))
    p.add_argument("-o", "--output", required=True, help="output prefix")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("repro", help="regenerate a benchmark table or figure data")
    p.add_argument("what", choices=("table1", "table2", "table3", "fig3", "fig4"))
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--k-range", type=int, nargs=2, default=(1, 100), metavar=("K_MIN", "K_MAX"))
    p.add_argument("--families", nargs="+", choices=sorted(benchmarks.FAMILIES))
    p.add_argument("--seed0", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True, help="output prefix")
    p.set_defaults(func=cmd_repro)
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config {args.config}: {exc}") from None
        config = {k.replace("-", "_"): v for k, v in config.items()}
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        args.func(args)
    except UnicornError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
