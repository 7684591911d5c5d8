"""Command-line interface: ``t2p <command> ...``.

Commands
--------
generate   write a synthetic series (CSV with labels) plus a JSON sidecar
train      fit a model; writes a checkpoint, a per-epoch trace CSV, a sidecar
summarize  assign windows to learned patterns; CSVs and SVG figures
evaluate   compression / precision / recall, one row per seed plus mean and std
sweep      grid over pattern count x pattern length; CSV, heatmap, argmax
baseline   complete-linkage dendrograms (ED, DTW) or greedy snippets
bench      training wall time as a function of series length

Configuration precedence is flags > ``--config`` file > ``--preset`` >
built-in defaults. Every command writes a ``.json`` sidecar holding the
effective configuration. Outputs contain no timestamps, so a fixed seed gives
byte-identical files (timing columns of ``bench`` aside).

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, fields

import numpy as np

from . import baseline, checkpoint, svg
from .bench import bench_runtime
from .data import (GeneratorSpec, PRESET_SPECS, TimeSeries, add_gaussian_noise, gen_random_walk_demo, generate,
                   load_csv, read_kv_file, save_csv, segment, spec_from_mapping)
from .errors import ConfigurationError, DivergenceError, InputError, T2PError
from .metrics import evaluate as evaluate_summary
from .model import PRESETS, T2PConfig, encoded_length, summarize as summarize_series, train as train_model
from .summary import Summary

log = logging.getLogger("t2p")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
MODEL_KEYS = tuple(f.name for f in fields(T2PConfig))
GENERATOR_KEYS = ("preset", "patterns", "pattern_length", "order", "repeats", "noise", "seed", "name")
GENERATOR_PRESETS = tuple(PRESET_SPECS) + ("randomwalk",)
BASELINE_METHODS = ("dendrogram-ed", "dendrogram-dtw", "snippets")


class UsageError(T2PError):
    """Bad command-line input detected after argument parsing."""


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _int_list(text):
    try:
        out = [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return out


def _workers():
    raw = os.environ.get("T2P_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"T2P_WORKERS must be an integer, got {raw!r}") from None


def _map(func, items):
    """``map`` over independent jobs, on ``T2P_WORKERS`` processes when > 1."""
    items = list(items)
    workers = min(_workers(), len(items))
    if workers <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_atomic(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_sidecar(path, command, config, **extra):
    _write_atomic(path, _dump_json({"command": command, "config": config, **extra}))


def _ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {path}: {exc.strerror}") from None


def _read_config(path):
    if path is None:
        return {}
    if not os.path.isfile(path):
        raise UsageError(f"config file not found: {path}")
    mapping = read_kv_file(path)
    unknown = sorted(set(mapping) - set(MODEL_KEYS) - set(GENERATOR_KEYS) - {"sizes", "k", "m", "seeds"})
    if unknown:
        raise UsageError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return mapping


def _load_series(path):
    if not os.path.isfile(path):
        raise UsageError(f"data file not found: {path}")
    return load_csv(path)


def _model_config(args, file_map):
    """Merge defaults < preset < config file < flags into a validated T2PConfig."""
    name = getattr(args, "preset", None) or file_map.get("preset")
    if name and name not in PRESETS:
        raise UsageError(f"unknown model preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    merged = (PRESETS[name] if name else T2PConfig()).to_dict()
    merged.update({k: v for k, v in file_map.items() if k in MODEL_KEYS})
    merged.update({k: getattr(args, k) for k in MODEL_KEYS if getattr(args, k, None) is not None})
    try:
        return T2PConfig.from_dict(merged).validate()
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid model configuration: {exc}") from None


def _add_model_flags(p):
    g = p.add_argument_group("model configuration")
    g.add_argument("--preset", help=f"hyperparameter preset ({', '.join(sorted(PRESETS))})")
    g.add_argument("--config", help="key = value configuration file")
    g.add_argument("-k", "--n-patterns", dest="n_patterns", type=int)
    g.add_argument("-m", "--pattern-length", dest="pattern_length", type=int)
    g.add_argument("--prior-location", dest="prior_location", type=float)
    g.add_argument("--lambda1", type=float, help="posterior temperature")
    g.add_argument("--lambda2", type=float, help="prior temperature")
    g.add_argument("--epochs", type=int)
    g.add_argument("--learning-rate", dest="learning_rate", type=float)
    g.add_argument("--batch-size", dest="batch_size", type=int)
    g.add_argument("--kl-mode", dest="kl_mode", choices=("posterior", "uniform"))
    g.add_argument("--mc-samples", dest="mc_samples", type=int)
    return g


def _summary_rows(summary):
    for i, (start, pid, score) in enumerate(zip(summary.starts, summary.pattern_ids, summary.scores)):
        yield [i, int(start), int(pid), repr(float(score))]


def _write_assignments(path, summary):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_index", "start", "pattern_id", "score"])
        w.writerows(_summary_rows(summary))


def _write_patterns(path, patterns):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pattern_id", "position", "value"])
        for pid, row in enumerate(np.asarray(patterns)):
            for pos, v in enumerate(row):
                w.writerow([pid, pos, repr(float(v))])


def read_assignments(path):
    """Load an assignment CSV written by ``summarize``: ``(starts, ids, scores)``."""
    starts, ids, scores = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["window_index", "start", "pattern_id", "score"]:
            raise InputError(f"{path}: not an assignment file (header {header})")
        for row in reader:
            starts.append(int(row[1]))
            ids.append(int(row[2]))
            scores.append(float(row[3]))
    return np.array(starts, dtype=np.int64), np.array(ids, dtype=np.int64), np.array(scores)


def read_patterns(path):
    """Load a pattern CSV written by ``summarize`` as a ``(k, m)`` array."""
    cells = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["pattern_id", "position", "value"]:
            raise InputError(f"{path}: not a pattern file (header {header})")
        for row in reader:
            cells[(int(row[0]), int(row[1]))] = float(row[2])
    k = 1 + max(p for p, _ in cells)
    m = 1 + max(q for _, q in cells)
    out = np.full((k, m), np.nan)
    for (p, q), v in cells.items():
        out[p, q] = v
    return out


def _fmt(x):
    return "" if x is None else repr(float(x))


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def cmd_generate(args):
    file_map = _read_config(args.config)
    mapping = {k: v for k, v in file_map.items() if k in GENERATOR_KEYS}
    for key in ("preset", "noise", "repeats", "seed", "pattern_length"):
        value = getattr(args, key, None)
        if value is not None:
            mapping[key] = value
    mapping.setdefault("preset", "sy4")
    noise = float(mapping.get("noise", 0.0))
    if not 0.0 <= noise <= 100.0:
        raise UsageError("noise level must be in [0,100]")
    if mapping["preset"] == "randomwalk":
        seed = int(mapping.get("seed", 0))
        region = int(mapping.get("pattern_length", 200))
        series = gen_random_walk_demo(region, seed)
        if noise > 0:
            series = add_gaussian_noise(series, noise, seed)
        effective = {"preset": "randomwalk", "region_length": region, "noise": noise, "seed": seed}
    else:
        spec = spec_from_mapping(mapping)
        series = generate(spec)
        effective = asdict(spec)
        effective["order"] = list(spec.block_order())
        effective["patterns"] = [list(p) for p in spec.patterns]
    try:
        save_csv(series, args.out)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    _write_sidecar(f"{args.out}.json", "generate", effective, rows=len(series))
    print(f"wrote {len(series)} rows to {args.out}")


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def _write_trace(path, trace):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "loss", "mse", "kl", "sparsity"])
        for epoch, loss, mse, kl, sp in trace.rows():
            w.writerow([epoch, repr(loss), repr(mse), repr(kl), repr(float(sp))])


def cmd_train(args):
    cfg = _model_config(args, _read_config(args.config))
    series = _load_series(args.data)
    n_windows = len(series) // cfg.pattern_length
    if n_windows < 1:
        raise UsageError(f"series of length {len(series)} is shorter than the pattern length {cfg.pattern_length}")

    def progress(epoch, trace):
        if args.verbose and (epoch == 1 or epoch % 50 == 0 or epoch == cfg.epochs):
            log.info("epoch %d loss %.5f mse %.5f kl %.5f sparsity %.3f",
                     epoch, trace.loss[-1], trace.mse[-1], trace.kl[-1], trace.sparsity[-1])

    model, trace = train_model(series, cfg, progress=progress)
    trace_path = args.trace or f"{args.out}.trace.csv"
    try:
        checkpoint.save(model, args.out)
        _write_trace(trace_path, trace)
    except OSError as exc:
        raise UsageError(f"cannot write outputs: {exc.strerror}") from None
    _write_sidecar(f"{args.out}.json", "train", cfg.to_dict(), data=args.data, trace=trace_path,
                   windows=n_windows)
    print(f"trained {cfg.epochs} epochs on {n_windows} windows; checkpoint {args.out}")


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------


def _load_model_for(path, series, window_length=None):
    if not os.path.isfile(path):
        raise UsageError(f"checkpoint not found: {path}")
    model = checkpoint.load(path)
    m = model.config.pattern_length
    if window_length is not None and window_length != m:
        raise UsageError(f"window length {window_length} does not match the checkpoint pattern length {m}")
    if len(series) < m:
        raise UsageError(f"series length {len(series)} is shorter than the checkpoint pattern length {m}")
    return model


def cmd_summarize(args):
    series = _load_series(args.data)
    model = _load_model_for(args.model, series, args.window_length)
    summary = summarize_series(model, series)
    _ensure_dir(args.out_dir)
    _write_assignments(os.path.join(args.out_dir, "assignments.csv"), summary)
    _write_patterns(os.path.join(args.out_dir, "patterns.csv"), summary.patterns)
    svg.write(os.path.join(args.out_dir, "assignments.svg"), svg.assignment_map(series.values, summary))
    svg.write(os.path.join(args.out_dir, "patterns.svg"), svg.patterns_chart(summary.patterns))
    _write_sidecar(os.path.join(args.out_dir, "summarize.json"), "summarize", model.config.to_dict(),
                   data=args.data, model=args.model, windows=len(summary),
                   patterns_used=[int(i) for i in summary.used_patterns()])
    print(f"{len(summary)} windows assigned to {summary.used_patterns().size} of {summary.n_patterns} patterns")


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def _window_labels(series, m):
    return segment(series, m).labels if series.has_labels else None


def _report_row(dataset, seed, summary, series, mse_threshold):
    labels = _window_labels(series, summary.window_length)
    rep = evaluate_summary(summary, labels, mse_threshold)
    return {"dataset": dataset, "seed": seed, "compression": rep.compression,
            "precision": rep.precision, "recall": rep.recall}


def _train_and_summarize(job):
    values, labels, cfg_dict = job
    series = TimeSeries(values, labels)
    cfg = T2PConfig.from_dict(cfg_dict)
    model, trace = train_model(series, cfg)
    return summarize_series(model, series), trace.sparsity[-1] if len(trace) else None


def _summary_from_assignments(path, series):
    starts, ids, scores = read_assignments(path)
    if ids.size == 0:
        raise InputError(f"{path}: no assignment rows")
    m = int(starts[1] - starts[0]) if ids.size > 1 else len(series)
    patterns_path = os.path.join(os.path.dirname(path), "patterns.csv")
    patterns = read_patterns(patterns_path) if os.path.isfile(patterns_path) else None
    if patterns is not None:
        m = patterns.shape[1]
    seg = segment(series, m)
    if len(seg) != ids.size:
        raise UsageError(f"{path} holds {ids.size} windows but the series has {len(seg)} windows of length {m}")
    if patterns is None:
        if not series.has_labels:
            raise UsageError(f"{path}: unlabelled data needs the sibling patterns.csv to score windows")
        mse = np.zeros(ids.size)
        patterns = np.zeros((int(ids.max()) + 1, m))
    else:
        mse = ((seg.windows - patterns[ids]) ** 2).mean(axis=1)
    return Summary(ids, scores, seg.starts, m, len(series), seg.remainder, mse, patterns)


def cmd_evaluate(args):
    series = _load_series(args.data)
    dataset = args.name or os.path.splitext(os.path.basename(args.data))[0]
    rows = []
    config_echo = {}
    if args.model:
        for path in args.model:
            model = _load_model_for(path, series)
            summary = summarize_series(model, series)
            rows.append(_report_row(dataset, model.config.seed, summary, series, args.mse_threshold))
            config_echo[path] = model.config.to_dict()
    if args.assignments:
        for i, path in enumerate(args.assignments):
            summary = _summary_from_assignments(path, series)
            rows.append(_report_row(dataset, i, summary, series, args.mse_threshold))
            config_echo[path] = {"window_length": summary.window_length}
    if args.seeds:
        cfg = _model_config(args, _read_config(args.config))
        jobs = [(series.values, series.labels, cfg.with_(seed=s).to_dict()) for s in args.seeds]
        for seed, (summary, _) in zip(args.seeds, _map(_train_and_summarize, jobs)):
            rows.append(_report_row(dataset, seed, summary, series, args.mse_threshold))
        config_echo["trained"] = cfg.to_dict()
    if not rows:
        raise UsageError("nothing to evaluate: pass --model, --assignments or --seeds")

    text = _evaluation_csv(rows)
    if args.out:
        _write_atomic(args.out, text)
        _write_sidecar(f"{args.out}.json", "evaluate", config_echo, data=args.data,
                       mse_threshold=args.mse_threshold)
    sys.stdout.write(text)


def _evaluation_csv(rows):
    lines = [["dataset", "seed", "compression", "precision", "recall"]]
    for r in rows:
        lines.append([r["dataset"], r["seed"], _fmt(r["compression"]), _fmt(r["precision"]), _fmt(r["recall"])])
    for label, fn in (("mean", np.mean), ("std", np.std)):
        agg = [label]
        for key in ("compression", "precision", "recall"):
            vals = [r[key] for r in rows if r[key] is not None]
            agg.append(_fmt(fn(vals)) if vals else "")
        lines.append([rows[0]["dataset"]] + agg)
    out = []
    for row in lines:
        out.append(",".join(str(c) for c in row))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _cell_path(cells_dir, k, m, seed):
    return os.path.join(cells_dir, f"k{k}_m{m}_seed{seed}.json")


def _run_cell(job):
    values, labels, cfg_dict, path = job
    series = TimeSeries(values, labels)
    cfg = T2PConfig.from_dict(cfg_dict)
    model, _ = train_model(series, cfg)
    summary = summarize_series(model, series)
    win_labels = _window_labels(series, cfg.pattern_length)
    rep = evaluate_summary(summary, win_labels)
    record = {"k": cfg.n_patterns, "m": cfg.pattern_length, "seed": cfg.seed, "config": cfg_dict,
              "compression": rep.compression, "precision": rep.precision, "recall": rep.recall}
    _write_atomic(path, _dump_json(record))
    return record


def _completed(path, cfg_dict):
    if not os.path.isfile(path):
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            record = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None
    return record if record.get("config") == cfg_dict else None


def cmd_sweep(args):
    file_map = _read_config(args.config)
    cfg = _model_config(args, file_map)
    ks = args.k or _int_list(file_map.get("k", "2,4,6"))
    ms = args.m or _int_list(file_map.get("m", "50,100,200"))
    seeds = args.seeds or _int_list(file_map.get("seeds", str(cfg.seed)))
    series = _load_series(args.data)
    _ensure_dir(args.out_dir)
    cells_dir = os.path.join(args.out_dir, "cells")
    _ensure_dir(cells_dir)

    skipped = {}
    records, jobs = {}, []
    for k in ks:
        for m in ms:
            try:
                encoded_length(m)
                if len(series) < m:
                    raise ConfigurationError(f"series length {len(series)} is shorter than pattern length {m}")
            except ConfigurationError as exc:
                skipped[(k, m)] = str(exc)
                print(f"warning: skipping cell k={k} m={m}: {exc}", file=sys.stderr)
                continue
            for seed in seeds:
                cell = cfg.with_(n_patterns=k, pattern_length=m, seed=seed).to_dict()
                path = _cell_path(cells_dir, k, m, seed)
                done = _completed(path, cell)
                if done is not None:
                    records[(k, m, seed)] = done
                else:
                    jobs.append((series.values, series.labels, cell, path))
    if records:
        log.info("resuming: %d of %d cells already complete", len(records), len(records) + len(jobs))
    for rec in _map(_run_cell, jobs):
        records[(rec["k"], rec["m"], rec["seed"])] = rec

    grid = np.full((len(ks), len(ms)), np.nan)
    lines = ["k,m,compression,status"]
    for i, k in enumerate(ks):
        for j, m in enumerate(ms):
            if (k, m) in skipped:
                lines.append(f"{k},{m},,skipped: {skipped[(k, m)].replace(',', ';')}")
                continue
            grid[i, j] = float(np.mean([records[(k, m, s)]["compression"] for s in seeds]))
            lines.append(f"{k},{m},{float(grid[i, j])!r},ok")
    _write_atomic(os.path.join(args.out_dir, "sweep.csv"), "\n".join(lines) + "\n")
    svg.write(os.path.join(args.out_dir, "sweep.svg"),
              svg.heatmap(grid, [f"k={k}" for k in ks], [f"m={m}" for m in ms], title="compression"))
    _write_sidecar(os.path.join(args.out_dir, "sweep.json"), "sweep", cfg.to_dict(), data=args.data,
                   k=list(ks), m=list(ms), seeds=list(seeds))
    if np.all(np.isnan(grid)):
        raise UsageError("every sweep cell was skipped")
    # first maximum in grid order: fewest patterns, then shortest length
    best = int(np.nanargmax(grid))
    bi, bj = divmod(best, len(ms))
    print(f"argmax k={ks[bi]} m={ms[bj]} compression={grid[bi, bj]:.6f}")


# ---------------------------------------------------------------------------
# baseline
# ---------------------------------------------------------------------------


def cmd_baseline(args):
    series = _load_series(args.data)
    _ensure_dir(args.out_dir)
    effective = {"method": args.method}
    if args.method.startswith("dendrogram"):
        kind = args.method.split("-", 1)[1]
        effective.update(segments=args.segments, band=args.band)
        dg = baseline.region_dendrograms(series, args.segments, args.band)[kind]
        dg.to_csv(os.path.join(args.out_dir, f"linkage-{kind}.csv"))
        svg.write(os.path.join(args.out_dir, f"dendrogram-{kind}.svg"),
                  svg.dendrogram(dg, title=f"complete linkage ({kind.upper()})"))
        print(f"{len(dg.merges)} merges written")
    else:
        effective.update(k=args.k, m=args.m)
        res, summary = baseline.snippet_summary(series, args.m, args.k)
        with open(os.path.join(args.out_dir, "snippets.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["snippet_id", "start"])
            for i, start in enumerate(res.starts):
                w.writerow([i, int(start)])
        _write_assignments(os.path.join(args.out_dir, "assignments.csv"), summary)
        _write_patterns(os.path.join(args.out_dir, "patterns.csv"), summary.patterns)
        svg.write(os.path.join(args.out_dir, "assignments.svg"),
                  svg.assignment_map(series.values, summary, title="snippet assignment"))
        rep = evaluate_summary(summary, _window_labels(series, args.m))
        effective["compression"] = rep.compression
        line = f"snippets k={args.k} m={args.m} compression={rep.compression:.6f}"
        if rep.precision is not None:
            line += f" precision={rep.precision:.4f} recall={rep.recall:.4f}"
        print(line)
    _write_sidecar(os.path.join(args.out_dir, "baseline.json"), "baseline", effective, data=args.data)


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _bench_series(size, noise, seed):
    block = 4 * 100
    base = generate(GeneratorSpec(repeats=math.ceil(size / block), noise=noise, seed=seed, name="sy4"))
    return TimeSeries(base.values[:size], base.labels[:size])


def cmd_bench(args):
    file_map = _read_config(args.config)
    cfg = _model_config(args, file_map)
    if args.epochs is None and "epochs" not in file_map:
        cfg = cfg.with_(epochs=2)
    sizes = args.sizes or _int_list(file_map.get("sizes", "4000,8000,16000"))
    table = bench_runtime(lambda n: _bench_series(n, args.noise, cfg.seed), sizes,
                          lambda ds: train_model(ds, cfg), repeats=args.repeats)
    try:
        table.to_csv(args.out)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    _write_sidecar(f"{args.out}.json", "bench", cfg.to_dict(), sizes=list(sizes), repeats=args.repeats,
                   noise=args.noise)
    for row in table.rows:
        print(f"size={row.size} median={row.median:.3f}s")
    if len(table.rows) > 1:
        print(f"ratio t({sizes[-1]})/t({sizes[0]}) = {table.ratio(sizes[-1], sizes[0]):.2f}")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="t2p", description="Learn compressing pattern banks from time series.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic benchmark series")
    p.add_argument("--preset", choices=GENERATOR_PRESETS)
    p.add_argument("--config", help="key = value generator specification")
    p.add_argument("--noise", type=float, help="noise level in percent of the series std, 0..100")
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--pattern-length", dest="pattern_length", type=int,
                   help="pattern length (region length for randomwalk)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="fit a model to a series")
    p.add_argument("data", help="series CSV")
    _add_model_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--trace", help="trace CSV path (default: <out>.trace.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("summarize", help="assign windows to learned patterns")
    p.add_argument("model", help="checkpoint")
    p.add_argument("data", help="series CSV")
    p.add_argument("--window-length", dest="window_length", type=int,
                   help="expected window length; must equal the checkpoint's")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="compression, precision and recall")
    p.add_argument("data", help="series CSV; labels enable precision/recall")
    p.add_argument("--model", action="append", help="checkpoint (repeatable)")
    p.add_argument("--assignments", action="append", help="assignment CSV from summarize (repeatable)")
    p.add_argument("--seeds", type=_int_list, help="train one model per seed, e.g. 0,1,2,3,4")
    _add_model_flags(p)
    p.add_argument("--mse-threshold", dest="mse_threshold", type=float,
                   help="per-window MSE bound for unlabelled data (default: 95th percentile)")
    p.add_argument("--name", help="dataset name for the report (default: data file stem)")
    p.add_argument("--out", help="report CSV path (always echoed to stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="grid over pattern count and pattern length")
    p.add_argument("data", help="series CSV")
    p.add_argument("--k", type=_int_list, help="pattern counts, e.g. 2,4,6")
    p.add_argument("--m", type=_int_list, help="pattern lengths, e.g. 50,100,200")
    p.add_argument("--seeds", type=_int_list)
    _add_model_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseline", help="similarity-search reference methods")
    p.add_argument("data", help="series CSV")
    p.add_argument("--method", required=True, choices=BASELINE_METHODS)
    p.add_argument("--segments", type=int, default=7, help="regions for the dendrograms")
    p.add_argument("--band", type=int, help="Sakoe-Chiba half-width for DTW")
    p.add_argument("-k", type=int, default=4, help="number of snippets")
    p.add_argument("-m", type=int, default=100, help="snippet length")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("bench", help="training time versus series length")
    p.add_argument("--sizes", type=_int_list, help="series lengths (default 4000,8000,16000)")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.0)
    _add_model_flags(p)
    p.add_argument("--out", required=True, help="timing CSV path")
    p.set_defaults(func=cmd_bench, seed=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except DivergenceError as exc:
        print(f"error: training diverged at epoch {exc.epoch}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (T2PError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
