"""``tss`` command line: generate | summarize | evaluate | bench.

Exit codes:
    0  all requested outputs written
    1  unexpected internal error
    2  usage or configuration error
    3  unreadable or invalid input data (dataset, annotations, summary)
    4  infeasible summary size (partial summary still written)
    5  output exists and --force was not given
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import html
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_json, load_run_config, parse_generator_config
from .core import DatasetError, load_annotations, load_dataset, write_annotations, write_dataset
from .export import EmptySummaryError, SchemaError, format_table, read_summary, report_rows, summary_to_dict, write_json
from .selection import InfeasibleSummaryError, SelectionConfig, insights_select, random_select
from .svg import loglog_plot, window_plot
from .synthbench import (
    GeneratorConfig,
    InfeasibleInjectionError,
    bench_scaling,
    capture_report,
    generate_synthetic,
    linear_r2,
    loglog_slope,
    median_by_size,
    write_bench_csv,
)
from .utility import InsufficientHistoryError

logger = logging.getLogger("tss")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE, EXIT_EXISTS = 0, 1, 2, 3, 4, 5

BENCH_METHODS = ("insights-tw", "insights-critic", "random")
DEFAULT_SIZES = (10_000, 100_000, 1_000_000)
SLOPE_LIMIT = 1.3
R2_LIMIT = 0.95


class OutputExistsError(RuntimeError):
    pass


def _timestamp(args) -> str | None:
    if args.deterministic:
        return None
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def _prepare_out(out: Path, names, force: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    existing = [n for n in names if (out / n).exists()]
    if existing and not force:
        raise OutputExistsError(f"{out}: {', '.join(existing)} already exist (use --force)")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def cmd_generate(args) -> int:
    doc = load_json(args.config) if args.config else {}
    if args.seed is not None:
        doc = {**doc, "seed": args.seed}
    cfg = parse_generator_config(doc)
    out = Path(args.out)
    _prepare_out(out, ("dataset.csv", "annotations.csv", "manifest.json"), args.force)
    dataset, annotations = generate_synthetic(cfg, threads=args.threads)
    write_dataset(dataset, out / "dataset.csv")
    write_annotations(annotations, out / "annotations.csv")
    write_json(
        {
            "tool": "tss",
            "tool_version": __version__,
            "command": "generate",
            "config": cfg.to_dict(),
            "files": {
                "dataset.csv": {"rows": dataset.n, "sha256": _sha256(out / "dataset.csv")},
                "annotations.csv": {"rows": len(annotations), "sha256": _sha256(out / "annotations.csv")},
            },
        },
        out / "manifest.json",
    )
    print(f"wrote {dataset.n} points in {len(dataset)} series and {len(annotations)} annotations to {out}")
    return EXIT_OK


def _write_plots(out: Path, summary, config: dict, args) -> list[str]:
    names = []
    stamp = _timestamp(args)
    for old in out.glob("window_*.svg"):
        old.unlink()
    for i, e in enumerate(summary.entries):
        w = e.window
        name = f"window_{i:03d}.svg"
        scores = f"utility={e.utility_score:.4g}" if e.utility_score is not None else "utility=n/a"
        if e.diversity_score is not None:
            scores += f"  diversity={e.diversity_score:.4g}"
        svg = window_plot(
            w.values,
            w.start,
            w.anchor,
            title=f"#{i} {w.series_id} t={w.anchor} [{w.start}, {w.end}]",
            subtitle=f"source={e.source}  {scores}",
            metadata={"tool_version": __version__, "config": config, "entry": i},
            timestamp=stamp,
        )
        (out / name).write_text(svg, encoding="utf-8")
        names.append(name)
    rows = "\n".join(
        f"<tr><td>{i}</td><td>{html.escape(e.window.series_id)}</td><td>{e.window.anchor}</td>"
        f"<td>{e.window.start}</td><td>{e.window.end}</td><td>{html.escape(e.source)}</td>"
        f"<td>{'' if e.utility_score is None else f'{e.utility_score:.6g}'}</td>"
        f"<td>{'' if e.diversity_score is None else f'{e.diversity_score:.6g}'}</td>"
        f'<td><img src="{n}" width="320"/></td></tr>'
        for i, (e, n) in enumerate(zip(summary.entries, names))
    )
    page = (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Summary</title></head><body>\n"
        f"<h1>{html.escape(summary.method)}: {len(summary.entries)} windows</h1>\n"
        f"<!-- tss {__version__} -->\n"
        + (f"<p>generated {stamp}</p>\n" if stamp else "")
        + "<table border=\"1\" cellpadding=\"4\">\n"
        "<tr><th>#</th><th>series</th><th>anchor</th><th>start</th><th>end</th><th>source</th>"
        "<th>utility</th><th>diversity</th><th>plot</th></tr>\n"
        f"{rows}\n</table>\n"
        f"<pre>{html.escape(json.dumps(config, indent=2))}</pre>\n</body></html>\n"
    )
    (out / "index.html").write_text(page, encoding="utf-8")
    return names


def cmd_summarize(args) -> int:
    cfg = load_run_config(args.config)
    sel = cfg.selection
    if args.seed is not None:
        sel = SelectionConfig(**{**sel.__dict__, "seed": args.seed})
        cfg = type(cfg)(**{**cfg.__dict__, "selection": sel})
    out = Path(args.out) if args.out else (cfg.output or Path("."))
    _prepare_out(out, ("summary.json", "index.html"), args.force)
    dataset = load_dataset(cfg.dataset)
    config = cfg.to_dict()
    status, error, code = "complete", None, EXIT_OK
    try:
        if cfg.method == "random":
            summary = random_select(dataset, cfg.window, sel)
        else:
            summary = insights_select(dataset, cfg.window, cfg.utilities, sel, threads=args.threads)
    except InfeasibleSummaryError as exc:
        summary, status, error, code = exc.partial, "partial", str(exc), EXIT_INFEASIBLE
        logger.error("%s", exc)
    write_json(summary_to_dict(summary, config, status, error), out / "summary.json")
    _write_plots(out, summary, config, args)
    print(f"wrote {len(summary.entries)}-entry {summary.method} summary to {out / 'summary.json'}")
    if error:
        print(f"error: {error}", file=sys.stderr)
    return code


def cmd_evaluate(args) -> int:
    annotations = load_annotations(args.annotations)
    if not annotations:
        raise DatasetError(f"{args.annotations} has no annotations")
    reports = []
    for path in args.summary:
        summary, doc = read_summary(path)
        reports.append(capture_report(summary, annotations, method=doc.get("method", "")))
    rows = report_rows(reports)
    table = format_table(rows)
    sys.stdout.write(table)
    if args.out:
        out = Path(args.out)
        _prepare_out(out, ("report.json", "report.txt"), args.force)
        write_json(
            {
                "tool": "tss",
                "tool_version": __version__,
                "command": "evaluate",
                "config": {"summaries": [str(p) for p in args.summary], "annotations": str(args.annotations)},
                "reports": [r.to_dict() for r in reports],
                "table": rows,
            },
            out / "report.json",
        )
        (out / "report.txt").write_text(table, encoding="utf-8")
    return EXIT_OK


def bench_methods(names, threads: int = 1, gen: GeneratorConfig | None = None):
    from .config import benchmark_run_config, parse_run_config

    runs = {}
    for name in names:
        div = "critic" if name == "insights-critic" else "tw"
        cfg = parse_run_config(benchmark_run_config("-", m=6, diversity=div, gen=gen))
        if name == "random":
            runs[name] = lambda d, c=cfg: random_select(d, c.window, c.selection)
        else:
            runs[name] = lambda d, c=cfg: insights_select(d, c.window, c.utilities, c.selection, threads=threads)
    return runs


def scaling_checks(rows, methods) -> list[dict]:
    checks = []
    for name in methods:
        ns, wall, mem = median_by_size(rows, name)
        if len(ns) < 2:
            continue
        slope = loglog_slope(ns, wall)
        r2 = linear_r2(ns, mem)
        checks.append(
            {
                "method": name,
                "time_loglog_slope": slope,
                "time_slope_pass": bool(slope < SLOPE_LIMIT),
                "memory_linear_r2": r2,
                "memory_r2_pass": bool(r2 >= R2_LIMIT),
            }
        )
    return checks


def cmd_bench(args) -> int:
    sizes = sorted(args.sizes)
    out = Path(args.out)
    _prepare_out(out, ("bench.csv", "bench.svg", "bench_report.json"), args.force)
    methods = bench_methods(args.methods, threads=args.threads)
    rows = bench_scaling(sizes, methods, trials=args.trials, seed=args.seed or 0)
    write_bench_csv(rows, out / "bench.csv")
    config = {"sizes": sizes, "methods": list(args.methods), "trials": args.trials, "seed": args.seed or 0}
    time_series, mem_series = {}, {}
    for name in args.methods:
        ns, wall, mem = median_by_size(rows, name)
        time_series[name] = (ns.tolist(), (wall / 1e3).tolist())
        mem_series[name] = (ns.tolist(), mem.tolist())
    svg = loglog_plot(
        [("wall time (s)", time_series), ("peak memory (bytes)", mem_series)],
        title="runtime and memory vs dataset size",
        metadata={"tool_version": __version__, "config": config},
        timestamp=_timestamp(args),
    )
    (out / "bench.svg").write_text(svg, encoding="utf-8")
    checks = scaling_checks(rows, args.methods)
    write_json({"tool": "tss", "tool_version": __version__, "command": "bench", "config": config, "checks": checks},
               out / "bench_report.json")
    for c in checks:
        print(f"[{'PASS' if c['time_slope_pass'] else 'FAIL'}] {c['method']}: log-log time slope "
              f"{c['time_loglog_slope']:.3f} (limit < {SLOPE_LIMIT})")
        print(f"[{'PASS' if c['memory_r2_pass'] else 'FAIL'}] {c['method']}: linear memory fit R^2 "
              f"{c['memory_linear_r2']:.4f} (limit >= {R2_LIMIT})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads (default: all cores)")
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")
    common.add_argument("--deterministic", action="store_true", help="omit timestamps from SVG/HTML outputs")
    common.add_argument("--seed", type=int, default=None)

    parser = argparse.ArgumentParser(prog="tss", description="Global time-series summaries.")
    parser.add_argument("--version", action="version", version=f"tss {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write the synthetic annotated benchmark")
    g.add_argument("--config", help="generator config JSON (defaults if omitted)")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("summarize", parents=[common], help="build a summary from a run config")
    s.add_argument("--config", required=True, help="run config JSON")
    s.add_argument("--out", help="output directory (overrides config 'output')")
    s.set_defaults(func=cmd_summarize)

    e = sub.add_parser("evaluate", parents=[common], help="event coverage / examples of summaries")
    e.add_argument("--summary", required=True, action="append", help="summary.json (repeatable)")
    e.add_argument("--annotations", required=True, help="annotations CSV")
    e.add_argument("--out", help="directory for report.json and report.txt")
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("bench", parents=[common], help="runtime and memory scaling")
    b.add_argument("--sizes", type=int, nargs="+", default=list(DEFAULT_SIZES))
    b.add_argument("--methods", nargs="+", choices=BENCH_METHODS, default=["insights-tw", "random"])
    b.add_argument("--trials", type=int, default=1)
    b.add_argument("--out", required=True, help="output directory")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("TSS_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except (ConfigError, InfeasibleInjectionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, SchemaError, EmptySummaryError, InsufficientHistoryError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OutputExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXISTS


if __name__ == "__main__":
    sys.exit(main())
