"""Command line front end: synth, detect, track, stats and report.

Every command writes plain CSV / JSON-lines artifacts plus a manifest with
the parameters, the seed and the SHA-256 of each input, so a run can be
reproduced exactly. Seeded runs are byte-for-byte deterministic, including
under different ``--jobs`` settings (the worker count is an execution
detail and is not recorded in the manifest).
"""

from __future__ import annotations

import argparse
import glob
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from . import __version__
from . import io as cio
from .generator import (
    ScheduleError,
    generate,
    schedule_from_dict,
    uniform_schedule,
)
from .graphs import EventFormatError, attributes_from_rows, load_events, threshold
from .metrics import (
    abandonment_curve,
    age_size_profile,
    auto_size_bins,
    disintegration_curve,
    homogeneity_ratio,
    lifespan_heatmap,
    lifetime,
    mean_autocorrelation_by_birth_size,
    pooled_weight_ratio,
    stationarity,
    weight_ratio,
)
from .percolation import detect_communities, select_weight_threshold
from .tracking import build_timelines, composition_profile, joint_cover


def _k_type(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer, got {text!r}") from None
    if value < 3:
        raise argparse.ArgumentTypeError(f"k must be at least 3, got {value}")
    return value


def _window_type(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be a number, got {text!r}") from None
    if not math.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"window must be positive, got {value}")
    return value


def _wstar_type(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"wstar must be a number or 'auto', got {text!r}"
        ) from None
    if not math.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError(f"wstar must be non-negative, got {value}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _fraction_type(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cliquetrack",
        description="Temporal overlapping-community detection, tracking and statistics.",
    )
    parser.add_argument("--version", action="version", version=f"cliquetrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, jobs: bool = True) -> None:
        p.add_argument("--config", help="key=value file; command line flags override it")
        p.add_argument("--out", required=True, help="output directory")
        if jobs:
            p.add_argument(
                "--jobs", type=_positive_int, default=1, help="parallel workers for detection"
            )

    p = sub.add_parser("synth", help="generate a planted synthetic dataset")
    common(p, jobs=False)
    p.add_argument("--schedule", help="JSON schedule file (overrides the quick flags)")
    p.add_argument("--communities", type=_positive_int, default=4)
    p.add_argument("--size", type=_positive_int, default=12)
    p.add_argument("--steps", type=_positive_int, default=20)
    p.add_argument("--r", type=_fraction_type, default=0.1, help="per-step member replacement")
    p.add_argument("--k", type=_k_type, default=4)
    p.add_argument("--background-nodes", type=int, default=50)
    p.add_argument("--background-prob", type=_fraction_type, default=0.002)
    p.add_argument(
        "--attr-mode", choices=("homogeneous", "uniform", "none"), default="homogeneous"
    )
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="detect communities per snapshot")
    common(p)
    p.add_argument("--events", required=True, help="event CSV (time,u,v,w)")
    p.add_argument("--window", type=_window_type, default=1.0)
    p.add_argument("--k", type=_k_type, default=4)
    p.add_argument("--wstar", type=_wstar_type, default=0.0, help="weight cutoff or 'auto'")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("track", help="match covers across steps and stitch timelines")
    common(p)
    p.add_argument("--events", required=True)
    p.add_argument("--window", type=_window_type, default=1.0)
    p.add_argument("--k", type=_k_type, default=None)
    p.add_argument("--wstar", type=_wstar_type, default=None)
    p.add_argument("--covers", help="detect output directory to reuse instead of re-detecting")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("stats", help="compute every evolution statistic")
    common(p)
    p.add_argument("--events", required=True)
    p.add_argument("--window", type=_window_type, default=1.0)
    p.add_argument("--track", required=True, help="track output directory")
    p.add_argument("--attrs", help="attribute CSV (node,categorical,numeric)")
    p.add_argument("--k", type=_k_type, default=None, help="override the tracked k")
    p.add_argument("--wstar", type=_wstar_type, default=None, help="override the tracked cutoff")
    p.add_argument("--bins", type=_positive_int, default=10, help="bins for [0,1] curves")
    p.add_argument("--draws", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--numeric-window", type=float, default=3.0)
    p.add_argument("--min-attr-coverage", type=_fraction_type, default=0.5)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("report", help="summarize run directories in plain text")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, help="run directories")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_report)
    return parser


def _expand_config(argv: list[str]) -> list[str]:
    """Splice config-file entries in as flags right after the subcommand."""
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
            break
        if token.startswith("--config="):
            path = token.split("=", 1)[1]
            break
    if path is None or not argv or argv[0].startswith("-"):
        return argv
    extra: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise EventFormatError(f"config line without '=': {line!r}")
            key, value = line.split("=", 1)
            extra.extend([f"--{key.strip()}", value.strip()])
    return [argv[0], *extra, *argv[1:]]


def _pmap(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (jobs * 4))))


def _joint_item(item, k: int, w_star: float):
    t, g_a, g_b = item
    return joint_cover(g_a, g_b, k, w_star=w_star, t=t)


def _resolve_wstar(wstar, series, k: int) -> float:
    if wstar != "auto":
        return float(wstar)
    recommendations = [select_weight_threshold(s, k) for s in series if s.n_edges > 0]
    return float(np.median(recommendations)) if recommendations else 0.0


def _manifest(command: str, params: dict, inputs: dict[str, str]) -> dict:
    return {
        "tool": "cliquetrack",
        "version": __version__,
        "command": command,
        "params": params,
        "inputs": {
            name: {"path": path, "sha256": cio.sha256_file(path)}
            for name, path in sorted(inputs.items())
        },
    }


def _load_series(args):
    events = cio.read_events_csv(args.events)
    return load_events(events, args.window)


def cmd_synth(args) -> int:
    if args.schedule:
        with open(args.schedule, encoding="utf-8") as fh:
            schedule = schedule_from_dict(json.load(fh))
        inputs = {"schedule": args.schedule}
    else:
        schedule = uniform_schedule(
            args.communities,
            args.size,
            args.steps,
            args.r,
            k=args.k,
            background_nodes=args.background_nodes,
            background_edge_prob=args.background_prob,
            attribute_mode=args.attr_mode,
        )
        inputs = {}
    result = generate(schedule, seed=args.seed)
    out = args.out
    cio.write_events_csv(os.path.join(out, "events.csv"), result.events)
    if result.attribute_rows:
        cio.write_attributes_csv(os.path.join(out, "attributes.csv"), result.attribute_rows)
    cio.write_timelines_jsonl(
        os.path.join(out, "truth_timelines.jsonl"), result.truth_timelines, result.series.names
    )
    cio.write_track_events_csv(os.path.join(out, "truth_events.csv"), result.truth_events)
    params = {
        "seed": args.seed,
        "n_steps": schedule.n_steps,
        "k": schedule.k,
        "n_plans": len(schedule.plans),
        "background_nodes": schedule.background_nodes,
        "background_edge_prob": schedule.background_edge_prob,
        "attribute_mode": schedule.attributes.mode,
    }
    cio.write_manifest(os.path.join(out, "manifest.json"), _manifest("synth", params, inputs))
    print(
        f"synth: {len(result.series)} steps, {len(schedule.plans)} planted communities, "
        f"{len(result.events)} events -> {out}"
    )
    return 0


def _detect_covers(series, k: int, w_star: float, jobs: int):
    return _pmap(partial(detect_communities, k=k, w_star=w_star), list(series), jobs)


def cmd_detect(args) -> int:
    series = _load_series(args)
    w_star = _resolve_wstar(args.wstar, series, args.k)
    covers = _detect_covers(series, args.k, w_star, args.jobs)
    covers_dir = os.path.join(args.out, "covers")
    for cover in covers:
        cio.write_cover_jsonl(
            os.path.join(covers_dir, f"cover_{int(cover.t):05d}.jsonl"), cover, series.names
        )
    rows = []
    for snapshot, cover in zip(series, covers):
        g = threshold(snapshot, w_star)
        sizes = cover.sizes()
        rows.append(
            (
                g.t,
                g.n_nodes,
                g.n_edges,
                len(cover),
                sizes[0] if sizes else 0,
                sizes[1] if len(sizes) > 1 else 0,
            )
        )
    meta = {"k": args.k, "w_star": w_star, "window": args.window, "version": __version__}
    cio.write_csv(
        os.path.join(args.out, "summary.csv"),
        ["t", "nodes", "edges", "communities", "largest", "second_largest"],
        rows,
        meta=meta,
    )
    params = {"window": args.window, "k": args.k, "wstar_arg": str(args.wstar), "w_star": w_star}
    cio.write_manifest(
        os.path.join(args.out, "manifest.json"),
        _manifest("detect", params, {"events": args.events}),
    )
    print(
        f"detect: {len(series)} snapshots, {sum(len(c) for c in covers)} communities -> {args.out}"
    )
    return 0


def _read_covers_dir(covers_dir: str, series):
    manifest = cio.read_manifest(os.path.join(covers_dir, "manifest.json"))
    k = int(manifest["params"]["k"])
    w_star = float(manifest["params"]["w_star"])
    files = sorted(glob.glob(os.path.join(covers_dir, "covers", "cover_*.jsonl")))
    if len(files) != len(series):
        raise RuntimeError(
            f"parameter mismatch: {len(files)} cover files for {len(series)} snapshots"
        )
    covers = [
        cio.read_cover_jsonl(path, series.names, t=t, k=k, w_star=w_star)
        for t, path in enumerate(files)
    ]
    return covers, k, w_star


def cmd_track(args) -> int:
    series = _load_series(args)
    inputs = {"events": args.events}
    if args.covers:
        covers, k, w_star = _read_covers_dir(args.covers, series)
        if args.k is not None and args.k != k:
            raise RuntimeError(f"parameter mismatch: --k {args.k} but covers use k={k}")
        if args.wstar not in (None, "auto") and float(args.wstar) != w_star:
            raise RuntimeError(
                f"parameter mismatch: --wstar {args.wstar} but covers use w_star={w_star}"
            )
    else:
        k = args.k if args.k is not None else 4
        w_star = _resolve_wstar(args.wstar if args.wstar is not None else 0.0, series, k)
        covers = _detect_covers(series, k, w_star, args.jobs)
    thresholded = [threshold(s, w_star) for s in series]
    joint_items = [
        (t, thresholded[t], thresholded[t + 1]) for t in range(len(thresholded) - 1)
    ]
    joints = _pmap(partial(_joint_item, k=k, w_star=w_star), joint_items, args.jobs)
    result = build_timelines(series, k, w_star, covers=covers, joints=joints)
    meta = {"k": k, "w_star": w_star, "window": args.window, "version": __version__}
    cio.write_timelines_jsonl(
        os.path.join(args.out, "timelines.jsonl"), result.timelines, series.names
    )
    cio.write_track_events_csv(os.path.join(args.out, "events.csv"), result.events, meta=meta)
    params = {"window": args.window, "k": k, "w_star": w_star}
    cio.write_manifest(
        os.path.join(args.out, "manifest.json"), _manifest("track", params, inputs)
    )
    n_alive = sum(tl.alive_at_end for tl in result.timelines)
    print(
        f"track: {len(result.timelines)} timelines ({n_alive} alive at the end), "
        f"{len(result.events)} events -> {args.out}"
    )
    return 0


def _curve_rows(curve):
    rows = []
    for i in range(curve.n_bins):
        value = curve.values[i]
        rows.append(
            [
                curve.bin_edges[i],
                curve.bin_edges[i + 1],
                None if np.isnan(value) else float(value),
                int(curve.counts[i]),
            ]
        )
    return rows


def cmd_stats(args) -> int:
    series = _load_series(args)
    track_manifest = cio.read_manifest(os.path.join(args.track, "manifest.json"))
    k = args.k if args.k is not None else int(track_manifest["params"]["k"])
    if args.wstar == "auto":
        raise RuntimeError("stats needs a numeric --wstar (or none, to reuse the tracked one)")
    w_star = float(args.wstar) if args.wstar is not None else float(
        track_manifest["params"]["w_star"]
    )
    timelines_path = os.path.join(args.track, "timelines.jsonl")
    timelines = cio.read_timelines_jsonl(timelines_path, series.names)
    thresholded = [threshold(s, w_star) for s in series]
    covers = _detect_covers(series, k, w_star, args.jobs)
    out = args.out
    meta = {
        "k": k,
        "w_star": w_star,
        "window": args.window,
        "bins": args.bins,
        "draws": args.draws,
        "seed": args.seed,
        "version": __version__,
    }
    inputs = {"events": args.events, "timelines": timelines_path}

    rows = []
    for tl in timelines:
        zeta = stationarity(tl)
        rows.append(
            (
                tl.id,
                tl.t0,
                tl.t_last,
                tl.birth_size,
                int(tl.alive_at_end),
                zeta,
                None if tl.alive_at_end else lifetime(tl),
            )
        )
    cio.write_csv(
        os.path.join(out, "stationarity.csv"),
        ["timeline", "t0", "t_last", "birth_size", "alive_at_end", "zeta", "lifetime"],
        rows,
        meta={
            **meta,
            "zeta_definition": "mean overlap over the consecutive-state pairs",
            "lifetime_definition": "count of snapshots observed (t_last - t0 + 1)",
        },
    )

    curves = mean_autocorrelation_by_birth_size(timelines)
    rows = []
    for label in sorted(curves):
        curve = curves[label]
        for lag, value, count in zip(curve.lags, curve.values, curve.counts):
            rows.append((label, int(lag), float(value), int(count)))
    cio.write_csv(
        os.path.join(out, "autocorrelation_by_size.csv"),
        ["size_class", "lag", "mean_overlap", "count"],
        rows,
        meta=meta,
    )

    profile = age_size_profile(timelines)
    cio.write_csv(
        os.path.join(out, "age_size_profile.csv"),
        ["size", "relative_age", "count"],
        [
            (int(s), float(v), int(c))
            for s, v, c in zip(profile.sizes, profile.values, profile.counts)
        ],
        meta={**meta, "mean_age": profile.mean_age},
    )

    eligible = [tl for tl in timelines if not tl.alive_at_end and len(tl) >= 2]
    size_edges = auto_size_bins([tl.birth_size for tl in eligible])
    grid = lifespan_heatmap(timelines, size_edges, args.bins)
    rows = []
    for si in range(len(grid.size_edges) - 1):
        for zi in range(len(grid.zeta_edges) - 1):
            mean = grid.mean_lifetime[si, zi]
            rows.append(
                (
                    grid.size_edges[si],
                    grid.size_edges[si + 1],
                    float(grid.zeta_edges[zi]),
                    float(grid.zeta_edges[zi + 1]),
                    None if np.isnan(mean) else float(mean),
                    int(grid.counts[si, zi]),
                    int(grid.ridge[si] == zi),
                )
            )
    cio.write_csv(
        os.path.join(out, "lifespan_heatmap.csv"),
        ["size_lo", "size_hi", "zeta_lo", "zeta_hi", "mean_lifetime", "count", "is_ridge"],
        rows,
        meta=meta,
    )

    leaving = abandonment_curve(timelines, thresholded, args.bins)
    rows = [
        left + stay
        for left, stay in zip(
            _curve_rows(leaving.p_leave),
            [r[2:] for r in _curve_rows(leaving.time_in_community)],
        )
    ]
    cio.write_csv(
        os.path.join(out, "abandonment.csv"),
        ["x_lo", "x_hi", "p_leave", "count", "mean_stay", "stay_count"],
        rows,
        meta=meta,
    )

    dis = disintegration_curve(timelines, thresholded, args.bins)
    rows = [
        left + tau
        for left, tau in zip(
            _curve_rows(dis.p_disintegrate),
            [r[2:] for r in _curve_rows(dis.lifetime_by_birth_ratio)],
        )
    ]
    cio.write_csv(
        os.path.join(out, "disintegration.csv"),
        ["x_lo", "x_hi", "p_disintegrate", "count", "mean_lifetime", "lifetime_count"],
        rows,
        meta=meta,
    )

    pooled = pooled_weight_ratio(covers, thresholded)
    rows = [
        (
            "pooled",
            pooled.mean_intra,
            pooled.mean_inter,
            pooled.ratio,
            pooled.n_intra,
            pooled.n_inter,
        )
    ]
    for cover, g in zip(covers, thresholded):
        per = weight_ratio(cover, g)
        rows.append((g.t, per.mean_intra, per.mean_inter, per.ratio, per.n_intra, per.n_inter))
    cio.write_csv(
        os.path.join(out, "weight_ratio.csv"),
        ["scope", "mean_intra", "mean_inter", "ratio", "n_intra", "n_inter"],
        rows,
        meta=meta,
    )

    rows = []
    for tl in timelines:
        for entry in composition_profile(tl):
            rows.append(
                (tl.id, entry.t, entry.old, entry.new, entry.leaving_old, entry.leaving_new)
            )
    cio.write_csv(
        os.path.join(out, "composition.csv"),
        ["timeline", "t", "old", "new", "leaving_old", "leaving_new"],
        rows,
        meta=meta,
    )

    homogeneity_files = {}
    if args.attrs:
        attr_rows = cio.read_attributes_csv(args.attrs)
        attrs, unknown = attributes_from_rows(attr_rows, series.names)
        inputs["attrs"] = args.attrs
        for mode, present in (("categorical", attrs.categorical), ("numeric", attrs.numeric)):
            if not present:
                continue
            curve = homogeneity_ratio(
                covers,
                attrs,
                mode,
                numeric_window=args.numeric_window,
                draws=args.draws,
                seed=args.seed,
                min_coverage=args.min_attr_coverage,
            )
            name = f"homogeneity_{mode}.csv"
            homogeneity_files[mode] = name
            cio.write_csv(
                os.path.join(out, name),
                [
                    "size",
                    "n_real",
                    "n_rand",
                    "sigma_rand",
                    "ratio",
                    "band_low",
                    "band_high",
                    "n_real_over_s",
                    "count",
                ],
                [
                    (
                        int(curve.sizes[i]),
                        float(curve.n_real[i]),
                        float(curve.n_rand[i]),
                        float(curve.sigma_rand[i]),
                        float(curve.ratio[i]),
                        float(curve.band_low[i]),
                        float(curve.band_high[i]),
                        float(curve.n_real_over_s[i]),
                        int(curve.counts[i]),
                    )
                    for i in range(len(curve.sizes))
                ],
                meta={**meta, "skipped": curve.n_skipped, "unknown_labels": unknown},
            )

    zetas = [stationarity(tl) for tl in timelines]
    zetas = [z for z in zetas if z is not None]
    lifetimes = [lifetime(tl) for tl in timelines if not tl.alive_at_end]
    event_counts: dict[str, int] = {}
    summary = {
        "n_timelines": len(timelines),
        "n_censored": sum(tl.alive_at_end for tl in timelines),
        "mean_stationarity": sum(zetas) / len(zetas) if zetas else None,
        "mean_lifetime": sum(lifetimes) / len(lifetimes) if lifetimes else None,
        "pooled_weight_ratio": pooled.ratio,
        "homogeneity_files": homogeneity_files,
        "n_snapshots": len(series),
    }
    if not lifetimes:
        print(
            "warning: censoring leaves zero eligible timelines; lifetime outputs are empty",
            file=sys.stderr,
        )
    with cio.atomic_write(os.path.join(out, "summary.json")) as fh:
        fh.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    params = {
        "window": args.window,
        "k": k,
        "w_star": w_star,
        "bins": args.bins,
        "draws": args.draws,
        "seed": args.seed,
        "numeric_window": args.numeric_window,
        "min_attr_coverage": args.min_attr_coverage,
    }
    cio.write_manifest(os.path.join(out, "manifest.json"), _manifest("stats", params, inputs))
    print(f"stats: {len(timelines)} timelines summarized -> {out}")
    return 0


def cmd_report(args) -> int:
    lines = [f"cliquetrack {__version__} report"]
    for directory in args.inputs:
        lines.append("")
        lines.append(f"== {directory} ==")
        manifest_path = os.path.join(directory, "manifest.json")
        if not os.path.exists(manifest_path):
            lines.append("  (no manifest found)")
            continue
        manifest = cio.read_manifest(manifest_path)
        lines.append(f"  command: {manifest.get('command')}")
        for key, value in sorted(manifest.get("params", {}).items()):
            lines.append(f"  param {key} = {value}")
        for name, info in sorted(manifest.get("inputs", {}).items()):
            lines.append(f"  input {name}: {info['path']} sha256={info['sha256'][:12]}")
        summary_path = os.path.join(directory, "summary.json")
        if os.path.exists(summary_path):
            with open(summary_path, encoding="utf-8") as fh:
                summary = json.load(fh)
            for key, value in sorted(summary.items()):
                lines.append(f"  {key}: {value}")
        for path in sorted(glob.glob(os.path.join(directory, "*.csv"))):
            with open(path, encoding="utf-8") as fh:
                n_rows = sum(1 for line in fh if line.strip() and not line.startswith("#")) - 1
            lines.append(f"  file {os.path.basename(path)}: {max(n_rows, 0)} rows")
    text = "\n".join(lines) + "\n"
    if args.out:
        with cio.atomic_write(args.out) as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, EventFormatError, ScheduleError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
