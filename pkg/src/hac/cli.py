"""Command-line surface: stream ingestion, querying, data generation and the
benchmark scenarios.

Exit codes: 0 success, 2 contract violation (bad parameters, out-of-order
timestamps, querying below f0), 3 I/O or format error.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from pathlib import Path

import click

from .data import iter_jsonl_points, load_points, save_points
from .datagen import (
    MixtureSpec,
    characters_profile,
    default_household_spec,
    gaussian_mixture_stream,
    household_stream,
)
from .errors import ContractViolation, FormatError
from .postprocess import DedupPolicy, dedup_filter
from .sketch import HacConfig, Sketch, load_snapshot, save_snapshot
from .tracker import TrackerConfig, run_tracker

EXIT_CONTRACT = 2
EXIT_FORMAT = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    """Map package exceptions onto the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ContractViolation as exc:
            _fail(EXIT_CONTRACT, str(exc))
        except (FormatError, json.JSONDecodeError) as exc:
            _fail(EXIT_FORMAT, str(exc))
        except OSError as exc:
            _fail(EXIT_FORMAT, str(exc))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def load_config_file(path: str) -> dict:
    """Parse the JSON config document: HacConfig fields plus optional
    'dedup' and 'tracker' sections.  Unknown keys are rejected and the
    HAC_SEED environment variable overrides the configured seed."""
    with open(path, "r", encoding="utf-8") as fp:
        try:
            raw = json.load(fp)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: config must be a JSON object")
    sections = {}
    config_keys = dict(raw)
    for name in ("dedup", "tracker"):
        if name in config_keys:
            sections[name] = config_keys.pop(name)
    config = HacConfig.from_dict(config_keys)
    env_seed = os.environ.get("HAC_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise FormatError(f"HAC_SEED must be an integer, got {env_seed!r}") from exc
        config = HacConfig.from_dict({**config.to_dict(), "seed": seed})
    out = {"config": config}
    if "dedup" in sections:
        out["dedup"] = DedupPolicy.from_dict(sections["dedup"])
    if "tracker" in sections:
        out["tracker"] = TrackerConfig.from_dict(sections["tracker"])
    return out


@click.group()
def main() -> None:
    """Streaming dense-region sketch toolkit."""


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_path", default="-", help="JSONL point stream; '-' for stdin.")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@_guard
def cmd_run(config_path: str, input_path: str, snapshot_path: str, seed: int | None) -> None:
    """Stream points through a sketch and write its snapshot."""
    loaded = load_config_file(config_path)
    config: HacConfig = loaded["config"]
    if seed is not None:
        config = HacConfig.from_dict({**config.to_dict(), "seed": seed})
    sketch = Sketch(config)
    fp = sys.stdin if input_path == "-" else open(input_path, "r", encoding="utf-8")
    try:
        for lineno, point in iter_jsonl_points(fp):
            try:
                sketch.process(point)
            except ContractViolation as exc:
                raise ContractViolation(f"line {lineno}: {exc}") from exc
    finally:
        if fp is not sys.stdin:
            fp.close()
    save_snapshot(sketch, snapshot_path)
    click.echo(
        f"points={sketch.t_count} W={sketch.total_weight:.6g} "
        f"m={sketch.m} buckets={config.c + 1} memory_cells={sketch.memory_cells}"
    )


def _resolve_radius_index(config: HacConfig, r: float) -> int:
    radii = config.radii
    rel = abs(radii - r) / radii
    k = int(rel.argmin())
    if rel[k] > 1e-6:
        raise ContractViolation(
            f"--r {r} is not a bucket radius; available: {[float(x) for x in radii]}"
        )
    return k


@main.command("query")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["dense", "topk-freq", "topk-radius"]), default="dense")
@click.option("--f", "f", type=float, default=None, help="Query frequency (dense, topk-radius).")
@click.option("--k", "k", type=int, default=None, help="Output count (topk modes).")
@click.option("--r", "r", type=float, default=None, help="Query radius (topk-freq).")
@click.option("--dedup", type=click.Choice(["none", "threshold", "theorem"]), default="none")
@click.option("--rd", "r_d", type=float, default=None, help="Threshold-dedup radius.")
@click.option("--out", "out_path", default="-", help="Output JSONL; '-' for stdout.")
@_guard
def cmd_query(snapshot_path, mode, f, k, r, dedup, r_d, out_path) -> None:
    """Query a snapshot for dense regions."""
    sketch = load_snapshot(snapshot_path)
    if dedup == "none":
        policy = None
    elif dedup == "threshold":
        if r_d is None:
            raise ContractViolation("--dedup threshold requires --rd")
        policy = DedupPolicy("threshold", r_d)
    else:
        policy = DedupPolicy("theorem")
    filt = dedup_filter(policy, sketch.config.metric)
    if mode == "dense":
        if f is None:
            raise ContractViolation("--mode dense requires --f")
        outputs = sketch.query_dense(f)
        if filt is not None:
            if policy.variant == "threshold":
                outputs = sorted(outputs, key=lambda o: (-o.freq_estimate, o.point.t, o.slot_id))
            outputs = filt(outputs)
    elif mode == "topk-freq":
        if r is None or k is None:
            raise ContractViolation("--mode topk-freq requires --r and --k")
        outputs = sketch.query_top_k_by_frequency(
            _resolve_radius_index(sketch.config, r), k, dedup=filt
        )
    else:
        if f is None or k is None:
            raise ContractViolation("--mode topk-radius requires --f and --k")
        outputs = sketch.query_top_k_by_radius(f, k, dedup=filt)
    lines = "".join(json.dumps(o.to_dict()) + "\n" for o in outputs)
    if out_path == "-":
        sys.stdout.write(lines)
    else:
        Path(out_path).write_text(lines, encoding="utf-8")


@main.command("gen")
@click.argument("kind", type=click.Choice(["mixture", "household"]))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Output JSONL (mixture).")
@click.option("--out-dir", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Output directory (household).")
@click.option("--seed", type=int, default=0)
@click.option("--n", type=int, default=5000)
@click.option("--dims", type=int, default=8)
@click.option("--clusters", "k_clusters", type=int, default=3)
@click.option("--weights", type=str, default=None, help="Comma-separated cluster weights.")
@click.option("--sigma", type=float, default=1.0)
@click.option("--noise", "noise_fraction", type=float, default=0.0)
@click.option("--profile", type=click.Choice(["characters"]), default=None,
              help="Use a canned mixture profile instead of the raw knobs.")
@click.option("--noise-rate", type=float, default=None, help="Household spurious detections per step.")
@_guard
def cmd_gen(kind, out_path, out_dir, seed, n, dims, k_clusters, weights, sigma,
            noise_fraction, profile, noise_rate) -> None:
    """Generate a synthetic stream."""
    env_seed = os.environ.get("HAC_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    if kind == "mixture":
        if out_path is None:
            raise ContractViolation("gen mixture requires --out")
        if profile == "characters":
            spec = characters_profile(seed=seed, n=n)
        else:
            if weights is not None:
                w = [float(x) for x in weights.split(",")]
            else:
                w = [(1.0 - noise_fraction) / k_clusters] * k_clusters
            spec = MixtureSpec(
                k=len(w), dims=dims, n=n, weights=w, sigma=sigma,
                noise_fraction=noise_fraction, seed=seed,
            )
        data = gaussian_mixture_stream(spec)
        save_points(data, out_path)
        click.echo(f"wrote {len(data)} points to {out_path}")
    else:
        if out_dir is None:
            raise ContractViolation("gen household requires --out-dir")
        overrides = {} if noise_rate is None else {"noise_rate": noise_rate}
        spec = default_household_spec(seed=seed, **overrides)
        objects, faces, truth = household_stream(spec)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_points(objects, str(out / "objects.jsonl"))
        save_points(faces, str(out / "faces.jsonl"))
        with open(out / "truth.jsonl", "w", encoding="utf-8") as fp:
            for rec in truth:
                fp.write(json.dumps(rec) + "\n")
        click.echo(
            f"wrote {len(objects)} object points, {len(faces)} face points, "
            f"{len(truth)} truth records to {out_dir}"
        )


@main.command("track")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--objects", "objects_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--faces", "faces_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default="-", help="Interaction records JSONL; '-' for stdout.")
@_guard
def cmd_track(config_path, objects_path, faces_path, out_path) -> None:
    """Run the two-timescale appear/disappear tracker over detection streams."""
    loaded = load_config_file(config_path)
    cfg = loaded.get("tracker")
    if cfg is None:
        raise ContractViolation(f"{config_path} has no 'tracker' section")
    records = run_tracker(load_points(objects_path), load_points(faces_path), cfg)
    lines = "".join(json.dumps(r.to_dict()) + "\n" for r in records)
    if out_path == "-":
        sys.stdout.write(lines)
    else:
        Path(out_path).write_text(lines, encoding="utf-8")


_CSV_ROWS = {
    "characters": lambda row: {
        "seed": row["seed"],
        **{
            f"{m}_n{n}_{part}": row[f"{m}_n{n}"][part]
            for m in ("hac", "random", "mis")
            for n in (1, 5, 8)
            if f"{m}_n{n}" in row
            for part in ("found", "wrong", "duplicate", "missing")
        },
    },
    "guarantees": lambda row: {
        "seed": row["seed"],
        "outputs": row["outputs"],
        "dense_covered": row["dense_covered"],
        "sparse_near": row["sparse_near"],
    },
    "household": lambda row: {
        "seed": row["seed"],
        "records": row["records"],
        "rank_one": row["rank_one"],
        "touched": row["touched"],
        "untouched_clean": row["untouched_clean"],
        "correct": row["correct"],
    },
}


@main.command("bench")
@click.option("--scenario", required=True, type=str)
@click.option("--seeds", "n_seeds", type=int, default=5, help="Number of seeds to run.")
@click.option("--seed", "base_seed", type=int, default=0, help="First seed.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_guard
def cmd_bench(scenario: str, n_seeds: int, base_seed: int, out_dir: str) -> None:
    """Run a named benchmark scenario end-to-end and write its report,
    per-seed CSV and figure."""
    from . import plots, scenarios  # heavy imports stay out of the fast commands

    if scenario not in scenarios.SCENARIOS:
        raise ContractViolation(
            f"unknown scenario {scenario!r}; available: {sorted(scenarios.SCENARIOS)}"
        )
    env_seed = os.environ.get("HAC_SEED")
    if env_seed is not None:
        base_seed = int(env_seed)
    seeds = list(range(base_seed, base_seed + n_seeds))
    report = scenarios.SCENARIOS[scenario](seeds)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    figure_path = out / f"{scenario}.png"
    plots.RENDERERS[scenario](report, str(figure_path))
    csv_path = out / f"{scenario}.csv"
    rows = [_CSV_ROWS[scenario](row) for row in report["per_seed"]]
    with open(csv_path, "w", newline="", encoding="utf-8") as fp:
        writer = csv.DictWriter(fp, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    slim = {k: v for k, v in report.items() if k != "distance_distributions"}
    slim["figure"] = figure_path.name
    slim["csv"] = csv_path.name
    report_path = out / "report.json"
    with open(report_path, "w", encoding="utf-8") as fp:
        json.dump(slim, fp, indent=2)
        fp.write("\n")
    for name, ok in report["pass"].items():
        click.echo(f"{'PASS' if ok else 'FAIL'} {scenario}: {name}")
    click.echo(f"report written to {report_path}")


if __name__ == "__main__":
    main()
