"""Learn codes for every preset and compare them with random codes."""
#!/usr/bin/env python
# pyright: basic

import argparse
import os

from rich.console import Console

from gqla.codefile import save_code
from gqla.config import resolve_training_config
from gqla.core import BpConfig, ChannelSpec
from gqla.evaluate import estimate_bler
from gqla.search import (
    beat_probability,
    benchmark_density,
    build_cdf,
    cdfs_by_density,
    load_records,
    max_ebno,
    mean_beat_probability,
    write_comparison_csv,
)
from gqla.train import code_metadata, train_sessions, write_session_summary

console = Console()


def reproduce(preset: str, sessions: int, records_path: str, output_dir: str):
    """Train `sessions` codes for `preset` and compare them at the largest Eb/N0."""
    cfg = resolve_training_config({"preset": preset})
    run_dir = os.path.join(output_dir, preset)
    with console.status(f"Training {sessions} session(s) of {preset}"):
        reports = train_sessions(cfg, sessions, workers=0)
    write_session_summary(os.path.join(run_dir, "sessions.csv"), reports)
    for report in reports:
        path = os.path.join(run_dir, f"code-s{report.config.seed}.json")
        save_code(path, report.code, code_metadata(report))

    if not os.path.exists(records_path):
        console.print(f"[yellow]No random codes at {records_path}, skipping compare.")
        return

    records = load_records(records_path)
    ebno_db = max_ebno(records)
    density = benchmark_density(cdfs_by_density(records, ebno_db))
    cdf = build_cdf(records, ebno_db, density)
    results = []
    for report in reports:
        with console.status(f"Evaluating seed {report.config.seed}"):
            bler = estimate_bler(
                report.code,
                ChannelSpec(ebno_db, cfg.dims.rate),
                BpConfig(iterations=5),
                0.1,
                report.config.seed,
                workers=0,
            ).p_tilde
        results.append(
            beat_probability(
                cdf, bler, max(report.update_count, 1), f"s{report.config.seed}"
            )
        )
    write_comparison_csv(os.path.join(run_dir, "compare.csv"), results)
    console.print(
        f"[bold]{preset}[/bold]: mean p_beat {mean_beat_probability(results):.3e}"
    )


def main(presets: list[str], sessions: int, output_dir: str):
    """Training reproduction sample entrypoint."""
    for preset in presets:
        n, _, k = preset.partition("-")[0].partition("x")
        records_path = os.path.join(output_dir, f"random-{n}x{k}.jsonl")
        reproduce(preset, sessions, records_path, output_dir)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(
        description="Learn codes for packaged presets and compare with random codes."
    )
    parser.add_argument(
        "presets", nargs="*", default=["32x16", "64x32", "64x16", "128x64"]
    )
    parser.add_argument("--sessions", type=int, default=10)
    parser.add_argument("-o", "--output", default="runs", help="Output directory.")
    args = parser.parse_args()
    main(args.presets, args.sessions, args.output)
