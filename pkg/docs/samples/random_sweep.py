"""Random code campaign over every density for one code size."""
#!/usr/bin/env python
# pyright: basic

import argparse
import os

from rich.console import Console

from gqla.core import CodeDimensions
from gqla.search import (
    append_records,
    benchmark_density,
    cdfs_by_density,
    load_records,
    rank_densities,
    random_search_campaign,
    write_ranking_csv,
    write_summary_csv,
)

console = Console()

DENSITIES = [0.15, 0.25, 0.35, 0.45]
EBNO_DB = [float(e) for e in range(8)]


def main(n: int, k: int, count: int, output_dir: str, workers: int):
    """Random sweep sample entrypoint."""
    dims = CodeDimensions(n, k)
    records_path = os.path.join(output_dir, f"random-{n}x{k}.jsonl")
    done = load_records(records_path) if os.path.exists(records_path) else []

    for density in DENSITIES:
        start = sum(1 for r in done if r.density == density)
        if start >= count:
            console.print(f"[yellow]Density {density:.2f} is complete, skipping.")
            continue
        with console.status(f"Density {density:.2f}: codes {start}..{count - 1}"):
            records = random_search_campaign(
                dims,
                density,
                count - start,
                EBNO_DB,
                target_rel=0.1,
                seed=0,
                start_index=start,
                workers=workers,
            )
        append_records(records_path, records)
        console.print(f"[green]✓ Density {density:.2f}: {len(records)} codes.")

    records = load_records(records_path)
    for ebno_db in EBNO_DB:
        cdfs = cdfs_by_density(records, ebno_db)
        prefix = os.path.join(output_dir, f"random-{n}x{k}-{ebno_db:g}dB")
        write_summary_csv(f"{prefix}.summary.csv", cdfs)
        write_ranking_csv(f"{prefix}.ranking.csv", rank_densities(cdfs))
        console.print(
            f"[bold]{ebno_db:g} dB[/bold]: benchmark density "
            f"{benchmark_density(cdfs):.2f}"
        )


if __name__ == "__main__":
    parser = argparse.ArgumentParser(
        description="Sample random codes at every density and rank the densities."
    )
    parser.add_argument("-n", type=int, default=64, help="Codeword length.")
    parser.add_argument("-k", type=int, default=32, help="Message length.")
    parser.add_argument("--count", type=int, default=10_000, help="Codes per density.")
    parser.add_argument("-o", "--output", default="runs", help="Output directory.")
    parser.add_argument("-w", "--workers", type=int, default=0, help="0 for all CPUs.")
    args = parser.parse_args()
    main(args.n, args.k, args.count, args.output, args.workers)
