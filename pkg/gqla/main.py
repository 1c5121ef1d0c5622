"""Gqla app cli entrypoint."""

#!/usr/bin/env python
import os
from collections.abc import Sequence
from functools import wraps
from typing import Any, Callable

import click
from rich.console import Group
from rich.markdown import Markdown
from rich.table import Table
from rich.text import Text

from gqla.core import BlerEstimate, GqlaError
from gqla.platform.assets import get_asset_path
from gqla.platform.console import get_console, setup_logging
from gqla.platform.output import RunManifest


def error_handler(func: Callable[..., int]):
    """Global error handler for gqla.

    Configuration errors exit with code 2, everything else with 1.
    """

    @wraps(func)
    def wrapper(*args: list[Any], **kwargs: dict[str, Any]) -> int:
        try:
            return func(*args, **kwargs)
        except GqlaError as e:
            console = get_console()
            help_text: str = (
                "Ouch! This appears to be a bug. Please report it along with "
                "the run manifest."
            )

            match e.category:
                case "config":
                    help_text = (
                        "Configuration or options seem invalid. Check out the docs."
                    )
                case "format":
                    help_text = "An input file is malformed."
                case _:
                    pass

            error_text = Group(
                Markdown(f"ERROR: {e.message}", style="error"),
                Text(),
                Markdown(help_text),
            )
            console.print(error_text)
            raise SystemExit(2 if e.category == "config" else 1) from e

    return wrapper


def common_options(func: Callable[..., int]):
    """Get common options for gqla commands."""

    @click.option(
        "-v", "--verbose", is_flag=True, default=False, help="Show verbose logs."
    )
    @click.option(
        "-w",
        "--workers",
        type=int,
        default=1,
        show_default=True,
        help="Worker processes, 0 for all CPUs. Results do not depend on it.",
    )
    @wraps(func)
    def wrapper(*args: list[Any], verbose: bool, **kwargs: dict[str, Any]) -> int:
        setup_logging(verbose)
        return func(*args, **kwargs)

    return wrapper


def _manifest(config: dict[str, Any], seed: int) -> RunManifest:
    ctx = click.get_current_context()
    return RunManifest(
        command=ctx.command_path,
        config={**ctx.params, **config},
        seed=seed,
    )


def _bler_table(title: str, estimates: Sequence[BlerEstimate]) -> Table:
    table = Table(title=title, header_style="header")
    for column in ("Eb/N0 [dB]", "blocks", "errors", "BLER", "half width", "converged"):
        table.add_column(column, justify="right")
    for e in estimates:
        table.add_row(
            f"{e.ebno_db:.2f}",
            str(e.blocks),
            str(e.block_errors),
            f"{e.p_tilde:.3e}",
            f"{e.half_width:.2e}",
            "yes" if e.converged else "[warning]no[/warning]",
        )
    return table


@click.group()
@click.version_option(package_name="gqla")
def main():
    """Gqla - learn short block codes for belief propagation decoding."""
    pass


@main.command("train")
@click.option(
    "-c",
    "--config",
    "config_file",
    type=click.Path(dir_okay=False),
    default=None,
    help="Training config file. Defaults to the packaged (32,16) example.",
)
@click.option("--set", "overrides", multiple=True, help="Override as key=value.")
@click.option("--seed", type=int, default=None, help="Seed of the first session.")
@click.option("--sessions", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("-o", "--output", "output_dir", required=True, type=click.Path())
@error_handler
@common_options
def train_command(
    config_file: str | None,
    overrides: tuple[str, ...],
    seed: int | None,
    sessions: int,
    output_dir: str,
    workers: int,
) -> int:
    """Learn codes with the hyper-parameters of a config file."""
    from gqla.codefile import save_alist, save_code
    from gqla.config import load_training_config, parse_overrides
    from gqla.train import (
        code_metadata,
        train_sessions,
        write_session_summary,
        write_training_log,
    )

    values = parse_overrides(overrides)
    if seed is not None:
        values["seed"] = seed
    cfg = load_training_config(config_file or get_asset_path("train.yml"), values)

    manifest_path = os.path.join(output_dir, "manifest.json")
    manifest = _manifest({"training": cfg.model_dump()}, cfg.seed)
    manifest.write(manifest_path)

    console = get_console()
    status = f"[message_footer]Training {sessions} {cfg.dims} session(s)..."
    with console.status(status):
        reports = train_sessions(cfg, sessions, workers)

    outputs: list[str] = []
    table = Table(title=f"Learned {cfg.dims} codes", header_style="header")
    for column in ("seed", "M", "effective M", "best epoch", "val BLER", "time [s]"):
        table.add_column(column, justify="right")
    for report in reports:
        stem = os.path.join(output_dir, f"code-s{report.config.seed}")
        save_code(f"{stem}.json", report.code, code_metadata(report))
        save_alist(f"{stem}.alist", report.code)
        write_training_log(f"{stem}.train.csv", report)
        outputs += [f"{stem}.json", f"{stem}.alist", f"{stem}.train.csv"]
        best = report.best_val_bler
        table.add_row(
            str(report.config.seed),
            str(report.update_count),
            str(report.effective_update_count),
            "-" if report.best_epoch is None else str(report.best_epoch),
            "-" if best is None else f"{best:.3e}",
            f"{report.wall_time_s:.1f}",
        )
    summary_path = os.path.join(output_dir, "sessions.csv")
    write_session_summary(summary_path, reports)
    outputs.append(summary_path)
    manifest.finish(manifest_path, outputs)

    console.print(table)
    console.print(
        f"✓ Total updates M = {sum(r.update_count for r in reports)}.",
        style="message_footer",
    )
    return 0


@main.command("eval")
@click.argument("code_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--ebno", required=True, help="Eb/N0 in dB: start:stop:step or a,b,c.")
@click.option("--iters", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--rel", type=float, default=0.1, show_default=True)
@click.option(
    "--mode",
    type=click.Choice(["full_encoder", "all_zero"]),
    default="full_encoder",
    show_default=True,
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-blocks", type=click.IntRange(min=1), default=10**8)
@click.option(
    "--clamp",
    type=float,
    is_flag=False,
    flag_value=20.0,
    default=None,
    help="Bound variable-to-check messages, 20 when given without a value.",
)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@error_handler
@common_options
def eval_command(
    code_file: str,
    ebno: str,
    iters: int,
    rel: float,
    mode: str,
    seed: int,
    max_blocks: int,
    clamp: float | None,
    output: str,
    workers: int,
) -> int:
    """Estimate the BLER of a code over an Eb/N0 range."""
    from gqla.codefile import load_code
    from gqla.core import BpConfig
    from gqla.evaluate import evaluate_range, parse_range, write_bler_csv

    h, _ = load_code(code_file)
    ebno_list = parse_range(ebno)
    manifest_path = f"{output}.manifest.json"
    manifest = _manifest({}, seed)
    manifest.write(manifest_path)

    console = get_console()
    with console.status(f"[message_footer]Evaluating {len(ebno_list)} point(s)..."):
        estimates = evaluate_range(
            h,
            ebno_list,
            BpConfig(iterations=iters, message_clamp=clamp),
            rel,
            seed,
            "all_zero" if mode == "all_zero" else "full_encoder",
            max_blocks,
            workers,
        )
    write_bler_csv(output, estimates)
    manifest.finish(manifest_path, [output])
    console.print(_bler_table(f"BLER of {h.dims} code, {iters} iterations", estimates))
    return 0


@main.command("random-search")
@click.option("-n", "n", type=int, required=True, help="Codeword length.")
@click.option("-k", "k", type=int, required=True, help="Message length.")
@click.option("--density", required=True, help="Densities: start:stop:step or a,b.")
@click.option("--count", type=click.IntRange(min=1), required=True)
@click.option("--ebno", required=True, help="Eb/N0 in dB: start:stop:step or a,b,c.")
@click.option("--iters", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--rel", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--start-index", type=click.IntRange(min=0), default=0)
@click.option("--max-blocks", type=click.IntRange(min=1), default=10**8)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@error_handler
@common_options
def random_search_command(
    n: int,
    k: int,
    density: str,
    count: int,
    ebno: str,
    iters: int,
    rel: float,
    seed: int,
    start_index: int,
    max_blocks: int,
    output: str,
    workers: int,
) -> int:
    """Sample random codes and append their BLER records (JSON lines)."""
    from gqla.core import CodeDimensions
    from gqla.evaluate import parse_range
    from gqla.search import append_records, random_search_campaign

    dims = CodeDimensions(n, k)
    ebno_list = parse_range(ebno)
    manifest_path = f"{output}.manifest.json"
    manifest = _manifest({}, seed)
    manifest.write(manifest_path)

    console = get_console()
    for p in parse_range(density):
        with console.status(f"[message_footer]Density {p:.2f}: {count} codes..."):
            records = random_search_campaign(
                dims,
                p,
                count,
                ebno_list,
                rel,
                seed,
                iters=iters,
                max_blocks=max_blocks,
                start_index=start_index,
                workers=workers,
            )
        append_records(output, records)
        console.print(
            f"✓ Density {p:.2f}: {len(records)} records.", style="message_footer"
        )
    manifest.finish(manifest_path, [output])
    return 0


@main.command("cdf-stats")
@click.argument("records_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--ebno", type=float, default=None, help="Defaults to the largest.")
@click.option("-o", "--output", "prefix", required=True, help="Output path prefix.")
@error_handler
@common_options
def cdf_stats_command(
    records_file: str, ebno: float | None, prefix: str, workers: int
) -> int:
    """Per-density statistics and density ranking of random codes."""
    from gqla.search import (
        benchmark_density,
        cdfs_by_density,
        load_records,
        max_ebno,
        rank_densities,
        write_ranking_csv,
        write_summary_csv,
    )

    records = load_records(records_file)
    point = max_ebno(records) if ebno is None else ebno
    cdfs = cdfs_by_density(records, point)
    ranks = rank_densities(cdfs)
    write_summary_csv(f"{prefix}.summary.csv", cdfs)
    write_ranking_csv(f"{prefix}.ranking.csv", ranks)

    console = get_console()
    table = Table(
        title=f"Densities at {point:.2f} dB, best first", header_style="header"
    )
    table.add_column("point")
    table.add_column("densities (BLER)")
    for rank in ranks:
        table.add_row(
            rank.point, ", ".join(f"{d:.2f} ({b:.2e})" for d, b in rank.ranking)
        )
    console.print(table)
    unconverged = sum(c.unconverged for c in cdfs)
    if unconverged:
        console.print(
            f"{unconverged} unconverged estimate(s) left out.", style="warning"
        )
    console.print(
        f"✓ Benchmark density {benchmark_density(cdfs):.2f}.", style="message_footer"
    )
    return 0


@main.command("compare")
@click.argument("records_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("code_files", nargs=-1, required=True)
@click.option("--ebno", type=float, default=None, help="Defaults to the largest.")
@click.option("--density", type=float, default=None, help="Defaults to benchmark.")
@click.option("--bler-csv", multiple=True, help="Eval CSV per code, in order.")
@click.option("--updates", type=click.IntRange(min=1), default=None, help="M for all.")
@click.option("--iters", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--rel", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-blocks", type=click.IntRange(min=1), default=10**8)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@error_handler
@common_options
def compare_command(
    records_file: str,
    code_files: tuple[str, ...],
    ebno: float | None,
    density: float | None,
    bler_csv: tuple[str, ...],
    updates: int | None,
    iters: int,
    rel: float,
    seed: int,
    max_blocks: int,
    output: str,
    workers: int,
) -> int:
    """Probability that M random codes beat each learned code."""
    from gqla.codefile import load_code
    from gqla.core import ChannelSpec
    from gqla.evaluate import estimate_bler, read_bler_csv
    from gqla.search import (
        ComparisonResult,
        beat_probability,
        benchmark_density,
        build_cdf,
        cdfs_by_density,
        load_records,
        max_ebno,
        mean_beat_probability,
        write_comparison_csv,
    )

    if bler_csv and len(bler_csv) != len(code_files):
        raise GqlaError("config", "Give one --bler-csv per code file.")
    records = load_records(records_file)
    point = max_ebno(records) if ebno is None else ebno
    if density is None:
        density = benchmark_density(cdfs_by_density(records, point))
    cdf = build_cdf(records, point, density)

    results: list[ComparisonResult] = []
    console = get_console()
    for i, code_file in enumerate(code_files):
        h, metadata = load_code(code_file)
        m = updates if updates is not None else metadata.update_count
        if m is None:
            raise GqlaError(
                "config", f"{code_file} has no update_count; pass --updates."
            )
        if bler_csv:
            points = read_bler_csv(bler_csv[i])
            match = [b for e, b in points.items() if abs(e - point) <= 1e-9]
            if not match:
                raise GqlaError("format", f"{bler_csv[i]} has no row at {point} dB.")
            bler = match[0]
        else:
            with console.status(f"[message_footer]Evaluating {code_file}..."):
                bler = estimate_bler(
                    h,
                    ChannelSpec(point, h.dims.rate),
                    iters,
                    rel,
                    seed,
                    max_blocks=max_blocks,
                    workers=workers,
                ).p_tilde
        # the initial draw counts as one sample
        results.append(beat_probability(cdf, bler, max(m, 1), label=code_file))

    write_comparison_csv(output, results)
    table = Table(
        title=f"Learned vs random at {point:.2f} dB, density {density:.2f}",
        header_style="header",
    )
    for column in ("code", "BLER", "M", "q", "p_beat"):
        table.add_column(column, justify="right")
    for r in results:
        table.add_row(
            r.label,
            f"{r.learned_bler:.3e}",
            str(r.updates),
            f"{r.q:.3e}",
            f"{r.p_beat:.3e}",
        )
    console.print(table)
    console.print(
        f"✓ Mean p_beat {mean_beat_probability(results):.3e}.", style="message_footer"
    )
    return 0


@main.command("analyze")
@click.argument("code_files", nargs=-1)
@click.option(
    "--records",
    "records_file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Also analyze every code of a random search record file.",
)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@error_handler
@common_options
def analyze_command(
    code_files: tuple[str, ...], records_file: str | None, output: str, workers: int
) -> int:
    """Girth and degree histograms of one code or a population average."""
    from gqla.analyze import analyze_population
    from gqla.codefile import load_code
    from gqla.platform.output import write_json
    from gqla.search import load_records

    codes = [load_code(path)[0] for path in code_files]
    if records_file:
        codes += [r.code for r in load_records(records_file)]
    if not codes:
        raise GqlaError("config", "Give at least one code file or --records.")

    analysis = analyze_population(codes, workers)
    write_json(output, analysis.as_json())

    console = get_console()
    table = Table(
        title=f"Node girth over {analysis.codes} code(s)", header_style="header"
    )
    table.add_column("girth", justify="right")
    table.add_column("VN", justify="right")
    table.add_column("CN", justify="right")
    for key in dict.fromkeys([*analysis.vn_girth, *analysis.cn_girth]):
        table.add_row(
            key,
            f"{analysis.vn_girth.get(key, 0.0):.2f}",
            f"{analysis.cn_girth.get(key, 0.0):.2f}",
        )
    console.print(table)
    mean_vn = analysis.mean_girth("vn")
    mean_cn = analysis.mean_girth("cn")
    console.print(
        f"✓ Mean VN girth {'-' if mean_vn is None else f'{mean_vn:.3f}'}, "
        f"mean CN girth {'-' if mean_cn is None else f'{mean_cn:.3f}'}.",
        style="message_footer",
    )
    return 0


@main.command("sweep")
@click.option(
    "-c",
    "--config",
    "config_file",
    type=click.Path(dir_okay=False),
    default=None,
    help="Training config file. Defaults to the packaged (32,16) example.",
)
@click.option("--set", "overrides", multiple=True, help="Override as key=value.")
@click.option("--ebno", type=float, required=True, help="Ranking Eb/N0 in dB.")
@click.option("--alpha", default="1.2:5.0:0.2", show_default=True)
@click.option("--n-errors", default="2,3,4,5,6", show_default=True)
@click.option("--threshold", default="10,20,30", show_default=True)
@click.option("--density", default="0.15:0.45:0.1", show_default=True)
@click.option("--iters", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--rel", type=float, default=0.1, show_default=True)
@click.option("--max-blocks", type=click.IntRange(min=1), default=10**8)
@click.option("-o", "--output", "output_dir", required=True, type=click.Path())
@error_handler
@common_options
def sweep_command(
    config_file: str | None,
    overrides: tuple[str, ...],
    ebno: float,
    alpha: str,
    n_errors: str,
    threshold: str,
    density: str,
    iters: int,
    rel: float,
    max_blocks: int,
    output_dir: str,
    workers: int,
) -> int:
    """Coarse hyper-parameter search, one session per combination."""
    from gqla.config import load_training_config, parse_overrides
    from gqla.evaluate import parse_range
    from gqla.sweep import SweepGrid, run_sweep, write_sweep_csv

    cfg = load_training_config(
        config_file or get_asset_path("train.yml"), parse_overrides(overrides)
    )
    grid = SweepGrid(
        alpha=tuple(parse_range(alpha)),
        n_errors=tuple(int(v) for v in parse_range(n_errors)),
        threshold_t=tuple(int(v) for v in parse_range(threshold)),
        init_density=tuple(parse_range(density)),
    )
    manifest_path = os.path.join(output_dir, "manifest.json")
    manifest = _manifest({"training": cfg.model_dump()}, cfg.seed)
    manifest.write(manifest_path)

    console = get_console()
    with console.status(
        f"[message_footer]Sweeping {len(grid.combinations())} combinations..."
    ):
        results = run_sweep(cfg, grid, ebno, iters, rel, max_blocks, workers)
    ranking_path = os.path.join(output_dir, "sweep.csv")
    write_sweep_csv(ranking_path, results)
    manifest.finish(manifest_path, [ranking_path])

    table = Table(title=f"Best combinations at {ebno:.2f} dB", header_style="header")
    for column in ("alpha", "N_errors", "T", "D", "M", "BLER"):
        table.add_column(column, justify="right")
    for r in results[:10]:
        table.add_row(
            f"{r.config.alpha:.1f}",
            str(r.config.n_errors),
            str(r.config.threshold_t),
            f"{r.config.init_density:.2f}",
            str(r.update_count),
            f"{r.estimate.p_tilde:.3e}",
        )
    console.print(table)
    return 0


if __name__ == "__main__":
    main()
