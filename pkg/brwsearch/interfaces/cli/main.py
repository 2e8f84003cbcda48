"""
Command-line interface for the brwsearch toolkit.

Global options select the master seed, the worker thread count, the output
directory and the report format; each subcommand runs one stage of the
search experiments. Exit codes: 0 success, 2 partial result (capped trials,
unconverged rewiring), 1 failure.
"""
import functools
import json
import logging
from pathlib import Path
from typing import Any, Callable, List, Optional

import click
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table as RichTable

from brwsearch import __version__
from brwsearch.config import (
    CLI_CONFIG,
    DEFAULT_FORMAT,
    DEFAULT_OUT_DIR,
    DEFAULT_SEED,
    DEFAULT_THREADS,
    EXPERIMENT_CONFIG,
    LOG_LEVEL,
    REWIRE_CONFIG,
)
from brwsearch.core.chain import absorption_stats
from brwsearch.core.errors import (
    BrwSearchError,
    DomainError,
    UndefinedAssortativityError,
)
from brwsearch.core.generators import (
    ErSpec,
    expected_max_degree_bound,
    extract_giant_component,
    generate_er,
    giant_component_fraction,
)
from brwsearch.core.graph import (
    DegreeProfile,
    Graph,
    assortativity,
    conditional_degree_matrix,
    degree_profile,
    joint_degree_matrix,
    read_edge_list,
    write_edge_list,
)
from brwsearch.core.reduced import (
    DegreeTransitionMatrix,
    approximate_matrix,
    averaged_matrix,
    build_reduced_chain,
)
from brwsearch.core.rewire import RewireConfig, rewire_and_reconnect
from brwsearch.core.walker import build_full_chain
from brwsearch.experiments.models import ExperimentPlan
from brwsearch.experiments.report import (
    Table,
    absorption_table,
    alpha_study_tables,
    chain_table,
    emit_report,
    matrix_table,
    model_compare_table,
    sweep_summary_table,
    sweep_table,
    trials_table,
)
from brwsearch.experiments.sweep import alpha_study, compare_model, sweep_beta


# Configure logging
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format=CLI_CONFIG["log_format"],
)
logger = logging.getLogger(__name__)


# Create console
console = Console()

EXIT_PARTIAL = 2
EXIT_FAILURE = 1

# Options shared by the commands that read a graph.
input_option = click.option(
    "--in",
    "src",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Input edge list",
)
output_option = click.option(
    "--out",
    "out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Edge-list path",
)
start_mode_option = click.option(
    "--start-mode",
    type=click.Choice(["transient", "all"]),
    default="transient",
    show_default=True,
    help="Start distribution",
)


def display_error(error: str):
    """Display an error message.

    Args:
        error: Error message
    """
    console.print(Panel.fit(error, title="Error", border_style="red"))


def display_summary(title: str, values: dict):
    """Display key/value results in a panel.

    Args:
        title: Panel title
        values: Values to show, in order
    """
    table = RichTable(show_header=False, box=None)
    for key, value in values.items():
        table.add_row(f"[bold]{key}[/bold]", str(value))
    console.print(Panel.fit(table, title=title, border_style="green"))


def display_written(paths: List[Path]):
    """List the files a command wrote."""
    for path in paths:
        console.print(f"[dim]wrote[/dim] {path}")


def _float_list(
    ctx: click.Context, param: click.Parameter, value: Optional[str]
) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{value}'")


def handle_errors(command: Callable) -> Callable:
    """Map library and validation errors to a rich panel and exit code 1."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except (BrwSearchError, ValidationError) as e:
            logger.debug("Command failed", exc_info=True)
            display_error(str(e))
            click.get_current_context().exit(EXIT_FAILURE)

    return wrapper


@click.group()
@click.version_option(__version__, prog_name="brwsearch")
@click.option(
    "--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Master seed"
)
@click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=DEFAULT_THREADS,
    show_default=True,
    help="Worker threads",
)
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=DEFAULT_OUT_DIR,
    show_default=True,
    help="Directory for report files",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(CLI_CONFIG["formats"]),
    default=DEFAULT_FORMAT,
    show_default=True,
    help="Report format",
)
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.pass_context
def cli(
    ctx: click.Context, seed: int, threads: int, out_dir: Path, fmt: str, debug: bool
):
    """Biased random walk search for maximum-degree nodes."""
    # Configure logging
    if debug:
        logging.getLogger().setLevel(logging.DEBUG)
    ctx.obj = {"seed": seed, "threads": threads, "out_dir": out_dir, "fmt": fmt}


@cli.command()
@click.option("--n", "n", type=int, required=True, help="Number of nodes")
@click.option("--p", "p", type=float, default=None, help="Edge probability")
@click.option(
    "--lambda", "lam", type=float, default=None, help="Mean degree (p = lambda / n)"
)
@click.option(
    "--seed", type=int, default=None, help="Graph seed (defaults to the master seed)"
)
@click.option("--giant-only", is_flag=True, help="Keep only the giant component")
@output_option
@click.pass_context
@handle_errors
def generate(
    ctx: click.Context,
    n: int,
    p: Optional[float],
    lam: Optional[float],
    seed: Optional[int],
    giant_only: bool,
    out: Optional[Path],
):
    """Generate an Erdős–Rényi graph and write it as an edge list."""
    spec = ErSpec(n=n, p=p, lam=lam, seed=ctx.obj["seed"] if seed is None else seed)
    graph = generate_er(spec)
    if giant_only:
        graph = extract_giant_component(graph)
    out = out or ctx.obj["out_dir"] / "graph.edges"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(out, graph)

    mean_degree = spec.edge_probability * spec.n
    summary = {
        "nodes": graph.n,
        "edges": graph.m,
        "d_max": int(graph.degrees.max(initial=0)),
    }
    try:
        bound = expected_max_degree_bound(spec.n, mean_degree)
        summary["d_max bound"] = f"{bound:.4f}"
    except DomainError:
        pass
    try:
        summary["giant fraction"] = f"{giant_component_fraction(mean_degree):.6f}"
    except DomainError:
        pass
    summary["written to"] = str(out)
    display_summary("Generated graph", summary)


@cli.command()
@input_option
@click.option(
    "--target-alpha", type=float, required=True, help="Target assortativity in [-1, 1]"
)
@click.option(
    "--eps",
    type=float,
    default=REWIRE_CONFIG["eps"],
    show_default=True,
    help="Tolerance",
)
@click.option(
    "--max-proposals",
    type=int,
    default=REWIRE_CONFIG["max_proposals"],
    show_default=True,
    help="Proposal budget",
)
@click.option(
    "--seed", type=int, default=None, help="Rewiring seed (defaults to the master seed)"
)
@click.option(
    "--reconnect/--no-reconnect",
    default=REWIRE_CONFIG["reconnect"],
    show_default=True,
    help="Bridge components afterwards",
)
@click.option(
    "--mode",
    type=click.Choice(["best", "single"]),
    default=REWIRE_CONFIG["mode"],
    show_default=True,
    help="Reconnection choice per proposal",
)
@output_option
@click.pass_context
@handle_errors
def rewire(
    ctx: click.Context,
    src: Path,
    target_alpha: float,
    eps: float,
    max_proposals: int,
    seed: Optional[int],
    reconnect: bool,
    mode: str,
    out: Optional[Path],
):
    """Rewire a graph toward a target assortativity."""
    cfg = RewireConfig(
        target_alpha=target_alpha,
        eps=eps,
        max_proposals=max_proposals,
        seed=ctx.obj["seed"] if seed is None else seed,
        reconnect=reconnect,
        mode=mode,
    )
    graph, report = rewire_and_reconnect(read_edge_list(src), cfg)
    out = out or ctx.obj["out_dir"] / "rewired.edges"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(out, graph)

    summary = report.summary_dict()
    table = Table("rewire_report", list(summary), [list(summary.values())])
    paths = emit_report([table], ctx.obj["out_dir"], ctx.obj["fmt"])
    console.print_json(json.dumps(summary))
    display_written([out, *paths])
    if not report.converged:
        ctx.exit(EXIT_PARTIAL)


def _chain_dumps(
    graph: Graph, beta: float, approx: DegreeTransitionMatrix, profile: DegreeProfile
) -> List[Table]:
    tables = []
    chains = [
        ("walk", build_full_chain(graph, beta)),
        ("model", build_reduced_chain(approx, profile)),
    ]
    for prefix, chain in chains:
        tables.append(chain_table(chain, f"{prefix}_chain"))
        moments = absorption_stats(chain)
        # Regular graphs have no transient state to report.
        if moments.states:
            tables.append(absorption_table(moments, f"{prefix}_absorption"))
    return tables


@cli.command()
@input_option
@click.option(
    "--beta",
    type=float,
    default=None,
    help="Also dump the degree transition matrices at this exponent",
)
@click.option(
    "--dump-chain",
    is_flag=True,
    help="With --beta, also dump the walk and model chains and their absorption"
    " moments",
)
@click.pass_context
@handle_errors
def stats(ctx: click.Context, src: Path, beta: Optional[float], dump_chain: bool):
    """Write the joint and conditional degree matrices and the assortativity."""
    if dump_chain and beta is None:
        raise click.UsageError("--dump-chain needs --beta")
    graph = read_edge_list(src)
    profile = degree_profile(graph)
    joint = joint_degree_matrix(graph, profile)
    conditional = conditional_degree_matrix(joint)
    try:
        alpha: Optional[float] = assortativity(graph)
    except UndefinedAssortativityError as e:
        logger.warning(f"Assortativity undefined: {e}")
        alpha = None
    tables = [
        matrix_table("joint_degree", joint.matrix, joint.degree_set),
        matrix_table("conditional_degree", conditional.matrix, conditional.degree_set),
        Table(
            "degree_stats",
            ["n", "m", "d_max", "delta", "alpha"],
            [[graph.n, graph.m, profile.d_max, profile.delta, alpha]],
        ),
    ]
    if beta is not None:
        averaged = averaged_matrix(graph, beta, profile)
        approx = approximate_matrix(conditional, beta, profile)
        tables.append(
            matrix_table("averaged_transition", averaged.matrix, averaged.degree_set)
        )
        tables.append(
            matrix_table("approximate_transition", approx.matrix, approx.degree_set)
        )
        if dump_chain:
            tables.extend(_chain_dumps(graph, beta, approx, profile))
    paths = emit_report(tables, ctx.obj["out_dir"], ctx.obj["fmt"])
    display_summary(
        "Degree statistics",
        {
            "nodes": graph.n,
            "edges": graph.m,
            "d_max": profile.d_max,
            "degrees": profile.delta,
            "alpha": "undefined" if alpha is None else f"{alpha:.6f}",
        },
    )
    display_written(paths)
    if alpha is None:
        ctx.exit(EXIT_PARTIAL)


def _plan(ctx: click.Context, **overrides: Any) -> ExperimentPlan:
    values = {
        "seed": ctx.obj["seed"],
        "threads": ctx.obj["threads"],
        "out_dir": ctx.obj["out_dir"],
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentPlan(**values)


@cli.command()
@input_option
@click.option(
    "--beta-max",
    type=float,
    default=None,
    help=f"Largest exponent [default: {EXPERIMENT_CONFIG['beta_max']}]",
)
@click.option(
    "--beta-step",
    type=float,
    default=None,
    help=f"Grid step [default: {EXPERIMENT_CONFIG['beta_step']}]",
)
@click.option(
    "--betas", callback=_float_list, default=None, help="Explicit comma-separated grid"
)
@click.option(
    "--trials",
    type=int,
    default=None,
    help=f"Trials per exponent [default: {EXPERIMENT_CONFIG['trials']}]",
)
@start_mode_option
@click.option(
    "--model/--no-model", default=True, show_default=True, help="Evaluate the reduced model"
)
@click.pass_context
@handle_errors
def sweep(
    ctx: click.Context,
    src: Path,
    beta_max: Optional[float],
    beta_step: Optional[float],
    betas: Optional[List[float]],
    trials: Optional[int],
    start_mode: str,
    model: bool,
):
    """Sweep the bias exponent on one graph."""
    plan = _plan(
        ctx,
        beta_max=beta_max,
        beta_step=beta_step,
        betas=betas,
        trials=trials,
        start_mode=start_mode,
        model=model,
        keep_trials=True,
    )
    result = sweep_beta(read_edge_list(src), plan)
    tables = [sweep_table(result), sweep_summary_table(result)]
    trials_dump = trials_table(result)
    if trials_dump is not None:
        tables.append(trials_dump)
    paths = emit_report(tables, plan.out_dir, ctx.obj["fmt"])
    display_summary(
        "Sweep",
        {
            "beta*": result.beta_star,
            "interval": f"[{result.beta_min}, {result.beta_max}]",
            "E[T*]": f"{result.e_t_star:.4f}",
            "model beta*": result.model_beta_star,
        },
    )
    display_written(paths)
    if result.flagged or result.no_transient:
        ctx.exit(EXIT_PARTIAL)


@cli.command("alpha-study")
@click.option(
    "--targets",
    callback=_float_list,
    default=None,
    help="Comma-separated target assortativities",
)
@click.option(
    "--graphs",
    type=int,
    default=None,
    help=f"Graphs per target [default: {EXPERIMENT_CONFIG['graphs_per_target']}]",
)
@click.option(
    "--n",
    "n",
    type=int,
    default=None,
    help=f"Nodes per graph [default: {EXPERIMENT_CONFIG['n']}]",
)
@click.option(
    "--p",
    "p",
    type=float,
    default=None,
    help=f"Edge probability [default: {EXPERIMENT_CONFIG['p']}]",
)
@click.option(
    "--lambda", "lam", type=float, default=None, help="Mean degree (overrides --p)"
)
@click.option(
    "--giant-only/--whole-graph",
    default=True,
    show_default=True,
    help="Restrict to the giant component before rewiring",
)
@click.option("--beta-max", type=float, default=None, help="Largest exponent")
@click.option("--beta-step", type=float, default=None, help="Grid step")
@click.option("--trials", type=int, default=None, help="Trials per exponent")
@click.option("--eps", type=float, default=None, help="Rewiring tolerance")
@click.option(
    "--max-proposals", type=int, default=None, help="Rewiring proposal budget"
)
@click.option(
    "--model/--no-model", default=True, show_default=True, help="Evaluate the reduced model"
)
@click.pass_context
@handle_errors
def alpha_study_command(
    ctx: click.Context,
    targets: Optional[List[float]],
    graphs: Optional[int],
    n: Optional[int],
    p: Optional[float],
    lam: Optional[float],
    giant_only: bool,
    beta_max: Optional[float],
    beta_step: Optional[float],
    trials: Optional[int],
    eps: Optional[float],
    max_proposals: Optional[int],
    model: bool,
):
    """Optimal bias exponent as a function of target assortativity."""
    plan = _plan(
        ctx,
        alpha_targets=targets,
        graphs_per_target=graphs,
        n=n,
        p=p,
        lam=lam,
        giant_only=giant_only,
        beta_max=beta_max,
        beta_step=beta_step,
        trials=trials,
        eps=eps,
        max_proposals=max_proposals,
        model=model,
    )
    study = alpha_study(plan)
    paths = emit_report(alpha_study_tables(study), plan.out_dir, ctx.obj["fmt"])

    table = RichTable(title="Assortativity study")
    for column in ("alpha_t", "alpha", "beta*", "interval", "E[T*]", "no-r n"):
        table.add_column(column)
    for row in study.rows:
        table.add_row(
            f"{row.alpha_t:+.2f}",
            f"{row.achieved_alpha:+.3f}",
            f"{row.beta_star:.2f}",
            f"[{row.beta_min:.2f}, {row.beta_max:.2f}]",
            f"{row.e_t_star:.2f}",
            f"{row.no_r_n_mean:.2f}",
        )
    console.print(table)
    display_written(paths)
    if study.flagged:
        ctx.exit(EXIT_PARTIAL)


@cli.command("model-compare")
@input_option
@click.option(
    "--betas",
    callback=_float_list,
    default="0,1,2,4,8",
    show_default=True,
    help="Comma-separated exponents",
)
@click.option(
    "--trials",
    type=int,
    default=EXPERIMENT_CONFIG["trials"],
    show_default=True,
    help="Trials per exponent",
)
@start_mode_option
@click.option("--budget", type=int, default=None, help="Enumeration budget")
@click.pass_context
@handle_errors
def model_compare(
    ctx: click.Context,
    src: Path,
    betas: List[float],
    trials: int,
    start_mode: str,
    budget: Optional[int],
):
    """Compare the simulated walk with the reduced degree model."""
    rows = compare_model(
        read_edge_list(src),
        betas,
        trials,
        ctx.obj["seed"],
        start_mode=start_mode,
        budget=budget,
        threads=ctx.obj["threads"],
    )
    paths = emit_report([model_compare_table(rows)], ctx.obj["out_dir"], ctx.obj["fmt"])

    table = RichTable(title="Walk vs reduced model")
    for column in ("beta", "E[T] walk", "E[T] model", "rel. error"):
        table.add_column(column)
    for row in rows:
        table.add_row(
            f"{row.beta:g}",
            f"{row.e_t_empirical:.3f} ± {row.se_empirical:.3f}",
            f"{row.e_t_model:.3f}",
            f"{row.relative_error:+.3f}",
        )
    console.print(table)
    display_written(paths)


def main():
    """Console-script entry point."""
    cli(prog_name="brwsearch")


if __name__ == "__main__":
    main()
