"""
Bias sweeps, model comparisons and assortativity studies.

Every stochastic step draws from a seed derived from the plan's master seed
and the position of the step in the experiment (target index, graph index,
grid index), so results are identical whatever the thread count.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from scipy import stats

from brwsearch.config import ENUMERATION_BUDGET
from brwsearch.core.errors import (
    DisconnectedGraphError,
    DomainError,
    ModelInfeasibleError,
    UndefinedAssortativityError,
)
from brwsearch.core.generators import extract_giant_component, generate_er
from brwsearch.core.graph import Graph, assortativity, degree_profile
from brwsearch.core.reduced import (
    ModelResult,
    enumeration_terms,
    matrix_gap,
    model_absorption,
)
from brwsearch.core.rewire import RewireConfig, rewire_and_reconnect
from brwsearch.core.seeding import derive_seed
from brwsearch.core.walker import (
    SamplingMode,
    TrialSummary,
    WalkConfig,
    WalkResult,
    simulate_brw,
    simulate_sampling,
)
from brwsearch.experiments.models import (
    AlphaStudyResult,
    AlphaStudyRow,
    ExperimentPlan,
    GraphCell,
    GraphMetadata,
    ModelComparisonRow,
    SweepResult,
    TrendSummary,
)


# Configure logging
logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Mean within this factor of the minimum counts as near-optimal.
NEAR_OPTIMAL_FACTOR = 1.1


def _ordered_map(func: Callable[[T], R], items: Sequence[T], threads: int) -> List[R]:
    # Results come back in input order regardless of completion order.
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def beta_star_interval(
    betas: Sequence[float], means: Sequence[float]
) -> Tuple[float, float, float]:
    """Optimal bias exponent and its near-optimal interval.

    beta* is the smallest grid value attaining the minimum mean. The
    interval is the contiguous run of grid values around beta* whose means
    stay within NEAR_OPTIMAL_FACTOR of the minimum.

    Args:
        betas: Ascending grid
        means: Mean absorption time per grid value (NaN for missing)

    Returns:
        (beta*, beta_min, beta_max)

    Raises:
        DomainError: If the grid is empty or no mean is finite
    """
    values = np.asarray(means, dtype=float)
    if values.size == 0 or len(betas) != values.size:
        raise DomainError("beta grid and means must be nonempty and aligned")
    finite = np.isfinite(values)
    if not finite.any():
        raise DomainError("no finite mean on the beta grid")
    masked = np.where(finite, values, np.inf)
    star = int(np.argmin(masked))
    limit = NEAR_OPTIMAL_FACTOR * masked[star]
    lo = hi = star
    while lo > 0 and masked[lo - 1] <= limit:
        lo -= 1
    while hi < values.size - 1 and masked[hi + 1] <= limit:
        hi += 1
    return float(betas[star]), float(betas[lo]), float(betas[hi])


def _safe_assortativity(graph: Graph) -> Optional[float]:
    try:
        return assortativity(graph)
    except UndefinedAssortativityError:
        return None


def _model_feasible(graph: Graph, plan: ExperimentPlan) -> bool:
    if not plan.model:
        return False
    terms = enumeration_terms(graph)
    if terms > plan.model_budget:
        logger.warning(
            f"Model skipped: {terms} enumeration terms exceed the budget of {plan.model_budget}"
        )
        return False
    return True


def sweep_beta(
    graph: Graph,
    plan: ExperimentPlan,
    alpha: Optional[float] = None,
    seed: Optional[int] = None,
) -> SweepResult:
    """Sweep the bias exponent over the plan's grid on one graph.

    The walk is simulated at every grid value with the same seed (common
    random numbers across the grid). The reduced model runs when the plan
    asks for it and its enumeration fits the budget; otherwise the model
    columns stay empty. Both sampling baselines are computed once.

    Args:
        graph: Connected graph
        plan: Grid, trials, threads and model settings
        alpha: Assortativity to record (computed when omitted)
        seed: Master seed of this sweep (defaults to plan.seed)

    Returns:
        SweepResult

    Raises:
        DisconnectedGraphError: If the graph is disconnected
        DomainError: If the grid is empty
    """
    if not graph.is_connected():
        raise DisconnectedGraphError(f"{graph} is disconnected; sweeps need a connected graph")
    seed = plan.seed if seed is None else seed
    betas = plan.beta_grid()
    if not betas:
        raise DomainError("empty beta grid")
    profile = degree_profile(graph)
    metadata = GraphMetadata(
        graph_hash=graph.fingerprint(),
        n=graph.n,
        m=graph.m,
        d_max=profile.d_max,
        alpha=alpha if alpha is not None else _safe_assortativity(graph),
        seed=seed,
    )

    baselines: Dict[str, TrialSummary] = {}
    baseline_times: Dict[str, List[int]] = {}
    for k, mode in enumerate(SamplingMode):
        sample = simulate_sampling(graph, mode, derive_seed(seed, 1, k), plan.trials)
        baselines[mode.value] = sample.summary
        baseline_times[mode.value] = sample.times

    if profile.delta == 1:
        logger.warning(f"{graph} is regular: every node has maximum degree")
        zero = TrialSummary(count=0, mean=0.0, std=0.0, stderr=0.0)
        return SweepResult(
            betas=betas,
            brw=[zero] * len(betas),
            brw_times=[[] for _ in betas],
            capped=[0] * len(betas),
            baselines=baselines,
            baseline_times=baseline_times,
            beta_star=betas[0],
            beta_min=betas[0],
            beta_max=betas[-1],
            metadata=metadata,
            no_transient=True,
        )

    with_model = _model_feasible(graph, plan)
    walk_seed = derive_seed(seed, 0)

    def cell(beta: float) -> Tuple[WalkResult, Optional[ModelResult]]:
        cfg = WalkConfig(
            beta=beta,
            seed=walk_seed,
            trials=plan.trials,
            step_cap=plan.step_cap,
            start_mode=plan.start_mode,
        )
        walk = simulate_brw(graph, cfg)
        model = None
        if with_model:
            model = model_absorption(graph, beta, plan.start_mode, budget=plan.model_budget)
        return walk, model

    cells = _ordered_map(cell, betas, plan.threads)
    brw = [c[0].summary for c in cells]
    beta_star, beta_min, beta_max = beta_star_interval(betas, [s.mean for s in brw])

    models = [c[1] for c in cells] if with_model else None
    model_beta_star = model_e_t_star = None
    if models:
        model_beta_star, _, _ = beta_star_interval(betas, [m.mean for m in models])
        model_e_t_star = models[betas.index(model_beta_star)].mean

    logger.info(
        f"Sweep of {graph} over {len(betas)} exponents: beta*={beta_star}, "
        f"interval=[{beta_min}, {beta_max}]"
    )
    return SweepResult(
        betas=betas,
        brw=brw,
        brw_times=[c[0].times for c in cells],
        brw_rows=[c[0].rows() for c in cells] if plan.keep_trials else [],
        capped=[len(c[0].capped_trials) for c in cells],
        model=models,
        model_feasible=with_model,
        baselines=baselines,
        baseline_times=baseline_times,
        beta_star=beta_star,
        beta_min=beta_min,
        beta_max=beta_max,
        model_beta_star=model_beta_star,
        model_e_t_star=model_e_t_star,
        metadata=metadata,
    )


def compare_model(
    graph: Graph,
    betas: Sequence[float],
    trials: int,
    seed: int,
    start_mode: str = "transient",
    budget: Optional[int] = None,
    threads: int = 1,
) -> List[ModelComparisonRow]:
    """Pair the simulated walk with the reduced model at every exponent.

    Besides the model built on the approximate degree matrix, each row
    carries the averaged-matrix model and the largest entrywise gap between
    the two matrices.

    Raises:
        ModelInfeasibleError: If the enumeration exceeds the budget
        DisconnectedGraphError: If the graph is disconnected
    """
    plan_budget = ENUMERATION_BUDGET if budget is None else budget
    terms = enumeration_terms(graph)
    if terms > plan_budget:
        raise ModelInfeasibleError(terms, plan_budget, d_max=degree_profile(graph).d_max)
    walk_seed = derive_seed(seed, 0)

    def row(beta: float) -> ModelComparisonRow:
        walk = simulate_brw(
            graph, WalkConfig(beta=beta, seed=walk_seed, trials=trials, start_mode=start_mode)
        )
        model = model_absorption(graph, beta, start_mode, budget=plan_budget)
        averaged = model_absorption(graph, beta, start_mode, matrix="averaged")
        try:
            gap = matrix_gap(graph, beta, plan_budget)
        except ModelInfeasibleError:
            gap = None
        empirical = walk.summary.mean
        discrepancy = model.mean - empirical
        if empirical > 0:
            relative = discrepancy / empirical
        else:
            relative = 0.0 if discrepancy == 0 else math.inf
        stderr = walk.summary.stderr
        return ModelComparisonRow(
            beta=beta,
            e_t_empirical=empirical,
            se_empirical=stderr,
            e_t_model=model.mean,
            std_model=model.std,
            e_t_averaged=averaged.mean,
            discrepancy=discrepancy,
            relative_error=relative,
            z_score=discrepancy / stderr if stderr > 0 else None,
            matrix_gap=gap,
        )

    rows = _ordered_map(row, sorted(set(float(b) for b in betas)), threads)
    logger.info(f"Compared walk and model on {graph} at {len(rows)} exponents")
    return rows


def beta_trend(alphas: Sequence[float], beta_stars: Sequence[float]) -> Optional[TrendSummary]:
    """Spearman correlation of beta* with assortativity, with a Fisher-z 95% interval.

    Returns None when fewer than three points are given or either series is
    constant.
    """
    if len(alphas) < 3 or len(set(alphas)) < 2 or len(set(beta_stars)) < 2:
        return None
    rho, p_value = stats.spearmanr(alphas, beta_stars)
    rho, p_value = float(rho), float(p_value)
    points = len(alphas)
    ci_low = ci_high = None
    if points > 3 and abs(rho) < 1.0 - 1e-12:
        z = math.atanh(rho)
        half = stats.norm.ppf(0.975) / math.sqrt(points - 3)
        ci_low, ci_high = math.tanh(z - half), math.tanh(z + half)
    return TrendSummary(rho=rho, p_value=p_value, ci_low=ci_low, ci_high=ci_high, points=points)


def _run_cell(
    plan: ExperimentPlan, target_index: int, alpha_t: float, graph_index: int
) -> GraphCell:
    cell_seed = derive_seed(plan.seed, target_index, graph_index)
    graph = generate_er(plan.er_spec(derive_seed(cell_seed, 0)))
    if plan.giant_only:
        graph = extract_giant_component(graph)
    cfg = RewireConfig(
        target_alpha=alpha_t,
        eps=plan.eps,
        max_proposals=plan.max_proposals,
        seed=derive_seed(cell_seed, 1),
        reconnect=True,
        mode=plan.rewire_mode,
    )
    connected, report = rewire_and_reconnect(graph, cfg)
    sweep = sweep_beta(
        connected,
        plan.model_copy(update={"threads": 1}),
        alpha=report.achieved_post_connect,
        seed=derive_seed(cell_seed, 2),
    )
    logger.debug(
        f"alpha_t={alpha_t} graph {graph_index}: alpha={report.achieved_post_connect:.4f}, "
        f"beta*={sweep.beta_star}"
    )
    return GraphCell(
        alpha_t=alpha_t,
        graph_index=graph_index,
        seed=cell_seed,
        rewire=report,
        sweep=sweep,
    )


def _nanmean(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def _aggregate_target(alpha_t: float, cells: List[GraphCell]) -> AlphaStudyRow:
    sweeps = [c.sweep for c in cells]
    optimal_times = [t for s in sweeps for t in s.brw_times[s.star_index]]
    no_r = [t for s in sweeps for t in s.baseline_times[SamplingMode.NO_R.value]]
    no_r_n = [t for s in sweeps for t in s.baseline_times[SamplingMode.NO_R_N.value]]

    welch_p = None
    if len(optimal_times) > 1 and len(no_r_n) > 1:
        result = stats.ttest_ind(optimal_times, no_r_n, equal_var=False)
        if np.isfinite(result.pvalue):
            welch_p = float(result.pvalue)

    inferior = sum(
        all(b.mean >= s.baselines[SamplingMode.NO_R_N.value].mean for b in s.brw)
        for s in sweeps
    )
    return AlphaStudyRow(
        alpha_t=alpha_t,
        achieved_alpha=float(np.mean([c.rewire.achieved_post_connect for c in cells])),
        beta_star=float(np.mean([s.beta_star for s in sweeps])),
        beta_min=float(np.mean([s.beta_min for s in sweeps])),
        beta_max=float(np.mean([s.beta_max for s in sweeps])),
        e_t_star=float(np.mean(optimal_times)) if optimal_times else 0.0,
        no_r_mean=float(np.mean(no_r)),
        no_r_n_mean=float(np.mean(no_r_n)),
        model_beta_star=_nanmean([s.model_beta_star for s in sweeps]),
        model_e_t_star=_nanmean([s.model_e_t_star for s in sweeps]),
        welch_p=welch_p,
        graphs=len(cells),
        graphs_brw_inferior=inferior,
        unconverged=sum(not c.rewire.converged for c in cells),
    )


def alpha_study(plan: ExperimentPlan) -> AlphaStudyResult:
    """Optimal bias exponent as a function of target assortativity.

    For every target, graphs_per_target ER graphs are generated, optionally
    reduced to their giant component, rewired toward the target,
    reconnected and swept. Cells run in parallel and are reduced in
    (target, graph) order.
    """
    jobs = [
        (ti, alpha_t, gi)
        for ti, alpha_t in enumerate(plan.alpha_targets)
        for gi in range(plan.graphs_per_target)
    ]
    logger.info(
        f"Assortativity study: {len(plan.alpha_targets)} targets x "
        f"{plan.graphs_per_target} graphs on {plan.threads} thread(s)"
    )
    cells = _ordered_map(lambda job: _run_cell(plan, *job), jobs, plan.threads)

    rows = []
    for ti, alpha_t in enumerate(plan.alpha_targets):
        group = cells[ti * plan.graphs_per_target:(ti + 1) * plan.graphs_per_target]
        rows.append(_aggregate_target(alpha_t, group))

    trend = beta_trend([r.alpha_t for r in rows], [r.beta_star for r in rows])
    if trend is not None:
        logger.info(
            f"beta* trend over alpha_t: rho={trend.rho:.3f} (p={trend.p_value:.3g}, "
            f"95% CI [{trend.ci_low}, {trend.ci_high}])"
        )
    unconverged = sum(r.unconverged for r in rows)
    if unconverged:
        logger.warning(f"{unconverged} graph(s) did not reach their target assortativity")
    return AlphaStudyResult(rows=rows, cells=cells, trend=trend)
