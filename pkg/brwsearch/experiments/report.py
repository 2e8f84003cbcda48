"""
Plot-ready tables and their CSV / JSON files.

Each experiment result is flattened into one or more named tables with a
fixed column order. emit_report writes one file per table; formatting is
deterministic, so identical results give byte-identical files.
"""
import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from brwsearch.core.chain import AbsorbingChain, AbsorptionStats
from brwsearch.core.errors import ReportError
from brwsearch.core.walker import SamplingMode
from brwsearch.experiments.models import AlphaStudyResult, ModelComparisonRow, SweepResult


# Configure logging
logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


@dataclass
class Table:
    """Named table with a stable column order."""

    name: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    def records(self) -> List[Dict[str, Any]]:
        """Rows as column-ordered dictionaries."""
        return [dict(zip(self.columns, row)) for row in self.rows]


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_cell(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def emit_report(tables: Sequence[Table], out_dir: Path, fmt: str = "csv") -> List[Path]:
    """Write every table to ``out_dir/<name>.<fmt>``.

    Args:
        tables: Tables to write
        out_dir: Output directory (created if missing)
        fmt: "csv" or "json"

    Returns:
        Paths written, in table order

    Raises:
        ReportError: If there is nothing to write, the format is unknown or
            the directory is not writable
    """
    if fmt not in FORMATS:
        raise ReportError(f"unknown report format '{fmt}', expected one of {FORMATS}")
    if not tables:
        raise ReportError("no tables to report")
    empty = [t.name for t in tables if not t.rows]
    if empty:
        raise ReportError(f"empty result table(s): {', '.join(empty)}")

    out_dir = Path(out_dir)
    paths = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for table in tables:
            path = out_dir / f"{table.name}.{fmt}"
            with open(path, "w", encoding="utf-8", newline="") as f:
                if fmt == "csv":
                    writer = csv.writer(f, lineterminator="\n")
                    writer.writerow(table.columns)
                    writer.writerows([_csv_cell(v) for v in row] for row in table.rows)
                else:
                    records = [
                        {k: _json_cell(v) for k, v in record.items()}
                        for record in table.records()
                    ]
                    json.dump(records, f, indent=2, allow_nan=False)
                    f.write("\n")
            paths.append(path)
    except OSError as e:
        raise ReportError(f"cannot write report to {out_dir}: {e}") from e

    logger.info(f"Wrote {len(paths)} {fmt} file(s) to {out_dir}")
    return paths


def _model_mean(result: SweepResult, i: int) -> Optional[float]:
    if not result.model or result.model[i] is None:
        return None
    return result.model[i].mean


def _model_std(result: SweepResult, i: int) -> Optional[float]:
    if not result.model or result.model[i] is None:
        return None
    return result.model[i].std


def sweep_table(result: SweepResult, name: str = "sweep") -> Table:
    """Per-exponent walk, model and baseline statistics of one sweep."""
    no_r = result.baselines[SamplingMode.NO_R.value].mean
    no_r_n = result.baselines[SamplingMode.NO_R_N.value].mean
    table = Table(
        name,
        [
            "beta", "brw_mean", "brw_std", "brw_stderr", "trials", "capped",
            "model_mean", "model_std", "no_r_mean", "no_r_n_mean",
        ],
    )
    for i, (beta, summary) in enumerate(zip(result.betas, result.brw)):
        table.rows.append([
            beta, summary.mean, summary.std, summary.stderr, summary.count,
            result.capped[i], _model_mean(result, i), _model_std(result, i), no_r, no_r_n,
        ])
    return table


def trials_table(result: SweepResult, name: str = "brw_trials") -> Optional[Table]:
    """Completed walk trials (beta, trial, start_node, T), or None if none were kept."""
    table = Table(name, ["beta", "trial", "start_node", "T"])
    for beta, rows in zip(result.betas, result.brw_rows):
        table.rows.extend([beta, *row] for row in rows)
    return table if table.rows else None


def sweep_summary_table(result: SweepResult, name: str = "sweep_summary") -> Table:
    """One-row summary of a sweep: graph identity, beta* and its interval."""
    meta = result.metadata
    return Table(
        name,
        [
            "graph_hash", "n", "m", "d_max", "alpha", "seed", "beta_star", "beta_min",
            "beta_max", "e_t_star", "model_beta_star", "model_e_t_star", "no_transient",
        ],
        [[
            meta.graph_hash, meta.n, meta.m, meta.d_max, meta.alpha, meta.seed,
            result.beta_star, result.beta_min, result.beta_max, result.e_t_star,
            result.model_beta_star, result.model_e_t_star, result.no_transient,
        ]],
    )


def rewiring_table(study: AlphaStudyResult, name: str = "rewiring") -> Table:
    """Target against achieved assortativity, before and after reconnection."""
    table = Table(
        name,
        ["alpha_t", "graph", "alpha_disconnected", "alpha_connected", "proposals", "converged"],
    )
    for cell in study.cells:
        r = cell.rewire
        table.rows.append([
            cell.alpha_t, cell.graph_index, r.achieved_pre_connect,
            r.achieved_post_connect, r.proposals, r.converged,
        ])
    return table


def beta_curves_table(study: AlphaStudyResult, name: str = "beta_curves") -> Table:
    """Mean and spread of the walk time per (target, exponent), averaged over graphs."""
    table = Table(
        name,
        ["alpha_t", "beta", "brw_mean", "brw_std", "model_mean", "no_r_mean", "no_r_n_mean"],
    )
    for row in study.rows:
        group = [c.sweep for c in study.cells if c.alpha_t == row.alpha_t]
        for i, beta in enumerate(group[0].betas):
            models = [_model_mean(s, i) for s in group]
            models = [m for m in models if m is not None]
            table.rows.append([
                row.alpha_t,
                beta,
                float(np.mean([s.brw[i].mean for s in group])),
                float(np.mean([s.brw[i].std for s in group])),
                float(np.mean(models)) if models else None,
                row.no_r_mean,
                row.no_r_n_mean,
            ])
    return table


def beta_star_table(study: AlphaStudyResult, name: str = "beta_star") -> Table:
    """Optimal exponent and near-optimal interval per target assortativity."""
    return Table(
        name,
        ["alpha_t", "beta_star", "beta_min", "beta_max", "model_beta_star", "achieved_alpha"],
        [
            [r.alpha_t, r.beta_star, r.beta_min, r.beta_max, r.model_beta_star, r.achieved_alpha]
            for r in study.rows
        ],
    )


def optimal_time_table(study: AlphaStudyResult, name: str = "optimal_time") -> Table:
    """Walk time at the optimal exponent against the sampling baselines."""
    return Table(
        name,
        [
            "alpha_t", "e_t_star", "model_e_t_star", "no_r_mean", "no_r_n_mean",
            "welch_p", "graphs", "graphs_brw_inferior", "unconverged",
        ],
        [
            [
                r.alpha_t, r.e_t_star, r.model_e_t_star, r.no_r_mean, r.no_r_n_mean,
                r.welch_p, r.graphs, r.graphs_brw_inferior, r.unconverged,
            ]
            for r in study.rows
        ],
    )


def trend_table(study: AlphaStudyResult, name: str = "beta_trend") -> Optional[Table]:
    """Spearman trend of beta* over the targets, if defined."""
    t = study.trend
    if t is None:
        return None
    return Table(
        name,
        ["rho", "p_value", "ci_low", "ci_high", "points"],
        [[t.rho, t.p_value, t.ci_low, t.ci_high, t.points]],
    )


def alpha_study_tables(study: AlphaStudyResult) -> List[Table]:
    """Every table of an assortativity study."""
    tables = [
        rewiring_table(study),
        beta_curves_table(study),
        beta_star_table(study),
        optimal_time_table(study),
    ]
    trend = trend_table(study)
    if trend is not None:
        tables.append(trend)
    return tables


def model_compare_table(rows: Sequence[ModelComparisonRow], name: str = "model_compare") -> Table:
    """Walk against reduced-model curves."""
    columns = list(ModelComparisonRow.model_fields)
    return Table(name, columns, [[getattr(r, c) for c in columns] for r in rows])


def matrix_table(
    name: str, matrix: np.ndarray, labels: Sequence[int], corner: str = "k\\l"
) -> Table:
    """Degree-labelled square matrix as a table."""
    table = Table(name, [corner, *(str(k) for k in labels)])
    for label, row in zip(labels, matrix):
        table.rows.append([int(label), *(v.item() for v in row)])
    return table


def chain_table(chain: AbsorbingChain, name: str = "chain") -> Table:
    """Canonical-form transition matrix, transient states first."""
    labels = [str(s) for s in chain.labels]
    table = Table(name, ["state", *labels])
    for label, row in zip(chain.labels, chain.full_matrix()):
        table.rows.append([label, *(v.item() for v in row)])
    return table


def absorption_table(stats: AbsorptionStats, name: str = "absorption") -> Table:
    """Per-state absorption-time mean and variance."""
    return Table(
        name,
        ["state", "mu", "var"],
        [
            [s, float(mu), float(var)]
            for s, mu, var in zip(stats.states, stats.mean, stats.variance)
        ],
    )
