"""
Plan and result models of the experiment harness.
"""
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from brwsearch.config import (
    DEFAULT_OUT_DIR,
    DEFAULT_SEED,
    DEFAULT_STEP_CAP,
    DEFAULT_THREADS,
    ENUMERATION_BUDGET,
    EXPERIMENT_CONFIG,
    REWIRE_CONFIG,
)
from brwsearch.core.generators import ErSpec
from brwsearch.core.reduced import ModelResult
from brwsearch.core.rewire import RewireReport
from brwsearch.core.walker import TrialSummary


class ExperimentPlan(BaseModel):
    """Everything a sweep or an assortativity study needs to run."""

    alpha_targets: List[float] = Field(
        default_factory=lambda: list(EXPERIMENT_CONFIG["alpha_targets"])
    )
    graphs_per_target: int = Field(EXPERIMENT_CONFIG["graphs_per_target"], ge=1)
    n: int = Field(EXPERIMENT_CONFIG["n"], ge=2)
    p: Optional[float] = Field(EXPERIMENT_CONFIG["p"], ge=0.0, le=1.0)
    lam: Optional[float] = Field(None, gt=0.0)
    giant_only: bool = True
    beta_max: float = Field(EXPERIMENT_CONFIG["beta_max"], ge=0.0)
    beta_step: float = Field(EXPERIMENT_CONFIG["beta_step"], gt=0.0)
    # Explicit grid; overrides beta_max/beta_step.
    betas: Optional[List[float]] = None
    trials: int = Field(EXPERIMENT_CONFIG["trials"], ge=1)
    step_cap: int = Field(DEFAULT_STEP_CAP, ge=1)
    start_mode: Literal["transient", "all"] = "transient"
    seed: int = Field(DEFAULT_SEED, ge=0)
    out_dir: Path = DEFAULT_OUT_DIR
    threads: int = Field(DEFAULT_THREADS, ge=1)
    model: bool = True
    model_budget: int = Field(ENUMERATION_BUDGET, ge=1)
    # Keep per-trial rows in sweeps; off for studies, which run many sweeps.
    keep_trials: bool = False
    eps: float = Field(REWIRE_CONFIG["eps"], gt=0.0)
    max_proposals: int = Field(REWIRE_CONFIG["max_proposals"], ge=0)
    rewire_mode: Literal["best", "single"] = REWIRE_CONFIG["mode"]

    @field_validator("alpha_targets")
    @classmethod
    def _check_targets(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one target assortativity is required")
        bad = [a for a in value if not -1.0 <= a <= 1.0]
        if bad:
            raise ValueError(f"target assortativity outside [-1, 1]: {bad}")
        return value

    @field_validator("betas")
    @classmethod
    def _check_betas(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and any(b < 0 for b in value):
            raise ValueError("bias exponents must be nonnegative")
        return value

    @model_validator(mode="after")
    def _check_density(self) -> "ExperimentPlan":
        if self.p is None and self.lam is None:
            raise ValueError("give p or lam")
        return self

    def beta_grid(self) -> List[float]:
        """Sorted grid of bias exponents."""
        if self.betas is not None:
            return sorted(set(float(b) for b in self.betas))
        count = int(math.floor(self.beta_max / self.beta_step + 1e-9))
        return [float(b) for b in np.round(np.arange(count + 1) * self.beta_step, 12)]

    def er_spec(self, seed: int) -> ErSpec:
        """Graph parameters for one generated instance; lam wins over p."""
        if self.lam is not None:
            return ErSpec(n=self.n, lam=self.lam, seed=seed)
        return ErSpec(n=self.n, p=self.p, seed=seed)


class GraphMetadata(BaseModel):
    """Identity of the graph a sweep ran on."""

    graph_hash: str
    n: int
    m: int
    d_max: int
    alpha: Optional[float] = None
    seed: int


class SweepResult(BaseModel):
    """Bias sweep of one graph: walk, model and sampling baselines."""

    betas: List[float]
    brw: List[TrialSummary]
    brw_times: List[List[int]]
    # Completed trials per exponent as (trial, start_node, T).
    brw_rows: List[List[Tuple[int, int, int]]] = Field(default_factory=list)
    capped: List[int]
    model: Optional[List[Optional[ModelResult]]] = None
    model_feasible: bool = False
    baselines: Dict[str, TrialSummary]
    baseline_times: Dict[str, List[int]]
    beta_star: float
    beta_min: float
    beta_max: float
    model_beta_star: Optional[float] = None
    model_e_t_star: Optional[float] = None
    metadata: GraphMetadata
    no_transient: bool = False

    @property
    def star_index(self) -> int:
        """Grid position of beta*."""
        return self.betas.index(self.beta_star)

    @property
    def e_t_star(self) -> float:
        """Walk mean at beta*."""
        return self.brw[self.star_index].mean

    @property
    def flagged(self) -> bool:
        """Whether some trials hit the step cap."""
        return any(self.capped)


class GraphCell(BaseModel):
    """One generated, rewired and swept graph of an assortativity study."""

    alpha_t: float
    graph_index: int
    seed: int
    rewire: RewireReport
    sweep: SweepResult


class TrendSummary(BaseModel):
    """Rank correlation of beta* with the target assortativity."""

    rho: float
    p_value: float
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    points: int


class AlphaStudyRow(BaseModel):
    """Per-target aggregate over graph instances."""

    alpha_t: float
    achieved_alpha: float
    beta_star: float
    beta_min: float
    beta_max: float
    e_t_star: float
    no_r_mean: float
    no_r_n_mean: float
    model_beta_star: Optional[float] = None
    model_e_t_star: Optional[float] = None
    welch_p: Optional[float] = None
    graphs: int
    graphs_brw_inferior: int
    unconverged: int


class AlphaStudyResult(BaseModel):
    """Outcome of alpha_study."""

    rows: List[AlphaStudyRow]
    cells: List[GraphCell]
    trend: Optional[TrendSummary] = None

    @property
    def flagged(self) -> bool:
        """Whether some rewiring did not converge or some trials were capped."""
        return any(not c.rewire.converged or c.sweep.flagged for c in self.cells)


class ModelComparisonRow(BaseModel):
    """Walk estimate against the reduced model at one bias exponent."""

    beta: float
    e_t_empirical: float
    se_empirical: float
    e_t_model: float
    std_model: float
    e_t_averaged: Optional[float] = None
    discrepancy: float
    relative_error: float
    z_score: Optional[float] = None
    matrix_gap: Optional[float] = None
