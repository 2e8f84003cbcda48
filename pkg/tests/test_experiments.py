"""
Tests for the experiment harness: sweeps, model comparison, studies, reports.
"""
import json
import math
import tempfile
import unittest
from pathlib import Path

from pydantic import ValidationError

from brwsearch.core.chain import absorption_stats
from brwsearch.core.errors import (
    DisconnectedGraphError,
    DomainError,
    ModelInfeasibleError,
    ReportError,
)
from brwsearch.core.graph import Graph, joint_degree_matrix
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
from brwsearch.experiments.sweep import (
    alpha_study,
    beta_star_interval,
    beta_trend,
    compare_model,
    sweep_beta,
)
from tests.helpers import lollipop, star, triangle


class TestExperimentPlan(unittest.TestCase):
    """Tests for ExperimentPlan."""

    def test_default_grid(self):
        """Test the grid built from beta_max and beta_step."""
        plan = ExperimentPlan(beta_max=1.0, beta_step=0.25)
        self.assertEqual(plan.beta_grid(), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_explicit_grid(self):
        """Test that explicit exponents are sorted and deduplicated."""
        plan = ExperimentPlan(betas=[2, 0, 1, 2])
        self.assertEqual(plan.beta_grid(), [0.0, 1.0, 2.0])

    def test_validation(self):
        """Test rejected plans."""
        with self.assertRaises(ValidationError):
            ExperimentPlan(alpha_targets=[])
        with self.assertRaises(ValidationError):
            ExperimentPlan(alpha_targets=[1.5])
        with self.assertRaises(ValidationError):
            ExperimentPlan(betas=[-1.0])
        with self.assertRaises(ValidationError):
            ExperimentPlan(p=None)

    def test_er_spec(self):
        """Test that lam takes precedence over p."""
        spec = ExperimentPlan(n=50, lam=2.0).er_spec(seed=3)
        self.assertEqual(spec.lam, 2.0)
        self.assertIsNone(spec.p)
        self.assertEqual(spec.seed, 3)


class TestBetaStarInterval(unittest.TestCase):
    """Tests for beta_star_interval."""

    def test_isolated_minimum(self):
        """Test a minimum without near-optimal neighbors."""
        self.assertEqual(
            beta_star_interval([0, 1, 2, 3, 4], [5.0, 3.0, 3.2, 2.9, 4.0]), (3.0, 3.0, 3.0)
        )

    def test_contiguous_run(self):
        """Test that the interval is the contiguous run within ten percent."""
        self.assertEqual(
            beta_star_interval([0, 1, 2, 3, 4], [5.0, 3.0, 3.1, 3.05, 4.0]), (1.0, 1.0, 3.0)
        )

    def test_ties_and_nan(self):
        """Test that ties go to the smallest exponent and NaN is skipped."""
        self.assertEqual(beta_star_interval([0, 1], [2.0, 2.0]), (0.0, 0.0, 1.0))
        self.assertEqual(beta_star_interval([0, 1, 2], [math.nan, 2.0, 2.1]), (1.0, 1.0, 2.0))

    def test_invalid(self):
        """Test that empty or all-NaN inputs are rejected."""
        with self.assertRaises(DomainError):
            beta_star_interval([], [])
        with self.assertRaises(DomainError):
            beta_star_interval([0, 1], [math.nan, math.nan])


class TestSweepBeta(unittest.TestCase):
    """Tests for sweep_beta."""

    def test_star(self):
        """Test a sweep where every exponent is optimal."""
        plan = ExperimentPlan(betas=[0, 1, 2], trials=50)
        result = sweep_beta(star(), plan)
        self.assertEqual([s.mean for s in result.brw], [1.0, 1.0, 1.0])
        self.assertEqual((result.beta_star, result.beta_min, result.beta_max), (0.0, 0.0, 2.0))
        self.assertTrue(result.model_feasible)
        for model in result.model:
            self.assertAlmostEqual(model.mean, 1.0)
        self.assertEqual(result.baselines["no-r-n"].mean, 1.0)
        self.assertEqual(result.metadata.d_max, 4)
        self.assertAlmostEqual(result.metadata.alpha, -1.0)
        self.assertFalse(result.flagged)

    def test_regular(self):
        """Test that a regular graph gives a degenerate sweep."""
        result = sweep_beta(triangle(), ExperimentPlan(betas=[0, 1], trials=10))
        self.assertTrue(result.no_transient)
        self.assertEqual(result.e_t_star, 0.0)
        self.assertIsNone(result.metadata.alpha)

    def test_disconnected(self):
        """Test that a disconnected graph is rejected."""
        with self.assertRaises(DisconnectedGraphError):
            sweep_beta(Graph(4, [(0, 1), (2, 3)]), ExperimentPlan(betas=[0], trials=5))

    def test_no_model(self):
        """Test that the model can be switched off."""
        result = sweep_beta(lollipop(), ExperimentPlan(betas=[0, 1], trials=20, model=False))
        self.assertIsNone(result.model)
        self.assertIsNone(result.model_beta_star)

    def test_thread_count_invariant(self):
        """Test that threads do not change the sweep."""
        plan = ExperimentPlan(betas=[0, 0.5, 1, 2], trials=300, seed=4)
        single = sweep_beta(lollipop(), plan)
        threaded = sweep_beta(lollipop(), plan.model_copy(update={"threads": 3}))
        self.assertEqual(single.brw_times, threaded.brw_times)
        self.assertEqual(single.beta_star, threaded.beta_star)

    def test_lollipop_model(self):
        """Test the model column against the exact lollipop values."""
        result = sweep_beta(lollipop(), ExperimentPlan(betas=[0, 1], trials=100))
        self.assertAlmostEqual(result.model[0].mean, 5 / 3)
        self.assertAlmostEqual(result.model[1].mean, 1 / 3 + (2 / 3) / 0.55)
        self.assertEqual(result.model_beta_star, 1.0)

    def test_tables(self):
        """Test the sweep tables."""
        result = sweep_beta(star(), ExperimentPlan(betas=[0, 1], trials=20))
        table = sweep_table(result)
        self.assertEqual(table.columns[0], "beta")
        self.assertEqual(len(table.rows), 2)
        self.assertAlmostEqual(table.records()[1]["model_mean"], 1.0)
        summary = sweep_summary_table(result)
        self.assertEqual(summary.records()[0]["beta_star"], 0.0)


class TestCompareModel(unittest.TestCase):
    """Tests for compare_model."""

    def test_lollipop(self):
        """Test comparison rows on the lollipop graph."""
        rows = compare_model(lollipop(), [1, 0], trials=3000, seed=2)
        self.assertEqual([r.beta for r in rows], [0.0, 1.0])
        self.assertAlmostEqual(rows[0].e_t_model, 5 / 3)
        self.assertAlmostEqual(rows[0].e_t_averaged, 5 / 3)
        self.assertAlmostEqual(rows[0].matrix_gap, 0.0, places=12)
        self.assertAlmostEqual(rows[1].e_t_averaged, 13 / 9)
        self.assertAlmostEqual(rows[1].matrix_gap, 0.05)
        self.assertLess(abs(rows[0].z_score), 4.0)
        table = model_compare_table(rows)
        self.assertEqual(table.columns[:3], ["beta", "e_t_empirical", "se_empirical"])

    def test_star_exact(self):
        """Test a zero-variance walk: no z-score, zero error."""
        rows = compare_model(star(), [0, 3], trials=20, seed=0)
        for row in rows:
            self.assertAlmostEqual(row.discrepancy, 0.0)
            self.assertAlmostEqual(row.relative_error, 0.0)
            self.assertIsNone(row.z_score)

    def test_budget(self):
        """Test that an infeasible model is reported up front."""
        with self.assertRaises(ModelInfeasibleError):
            compare_model(lollipop(), [0], trials=10, seed=0, budget=1)


class TestBetaTrend(unittest.TestCase):
    """Tests for beta_trend."""

    def test_monotone(self):
        """Test a perfectly monotone trend."""
        trend = beta_trend([-0.3, 0.0, 0.3, 0.5], [1.0, 2.0, 3.0, 4.0])
        self.assertAlmostEqual(trend.rho, 1.0)
        self.assertIsNone(trend.ci_low)

    def test_interval(self):
        """Test the Fisher-z interval around an imperfect correlation."""
        trend = beta_trend([-0.3, -0.1, 0.1, 0.3, 0.5], [1.0, 3.0, 2.0, 4.0, 5.0])
        self.assertAlmostEqual(trend.rho, 0.9)
        self.assertLess(trend.ci_low, trend.rho)
        self.assertGreater(trend.ci_high, trend.rho)
        self.assertEqual(trend.points, 5)

    def test_undefined(self):
        """Test that short or constant series give no trend."""
        self.assertIsNone(beta_trend([0.0, 0.1], [1.0, 2.0]))
        self.assertIsNone(beta_trend([0.0, 0.1, 0.2], [1.0, 1.0, 1.0]))


class TestEmitReport(unittest.TestCase):
    """Tests for emit_report."""

    def setUp(self):
        """Set up a scratch directory."""
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)

    def tearDown(self):
        """Remove the scratch directory."""
        self._tmp.cleanup()

    def _table(self):
        return Table("demo", ["beta", "mean", "flag", "note"], [[0.5, math.nan, True, None]])

    def test_csv(self):
        """Test the CSV layout."""
        (path,) = emit_report([self._table()], self.out, "csv")
        self.assertEqual(path.name, "demo.csv")
        self.assertEqual(path.read_text(), "beta,mean,flag,note\n0.5,nan,true,\n")

    def test_json(self):
        """Test that non-finite values become null."""
        (path,) = emit_report([self._table()], self.out, "json")
        records = json.loads(path.read_text())
        self.assertEqual(records, [{"beta": 0.5, "mean": None, "flag": True, "note": None}])

    def test_deterministic(self):
        """Test that equal tables give byte-identical files."""
        first = emit_report([self._table()], self.out / "a", "json")[0].read_bytes()
        second = emit_report([self._table()], self.out / "b", "json")[0].read_bytes()
        self.assertEqual(first, second)

    def test_errors(self):
        """Test rejected reports."""
        with self.assertRaises(ReportError):
            emit_report([], self.out)
        with self.assertRaises(ReportError):
            emit_report([Table("empty", ["a"])], self.out)
        with self.assertRaises(ReportError):
            emit_report([self._table()], self.out, "xml")


class TestDumpTables(unittest.TestCase):
    """Tests for the per-trial, matrix and chain dump tables."""

    def test_trials(self):
        """Test that kept trials give one row per completed walk."""
        plan = ExperimentPlan(betas=[0, 1], trials=10, keep_trials=True)
        table = trials_table(sweep_beta(star(), plan))
        self.assertEqual(table.columns, ["beta", "trial", "start_node", "T"])
        self.assertEqual(len(table.rows), 20)
        self.assertEqual({r[0] for r in table.rows}, {0.0, 1.0})
        self.assertEqual([r[1] for r in table.rows[:10]], list(range(10)))
        for row in table.rows:
            self.assertIn(row[2], (1, 2, 3, 4))
            self.assertEqual(row[3], 1)

    def test_trials_not_kept(self):
        """Test that sweeps without kept trials have no trial table."""
        result = sweep_beta(star(), ExperimentPlan(betas=[0], trials=5))
        self.assertEqual(result.brw_rows, [])
        self.assertIsNone(trials_table(result))

    def test_matrix(self):
        """Test the degree-labelled joint matrix table."""
        joint = joint_degree_matrix(lollipop())
        table = matrix_table("joint_degree", joint.matrix, joint.degree_set)
        self.assertEqual(table.columns, ["k\\l", "1", "2", "3"])
        self.assertEqual(table.rows[0], [1, 0, 0, 1])
        self.assertEqual(table.rows[2], [3, 1, 2, 0])

    def test_chain(self):
        """Test the node chain dump of the lollipop walk."""
        table = chain_table(build_full_chain(lollipop(), 0.0), "walk_chain")
        self.assertEqual(table.columns, ["state", "0", "1", "3", "2"])
        self.assertEqual([r[0] for r in table.rows], [0, 1, 3, 2])
        self.assertEqual(table.rows[0][1:], [0.0, 0.5, 0.0, 0.5])
        self.assertEqual(table.rows[2][1:], [0.0, 0.0, 0.0, 1.0])
        self.assertEqual(table.rows[3][1:], [0.0, 0.0, 0.0, 1.0])
        for row in table.rows:
            self.assertAlmostEqual(sum(row[1:]), 1.0)

    def test_absorption(self):
        """Test the absorption moments of the lollipop walk."""
        stats = absorption_stats(build_full_chain(lollipop(), 0.0))
        table = absorption_table(stats, "walk_absorption")
        self.assertEqual(table.columns, ["state", "mu", "var"])
        self.assertEqual([r[0] for r in table.rows], [0, 1, 3])
        for row, (mu, var) in zip(table.rows, [(2.0, 2.0), (2.0, 2.0), (1.0, 0.0)]):
            self.assertAlmostEqual(row[1], mu)
            self.assertAlmostEqual(row[2], var)

    def test_csv_file(self):
        """Test that a chain dump writes through emit_report."""
        with tempfile.TemporaryDirectory() as tmp:
            table = chain_table(build_full_chain(lollipop(), 0.0), "walk_chain")
            (path,) = emit_report([table], Path(tmp))
            lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "state,0,1,3,2")
        self.assertEqual(lines[1], "0,0.0,0.5,0.0,0.5")


class TestAlphaStudy(unittest.TestCase):
    """Tests for alpha_study on a tiny plan."""

    @classmethod
    def setUpClass(cls):
        """Run the study once for all tests."""
        cls.plan = ExperimentPlan(
            alpha_targets=[-0.2, 0.0, 0.2],
            graphs_per_target=2,
            n=60,
            p=0.08,
            betas=[0, 1, 2],
            trials=30,
            eps=0.02,
            max_proposals=20000,
            model=False,
            seed=11,
        )
        cls.result = alpha_study(cls.plan)

    def test_shape(self):
        """Test one row per target and one cell per graph."""
        self.assertEqual([r.alpha_t for r in self.result.rows], [-0.2, 0.0, 0.2])
        self.assertEqual(len(self.result.cells), 6)
        self.assertEqual([c.graph_index for c in self.result.cells[:2]], [0, 1])
        for row in self.result.rows:
            self.assertEqual(row.graphs, 2)
            self.assertTrue(0.0 <= row.beta_star <= 2.0)

    def test_cells_connected(self):
        """Test that every swept graph was connected and close to its target."""
        for cell in self.result.cells:
            self.assertFalse(cell.sweep.no_transient)
            if cell.rewire.converged:
                self.assertLessEqual(abs(cell.rewire.achieved_pre_connect - cell.alpha_t), 0.02)

    def test_thread_count_invariant(self):
        """Test that threads do not change the study."""
        threaded = alpha_study(self.plan.model_copy(update={"threads": 3}))
        self.assertEqual(
            [c.sweep.brw_times for c in threaded.cells],
            [c.sweep.brw_times for c in self.result.cells],
        )
        self.assertEqual(threaded.rows, self.result.rows)

    def test_tables(self):
        """Test the study tables."""
        tables = alpha_study_tables(self.result)
        self.assertEqual(
            [t.name for t in tables[:4]], ["rewiring", "beta_curves", "beta_star", "optimal_time"]
        )
        self.assertEqual(len(tables[0].rows), 6)
        self.assertEqual(len(tables[1].rows), 9)
