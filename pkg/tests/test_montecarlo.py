import numpy as np
import pytest

from hdlp.dgp import Section3Design, VarDgpSpec, toeplitz_power_sigma
from hdlp.hac import HacConfig
from hdlp.lp import CONVENTIONAL_LP, DOUBLE_OGA, LpSpec
from hdlp.montecarlo import (
    McDesign,
    run_monte_carlo,
    section3_mc_design,
)
from hdlp.selection import OgaConfig


def small_design(n_horizons=3, lags=2):
    """Cheap three-variable experiment for harness tests."""
    B = (np.array([[0.5, 0.0, 0.0], [0.2, 0.3, 0.0], [0.0, 0.1, 0.4]]),)
    dgp = VarDgpSpec(n=3, K=1, B=B, sigma=toeplitz_power_sigma(3, 0.3),
                     burn_in=50)
    lp = LpSpec(
        response="y2", shock="y1", horizons=tuple(range(1, n_horizons + 1)),
        contemporaneous=("y2", "y3"), lagged=("y1", "y2", "y3"), lags=lags,
    )
    return McDesign(dgp=dgp, T=120, lp_spec=lp, response_index=1,
                    innovation_index=0, oga=OgaConfig(c_star=2.0),
                    hac=HacConfig())


class TestRunMonteCarlo:
    def test_single_rep_coverage_is_binary(self):
        report = run_monte_carlo(small_design(), methods=(DOUBLE_OGA,),
                                 n_reps=1, levels=(0.95,), seed=3)
        for h in report.horizons:
            assert report.coverage(DOUBLE_OGA, h, 0.95) in (0.0, 1.0)

    def test_parallelism_does_not_change_report(self):
        design = small_design()
        a = run_monte_carlo(design, methods=(DOUBLE_OGA, CONVENTIONAL_LP),
                            n_reps=6, levels=(0.95,), seed=11, parallelism=1)
        b = run_monte_carlo(design, methods=(DOUBLE_OGA, CONVENTIONAL_LP),
                            n_reps=6, levels=(0.95,), seed=11, parallelism=3)
        assert a.cells == b.cells
        assert a.truth == b.truth

    def test_resume_from_partial_records(self):
        design = small_design()
        full = run_monte_carlo(design, methods=(DOUBLE_OGA,), n_reps=8,
                               levels=(0.95,), seed=5)
        checkpoints = []
        run_monte_carlo(design, methods=(DOUBLE_OGA,), n_reps=8,
                        levels=(0.95,), seed=5, checkpoint_every=3,
                        checkpoint_writer=lambda recs: checkpoints.append(
                            [dict(r) for r in recs]))
        assert checkpoints and len(checkpoints[0]) == 3
        resumed = run_monte_carlo(design, methods=(DOUBLE_OGA,), n_reps=8,
                                  levels=(0.95,), seed=5,
                                  resume_records=checkpoints[0])
        assert resumed.cells == full.cells

    def test_coverage_monotone_in_level(self):
        report = run_monte_carlo(small_design(), methods=(DOUBLE_OGA,),
                                 n_reps=30, levels=(0.68, 0.95), seed=7)
        for h in report.horizons:
            assert report.coverage(DOUBLE_OGA, h, 0.95) >= report.coverage(
                DOUBLE_OGA, h, 0.68
            )

    def test_report_rows_layout(self):
        report = run_monte_carlo(small_design(n_horizons=5),
                                 methods=(DOUBLE_OGA, CONVENTIONAL_LP),
                                 n_reps=2, levels=(0.95,), seed=9)
        rows = report.rows()
        assert len(rows) == 2 * 5
        methods = [r[0] for r in rows]
        assert methods == [DOUBLE_OGA] * 5 + [CONVENTIONAL_LP] * 5
        assert all(r[5] == 2 for r in rows)

    def test_failures_counted_not_fatal(self):
        design = small_design()
        # horizon far beyond the sample: every rep errors at that horizon
        design.lp_spec = LpSpec(
            response="y2", shock="y1", horizons=(1, 110),
            contemporaneous=("y2", "y3"), lagged=("y1", "y2", "y3"), lags=2,
        )
        report = run_monte_carlo(design, methods=(DOUBLE_OGA,), n_reps=3,
                                 levels=(0.95,), seed=13)
        assert report.failures == 3
        assert np.isnan(report.coverage(DOUBLE_OGA, 110, 0.95))
        assert report.coverage(DOUBLE_OGA, 1, 0.95) in (0.0, 1/3, 2/3, 1.0)
        assert report.failure_fraction == pytest.approx(0.5)

    def test_section3_design_wiring(self):
        design = section3_mc_design(Section3Design.sparse(0.5),
                                    horizons=(1, 2))
        assert design.T == 300
        assert design.lp_spec.horizons == (1, 2)
        assert design.response_index == 1
        assert design.innovation_index == 0
        assert design.dgp.n == 10
