import math
import os

import numpy as np
import pytest

from entcap.bounds import ew_bound
from entcap.capability import (
    CapabilityEstimate,
    EstimateConfig,
    InsufficientDataError,
    NoThresholdError,
    SweepRow,
    bound_value_for,
    clopper_pearson_interval,
    estimate,
    fit_decay_slope,
    sweep,
    threshold_kth,
    wilson_interval,
)
from entcap.criteria import CriterionSpec, Witness, ppt_witness
from entcap.quantum import HermitianObservable, InvalidInputError, PureStateVector
from entcap.sampling import SeedSpec

BELL = PureStateVector(4, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))


def _with_workers(n, fn):
    old = os.environ.get("ENTCAP_WORKERS")
    os.environ["ENTCAP_WORKERS"] = str(n)
    try:
        return fn()
    finally:
        if old is None:
            del os.environ["ENTCAP_WORKERS"]
        else:
            os.environ["ENTCAP_WORKERS"] = old


def synthetic_row(k, p_hat, n_detected=1000, n_samples=100_000, error=""):
    return SweepRow(
        experiment_id="synthetic",
        criterion="ppt",
        d_a=2,
        d_b=2,
        k=k,
        n_samples=n_samples,
        n_detected=n_detected,
        p_hat=p_hat,
        ci_low=p_hat,
        ci_high=p_hat,
        master_seed=0,
        bound_value=None,
        wall_time_s=0.0,
        error=error,
    )


class TestIntervals:
    def test_wilson_brackets_p_hat(self):
        for x, n in [(0, 100), (1, 100), (50, 100), (99, 100), (100, 100)]:
            lo, hi = wilson_interval(x, n, 0.95)
            assert 0.0 <= lo <= x / n <= hi <= 1.0

    def test_clopper_pearson_brackets_p_hat(self):
        for x, n in [(0, 100), (1, 100), (50, 100), (100, 100)]:
            lo, hi = clopper_pearson_interval(x, n, 0.95)
            assert 0.0 <= lo <= x / n <= hi <= 1.0

    def test_clopper_pearson_conservative_at_small_counts(self):
        wl, wh = wilson_interval(2, 10_000, 0.95)
        cl, ch = clopper_pearson_interval(2, 10_000, 0.95)
        assert ch - cl >= wh - wl
        assert cl <= wl


class TestEstimate:
    def test_two_qubit_pure_states_almost_surely_detected(self):
        cfg = EstimateConfig(CriterionSpec("ppt"), 2, 2, 1, 10_000, master_seed=101)
        est = estimate(cfg)
        assert est.p_hat >= 0.999

    def test_positive_witness_never_detects(self):
        w = Witness(HermitianObservable(4, np.eye(4) / 2.0), "custom")
        cfg = EstimateConfig(
            CriterionSpec("ew_fixed", witness=w), 2, 2, 3, 1000, master_seed=102
        )
        est = estimate(cfg)
        assert est.n_detected == 0
        assert est.ci_low == 0.0

    def test_deterministic_across_worker_counts(self):
        cfg = EstimateConfig(CriterionSpec("ppt"), 2, 2, 3, 10_000, master_seed=103)
        counts = {
            n: _with_workers(n, lambda: estimate(cfg).n_detected) for n in (1, 2, 8)
        }
        assert len(set(counts.values())) == 1

    def test_reproducible(self):
        cfg = EstimateConfig(CriterionSpec("purity"), 2, 2, 2, 2000, master_seed=104)
        a, b = estimate(cfg), estimate(cfg)
        assert (a.n_detected, a.p_hat) == (b.n_detected, b.p_hat)

    def test_config_validation(self):
        with pytest.raises(InvalidInputError):
            EstimateConfig(CriterionSpec("ppt"), 2, 2, 1, 50, master_seed=0)
        with pytest.raises(InvalidInputError):
            EstimateConfig(CriterionSpec("ppt"), 2, 2, 0, 1000, master_seed=0)
        with pytest.raises(InvalidInputError):
            EstimateConfig(CriterionSpec("ppt"), 2, 2, 1, 1000, master_seed=0, ci_level=1.5)

    def test_per_experiment_fisher_schedule_reproducible(self):
        spec = CriterionSpec("fisher", n_pairs=2, fisher_schedule="per_experiment")
        cfg = EstimateConfig(spec, 2, 2, 2, 1000, master_seed=105)
        assert estimate(cfg).n_detected == estimate(cfg).n_detected


class TestBoundAttachment:
    def test_ew_selector_on_rerandomized_ppt(self):
        cfg = EstimateConfig(CriterionSpec("ew_ppt"), 2, 2, 7, 1000, master_seed=106)
        assert bound_value_for(cfg, "ew") == pytest.approx(ew_bound(1.0, 7).value)

    def test_ew_selector_on_faithful(self):
        cfg = EstimateConfig(CriterionSpec("ew_faithful"), 3, 3, 5, 1000, master_seed=107)
        alpha = math.sqrt((9 - 3) / 2.0)
        assert bound_value_for(cfg, "ew") == pytest.approx(ew_bound(alpha, 5).value)

    def test_spectrum_selector_tighter_than_ew(self):
        spec = CriterionSpec("ew_fixed", witness=ppt_witness(BELL, (2, 2)))
        cfg = EstimateConfig(spec, 2, 2, 9, 1000, master_seed=108)
        assert bound_value_for(cfg, "spectrum") <= bound_value_for(cfg, "ew") + 1e-12

    def test_ew_selector_rejects_nonlinear_criterion(self):
        cfg = EstimateConfig(CriterionSpec("purity"), 2, 2, 2, 1000, master_seed=109)
        with pytest.raises(InvalidInputError):
            bound_value_for(cfg, "ew")


class TestSweep:
    def test_single_point_matches_estimate(self):
        cfg = EstimateConfig(CriterionSpec("ppt"), 2, 2, 2, 1000, master_seed=110)
        rows = sweep([cfg], experiment_id="one")
        est = estimate(cfg)
        assert len(rows) == 1
        row = rows[0]
        assert (row.n_detected, row.p_hat) == (est.n_detected, est.p_hat)
        assert row.experiment_id == "one"
        assert row.error == ""

    def test_rows_in_grid_order(self):
        grid = [
            EstimateConfig(CriterionSpec("ppt"), 2, 2, k, 500, master_seed=111)
            for k in (3, 1, 2)
        ]
        rows = sweep(grid)
        assert [r.k for r in rows] == [3, 1, 2]

    def test_per_point_errors_do_not_abort(self):
        good = EstimateConfig(CriterionSpec("ppt"), 2, 2, 1, 500, master_seed=112)
        bad = EstimateConfig(CriterionSpec("ew_faithful"), 2, 3, 1, 500, master_seed=112)
        rows = sweep([good, bad, good])
        assert [bool(r.error) for r in rows] == [False, True, False]
        assert math.isnan(rows[1].p_hat)

    def test_empty_grid_rejected(self):
        with pytest.raises(InvalidInputError):
            sweep([])


class TestFitDecaySlope:
    def test_exact_exponential(self):
        rows = [synthetic_row(k, math.exp(-0.2 * k)) for k in range(1, 15)]
        fit = fit_decay_slope(rows, k_min=1)
        assert fit.slope == pytest.approx(-0.2, abs=1e-9)
        assert fit.r2 == pytest.approx(1.0, abs=1e-9)

    def test_excludes_sparse_rows(self):
        rows = [synthetic_row(k, math.exp(-0.2 * k)) for k in range(1, 10)]
        rows.append(synthetic_row(30, 1e-9, n_detected=3))  # excluded outlier
        fit = fit_decay_slope(rows, k_min=1)
        assert fit.slope == pytest.approx(-0.2, abs=1e-9)

    def test_respects_k_min(self):
        rows = [synthetic_row(k, 0.5 if k < 5 else math.exp(-0.3 * k)) for k in range(1, 20)]
        fit = fit_decay_slope(rows, k_min=5)
        assert fit.slope == pytest.approx(-0.3, abs=1e-9)

    def test_insufficient_rows(self):
        rows = [synthetic_row(k, 0.5) for k in (1, 2)]
        with pytest.raises(InsufficientDataError):
            fit_decay_slope(rows, k_min=1)


class TestThreshold:
    def test_plateau_then_step(self):
        rows = [synthetic_row(k, 0.8 if k < 7 else 0.1) for k in range(1, 12)]
        res = threshold_kth(rows)
        assert 6.0 < res.k_th <= 7.0
        assert res.k_th == pytest.approx(6 + 0.4 / 0.7, abs=1e-9)
        assert res.plateau == pytest.approx(0.8)

    def test_no_crossing(self):
        rows = [synthetic_row(k, 0.8) for k in range(1, 10)]
        with pytest.raises(NoThresholdError):
            threshold_kth(rows)

    def test_too_few_rows(self):
        with pytest.raises(NoThresholdError):
            threshold_kth([synthetic_row(1, 0.5), synthetic_row(2, 0.4)])


class TestTwoCopyObservableIdentity:
    def test_purity_statistic_equals_swap_expectation(self):
        # tr(rho^2) - tr(rho_A^2) measured as one two-copy observable
        from entcap.criteria import detect
        from entcap.quantum import (
            PAIRING_MARGINAL_A,
            PAIRING_PURITY,
            multicopy_swap_expectation,
        )
        from entcap.sampling import induced_state

        for i in range(100):
            rho = induced_state(2, 2, 2, SeedSpec(120, i))
            stat = detect(CriterionSpec("purity"), rho, SeedSpec(0)).statistic
            swap_value = multicopy_swap_expectation(
                rho, *PAIRING_PURITY
            ) - multicopy_swap_expectation(rho, *PAIRING_MARGINAL_A)
            assert abs(stat - swap_value) <= 1e-10


@pytest.mark.xfail(
    strict=True,
    reason="fixed Bell-type and re-randomized witnesses are not statistically "
    "identical: the random witness's partial-transpose spectrum varies with its "
    "Schmidt coefficients, and the averaged capability sits well below the "
    "Bell-type value (measured ~0.0098 vs ~0.0031 at d=4, k=5, N=1e5)",
)
def test_fixed_vs_rerandomized_equivalence():
    fixed = EstimateConfig(
        CriterionSpec("ew_fixed", witness=ppt_witness(BELL, (2, 2))),
        2, 2, 5, 100_000, master_seed=130,
    )
    rerand = EstimateConfig(CriterionSpec("ew_ppt"), 2, 2, 5, 100_000, master_seed=131)
    est_f, est_r = estimate(fixed), estimate(rerand)
    lo_f, hi_f = wilson_interval(est_f.n_detected, est_f.n_samples, 0.99)
    lo_r, hi_r = wilson_interval(est_r.n_detected, est_r.n_samples, 0.99)
    assert lo_f <= hi_r and lo_r <= hi_f  # overlapping 99% intervals


class TestEstimateResultShape:
    def test_fields_consistent(self):
        cfg = EstimateConfig(CriterionSpec("ppt"), 2, 2, 2, 1000, master_seed=113)
        est = estimate(cfg)
        assert isinstance(est, CapabilityEstimate)
        assert est.p_hat == est.n_detected / est.n_samples
        assert 0.0 <= est.ci_low <= est.p_hat <= est.ci_high <= 1.0
        assert est.seed == 113
        assert est.wall_time_s > 0.0
        assert est.bound_value is None
