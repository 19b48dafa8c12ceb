import numpy as np
import pytest

from hdlp.errors import InsufficientSample, UnknownColumn
from hdlp.hac import HacConfig
from hdlp.lp import (
    CONVENTIONAL_LP,
    DOUBLE_OGA,
    LpSpec,
    TimeSeriesMatrix,
    build_lp_dataset,
    conventional_lp,
    double_oga_lp,
    estimate_irf,
)
from hdlp.linalg import project_out
from hdlp.selection import OgaConfig

FULL_SELECTION = OgaConfig(c_star=1e-12, mbar_scale=1e9)


def make_data(rng, T, n, names=None):
    names = names or tuple(f"y{i + 1}" for i in range(n))
    return TimeSeriesMatrix(values=rng.standard_normal((T, n)), columns=names)


def ar1_series(rng, T, rho):
    y = np.zeros(T)
    e = rng.standard_normal(T)
    for t in range(1, T):
        y[t] = rho * y[t - 1] + e[t]
    return y


class TestBuildLpDataset:
    def test_effective_sample_counting(self):
        rng = np.random.default_rng(0)
        data = make_data(rng, 10, 1, names=("y",))
        spec = LpSpec(
            response="y", shock="y", horizons=(1,), lagged=("y",), lags=1
        )
        ds = build_lp_dataset(data, spec, 1)
        assert ds.effective_T == 8
        # one lag column plus the intercept
        assert ds.W.shape == (8, 2)
        assert ds.column_map == (("y", 1), ("const", 0))
        assert ds.intercept_index == 1

    def test_lag_depth_with_augmentation(self):
        rng = np.random.default_rng(1)
        data = make_data(rng, 60, 2)
        spec = LpSpec(
            response="y1", shock="y2", horizons=(1,),
            lagged=("y1", "y2"), lags=12, lag_augment=9,
        )
        ds = build_lp_dataset(data, spec, 1)
        depths = {lag for _, lag in ds.column_map if lag > 0}
        assert max(depths) == 21
        assert ds.effective_T == 60 - 1 - 21

    def test_alignment(self):
        rng = np.random.default_rng(2)
        data = make_data(rng, 30, 2)
        spec = LpSpec(
            response="y1", shock="y2", horizons=(2,),
            contemporaneous=("y1",), lagged=("y1", "y2"), lags=3,
        )
        ds = build_lp_dataset(data, spec, 2)
        t = 3  # first usable row
        assert ds.y[0] == data.values[t + 2, 0]
        assert ds.x[0] == data.values[t, 1]
        assert ds.W[0, 0] == data.values[t, 0]  # contemporaneous y1
        # first lag block starts after contemporaneous columns
        assert ds.W[0, 1] == data.values[t - 1, 0]
        assert ds.W[0, 2] == data.values[t - 1, 1]

    def test_shift_determinism(self):
        rng = np.random.default_rng(3)
        data = make_data(rng, 40, 2)
        shifted = TimeSeriesMatrix(values=data.values[1:], columns=data.columns)
        spec = LpSpec(
            response="y1", shock="y2", horizons=(1,), lagged=("y1", "y2"), lags=2
        )
        full = build_lp_dataset(data, spec, 1)
        part = build_lp_dataset(shifted, spec, 1)
        assert np.array_equal(full.W[1:], part.W)
        assert np.array_equal(full.y[1:], part.y)

    def test_insufficient_sample(self):
        rng = np.random.default_rng(4)
        data = make_data(rng, 12, 1, names=("y",))
        spec = LpSpec(response="y", shock="y", horizons=(3,), lagged=("y",), lags=2)
        with pytest.raises(InsufficientSample):
            build_lp_dataset(data, spec, 3)

    def test_unknown_column(self):
        rng = np.random.default_rng(5)
        data = make_data(rng, 20, 1, names=("y",))
        spec = LpSpec(response="z", shock="y", horizons=(1,), lagged=("y",), lags=1)
        with pytest.raises(UnknownColumn):
            build_lp_dataset(data, spec, 1)


class TestDoubleOgaLp:
    def test_full_union_equals_one_shot_ols(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            data = make_data(rng, 80, 3)
            spec = LpSpec(
                response="y1", shock="y2", horizons=(1,),
                contemporaneous=("y3",), lagged=("y1",), lags=1,
            )
            ds = build_lp_dataset(data, spec, 1)
            est = double_oga_lp(ds, FULL_SELECTION, HacConfig(), levels=(0.95,))
            assert est.union == ds.candidate_indices
            X = np.column_stack([ds.x, ds.W])
            beta_ols = np.linalg.lstsq(X, ds.y, rcond=None)[0][0]
            assert est.beta == pytest.approx(beta_ols, abs=1e-9)

    def test_known_coefficient_recovered(self):
        rng = np.random.default_rng(7)
        T = 500
        x = rng.standard_normal(T + 1)
        W_noise = rng.standard_normal((T + 1, 4))
        y = np.zeros(T + 1)
        y[1:] = 0.7 * x[:-1] + 0.3 * rng.standard_normal(T)
        data = TimeSeriesMatrix(
            values=np.column_stack([y, x, W_noise]),
            columns=("y", "x", "w1", "w2", "w3", "w4"),
        )
        spec = LpSpec(
            response="y", shock="x", horizons=(1,),
            contemporaneous=("w1", "w2", "w3", "w4"), lagged=("y", "x"), lags=1,
        )
        ds = build_lp_dataset(data, spec, 1)
        est = double_oga_lp(ds, OgaConfig(c_star=2.0), HacConfig())
        assert abs(est.beta - 0.7) < 4 * est.se

    def test_irrelevant_noise_controls_coverage(self):
        # y driven by lagged x alone; noise controls should rarely matter
        rng = np.random.default_rng(8)
        hits, sizes = 0, []
        n_reps = 200
        for _ in range(n_reps):
            T = 150
            x = rng.standard_normal(T + 1)
            W_noise = rng.standard_normal((T + 1, 5))
            y = np.zeros(T + 1)
            y[1:] = 0.8 * x[:-1] + 0.5 * rng.standard_normal(T)
            data = TimeSeriesMatrix(
                values=np.column_stack([y, x, W_noise]),
                columns=("y", "x", "w1", "w2", "w3", "w4", "w5"),
            )
            spec = LpSpec(
                response="y", shock="x", horizons=(1,),
                contemporaneous=("w1", "w2", "w3", "w4", "w5"),
                lagged=("y",), lags=1,
            )
            ds = build_lp_dataset(data, spec, 1)
            est = double_oga_lp(ds, OgaConfig(c_star=2.0), HacConfig())
            lo, hi = est.cis[0.95]
            hits += lo <= 0.8 <= hi
            sizes.append(len(est.union))
        assert hits / n_reps >= 0.90
        assert np.median(sizes) <= 3

    def test_frisch_waugh_identity(self):
        rng = np.random.default_rng(9)
        data = make_data(rng, 100, 4)
        spec = LpSpec(
            response="y1", shock="y2", horizons=(1,),
            contemporaneous=("y3", "y4"), lagged=("y1", "y2"), lags=2,
        )
        ds = build_lp_dataset(data, spec, 1)
        est = double_oga_lp(ds, OgaConfig(c_star=2.0), HacConfig())
        keep = list(est.union)
        if ds.intercept_index is not None:
            keep.append(ds.intercept_index)
        controls = ds.W[:, keep]
        y_t = project_out(controls, ds.y)
        x_t = project_out(controls, ds.x)
        beta_fw = float(x_t @ y_t) / float(x_t @ x_t)
        assert est.beta == pytest.approx(beta_fw, abs=1e-8)

    def test_ci_nesting(self):
        rng = np.random.default_rng(10)
        data = make_data(rng, 90, 3)
        spec = LpSpec(
            response="y1", shock="y2", horizons=(1,), lagged=("y1", "y2", "y3"),
            lags=2,
        )
        ds = build_lp_dataset(data, spec, 1)
        est = double_oga_lp(ds, OgaConfig(c_star=2.0), HacConfig(),
                            levels=(0.68, 0.90, 0.95))
        lo68, hi68 = est.cis[0.68]
        lo90, hi90 = est.cis[0.90]
        lo95, hi95 = est.cis[0.95]
        assert lo95 <= lo90 <= lo68 <= hi68 <= hi90 <= hi95
        assert lo95 <= est.beta <= hi95

    def test_psi_source_switch(self):
        rng = np.random.default_rng(11)
        data = make_data(rng, 120, 3)
        spec = LpSpec(
            response="y1", shock="y2", horizons=(1,), lagged=("y1", "y2", "y3"),
            lags=2,
        )
        ds = build_lp_dataset(data, spec, 1)
        final = double_oga_lp(ds, OgaConfig(c_star=2.0), HacConfig())
        first = double_oga_lp(
            ds, OgaConfig(c_star=2.0), HacConfig(psi_source="first_stage_e")
        )
        assert final.beta == pytest.approx(first.beta)
        assert final.se != first.se  # different psi series


class TestConventionalLp:
    def test_matches_textbook_implementation(self):
        # independent reimplementation: plain formulas, no shared helpers
        rng = np.random.default_rng(12)
        data = make_data(rng, 120, 3)
        spec = LpSpec(
            response="y1", shock="y2", horizons=(2,), lagged=("y1", "y2", "y3"),
            lags=2,
        )
        ds = build_lp_dataset(data, spec, 2)
        est = conventional_lp(ds, HacConfig(bandwidth=4, dof_correction=False))

        X = np.column_stack([ds.x, ds.W])
        beta_all = np.linalg.solve(X.T @ X, X.T @ ds.y)
        u = ds.y - X @ beta_all
        G = ds.W
        gamma = np.linalg.solve(G.T @ G, G.T @ ds.x)
        v = ds.x - G @ gamma
        T = ds.effective_T
        tau_sq = float(v @ v) / T
        psi = v * u
        K = 4
        omega = float(psi @ psi) / T
        for ell in range(1, K):
            s = 0.0
            for t in range(ell, T):
                s += psi[t] * psi[t - ell]
            omega += 2.0 * (1.0 - ell / K) * s / (T - ell)
        sigma_sq = omega / tau_sq**2
        assert est.beta == pytest.approx(float(beta_all[0]), abs=1e-9)
        assert est.se == pytest.approx(np.sqrt(sigma_sq / T), rel=1e-9)

    def test_dof_correction_scales_variance(self):
        rng = np.random.default_rng(17)
        data = make_data(rng, 120, 3)
        spec = LpSpec(
            response="y1", shock="y2", horizons=(1,), lagged=("y1", "y2", "y3"),
            lags=2,
        )
        ds = build_lp_dataset(data, spec, 1)
        bare = conventional_lp(ds, HacConfig(bandwidth=4, dof_correction=False))
        adj = conventional_lp(ds, HacConfig(bandwidth=4))
        k = 1 + ds.W.shape[1]  # shock plus all controls and the intercept
        T = ds.effective_T
        assert adj.sigma_sq == pytest.approx(bare.sigma_sq * T / (T - k), rel=1e-12)
        assert adj.beta == bare.beta

    def test_empty_controls_is_simple_regression(self):
        rng = np.random.default_rng(13)
        data = make_data(rng, 50, 2, names=("y", "x"))
        spec = LpSpec(response="y", shock="x", horizons=(1,), lags=0)
        ds = build_lp_dataset(data, spec, 1)
        est = conventional_lp(ds, HacConfig())
        x, y = ds.x, ds.y
        slope = np.cov(y, x, ddof=1)[0, 1] / np.var(x, ddof=1)
        assert est.beta == pytest.approx(slope, rel=1e-9)


class TestEstimateIrf:
    def test_ar1_power_coverage(self):
        rng = np.random.default_rng(14)
        rho = 0.5
        hits = {1: 0, 2: 0, 3: 0}
        n_runs = 50
        for _ in range(n_runs):
            y = ar1_series(rng, 400, rho)
            data = TimeSeriesMatrix(values=y[:, None], columns=("y",))
            spec = LpSpec(
                response="y", shock="y", horizons=(1, 2, 3), lagged=("y",),
                lags=1, lag_augment=1,
            )
            result = estimate_irf(data, spec, OgaConfig(c_star=2.0), HacConfig(),
                                  method=DOUBLE_OGA)
            assert not result.errors
            for est in result.estimates:
                lo, hi = est.cis[0.95]
                hits[est.horizon] += lo <= rho**est.horizon <= hi
        for h in (1, 2, 3):
            assert hits[h] / n_runs >= 0.90

    def test_horizon_errors_collected(self):
        rng = np.random.default_rng(15)
        data = make_data(rng, 15, 2, names=("y", "x"))
        spec = LpSpec(response="y", shock="x", horizons=(1, 12), lagged=("y",),
                      lags=1)
        result = estimate_irf(data, spec, method=CONVENTIONAL_LP)
        assert [est.horizon for est in result.estimates] == [1]
        assert 12 in result.errors
        assert "InsufficientSample" in result.errors[12]

    def test_preserves_horizon_order(self):
        rng = np.random.default_rng(16)
        data = make_data(rng, 80, 2, names=("y", "x"))
        spec = LpSpec(response="y", shock="x", horizons=(3, 1, 2), lagged=("y",),
                      lags=1)
        result = estimate_irf(data, spec, method=CONVENTIONAL_LP)
        assert [est.horizon for est in result.estimates] == [3, 1, 2]
