"""Per-horizon projection regressions with double selection of controls.

For each horizon h the raw series matrix is turned into an aligned dataset
(response led h steps, shock at time t, contemporaneous controls, lagged
controls up to the configured depth) and the shock coefficient is estimated
either by the double-selection route (select controls once against the
response, once against the shock, regress on the union) or by the plain
regression on everything. Confidence intervals use the long-run variance of
psi = v * u scaled by the fourth power of the shock-residual second moment.

The intercept, when requested, rides along as a protected design column:
always in the projection, never a selection candidate, exempt from the
penalty count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .errors import (
    DegenerateShock,
    DimensionMismatch,
    InsufficientSample,
    NonFinite,
    UnknownColumn,
)
from .hac import PSI_FIRST_STAGE_E, HacConfig, hac_variance
from .linalg import ols_fit, project_out
from .selection import OgaConfig, SelectionPath, oga_hdaic_select

DOUBLE_OGA = "double_oga"
CONVENTIONAL_LP = "conventional_lp"
METHODS = (DOUBLE_OGA, CONVENTIONAL_LP)

INTERCEPT_NAME = "const"
DEFAULT_LEVELS = (0.95,)


@dataclass(frozen=True, eq=False)
class TimeSeriesMatrix:
    """Raw observation matrix, one named series per column."""

    values: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise DimensionMismatch("values must be a 2-D array")
        if vals.shape[0] < 1:
            raise DimensionMismatch("need at least one row")
        if not np.all(np.isfinite(vals)):
            raise NonFinite("time series contains non-finite entries")
        cols = tuple(self.columns)
        if len(cols) != vals.shape[1]:
            raise DimensionMismatch(
                f"{len(cols)} names for {vals.shape[1]} columns"
            )
        if len(set(cols)) != len(cols):
            raise ValueError("column names must be unique")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "columns", cols)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise UnknownColumn(name) from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]


@dataclass(frozen=True)
class LpSpec:
    """What to regress on what, and how deep the lag structure goes."""

    response: str
    shock: str
    horizons: tuple[int, ...]
    contemporaneous: tuple[str, ...] = ()
    lagged: tuple[str, ...] = ()
    lags: int = 0
    lag_augment: int = 0
    include_intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(int(h) for h in self.horizons))
        object.__setattr__(self, "contemporaneous", tuple(self.contemporaneous))
        object.__setattr__(self, "lagged", tuple(self.lagged))
        if not self.horizons or any(h < 0 for h in self.horizons):
            raise ValueError("horizons must be nonempty and nonnegative")
        if self.lags < 0 or self.lag_augment < 0:
            raise ValueError("lag counts must be nonnegative")
        if self.shock in self.contemporaneous:
            raise ValueError("the shock cannot also be a contemporaneous control")

    @property
    def lag_depth(self) -> int:
        return self.lags + self.lag_augment


@dataclass(frozen=True, eq=False)
class LpDataset:
    """Aligned arrays for one horizon; column_map records (source, lag) per W column."""

    y: np.ndarray
    x: np.ndarray
    W: np.ndarray
    column_map: tuple[tuple[str, int], ...]
    horizon: int
    effective_T: int
    intercept_index: int | None

    @property
    def candidate_indices(self) -> tuple[int, ...]:
        return tuple(
            j for j in range(self.W.shape[1]) if j != self.intercept_index
        )


@dataclass(frozen=True, eq=False)
class LpEstimate:
    """Shock coefficient at one horizon with its variance pieces and selections."""

    horizon: int
    method: str
    beta: float
    se: float
    cis: dict[float, tuple[float, float]]
    selected_y: tuple[int, ...]
    selected_x: tuple[int, ...]
    union: tuple[int, ...]
    tau_sq: float
    omega: float
    sigma_sq: float
    bandwidth: int
    effective_T: int
    c_star_y: float | None
    c_star_x: float | None
    residuals_u: np.ndarray = field(repr=False)
    residuals_v: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class IrfResult:
    """Per-horizon estimates in horizon order; failed horizons land in errors."""

    method: str
    estimates: tuple[LpEstimate, ...]
    errors: dict[int, str]

    def by_horizon(self) -> dict[int, LpEstimate]:
        return {est.horizon: est for est in self.estimates}


def build_lp_dataset(data: TimeSeriesMatrix, spec: LpSpec, h: int) -> LpDataset:
    """Align response, shock and controls for horizon h.

    Row t of the output pairs y_{t+h} with x_t, the contemporaneous controls
    at t and the lagged controls at t-1 .. t-depth; the effective sample is
    n_rows - h - depth and must be at least 8.
    """
    depth = spec.lag_depth
    eff = data.n_rows - h - depth
    if eff < 8:
        raise InsufficientSample(
            f"{data.n_rows} rows leave {eff} usable at horizon {h} with "
            f"lag depth {depth}; need at least 8"
        )
    resp = data.index(spec.response)
    shock = data.index(spec.shock)
    contemp = [data.index(c) for c in spec.contemporaneous]
    lagged = [data.index(c) for c in spec.lagged]

    t = np.arange(depth, data.n_rows - h)
    vals = data.values
    y = vals[t + h, resp]
    x = vals[t, shock]

    cols: list[np.ndarray] = []
    cmap: list[tuple[str, int]] = []
    for name, j in zip(spec.contemporaneous, contemp):
        cols.append(vals[t, j])
        cmap.append((name, 0))
    for ell in range(1, depth + 1):
        for name, j in zip(spec.lagged, lagged):
            cols.append(vals[t - ell, j])
            cmap.append((name, ell))
    intercept_index = None
    if spec.include_intercept:
        cols.append(np.ones(eff))
        cmap.append((INTERCEPT_NAME, 0))
        intercept_index = len(cols) - 1
    W = np.column_stack(cols) if cols else np.zeros((eff, 0))
    return LpDataset(
        y=y, x=x, W=W, column_map=tuple(cmap), horizon=h,
        effective_T=eff, intercept_index=intercept_index,
    )


def _split_candidates(dataset: LpDataset) -> tuple[np.ndarray, np.ndarray | None]:
    cand = list(dataset.candidate_indices)
    Wc = dataset.W[:, cand]
    base = None
    if dataset.intercept_index is not None:
        base = dataset.W[:, [dataset.intercept_index]]
    return Wc, base


def _confidence_intervals(
    beta: float, se: float, levels
) -> dict[float, tuple[float, float]]:
    cis = {}
    for level in levels:
        z = NormalDist().inv_cdf(0.5 + level / 2.0)
        cis[float(level)] = (beta - z * se, beta + z * se)
    return cis


def _finalize(
    dataset: LpDataset,
    method: str,
    union: tuple[int, ...],
    v_hat: np.ndarray,
    selected_y: tuple[int, ...],
    selected_x: tuple[int, ...],
    hac_config: HacConfig,
    levels,
    e_hat: np.ndarray | None = None,
    c_star_y: float | None = None,
    c_star_x: float | None = None,
) -> LpEstimate:
    Wc, base = _split_candidates(dataset)
    controls = Wc[:, list(union)]
    if base is not None:
        controls = np.column_stack([controls, base])

    x_resid = project_out(controls, dataset.x) if controls.shape[1] else dataset.x
    T = dataset.effective_T
    if float(x_resid @ x_resid) / T < 1e-12:
        raise DegenerateShock(
            "shock has no variation left after projecting on the selected controls"
        )

    design = np.column_stack([dataset.x, controls])
    fit = ols_fit(design, dataset.y)
    beta = float(fit.coefficients[0])
    u_hat = fit.residuals

    u_for_psi = u_hat
    if hac_config.psi_source == PSI_FIRST_STAGE_E:
        if e_hat is None:
            raise ValueError("first-stage residuals unavailable for this method")
        u_for_psi = e_hat
    sigma_sq, tau_sq, omega, K = hac_variance(v_hat, u_for_psi, hac_config.bandwidth)
    if hac_config.dof_correction:
        dof = T - fit.rank
        if dof <= 0:
            raise InsufficientSample(
                f"no residual degrees of freedom: T={T}, design rank {fit.rank}"
            )
        sigma_sq *= T / dof
    se = float(np.sqrt(sigma_sq / T))
    return LpEstimate(
        horizon=dataset.horizon,
        method=method,
        beta=beta,
        se=se,
        cis=_confidence_intervals(beta, se, levels),
        selected_y=selected_y,
        selected_x=selected_x,
        union=union,
        tau_sq=tau_sq,
        omega=omega,
        sigma_sq=sigma_sq,
        bandwidth=K,
        effective_T=T,
        c_star_y=c_star_y,
        c_star_x=c_star_x,
        residuals_u=u_hat,
        residuals_v=v_hat,
    )


def double_oga_lp(
    dataset: LpDataset,
    oga_config: OgaConfig | None = None,
    hac_config: HacConfig | None = None,
    levels=DEFAULT_LEVELS,
) -> LpEstimate:
    """Double-selection estimate of the shock coefficient at one horizon.

    Controls are selected twice (against the response and against the
    shock); the final regression uses their union. The shock residual kept
    for the variance is the one from the shock selection equation, not a
    re-residualization on the union.
    """
    oga_config = oga_config or OgaConfig()
    hac_config = hac_config or HacConfig()
    Wc, base = _split_candidates(dataset)
    if Wc.shape[1] == 0:
        return _simple_regression(dataset, DOUBLE_OGA, hac_config, levels)
    if float(np.var(dataset.x)) < 1e-12:
        raise DegenerateShock("shock series is constant")

    sel_y: SelectionPath = oga_hdaic_select(Wc, dataset.y, oga_config, base=base)
    sel_x: SelectionPath = oga_hdaic_select(Wc, dataset.x, oga_config, base=base)

    x_controls = Wc[:, list(sel_x.chosen_set)]
    if base is not None:
        x_controls = np.column_stack([x_controls, base])
    v_hat = project_out(x_controls, dataset.x)

    e_hat = None
    if hac_config.psi_source == PSI_FIRST_STAGE_E:
        y_controls = Wc[:, list(sel_y.chosen_set)]
        if base is not None:
            y_controls = np.column_stack([y_controls, base])
        e_hat = project_out(y_controls, dataset.y)

    union = tuple(sorted(set(sel_y.chosen_set) | set(sel_x.chosen_set)))
    return _finalize(
        dataset, DOUBLE_OGA, union, v_hat,
        selected_y=tuple(sorted(sel_y.chosen_set)),
        selected_x=tuple(sorted(sel_x.chosen_set)),
        hac_config=hac_config, levels=levels, e_hat=e_hat,
        c_star_y=sel_y.c_star_used, c_star_x=sel_x.c_star_used,
    )


def conventional_lp(
    dataset: LpDataset,
    hac_config: HacConfig | None = None,
    levels=DEFAULT_LEVELS,
) -> LpEstimate:
    """No selection: regress on the shock and every control, same variance."""
    hac_config = hac_config or HacConfig()
    Wc, base = _split_candidates(dataset)
    if Wc.shape[1] == 0:
        return _simple_regression(dataset, CONVENTIONAL_LP, hac_config, levels)
    if float(np.var(dataset.x)) < 1e-12:
        raise DegenerateShock("shock series is constant")
    all_controls = Wc if base is None else np.column_stack([Wc, base])
    v_hat = project_out(all_controls, dataset.x)
    e_hat = None
    if hac_config.psi_source == PSI_FIRST_STAGE_E:
        e_hat = project_out(all_controls, dataset.y)
    union = tuple(range(Wc.shape[1]))
    return _finalize(
        dataset, CONVENTIONAL_LP, union, v_hat,
        selected_y=union, selected_x=union,
        hac_config=hac_config, levels=levels, e_hat=e_hat,
    )


def _simple_regression(
    dataset: LpDataset, method: str, hac_config: HacConfig, levels
) -> LpEstimate:
    """Regression with no selectable controls (at most an intercept)."""
    _, base = _split_candidates(dataset)
    v_hat = project_out(base, dataset.x) if base is not None else dataset.x.copy()
    e_hat = None
    if hac_config.psi_source == PSI_FIRST_STAGE_E:
        e_hat = project_out(base, dataset.y) if base is not None else dataset.y.copy()
    return _finalize(
        dataset, method, (), v_hat, (), (),
        hac_config=hac_config, levels=levels, e_hat=e_hat,
    )


def estimate_lp(
    dataset: LpDataset,
    method: str,
    oga_config: OgaConfig | None = None,
    hac_config: HacConfig | None = None,
    levels=DEFAULT_LEVELS,
) -> LpEstimate:
    if method == DOUBLE_OGA:
        return double_oga_lp(dataset, oga_config, hac_config, levels)
    if method == CONVENTIONAL_LP:
        return conventional_lp(dataset, hac_config, levels)
    raise ValueError(f"unknown method {method!r}")


def estimate_irf(
    data: TimeSeriesMatrix,
    spec: LpSpec,
    oga_config: OgaConfig | None = None,
    hac_config: HacConfig | None = None,
    levels=DEFAULT_LEVELS,
    method: str = DOUBLE_OGA,
) -> IrfResult:
    """Estimate the shock coefficient at every requested horizon.

    Horizons are independent regressions; a failure at one horizon is
    recorded and does not abort the others.
    """
    estimates: list[LpEstimate] = []
    errors: dict[int, str] = {}
    for h in spec.horizons:
        try:
            dataset = build_lp_dataset(data, spec, h)
            estimates.append(
                estimate_lp(dataset, method, oga_config, hac_config, levels)
            )
        except Exception as exc:  # noqa: BLE001 - per-horizon isolation
            errors[h] = f"{type(exc).__name__}: {exc}"
    return IrfResult(method=method, estimates=tuple(estimates), errors=errors)
