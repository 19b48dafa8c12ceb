"""Command-line entry points: estimate, simulate, montecarlo, lpdid.

Every command takes --config pointing at a YAML file; --seed, --threads and
--out override the corresponding config scalars. Output tables are CSV with
floats at 17 significant digits, written to a temporary file and renamed,
so an aborted run never leaves a partial table. Exit codes: 0 success,
2 configuration problem, 3 input-data problem, 4 computation problem.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    EstimateRun,
    LpdidRun,
    MontecarloRun,
    SimulateRun,
    build_estimate_run,
    build_lpdid_run,
    build_montecarlo_run,
    build_simulate_run,
    load_yaml,
)
from .dgp import DfmDgpSpec, simulate_dfm, simulate_var, true_dfm_irf, \
    true_reduced_form_irf
from .errors import ConfigError, DataError, HdlpError
from .lp import TimeSeriesMatrix, estimate_irf
from .lpdid import PanelDataset, lpdid_estimate
from .montecarlo import run_monte_carlo

CHECKPOINT_VERSION = 1
CHECKPOINT_EVERY = 50


def fmt(value) -> str:
    """17-significant-digit float formatting; everything else via str."""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv_atomic(path: Path, header, rows):
    """Write the full table to a temp file, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_wide_csv(path: Path) -> TimeSeriesMatrix:
    """Header row of series names, numeric body, no missing cells."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric cell") from None
    if not rows:
        raise DataError(f"{path} has no data rows")
    try:
        return TimeSeriesMatrix(values=np.asarray(rows), columns=tuple(header))
    except HdlpError as exc:
        raise DataError(f"{path}: {exc}") from exc


def read_long_csv(path: Path, run: LpdidRun) -> PanelDataset:
    """Long panel: unit, integer time, outcome, 0/1 treatment, covariates."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        needed = [run.unit_col, run.time_col, run.outcome_col, run.treatment_col]
        needed += list(run.spec.extra_controls)
        col = {}
        for name in needed:
            if name not in header:
                raise DataError(f"{path}: missing column {name!r}")
            col[name] = header.index(name)

        unit, time, outcome, treatment = [], [], [], []
        covs: dict[str, list] = {c: [] for c in run.spec.extra_controls}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells")
            try:
                unit.append(row[col[run.unit_col]])
                time.append(int(row[col[run.time_col]]))
                val = row[col[run.outcome_col]]
                outcome.append(float(val) if val != "" else np.nan)
                treatment.append(float(row[col[run.treatment_col]]))
                for c in run.spec.extra_controls:
                    v = row[col[c]]
                    covs[c].append(float(v) if v != "" else np.nan)
            except ValueError:
                raise DataError(f"{path}:{lineno}: malformed cell") from None
    if not unit:
        raise DataError(f"{path} has no data rows")
    try:
        return PanelDataset(
            unit=np.array(unit, dtype=object),
            time=np.array(time),
            outcome=np.array(outcome),
            treatment=np.array(treatment),
            covariates={k: np.array(v) for k, v in covs.items()},
        )
    except HdlpError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _ci_headers(levels) -> list[str]:
    names = []
    for level in levels:
        tag = format(level, "g")
        names += [f"ci_low_{tag}", f"ci_high_{tag}"]
    return names


def cmd_estimate(run: EstimateRun) -> int:
    data = read_wide_csv(run.data_path)
    header = (
        ["horizon", "method", "beta", "se"]
        + _ci_headers(run.levels)
        + ["n_selected_y", "n_selected_x", "n_union", "bandwidth",
           "c_star_y", "c_star_x", "effective_T"]
    )
    rows = []
    failures: dict[str, dict[int, str]] = {}
    for method in run.methods:
        result = estimate_irf(
            data, run.lp_spec, run.oga, run.hac, run.levels, method=method
        )
        if result.errors:
            failures[method] = result.errors
        for est in result.estimates:
            row = [est.horizon, method, est.beta, est.se]
            for level in run.levels:
                lo, hi = est.cis[level]
                row += [lo, hi]
            row += [
                len(est.selected_y), len(est.selected_x), len(est.union),
                est.bandwidth,
                "" if est.c_star_y is None else est.c_star_y,
                "" if est.c_star_x is None else est.c_star_x,
                est.effective_T,
            ]
            rows.append(row)
    if failures:
        log_path = run.out_path.with_suffix(run.out_path.suffix + ".log")
        with open(log_path, "w") as fh:
            for method, errors in failures.items():
                for h, msg in sorted(errors.items()):
                    fh.write(f"{method} horizon {h}: {msg}\n")
        print(
            f"estimation failed for {sum(len(e) for e in failures.values())} "
            f"horizon(s); detail in {log_path}",
            file=sys.stderr,
        )
        return 4
    write_csv_atomic(run.out_path, header, rows)
    return 0


def cmd_simulate(run: SimulateRun) -> int:
    if run.kind == "dfm":
        assert isinstance(run.spec, DfmDgpSpec)
        data = simulate_dfm(run.spec, seed=run.seed)
        response = (
            run.response
            if isinstance(run.response, int)
            else list(data.columns).index(str(run.response)) + 1
        )
        truth = true_dfm_irf(
            run.spec, int(response) - 1, int(run.innovation) - 1, run.horizons
        )
    else:
        data = simulate_var(run.spec, run.T, seed=run.seed)
        names = list(data.columns)

        def to_index(v):
            if isinstance(v, int):
                return v - 1
            if str(v) in names:
                return names.index(str(v))
            raise ConfigError(f"unknown series {v!r}; columns are {names}")

        truth = true_reduced_form_irf(
            run.spec, to_index(run.response), to_index(run.innovation),
            run.horizons,
        )
    write_csv_atomic(
        run.sidecar_path,
        ["horizon", "true_irf"],
        [(h, float(v)) for h, v in zip(run.horizons, truth)],
    )
    write_csv_atomic(run.out_path, list(data.columns), data.values.tolist())
    return 0


def _checkpoint_path(out_path: Path) -> Path:
    return out_path.with_suffix(out_path.suffix + ".ckpt")


def _config_fingerprint(run: MontecarloRun) -> str:
    """Identity of a run for checkpoint compatibility."""
    payload = {
        "seed": run.seed,
        "n_reps": run.n_reps,
        "methods": list(run.methods),
        "levels": [format(v, ".17g") for v in run.levels],
        "horizons": list(run.design.lp_spec.horizons),
        "T": run.design.T,
        "dgp": {
            "n": run.design.dgp.n,
            "K": run.design.dgp.K,
            "B": [b.tolist() for b in run.design.dgp.B],
            "sigma": run.design.dgp.sigma.tolist(),
            "burn_in": run.design.dgp.burn_in,
        },
        "lp": {
            "response": run.design.lp_spec.response,
            "shock": run.design.lp_spec.shock,
            "contemporaneous": list(run.design.lp_spec.contemporaneous),
            "lagged": list(run.design.lp_spec.lagged),
            "lags": run.design.lp_spec.lags,
            "lag_augment": run.design.lp_spec.lag_augment,
            "intercept": run.design.lp_spec.include_intercept,
        },
        "oga": {
            "c_star": run.design.oga.c_star,
            "candidates": list(run.design.oga.c_star_candidates),
            "max_steps": run.design.oga.max_steps_override,
            "mbar_scale": run.design.oga.mbar_scale,
            "delta": run.design.oga.delta_assumed,
            "eval_fraction": run.design.oga.eval_fraction,
        },
        "hac": {
            "bandwidth": run.design.hac.bandwidth,
            "psi_source": run.design.hac.psi_source,
            "dof_correction": run.design.hac.dof_correction,
        },
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(path: Path, fingerprint: str, records: list):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(
                {"version": CHECKPOINT_VERSION, "fingerprint": fingerprint,
                 "records": records},
                fh,
            )
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: Path, fingerprint: str) -> list | None:
    path = Path(path)
    if not path.exists():
        return None
    try:
        with open(path) as fh:
            blob = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None
    if blob.get("version") != CHECKPOINT_VERSION:
        return None
    if blob.get("fingerprint") != fingerprint:
        return None
    return blob.get("records")


def cmd_montecarlo(run: MontecarloRun) -> int:
    fingerprint = _config_fingerprint(run)
    ckpt_path = _checkpoint_path(run.out_path)
    resume = load_checkpoint(ckpt_path, fingerprint) if run.checkpoint else None
    if resume:
        print(
            f"montecarlo: resuming from checkpoint with {len(resume)} "
            f"replications", file=sys.stderr,
        )

    writer = None
    if run.checkpoint:
        writer = lambda records: save_checkpoint(ckpt_path, fingerprint, records)

    def progress(done, total):
        step = max(1, total // 20)
        if done % step == 0 or done == total:
            print(f"montecarlo: {done}/{total} replications", file=sys.stderr)

    report = run_monte_carlo(
        run.design,
        methods=run.methods,
        n_reps=run.n_reps,
        levels=run.levels,
        seed=run.seed,
        parallelism=run.parallelism,
        checkpoint_every=CHECKPOINT_EVERY if run.checkpoint else 0,
        checkpoint_writer=writer,
        resume_records=resume,
        progress=progress,
    )
    if report.failure_fraction > 0.10:
        print(
            f"montecarlo: {report.failures} estimation failures "
            f"({report.failure_fraction:.1%} of cells) exceed the 10% limit",
            file=sys.stderr,
        )
        return 4
    write_csv_atomic(
        run.out_path,
        ["method", "horizon", "level", "coverage", "median_width", "n_reps"],
        report.rows(),
    )
    if run.checkpoint and ckpt_path.exists():
        ckpt_path.unlink()
    return 0


def cmd_lpdid(run: LpdidRun) -> int:
    panel = read_long_csv(run.data_path, run)
    result = lpdid_estimate(panel, run.spec, run.oga, run.hac)
    if result.errors:
        log_path = run.out_path.with_suffix(run.out_path.suffix + ".log")
        with open(log_path, "w") as fh:
            for h, msg in sorted(result.errors.items()):
                fh.write(f"horizon {h}: {msg}\n")
        print(
            f"estimation failed for {len(result.errors)} horizon(s); "
            f"detail in {log_path}", file=sys.stderr,
        )
        return 4
    header = (
        ["horizon", "method", "beta", "se"]
        + _ci_headers(run.spec.levels)
        + ["n_treated", "n_clean", "n_controls", "n_selected", "bandwidth",
           "variance", "effective_T"]
    )
    rows = []
    for est in result.estimates:
        row = [est.horizon, est.method, est.beta, est.se]
        for level in run.spec.levels:
            lo, hi = est.cis[level]
            row += [lo, hi]
        row += [
            est.n_treated, est.n_clean, len(est.control_names),
            len(est.selected),
            "" if est.bandwidth is None else est.bandwidth,
            est.variance, est.effective_T,
        ]
        rows.append(row)
    write_csv_atomic(run.out_path, header, rows)
    return 0


BUILDERS = {
    "estimate": (build_estimate_run, cmd_estimate),
    "simulate": (build_simulate_run, cmd_simulate),
    "montecarlo": (build_montecarlo_run, cmd_montecarlo),
    "lpdid": (build_lpdid_run, cmd_lpdid),
}


def _apply_overrides(cfg: dict, args) -> dict:
    cfg = dict(cfg)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["output"] = args.out
    if args.threads is not None:
        if args.command != "montecarlo":
            raise ConfigError("--threads applies to montecarlo only")
        cfg["parallelism"] = args.threads
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdlp",
        description=(
            "Impulse-response and event-study estimation with greedy "
            "high-dimensional control selection"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("estimate", "per-horizon shock coefficients from a wide CSV"),
        ("simulate", "draw a synthetic dataset plus its true response path"),
        ("montecarlo", "coverage and width experiment over many replications"),
        ("lpdid", "panel event-study estimates from a long CSV"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="override montecarlo parallelism")
        p.add_argument("--out", default=None, help="override the output path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    builder, command = BUILDERS[args.command]
    try:
        cfg = _apply_overrides(load_yaml(args.config), args)
        run = builder(cfg)
        return command(run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - map anything else to exit 4
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
