"""Experiment runners behind the CLI subcommands.

Each runner consumes an :class:`~mssa.config.ExperimentConfig`, computes
model-implied ("expected") quantities next to sampled ones, and writes
tidy CSV tables plus small SVG figures into an output directory.  All
randomness flows through the config seed, so reruns are bit-identical.

Conventions shared by every runner:

* filters are reported in data space (taps on observations) even when
  the solver works in innovation space;
* sample metrics are computed only on fully initialised filter outputs;
* ``summary.csv`` holds one flat ``quantity,value`` row per number that
  the replication report may want to check.
"""

from __future__ import annotations

from collections import OrderedDict
from pathlib import Path

import numpy as np
import pandas as pd

from . import config as cfgmod
from .datapipe import (
    cross_correlation,
    fetch_series,
    load_csv,
    log_diff_standardize,
    trim_outliers,
)
from .errors import DataError, ValidationError
from .metrics import empirical_metrics, expected_metrics, ht_from_acf, rms_second_diff
from .processes import (
    VarmaModel,
    apply_filter,
    convolve,
    deconvolve,
    full_convolution,
    ma_inversion,
    simulate,
)
from .solver import solve_dual, solve_mssa
from .svgplot import write_svg
from .targets import (
    TargetSpec,
    allpass_shift,
    hp_concurrent,
    hp_two_sided,
    whittaker_matrix_row,
)
from .tridiag import quad_form_I, quad_form_M

#: moving-average expansion length for model moments; long enough that
#: every shipped model's tail is numerically dead
XI_LENGTH = 601

#: taps kept for the two-sided trend target
TREND_TAPS = 401

#: moving-block bootstrap defaults for data-sample standard errors
BOOT_REPS = 200
BOOT_BLOCK = 25


# ---------------------------------------------------------------------------
# shared plumbing


def _outdir(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(df, path):
    df.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    return Path(path)


def _write_summary(summary, path):
    df = pd.DataFrame({"quantity": list(summary),
                       "value": [summary[k] for k in summary]})
    return _write_csv(df, path)


def _white_noise(n=1):
    return VarmaModel(ar=[], ma=[], sigma=np.eye(n))


def _expansion_for(model, L, delta=0, first_lag=0):
    """Expansion long enough for an exact length-``L`` criterion window."""
    return ma_inversion(model, max(XI_LENGTH, L + delta - first_lag + 1))


def _gamma_window(target, xi, L, delta=0):
    """Causal criterion window of a scalar target, series-major ``(n, L)``."""
    conv = convolve(target.weights, xi, delta=delta, out_len=L,
                    first_lag=target.first_lag)
    if conv.shape[1] != 1:
        raise ValidationError("criterion window needs a single-output target")
    return conv[:, 0, :].T.copy()


def _target_variance(target, xi, sigma):
    """Exact variance of a (possibly acausal) scalar target output."""
    coeffs, _ = full_convolution(target.weights, xi, target.first_lag)
    W = coeffs[:, 0, :]
    sig = np.atleast_2d(np.asarray(sigma, dtype=float))
    return float(np.einsum("kj,jl,kl->", W, sig, W))


def _target_correlation(sol, target_var):
    """Correlation of a solution's output with the target itself."""
    return sol.mse_correlation * np.sqrt(sol.weights.gamma_norm2 / target_var)


def _data_weights(b, xi):
    """Innovation-space blocks ``(n, L)`` -> causal data taps ``(L, 1, n)``."""
    return deconvolve(np.ascontiguousarray(b.T)[:, None, :], xi)


def _build_target(cfg, n):
    kind = cfg.target_kind
    if kind == "allpass":
        return allpass_shift(cfg.horizon, n)
    if kind == "hp-two-sided":
        base = hp_two_sided(cfg.lam, TREND_TAPS)
    else:
        base = TargetSpec(np.asarray(cfg.target_taps, dtype=float),
                          first_lag=cfg.target_first_lag, name="custom")
    return base if n == 1 else base.embed_diagonal(n)


def _per_output(vals, n_out, what):
    vals = list(vals)
    if len(vals) == 1:
        return vals * n_out
    if len(vals) != n_out:
        raise ValidationError("%s needs 1 or %d entries, got %d"
                              % (what, n_out, len(vals)))
    return vals


def _bootstrap_ses(y, z, seed, n_reps=BOOT_REPS, block=BOOT_BLOCK):
    """Moving-block bootstrap SEs of (correlation, holding time).

    Blocks are drawn jointly for predictor and target so their
    dependence survives the resampling; holding-time replicates without
    any crossing (possible for very smooth outputs) are dropped.
    """
    rng = np.random.default_rng(seed)
    N = int(y.size)
    block = min(block, N)
    n_blocks = int(np.ceil(N / block))
    cors = np.empty(n_reps)
    hts = np.empty(n_reps)
    offs = np.arange(block)
    for r in range(n_reps):
        starts = rng.integers(0, N - block + 1, size=n_blocks)
        idx = (starts[:, None] + offs).reshape(-1)[:N]
        rep = empirical_metrics(y[idx], z[idx])
        cors[r] = rep.correlation
        hts[r] = rep.holding_time
    hts = hts[np.isfinite(hts)]
    se_ht = float(np.std(hts, ddof=1)) if hts.size > 1 else np.nan
    return float(np.std(cors, ddof=1)), se_ht


def _year_fraction(index):
    return np.asarray([d.year + (d.month - 1) / 12.0 for d in index], dtype=float)


# ---------------------------------------------------------------------------
# solve: one-off solves from a config


def run_solve(cfg, out_dir):
    """Solve the configured problem and write the filter plus a report.

    Works for any model/target combination the config can express; each
    target output gets its own constraint entry (a single entry is
    broadcast).
    """
    out = _outdir(out_dir)
    model = cfg.model if cfg.model is not None else _white_noise()
    n = model.n_series
    target = _build_target(cfg, n)
    mode = cfg.constraint_mode()
    if mode is None:
        raise ValidationError(
            "solve needs one of [filter] ht, rho or match_correlation")
    L, delta = cfg.length, cfg.delta
    xi = _expansion_for(model, L, delta, target.first_lag)

    if mode == "ht":
        cons = _per_output(cfg.ht, target.n_out, "[filter] ht")
    elif mode == "rho":
        cons = _per_output(cfg.rho, target.n_out, "[filter] rho")
    else:
        cons = [cfg.match_correlation] * target.n_out

    rep_rows, w_rows, summary = [], [], OrderedDict()
    first_B = None
    for i in range(target.n_out):
        tgt = target.select_output(i)
        gamma = _gamma_window(tgt, xi, L, delta)
        tv = _target_variance(tgt, xi, model.sigma)
        if mode == "ht":
            sol = solve_mssa(gamma, model.sigma, ht=cons[i], ell=cfg.ell)
        elif mode == "rho":
            sol = solve_mssa(gamma, model.sigma, rho=cons[i], ell=cfg.ell)
        else:
            sol = solve_dual(gamma, model.sigma, correlation=cons[i],
                             target_variance=tv, ell=cfg.ell)
        corr = _target_correlation(sol, tv)
        B = _data_weights(sol.b, xi)
        if first_B is None:
            first_B = B
        rep_rows.append(OrderedDict(
            output=i, branch=sol.branch, nu=sol.nu, acf1=sol.acf1,
            holding_time=sol.holding_time, criterion=sol.criterion,
            mse_correlation=sol.mse_correlation, correlation=corr,
            rho_mse=sol.rho_mse, rho_max=sol.rho_max, scale=sol.scale,
            ell=sol.ell, iterations=sol.iterations,
        ))
        for j in range(n):
            for k in range(L):
                w_rows.append(OrderedDict(
                    output=i, series=j, lag=k,
                    innovation_weight=sol.b[j, k],
                    data_weight=B[k, 0, j],
                ))
        tag = "output%d" % (i + 1)
        summary[tag + "_acf1"] = sol.acf1
        summary[tag + "_holding_time"] = sol.holding_time
        summary[tag + "_correlation"] = corr
        summary[tag + "_nu"] = sol.nu
        summary[tag + "_criterion"] = sol.criterion

    report = pd.DataFrame(rep_rows)
    weights = pd.DataFrame(w_rows)
    files = [
        _write_csv(report, out / "report.csv"),
        _write_csv(weights, out / "weights.csv"),
        _write_summary(summary, out / "summary.csv"),
    ]
    show = min(L, 60)
    files.append(write_svg(
        out / "weights.svg",
        {"series %d" % j: first_B[:show, 0, j] for j in range(n)},
        title="data-space filter weights (output 0)",
        x=np.arange(show),
    ))
    return {"summary": summary,
            "tables": {"report": report, "weights": weights},
            "files": files}


# ---------------------------------------------------------------------------
# var1-forecast: one-step-ahead forecasting of a bivariate VAR(1)


def run_var1_forecast(cfg, out_dir):
    """Forecast each series of a VAR one step ahead under holding-time
    constraints, and replicate the expected numbers on simulated paths.

    The sampled columns average five independent replications (seeds
    ``seed .. seed+4``); the criterion is the correlation of the
    constrained filter's output with the unconstrained MSE filter's
    output.
    """
    out = _outdir(out_dir)
    model = cfg.require_model()
    n = model.n_series
    L, delta = cfg.length, cfg.delta
    target = allpass_shift(cfg.horizon, n)
    xi = _expansion_for(model, L, delta, target.first_lag)
    hts = _per_output(cfg.ht, n, "[filter] ht")

    sols, B_ssa, B_mse = [], [], []
    for i in range(n):
        gamma = _gamma_window(target.select_output(i), xi, L, delta)
        sol = solve_mssa(gamma, model.sigma, ht=hts[i], ell=cfg.ell)
        sols.append(sol)
        B_ssa.append(_data_weights(sol.b, xi))
        B_mse.append(_data_weights(gamma, xi))

    reps = 5
    crit_s = np.zeros((reps, n))
    ht_s = np.zeros((reps, n))
    htm_s = np.zeros((reps, n))
    first = None
    for r in range(reps):
        x = simulate(model, cfg.samples, seed=cfg.seed + r)
        ys, yms = [], []
        for i in range(n):
            y = apply_filter(B_ssa[i], x)[:, 0]
            ym = apply_filter(B_mse[i], x)[:, 0]
            crit_s[r, i] = empirical_metrics(y, ym).correlation
            ht_s[r, i] = empirical_metrics(y).holding_time
            htm_s[r, i] = empirical_metrics(ym).holding_time
            ys.append(y)
            yms.append(ym)
        if r == 0:
            first = (x, ys, yms)

    perf = pd.DataFrame(OrderedDict(
        series=["x%d" % (i + 1) for i in range(n)],
        sample_criterion=crit_s.mean(axis=0),
        true_criterion=[s.mse_correlation for s in sols],
        sample_ht=ht_s.mean(axis=0),
        true_ht=[s.holding_time for s in sols],
        sample_ht_mse=htm_s.mean(axis=0),
    ))

    w_rows = []
    for i in range(n):
        for j in range(n):
            for k in range(L):
                w_rows.append(OrderedDict(
                    target=i, series=j, lag=k,
                    ssa_weight=B_ssa[i][k, 0, j],
                    mse_weight=B_mse[i][k, 0, j],
                ))
    weights = pd.DataFrame(w_rows)

    x, ys, yms = first
    n_show = min(300, ys[0].size - 1)
    o_cols = OrderedDict(t=np.arange(L - 1, L - 1 + n_show))
    for i in range(n):
        o_cols["target_x%d" % (i + 1)] = x[L : L + n_show, i]
        o_cols["ssa_x%d" % (i + 1)] = ys[i][:n_show]
        o_cols["mse_x%d" % (i + 1)] = yms[i][:n_show]
    outputs = pd.DataFrame(o_cols)

    summary = OrderedDict()
    for i in range(n):
        tag = "_%d" % (i + 1)
        summary["true_criterion" + tag] = sols[i].mse_correlation
        summary["nu" + tag] = sols[i].nu
        summary["true_ht" + tag] = sols[i].holding_time
        summary["true_ht_mse" + tag] = ht_from_acf(sols[i].rho_mse)
        summary["sample_criterion" + tag] = float(crit_s[:, i].mean())
        summary["sample_ht" + tag] = float(ht_s[:, i].mean())
        summary["sample_ht_mse" + tag] = float(htm_s[:, i].mean())

    files = [
        _write_csv(perf, out / "performance.csv"),
        _write_csv(weights, out / "weights.csv"),
        _write_csv(outputs, out / "outputs.csv"),
        _write_summary(summary, out / "summary.csv"),
    ]
    show = min(L, 30)
    files.append(write_svg(
        out / "weights.svg",
        {"ssa on x1": B_ssa[0][:show, 0, 0], "ssa on x2": B_ssa[0][:show, 0, 1],
         "mse on x1": B_mse[0][:show, 0, 0], "mse on x2": B_mse[0][:show, 0, 1]},
        title="forecast filter weights, target x1",
        x=np.arange(show),
    ))
    n_fig = min(120, n_show)
    files.append(write_svg(
        out / "outputs.svg",
        {"target": x[L : L + n_fig, 0], "constrained": ys[0][:n_fig],
         "mse": yms[0][:n_fig]},
        title="one-step forecasts of x1 (first replication)",
        x=np.arange(n_fig),
    ))
    return {"summary": summary,
            "tables": {"performance": perf, "weights": weights},
            "files": files}


# ---------------------------------------------------------------------------
# wh-smooth: penalised smoothing of pure noise


def run_wh_smooth(cfg, out_dir):
    """Compare the penalised-smoother midpoint against constrained filters
    on white noise.

    Three filters over an odd window of length L, all aimed at the
    window midpoint ``x_{t-(L-1)/2}``:

    * the midpoint row of the penalised smoother matrix;
    * a constrained filter matching the smoother's lag-one ACF;
    * a constrained filter matching a declared target correlation
      (``match_correlation``) while maximising smoothness.

    A shift sweep then moves the aim point from the midpoint to the
    sample edge at fixed smoothness, tracing how the weights morph from
    symmetric to one-sided.
    """
    out = _outdir(out_dir)
    model = cfg.model if cfg.model is not None else _white_noise()
    if model.n_series != 1:
        raise ValidationError("wh-smooth is a single-series experiment")
    L = cfg.length
    if L % 2 != 1:
        raise ValidationError("[filter] length must be odd for wh-smooth")
    if cfg.match_correlation is None:
        raise ValidationError("wh-smooth needs [filter] match_correlation")
    half = (L - 1) // 2
    target = allpass_shift(-half)  # z_t = x_{t-half}
    xi = _expansion_for(model, L, 0, target.first_lag)
    gamma = _gamma_window(target, xi, L)
    tv = _target_variance(target, xi, model.sigma)

    b_wh = whittaker_matrix_row(cfg.lam, L, half)
    rho_wh = quad_form_M(b_wh) / quad_form_I(b_wh)
    rep_wh = expected_metrics(b_wh, model.sigma, target_conv=gamma, target_var=tv)

    sol_smooth = solve_mssa(gamma, model.sigma, rho=rho_wh, ell=cfg.ell)
    sol_corr = solve_dual(gamma, model.sigma, correlation=cfg.match_correlation,
                          target_variance=tv, ell=cfg.ell)

    x = simulate(model, cfg.samples, seed=cfg.seed)
    z = x[half : x.shape[0] - half, 0]
    rows = []
    for name, taps, ht_exp, corr_exp, acf_exp in (
        ("wh-midpoint", b_wh, rep_wh.holding_time, rep_wh.correlation, rep_wh.acf1),
        ("ssa-matched-smoothness", sol_smooth.b[0], sol_smooth.holding_time,
         _target_correlation(sol_smooth, tv), sol_smooth.acf1),
        ("ssa-matched-correlation", sol_corr.b[0], sol_corr.holding_time,
         _target_correlation(sol_corr, tv), sol_corr.acf1),
    ):
        y = apply_filter(taps, x)[:, 0]
        emp = empirical_metrics(y, z)
        # curvature is compared at unit output variance (unit l2 norm
        # under white noise), else the scale convention dominates
        rows.append(OrderedDict(
            filter=name, holding_time=ht_exp, correlation=corr_exp,
            acf1=acf_exp,
            rms_second_diff=rms_second_diff(taps / np.linalg.norm(taps)),
            sample_ht=emp.holding_time, sample_correlation=emp.correlation,
        ))
    table = pd.DataFrame(rows)

    lags = np.arange(L)
    weights = pd.DataFrame(OrderedDict(
        lag=lags,
        wh_midpoint=b_wh,
        ssa_matched_smoothness=sol_smooth.b[0],
        ssa_matched_correlation=sol_corr.b[0],
    ))

    # sweep the aim point from the midpoint (shift -half) to a nowcast
    # (shift 0) at the smoother's ACF
    sweep_w, sweep_m = [], []
    for shift in range(-half, 1):
        g = np.zeros(L)
        g[-shift] = 1.0
        s = solve_mssa(g, model.sigma, rho=rho_wh, ell=cfg.ell)
        sweep_m.append(OrderedDict(
            shift=shift, correlation=_target_correlation(s, 1.0),
            criterion=s.criterion, nu=s.nu,
        ))
        if shift % 5 == 0:
            for k in range(L):
                sweep_w.append(OrderedDict(shift=shift, lag=k, weight=s.b[0, k]))
    sweep_metrics = pd.DataFrame(sweep_m)
    sweep_weights = pd.DataFrame(sweep_w)

    summary = OrderedDict(
        ht_wh=rep_wh.holding_time,
        corr_wh=rep_wh.correlation,
        acf1_wh=rep_wh.acf1,
        rms2_wh=float(table.loc[0, "rms_second_diff"]),
        ht_ssa_smooth=sol_smooth.holding_time,
        corr_ssa_smooth=_target_correlation(sol_smooth, tv),
        rms2_ssa_smooth=float(table.loc[1, "rms_second_diff"]),
        nu_ssa_smooth=sol_smooth.nu,
        ht_ssa_corr=sol_corr.holding_time,
        corr_ssa_corr=_target_correlation(sol_corr, tv),
        rms2_ssa_corr=float(table.loc[2, "rms_second_diff"]),
        nu_ssa_corr=sol_corr.nu,
        sample_ht_wh=float(table.loc[0, "sample_ht"]),
        sample_corr_wh=float(table.loc[0, "sample_correlation"]),
        sample_ht_ssa_smooth=float(table.loc[1, "sample_ht"]),
        sample_corr_ssa_smooth=float(table.loc[1, "sample_correlation"]),
        sample_ht_ssa_corr=float(table.loc[2, "sample_ht"]),
        sample_corr_ssa_corr=float(table.loc[2, "sample_correlation"]),
    )

    files = [
        _write_csv(table, out / "table.csv"),
        _write_csv(weights, out / "weights.csv"),
        _write_csv(sweep_metrics, out / "sweep_metrics.csv"),
        _write_csv(sweep_weights, out / "sweep_weights.csv"),
        _write_summary(summary, out / "summary.csv"),
    ]
    files.append(write_svg(
        out / "weights.svg",
        {"wh midpoint": b_wh, "matched smoothness": sol_smooth.b[0],
         "matched correlation": sol_corr.b[0]},
        title="smoothing filter weights (lag 0..%d)" % (L - 1),
        x=lags,
    ))
    picks = [s for s in (0, -25, -50, -75, -half) if -half <= s <= 0]
    by_shift = {s: np.array([r["weight"] for r in sweep_w if r["shift"] == s])
                for s in picks if any(r["shift"] == s for r in sweep_w)}
    if by_shift:
        files.append(write_svg(
            out / "sweep.svg",
            {"shift %d" % s: w for s, w in by_shift.items()},
            title="weights while the aim point moves to the edge",
            x=lags,
        ))
    files.append(write_svg(
        out / "sweep_correlation.svg",
        {"correlation": sweep_metrics["correlation"].to_numpy()},
        title="target correlation vs aim-point shift",
        x=sweep_metrics["shift"].to_numpy(dtype=float),
    ))
    return {"summary": summary,
            "tables": {"table": table, "weights": weights,
                       "sweep_metrics": sweep_metrics},
            "files": files}


# ---------------------------------------------------------------------------
# var3-smooth: concurrent signal extraction in a three-series system


def run_var3_smooth(cfg, out_dir):
    """Extract each series of a VAR system in real time under per-series
    holding-time constraints, and verify the expected numbers on one
    simulated path.
    """
    out = _outdir(out_dir)
    model = cfg.require_model()
    n = model.n_series
    L, delta = cfg.length, cfg.delta
    hts = _per_output(cfg.ht, n, "[filter] ht")
    target = allpass_shift(cfg.horizon, n)
    xi = _expansion_for(model, L, delta, target.first_lag)

    # exact data second moments for the expected holding time of the raw series
    S = xi.coeffs
    sig = np.asarray(model.sigma, dtype=float)
    G0 = np.einsum("kij,jl,kml->im", S, sig, S)
    G1 = np.einsum("kij,jl,kml->im", S[1:], sig, S[:-1])
    data_acf = np.diag(G1) / np.diag(G0)

    x = simulate(model, cfg.samples, seed=cfg.seed)
    rows, w_rows, summary = [], [], OrderedDict()
    ys, sols = [], []
    for i in range(n):
        gamma = _gamma_window(target.select_output(i), xi, L, delta)
        sol = solve_mssa(gamma, model.sigma, ht=hts[i], ell=cfg.ell)
        rep = expected_metrics(sol.b, model.sigma, target_conv=gamma)
        B = _data_weights(sol.b, xi)
        y = apply_filter(B, x)[:, 0]
        z = x[L - 1 :, i]
        emp = empirical_metrics(y, z)
        emp_data = empirical_metrics(x[:, i])
        rows.append(OrderedDict(
            series="x%d" % (i + 1),
            sa_expected=rep.sign_accuracy, sa_sample=emp.sign_accuracy,
            corr_expected=rep.correlation, corr_sample=emp.correlation,
            ht_constraint=sol.holding_time, ht_sample=emp.holding_time,
            ht_data_expected=ht_from_acf(data_acf[i]),
            ht_data_sample=emp_data.holding_time,
        ))
        for j in range(n):
            for k in range(L):
                w_rows.append(OrderedDict(
                    target=i, series=j, lag=k,
                    innovation_weight=sol.b[j, k],
                    data_weight=B[k, 0, j],
                ))
        tag = "_%d" % (i + 1)
        summary["sa" + tag] = rep.sign_accuracy
        summary["corr" + tag] = rep.correlation
        summary["ht_constraint" + tag] = sol.holding_time
        summary["ht_data" + tag] = ht_from_acf(data_acf[i])
        summary["nu" + tag] = sol.nu
        summary["sample_sa" + tag] = emp.sign_accuracy
        summary["sample_corr" + tag] = emp.correlation
        summary["sample_ht" + tag] = emp.holding_time
        summary["sample_ht_data" + tag] = emp_data.holding_time
        ys.append(y)
        sols.append(sol)

    table = pd.DataFrame(rows)
    weights = pd.DataFrame(w_rows)
    n_show = min(300, ys[0].size)
    o_cols = OrderedDict(t=np.arange(L - 1, L - 1 + n_show))
    for i in range(n):
        o_cols["x%d" % (i + 1)] = x[L - 1 : L - 1 + n_show, i]
        o_cols["y%d" % (i + 1)] = ys[i][:n_show]
    outputs = pd.DataFrame(o_cols)

    files = [
        _write_csv(table, out / "table.csv"),
        _write_csv(weights, out / "weights.csv"),
        _write_csv(outputs, out / "outputs.csv"),
        _write_summary(summary, out / "summary.csv"),
    ]
    n_fig = min(150, n_show)
    files.append(write_svg(
        out / "outputs.svg",
        {"x1": x[L - 1 : L - 1 + n_fig, 0], "extracted": ys[0][:n_fig]},
        title="series 1 and its real-time extraction",
        x=np.arange(n_fig),
    ))
    B0 = _data_weights(sols[0].b, xi)
    show = min(L, 40)
    files.append(write_svg(
        out / "weights.svg",
        {"on x%d" % (j + 1): B0[:show, 0, j] for j in range(n)},
        title="extraction weights, target x1",
        x=np.arange(show),
    ))
    return {"summary": summary,
            "tables": {"table": table, "weights": weights},
            "files": files}


# ---------------------------------------------------------------------------
# indpro-nowcast: trend nowcasting on monthly production data


def _load_nowcast_frame(cfg, fetch_data):
    if fetch_data:
        return fetch_series(("INDPRO", "CLI"))
    data = cfg.data
    p_ind = data.get("indpro") or cfgmod.bundled_data_path("indpro.csv")
    p_cli = data.get("cli") or cfgmod.bundled_data_path("cli.csv")
    return load_csv([p_ind, p_cli], names=["INDPRO", "CLI"])


def _nowcast_paths(x, filters, g_fwd, L):
    """Aligned predictor and target paths on a data matrix.

    ``g_fwd`` are the target taps rewritten as a causal filter on the
    first series (future taps folded in by shifting), built so that
    ``len(g_fwd) - 1 - lead == L - 1``; predictor and target paths then
    share the index mapping ``k -> t = k + L - 1`` and only need a
    common tail cut.
    """
    ys = {name: apply_filter(B, x)[:, 0] for name, B in filters.items()}
    z = apply_filter(g_fwd, x[:, :1])[:, 0]
    n = z.size
    return {name: y[:n] for name, y in ys.items()}, z


def run_indpro_nowcast(cfg, out_dir, fetch_data=False):
    """Nowcast the trend of monthly industrial production growth.

    Expected (model-implied) performance is computed for four
    predictors -- a causal penalised smoother, a single-series
    constrained filter, a two-series constrained filter and the
    unconstrained MSE filter -- then checked on a long simulated path
    of the two-series model and finally on the bundled (or downloaded)
    monthly data, with moving-block bootstrap standard errors.
    """
    out = _outdir(out_dir)
    model_bi = cfg.require_model()
    if model_bi.n_series != 2:
        raise ValidationError("indpro-nowcast needs a bivariate [model]")
    uni_tab = cfg.raw.get("model_uni")
    if uni_tab is None:
        raise ValidationError("indpro-nowcast needs a [model_uni] section")
    model_uni = cfgmod.parse_model(uni_tab)
    if model_uni.n_series != 1:
        raise ValidationError("[model_uni] must be a single-series model")
    if cfg.constraint_mode() != "ht":
        raise ValidationError("indpro-nowcast needs an [filter] ht constraint")
    ht_c = cfg.ht[0]
    L, lam = cfg.length, cfg.lam

    # -- expected performance under both models --------------------------
    trend = hp_two_sided(lam, TREND_TAPS)
    taps = trend.weights[:, 0, 0]
    w = np.zeros((TREND_TAPS, 1, 2))
    w[:, 0, 0] = taps
    tgt_bi = TargetSpec(w, first_lag=trend.first_lag, name="trend(x1)")

    xi_bi = _expansion_for(model_bi, L, 0, tgt_bi.first_lag)
    gamma_bi = _gamma_window(tgt_bi, xi_bi, L)
    tv_bi = _target_variance(tgt_bi, xi_bi, model_bi.sigma)
    sol_bi = solve_mssa(gamma_bi, model_bi.sigma, ht=ht_c, ell=cfg.ell)
    rep_mse_bi = expected_metrics(gamma_bi, model_bi.sigma,
                                  target_conv=gamma_bi, target_var=tv_bi)

    hpc = hp_concurrent(lam, L)
    B_hpc = np.zeros((L, 1, 2))
    B_hpc[:, 0, 0] = hpc.weights[:, 0, 0]
    conv_hpc = convolve(B_hpc, xi_bi, out_len=L)
    rep_hpc_bi = expected_metrics(conv_hpc[:, 0, :].T, model_bi.sigma,
                                  target_conv=gamma_bi, target_var=tv_bi)

    xi_uni = _expansion_for(model_uni, L, 0, trend.first_lag)
    gamma_uni = _gamma_window(trend, xi_uni, L)
    tv_uni = _target_variance(trend, xi_uni, model_uni.sigma)
    sol_uni = solve_mssa(gamma_uni, model_uni.sigma, ht=ht_c, ell=cfg.ell)
    rep_mse_uni = expected_metrics(gamma_uni, model_uni.sigma,
                                   target_conv=gamma_uni, target_var=tv_uni)
    conv_hpc_uni = convolve(hpc.weights, xi_uni, out_len=L)
    rep_hpc_uni = expected_metrics(conv_hpc_uni[:, 0, :].T, model_uni.sigma,
                                   target_conv=gamma_uni, target_var=tv_uni)

    expected = pd.DataFrame([
        OrderedDict(model="bivariate", predictor="hp-concurrent",
                    correlation=rep_hpc_bi.correlation,
                    holding_time=rep_hpc_bi.holding_time, acf1=rep_hpc_bi.acf1),
        OrderedDict(model="bivariate", predictor="constrained",
                    correlation=_target_correlation(sol_bi, tv_bi),
                    holding_time=sol_bi.holding_time, acf1=sol_bi.acf1),
        OrderedDict(model="bivariate", predictor="mse",
                    correlation=rep_mse_bi.correlation,
                    holding_time=rep_mse_bi.holding_time, acf1=rep_mse_bi.acf1),
        OrderedDict(model="univariate", predictor="hp-concurrent",
                    correlation=rep_hpc_uni.correlation,
                    holding_time=rep_hpc_uni.holding_time, acf1=rep_hpc_uni.acf1),
        OrderedDict(model="univariate", predictor="constrained",
                    correlation=_target_correlation(sol_uni, tv_uni),
                    holding_time=sol_uni.holding_time, acf1=sol_uni.acf1),
        OrderedDict(model="univariate", predictor="mse",
                    correlation=rep_mse_uni.correlation,
                    holding_time=rep_mse_uni.holding_time, acf1=rep_mse_uni.acf1),
    ])

    summary = OrderedDict(
        biv_hpc_cor=rep_hpc_bi.correlation, biv_hpc_ht=rep_hpc_bi.holding_time,
        biv_mssa_cor=_target_correlation(sol_bi, tv_bi),
        biv_mssa_ht=sol_bi.holding_time,
        biv_mse_cor=rep_mse_bi.correlation, biv_mse_ht=rep_mse_bi.holding_time,
        uni_hpc_cor=rep_hpc_uni.correlation, uni_hpc_ht=rep_hpc_uni.holding_time,
        uni_hpc_acf1=rep_hpc_uni.acf1,
        uni_ssa_cor=_target_correlation(sol_uni, tv_uni),
        uni_ssa_ht=sol_uni.holding_time,
        uni_mse_cor=rep_mse_uni.correlation, uni_mse_ht=rep_mse_uni.holding_time,
        uni_mse_acf1=rep_mse_uni.acf1,
        target_var_biv=tv_bi, target_var_uni=tv_uni,
    )

    # -- data-space filters ----------------------------------------------
    B_mssa = _data_weights(sol_bi.b, xi_bi)
    B_mse = _data_weights(gamma_bi, xi_bi)
    B_uni = np.zeros((L, 1, 2))
    B_uni[:, :, :1] = _data_weights(sol_uni.b, xi_uni)
    filters = OrderedDict([("hp-concurrent", B_hpc), ("ssa", B_uni),
                           ("mssa", B_mssa), ("mse", B_mse)])

    # -- sampled check of the two-series model ---------------------------
    # simulated target: the full two-sided trend, computed where the
    # window fits
    g_full = np.zeros((TREND_TAPS, 1, 1))
    g_full[:, 0, 0] = taps
    xsim = simulate(model_bi, cfg.samples, seed=cfg.seed)
    sim_filters = OrderedDict((k, v) for k, v in filters.items() if k != "ssa")
    ys_sim, z_sim = _nowcast_paths(xsim, sim_filters, g_full, L)
    model_rows = []
    for name in sim_filters:
        emp = empirical_metrics(ys_sim[name], z_sim)
        model_rows.append(OrderedDict(
            predictor=name, kind="sample",
            correlation=emp.correlation, holding_time=emp.holding_time))
        key = {"hp-concurrent": "hpc", "mssa": "mssa", "mse": "mse"}[name]
        summary["sim_%s_cor" % key] = emp.correlation
        summary["sim_%s_ht" % key] = emp.holding_time
    for name, cor, ht in (
        ("hp-concurrent", rep_hpc_bi.correlation, rep_hpc_bi.holding_time),
        ("mssa", _target_correlation(sol_bi, tv_bi), sol_bi.holding_time),
        ("mse", rep_mse_bi.correlation, rep_mse_bi.holding_time),
    ):
        model_rows.append(OrderedDict(predictor=name, kind="expected",
                                      correlation=cor, holding_time=ht))
    table_model = pd.DataFrame(model_rows)

    files = [
        _write_csv(expected, out / "expected.csv"),
        _write_csv(table_model, out / "table_model.csv"),
    ]

    # -- monthly data ------------------------------------------------------
    tables = {"expected": expected, "table_model": table_model}
    if not cfg.data.get("expected_only", False):
        frame = _load_nowcast_frame(cfg, fetch_data)
        t_frame = trim_outliers(log_diff_standardize(frame), 5.0)
        T = t_frame.n_obs
        lead = 30  # how far past t the sample target may look
        if T < L + lead + 24:
            raise DataError(
                "need at least %d monthly observations after differencing, got %d"
                % (L + lead + 24, T))
        lags, ccf = cross_correlation(t_frame, "INDPRO", "CLI", 12)
        peak = int(lags[np.lexsort((np.abs(lags), -ccf))[0]])
        ccf_df = pd.DataFrame(OrderedDict(lag=lags, ccf=ccf))

        # sample target: trend taps restricted to what the vintage can
        # see (lead months past t), renormalised
        g = taps[TREND_TAPS // 2 - lead :]
        g = g / g.sum()
        x = t_frame.values.to_numpy(dtype=float)
        ys, z = _nowcast_paths(x, filters, g[:, None, None], L)
        # drop the first aligned point so the evaluation starts once L
        # full months of history are behind the filters
        sl = slice(1, z.size)
        dates = t_frame.values.index[L : T - lead]
        n_eval = z.size - 1

        sample_rows = []
        for p_i, name in enumerate(filters):
            y_e, z_e = ys[name][sl], z[sl]
            emp = empirical_metrics(y_e, z_e)
            se_cor, se_ht = _bootstrap_ses(y_e, z_e,
                                           seed=[cfg.seed, 101 + p_i])
            sample_rows.append(OrderedDict(
                predictor=name, correlation=emp.correlation,
                correlation_se=se_cor, holding_time=emp.holding_time,
                holding_time_se=se_ht, sign_accuracy=emp.sign_accuracy,
            ))
            key = {"hp-concurrent": "hpc", "ssa": "ssa",
                   "mssa": "mssa", "mse": "mse"}[name]
            summary["data_cor_%s" % key] = emp.correlation
            summary["data_se_cor_%s" % key] = se_cor
            summary["data_ht_%s" % key] = emp.holding_time
            summary["data_se_ht_%s" % key] = se_ht
        table_sample = pd.DataFrame(sample_rows)

        comp = OrderedDict(date=[d.date().isoformat() for d in dates])
        comp["target"] = z[sl]
        for name in filters:
            comp[name.replace("-", "_")] = ys[name][sl]
        nowcasts = pd.DataFrame(comp)

        y1 = apply_filter(B_mssa[:, :, :1], x[:, :1])[: z.size, 0]
        y2 = apply_filter(B_mssa[:, :, 1:], x[:, 1:])[: z.size, 0]
        components = pd.DataFrame(OrderedDict(
            date=[d.date().isoformat() for d in dates],
            mssa=ys["mssa"][sl], from_indpro=y1[sl], from_cli=y2[sl],
        ))

        w_rows = []
        for name, B in filters.items():
            for j in range(2):
                if not np.any(B[:, 0, j]):
                    continue
                for k in range(L):
                    w_rows.append(OrderedDict(
                        predictor=name, series=("INDPRO", "CLI")[j],
                        lag=k, weight=B[k, 0, j]))
        weights = pd.DataFrame(w_rows)

        summary["ccf_peak_lag"] = peak
        summary["n_eval"] = n_eval
        summary["n_obs"] = T
        summary["clip_indpro"] = t_frame.clip_counts.get("INDPRO", 0)
        summary["clip_cli"] = t_frame.clip_counts.get("CLI", 0)

        files += [
            _write_csv(table_sample, out / "table_sample.csv"),
            _write_csv(nowcasts, out / "nowcasts.csv"),
            _write_csv(components, out / "components.csv"),
            _write_csv(ccf_df, out / "ccf.csv"),
            _write_csv(weights, out / "weights.csv"),
        ]
        tables.update(table_sample=table_sample, nowcasts=nowcasts,
                      components=components, ccf=ccf_df, weights=weights)

        tail = min(240, n_eval)
        xf = _year_fraction(dates[-tail:])
        files.append(write_svg(
            out / "nowcasts.svg",
            {"target": z[sl][-tail:],
             "hp concurrent": ys["hp-concurrent"][sl][-tail:],
             "two-series": ys["mssa"][sl][-tail:],
             "mse": ys["mse"][sl][-tail:]},
            title="trend nowcasts, last %d months" % tail, x=xf,
        ))
        files.append(write_svg(
            out / "components.svg",
            {"total": ys["mssa"][sl][-tail:], "from INDPRO": y1[sl][-tail:],
             "from CLI": y2[sl][-tail:]},
            title="two-series nowcast split by input", x=xf,
        ))
        files.append(write_svg(
            out / "ccf.svg", {"ccf": ccf},
            title="cross-correlation INDPRO vs CLI lead", x=lags.astype(float),
        ))
        show = min(L, 60)
        files.append(write_svg(
            out / "weights.svg",
            {"mssa on INDPRO": B_mssa[:show, 0, 0],
             "mssa on CLI": B_mssa[:show, 0, 1],
             "mse on INDPRO": B_mse[:show, 0, 0],
             "mse on CLI": B_mse[:show, 0, 1]},
            title="nowcast filter weights", x=np.arange(show),
        ))

    files.append(_write_summary(summary, out / "summary.csv"))
    return {"summary": summary, "tables": tables, "files": files}


# ---------------------------------------------------------------------------
# replicate-paper: run everything and diff against the reference tables


def _expected_table(experiment):
    from importlib import resources

    fname = experiment.replace("-", "_") + ".csv"
    ref = resources.files("mssa") / "data" / "expected" / fname
    if not ref.is_file():
        raise ValidationError("no reference table for experiment %r" % experiment)
    return pd.read_csv(ref)


def run_replicate_paper(out_dir, seed=None, samples=None):
    """Run the four shipped experiments and diff their summaries against
    the bundled reference tables.

    Each reference row carries a tolerance and a comparison kind
    (``abs`` or ``rel``).  Rows outside tolerance are flagged
    ``DIVERGES``; a few are flagged by design because the reference
    values stem from unrounded source-model coefficients, while the
    computed values are exact for the coefficients shipped here (see
    the ``note`` column).
    """
    out = _outdir(out_dir)
    names = ("var1-forecast", "wh-smooth", "var3-smooth", "indpro-nowcast")
    rows, results, files = [], {}, []
    for name in names:
        cfg = cfgmod.bundled_config(name)
        if seed is not None:
            cfg.seed = seed
        if samples is not None:
            cfg.samples = samples
        res = RUNNERS[name](cfg, out / name.replace("-", "_"))
        results[name] = res
        files += res["files"]
        summ = res["summary"]
        exp = _expected_table(name)
        for _, r in exp.iterrows():
            q = str(r["quantity"])
            ref = float(r["reference"])
            tol = float(r["tolerance"])
            kind = str(r["kind"])
            note = "" if pd.isna(r.get("note")) else str(r.get("note"))
            if q not in summ:
                rows.append(OrderedDict(
                    experiment=name, quantity=q, computed=np.nan,
                    reference=ref, tolerance=tol, kind=kind,
                    status="missing", note=note))
                continue
            comp = float(summ[q])
            lim = tol if kind == "abs" else tol * abs(ref)
            status = "ok" if abs(comp - ref) <= lim else "DIVERGES"
            rows.append(OrderedDict(
                experiment=name, quantity=q, computed=comp, reference=ref,
                tolerance=tol, kind=kind, status=status, note=note))
    report = pd.DataFrame(rows)
    files.append(_write_csv(report, out / "replication_report.csv"))
    counts = report["status"].value_counts()
    summary = OrderedDict(
        rows_checked=int(len(report)),
        rows_ok=int(counts.get("ok", 0)),
        rows_diverging=int(counts.get("DIVERGES", 0)),
        rows_missing=int(counts.get("missing", 0)),
    )
    files.append(_write_summary(summary, out / "summary.csv"))
    return {"summary": summary, "tables": {"report": report},
            "results": results, "files": files}


RUNNERS = {
    "solve": run_solve,
    "var1-forecast": run_var1_forecast,
    "wh-smooth": run_wh_smooth,
    "var3-smooth": run_var3_smooth,
    "indpro-nowcast": run_indpro_nowcast,
}
