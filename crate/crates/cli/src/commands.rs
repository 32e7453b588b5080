// SPDX-License-Identifier: Apache-2.0

//! Subcommand implementations. Each returns the run with its outputs recorded.

use std::collections::BTreeMap;

use monitored_search::analysis::{
    self, ep_asymptotic_pt, ep_envelope_bounds, fit_exponent, geometric_grid, predicted_alpha, query_complexity, reset_exponent_change, validity_bound_nstar, AlphaMode, FitResult, ScalingFamily,
};
use monitored_search::dynamics::{
    fidelity_curve, optimal_reset_scan, reset_search_time, search_time_with, ClickSampler, ResetSchedule, SearchMode,
};
use monitored_search::model::{classify_regime, exceptional_point, matrix_elements, ModelParams};
use monitored_search::oracle::{evolve_full, reduction_check, trajectory_monte_carlo, Integrator};
use monitored_search::spectral::{eigenvalues, eigenvector_components, overlaps, slow_fast};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::output::Run;
use crate::{
    grid_count, triple, CliError, IntegratorKind, McArgs, OracleArgs, PhaseArgs, PhaseMode, PtArgs, PtMethod, QueryArgs,
    ResetRule, ResetScanArgs, SpectrumArgs, TauArgs, TauMode,
};

fn linear_grid(spec: &[f64]) -> Result<Vec<f64>, CliError> {
    let spec = triple(spec)?;
    let count = grid_count(spec[2])?;
    if count == 1 {
        return Ok(vec![spec[0]]);
    }
    Ok((0..count).map(|i| spec[0] + (spec[1] - spec[0]) * i as f64 / (count - 1) as f64).collect())
}

fn positive_geometric(spec: &[f64]) -> Result<Vec<f64>, CliError> {
    let spec = triple(spec)?;
    if !(spec[0] > 0.0 && spec[1] > 0.0) {
        return Err(CliError::Usage("geometric grid bounds must be positive".into()));
    }
    Ok(geometric_grid(spec[0], spec[1], grid_count(spec[2])?))
}

fn single_size(sizes: &[usize]) -> Result<usize, CliError> {
    match sizes {
        [n] => Ok(*n),
        _ => Err(CliError::Usage("this mode needs exactly one N".into())),
    }
}

fn fast_period(p: &ModelParams<f64>) -> f64 {
    1.0 / slow_fast(&eigenvalues(&matrix_elements(p))).fast.im.abs()
}

#[derive(Serialize)]
struct SpectrumRow {
    n: usize,
    gamma: f64,
    kappa: f64,
    re_lambda_plus: f64,
    im_lambda_plus: f64,
    re_lambda_minus: f64,
    im_lambda_minus: f64,
    re_lambda_slow: f64,
    im_lambda_slow: f64,
    re_lambda_fast: f64,
    im_lambda_fast: f64,
    re_v_plus: f64,
    im_v_plus: f64,
    re_v_minus: f64,
    im_v_minus: f64,
    o_plus: f64,
    o_minus: f64,
    re_o_cross: f64,
    im_o_cross: f64,
    near_ep: bool,
}

fn spectrum_row(p: &ModelParams<f64>) -> SpectrumRow {
    let m = matrix_elements(p);
    let sd = eigenvalues(&m);
    let sf = slow_fast(&sd);
    let nan = f64::NAN;
    let (vp, vm) = eigenvector_components(&m, &sd)
        .map(|(a, b)| ((a.re, a.im), (b.re, b.im)))
        .unwrap_or(((nan, nan), (nan, nan)));
    let (op, om, ox) = overlaps(&m, p.n())
        .map(|o| (o.o_plus, o.o_minus, (o.o_cross.re, o.o_cross.im)))
        .unwrap_or((nan, nan, (nan, nan)));
    SpectrumRow {
        n: p.n(),
        gamma: p.gamma(),
        kappa: p.kappa(),
        re_lambda_plus: sd.lambda_plus.re,
        im_lambda_plus: sd.lambda_plus.im,
        re_lambda_minus: sd.lambda_minus.re,
        im_lambda_minus: sd.lambda_minus.im,
        re_lambda_slow: sf.slow.re,
        im_lambda_slow: sf.slow.im,
        re_lambda_fast: sf.fast.re,
        im_lambda_fast: sf.fast.im,
        re_v_plus: vp.0,
        im_v_plus: vp.1,
        re_v_minus: vm.0,
        im_v_minus: vm.1,
        o_plus: op,
        o_minus: om,
        re_o_cross: ox.0,
        im_o_cross: ox.1,
        near_ep: sd.near_ep,
    }
}

pub fn spectrum(a: &SpectrumArgs, mut run: Run) -> Result<Run, CliError> {
    let sizes = a.sizes.sizes()?;
    let gammas = a.gamma_sweep.as_deref().map(linear_grid).transpose()?;
    let kappas = a.kappa_sweep.as_deref().map(linear_grid).transpose()?;
    let mut jobs = Vec::new();
    for &n in &sizes {
        let base = a.model.params(n)?;
        let (g_ep, k_ep) = if a.ep_units { exceptional_point::<f64>(n)? } else { (1.0, 1.0) };
        let gs = gammas.as_ref().map_or(vec![base.gamma()], |g| g.iter().map(|x| x * g_ep).collect());
        let ks = kappas.as_ref().map_or(vec![base.kappa()], |k| k.iter().map(|x| x * k_ep).collect());
        for &g in &gs {
            for &k in &ks {
                jobs.push((n, g, k));
            }
        }
    }
    let eps_w = a.model.epsilon_w;
    let rows = jobs
        .par_iter()
        .map(|&(n, g, k)| Ok(spectrum_row(&ModelParams::with_target_energy(n, g, k, eps_w)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    run.write_csv("spectrum.csv", "spectrum", &rows)?;
    Ok(run)
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

pub fn pt(a: &PtArgs, mut run: Run) -> Result<Run, CliError> {
    let p = a.model.params(a.n)?;
    let t_max = a.t_max.unwrap_or(10.0 * (a.n as f64).sqrt());
    if !(t_max >= a.t_min && a.t_min >= 0.0) {
        return Err(CliError::Usage("need 0 <= t-min <= t-max".into()));
    }
    let times: Vec<f64> = match a.step {
        Some(h) if h > 0.0 => {
            let count = ((t_max - a.t_min) / h).floor() as usize + 1;
            (0..count).map(|i| a.t_min + h * i as f64).collect()
        }
        Some(_) => return Err(CliError::Usage("--step must be positive".into())),
        None if a.points == 1 => vec![a.t_min],
        None if a.points == 0 => return Err(CliError::Usage("--points must be positive".into())),
        None => (0..a.points).map(|i| a.t_min + (t_max - a.t_min) * i as f64 / (a.points - 1) as f64).collect(),
    };
    let schedule = a.reset_period.map(ResetSchedule::new).transpose()?;
    let mut header = vec!["t", "p", "f0", "f1"];
    let mut rows: Vec<Vec<f64>> = match a.method {
        PtMethod::Closed => fidelity_curve(&p, &times, schedule.as_ref())?
            .into_iter()
            .map(|f| vec![f.t, f.p, f.f0, f.f1])
            .collect(),
        PtMethod::FullRk4 | PtMethod::FullAdaptive => {
            if schedule.is_some() {
                return Err(CliError::Usage("resetting is only available with --method closed".into()));
            }
            let integrator = match a.method {
                PtMethod::FullRk4 => Integrator::FixedRk4 { dt: a.dt },
                _ => Integrator::default_adaptive(),
            };
            evolve_full(&p, &times, integrator)?
                .into_iter()
                .map(|s| vec![s.t, s.p_full, s.f0_full, 1.0 - s.p_full])
                .collect()
        }
    };
    if a.ep_bounds {
        let kappa_bar = p.kappa() * (a.n as f64).sqrt();
        header.extend(["ep_lower", "ep_upper", "ep_asymptotic"]);
        for row in rows.iter_mut() {
            let (lo, hi) = ep_envelope_bounds(a.n, kappa_bar, row[0])?;
            row.extend([lo, hi, ep_asymptotic_pt(a.n, kappa_bar, row[0])?]);
        }
    }
    let mut records = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    records.extend(rows.iter().map(|r| r.iter().map(|&x| fmt(x)).collect()));
    run.write_records("pt.csv", "pt", &records)?;
    Ok(run)
}

#[derive(Serialize)]
struct TauRow {
    n: usize,
    gamma: f64,
    kappa: f64,
    tau: f64,
    period: Option<f64>,
    tau_r: Option<f64>,
    epochs: Option<u64>,
}

pub fn tau(a: &TauArgs, mut run: Run) -> Result<Run, CliError> {
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(CliError::Usage("epsilon must lie in (0, 1)".into()));
    }
    let sizes = a.sizes.sizes()?;
    let mode = match a.mode {
        TauMode::Click => SearchMode::Click,
        TauMode::Occupation => SearchMode::TargetOccupation,
    };
    if a.reset != ResetRule::None && a.mode == TauMode::Occupation {
        return Err(CliError::Usage("resetting is defined for the click fidelity only".into()));
    }
    let period_of = |p: &ModelParams<f64>| -> Result<Option<f64>, CliError> {
        match a.reset {
            ResetRule::None => Ok(None),
            ResetRule::Fast => Ok(Some(fast_period(p))),
            ResetRule::Period => a.period.map(Some).ok_or_else(|| CliError::Usage("--reset period needs --period".into())),
            ResetRule::Beta => a
                .beta
                .map(|b| Some((p.n() as f64).powf(b)))
                .ok_or_else(|| CliError::Usage("--reset beta needs --beta".into())),
        }
    };
    let rows = sizes
        .par_iter()
        .map(|&n| {
            let p = a.model.params(n)?;
            let tau = search_time_with(&p, a.epsilon, mode)?;
            let period = period_of(&p)?;
            let reset = period.map(|t| reset_search_time(&p, t, a.epsilon, true)).transpose()?;
            Ok(TauRow {
                n,
                gamma: p.gamma(),
                kappa: p.kappa(),
                tau,
                period,
                tau_r: reset.map(|r| r.tau_r),
                epochs: reset.map(|r| r.epochs),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    run.write_csv("tau.csv", "tau", &rows)?;
    let fit = |pts: Vec<(f64, f64)>| -> Option<FitResult> { fit_exponent(&pts).ok() };
    let fit_tau = fit(rows.iter().map(|r| (r.n as f64, r.tau)).collect());
    let fit_tau_r = if a.reset == ResetRule::None {
        None
    } else {
        fit(rows.iter().filter_map(|r| r.tau_r.map(|t| (r.n as f64, t))).collect())
    };
    let (regime, alpha, alpha_reset) = if a.model.is_family() {
        let m = &a.model;
        let label = classify_regime(m.r_bar, m.s, m.gamma_bar);
        (
            Some(label.regime.as_str()),
            predicted_alpha(m.r_bar, m.s, m.gamma_bar, AlphaMode::NoReset).ok(),
            predicted_alpha(m.r_bar, m.s, m.gamma_bar, AlphaMode::ResetFast).ok(),
        )
    } else {
        (None, None, None)
    };
    run.write_json(
        "fit.json",
        "fit",
        &json!({
            "epsilon": a.epsilon,
            "fit_tau": fit_tau,
            "fit_tau_r": fit_tau_r,
            "regime": regime,
            "predicted_alpha": alpha,
            "predicted_alpha_reset_fast": alpha_reset,
        }),
    )?;
    Ok(run)
}

pub fn phase_diagram(a: &PhaseArgs, mut run: Run) -> Result<Run, CliError> {
    let r_grid = linear_grid(&a.r_grid)?;
    let s_grid = linear_grid(&a.s_grid)?;
    let mode = match a.mode {
        PhaseMode::NoReset => AlphaMode::NoReset,
        PhaseMode::ResetFast => AlphaMode::ResetFast,
    };
    let pd = analysis::phase_diagram(&r_grid, &s_grid, a.gamma_bar, mode)?;
    run.write_csv("cells.csv", "phase-cells", &pd.cells)?;
    let mut records = vec![std::iter::once("s\\r_bar".to_string()).chain(r_grid.iter().map(|&r| fmt(r))).collect::<Vec<_>>()];
    for (i, &s) in s_grid.iter().enumerate() {
        let row = &pd.cells[i * r_grid.len()..(i + 1) * r_grid.len()];
        records.push(std::iter::once(fmt(s)).chain(row.iter().map(|c| fmt(c.alpha))).collect());
    }
    run.write_records("alpha_matrix.csv", "phase-matrix", &records)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &pd.cells {
        *counts.entry(c.regime.as_str()).or_default() += 1;
    }
    let grover: Vec<[f64; 2]> = pd.cells.iter().filter(|c| c.grover_or_better).map(|c| [c.r_bar, c.s]).collect();
    run.write_json(
        "metadata.json",
        "metadata",
        &json!({
            "mode": a.mode,
            "gamma_bar": a.gamma_bar,
            "r_grid": r_grid,
            "s_grid": s_grid,
            "regime_counts": counts,
            "worse_than_classical_cells": pd.cells.iter().filter(|c| c.worse_than_classical).count(),
            "alpha_le_half_cells": grover,
        }),
    )?;
    Ok(run)
}


#[derive(Serialize)]
struct PeriodRow {
    period: f64,
    tau_r: Option<f64>,
    ratio: Option<f64>,
    tau: f64,
}

#[derive(Serialize)]
struct BetaRow {
    beta: f64,
    alpha: f64,
    alpha_reset: f64,
    change: f64,
}

pub fn reset_scan(a: &ResetScanArgs, mut run: Run) -> Result<Run, CliError> {
    let sizes = a.sizes.sizes()?;
    if let Some(spec) = &a.betas {
        if !a.model.is_family() {
            return Err(CliError::Usage("exponent scans need the scaling form (no --gamma/--kappa)".into()));
        }
        let m = &a.model;
        let family = ScalingFamily::new(m.gamma_bar, m.kappa_bar, m.r_bar, m.s);
        let betas = linear_grid(spec)?;
        let rows = betas
            .iter()
            .map(|&beta| {
                let c = reset_exponent_change(&family, beta, a.epsilon, &sizes)?;
                Ok(BetaRow { beta, alpha: c.alpha, alpha_reset: c.alpha_reset, change: c.change })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        run.write_csv("reset_beta.csv", "reset-beta", &rows)?;
        return Ok(run);
    }
    let mut periods = a.periods.as_deref().map(positive_geometric).transpose()?.unwrap_or_default();
    periods.extend(&a.period_list);
    if periods.is_empty() {
        return Err(CliError::Usage("empty period grid (use --periods, --period-list or --betas)".into()));
    }
    let p = a.model.params(single_size(&sizes)?)?;
    let scan = optimal_reset_scan(&p, a.epsilon, &periods)?;
    let rows: Vec<PeriodRow> = scan
        .points
        .iter()
        .map(|pt| PeriodRow { period: pt.period, tau_r: pt.tau_r, ratio: pt.ratio, tau: scan.tau })
        .collect();
    run.write_csv("reset_scan.csv", "reset-scan", &rows)?;
    run.write_json(
        "summary.json",
        "summary",
        &json!({ "tau": scan.tau, "best_period": scan.best_period, "best_tau_r": scan.best_tau_r }),
    )?;
    Ok(run)
}

pub fn oracle_check(a: &OracleArgs, mut run: Run) -> Result<Run, CliError> {
    let p = a.model.params(a.n)?;
    let t_max = a.t_max.unwrap_or(4.0 * (a.n as f64).sqrt());
    if a.points < 2 || !(t_max > 0.0) {
        return Err(CliError::Usage("need at least two points and a positive t-max".into()));
    }
    let times: Vec<f64> = (0..a.points).map(|i| t_max * i as f64 / (a.points - 1) as f64).collect();
    let integrator = match a.integrator {
        IntegratorKind::Adaptive => Integrator::Adaptive { atol: a.atol, rtol: a.rtol },
        IntegratorKind::Rk4 => Integrator::FixedRk4 { dt: a.dt },
    };
    let r = reduction_check(&p, &times, integrator)?;
    run.write_json(
        "report.json",
        "report",
        &json!({
            "n": a.n,
            "gamma": p.gamma(),
            "kappa": p.kappa(),
            "epsilon_w": p.epsilon_w(),
            "integrator": a.integrator,
            "samples": r.samples,
            "max_dev_p": r.max_dev_p,
            "max_dev_f0": r.max_dev_f0,
            "max_conservation_residual": r.max_conservation_residual,
        }),
    )?;
    Ok(run)
}

#[derive(Serialize)]
struct HistRow {
    bin_lo: f64,
    bin_hi: f64,
    count: u64,
    empirical_fraction: f64,
    analytic_fraction: f64,
}

#[derive(Serialize)]
struct F1Row {
    t: f64,
    f1_empirical: f64,
    f1_analytic: f64,
    standard_error: f64,
}

pub fn mc(a: &McArgs, mut run: Run) -> Result<Run, CliError> {
    if a.bins == 0 {
        return Err(CliError::Usage("--bins must be positive".into()));
    }
    let p = a.model.params(a.n)?;
    let schedule = a.reset_period.map(ResetSchedule::new).transpose()?;
    let sampler = ClickSampler::new(&p, schedule.as_ref())?;
    let res = trajectory_monte_carlo(&p, schedule.as_ref(), a.trajectories, a.seed)?;
    run.add_seed(a.seed);
    let mut finite: Vec<f64> = res.click_times.iter().copied().filter(|t| t.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let t_max = match a.t_max {
        Some(t) if t > 0.0 => t,
        Some(_) => return Err(CliError::Usage("--t-max must be positive".into())),
        None => match finite.last() {
            Some(_) => finite[((finite.len() - 1) as f64 * 0.99) as usize].max(f64::MIN_POSITIVE),
            None => return Err(CliError::Usage("no trajectory clicked; set --t-max".into())),
        },
    };
    let total = a.trajectories as f64;
    let hist = res.histogram(a.bins, t_max);
    let width = t_max / a.bins as f64;
    let hist_rows: Vec<HistRow> = hist
        .iter()
        .enumerate()
        .map(|(k, &count)| {
            let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
            HistRow {
                bin_lo: lo,
                bin_hi: hi,
                count,
                empirical_fraction: count as f64 / total,
                analytic_fraction: sampler.survival(lo) - sampler.survival(hi),
            }
        })
        .collect();
    let f1_rows: Vec<F1Row> = (0..=a.bins)
        .map(|k| {
            let t = k as f64 * width;
            let f1 = 1.0 - sampler.survival(t);
            F1Row { t, f1_empirical: res.empirical_f1(t), f1_analytic: f1, standard_error: res.standard_error(f1) }
        })
        .collect();
    run.write_csv("histogram.csv", "histogram", &hist_rows)?;
    run.write_csv("f1.csv", "f1", &f1_rows)?;
    let ks = res.ks_statistic(|t| 1.0 - sampler.survival(t));
    run.write_json(
        "summary.json",
        "summary",
        &json!({
            "trajectories": a.trajectories,
            "seed": a.seed,
            "never_clicked": a.trajectories - finite.len(),
            "t_max": t_max,
            "ks_statistic": ks,
            "ks_limit_5pct": 1.36 / total.sqrt(),
            "ks_limit_1pct": 1.63 / total.sqrt(),
        }),
    )?;
    Ok(run)
}

pub fn query(a: &QueryArgs, mut run: Run) -> Result<Run, CliError> {
    let row = query_complexity(a.r_bar, a.s, a.reset)?;
    let n_star = validity_bound_nstar(a.r_bar, a.s, a.gamma_bar, a.kappa_bar, a.dt0)?;
    run.write_json(
        "query.json",
        "query",
        &json!({
            "r_bar": a.r_bar,
            "s": a.s,
            "reset": a.reset,
            "row": row,
            "dt0": a.dt0,
            "n_star": n_star,
        }),
    )?;
    Ok(run)
}
