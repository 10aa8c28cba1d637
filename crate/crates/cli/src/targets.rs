//! One runner per target. Grid points are evaluated on a worker pool and
//! gathered back into grid order.

use qwb_core::bridge::{BridgeModel, FourSpin};
use qwb_core::circuit::{balance_flux, derived_frequencies_couplings, simulate_point, CircuitPoint, CircuitSpec};
use qwb_core::krylov::GmresOptions;
use qwb_core::metrology::{fisher_report, max_qfi_search, standard_projectors};
use qwb_core::model::ShadowSpec;
use qwb_core::observables::{interface_populations, spin_current};
use qwb_core::ratemodel::{
    build_w, current_lorentzian, derived_scales, full_steady_state_vector, golden_rule_rates_exact,
    markov_steady_state, n_function, population_lorentzian, qfi_approx, rate_model_current, rates_asymptotic, RateSet,
    Scale,
};
use qwb_core::robustness::{
    dip_for_sample, dip_width, protocol_warnings, sample_disordered_params, summarize, DisorderSpec,
};
use qwb_core::shadow::{overlap_correlation, shadow_bridge, shadow_row, ShadowRow};
use qwb_core::{QwbError, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::{SweepConfig, Target};
use crate::output::{Cell, PlotSpec, Row, Table};

pub struct TargetOutput {
    pub table: Table,
    pub summary: Option<Table>,
    pub plot: PlotSpec,
    /// Source of the plot data when it is not `table`.
    pub plot_source: Option<Table>,
    /// Warnings recorded in the CSV header.
    pub notes: Vec<String>,
}

/// Whole-run failures: the sweep cannot start.
pub fn run_target(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    match cfg.target {
        Target::PopulationVsJx => population_vs_jx(cfg, pool),
        Target::PopulationHeatmapJxH2 => heatmap(cfg, pool),
        Target::QfiVsJx => qfi_vs_jx(cfg, pool),
        Target::MaxQfiVsH2 => max_qfi_vs_h2(cfg, pool),
        Target::CurrentVsJc => current_vs_jc(cfg, pool),
        Target::CurrentVsJx => current_vs_jx(cfg, pool),
        Target::NFunction => Ok(n_function_table(cfg)),
        Target::Robustness => robustness(cfg, pool),
        Target::Circuit => circuit(cfg, pool),
        Target::RatesReport => Ok(rates_report(cfg)),
        Target::ShadowStudy => shadow_study(cfg, pool),
    }
}

fn par_map<T: Sync, R: Send>(pool: &ThreadPool, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    pool.install(|| items.par_iter().map(f).collect())
}

fn axis(cfg: &SweepConfig, key: &str) -> Vec<f64> {
    cfg.grid(key).map(|g| g.values()).unwrap_or_default()
}

/// Every (series, x) pair, series outermost.
fn pairs(outer: &[f64], inner: &[f64]) -> Vec<(f64, f64)> {
    outer.iter().flat_map(|&a| inner.iter().map(move |&b| (a, b))).collect()
}

fn row(keys: Vec<Cell>, width: usize, r: Result<Vec<Cell>>) -> Row {
    match r {
        Ok(mut cells) => {
            let mut all = keys;
            all.append(&mut cells);
            Row::ok(all)
        }
        Err(e) => Row::failed(keys, width, e.code()),
    }
}

/// An optional column: NA without failing the row.
fn soft(r: Result<f64>) -> Cell {
    r.ok().into()
}

fn population_vs_jx(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let p = cfg.params;
    let model = FourSpin::with_noise(p, cfg.noise);
    let cols = ["jx", "p_downdown", "p_minus", "p_plus", "p_upup", "leakage", "coherence", "p_minus_lorentzian"];
    let mut table = Table::new(&cols);
    table.rows = par_map(pool, &axis(cfg, "jx"), |&jx| {
        row(
            vec![jx.into()],
            cols.len() - 1,
            (|| {
                let s = model.steady_state_at(jx)?;
                let q = interface_populations(&s.rho, &p)?;
                Ok(vec![
                    q.p_downdown.into(),
                    q.p_minus.into(),
                    q.p_plus.into(),
                    q.p_upup.into(),
                    q.leakage.into(),
                    q.coherence.into(),
                    soft(population_lorentzian(&p, jx)),
                ])
            })(),
        )
    });
    Ok(TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("jx", &["p_minus", "p_minus_lorentzian"]),
        notes: vec![],
    })
}

fn heatmap(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let cols = ["h2", "jx", "p_minus"];
    let mut table = Table::new(&cols);
    let pts = pairs(&axis(cfg, "h2"), &axis(cfg, "jx"));
    table.rows = par_map(pool, &pts, |&(h2, jx)| {
        let p = cfg.params.with_h2(h2);
        row(
            vec![h2.into(), jx.into()],
            1,
            (|| {
                let s = FourSpin::with_noise(p, cfg.noise).steady_state_at(jx)?;
                Ok(vec![interface_populations(&s.rho, &p)?.p_minus.into()])
            })(),
        )
    });
    Ok(TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("jx", &["h2", "p_minus"]).blocks("h2"),
        notes: vec![],
    })
}

fn qfi_vs_jx(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let cols =
        ["h2", "jx", "qfi", "qfi_approx", "cfi_e_minus", "cfi_up_2", "cfi_identity", "fd_step", "richardson_rel"];
    let mut table = Table::new(&cols);
    let pts = pairs(&cfg.series, &axis(cfg, "jx"));
    let rows = par_map(pool, &pts, |&(h2, jx)| {
        let p = cfg.params.with_h2(h2);
        let model = FourSpin::with_noise(p, cfg.noise);
        let mut warn = false;
        let r = row(
            vec![h2.into(), jx.into()],
            cols.len() - 2,
            (|| {
                let projectors = standard_projectors(&p, &model.layout())?;
                let f = fisher_report(&model, jx, &projectors, None)?;
                warn = f.richardson_warning;
                Ok(vec![
                    f.qfi.into(),
                    soft(qfi_approx(&p, jx)),
                    f.cfi("E_minus").into(),
                    f.cfi("up_2").into(),
                    f.cfi("identity").into(),
                    f.fd_step.into(),
                    f.richardson_rel.into(),
                ])
            })(),
        );
        (r, warn)
    });
    let warned = rows.iter().filter(|(_, w)| *w).count();
    table.rows = rows.into_iter().map(|(r, _)| r).collect();
    let notes = if warned > 0 {
        vec![format!("{warned} points changed by more than 5% on halving the finite-difference step")]
    } else {
        vec![]
    };
    Ok(TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("jx", &["h2", "qfi", "qfi_approx", "cfi_e_minus"]).blocks("h2"),
        notes,
    })
}

/// Half-width of the max-QFI search window, in units of Λ.
const MAX_QFI_WINDOW: f64 = 6.0;
const MAX_QFI_POINTS: usize = 25;

fn max_qfi_vs_h2(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let cols = ["h2", "lambda", "jx_max", "qfi_max", "qfi_max_closed_form", "richardson_rel"];
    let mut table = Table::new(&cols);
    let rows = par_map(pool, &axis(cfg, "h2"), |&h2| {
        let p = cfg.params.with_h2(h2);
        let mut notes = Vec::new();
        let r = row(
            vec![h2.into()],
            cols.len() - 1,
            (|| {
                let d = derived_scales(&p);
                let lambda = match d.lambda {
                    Scale::Value(l) if l > 0.0 => l,
                    _ => return Err(QwbError::param("h2", "the dip has zero width")),
                };
                let w = MAX_QFI_WINDOW * lambda;
                let m = max_qfi_search(&FourSpin::with_noise(p, cfg.noise), d.jx0 - w, d.jx0 + w, MAX_QFI_POINTS)?;
                notes = m.warnings.iter().map(|s| format!("h2 = {h2}: {s}")).collect();
                let closed = d.n_of_n.value().map(|nn| 4.0 * nn / (lambda * lambda));
                Ok(vec![lambda.into(), m.best.x.into(), m.best.value.into(), closed.into(), m.richardson_rel.into()])
            })(),
        );
        (r, notes)
    });
    let mut notes = Vec::new();
    for (r, n) in rows {
        table.rows.push(r);
        notes.extend(n);
    }
    Ok(TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("h2", &["qfi_max", "qfi_max_closed_form"]),
        notes,
    })
}

fn current_vs_jc(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let cols = ["jx", "jc", "spin_current", "hot_influx", "current_lorentzian"];
    let mut table = Table::new(&cols);
    let pts = pairs(&cfg.series, &axis(cfg, "jc"));
    table.rows = par_map(pool, &pts, |&(jx, jc)| {
        let p = cfg.params.with_jx(jx).with_jc(jc);
        row(
            vec![jx.into(), jc.into()],
            cols.len() - 2,
            (|| {
                let s = FourSpin::with_noise(p, cfg.noise).steady_state_at(jx)?;
                let c = spin_current(&s.rho, &p)?;
                let base = cfg.params.with_jx(jx);
                Ok(vec![c.spin_current.into(), c.hot_influx.into(), soft(current_lorentzian(&base, jc))])
            })(),
        )
    });
    Ok(TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("jc", &["jx", "spin_current", "current_lorentzian"]).blocks("jx"),
        notes: vec![],
    })
}

fn current_vs_jx(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let cols = ["h2", "jx", "spin_current", "rate_model_current"];
    let mut table = Table::new(&cols);
    let pts = pairs(&cfg.series, &axis(cfg, "jx"));
    table.rows = par_map(pool, &pts, |&(h2, jx)| {
        let p = cfg.params.with_h2(h2);
        row(
            vec![h2.into(), jx.into()],
            2,
            (|| {
                let s = FourSpin::with_noise(p, cfg.noise).steady_state_at(jx)?;
                let c = spin_current(&s.rho, &p.with_jx(jx))?;
                let model =
                    full_steady_state_vector(&p, jx).map(|q| rate_model_current(&rates_asymptotic(&p, jx).rates, &q));
                Ok(vec![c.spin_current.into(), soft(model)])
            })(),
        )
    });
    Ok(TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("jx", &["h2", "spin_current", "rate_model_current"]).blocks("h2"),
        notes: vec![],
    })
}

fn n_function_table(cfg: &SweepConfig) -> TargetOutput {
    let mut table = Table::new(&["n", "n_function"]);
    table.rows = axis(cfg, "n").into_iter().map(|n| Row::ok(vec![n.into(), n_function(n).into()])).collect();
    TargetOutput { table, summary: None, plot_source: None, plot: PlotSpec::new("n", &["n_function"]), notes: vec![] }
}

fn robustness(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let d = DisorderSpec { seed: cfg.seed, ..cfg.disorder };
    d.validate()?;
    let cols = [
        "sample",
        "jx",
        "jc_min",
        "offset",
        "p_min",
        "j23",
        "j24",
        "j34",
        "field0",
        "field1",
        "field2",
        "field3",
        "gamma1",
        "gamma4",
        "n",
        "rejections",
    ];
    let mut table = Table::new(&cols);
    let indices: Vec<usize> = (0..d.samples).collect();
    let samples = par_map(pool, &indices, |&k| {
        sample_disordered_params(&cfg.params, &d, k as u64).and_then(|q| dip_for_sample(&q, k, &cfg.noise, &cfg.window))
    });
    let mut ok = Vec::new();
    let mut curves = Table::new(&["sample", "jc", "p_psi_minus"]);
    for (k, s) in samples.into_iter().enumerate() {
        match s {
            Ok(s) => {
                let q = &s.params;
                table.rows.push(Row::ok(vec![
                    (k as f64).into(),
                    q.jx.into(),
                    s.jc_min.into(),
                    (s.jc_min - q.jx).into(),
                    s.p_min.into(),
                    q.j23.into(),
                    q.j24.into(),
                    q.j34.into(),
                    q.fields[0].into(),
                    q.fields[1].into(),
                    q.fields[2].into(),
                    q.fields[3].into(),
                    q.gamma1.into(),
                    q.gamma4.into(),
                    q.n.into(),
                    (q.rejections as f64).into(),
                ]));
                for (jc, p) in &s.curve {
                    curves.rows.push(Row::ok(vec![(k as f64).into(), (*jc).into(), (*p).into()]));
                }
                ok.push(s);
            }
            Err(e) => table.rows.push(Row::failed(vec![(k as f64).into()], cols.len() - 1, e.code())),
        }
    }
    let sum = summarize(&ok);
    let mut summary = Table::new(&["quantity", "value"]);
    let width = dip_width(&cfg.params, &cfg.noise, &cfg.window).map(|f| f.model.width);
    summary.rows = vec![
        Row::ok(vec![Cell::Text("median_offset".into()), sum.median_offset.into()]),
        Row::ok(vec![Cell::Text("max_abs_offset".into()), sum.max_abs_offset.into()]),
        Row::ok(vec![Cell::Text("samples_ok".into()), (ok.len() as f64).into()]),
        match width {
            Ok(w) => Row::ok(vec![Cell::Text("clean_dip_fwhm".into()), w.into()]),
            Err(e) => Row::failed(vec![Cell::Text("clean_dip_fwhm".into())], 1, e.code()),
        },
    ];
    Ok(TargetOutput {
        table,
        summary: Some(summary),
        plot: PlotSpec::new("jc", &["sample", "p_psi_minus"]).blocks("sample"),
        plot_source: Some(curves),
        notes: protocol_warnings(&cfg.params),
    })
}

fn circuit(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let base = cfg.circuit;
    let phis = axis(cfg, "phi");
    let cols = ["t", "phi_c", "p_psi_minus", "heat_current_w", "residual"];
    let opts = GmresOptions::default();
    let series: Vec<Vec<Row>> = par_map(pool, &cfg.series, |&t| {
        let spec = CircuitSpec { coherence_time: Some(t), ..base };
        let mut last: Option<CircuitPoint> = None;
        let mut rows = Vec::with_capacity(phis.len());
        for &phi in &phis {
            let guess = last.as_ref().map(|p| p.state.rho.matrix().clone());
            match simulate_point(&CircuitSpec { phi_c: phi, ..spec }, guess.as_ref(), &opts) {
                Ok(pt) => {
                    rows.push(Row::ok(vec![
                        t.into(),
                        phi.into(),
                        pt.p_psi_minus.into(),
                        pt.heat_current_watts.into(),
                        pt.residual.into(),
                    ]));
                    last = Some(pt);
                }
                Err(e) => rows.push(Row::failed(vec![t.into(), phi.into()], 3, e.code())),
            }
        }
        rows
    });
    let mut table = Table::new(&cols);
    table.rows = series.into_iter().flatten().collect();
    let d = derived_frequencies_couplings(&base);
    let mut notes = vec![
        format!(
            "derived: omega1 = {:.6e} rad/s, omega23 = {:.6e} rad/s, omega4 = {:.6e} rad/s",
            d.omega1, d.omega23, d.omega4
        ),
        format!(
            "derived: J12 = {:.6e} rad/s, J23 = {:.6e} rad/s, J24 = {:.6e} rad/s, J34 = {:.6e} rad/s",
            d.j12, d.j23, d.j24, d.j34
        ),
    ];
    match balance_flux(&base) {
        Ok(phi0) => notes.push(format!("balance flux Phi_C0 = {phi0:.10} Phi0")),
        Err(e) => notes.push(format!("balance flux unavailable: {e}")),
    }
    notes.extend(base.warnings()?);
    Ok(TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("phi_c", &["t", "p_psi_minus", "heat_current_w"]).blocks("t"),
        notes,
    })
}

fn rates_report(cfg: &SweepConfig) -> TargetOutput {
    let p = cfg.params;
    let mut table = Table::new(&["quantity", "mode", "value"]);
    let text = |s: &str| Cell::Text(s.to_string());
    let mut push_rates = |mode: &str, r: Result<RateSet>| match r {
        Ok(r) => {
            for (label, v) in RateSet::LABELS.iter().zip(r.as_array()) {
                table.rows.push(Row::ok(vec![text(label), text(mode), v.into()]));
            }
            match markov_steady_state(&build_w(&r)) {
                Ok(q) => {
                    for (label, v) in ["p_downdown", "p_minus", "p_plus", "p_upup"].iter().zip(q.as_array()) {
                        table.rows.push(Row::ok(vec![text(label), text(mode), v.into()]));
                    }
                }
                Err(e) => table.rows.push(Row::failed(vec![text("markov"), text(mode)], 1, e.code())),
            }
        }
        Err(e) => table.rows.push(Row::failed(vec![text("rates"), text(mode)], 1, e.code())),
    };
    push_rates("exact", golden_rule_rates_exact(&p));
    let asym = rates_asymptotic(&p, p.jx);
    push_rates("asymptotic", Ok(asym.rates));
    let d = derived_scales(&p);
    let scales: [(&str, Scale); 12] = [
        ("jx0", Scale::Value(d.jx0)),
        ("jc0", Scale::Value(d.jc0)),
        ("lambda", d.lambda),
        ("eta_sq", Scale::Value(d.eta_sq)),
        ("p0_minus", Scale::Value(d.p0_minus)),
        ("j_zero", Scale::Value(d.j_zero)),
        ("j_inf", d.j_inf),
        ("current_ratio", d.current_ratio),
        ("n_function", d.n_of_n),
        ("k1", d.k1),
        ("k2", d.k2),
        ("k3", Scale::Value(d.k3)),
    ];
    for (name, s) in scales {
        table.rows.push(match s {
            Scale::Value(v) => Row::ok(vec![text(name), text("derived"), v.into()]),
            Scale::Singular(_) => Row::failed(vec![text(name), text("derived")], 1, "singular"),
        });
    }
    TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("quantity", &["value"]),
        notes: asym.warnings,
    }
}

fn shadow_study(cfg: &SweepConfig, pool: &ThreadPool) -> Result<TargetOutput> {
    let cols = ["j2s", "jx", "p_minus", "p_shadow_up", "cfi_shadow", "qfi"];
    let mut table = Table::new(&cols);
    let models =
        cfg.series.iter().map(|&j2s| shadow_bridge(&cfg.params, &ShadowSpec::new(j2s)?)).collect::<Result<Vec<_>>>()?;
    let jxs = axis(cfg, "jx");
    let pts: Vec<(usize, f64)> = (0..models.len()).flat_map(|m| jxs.iter().map(move |&jx| (m, jx))).collect();
    let rows: Vec<(Row, Option<ShadowRow>)> = par_map(pool, &pts, |&(m, jx)| {
        let keys = vec![cfg.series[m].into(), jx.into()];
        match shadow_row(&models[m], jx, true) {
            Ok(r) => (
                Row::ok(
                    [keys, vec![r.p_minus.into(), r.p_shadow_up.into(), r.cfi_shadow.into(), r.qfi.into()]].concat(),
                ),
                Some(r),
            ),
            Err(e) => (Row::failed(keys, 4, e.code()), None),
        }
    });
    let mut notes = Vec::new();
    for (m, chunk) in rows.chunks(jxs.len().max(1)).enumerate() {
        let ok: Vec<ShadowRow> = chunk.iter().filter_map(|(_, r)| *r).collect();
        if let Some(c) = overlap_correlation(&ok) {
            notes.push(format!("J2S = {}: correlation of P(E-) and P(up_S) = {c:.6}", cfg.series[m]));
        }
    }
    table.rows = rows.into_iter().map(|(r, _)| r).collect();
    Ok(TargetOutput {
        table,
        summary: None,
        plot_source: None,
        plot: PlotSpec::new("jx", &["j2s", "p_minus", "p_shadow_up", "cfi_shadow", "qfi"]).blocks("j2s"),
        notes,
    })
}
