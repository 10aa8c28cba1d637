//! Acceptance criteria. Prints one PASS/FAIL line per criterion with the
//! measured values indented beneath it.
//!
//! Exits 0 regardless of the outcome so `cargo test` stays green; set
//! `QWB_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.
//! `QWB_ACCEPTANCE_ONLY=3,7` runs a subset.

use std::time::{Duration, Instant};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use qwb_cli::{parse_config, run_sweep};
use qwb_core::bridge::{solve, BridgeModel, FourSpin};
use qwb_core::circuit::{
    balance_flux, derived_frequencies_couplings, flux_window, simulate_circuit, CircuitSpec, TWO_PI,
};
use qwb_core::fit::fit_dip;
use qwb_core::krylov::GmresOptions;
use qwb_core::linalg::{dagger, hermiticity_defect, trace, trace_distance};
use qwb_core::liouville::{evolve, evolve_to_steady, DensityMatrix};
use qwb_core::metrology::{fisher_report, max_qfi_search, standard_projectors};
use qwb_core::model::{NoiseSpec, QwbParams, ShadowSpec};
use qwb_core::observables::{interface_populations, spin_current};
use qwb_core::optimize::{argmax, argmin, linspace, refine_maximum, refine_minimum};
use qwb_core::ratemodel::{
    build_w, derived_scales, markov_steady_state, population_lorentzian, product_of_rates_vector, RateMode, RateSet,
};
use qwb_core::robustness::{dip_location_study, DisorderSpec, SweepWindow};
use qwb_core::shadow::{overlap_correlation, shadow_bridge, shadow_row};

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok  " } else { "MISS" }));
    }

    fn error(&mut self, what: &str, e: impl std::fmt::Display) {
        self.check(false, format!("{what}: {e}"));
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

fn p_minus(p: &QwbParams, jx: f64) -> qwb_core::Result<f64> {
    Ok(interface_populations(&solve(&p.with_jx(jx))?.rho, p)?.p_minus)
}

fn current(p: &QwbParams, jc: f64) -> qwb_core::Result<f64> {
    let q = p.with_jc(jc);
    Ok(spin_current(&solve(&q)?.rho, &q)?.spin_current)
}

fn lambda(p: &QwbParams) -> f64 {
    derived_scales(p).lambda.value().expect("n > 0")
}

/// Dip location and floor share one refined sweep.
fn dip_sweep() -> (qwb_core::Result<qwb_core::optimize::Extremum>, Duration) {
    let p = QwbParams::default();
    let (jx0, l) = (derived_scales(&p).jx0, lambda(&p));
    let t = Instant::now();
    let r = refine_minimum(|jx| p_minus(&p, jx), jx0 - 5.0 * l, jx0 + 5.0 * l, 201);
    (r, t.elapsed())
}

fn c1(dip: &(qwb_core::Result<qwb_core::optimize::Extremum>, Duration)) -> Outcome {
    let mut o = Outcome::new();
    let l = lambda(&QwbParams::default());
    match &dip.0 {
        Ok(m) => o.check(
            (m.x - 0.9875).abs() <= l / 2.0,
            format!("argmin Jx = {:.6}, |offset| = {:.2e} <= Lambda/2 = {:.4}", m.x, (m.x - 0.9875).abs(), l / 2.0),
        ),
        Err(e) => o.error("sweep", e),
    }
    o.check(dip.1 < Duration::from_secs(10), format!("runtime {:.2?} < 10 s", dip.1));
    o
}

fn c2(dip: &(qwb_core::Result<qwb_core::optimize::Extremum>, Duration)) -> Outcome {
    let mut o = Outcome::new();
    let p = QwbParams::default();
    let floor = p.n / (3.0 * p.n + 1.0);
    match &dip.0 {
        Ok(m) => {
            o.check((m.value - floor).abs() <= 0.05, format!("min P(E-) = {:.5}, target {floor:.3} +- 0.05", m.value))
        }
        Err(e) => o.error("sweep", e),
    }
    o
}

fn c3() -> Outcome {
    let mut o = Outcome::new();
    let p = QwbParams::default().with_h2(0.5);
    let (jx0, l) = (derived_scales(&p).jx0, lambda(&p));
    let xs = linspace(jx0 - 5.0 * l, jx0 + 5.0 * l, 201);
    let mut worst: f64 = 0.0;
    for &x in &xs {
        match (p_minus(&p, x), population_lorentzian(&p, x)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
            (Err(e), _) | (_, Err(e)) => {
                return {
                    o.error("h2 = 0.5 sweep", e);
                    o
                }
            }
        }
    }
    o.check(worst <= 0.05, format!("h2 = 0.5: max |P_full - P_lorentzian| = {worst:.4} <= 0.05"));
    for h2 in [0.25, 0.5, 1.0] {
        let p = QwbParams::default().with_h2(h2);
        let (jx0, l) = (derived_scales(&p).jx0, lambda(&p));
        let xs = linspace(jx0 - 5.0 * l, jx0 + 5.0 * l, 201);
        let ys: qwb_core::Result<Vec<f64>> = xs.iter().map(|&x| p_minus(&p, x)).collect();
        match ys.and_then(|ys| fit_dip(&xs, &ys, false)) {
            Ok(f) => o.check(
                within(f.model.width, l, 0.2),
                format!(
                    "h2 = {h2}: fitted width {:.5} vs Lambda {l:.5} ({:+.1}%)",
                    f.model.width,
                    100.0 * (f.model.width / l - 1.0)
                ),
            ),
            Err(e) => o.error(&format!("h2 = {h2} fit"), e),
        }
    }
    o
}

fn max_qfi(h2: f64) -> qwb_core::Result<(f64, f64, f64)> {
    let p = QwbParams::default().with_h2(h2);
    let d = derived_scales(&p);
    let l = d.lambda.value().unwrap();
    let m = max_qfi_search(&FourSpin::new(p), d.jx0 - 6.0 * l, d.jx0 + 6.0 * l, 25)?;
    let closed = 4.0 * d.n_of_n.value().unwrap() / (l * l);
    Ok((m.best.value, closed, m.best.x))
}

fn c4() -> Outcome {
    let mut o = Outcome::new();
    let mut maxima = Vec::new();
    for h2 in [0.5, 0.25, 0.125] {
        match max_qfi(h2) {
            Ok((q, closed, x)) => {
                if h2 >= 0.25 {
                    o.check(
                        within(q, closed, 0.3),
                        format!(
                            "h2 = {h2}: max QFI {q:.4e} at Jx = {x:.5} vs 4N/Lambda^2 = {closed:.4e} ({:+.1}%)",
                            100.0 * (q / closed - 1.0)
                        ),
                    );
                } else {
                    o.check(q > 1e5, format!("h2 = {h2}: max QFI {q:.4e} > 1e5"));
                }
                maxima.push(q);
            }
            Err(e) => o.error(&format!("h2 = {h2}"), e),
        }
    }
    if maxima.len() == 3 {
        for (k, label) in [(0, "0.25/0.5"), (1, "0.125/0.25")] {
            let ratio = maxima[k + 1] / maxima[k];
            o.check(within(ratio, 4.0, 0.25), format!("QFI ratio h2 = {label}: {ratio:.3}, target 4 +- 25%"));
        }
    }
    o
}

fn c5() -> Outcome {
    let mut o = Outcome::new();
    let p = QwbParams::default();
    let d = derived_scales(&p);
    let l = lambda(&p);
    match refine_maximum(|jc| current(&p, jc), d.jc0 - 5.0 * l, d.jc0 + 5.0 * l, 201) {
        Ok(m) => {
            o.check(
                (m.x - d.jc0).abs() <= l / 2.0,
                format!(
                    "argmax Jc = {:.6} vs Jc0 = {:.6}, |offset| {:.2e} <= {:.4}",
                    m.x,
                    d.jc0,
                    (m.x - d.jc0).abs(),
                    l / 2.0
                ),
            );
            o.check(
                within(m.value, d.j_zero, 0.3),
                format!(
                    "peak current {:.5} vs J0 = {:.5} ({:+.1}%)",
                    m.value,
                    d.j_zero,
                    100.0 * (m.value / d.j_zero - 1.0)
                ),
            );
            // the floor is the baseline of a Lorentzian fitted to the full-model peak
            let xs = linspace(d.jc0 - 10.0 * l, d.jc0 + 10.0 * l, 201);
            let ys: qwb_core::Result<Vec<f64>> = xs.iter().map(|&x| current(&p, x)).collect();
            match ys.and_then(|ys| fit_dip(&xs, &ys, true)) {
                Ok(f) => {
                    let ratio = m.value / f.model.tail_value;
                    let target = d.current_ratio.value().unwrap();
                    o.check(
                        within(ratio, target, 0.4),
                        format!(
                            "peak/floor = {:.5}/{:.4e} = {ratio:.1} vs {target:.1} ({:+.1}%)",
                            m.value,
                            f.model.tail_value,
                            100.0 * (ratio / target - 1.0)
                        ),
                    );
                }
                Err(e) => o.error("floor fit", e),
            }
        }
        Err(e) => o.error("current sweep", e),
    }
    o
}

fn params_strategy() -> impl Strategy<Value = QwbParams> {
    (
        (0.5..1.5f64, 0.8..1.2f64, 0.8..1.2f64, 2.0..30.0f64, 0.0..30.0f64),
        (0.0..2.0f64, 0.0..5.0f64, 0.2..5.0f64, 0.5..20.0f64, 0.05..3.0f64),
    )
        .prop_map(|((j, jx, jc, j23, h1), (h2, omega, gamma1, gamma4, n))| QwbParams {
            j,
            jx,
            jc,
            j23,
            h1,
            h2,
            omega,
            gamma1,
            gamma4,
            n,
        })
}

fn density_strategy() -> impl Strategy<Value = Array2<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 256).prop_map(|v| {
        let a = Array2::from_shape_vec((16, 16), v.into_iter().map(|(x, y)| C64::new(x, y)).collect()).unwrap();
        let m = a.dot(&dagger(&a));
        let t = trace(&m);
        m.mapv(|z| z / t)
    })
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn c6() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let mut report = |name: &str, r: Result<(), String>| match r {
        Ok(()) => o.check(true, name.to_string()),
        Err(e) => o.check(false, format!("{name}: {e}")),
    };
    let r = runner(24).run(&(params_strategy(), density_strategy()), |(p, rho)| {
        let out = FourSpin::new(p).lindbladian_at(p.jx).unwrap().superoperator().apply(&rho);
        prop_assert!(trace(&out).norm() <= 1e-10);
        prop_assert!(hermiticity_defect(&out) <= 1e-10);
        Ok(())
    });
    report("trace and Hermiticity preservation (24 random states)", r.map_err(|e| e.to_string()));
    let r = runner(32).run(&(params_strategy(), 0.0..100.0f64), |(p, w)| {
        let s = FourSpin::new(p).steady_state_at(p.jx).unwrap();
        prop_assert!(s.rho.min_eigenvalue().unwrap() >= -1e-8, "rho_ss not PSD");
        let c = spin_current(&s.rho, &p).unwrap();
        prop_assert!((c.spin_current - c.hot_influx).abs() <= 1e-8, "current imbalance");
        let moved = FourSpin::new(QwbParams { omega: w, ..p }).steady_state_at(p.jx).unwrap();
        prop_assert!(trace_distance(s.rho.matrix(), moved.rho.matrix()).unwrap() <= 1e-8, "omega dependence");
        Ok(())
    });
    report("rho_ss PSD, current balance <= 1e-8, omega invariance <= 1e-8 (32 points)", r.map_err(|e| e.to_string()));
    let rates = prop::array::uniform8(-6.0..1.0f64)
        .prop_map(|e| RateSet::from_array(e.map(|x| 10f64.powf(x)), RateMode::Asymptotic));
    let r = runner(100).run(&rates, |r| {
        let w = build_w(&r);
        for s in w.column_sums() {
            prop_assert!(s.abs() <= 1e-14);
        }
        let q = markov_steady_state(&w).map_err(|e| TestCaseError::fail(e.to_string()))?.as_array();
        let prod = product_of_rates_vector(&w);
        let total: f64 = prod.iter().sum();
        let scale = prod.iter().cloned().fold(0.0, f64::max) / total;
        for (a, b) in q.iter().zip(prod) {
            prop_assert!((a - b / total).abs() <= 1e-10 * scale);
        }
        Ok(())
    });
    report("W column sums, Markov vs product-of-rates <= 1e-10 (100 rate sets)", r.map_err(|e| e.to_string()));
    let el = t.elapsed();
    o.check(el < Duration::from_secs(30), format!("runtime {el:.2?} < 30 s"));
    o
}

fn c7() -> Outcome {
    let mut o = Outcome::new();
    let base = QwbParams { j23: 1.5, h1: 0.0, h2: 0.5, gamma1: 2.0, gamma4: 2.0, n: 1.0, ..Default::default() };
    let points = [
        base,
        QwbParams { jx: 0.8, ..base },
        QwbParams { jc: 1.3, n: 0.5, ..base },
        QwbParams { h2: 1.0, gamma1: 3.0, ..base },
        QwbParams { omega: 2.0, h1: 1.0, n: 2.0, ..base },
    ];
    for (k, p) in points.iter().enumerate() {
        let r = (|| {
            let l = FourSpin::new(*p).lindbladian_at(p.jx)?;
            let near = evolve_to_steady(&l, &DensityMatrix::maximally_mixed(16), 1e4, 5e-9)?;
            let settled = evolve(&l, &near.rho, 400.0)?;
            trace_distance(solve(p)?.rho.matrix(), settled.rho.matrix())
        })();
        match r {
            Ok(d) => o.check(d <= 1e-8, format!("point {k}: trace distance {d:.2e} <= 1e-8")),
            Err(e) => o.error(&format!("point {k}"), e),
        }
    }
    o
}

fn c8() -> Outcome {
    let mut o = Outcome::new();
    let p = QwbParams::default();
    let d = derived_scales(&p);
    let l = lambda(&p);
    let model = FourSpin::new(p);
    let projectors = match standard_projectors(&p, &model.layout()) {
        Ok(x) => x,
        Err(e) => {
            return {
                o.error("projectors", e);
                o
            }
        }
    };
    let (mut hier, mut worst_gap): (bool, f64) = (true, 0.0);
    for jx in linspace(d.jx0 - 2.0 * l, d.jx0 + 2.0 * l, 21) {
        match fisher_report(&model, jx, &projectors, None) {
            Ok(f) => {
                for (_, c) in &f.cfi {
                    hier &= *c <= f.qfi * (1.0 + 1e-3);
                }
                worst_gap = worst_gap.max(1.0 - f.cfi("E_minus").unwrap() / f.qfi);
            }
            Err(e) => {
                return {
                    o.error(&format!("Jx = {jx}"), e);
                    o
                }
            }
        }
    }
    o.check(hier, "QFI >= CFI for E_minus, up_2, identity at 21 points across Jx0 +- 2 Lambda".into());
    o.check(worst_gap <= 0.1, format!("CFI(E_minus) within {:.2}% of QFI across the dip (<= 10%)", 100.0 * worst_gap));
    match max_qfi_search(&model, d.jx0 - 6.0 * l, d.jx0 + 6.0 * l, 25)
        .and_then(|m| fisher_report(&model, m.best.x, &projectors, None))
    {
        Ok(f) => {
            let (up, em) = (f.cfi("up_2").unwrap(), f.cfi("E_minus").unwrap());
            o.check(
                up < em,
                format!("at the QFI maximum Jx = {:.5}: CFI(up_2) = {up:.4e} < CFI(E_minus) = {em:.4e}", f.jx),
            );
        }
        Err(e) => o.error("QFI maximum", e),
    }
    o
}

fn c9() -> Outcome {
    let mut o = Outcome::new();
    let base = QwbParams { h2: 0.0, ..Default::default() };
    let d = DisorderSpec { samples: 10, seed: 0, ..Default::default() };
    let noise = NoiseSpec::with_time(4e4);
    match dip_location_study(&base, &d, &noise, &SweepWindow::default()) {
        Ok(samples) => {
            let worst = samples.iter().map(|s| (s.jc_min - s.params.jx).abs()).fold(0.0, f64::max);
            o.check(
                samples.len() == 10 && worst <= 0.005,
                format!("{} samples, max |Jc_min - Jx| = {worst:.2e} <= 0.005", samples.len()),
            );
        }
        Err(e) => o.error("study", e),
    }
    let text = "target = robustness\nseed = 7\n[disorder]\nsamples = 3\npoints = 41\n";
    let r = (|| -> Result<bool, Box<dyn std::error::Error>> {
        let dir = tempfile::tempdir()?;
        let mut outputs = Vec::new();
        for (k, threads) in [1usize, 1, 2].into_iter().enumerate() {
            let mut cfg = parse_config(text)?;
            cfg.threads = threads;
            let path = dir.path().join(format!("run{k}.csv"));
            run_sweep(&cfg, &path, false)?;
            outputs.push(std::fs::read(&path)?);
        }
        Ok(outputs.windows(2).all(|w| w[0] == w[1]))
    })();
    match r {
        Ok(same) => o.check(same, "byte-identical CSV across reruns and thread counts (seed 7)".into()),
        Err(e) => o.error("rerun", e),
    }
    o
}

fn two_figures(x: f64) -> (f64, String) {
    let exp = x.abs().log10().floor() as i32 - 1;
    let mag = 10f64.powi(exp);
    let r = (x / mag).round() * mag;
    (r, format!("{r:.*}", (-exp).max(0) as usize))
}

fn c10() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let spec = CircuitSpec::default();
    let d = derived_frequencies_couplings(&spec);
    let phi = balance_flux(&spec);
    let el = t.elapsed();
    for (name, value, target) in [
        ("omega1", d.omega1 / TWO_PI / 1e9, 6.3),
        ("omega23", d.omega23 / TWO_PI / 1e9, 5.7),
        ("omega4", d.omega4 / TWO_PI / 1e9, 6.2),
        ("J12", d.j12 / TWO_PI / 1e6, 39.0),
        ("J23", d.j23 / TWO_PI / 1e6, 270.0),
    ] {
        let unit = if name.starts_with('J') { "MHz" } else { "GHz" };
        let (rounded, shown) = two_figures(value);
        o.check(
            (rounded - target).abs() <= 1e-9 * target,
            format!("{name} = 2pi x {value:.4} {unit}, two figures {shown} vs {target}"),
        );
    }
    match phi {
        Ok(x) => o.check(
            (x - 0.24946955).abs() <= 1e-6,
            format!("Phi_C0 = {x:.8} Phi0 vs 0.24946955 (diff {:.2e}, tolerance 1e-6)", x - 0.24946955),
        ),
        Err(e) => o.error("balance flux", e),
    }
    o.check(el < Duration::from_secs(1), format!("runtime {el:.2?} < 1 s"));
    o
}

fn c11() -> Outcome {
    let mut o = Outcome::new();
    let base = CircuitSpec::default();
    let center = match balance_flux(&base) {
        Ok(c) => c,
        Err(e) => {
            return {
                o.error("balance flux", e);
                o
            }
        }
    };
    let phis = flux_window(center, 0.002, 41);
    let t = Instant::now();
    let mut widths = Vec::new();
    for t_coh in [50e-6, 100e-6] {
        let spec = CircuitSpec { coherence_time: Some(t_coh), ..base };
        match simulate_circuit(&spec, &phis, &GmresOptions::default()) {
            Ok(points) => {
                let ps: Vec<f64> = points.iter().map(|p| p.p_psi_minus).collect();
                let ks: Vec<f64> = points.iter().map(|p| p.heat_current_watts).collect();
                let (i, j) = (argmin(&ps), argmax(&ks));
                let interior = |k: usize| k > 0 && k + 1 < phis.len();
                let us = t_coh * 1e6;
                o.check(
                    interior(i) && ps[i] < ps[0].min(ps[ps.len() - 1]),
                    format!(
                        "T = {us} us: P(Psi-) dip at Phi = {:.5} ({:.4} vs edges {:.4}, {:.4})",
                        phis[i],
                        ps[i],
                        ps[0],
                        ps[ps.len() - 1]
                    ),
                );
                o.check(
                    interior(j) && ks[j] > ks[0].max(ks[ks.len() - 1]),
                    format!("T = {us} us: heat current peak at Phi = {:.5} ({:.3e} W)", phis[j], ks[j]),
                );
                match fit_dip(&phis, &ps, false) {
                    Ok(f) => {
                        o.details.push(format!("     T = {us} us: fitted dip FWHM {:.3e} Phi0", f.model.width));
                        widths.push(f.model.width);
                    }
                    Err(e) => o.error(&format!("T = {us} us fit"), e),
                }
            }
            Err(e) => o.error(&format!("T = {} us", t_coh * 1e6), e),
        }
    }
    if widths.len() == 2 {
        o.check(
            widths[1] < widths[0],
            format!("dip sharpens: FWHM {:.3e} (100 us) < {:.3e} (50 us)", widths[1], widths[0]),
        );
    }
    let el = t.elapsed();
    o.check(el < Duration::from_secs(15 * 60), format!("runtime {el:.1?} < 15 min at truncation {:?}", base.trunc));
    o
}

fn c12() -> Outcome {
    let mut o = Outcome::new();
    let p = QwbParams::default();
    let d = derived_scales(&p);
    let l = lambda(&p);
    let r = shadow_bridge(&p, &ShadowSpec::new(0.01).unwrap()).and_then(|m| {
        linspace(0.95, 1.03, 41).into_iter().map(|jx| shadow_row(&m, jx, false)).collect::<qwb_core::Result<Vec<_>>>()
    });
    match r.map(|rows| overlap_correlation(&rows)) {
        Ok(Some(c)) => o.check(c >= 0.95, format!("J2S = 0.01: correlation of P(E-) and P(up_S) = {c:.4} >= 0.95")),
        Ok(None) => o.check(false, "correlation undefined".into()),
        Err(e) => o.error("overlap", e),
    }
    let mut best = Vec::new();
    for j2s in [0.05, 0.02, 0.01] {
        let r = shadow_bridge(&p, &ShadowSpec::new(j2s).unwrap()).and_then(|m| {
            linspace(d.jx0 - 2.0 * l, d.jx0 + 2.0 * l, 13)
                .into_iter()
                .map(|jx| shadow_row(&m, jx, true).map(|r| r.cfi_shadow.unwrap()))
                .collect::<qwb_core::Result<Vec<_>>>()
        });
        match r {
            Ok(c) => best.push(c.into_iter().fold(0.0, f64::max)),
            Err(e) => {
                return {
                    o.error(&format!("J2S = {j2s}"), e);
                    o
                }
            }
        }
    }
    o.check(
        best[0] < best[1] && best[1] < best[2],
        format!(
            "max CFI(shadow) over the dip: {:.3e} (0.05) < {:.3e} (0.02) < {:.3e} (0.01)",
            best[0], best[1], best[2]
        ),
    );
    o
}

fn main() {
    let only: Option<Vec<usize>> =
        std::env::var("QWB_ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("QWB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let wanted = |k: usize| only.as_ref().is_none_or(|o| o.contains(&k));

    let dip = if wanted(1) || wanted(2) { Some(dip_sweep()) } else { None };
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "dip location", Box::new(|| c1(dip.as_ref().unwrap()))),
        (2, "dip floor", Box::new(|| c2(dip.as_ref().unwrap()))),
        (3, "Lorentzian dip validation", Box::new(c3)),
        (4, "max-QFI scaling", Box::new(c4)),
        (5, "current balance point", Box::new(c5)),
        (6, "conservation and structure suite", Box::new(c6)),
        (7, "oracle equivalence", Box::new(c7)),
        (8, "metrology hierarchy", Box::new(c8)),
        (9, "robustness under disorder", Box::new(c9)),
        (10, "circuit derived quantities", Box::new(c10)),
        (11, "circuit simulation", Box::new(c11)),
        (12, "shadow readout", Box::new(c12)),
    ];
    let mut failed = 0;
    for (k, name, run) in criteria {
        if !wanted(k) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        println!("{} [{k:>2}] {name} ({:.1?})", if out.pass { "PASS" } else { "FAIL" }, t.elapsed());
        for d in &out.details {
            println!("       {d}");
        }
        failed += usize::from(!out.pass);
    }
    println!("acceptance: {failed} criteria failed");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
