//! Sweep configuration: a flat `key = value` format with `[section]` headers
//! and `#` comments.
//!
//! ```text
//! target = qfi_vs_jx
//! threads = 2
//!
//! [params]
//! h2 = 0.25
//!
//! [grid]
//! jx = 0.95, 1.03, 201
//! h2_values = 0.25, 0.5
//! ```
//!
//! Unit suffixes (GHz, MHz, fF, nH) are accepted in `[circuit]` only.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qwb_core::circuit::{energy_from_frequency, CircuitSpec, TWO_PI};
use qwb_core::model::{NoiseSpec, QwbParams};
use qwb_core::robustness::{DisorderSpec, SweepWindow};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("{}{message}", if *.line > 0 { format!("line {line}: ") } else { String::new() })]
pub struct ConfigError {
    /// 1-based; 0 for errors not tied to a line.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    PopulationVsJx,
    PopulationHeatmapJxH2,
    QfiVsJx,
    MaxQfiVsH2,
    CurrentVsJc,
    CurrentVsJx,
    NFunction,
    Robustness,
    Circuit,
    RatesReport,
    ShadowStudy,
}

impl Target {
    pub const ALL: [Target; 11] = [
        Target::PopulationVsJx,
        Target::PopulationHeatmapJxH2,
        Target::QfiVsJx,
        Target::MaxQfiVsH2,
        Target::CurrentVsJc,
        Target::CurrentVsJx,
        Target::NFunction,
        Target::Robustness,
        Target::Circuit,
        Target::RatesReport,
        Target::ShadowStudy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Target::PopulationVsJx => "population_vs_jx",
            Target::PopulationHeatmapJxH2 => "population_heatmap_jx_h2",
            Target::QfiVsJx => "qfi_vs_jx",
            Target::MaxQfiVsH2 => "max_qfi_vs_h2",
            Target::CurrentVsJc => "current_vs_jc",
            Target::CurrentVsJx => "current_vs_jx",
            Target::NFunction => "n_function",
            Target::Robustness => "robustness",
            Target::Circuit => "circuit",
            Target::RatesReport => "rates_report",
            Target::ShadowStudy => "shadow_study",
        }
    }

    /// Grid axes as (key, default) in nesting order, outermost first.
    pub fn axes(&self) -> &'static [(&'static str, Grid)] {
        const JX: Grid = Grid { start: 0.95, stop: 1.03, points: 201 };
        match self {
            Target::PopulationVsJx | Target::QfiVsJx | Target::CurrentVsJx | Target::ShadowStudy => &[("jx", JX)],
            Target::PopulationHeatmapJxH2 => &[
                ("h2", Grid { start: 0.05, stop: 1.5, points: 30 }),
                ("jx", Grid { start: 0.9, stop: 1.05, points: 151 }),
            ],
            Target::MaxQfiVsH2 => &[("h2", Grid { start: 0.125, stop: 1.5, points: 12 })],
            Target::CurrentVsJc => &[("jc", Grid { start: 0.95, stop: 1.05, points: 201 })],
            Target::NFunction => &[("n", Grid { start: 0.01, stop: 20.0, points: 400 })],
            Target::Circuit => &[("phi", Grid { start: 0.248, stop: 0.252, points: 41 })],
            Target::Robustness | Target::RatesReport => &[],
        }
    }

    /// The optional list of curve labels, as (key, default values).
    pub fn series(&self) -> Option<(&'static str, &'static [f64])> {
        match self {
            Target::QfiVsJx | Target::CurrentVsJx => Some(("h2_values", &[0.5])),
            Target::CurrentVsJc => Some(("jx_values", &[1.0])),
            Target::ShadowStudy => Some(("j2s_values", &[0.01])),
            Target::Circuit => Some(("t_values", &[50e-6, 100e-6])),
            _ => None,
        }
    }

    /// Figure panel reproduced by the target.
    pub fn figure(&self) -> &'static str {
        match self {
            Target::PopulationVsJx => "Fig. 2(a)",
            Target::PopulationHeatmapJxH2 => "Fig. 2(b)",
            Target::QfiVsJx => "Fig. 3(a), Fig. S4(a), Fig. S6(a)",
            Target::MaxQfiVsH2 => "Fig. 3(b)",
            Target::CurrentVsJc => "Fig. 3(c)",
            Target::CurrentVsJx => "Fig. S4(c), Fig. S4(d)",
            Target::NFunction => "Fig. S4(b)",
            Target::Robustness => "Fig. 3(d)",
            Target::Circuit => "Fig. 5(b), Fig. 5(c)",
            Target::RatesReport => "rate tables",
            Target::ShadowStudy => "Fig. S6(b), Fig. S6(c)",
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Target::ALL.iter().find(|t| t.name() == s).copied().ok_or_else(|| format!("unknown target `{s}`"))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `points` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        qwb_core::optimize::linspace(self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub target: Target,
    /// Resolved grids, in the order of [`Target::axes`].
    pub grids: Vec<(String, Grid)>,
    pub series: Vec<f64>,
    pub params: QwbParams,
    /// Override keys in the order given, for the CSV header.
    pub overrides: Vec<String>,
    pub noise: NoiseSpec,
    pub disorder: DisorderSpec,
    pub window: SweepWindow,
    pub circuit: CircuitSpec,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub seed: u64,
}

impl SweepConfig {
    pub fn defaults(target: Target) -> Self {
        let params = match target {
            Target::Robustness => QwbParams { h2: 0.0, ..Default::default() },
            _ => QwbParams::default(),
        };
        let noise = match target {
            Target::Robustness => NoiseSpec::default(),
            _ => NoiseSpec::disabled(),
        };
        SweepConfig {
            target,
            grids: target.axes().iter().map(|(k, g)| (k.to_string(), *g)).collect(),
            series: target.series().map(|(_, v)| v.to_vec()).unwrap_or_default(),
            params,
            overrides: Vec::new(),
            noise,
            disorder: DisorderSpec::default(),
            window: SweepWindow::default(),
            circuit: CircuitSpec::default(),
            output: None,
            threads: 1,
            seed: 0,
        }
    }

    pub fn grid(&self, key: &str) -> Option<Grid> {
        self.grids.iter().find(|(k, _)| k == key).map(|(_, g)| *g)
    }

    /// The output path, defaulting to `<target>.csv`.
    pub fn output_path(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.target.name())))
    }
}

const SECTIONS: [&str; 6] = ["", "params", "grid", "noise", "disorder", "circuit"];

struct Value<'a> {
    text: &'a str,
    line: usize,
    in_circuit: bool,
}

const UNITS: [&str; 4] = ["GHz", "MHz", "fF", "nH"];

impl Value<'_> {
    fn split_unit(&self) -> Result<(&str, Option<&'static str>), ConfigError> {
        let t = self.text.trim();
        for u in UNITS {
            if let Some(num) = t.strip_suffix(u) {
                if !self.in_circuit {
                    return Err(err(self.line, format!("unit `{u}` is only allowed in [circuit]")));
                }
                return Ok((num.trim(), Some(u)));
            }
        }
        Ok((t, None))
    }

    fn number(&self) -> Result<f64, ConfigError> {
        let (num, unit) = self.split_unit()?;
        if unit.is_some() {
            return Err(err(self.line, "unexpected unit"));
        }
        parse_f64(num, self.line)
    }

    fn list(&self) -> Result<Vec<f64>, ConfigError> {
        self.text.split(',').map(|s| parse_f64(s.trim(), self.line)).collect()
    }

    fn usize(&self) -> Result<usize, ConfigError> {
        self.text
            .trim()
            .parse()
            .map_err(|_| err(self.line, format!("`{}` is not a non-negative integer", self.text.trim())))
    }

    fn u64(&self) -> Result<u64, ConfigError> {
        self.text
            .trim()
            .parse()
            .map_err(|_| err(self.line, format!("`{}` is not a non-negative integer", self.text.trim())))
    }

    fn bool(&self) -> Result<bool, ConfigError> {
        match self.text.trim() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(err(self.line, format!("`{other}` is not true or false"))),
        }
    }

    fn grid(&self) -> Result<Grid, ConfigError> {
        let parts: Vec<&str> = self.text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(err(self.line, "a grid is `start, stop, points`"));
        }
        let start = parse_f64(parts[0], self.line)?;
        let stop = parse_f64(parts[1], self.line)?;
        let points: usize =
            parts[2].parse().map_err(|_| err(self.line, format!("`{}` is not a point count", parts[2])))?;
        if points < 2 {
            return Err(err(self.line, "a grid needs at least two points"));
        }
        if !(start < stop) {
            return Err(err(self.line, "grid start must be below stop"));
        }
        Ok(Grid { start, stop, points })
    }

    /// A circuit quantity in SI; `kind` selects how GHz/MHz are read.
    fn si(&self, kind: Quantity) -> Result<f64, ConfigError> {
        let (num, unit) = self.split_unit()?;
        let x = parse_f64(num, self.line)?;
        let scaled = match (kind, unit) {
            (_, None) => x,
            (Quantity::Capacitance, Some("fF")) => x * 1e-15,
            (Quantity::Inductance, Some("nH")) => x * 1e-9,
            (Quantity::Energy, Some("GHz")) => energy_from_frequency(x * 1e9),
            (Quantity::Energy, Some("MHz")) => energy_from_frequency(x * 1e6),
            (Quantity::Rate, Some("GHz")) => TWO_PI * x * 1e9,
            (Quantity::Rate, Some("MHz")) => TWO_PI * x * 1e6,
            (_, Some(u)) => return Err(err(self.line, format!("unit `{u}` does not fit this quantity"))),
        };
        Ok(scaled)
    }
}

#[derive(Clone, Copy)]
enum Quantity {
    Capacitance,
    Inductance,
    Energy,
    Rate,
}

fn parse_f64(s: &str, line: usize) -> Result<f64, ConfigError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(err(line, format!("malformed number `{s}`"))),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut entries: Vec<(String, String, usize, String)> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| err(line, "unterminated section header"))?.trim();
            if !SECTIONS[1..].contains(&name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| err(line, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(err(line, "empty key"));
        }
        let norm = key.to_ascii_lowercase();
        if !seen.insert((section.clone(), norm.clone())) {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
        entries.push((section.clone(), norm, line, value.trim().to_string()));
    }

    let target_entry =
        entries.iter().find(|(s, k, _, _)| s.is_empty() && k == "target").ok_or_else(|| err(0, "missing `target`"))?;
    let target: Target = target_entry.3.parse().map_err(|m: String| err(target_entry.2, m))?;
    let mut cfg = SweepConfig::defaults(target);
    let mut c_tilde: Option<f64> = None;
    let mut bare = [None; 4];

    for (section, key, line, text) in &entries {
        let v = Value { text, line: *line, in_circuit: section == "circuit" };
        let unknown = || {
            err(
                *line,
                format!(
                    "unknown key `{key}` in {}",
                    if section.is_empty() { "top level".to_string() } else { format!("[{section}]") }
                ),
            )
        };
        match section.as_str() {
            "" => match key.as_str() {
                "target" => {}
                "output" => cfg.output = Some(PathBuf::from(text)),
                "threads" => {
                    cfg.threads = v.usize()?;
                    if cfg.threads == 0 {
                        return Err(err(*line, "threads must be at least 1"));
                    }
                }
                "seed" => cfg.seed = v.u64()?,
                _ => return Err(unknown()),
            },
            "params" => {
                let x = v.number()?;
                cfg.params.set(key, x).map_err(|e| err(*line, e.to_string()))?;
                cfg.overrides.push(key.clone());
            }
            "grid" => {
                if let Some((name, _)) = target.series().filter(|(n, _)| n == key) {
                    let _ = name;
                    cfg.series = v.list()?;
                    if cfg.series.is_empty() {
                        return Err(err(*line, "empty list"));
                    }
                } else if let Some(slot) = cfg.grids.iter_mut().find(|(k, _)| k == key) {
                    slot.1 = v.grid()?;
                } else {
                    return Err(err(*line, format!("target {target} has no grid axis `{key}`")));
                }
            }
            "noise" => match key.as_str() {
                "t" => {
                    cfg.noise = NoiseSpec { coherence_time: v.number()?, enabled: cfg.noise.enabled };
                    if !(cfg.noise.coherence_time > 0.0) {
                        return Err(err(*line, "T must be positive"));
                    }
                    cfg.noise.enabled = true;
                }
                "enabled" => cfg.noise.enabled = v.bool()?,
                _ => return Err(unknown()),
            },
            "disorder" => match key.as_str() {
                "sigma_coupling" => cfg.disorder.sigma_coupling = v.number()?,
                "sigma_field" => cfg.disorder.sigma_field = v.number()?,
                "sigma_bath_rate" => cfg.disorder.sigma_bath_rate = v.number()?,
                "sigma_n" => cfg.disorder.sigma_n = v.number()?,
                "samples" => cfg.disorder.samples = v.usize()?,
                "half_width" => cfg.window.half_width = v.number()?,
                "points" => cfg.window.points = v.usize()?,
                _ => return Err(unknown()),
            },
            "circuit" => {
                let c = &mut cfg.circuit;
                match key.as_str() {
                    "c_tilde" => c_tilde = Some(v.si(Quantity::Capacitance)?),
                    "c1" | "c2" | "c3" | "c4" => {
                        let k = key[1..].parse::<usize>().unwrap() - 1;
                        bare[k] = Some(v.si(Quantity::Capacitance)?);
                    }
                    "c12" => c.c12 = v.si(Quantity::Capacitance)?,
                    "c13" => c.c13 = v.si(Quantity::Capacitance)?,
                    "c23" => c.c23 = v.si(Quantity::Capacitance)?,
                    "c24" => c.c24 = v.si(Quantity::Capacitance)?,
                    "c34" => c.c34 = v.si(Quantity::Capacitance)?,
                    "e1" => c.e[0] = v.si(Quantity::Energy)?,
                    "e2" => c.e[1] = v.si(Quantity::Energy)?,
                    "e3" => c.e[2] = v.si(Quantity::Energy)?,
                    "e_c" => c.e_c = v.si(Quantity::Energy)?,
                    "l4" => c.l4 = v.si(Quantity::Inductance)?,
                    "gamma1" => c.gamma1 = v.si(Quantity::Rate)?,
                    "gamma4" => c.gamma4 = v.si(Quantity::Rate)?,
                    "n" => c.n = v.number()?,
                    "trunc" => {
                        let t: Vec<usize> = text
                            .split(',')
                            .map(|s| {
                                s.trim()
                                    .parse::<usize>()
                                    .map_err(|_| err(*line, format!("bad level count `{}`", s.trim())))
                            })
                            .collect::<Result<_, _>>()?;
                        c.trunc = t.try_into().map_err(|_| err(*line, "trunc needs four level counts"))?;
                    }
                    "equalize_qubit3" => c.equalize_qubit3 = v.bool()?,
                    "quartic" => c.quartic = v.bool()?,
                    _ => return Err(unknown()),
                }
            }
            _ => unreachable!(),
        }
    }

    // bare capacitances follow C̃ unless given explicitly
    let ct = c_tilde.unwrap_or(qwb_core::circuit::DEFAULT_C_TILDE);
    let c = &mut cfg.circuit;
    let derived = [ct - c.c12 - c.c13, ct - c.c12 - c.c23 - c.c24, ct - c.c13 - c.c23 - c.c34, ct - c.c24 - c.c34];
    for k in 0..4 {
        c.c[k] = bare[k].unwrap_or(derived[k]);
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &SweepConfig) -> Result<(), ConfigError> {
    let whole = |e: qwb_core::QwbError| err(0, e.to_string());
    match cfg.target {
        Target::Circuit => cfg.circuit.validate().map_err(whole)?,
        Target::NFunction => {
            if cfg.grid("n").is_some_and(|g| g.start <= 0.0) {
                return Err(err(0, "N(n) needs n > 0"));
            }
        }
        _ => cfg.params.validate().map_err(whole)?,
    }
    if cfg.target == Target::Robustness {
        cfg.disorder.validate().map_err(whole)?;
        if cfg.window.points < 3 || !(cfg.window.half_width > 0.0) {
            return Err(err(0, "the robustness window needs half_width > 0 and at least three points"));
        }
    }
    if cfg.target == Target::Circuit && cfg.series.iter().any(|t| !(*t > 0.0)) {
        return Err(err(0, "coherence times must be positive"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = parse_config("target = population_vs_jx\n").unwrap();
        assert_eq!(cfg.target, Target::PopulationVsJx);
        assert_eq!(cfg.params, QwbParams::default());
        assert_eq!(cfg.grid("jx").unwrap().points, 201);
    }

    #[test]
    fn override_propagates() {
        let cfg = parse_config("target = qfi_vs_jx\n[params]\nh2 = 0.25\n").unwrap();
        assert_eq!(cfg.params.h2, 0.25);
        assert_eq!(cfg.overrides, vec!["h2".to_string()]);
    }

    #[test]
    fn unit_outside_circuit_rejected() {
        let e = parse_config("target = qfi_vs_jx\n[params]\ngamma4 = 10 GHz\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("unit"), "{}", e.message);
    }

    #[test]
    fn circuit_units() {
        let cfg = parse_config(
            "target = circuit\n[circuit]\nC23 = 7 fF\nE_C = 2 GHz\nL4 = 8.2 nH\ngamma1 = 10 MHz\ntrunc = 2,2,2,3\n",
        )
        .unwrap();
        let d = CircuitSpec::default();
        assert!((cfg.circuit.c23 - d.c23).abs() < 1e-27);
        assert!((cfg.circuit.e_c / d.e_c - 1.0).abs() < 1e-12);
        assert!((cfg.circuit.l4 - 8.2e-9).abs() < 1e-21);
        assert!((cfg.circuit.gamma1 / d.gamma1 - 1.0).abs() < 1e-12);
        assert_eq!(cfg.circuit.trunc, [2, 2, 2, 3]);
        assert_eq!(cfg.circuit.c_tilde()[2], 80e-15);
    }

    #[test]
    fn errors_carry_lines() {
        assert_eq!(parse_config("target = qfi_vs_jx\n[params]\nh2 = 0.1\nh2 = 0.2\n").unwrap_err().line, 4);
        assert_eq!(parse_config("target = qfi_vs_jx\n[params]\nh2 = 0.x\n").unwrap_err().line, 3);
        assert_eq!(parse_config("target = qfi_vs_jx\n[params]\nfoo = 1\n").unwrap_err().line, 3);
        assert_eq!(parse_config("target = qfi_vs_jx\n[grid]\njx = 1.0, 0.9, 11\n").unwrap_err().line, 3);
        assert_eq!(parse_config("target = qfi_vs_jx\n[grid]\njx = 0.9, 1.0, 1\n").unwrap_err().line, 3);
        assert_eq!(parse_config("target = qfi_vs_jx\n[grid]\njc = 0.9, 1.0, 11\n").unwrap_err().line, 3);
        assert_eq!(parse_config("target = nope\n").unwrap_err().line, 1);
        assert_eq!(parse_config("[params]\nh2 = 1\n").unwrap_err().line, 0);
        assert_eq!(parse_config("target = qfi_vs_jx\n[bogus]\n").unwrap_err().line, 2);
    }

    #[test]
    fn series_and_comments() {
        let cfg =
            parse_config("target = circuit # sweep\n[grid]\nt_values = 5e-5, 1e-4\nphi = 0.249, 0.251, 5\n").unwrap();
        assert_eq!(cfg.series, vec![5e-5, 1e-4]);
        assert_eq!(cfg.grid("phi").unwrap().points, 5);
    }

    #[test]
    fn robustness_defaults() {
        let cfg = parse_config("target = robustness\nseed = 9\n[disorder]\nsamples = 3\n").unwrap();
        assert_eq!(cfg.params.h2, 0.0);
        assert!(cfg.noise.enabled);
        assert_eq!(cfg.disorder.samples, 3);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn every_target_parses() {
        for t in Target::ALL {
            parse_config(&format!("target = {t}\n")).unwrap();
        }
    }
}
