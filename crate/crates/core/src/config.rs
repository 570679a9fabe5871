//! Flat `key = value` experiment configuration.
//!
//! One setting per line, `#` starts a comment, lists are comma-separated.
//! The same [`ExperimentConfig::set`] is used for file lines and for
//! command-line overrides, and [`ExperimentConfig::to_config_string`] writes
//! a file that parses back to an identical configuration.

use crate::analysis::{Baseline, SeriesParam, SweepPlan, XAxis};
use crate::bacon_shor::LayoutKind;
use crate::engine::{Method, RunConfig};
use crate::error::{Error, Result};
use crate::noise::{ModelKind, ModelParams};
use crate::physical::DeviceParams;
use std::fmt::Write as _;

/// Layout used for a model unless the configuration names one.
pub fn default_layout(model: ModelKind) -> LayoutKind {
    match model {
        ModelKind::PMC => LayoutKind::Geometric,
        _ => LayoutKind::Standard,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub d: usize,
    /// `None` selects [`default_layout`].
    pub layout: Option<LayoutKind>,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub r: f64,
    pub q: f64,
    pub p_mst1: f64,
    pub p_mst2: f64,
    pub pair_extra: f64,
    pub p0_grid: Vec<f64>,
    pub tie_p2: bool,
    pub series: Option<SeriesParam>,
    pub series_values: Vec<f64>,
    pub x_axis: XAxis,
    pub baseline: Baseline,
    pub confidence: f64,
    pub trials: u64,
    pub fail_target: Option<u64>,
    pub seed: u64,
    pub workers: Option<usize>,
    pub importance: bool,
    pub v_trunc: usize,
    pub out: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::Qp,
            d: 5,
            layout: None,
            p0: 0.0,
            p1: 0.0,
            p2: 0.0,
            r: 0.0,
            q: 0.0,
            p_mst1: 0.0,
            p_mst2: 0.0,
            pair_extra: 0.0,
            p0_grid: Vec::new(),
            tie_p2: false,
            series: None,
            series_values: Vec::new(),
            x_axis: XAxis::P0,
            baseline: Baseline::Identity,
            confidence: 0.95,
            trials: 100_000,
            fail_target: None,
            seed: 0,
            workers: None,
            importance: false,
            v_trunc: 8,
            out: "out".into(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::param(key, value, "not a valid number"))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| num(key, v.trim())).collect()
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::param(key, value, "expected true or false")),
    }
}

fn optional<T>(value: &str, parse: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    match value.to_ascii_lowercase().as_str() {
        "" | "none" | "auto" => Ok(None),
        _ => parse(value).map(Some),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Splits configuration text into `(line number, key, value)`.
fn entries(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::param(&format!("line {}", i + 1), line, "expected key = value"))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub const KEYS: [&'static str; 25] = [
        "model", "d", "layout", "p0", "p1", "p2", "r", "q", "p_mst1", "p_mst2", "pair_extra",
        "p0_grid", "tie_p2", "series", "series_values", "x_axis", "baseline", "confidence",
        "trials", "fail_target", "seed", "workers", "importance", "v_trunc", "out",
    ];

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        for (_, k, v) in entries(text)? {
            c.set(&k, &v)?;
        }
        Ok(c)
    }

    /// Sets one key. `p_mst` is accepted as shorthand for both bit-flip
    /// probabilities.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "model" => self.model = v.parse()?,
            "d" => self.d = num(key, v)?,
            "layout" => self.layout = optional(v, |s| s.parse())?,
            "p0" => self.p0 = num(key, v)?,
            "p1" => self.p1 = num(key, v)?,
            "p2" => self.p2 = num(key, v)?,
            "r" => self.r = num(key, v)?,
            "q" => self.q = num(key, v)?,
            "p_mst1" => self.p_mst1 = num(key, v)?,
            "p_mst2" => self.p_mst2 = num(key, v)?,
            "p_mst" => {
                self.p_mst1 = num(key, v)?;
                self.p_mst2 = self.p_mst1;
            }
            "pair_extra" => self.pair_extra = num(key, v)?,
            "p0_grid" => self.p0_grid = list(key, v)?,
            "tie_p2" => self.tie_p2 = boolean(key, v)?,
            "series" => self.series = optional(v, |s| s.parse())?,
            "series_values" => self.series_values = list(key, v)?,
            "x_axis" => self.x_axis = v.parse()?,
            "baseline" => self.baseline = v.parse()?,
            "confidence" => self.confidence = num(key, v)?,
            "trials" => self.trials = num(key, v)?,
            "fail_target" => self.fail_target = optional(v, |s| num(key, s))?,
            "seed" => self.seed = num(key, v)?,
            "workers" => self.workers = optional(v, |s| num(key, s))?,
            "importance" => self.importance = boolean(key, v)?,
            "v_trunc" => self.v_trunc = num(key, v)?,
            "out" => self.out = v.to_string(),
            _ => return Err(Error::param(key, v, "unknown configuration key")),
        }
        Ok(())
    }

    /// Every key with its resolved value, in [`Self::KEYS`] order.
    pub fn to_config_string(&self) -> String {
        let opt = |o: Option<String>| o.unwrap_or_else(|| "none".into());
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("writing to a String");
        put("model", self.model.to_string());
        put("d", self.d.to_string());
        put("layout", self.layout().to_string());
        put("p0", self.p0.to_string());
        put("p1", self.p1.to_string());
        put("p2", self.p2.to_string());
        put("r", self.r.to_string());
        put("q", self.q.to_string());
        put("p_mst1", self.p_mst1.to_string());
        put("p_mst2", self.p_mst2.to_string());
        put("pair_extra", self.pair_extra.to_string());
        put("p0_grid", join(&self.p0_grid));
        put("tie_p2", self.tie_p2.to_string());
        put("series", opt(self.series.map(|p| p.to_string())));
        put("series_values", join(&self.series_values));
        put("x_axis", self.x_axis.to_string());
        put("baseline", self.baseline.to_string());
        put("confidence", self.confidence.to_string());
        put("trials", self.trials.to_string());
        put("fail_target", opt(self.fail_target.map(|x| x.to_string())));
        put("seed", self.seed.to_string());
        put("workers", opt(self.workers.map(|x| x.to_string())));
        put("importance", self.importance.to_string());
        put("v_trunc", self.v_trunc.to_string());
        put("out", self.out.clone());
        s
    }

    pub fn layout(&self) -> LayoutKind {
        self.layout.unwrap_or_else(|| default_layout(self.model))
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            model: self.model,
            m: 2,
            p0: self.p0,
            p1: self.p1,
            p2: self.p2,
            r: self.r,
            q: self.q,
            p_mst1: self.p_mst1,
            p_mst2: self.p_mst2,
            pair_extra: self.pair_extra,
        }
    }

    pub fn method(&self) -> Method {
        if self.importance {
            Method::Importance
        } else {
            Method::Plain
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            n_trials: self.trials,
            fail_target: self.fail_target,
            seed: self.seed,
            workers: self.workers,
            v_trunc: self.v_trunc,
        }
    }

    /// Checks every value that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        if self.d < 3 || self.d % 2 == 0 {
            return Err(Error::param("d", self.d, "must be odd and at least 3"));
        }
        self.model_params().validate()?;
        for &p in &self.p0_grid {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::param("p0_grid", p, "entries must lie in (0, 1]"));
            }
        }
        if self.p0_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("p0_grid", join(&self.p0_grid), "must be strictly increasing"));
        }
        if self.series.is_some() && self.series_values.is_empty() {
            return Err(Error::param("series_values", "", "required when series is set"));
        }
        if self.series.is_none() && !self.series_values.is_empty() {
            return Err(Error::param("series", "none", "required when series_values is set"));
        }
        for &v in &self.series_values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param("series_values", v, "entries must lie in [0, 1]"));
            }
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::param("confidence", self.confidence, "must lie in (0, 1)"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", 0, "must be positive"));
        }
        if self.fail_target == Some(0) {
            return Err(Error::param("fail_target", 0, "must be positive"));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers", 0, "must be positive"));
        }
        if self.importance && self.model.has_perfect_measurement() && self.v_trunc < 2 {
            return Err(Error::param("v_trunc", self.v_trunc, "must be at least 2"));
        }
        Ok(())
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan> {
        self.validate()?;
        Ok(SweepPlan {
            base: self.model_params(),
            d: self.d,
            layout: self.layout(),
            p0_grid: self.p0_grid.clone(),
            tie_p2: self.tie_p2,
            series: self.series.map(|s| (s, self.series_values.clone())),
            x_axis: self.x_axis,
            baseline: self.baseline,
            method: self.method(),
            run: self.run_config(),
            confidence: self.confidence,
        })
    }
}

/// Reads device parameters from `key = value` text. Missing keys keep their
/// defaults; `g_t` and `tau_mst` take three comma-separated values.
pub fn parse_device_params(text: &str) -> Result<DeviceParams> {
    let mut p = DeviceParams::default();
    for (_, k, v) in entries(text)? {
        let three = |key: &str| -> Result<[f64; 3]> {
            let l = list(key, &v)?;
            l.try_into()
                .map_err(|_| Error::param(key, &v, "expected three comma-separated values"))
        };
        match k.as_str() {
            "delta" => p.delta = num(&k, &v)?,
            "temperature" => p.temperature = num(&k, &v)?,
            "e_c" => p.e_c = num(&k, &v)?,
            "tau0" => p.tau0 = num(&k, &v)?,
            "g_t" => p.g_t = three("g_t")?,
            "delta_dot" => p.delta_dot = num(&k, &v)?,
            "delta_is" => p.delta_is = num(&k, &v)?,
            "g_isis" => p.g_isis = num(&k, &v)?,
            "tau" => p.tau = num(&k, &v)?,
            "tau_mst" => p.tau_mst = three("tau_mst")?,
            "s_ee_int" => p.s_ee_int = num(&k, &v)?,
            "l_over_xi" => p.l_over_xi = num(&k, &v)?,
            "m" => p.m = num(&k, &v)?,
            _ => return Err(Error::param(&k, &v, "unknown device parameter")),
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_lists_and_overrides() {
        let c = ExperimentConfig::parse(
            "# MC q sweep\nmodel = MC\nd=5\np0_grid = 1e-4, 3e-4,1e-3 # grid\ntie_p2 = true\n\
             series = q\nseries_values = 0,0.1,0.5,1\nr = 0.1\np_mst = 1e-4\nimportance = yes\n",
        )
        .unwrap();
        assert_eq!(c.model, ModelKind::MC);
        assert_eq!(c.p0_grid, vec![1e-4, 3e-4, 1e-3]);
        assert_eq!(c.series, Some(SeriesParam::Q));
        assert_eq!((c.p_mst1, c.p_mst2), (1e-4, 1e-4));
        assert_eq!(c.method(), Method::Importance);
        assert_eq!(c.layout(), LayoutKind::Standard);
        c.validate().unwrap();
        let plan = c.sweep_plan().unwrap();
        let grid = plan.grid();
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[2].1[1].q, 0.5);
        assert_eq!(grid[2].1[1].p2, 3e-4);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = ExperimentConfig::parse("model = Qp\ntrails = 10\n").unwrap_err();
        match e {
            Error::InvalidParameter { name, .. } => assert_eq!(name, "trails"),
            other => panic!("{other:?}"),
        }
        let e = ExperimentConfig::parse("p0 = abc").unwrap_err();
        assert!(e.to_string().contains("p0"));
        assert!(ExperimentConfig::parse("just text").is_err());
    }

    #[test]
    fn validation_names_the_key() {
        let mut c = ExperimentConfig::default();
        c.set("q", "1.5").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("`q`"));
        let mut c = ExperimentConfig::default();
        c.set("d", "4").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("`d`"));
        let mut c = ExperimentConfig::default();
        c.set("p0_grid", "0.1,0.05").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("p0_grid"));
    }

    #[test]
    fn pmc_defaults_to_geometric() {
        let c = ExperimentConfig::parse("model = PMC").unwrap();
        assert_eq!(c.layout(), LayoutKind::Geometric);
        let c = ExperimentConfig::parse("model = PMC\nlayout = standard").unwrap();
        assert_eq!(c.layout(), LayoutKind::Standard);
    }

    #[test]
    fn written_config_lists_every_key() {
        let s = ExperimentConfig::default().to_config_string();
        let keys: Vec<&str> = s.lines().map(|l| l.split(" = ").next().unwrap()).collect();
        assert_eq!(keys, ExperimentConfig::KEYS);
    }

    #[test]
    fn device_params_file() {
        let p = parse_device_params("temperature = 0.1\ng_t = 0, 1e-5, 2e-5\n").unwrap();
        assert_eq!(p.temperature, 0.1);
        assert_eq!(p.g_t, [0.0, 1e-5, 2e-5]);
        assert_eq!(p.delta, DeviceParams::default().delta);
        assert!(parse_device_params("g_t = 1,2").is_err());
        assert!(parse_device_params("gap = 1").is_err());
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        let models = prop_oneof![
            Just(ModelKind::Qp),
            Just(ModelKind::QpBf),
            Just(ModelKind::MC),
            Just(ModelKind::PMC),
            Just(ModelKind::MCLongLived)
        ];
        (
            models,
            prop::option::of(prop_oneof![Just(LayoutKind::Standard), Just(LayoutKind::Geometric)]),
            prop::array::uniform8(0.0f64..1.0),
            prop::collection::vec(1e-6f64..1.0, 0..5),
            prop::option::of(1u64..1000),
            any::<u64>(),
            prop::option::of(1usize..16),
            any::<bool>(),
        )
            .prop_map(|(model, layout, p, grid, ft, seed, workers, imp)| {
                // Written files always carry the resolved layout.
                ExperimentConfig {
                    model,
                    layout: Some(layout.unwrap_or_else(|| default_layout(model))),
                    p0: p[0],
                    p1: p[1],
                    p2: p[2],
                    r: p[3],
                    q: p[4],
                    p_mst1: p[5],
                    p_mst2: p[6],
                    pair_extra: p[7],
                    p0_grid: grid,
                    fail_target: ft,
                    seed,
                    workers,
                    importance: imp,
                    series: imp.then_some(SeriesParam::PMst),
                    series_values: if imp { vec![p[5], p[6]] } else { Vec::new() },
                    ..ExperimentConfig::default()
                }
            })
    }

    proptest! {
        #[test]
        fn config_round_trips(c in arb_config()) {
            let text = c.to_config_string();
            let back = ExperimentConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_config_string(), text);
        }
    }
}
