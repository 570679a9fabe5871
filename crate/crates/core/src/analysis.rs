//! Confidence intervals, logical-error-rate curves, pseudo-thresholds and
//! parameter sweeps.

use crate::bacon_shor::{build_code, LayoutKind};
use crate::engine::{derive_seed, estimate, Method, RunConfig, TrialStats};
use crate::error::{Error, Result};
use crate::noise::{ModelKind, ModelParams};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use std::fmt::Write as _;

/// Two-sided normal quantile for a confidence level in (0, 1).
pub fn z_for_confidence(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::param("confidence", confidence, "must lie in (0, 1)"));
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(0.5 + confidence / 2.0))
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo.min(p), hi.max(p))
}

/// Point estimate and confidence interval for the logical error rate.
///
/// Plain and first-fault statistics use a Wilson interval on the sampled
/// failure fraction, scaled by the sampled probability mass. Stratified
/// statistics combine per-stratum Wilson half-widths in quadrature and add the
/// truncated tail to the upper bound.
pub fn estimate_with_ci(stats: &TrialStats, confidence: f64) -> Result<(f64, f64, f64)> {
    let z = z_for_confidence(confidence)?;
    let p = stats.p_err();
    if stats.per_v.is_empty() {
        if stats.n_trials == 0 {
            return Err(Error::param("n_trials", 0, "no trials to summarize"));
        }
        let (lo, hi) = wilson(stats.n_fail, stats.n_trials, z);
        let s = stats.scale;
        return Ok((p, (s * lo).min(p), (s * hi).clamp(p, 1.0)));
    }
    let mut down = 0.0;
    let mut up = 0.0;
    for v in stats.per_v.iter().filter(|v| !v.exact) {
        let (lo, hi) = wilson(v.n_fail, v.n_samples, z);
        down += (v.pr_v * (v.p_fail - lo)).powi(2);
        up += (v.pr_v * (hi - v.p_fail)).powi(2);
    }
    let lo = (p - down.sqrt()).max(0.0);
    let hi = (p + up.sqrt() + stats.truncation).min(1.0);
    Ok((p, lo, hi.max(p)))
}

/// Horizontal axis of an error-rate curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum XAxis {
    /// Idle-island event rate p0.
    P0,
    /// Event rate averaged over the d idle and d(d−1) measured islands.
    Avg,
}

impl XAxis {
    pub fn value(self, params: &ModelParams, d: usize) -> f64 {
        match self {
            XAxis::P0 => params.p0,
            XAxis::Avg => {
                if params.model.is_circuit() {
                    (params.p0 + (d - 1) as f64 * params.p2) / d as f64
                } else {
                    params.p0
                }
            }
        }
    }
}

impl std::str::FromStr for XAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p0" => Ok(XAxis::P0),
            "avg" => Ok(XAxis::Avg),
            _ => Err(Error::param("x_axis", s, "expected p0 or avg")),
        }
    }
}

impl std::fmt::Display for XAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            XAxis::P0 => "p0",
            XAxis::Avg => "avg",
        })
    }
}

/// Error rate of an unprotected qubit at noise rate x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Baseline {
    /// y = x.
    Identity,
    /// y = 1 − (1 − x)^n for n noisy steps.
    PerStep(u32),
}

impl Baseline {
    pub fn value(self, x: f64) -> f64 {
        match self {
            Baseline::Identity => x,
            Baseline::PerStep(n) => -(n as f64 * (-x).ln_1p()).exp_m1(),
        }
    }
}

impl std::str::FromStr for Baseline {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.to_ascii_lowercase();
        if t == "identity" {
            return Ok(Baseline::Identity);
        }
        t.strip_prefix("per_step:")
            .and_then(|n| n.parse().ok())
            .filter(|&n: &u32| n > 0)
            .map(Baseline::PerStep)
            .ok_or_else(|| Error::param("baseline", s, "expected identity or per_step:<n>"))
    }
}

impl std::fmt::Display for Baseline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Baseline::Identity => f.write_str("identity"),
            Baseline::PerStep(n) => write!(f, "per_step:{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub params: ModelParams,
    pub n_trials: u64,
    pub n_fail: u64,
    pub effective_trials: f64,
    pub p_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrRateCurve {
    pub model: ModelKind,
    pub d: usize,
    pub layout: LayoutKind,
    pub x_axis: XAxis,
    pub baseline: Baseline,
    /// Swept series parameter and its value, if any.
    pub series: Option<(SeriesParam, f64)>,
    pub points: Vec<CurvePoint>,
}

impl ErrRateCurve {
    /// Checks that x is strictly increasing and every interval is ordered.
    pub fn validate(&self) -> Result<()> {
        for w in self.points.windows(2) {
            if w[1].x <= w[0].x {
                return Err(Error::param("x", w[1].x, "curve x values must be strictly increasing"));
            }
        }
        for p in &self.points {
            if !(0.0 <= p.ci_low && p.ci_low <= p.p_err && p.p_err <= p.ci_high && p.ci_high <= 1.0) {
                return Err(Error::param("p_err", p.p_err, "confidence interval out of order"));
            }
        }
        Ok(())
    }

    /// Indices `i` where `p_err` drops from point `i` to `i + 1` by more than
    /// `n_sigma` combined standard errors, reading σ off the interval widths
    /// at confidence level `confidence`.
    pub fn monotonicity_violations(&self, confidence: f64, n_sigma: f64) -> Result<Vec<usize>> {
        let z = z_for_confidence(confidence)?;
        let sigma = |p: &CurvePoint| ((p.ci_high - p.ci_low) / (2.0 * z)).max(0.0);
        Ok(self
            .points
            .windows(2)
            .enumerate()
            .filter(|(_, w)| {
                let s = sigma(&w[0]).hypot(sigma(&w[1]));
                w[0].p_err - w[1].p_err > n_sigma * s
            })
            .map(|(i, _)| i)
            .collect())
    }
}

/// Pseudo-threshold with the range spanned by the interval curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub p_th: f64,
    /// Crossing of the upper interval curve (or the grid minimum).
    pub low: f64,
    /// Crossing of the lower interval curve (or the grid maximum).
    pub high: f64,
    pub uncertainty: f64,
}

/// Last upward crossing of `ys` over the baseline, interpolated linearly in
/// log-log coordinates (linear in ln x when the lower point is zero).
fn crossing(xs: &[f64], ys: &[f64], baseline: Baseline) -> Option<f64> {
    let b = |x: f64| baseline.value(x);
    let i = (0..xs.len().saturating_sub(1))
        .rev()
        .find(|&i| ys[i] <= b(xs[i]) && ys[i + 1] > b(xs[i + 1]))?;
    let (lx0, lx1) = (xs[i].ln(), xs[i + 1].ln());
    let (y0, y1) = (ys[i], ys[i + 1]);
    let y_at = |t: f64| {
        if y0 > 0.0 {
            (y0.ln() + t * (y1.ln() - y0.ln())).exp()
        } else {
            y0 + t * (y1 - y0)
        }
    };
    let f = |t: f64| y_at(t) - b((lx0 + t * (lx1 - lx0)).exp());
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lx0 + 0.5 * (lo + hi) * (lx1 - lx0)).exp())
}

/// Largest x with p_err(x) ≤ baseline(x), interpolated between the bracketing
/// grid points.
pub fn pseudo_threshold(curve: &ErrRateCurve) -> Result<Threshold> {
    let xs: Vec<f64> = curve.points.iter().map(|p| p.x).collect();
    let unbracketed = |detail: &str| Error::Unbracketed {
        x_min: xs.first().copied().unwrap_or(f64::NAN),
        x_max: xs.last().copied().unwrap_or(f64::NAN),
        detail: detail.into(),
    };
    if xs.len() < 2 {
        return Err(unbracketed("need at least two points"));
    }
    if xs.iter().any(|&x| x <= 0.0) {
        return Err(Error::param("x", xs[0], "threshold search needs positive x"));
    }
    let col = |f: fn(&CurvePoint) -> f64| curve.points.iter().map(f).collect::<Vec<_>>();
    let p_th = crossing(&xs, &col(|p| p.p_err), curve.baseline).ok_or_else(|| {
        if curve.points.iter().all(|p| p.p_err > curve.baseline.value(p.x)) {
            unbracketed("curve lies above the baseline everywhere")
        } else {
            unbracketed("curve never rises above the baseline")
        }
    })?;
    let low = crossing(&xs, &col(|p| p.ci_high), curve.baseline)
        .unwrap_or(xs[0])
        .min(p_th);
    let high = crossing(&xs, &col(|p| p.ci_low), curve.baseline)
        .unwrap_or(xs[xs.len() - 1])
        .max(p_th);
    Ok(Threshold {
        p_th,
        low,
        high,
        uncertainty: 0.5 * (high - low),
    })
}

/// Parameter varied between curves of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeriesParam {
    R,
    Q,
    P2,
    /// Sets both measurement bit-flip probabilities.
    PMst,
}

impl SeriesParam {
    pub fn apply(self, params: &mut ModelParams, v: f64) {
        match self {
            SeriesParam::R => params.r = v,
            SeriesParam::Q => params.q = v,
            SeriesParam::P2 => params.p2 = v,
            SeriesParam::PMst => {
                params.p_mst1 = v;
                params.p_mst2 = v;
            }
        }
    }
}

impl std::str::FromStr for SeriesParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" => Ok(SeriesParam::R),
            "q" => Ok(SeriesParam::Q),
            "p2" => Ok(SeriesParam::P2),
            "p_mst" => Ok(SeriesParam::PMst),
            _ => Err(Error::param("series", s, "expected r, q, p2 or p_mst")),
        }
    }
}

impl std::fmt::Display for SeriesParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SeriesParam::R => "r",
            SeriesParam::Q => "q",
            SeriesParam::P2 => "p2",
            SeriesParam::PMst => "p_mst",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub base: ModelParams,
    pub d: usize,
    pub layout: LayoutKind,
    pub p0_grid: Vec<f64>,
    /// Set p1 and p2 equal to p0 at every grid point.
    pub tie_p2: bool,
    pub series: Option<(SeriesParam, Vec<f64>)>,
    pub x_axis: XAxis,
    pub baseline: Baseline,
    pub method: Method,
    pub run: RunConfig,
    pub confidence: f64,
}

impl SweepPlan {
    /// Parameters of every point, grouped by curve.
    pub fn grid(&self) -> Vec<(Option<(SeriesParam, f64)>, Vec<ModelParams>)> {
        let series: Vec<Option<(SeriesParam, f64)>> = match &self.series {
            Some((s, vals)) => vals.iter().map(|&v| Some((*s, v))).collect(),
            None => vec![None],
        };
        series
            .into_iter()
            .map(|s| {
                let pts = self
                    .p0_grid
                    .iter()
                    .map(|&p0| {
                        let mut p = self.base;
                        p.p0 = p0;
                        if self.tie_p2 {
                            p.p1 = p0;
                            p.p2 = p0;
                        }
                        if let Some((sp, v)) = s {
                            sp.apply(&mut p, v);
                        }
                        p
                    })
                    .collect();
                (s, pts)
            })
            .collect()
    }
}

/// Runs every point of the plan. Point `i` (counted across curves) uses seed
/// `derive_seed(plan.run.seed, i)`.
pub fn sweep(plan: &SweepPlan) -> Result<Vec<ErrRateCurve>> {
    if plan.p0_grid.is_empty() {
        return Ok(Vec::new());
    }
    if plan.p0_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("p0_grid", format!("{:?}", plan.p0_grid), "must be strictly increasing"));
    }
    let code = build_code(plan.d, plan.layout)?;
    let mut index = 0u64;
    let mut curves = Vec::new();
    for (series, params) in plan.grid() {
        let mut points = Vec::with_capacity(params.len());
        for p in params {
            p.validate()?;
            let cfg = RunConfig {
                seed: derive_seed(plan.run.seed, index),
                ..plan.run.clone()
            };
            index += 1;
            let stats = estimate(&code, &p, plan.method, &cfg)?;
            let (p_err, ci_low, ci_high) = estimate_with_ci(&stats, plan.confidence)?;
            points.push(CurvePoint {
                x: plan.x_axis.value(&p, plan.d),
                params: p,
                n_trials: stats.n_trials,
                n_fail: stats.n_fail,
                effective_trials: stats.effective_trials(),
                p_err,
                ci_low,
                ci_high,
                seed: cfg.seed,
            });
        }
        let curve = ErrRateCurve {
            model: plan.base.model,
            d: plan.d,
            layout: plan.layout,
            x_axis: plan.x_axis,
            baseline: plan.baseline,
            series,
            points,
        };
        curve.validate()?;
        curves.push(curve);
    }
    Ok(curves)
}

pub const CSV_HEADER: &str =
    "model,d,layout,x_axis,x,p0,p1,p2,r,q,p_mst1,p_mst2,n_trials,n_fail,p_err,ci_low,ci_high,seed";

/// One CSV row per point, header first.
pub fn to_csv(curves: &[ErrRateCurve]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in curves {
        for p in &c.points {
            let m = &p.params;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.model, c.d, c.layout, c.x_axis, p.x, m.p0, m.p1, m.p2, m.r, m.q, m.p_mst1, m.p_mst2,
                p.n_trials, p.n_fail, p.p_err, p.ci_low, p.ci_high, p.seed
            )
            .expect("writing to a String");
        }
    }
    out
}

/// Threshold result for one curve, as written to the JSON summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveSummary {
    pub model: ModelKind,
    pub d: usize,
    pub layout: LayoutKind,
    pub x_axis: XAxis,
    pub baseline: Baseline,
    pub series: Option<String>,
    pub series_value: Option<f64>,
    pub n_points: usize,
    pub p_th: Option<f64>,
    pub p_th_low: Option<f64>,
    pub p_th_high: Option<f64>,
    pub uncertainty: Option<f64>,
    /// Why no threshold was found.
    pub unbracketed: Option<String>,
}

pub fn summarize(curves: &[ErrRateCurve]) -> Result<Vec<CurveSummary>> {
    curves
        .iter()
        .map(|c| {
            let mut s = CurveSummary {
                model: c.model,
                d: c.d,
                layout: c.layout,
                x_axis: c.x_axis,
                baseline: c.baseline,
                series: c.series.map(|(p, _)| p.to_string()),
                series_value: c.series.map(|(_, v)| v),
                n_points: c.points.len(),
                p_th: None,
                p_th_low: None,
                p_th_high: None,
                uncertainty: None,
                unbracketed: None,
            };
            match pseudo_threshold(c) {
                Ok(t) => {
                    s.p_th = Some(t.p_th);
                    s.p_th_low = Some(t.low);
                    s.p_th_high = Some(t.high);
                    s.uncertainty = Some(t.uncertainty);
                }
                Err(e @ Error::Unbracketed { .. }) => s.unbracketed = Some(e.to_string()),
                Err(e) => return Err(e),
            }
            Ok(s)
        })
        .collect()
}
