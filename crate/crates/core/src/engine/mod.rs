//! Logical error rate estimation for one error-correction round.

pub mod ft;
pub mod importance;
pub mod protocol;
pub mod runner;

pub use ft::{all_events_params, ft_check, FtReport, FtViolation};
pub use importance::{
    island_event_probs, poisson_binomial, prob_exactly_v, run_imperfect_importance,
    run_perfect_importance, FirstFaultPlan,
};
pub use protocol::{Driver, Injected, Location, LocationKind, ProtocolSpec, Sampled, Simulator};
pub use runner::{derive_seed, run_batched, trial_rng, RunConfig};

use crate::bacon_shor::CodeLayout;
use crate::error::{Error, Result};
use crate::noise::ModelParams;
use serde::Serialize;

/// Outcome of one stratum of the perfect-measurement estimator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VStats {
    pub v: usize,
    pub pr_v: f64,
    pub n_samples: u64,
    pub n_fail: u64,
    /// Failure probability given `v` faulty islands.
    pub p_fail: f64,
    /// True when `p_fail` was enumerated rather than sampled.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub n_trials: u64,
    pub n_fail: u64,
    /// Estimated logical error rate times `n_trials`.
    pub weighted_fail: f64,
    pub seed: u64,
    /// Probability mass represented by the sampled trials (1 for plain
    /// Monte Carlo).
    pub scale: f64,
    pub per_v: Vec<VStats>,
    /// Probability of more faulty islands than were sampled.
    pub truncation: f64,
}

impl TrialStats {
    pub fn plain(seed: u64, n_trials: u64, n_fail: u64) -> Self {
        Self::weighted(seed, n_trials, n_fail, 1.0)
    }

    pub fn weighted(seed: u64, n_trials: u64, n_fail: u64, scale: f64) -> Self {
        TrialStats {
            n_trials,
            n_fail,
            weighted_fail: scale * n_fail as f64,
            seed,
            scale,
            per_v: Vec::new(),
            truncation: 0.0,
        }
    }

    pub fn from_strata(seed: u64, per_v: Vec<VStats>, truncation: f64) -> Self {
        let n_trials: u64 = per_v.iter().map(|s| s.n_samples).sum();
        let n_fail = per_v.iter().map(|s| s.n_fail).sum();
        let p_err: f64 = per_v.iter().map(|s| s.pr_v * s.p_fail).sum();
        let scale = per_v.iter().filter(|s| !s.exact).map(|s| s.pr_v).sum();
        TrialStats {
            n_trials,
            n_fail,
            weighted_fail: p_err * n_trials as f64,
            seed,
            scale,
            per_v,
            truncation,
        }
    }

    pub fn p_err(&self) -> f64 {
        if !self.per_v.is_empty() {
            return self.per_v.iter().map(|s| s.pr_v * s.p_fail).sum();
        }
        if self.n_trials == 0 {
            0.0
        } else {
            self.weighted_fail / self.n_trials as f64
        }
    }

    /// Number of plain Monte Carlo trials with the same coverage.
    pub fn effective_trials(&self) -> f64 {
        if self.scale > 0.0 {
            self.n_trials as f64 / self.scale
        } else {
            self.n_trials as f64
        }
    }
}

fn check_trials(cfg: &RunConfig) -> Result<()> {
    if cfg.n_trials == 0 {
        return Err(Error::param("n_trials", 0, "must be positive"));
    }
    Ok(())
}

/// Algorithm for perfect measurement: one noisy step, noiseless syndrome.
pub fn run_perfect_mc(layout: &CodeLayout, params: &ModelParams, cfg: &RunConfig) -> Result<TrialStats> {
    check_trials(cfg)?;
    if !params.model.has_perfect_measurement() {
        return Err(Error::UnsupportedModel {
            model: params.model.to_string(),
            operation: "run_perfect_mc".into(),
        });
    }
    plain(layout, params, cfg)
}

/// Repeated noisy rounds, syndrome selection, final noiseless round.
pub fn run_imperfect_mc(layout: &CodeLayout, params: &ModelParams, cfg: &RunConfig) -> Result<TrialStats> {
    check_trials(cfg)?;
    if params.model.has_perfect_measurement() {
        return Err(Error::UnsupportedModel {
            model: params.model.to_string(),
            operation: "run_imperfect_mc".into(),
        });
    }
    plain(layout, params, cfg)
}

fn plain(layout: &CodeLayout, params: &ModelParams, cfg: &RunConfig) -> Result<TrialStats> {
    let sim = Simulator::new(layout, params)?;
    let (n, f) = run_batched(cfg, || sim.new_frame(), |frame, i| {
        let mut d = Sampled {
            rng: trial_rng(cfg.seed, i),
        };
        sim.run(&mut d, frame)
    });
    Ok(TrialStats::plain(cfg.seed, n, f))
}

/// Estimator choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Plain,
    Importance,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" | "mc" | "false" | "0" | "no" => Ok(Method::Plain),
            "importance" | "is" | "true" | "1" | "yes" => Ok(Method::Importance),
            _ => Err(Error::param("importance", s, "expected true or false")),
        }
    }
}

/// Runs the estimator appropriate for the model.
pub fn estimate(layout: &CodeLayout, params: &ModelParams, method: Method, cfg: &RunConfig) -> Result<TrialStats> {
    check_trials(cfg)?;
    match (params.model.has_perfect_measurement(), method) {
        (true, Method::Plain) => run_perfect_mc(layout, params, cfg),
        (true, Method::Importance) => run_perfect_importance(layout, params, cfg),
        (false, Method::Plain) => run_imperfect_mc(layout, params, cfg),
        (false, Method::Importance) => run_imperfect_importance(layout, params, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bacon_shor::{build_code, LayoutKind};
    use crate::noise::ModelKind;

    #[test]
    fn zero_noise_gives_zero_failures() {
        let code = build_code(5, LayoutKind::Standard).unwrap();
        let cfg = RunConfig {
            n_trials: 1000,
            ..RunConfig::default()
        };
        let s = run_perfect_mc(&code, &ModelParams::new(ModelKind::Qp), &cfg).unwrap();
        assert_eq!((s.n_trials, s.n_fail), (1000, 0));
        let s = run_imperfect_mc(&code, &ModelParams::new(ModelKind::MC), &cfg).unwrap();
        assert_eq!(s.n_fail, 0);
    }

    #[test]
    fn rejects_wrong_protocol_and_empty_budget() {
        let code = build_code(3, LayoutKind::Standard).unwrap();
        let cfg = RunConfig::default();
        assert!(run_perfect_mc(&code, &ModelParams::new(ModelKind::MC), &cfg).is_err());
        assert!(run_imperfect_mc(&code, &ModelParams::new(ModelKind::Qp), &cfg).is_err());
        let empty = RunConfig {
            n_trials: 0,
            ..RunConfig::default()
        };
        assert!(run_perfect_mc(&code, &ModelParams::new(ModelKind::Qp), &empty).is_err());
    }

    #[test]
    fn identical_seeds_give_identical_stats() {
        let code = build_code(5, LayoutKind::Standard).unwrap();
        let params = ModelParams {
            p0: 0.02,
            p1: 0.02,
            p2: 0.02,
            r: 0.1,
            q: 0.5,
            p_mst2: 0.01,
            ..ModelParams::new(ModelKind::MC)
        };
        let cfg = |w| RunConfig {
            n_trials: 5000,
            seed: 99,
            workers: Some(w),
            ..RunConfig::default()
        };
        let a = run_imperfect_mc(&code, &params, &cfg(1)).unwrap();
        let b = run_imperfect_mc(&code, &params, &cfg(2)).unwrap();
        assert_eq!(a, b);
        assert!(a.n_fail > 0);
    }

    #[test]
    fn strata_combine() {
        let s = TrialStats::from_strata(
            0,
            vec![
                VStats { v: 1, pr_v: 0.3, n_samples: 0, n_fail: 0, p_fail: 0.0, exact: true },
                VStats { v: 2, pr_v: 0.1, n_samples: 100, n_fail: 10, p_fail: 0.1, exact: false },
            ],
            0.0,
        );
        assert!((s.p_err() - 0.01).abs() < 1e-15);
        assert!((s.effective_trials() - 1000.0).abs() < 1e-9);
    }
}
