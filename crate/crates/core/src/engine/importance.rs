//! Importance sampling: by number of faulty islands for perfect measurement,
//! and by first fault location for the imperfect-measurement protocols.

use super::protocol::{FirstFault, Location, PostSelected, Scripted, Simulator, Injected};
use super::runner::{run_batched, trial_rng, RunConfig};
use super::{TrialStats, VStats};
use crate::bacon_shor::CodeLayout;
use crate::error::{Error, Result};
use crate::noise::ModelParams;
use rand::seq::index::sample;

/// Distribution of the number of successes among independent Bernoulli
/// trials with the given probabilities.
pub fn poisson_binomial(p: &[f64]) -> Vec<f64> {
    let mut dist = vec![0.0; p.len() + 1];
    dist[0] = 1.0;
    for (i, &pi) in p.iter().enumerate() {
        for v in (0..=i + 1).rev() {
            let stay = dist[v] * (1.0 - pi);
            let moved = if v > 0 { dist[v - 1] * pi } else { 0.0 };
            dist[v] = stay + moved;
        }
    }
    dist
}

/// Per-island probability of any step-1 event under a perfect-measurement
/// model, islands starting even.
pub fn island_event_probs(layout: &CodeLayout, params: &ModelParams) -> Result<Vec<f64>> {
    let sim = Simulator::new(layout, params)?;
    Ok(sim.step_noise(0).single.iter().map(|t| t.total()).collect())
}

/// Probability that exactly `v` islands carry an event.
pub fn prob_exactly_v(params: &ModelParams, layout: &CodeLayout, v: usize) -> Result<f64> {
    let p = island_event_probs(layout, params)?;
    Ok(poisson_binomial(&p).get(v).copied().unwrap_or(0.0))
}

fn require_perfect(params: &ModelParams, op: &str) -> Result<()> {
    if params.model.has_perfect_measurement() {
        Ok(())
    } else {
        Err(Error::UnsupportedModel {
            model: params.model.to_string(),
            operation: op.into(),
        })
    }
}

/// Failure probability given exactly one faulty island, by enumeration.
fn exact_single_island(sim: &Simulator<'_>) -> f64 {
    let tables = &sim.step_noise(0).single;
    let n = tables.len();
    let mut frame = sim.new_frame();
    let mut fail = 0.0;
    for (j, t) in tables.iter().enumerate() {
        if t.total() <= 0.0 {
            continue;
        }
        for (&m, w) in t.iter() {
            let mut d = Scripted::new(Some((j, Injected::Island(m))), Vec::new());
            if sim.run(&mut d, &mut frame) {
                fail += w / t.total() / n as f64;
            }
        }
    }
    fail
}

/// Perfect-measurement estimator stratified by the number `v` of faulty
/// islands. `v = 1` is enumerated exactly; `v = 2..=v_trunc` are sampled
/// with up to `cfg.n_trials` trials each, stopping at `cfg.fail_target`.
pub fn run_perfect_importance(
    layout: &CodeLayout,
    params: &ModelParams,
    cfg: &RunConfig,
) -> Result<TrialStats> {
    require_perfect(params, "run_perfect_importance")?;
    if cfg.v_trunc < 2 {
        return Err(Error::param("v_trunc", cfg.v_trunc, "must be at least 2"));
    }
    let sim = Simulator::new(layout, params)?;
    let p = island_event_probs(layout, params)?;
    if p.iter().any(|&x| (x - p[0]).abs() > 1e-15) {
        return Err(Error::UnsupportedModel {
            model: params.model.to_string(),
            operation: "run_perfect_importance with island-dependent rates".into(),
        });
    }
    let n = p.len();
    let pr = poisson_binomial(&p);
    let mut per_v = vec![VStats {
        v: 1,
        pr_v: pr[1],
        n_samples: 0,
        n_fail: 0,
        p_fail: exact_single_island(&sim),
        exact: true,
    }];
    let v_max = cfg.v_trunc.min(n);
    for v in 2..=v_max {
        if pr[v] <= 0.0 {
            continue;
        }
        let base = (v as u64) << 40;
        let (done, fails) = run_batched(
            cfg,
            || (sim.new_frame(), vec![false; n]),
            |(frame, chosen), i| {
                let mut rng = trial_rng(cfg.seed, base + i);
                chosen.iter_mut().for_each(|c| *c = false);
                for j in sample(&mut rng, n, v).iter() {
                    chosen[j] = true;
                }
                let mut d = PostSelected::new(rng, chosen);
                sim.run(&mut d, frame)
            },
        );
        per_v.push(VStats {
            v,
            pr_v: pr[v],
            n_samples: done,
            n_fail: fails,
            p_fail: fails as f64 / done.max(1) as f64,
            exact: false,
        });
    }
    let tail: f64 = pr[v_max + 1..].iter().sum();
    Ok(TrialStats::from_strata(cfg.seed, per_v, tail))
}

/// Location weights for the first fault and the probability of any fault.
pub struct FirstFaultPlan {
    pub locations: Vec<Location>,
    /// Cumulative conditional probability of each location being first.
    pub cum: Vec<f64>,
    pub p_any: f64,
}

impl FirstFaultPlan {
    pub fn new(sim: &Simulator<'_>) -> Self {
        let locations = sim.locations();
        let mut log_none: f64 = 0.0;
        let mut raw = Vec::with_capacity(locations.len());
        for l in &locations {
            raw.push(log_none.exp() * l.p);
            log_none += (-l.p).ln_1p();
        }
        let p_any = -log_none.exp_m1();
        let mut acc = 0.0;
        let cum = raw
            .iter()
            .map(|w| {
                acc += w / p_any;
                acc
            })
            .collect();
        FirstFaultPlan {
            locations,
            cum,
            p_any,
        }
    }

    /// Location index for a uniform draw `u`.
    pub fn pick(&self, u: f64) -> usize {
        let i = self.cum.partition_point(|&c| c <= u);
        let mut i = i.min(self.cum.len() - 1);
        // Skip zero-probability locations that share a cumulative value.
        while self.locations[i].p <= 0.0 && i > 0 {
            i -= 1;
        }
        i
    }
}

/// First-fault estimator for the imperfect-measurement protocols.
pub fn run_imperfect_importance(
    layout: &CodeLayout,
    params: &ModelParams,
    cfg: &RunConfig,
) -> Result<TrialStats> {
    if params.model.has_perfect_measurement() {
        return Err(Error::UnsupportedModel {
            model: params.model.to_string(),
            operation: "run_imperfect_importance".into(),
        });
    }
    let sim = Simulator::new(layout, params)?;
    let plan = FirstFaultPlan::new(&sim);
    if plan.p_any <= 0.0 {
        return Ok(TrialStats::weighted(cfg.seed, cfg.n_trials, 0, 0.0));
    }
    let (done, fails) = run_batched(cfg, || sim.new_frame(), |frame, i| {
        use rand::Rng;
        let mut rng = trial_rng(cfg.seed, i);
        let first = plan.pick(rng.gen());
        let mut d = FirstFault::new(rng, first);
        sim.run(&mut d, frame)
    });
    Ok(TrialStats::weighted(cfg.seed, done, fails, plan.p_any))
}
