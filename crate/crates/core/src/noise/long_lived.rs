//! Step 0 for excitations that may outlive a time step and hop between
//! measured islands before relaxing.

use super::{put, IslandRole, TimeStepContext, SITES};
use crate::error::{Error, Result};
use crate::frame::{BitString, IslandParities, MajoranaString};
use rand::Rng;

/// Branch probabilities of the hop / relax / stay decision tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LongLivedProbs {
    pub p_hop: f64,
    pub p_odd: f64,
    pub p_stay: f64,
    /// Relaxation probability on the final, hop-free iteration.
    pub relax_final: f64,
}

impl LongLivedProbs {
    /// Tree for correlation parameter `q` and relaxation parameter `r`.
    pub fn from_q_r(q: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::param("q", q, "must lie in [0, 1]"));
        }
        if !(r >= 0.0) {
            return Err(Error::param("r", r, "must be non-negative"));
        }
        let stay = if r == 0.0 { 0.0 } else { (-1.0 / r).exp() };
        Ok(LongLivedProbs {
            p_hop: q,
            p_odd: (1.0 - q) * (1.0 - stay),
            p_stay: (1.0 - q) * stay,
            relax_final: 1.0 - stay,
        })
    }

    /// Tree from an explicit probability triple.
    pub fn from_triple(p_hop: f64, p_odd: f64, p_stay: f64) -> Result<Self> {
        for (name, v) in [("p_hop", p_hop), ("p_odd", p_odd), ("p_stay", p_stay)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, v, "must lie in [0, 1]"));
            }
        }
        let total = p_hop + p_odd + p_stay;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("p_hop + p_odd + p_stay", total, "must equal 1"));
        }
        let rest = p_odd + p_stay;
        Ok(LongLivedProbs {
            p_hop,
            p_odd,
            p_stay,
            relax_final: if rest > 0.0 { p_odd / rest } else { 0.0 },
        })
    }
}

/// Runs the decision tree for every odd island. `measured` applies to islands
/// in a measured pair (where hops are possible), `idle` to the rest. Each
/// excitation gets at most `k² = 4` iterations and the last one cannot hop;
/// a hop onto an odd island annihilates both excitations.
pub fn step0_long_lived<R: Rng + ?Sized>(
    parities: &IslandParities,
    ctx: &TimeStepContext,
    measured: &LongLivedProbs,
    idle: &LongLivedProbs,
    rng: &mut R,
) -> MajoranaString {
    let n = ctx.n_islands();
    let mut out = BitString::zeros(n * SITES);
    let mut odd: Vec<bool> = (0..n).map(|j| parities.is_odd(j)).collect();
    let relax = |out: &mut MajoranaString, j: usize, rng: &mut R| {
        let a = rng.gen_range(0..SITES);
        put(out, j, 1 << a);
    };
    for start in 0..n {
        if !odd[start] {
            continue;
        }
        match ctx.roles[start] {
            IslandRole::Idle => {
                if rng.gen::<f64>() < idle.relax_final {
                    relax(&mut out, start, rng);
                }
                odd[start] = false;
            }
            IslandRole::Measured { pair, slot } => {
                let p = &ctx.pairs[pair];
                let iterations = 4;
                let mut here = slot;
                for it in 0..iterations {
                    let island = p.islands[here];
                    let u: f64 = rng.gen();
                    let last = it + 1 == iterations;
                    if !last && u < measured.p_hop {
                        let pc = rng.gen_range(0..2);
                        let there = 1 - here;
                        put(&mut out, island, 1 << p.connected[pc][here]);
                        put(&mut out, p.islands[there], 1 << p.connected[pc][there]);
                        odd[island] = false;
                        if odd[p.islands[there]] {
                            odd[p.islands[there]] = false;
                            break;
                        }
                        here = there;
                        continue;
                    }
                    let relaxes = if last {
                        u < measured.relax_final
                    } else {
                        u < measured.p_hop + measured.p_odd
                    };
                    if relaxes {
                        relax(&mut out, island, rng);
                    }
                    odd[island] = false;
                    break;
                }
            }
        }
    }
    out
}
