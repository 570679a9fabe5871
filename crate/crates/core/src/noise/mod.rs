//! Stochastic Majorana noise models.
//!
//! Every time step has three stages:
//! 0. odd-parity islands relax by a single Majorana operator,
//! 1. (a) single-island quasiparticle or pair-wise dephasing events and
//!    (b) correlated events across each measured island pair,
//! 2. measurement outcomes flip with probability `p_mst`.
//!
//! Events are stored as local 4-bit site masks; bit `a` stands for γ_{j,a+1}.

mod long_lived;
mod table;

pub use long_lived::{step0_long_lived, LongLivedProbs};
pub use table::Discrete;

use crate::bacon_shor::{CodeLayout, MeasuredPair};
use crate::error::{Error, Result};
use crate::frame::{BitString, IslandParities, MajoranaString, TETRON_SITES};
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ModelKind {
    Qp,
    QpBf,
    MC,
    PMC,
    MCLongLived,
}

impl ModelKind {
    /// Models with per-step measurement context (idle vs measured islands).
    pub fn is_circuit(self) -> bool {
        matches!(self, ModelKind::MC | ModelKind::PMC | ModelKind::MCLongLived)
    }

    pub fn has_perfect_measurement(self) -> bool {
        self == ModelKind::Qp
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "qp" => Ok(ModelKind::Qp),
            "qpbf" => Ok(ModelKind::QpBf),
            "mc" => Ok(ModelKind::MC),
            "pmc" => Ok(ModelKind::PMC),
            "mclonglived" => Ok(ModelKind::MCLongLived),
            _ => Err(Error::param(
                "model",
                s,
                "expected one of Qp, QpBf, MC, PMC, MCLongLived",
            )),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Qp => "Qp",
            ModelKind::QpBf => "QpBf",
            ModelKind::MC => "MC",
            ModelKind::PMC => "PMC",
            ModelKind::MCLongLived => "MCLongLived",
        })
    }
}

/// Noise-model parameters. `p0`, `p1`, `p2` are excitation probabilities for
/// islands in a k-island context; Qp and QpBf use `p0` everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub model: ModelKind,
    pub m: usize,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub r: f64,
    pub q: f64,
    pub p_mst1: f64,
    pub p_mst2: f64,
    /// Additive pair-wise dephasing probability from MZM hybridization.
    pub pair_extra: f64,
}

impl ModelParams {
    /// All probabilities zero, tetron islands.
    pub fn new(model: ModelKind) -> Self {
        ModelParams {
            model,
            m: 2,
            p0: 0.0,
            p1: 0.0,
            p2: 0.0,
            r: 0.0,
            q: 0.0,
            p_mst1: 0.0,
            p_mst2: 0.0,
            pair_extra: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("p0", self.p0),
            ("p1", self.p1),
            ("p2", self.p2),
            ("r", self.r),
            ("q", self.q),
            ("p_mst1", self.p_mst1),
            ("p_mst2", self.p_mst2),
            ("pair_extra", self.pair_extra),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, v, "must lie in [0, 1]"));
            }
        }
        if self.m != 2 {
            return Err(Error::param("m", self.m, "only tetrons (m = 2) are simulated"));
        }
        Ok(())
    }

    /// Excitation probability for a k-island context.
    pub fn p_k(&self, k: usize) -> f64 {
        if !self.model.is_circuit() {
            return self.p0;
        }
        match k {
            0 => self.p0,
            1 => self.p1,
            _ => self.p2,
        }
    }
}

/// Per-event probabilities, indexed by measurement rank k ∈ {0, 1, 2}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EventProbs {
    pub model: ModelKind,
    pub p_qp: [f64; 3],
    pub p_pair: [f64; 3],
    pub p_odd: [f64; 3],
    pub p_cor_odd: f64,
    pub p_cor_even: f64,
    pub p_mst: [f64; 3],
}

pub fn derive_event_probs(params: &ModelParams) -> Result<EventProbs> {
    params.validate()?;
    let circuit = params.model.is_circuit();
    let r = params.r;
    let q_k = |k: usize| if circuit && k == 2 { params.q } else { 0.0 };
    let mut p_qp = [0.0; 3];
    let mut p_pair = [0.0; 3];
    let mut p_odd = [0.0; 3];
    for k in 0..3 {
        let pk = params.p_k(k);
        p_pair[k] = pk * (1.0 - q_k(k)) * (1.0 - r) + params.pair_extra;
        p_qp[k] = pk * (1.0 - q_k(k)) * r;
        p_odd[k] = 1.0 - p_qp[k];
        let total = p_pair[k] + p_qp[k];
        if total > 1.0 {
            return Err(Error::ProbabilityOverflow {
                context: format!("single-island events at k = {k}"),
                total,
            });
        }
    }
    let (p_cor_even, p_cor_odd) = if circuit {
        (
            2.0 * params.p2 * params.q * (1.0 - r),
            2.0 * params.p2 * params.q * r,
        )
    } else {
        (0.0, 0.0)
    };
    if p_cor_even + p_cor_odd > 1.0 {
        return Err(Error::ProbabilityOverflow {
            context: "correlated events".into(),
            total: p_cor_even + p_cor_odd,
        });
    }
    let p_mst = match params.model {
        ModelKind::Qp => [0.0; 3],
        _ => [0.0, params.p_mst1, params.p_mst2],
    };
    Ok(EventProbs {
        model: params.model,
        p_qp,
        p_pair,
        p_odd,
        p_cor_odd,
        p_cor_even,
        p_mst,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IslandRole {
    Idle,
    /// Member `slot` of measured pair `pair` in the context's pair list.
    Measured { pair: usize, slot: usize },
}

/// Which islands are idle or measured during one time step, and which gauge
/// outcomes are read out at its end.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeStepContext {
    pub roles: Vec<IslandRole>,
    pub pairs: Vec<MeasuredPair>,
    /// (gauge index, stabilizer index) for each outcome read this step.
    pub measured_gauges: Vec<(usize, usize)>,
}

impl TimeStepContext {
    /// Every island idle and nothing measured.
    pub fn idle(n_islands: usize) -> Self {
        TimeStepContext {
            roles: vec![IslandRole::Idle; n_islands],
            pairs: Vec::new(),
            measured_gauges: Vec::new(),
        }
    }

    /// Every island idle for noise purposes, all gauges read out at once.
    pub fn measure_all(layout: &CodeLayout) -> Self {
        let mut ctx = TimeStepContext::idle(layout.n_islands());
        ctx.measured_gauges = (0..layout.n_gauges())
            .map(|g| (g, layout.stabilizer_of_gauge(g)))
            .collect();
        ctx
    }

    /// Context for step `step` of the measurement schedule.
    pub fn from_schedule(layout: &CodeLayout, step: usize) -> Self {
        let s = &layout.schedule().steps[step];
        let mut roles = vec![IslandRole::Idle; layout.n_islands()];
        for (pi, p) in s.pairs.iter().enumerate() {
            for (slot, &j) in p.islands.iter().enumerate() {
                debug_assert_eq!(roles[j], IslandRole::Idle);
                roles[j] = IslandRole::Measured { pair: pi, slot };
            }
        }
        TimeStepContext {
            roles,
            pairs: s.pairs.clone(),
            measured_gauges: s
                .pairs
                .iter()
                .map(|p| (p.gauge, layout.stabilizer_of_gauge(p.gauge)))
                .collect(),
        }
    }

    pub fn n_islands(&self) -> usize {
        self.roles.len()
    }

    fn measured_sites(&self, island: usize) -> Option<u8> {
        match self.roles[island] {
            IslandRole::Idle => None,
            IslandRole::Measured { pair, slot } => Some(self.pairs[pair].local_mask(slot)),
        }
    }
}

/// Correlated-event table for one measured pair.
#[derive(Clone, Debug)]
pub struct PairNoise {
    pub islands: [usize; 2],
    pub connected: [[usize; 2]; 2],
    /// Outcomes are (mask on islands[0], mask on islands[1]).
    pub correlated: Discrete<(u8, u8)>,
}

#[derive(Clone, Copy, Debug)]
pub struct GaugeNoise {
    pub gauge: usize,
    pub stabilizer: usize,
    pub p_flip: f64,
}

/// Sampling tables for one time step under one model.
#[derive(Clone, Debug)]
pub struct StepNoise {
    pub single: Vec<Discrete<u8>>,
    pub relax: Vec<Discrete<u8>>,
    pub pairs: Vec<PairNoise>,
    pub gauges: Vec<GaugeNoise>,
}

const SITES: usize = TETRON_SITES;

impl StepNoise {
    pub fn new(ctx: &TimeStepContext, probs: &EventProbs) -> Self {
        let model = probs.model;
        let n = ctx.n_islands();
        let mut single = Vec::with_capacity(n);
        let mut relax = Vec::with_capacity(n);
        for j in 0..n {
            let measured = if model.is_circuit() { ctx.measured_sites(j) } else { None };
            let pmc = model == ModelKind::PMC;
            single.push(single_island_table(probs, measured, pmc));
            relax.push(relax_table(probs, measured, pmc));
        }
        let pairs = if model.is_circuit() {
            ctx.pairs
                .iter()
                .map(|p| PairNoise {
                    islands: p.islands,
                    connected: p.connected,
                    correlated: correlated_table(probs, p, model == ModelKind::PMC),
                })
                .collect()
        } else {
            Vec::new()
        };
        let gauges = ctx
            .measured_gauges
            .iter()
            .map(|&(gauge, stabilizer)| GaugeNoise {
                gauge,
                stabilizer,
                p_flip: probs.p_mst[2],
            })
            .collect();
        StepNoise {
            single,
            relax,
            pairs,
            gauges,
        }
    }
}

/// Step 1(a) outcomes for one island. `measured` holds the measured-site mask
/// when the island takes part in a measurement.
fn single_island_table(probs: &EventProbs, measured: Option<u8>, pmc: bool) -> Discrete<u8> {
    let k = if measured.is_some() { 2 } else { 0 };
    let norm = SITES as f64;
    let mut w: Vec<(u8, f64)> = Vec::new();
    for a in 0..SITES {
        let ka = match (pmc, measured) {
            (true, Some(m)) if m >> a & 1 == 0 => 0,
            _ => k,
        };
        w.push((1 << a, probs.p_qp[ka] / norm));
    }
    for a in 0..SITES {
        for b in 0..SITES {
            let mask = (1u8 << a) ^ (1u8 << b);
            let kab = match (pmc, measured) {
                (true, Some(m)) if (m >> a & 1) == 0 && (m >> b & 1) == 0 => 0,
                _ => k,
            };
            if mask != 0 {
                w.push((mask, probs.p_pair[kab] / (norm * norm)));
            }
        }
    }
    Discrete::from_weights(w)
}

/// Step 0 outcomes for an island that starts the step with odd parity.
fn relax_table(probs: &EventProbs, measured: Option<u8>, pmc: bool) -> Discrete<u8> {
    let k = if measured.is_some() { 2 } else { 0 };
    Discrete::from_weights((0..SITES).map(|a| {
        let ka = match (pmc, measured) {
            (true, Some(m)) if m >> a & 1 == 0 => 0,
            _ => k,
        };
        (1u8 << a, probs.p_odd[ka] / SITES as f64)
    }))
}

/// Step 1(b) outcomes for a measured pair.
fn correlated_table(probs: &EventProbs, pair: &MeasuredPair, pmc: bool) -> Discrete<(u8, u8)> {
    let mut w: Vec<((u8, u8), f64)> = Vec::new();
    let bit = |a: usize| 1u8 << a;
    if pmc {
        // γ_{i,a}γ_{i,b}γ_{j,b'} and γ_{i,a}γ_{i,b}γ_{j,b'}γ_{j,c}, with
        // (b, b') dot-connected, a ≠ b and c ≠ b'.
        let mut odd = Vec::new();
        let mut even = Vec::new();
        for i_slot in 0..2 {
            for pc in 0..2 {
                let b = pair.connected[pc][i_slot];
                let b2 = pair.connected[pc][1 - i_slot];
                for a in (0..SITES).filter(|&a| a != b) {
                    let mi = bit(a) ^ bit(b);
                    odd.push(orient(i_slot, mi, bit(b2)));
                    for c in (0..SITES).filter(|&c| c != b2) {
                        even.push(orient(i_slot, mi, bit(b2) ^ bit(c)));
                    }
                }
            }
        }
        let (no, ne) = (odd.len() as f64, even.len() as f64);
        w.extend(odd.into_iter().map(|o| (o, probs.p_cor_odd / no)));
        w.extend(even.into_iter().map(|o| (o, probs.p_cor_even / ne)));
    } else {
        let n_odd = (2 * SITES * SITES * SITES) as f64;
        let n_even = (SITES * SITES * SITES * SITES) as f64;
        for single_slot in 0..2 {
            for a in 0..SITES {
                for b in 0..SITES {
                    for c in 0..SITES {
                        let o = orient(single_slot, bit(a), bit(b) ^ bit(c));
                        w.push((o, probs.p_cor_odd / n_odd));
                    }
                }
            }
        }
        for a in 0..SITES {
            for b in 0..SITES {
                for c in 0..SITES {
                    for e in 0..SITES {
                        w.push(((bit(a) ^ bit(b), bit(c) ^ bit(e)), probs.p_cor_even / n_even));
                    }
                }
            }
        }
    }
    w.retain(|((x, y), _)| *x != 0 || *y != 0);
    Discrete::from_weights(w)
}

/// Places `(mask on slot, mask on the other slot)` in pair order.
fn orient(slot: usize, on_slot: u8, on_other: u8) -> (u8, u8) {
    if slot == 0 {
        (on_slot, on_other)
    } else {
        (on_other, on_slot)
    }
}

fn put(s: &mut MajoranaString, island: usize, mask: u8) {
    s.xor_field(island * SITES, mask as u64, SITES);
}

/// Step 0: each odd island relaxes with probability `p_odd[k]`.
pub fn step0_relax<R: Rng + ?Sized>(
    parities: &IslandParities,
    ctx: &TimeStepContext,
    probs: &EventProbs,
    rng: &mut R,
) -> MajoranaString {
    let noise = StepNoise::new(ctx, probs);
    let mut out = BitString::zeros(ctx.n_islands() * SITES);
    for j in parities.odd_islands() {
        if let Some(&m) = noise.relax[j].sample(rng.gen()) {
            put(&mut out, j, m);
        }
    }
    out
}

/// Step 1: single-island events on every island, correlated events on every
/// measured pair.
pub fn step1_events<R: Rng + ?Sized>(
    ctx: &TimeStepContext,
    probs: &EventProbs,
    rng: &mut R,
) -> MajoranaString {
    let noise = StepNoise::new(ctx, probs);
    let mut out = BitString::zeros(ctx.n_islands() * SITES);
    for (j, t) in noise.single.iter().enumerate() {
        if let Some(&m) = t.sample(rng.gen()) {
            put(&mut out, j, m);
        }
    }
    for p in &noise.pairs {
        if let Some(&(a, b)) = p.correlated.sample(rng.gen()) {
            put(&mut out, p.islands[0], a);
            put(&mut out, p.islands[1], b);
        }
    }
    out
}

/// Step 2: gauge outcomes for the generators read this step, indexed by
/// gauge number; unread gauges stay 0.
pub fn step2_measure<R: Rng + ?Sized>(
    frame: &MajoranaString,
    ctx: &TimeStepContext,
    layout: &CodeLayout,
    probs: &EventProbs,
    rng: &mut R,
) -> BitString {
    let mut out = BitString::zeros(layout.n_gauges());
    for &(g, _) in &ctx.measured_gauges {
        let ideal = layout.gauge_matrix().row(g).and_parity(frame);
        let flip = rng.gen::<f64>() < probs.p_mst[2];
        out.set(g, ideal ^ flip);
    }
    out
}

/// Canonical representatives of the eight single-island classes modulo the
/// full flip 1111: identity, four single MZMs, three pairs containing γ1.
pub const ISLAND_CLASSES: [u8; 8] = [0b0000, 0b0001, 0b0010, 0b0100, 0b1000, 0b0011, 0b0101, 0b1001];

/// Index into [`ISLAND_CLASSES`] of a local mask.
pub fn island_class(mask: u8) -> usize {
    let m = mask & 0xF;
    let w = m.count_ones();
    let canon = if w >= 3 || (w == 2 && m & 1 == 0) { !m & 0xF } else { m };
    ISLAND_CLASSES
        .iter()
        .position(|&c| c == canon)
        .expect("every mask has a class")
}

/// Exact class distribution of one island after step 0 and step 1(a), for an
/// island in a k-island context under a non-PMC model.
pub fn single_island_distribution(probs: &EventProbs, odd_parity: bool, k: usize) -> BTreeMap<u8, f64> {
    let (qp, pair) = (probs.p_qp[k], probs.p_pair[k]);
    let odd = if odd_parity { probs.p_odd[k] } else { 0.0 };
    let step1_id = 1.0 - qp - 0.75 * pair;
    let identity = (1.0 - odd) * step1_id + odd * qp / 4.0;
    let single = (1.0 - odd) * qp / 4.0 + odd / 4.0 * step1_id + 3.0 / 16.0 * odd * pair;
    let double = (1.0 - odd) * pair / 4.0 + odd * qp / 4.0;
    ISLAND_CLASSES
        .iter()
        .map(|&c| {
            let p = match c.count_ones() {
                0 => identity,
                1 => single,
                _ => double,
            };
            (c, p)
        })
        .collect()
}
