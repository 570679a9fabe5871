//! One error-correction trial: noisy time steps, syndrome rounds, selection,
//! correction and a final noiseless round.
//!
//! Every random choice goes through a [`Driver`], so the same trial code
//! serves plain Monte Carlo, first-fault importance sampling, post-selected
//! noise and exhaustive fault injection.

use crate::bacon_shor::{is_logical_failure, select_syndrome, CodeLayout, Syndrome};
use crate::error::{Error, Result};
use crate::frame::{Frame, MajoranaString, TETRON_SITES};
use crate::noise::{
    derive_event_probs, step0_long_lived, Discrete, EventProbs, LongLivedProbs, ModelKind,
    ModelParams, StepNoise, TimeStepContext,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use smallvec::SmallVec;

/// Shape of the simulated protocol for a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolSpec {
    pub model: ModelKind,
    pub rounds: usize,
    pub steps_per_round: usize,
    /// True when rounds carry noisy syndrome measurements that are selected,
    /// applied and followed by a noiseless round. False means a single noisy
    /// step followed by noiseless extraction.
    pub final_perfect_round: bool,
}

impl ProtocolSpec {
    pub fn for_model(model: ModelKind) -> Self {
        match model {
            ModelKind::Qp => ProtocolSpec {
                model,
                rounds: 1,
                steps_per_round: 1,
                final_perfect_round: false,
            },
            ModelKind::QpBf => ProtocolSpec {
                model,
                rounds: 4,
                steps_per_round: 1,
                final_perfect_round: true,
            },
            ModelKind::MC | ModelKind::PMC | ModelKind::MCLongLived => ProtocolSpec {
                model,
                rounds: 4,
                steps_per_round: 4,
                final_perfect_round: true,
            },
        }
    }

    pub fn total_steps(&self) -> usize {
        self.rounds * self.steps_per_round
    }
}

/// Source of every noise decision in a trial. Island, pair and gauge calls
/// are fault locations and arrive in a fixed order; relaxation calls are not.
pub trait Driver {
    fn island(&mut self, table: &Discrete<u8>) -> Option<u8>;
    fn pair(&mut self, table: &Discrete<(u8, u8)>) -> Option<(u8, u8)>;
    fn flip(&mut self, p: f64) -> bool;
    /// Step-0 decision for an island that starts the step odd.
    fn relax(&mut self, island: usize, table: &Discrete<u8>) -> Option<u8>;
    /// Random source for samplers that need more than a table lookup.
    fn rng(&mut self) -> Option<&mut ChaCha8Rng>;
}

/// Plain Monte Carlo.
pub struct Sampled {
    pub rng: ChaCha8Rng,
}

impl Driver for Sampled {
    #[inline]
    fn island(&mut self, table: &Discrete<u8>) -> Option<u8> {
        table.sample(self.rng.gen()).copied()
    }
    #[inline]
    fn pair(&mut self, table: &Discrete<(u8, u8)>) -> Option<(u8, u8)> {
        table.sample(self.rng.gen()).copied()
    }
    #[inline]
    fn flip(&mut self, p: f64) -> bool {
        self.rng.gen::<f64>() < p
    }
    fn relax(&mut self, _island: usize, table: &Discrete<u8>) -> Option<u8> {
        table.sample(self.rng.gen()).copied()
    }
    fn rng(&mut self) -> Option<&mut ChaCha8Rng> {
        Some(&mut self.rng)
    }
}

/// Nothing happens before location `first`, a forced event happens there,
/// and ordinary sampling resumes afterwards.
pub struct FirstFault {
    pub rng: ChaCha8Rng,
    pub first: usize,
    counter: usize,
}

impl FirstFault {
    pub fn new(rng: ChaCha8Rng, first: usize) -> Self {
        FirstFault {
            rng,
            first,
            counter: 0,
        }
    }

    #[inline]
    fn next(&mut self) -> std::cmp::Ordering {
        let c = self.counter;
        self.counter += 1;
        c.cmp(&self.first)
    }
}

impl Driver for FirstFault {
    #[inline]
    fn island(&mut self, table: &Discrete<u8>) -> Option<u8> {
        use std::cmp::Ordering::*;
        match self.next() {
            Less => None,
            Equal => Some(*table.sample_given_event(self.rng.gen())),
            Greater => table.sample(self.rng.gen()).copied(),
        }
    }
    #[inline]
    fn pair(&mut self, table: &Discrete<(u8, u8)>) -> Option<(u8, u8)> {
        use std::cmp::Ordering::*;
        match self.next() {
            Less => None,
            Equal => Some(*table.sample_given_event(self.rng.gen())),
            Greater => table.sample(self.rng.gen()).copied(),
        }
    }
    #[inline]
    fn flip(&mut self, p: f64) -> bool {
        use std::cmp::Ordering::*;
        match self.next() {
            Less => false,
            Equal => true,
            Greater => self.rng.gen::<f64>() < p,
        }
    }
    fn relax(&mut self, _island: usize, table: &Discrete<u8>) -> Option<u8> {
        table.sample(self.rng.gen()).copied()
    }
    fn rng(&mut self) -> Option<&mut ChaCha8Rng> {
        Some(&mut self.rng)
    }
}

/// Events on exactly the islands flagged in `chosen`, drawn conditional on
/// something happening; every other location is silent.
pub struct PostSelected<'a> {
    pub rng: ChaCha8Rng,
    pub chosen: &'a [bool],
    counter: usize,
}

impl<'a> PostSelected<'a> {
    pub fn new(rng: ChaCha8Rng, chosen: &'a [bool]) -> Self {
        PostSelected {
            rng,
            chosen,
            counter: 0,
        }
    }
}

impl Driver for PostSelected<'_> {
    fn island(&mut self, table: &Discrete<u8>) -> Option<u8> {
        let j = self.counter;
        self.counter += 1;
        if self.chosen[j % self.chosen.len()] {
            Some(*table.sample_given_event(self.rng.gen()))
        } else {
            None
        }
    }
    fn pair(&mut self, _table: &Discrete<(u8, u8)>) -> Option<(u8, u8)> {
        None
    }
    fn flip(&mut self, _p: f64) -> bool {
        false
    }
    fn relax(&mut self, _island: usize, table: &Discrete<u8>) -> Option<u8> {
        table.sample(self.rng.gen()).copied()
    }
    fn rng(&mut self) -> Option<&mut ChaCha8Rng> {
        Some(&mut self.rng)
    }
}

/// Forced outcome at one fault location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Injected {
    Island(u8),
    Pair(u8, u8),
    Flip,
}

/// Deterministic replay: one injected fault, forced relaxation of odd
/// islands onto scripted sites, nothing else.
pub struct Scripted {
    pub target: Option<(usize, Injected)>,
    pub relax_sites: Vec<u8>,
    pub relax_calls: usize,
    counter: usize,
}

impl Scripted {
    pub fn new(target: Option<(usize, Injected)>, relax_sites: Vec<u8>) -> Self {
        Scripted {
            target,
            relax_sites,
            relax_calls: 0,
            counter: 0,
        }
    }

    fn hit(&mut self) -> Option<Injected> {
        let c = self.counter;
        self.counter += 1;
        match self.target {
            Some((t, inj)) if t == c => Some(inj),
            _ => None,
        }
    }
}

impl Driver for Scripted {
    fn island(&mut self, _table: &Discrete<u8>) -> Option<u8> {
        match self.hit() {
            Some(Injected::Island(m)) => Some(m),
            _ => None,
        }
    }
    fn pair(&mut self, _table: &Discrete<(u8, u8)>) -> Option<(u8, u8)> {
        match self.hit() {
            Some(Injected::Pair(a, b)) => Some((a, b)),
            _ => None,
        }
    }
    fn flip(&mut self, _p: f64) -> bool {
        matches!(self.hit(), Some(Injected::Flip))
    }
    fn relax(&mut self, _island: usize, _table: &Discrete<u8>) -> Option<u8> {
        let site = self.relax_sites.get(self.relax_calls).copied().unwrap_or(0);
        self.relax_calls += 1;
        Some(1 << site)
    }
    fn rng(&mut self) -> Option<&mut ChaCha8Rng> {
        None
    }
}

/// Kind of a fault location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocationKind {
    Island(usize),
    /// Index into the step's measured pairs.
    Pair(usize),
    Gauge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Location {
    pub round: usize,
    pub step: usize,
    pub kind: LocationKind,
    /// Probability that a fault happens here.
    pub p: f64,
}

/// Precomputed tables for running trials of one model on one layout.
pub struct Simulator<'a> {
    layout: &'a CodeLayout,
    probs: EventProbs,
    spec: ProtocolSpec,
    contexts: Vec<TimeStepContext>,
    noise: Vec<StepNoise>,
    step_stabs: Vec<Vec<usize>>,
    long_lived: Option<(LongLivedProbs, LongLivedProbs)>,
}

impl<'a> Simulator<'a> {
    pub fn new(layout: &'a CodeLayout, params: &ModelParams) -> Result<Self> {
        let probs = derive_event_probs(params)?;
        let spec = ProtocolSpec::for_model(params.model);
        let contexts: Vec<TimeStepContext> = match params.model {
            ModelKind::Qp => vec![TimeStepContext::idle(layout.n_islands())],
            ModelKind::QpBf => vec![TimeStepContext::measure_all(layout)],
            _ => (0..4).map(|s| TimeStepContext::from_schedule(layout, s)).collect(),
        };
        let noise = contexts.iter().map(|c| StepNoise::new(c, &probs)).collect();
        let step_stabs = contexts
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.measured_gauges.iter().map(|&(_, s)| s).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let long_lived = if params.model == ModelKind::MCLongLived {
            if params.r <= 0.0 {
                return Err(Error::param(
                    "r",
                    params.r,
                    "the long-lived model needs r > 0",
                ));
            }
            Some((
                LongLivedProbs::from_q_r(params.q, params.r)?,
                LongLivedProbs::from_q_r(0.0, params.r)?,
            ))
        } else {
            None
        };
        Ok(Simulator {
            layout,
            probs,
            spec,
            contexts,
            noise,
            step_stabs,
            long_lived,
        })
    }

    pub fn layout(&self) -> &CodeLayout {
        self.layout
    }

    pub fn probs(&self) -> &EventProbs {
        &self.probs
    }

    pub fn spec(&self) -> &ProtocolSpec {
        &self.spec
    }

    pub fn step_noise(&self, step: usize) -> &StepNoise {
        &self.noise[step]
    }

    pub fn new_frame(&self) -> Frame {
        Frame::new(self.layout.n_islands(), TETRON_SITES)
    }

    /// Every fault location in driver-call order.
    pub fn locations(&self) -> Vec<Location> {
        let mut out = Vec::new();
        for round in 0..self.spec.rounds {
            for step in 0..self.spec.steps_per_round {
                let noise = &self.noise[step];
                for (j, t) in noise.single.iter().enumerate() {
                    out.push(Location {
                        round,
                        step,
                        kind: LocationKind::Island(j),
                        p: t.total(),
                    });
                }
                for (pi, pn) in noise.pairs.iter().enumerate() {
                    out.push(Location {
                        round,
                        step,
                        kind: LocationKind::Pair(pi),
                        p: pn.correlated.total(),
                    });
                }
                if self.spec.final_perfect_round {
                    for g in &noise.gauges {
                        out.push(Location {
                            round,
                            step,
                            kind: LocationKind::Gauge(g.gauge),
                            p: g.p_flip,
                        });
                    }
                }
            }
        }
        out
    }

    /// Runs one trial from the code state and reports a logical failure.
    #[inline]
    pub fn run<D: Driver>(&self, driver: &mut D, frame: &mut Frame) -> bool {
        self.run_from(driver, frame, None)
    }

    /// Runs one trial starting from the error `initial`.
    pub fn run_from<D: Driver>(
        &self,
        driver: &mut D,
        frame: &mut Frame,
        initial: Option<&MajoranaString>,
    ) -> bool {
        frame.reset();
        if let Some(e) = initial {
            frame.apply(e);
        }
        let measuring = self.spec.final_perfect_round;
        let n_stab = self.layout.n_stabilizers();
        let mut rounds: SmallVec<[Syndrome; 8]> = SmallVec::new();
        for _ in 0..self.spec.rounds {
            let mut bits = 0u64;
            for s in 0..self.spec.steps_per_round {
                let noise = &self.noise[s];
                self.step0(driver, frame, s);
                for (j, t) in noise.single.iter().enumerate() {
                    if let Some(m) = driver.island(t) {
                        frame.apply_local(j, m);
                    }
                }
                for pn in &noise.pairs {
                    if let Some((a, b)) = driver.pair(&pn.correlated) {
                        frame.apply_local(pn.islands[0], a);
                        frame.apply_local(pn.islands[1], b);
                    }
                }
                if measuring {
                    for g in &noise.gauges {
                        if driver.flip(g.p_flip) {
                            bits ^= 1 << g.stabilizer;
                        }
                    }
                    let supports = self.layout.stab_supports();
                    for &st in &self.step_stabs[s] {
                        if supports[st].and_parity(frame.string()) {
                            bits ^= 1 << st;
                        }
                    }
                }
            }
            if measuring {
                rounds.push(Syndrome { bits, len: n_stab });
            }
        }
        if measuring {
            let selected = select_syndrome(&rounds);
            frame.apply(&self.layout.correction(selected));
        }
        if measuring {
            // Excitations from the last noisy step relax at the start of the
            // next step, before the noiseless round reads the syndrome.
            self.step0(driver, frame, 0);
        }
        let s = self.layout.syndrome(frame.string());
        frame.apply(&self.layout.correction(s));
        is_logical_failure(frame.string(), self.layout)
    }

    fn step0<D: Driver>(&self, driver: &mut D, frame: &mut Frame, s: usize) {
        if !frame.parities().any_odd() {
            return;
        }
        if let Some((measured, idle)) = &self.long_lived {
            if let Some(rng) = driver.rng() {
                let ev = step0_long_lived(frame.parities(), &self.contexts[s], measured, idle, rng);
                frame.apply(&ev);
                return;
            }
        }
        let odd: SmallVec<[usize; 8]> = frame.parities().odd_islands().collect();
        for j in odd {
            if let Some(m) = driver.relax(j, &self.noise[s].relax[j]) {
                frame.apply_local(j, m);
            }
        }
    }
}
