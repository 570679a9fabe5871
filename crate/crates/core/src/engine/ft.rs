//! Exhaustive fault injection.
//!
//! EC A': every single fault (each location, each outcome with nonzero
//! probability) starting from the code state, with odd islands relaxed in the
//! next step onto every possible site, must not cause a logical failure.
//! EC B: every initial Pauli error on at most `t` islands must be corrected
//! by the fault-free protocol.

use super::protocol::{Injected, LocationKind, Scripted, Simulator};
use crate::bacon_shor::{CodeLayout, LayoutKind, Pauli};
use crate::error::Result;
use crate::frame::BitString;
use crate::noise::{ModelKind, ModelParams};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FtViolation {
    pub condition: &'static str,
    pub round: Option<usize>,
    pub step: Option<usize>,
    pub location: String,
    pub fault: String,
    pub relax_sites: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FtReport {
    pub model: ModelKind,
    pub d: usize,
    pub layout: LayoutKind,
    pub ec_a_runs: usize,
    pub ec_b_weight: usize,
    pub ec_b_runs: usize,
    pub violations: Vec<FtViolation>,
}

impl FtReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Parameters that switch on every event type of `model`.
pub fn all_events_params(model: ModelKind) -> ModelParams {
    ModelParams {
        p0: 0.01,
        p1: 0.01,
        p2: 0.01,
        r: 0.2,
        q: 0.3,
        p_mst1: 0.01,
        p_mst2: 0.01,
        ..ModelParams::new(model)
    }
}

/// Largest EC B weight checked for a model: (d−1)/2, or 1 when correlated
/// events are present.
pub fn ec_b_weight(layout: &CodeLayout, params: &ModelParams) -> usize {
    let t = (layout.d() - 1) / 2;
    if params.model.is_circuit() && params.q > 0.0 {
        t.min(1)
    } else {
        t
    }
}

pub fn ft_check(layout: &CodeLayout, params: &ModelParams) -> Result<FtReport> {
    let sim = Simulator::new(layout, params)?;
    let mut violations = Vec::new();
    let mut ec_a_runs = 0;
    let mut frame = sim.new_frame();
    for (li, loc) in sim.locations().iter().enumerate() {
        if loc.p <= 0.0 {
            continue;
        }
        let noise = sim.step_noise(loc.step);
        let faults: Vec<Injected> = match loc.kind {
            LocationKind::Island(j) => noise.single[j].iter().map(|(&m, _)| Injected::Island(m)).collect(),
            LocationKind::Pair(pi) => noise.pairs[pi]
                .correlated
                .iter()
                .map(|(&(a, b), _)| Injected::Pair(a, b))
                .collect(),
            LocationKind::Gauge(_) => vec![Injected::Flip],
        };
        for fault in faults {
            let mut probe = Scripted::new(Some((li, fault)), Vec::new());
            sim.run(&mut probe, &mut frame);
            let n_relax = probe.relax_calls;
            for combo in 0..4usize.pow(n_relax as u32) {
                let sites: Vec<u8> = (0..n_relax).map(|k| (combo >> (2 * k) & 3) as u8).collect();
                let mut d = Scripted::new(Some((li, fault)), sites.clone());
                ec_a_runs += 1;
                if sim.run(&mut d, &mut frame) {
                    violations.push(FtViolation {
                        condition: "EC A'",
                        round: Some(loc.round),
                        step: Some(loc.step),
                        location: format!("{:?}", loc.kind),
                        fault: format!("{fault:?}"),
                        relax_sites: sites,
                    });
                }
            }
        }
    }
    let weight = ec_b_weight(layout, params);
    let mut ec_b_runs = 0;
    let n = layout.n_islands();
    let mut islands: Vec<usize> = Vec::new();
    let mut check = |islands: &[usize], violations: &mut Vec<FtViolation>| {
        let w = islands.len();
        for code in 0..3usize.pow(w as u32) {
            let mut e = BitString::zeros(layout.n_mzm());
            let mut desc = Vec::new();
            for (k, &j) in islands.iter().enumerate() {
                let p = Pauli::ALL[code / 3usize.pow(k as u32) % 3];
                e.xor_assign(&layout.pauli_string(j, p));
                desc.push(format!("{p:?}{j}"));
            }
            let mut d = Scripted::new(None, Vec::new());
            ec_b_runs += 1;
            if sim.run_from(&mut d, &mut frame, Some(&e)) {
                violations.push(FtViolation {
                    condition: "EC B",
                    round: None,
                    step: None,
                    location: "initial".into(),
                    fault: desc.join(" "),
                    relax_sites: Vec::new(),
                });
            }
        }
    };
    fn subsets(n: usize, w: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == w {
            f(cur);
            return;
        }
        for j in start..n {
            cur.push(j);
            subsets(n, w, j + 1, cur, f);
            cur.pop();
        }
    }
    for w in 1..=weight {
        subsets(n, w, 0, &mut islands, &mut |s| check(s, &mut violations));
    }
    Ok(FtReport {
        model: params.model,
        d: layout.d(),
        layout: layout.layout(),
        ec_a_runs,
        ec_b_weight: weight,
        ec_b_runs,
        violations,
    })
}
