//! Device parameters to noise-model parameters.
//!
//! Energies are given in Kelvin (that is, as E/k_B) and times in nanoseconds.
//! An energy E becomes the rate E/ħ through [`KELVIN_TO_RATE_PER_NS`]. All
//! O(1) prefactors of the parametric rate estimates are set to exactly 1.

use crate::error::{Error, Result};
use crate::noise::{ModelKind, ModelParams};
use serde::{Deserialize, Serialize};

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// k_B·(1 K)/ħ expressed in ns⁻¹.
pub const KELVIN_TO_RATE_PER_NS: f64 = BOLTZMANN / HBAR * 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Superconducting gap (K).
    pub delta: f64,
    /// Temperature (K).
    pub temperature: f64,
    /// Charging energy (K).
    pub e_c: f64,
    /// Electron-phonon time scale (ns).
    pub tau0: f64,
    /// Dot-island conductance for k = 0, 1, 2 measured islands.
    pub g_t: [f64; 3],
    /// Quantum-dot level spacing (K).
    pub delta_dot: f64,
    /// Island level spacing (K).
    pub delta_is: f64,
    /// Island-island conductance.
    pub g_isis: f64,
    /// Time-step length (ns).
    pub tau: f64,
    /// Unit-SNR measurement time for k = 0, 1, 2 (ns); entry 0 is unused.
    pub tau_mst: [f64; 3],
    /// Integrated electric-field spectral function (ns⁻²).
    pub s_ee_int: f64,
    /// MZM separation in coherence lengths.
    pub l_over_xi: f64,
    /// MZM pairs per island.
    pub m: usize,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            delta: 2.0,
            temperature: 0.15,
            e_c: 2.0,
            tau0: 50.0,
            g_t: [0.0, 3e-5, 6e-5],
            delta_dot: 1.0,
            delta_is: 1e-3,
            g_isis: 1e-5,
            tau: 2000.0,
            tau_mst: [1.0, 100.0, 200.0],
            s_ee_int: 0.0,
            l_over_xi: 30.0,
            m: 2,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<Vec<String>> {
        let positive = [
            ("delta", self.delta),
            ("temperature", self.temperature),
            ("e_c", self.e_c),
            ("tau0", self.tau0),
            ("delta_dot", self.delta_dot),
            ("delta_is", self.delta_is),
            ("tau", self.tau),
            ("tau_mst1", self.tau_mst[1]),
            ("tau_mst2", self.tau_mst[2]),
            ("l_over_xi", self.l_over_xi),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, v, "must be positive and finite"));
            }
        }
        let non_negative = [
            ("g_t0", self.g_t[0]),
            ("g_t1", self.g_t[1]),
            ("g_t2", self.g_t[2]),
            ("g_isis", self.g_isis),
            ("s_ee_int", self.s_ee_int),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, v, "must be non-negative and finite"));
            }
        }
        if self.m == 0 {
            return Err(Error::param("m", self.m, "must be positive"));
        }
        let mut warnings = Vec::new();
        if self.temperature >= self.delta.min(self.e_c) {
            warnings.push(format!(
                "temperature {} K is not below min(delta, e_c) = {} K",
                self.temperature,
                self.delta.min(self.e_c)
            ));
        }
        Ok(warnings)
    }
}

/// (excitation, relaxation) rates in ns⁻¹ for the above-gap quasiparticle
/// state.
pub fn thermal_rates(p: &DeviceParams) -> (f64, f64) {
    let relax = 1.0 / p.tau0;
    (relax * (-p.delta / p.temperature).exp(), relax)
}

/// (excitation, relaxation) rates in ns⁻¹ for charge exchange with the
/// quantum dot in a k-island context. The level spacing is the larger of
/// the dot spacing and the gap.
pub fn poisoning_rates(p: &DeviceParams, k: usize) -> (f64, f64) {
    let delta = p.delta_dot.max(p.delta) * KELVIN_TO_RATE_PER_NS;
    let relax = p.g_t[k] * delta;
    (relax * (-p.e_c / p.temperature).exp(), relax)
}

/// (charge, thermal) excitation transfer rates in ns⁻¹ between two islands
/// joined by a measurement.
pub fn transfer_rates(p: &DeviceParams) -> (f64, f64) {
    let delta = p.delta * KELVIN_TO_RATE_PER_NS;
    let charge = p.g_isis * delta;
    let thermal = p.g_isis * p.g_isis * delta * p.delta_is / p.e_c;
    (charge, thermal)
}

/// Hybridization dephasing rate in ns⁻¹.
pub fn hybridization_rate(p: &DeviceParams) -> f64 {
    p.s_ee_int.sqrt() * (-p.l_over_xi).exp()
}

/// Noise-model parameters and any physics warnings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateConversion {
    pub params: ModelParams,
    /// Excitation probability per k before the model picks p0/p1/p2.
    pub p: [f64; 3],
    /// Relaxation parameter per k.
    pub r: [f64; 3],
    pub warnings: Vec<String>,
}

pub fn model_params_from_rates(p: &DeviceParams, model: ModelKind) -> Result<RateConversion> {
    let mut warnings = p.validate()?;
    let (th_up, th_down) = thermal_rates(p);
    let two_m = 2.0 * p.m as f64;
    let mut pk = [0.0; 3];
    let mut rk = [0.0; 3];
    for k in 0..3 {
        let (qp_up, qp_down) = poisoning_rates(p, k);
        pk[k] = two_m * (th_up + qp_up) * p.tau;
        // Only excited states that can be reached contribute a relaxation time.
        let mut tau_r: f64 = 0.0;
        if th_up > 0.0 {
            tau_r = tau_r.max(1.0 / th_down);
        }
        if qp_up > 0.0 {
            tau_r = tau_r.max(1.0 / qp_down);
        }
        rk[k] = tau_r / p.tau;
    }
    let r = rk.iter().copied().fold(0.0, f64::max);
    if r >= 1.0 {
        return Err(Error::SlowRelaxation(r));
    }
    let (charge, thermal) = transfer_rates(p);
    let (_, qp_down2) = poisoning_rates(p, 2);
    let mut q: f64 = 0.0;
    if qp_down2 > 0.0 {
        q = q.max((charge / qp_down2).exp_m1());
    }
    q = q.max((thermal / th_down).exp_m1());
    let q = q.clamp(0.0, 1.0);
    let p_mst = |k: usize| (-p.tau / p.tau_mst[k]).exp();
    let pair_extra = p.m as f64 * hybridization_rate(p) * p.tau;
    for (k, v) in pk.iter().enumerate() {
        if *v > 1.0 {
            return Err(Error::param(
                &format!("p{k}"),
                v,
                "excitation probability exceeds 1; shorten the time step",
            ));
        }
    }
    if !(pk[0] < pk[1] && pk[1] <= pk[2] * 1.5) {
        warnings.push(format!(
            "expected p0 < p1 <= p2 (up to O(1)); got p = [{:.3e}, {:.3e}, {:.3e}]",
            pk[0], pk[1], pk[2]
        ));
    }
    let params = ModelParams {
        model,
        m: p.m,
        p0: pk[0],
        p1: pk[1],
        p2: pk[2],
        r,
        q,
        p_mst1: p_mst(1),
        p_mst2: p_mst(2),
        pair_extra: pair_extra.min(1.0),
    };
    params.validate()?;
    Ok(RateConversion {
        params,
        p: pk,
        r: rk,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::derive_event_probs;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn kelvin_conversion_constant() {
        // 1 K · k_B / ħ ≈ 1.309e11 s⁻¹.
        assert_relative_eq!(KELVIN_TO_RATE_PER_NS, 130.92, max_relative = 1e-3);
    }

    #[test]
    fn thermal_rate_examples() {
        let mut p = DeviceParams {
            tau0: 50.0,
            delta: 10.0,
            temperature: 1.0,
            ..DeviceParams::default()
        };
        let (up, down) = thermal_rates(&p);
        assert_relative_eq!(down, 1.0 / 50.0);
        // Per second: (1/50 ns)·e⁻¹⁰ ≈ 9.08e2 s⁻¹.
        assert_relative_eq!(up * 1e9, 2e7 * (-10.0f64).exp(), max_relative = 1e-12);
        assert!((up * 1e9 - 908.0).abs() < 1.0);
        p.temperature = 1e-6;
        assert_eq!(thermal_rates(&p).0, 0.0);
        p.delta = 0.0;
        p.temperature = 1.0;
        let (up, down) = thermal_rates(&p);
        assert_eq!(up, down);
    }

    #[test]
    fn poisoning_rate_examples() {
        let mut p = DeviceParams::default();
        assert_eq!(poisoning_rates(&p, 0), (0.0, 0.0));
        p.g_t[2] = 1e-2;
        p.delta = 2.0;
        p.delta_dot = 2.0;
        p.e_c = 5.0;
        p.temperature = 1.0;
        let (up, down) = poisoning_rates(&p, 2);
        // Same rate in SI units: g·δ·k_B/ħ·e⁻⁵ in s⁻¹.
        let si = 1e-2 * 2.0 * BOLTZMANN / HBAR * (-5.0f64).exp();
        assert_relative_eq!(up * 1e9, si, max_relative = 1e-12);
        assert_relative_eq!(down * 1e9, si * 5.0f64.exp(), max_relative = 1e-12);
        p.temperature = 1e-6;
        assert_eq!(poisoning_rates(&p, 2).0, 0.0);
        assert_eq!(poisoning_rates(&p, 2).1, down);
    }

    #[test]
    fn transfer_rate_examples() {
        let mut p = DeviceParams::default();
        let (c, t) = transfer_rates(&p);
        assert_relative_eq!(t / c, p.g_isis * p.delta_is / p.e_c, max_relative = 1e-12);
        let (th_up, _) = thermal_rates(&p);
        let (qp_up, _) = poisoning_rates(&p, 2);
        assert!(c > 100.0 * th_up.max(qp_up));
        p.g_isis = 0.0;
        assert_eq!(transfer_rates(&p), (0.0, 0.0));
    }

    #[test]
    fn conversion_examples() {
        let mut p = DeviceParams {
            temperature: 1e-3,
            ..DeviceParams::default()
        };
        let out = model_params_from_rates(&p, ModelKind::MC).unwrap();
        assert_eq!(out.p, [0.0; 3]);
        p.temperature = 0.15;
        p.tau = 10.0 * p.tau_mst[2];
        let out = model_params_from_rates(&p, ModelKind::MC).unwrap();
        assert_relative_eq!(out.params.p_mst2, (-10.0f64).exp(), max_relative = 1e-12);
        assert!((out.params.p_mst2 - 4.5e-5).abs() < 1e-6);
    }

    #[test]
    fn small_transfer_gives_linear_q() {
        let p = DeviceParams {
            g_isis: 1e-9,
            ..DeviceParams::default()
        };
        let out = model_params_from_rates(&p, ModelKind::MC).unwrap();
        let (charge, _) = transfer_rates(&p);
        let (_, down) = poisoning_rates(&p, 2);
        let x = charge / down;
        assert_relative_eq!(out.params.q, x, max_relative = x);
        assert_relative_eq!(out.params.q, x.exp_m1(), max_relative = 1e-9);
    }

    #[test]
    fn slow_relaxation_is_rejected() {
        let p = DeviceParams {
            tau: 10.0,
            ..DeviceParams::default()
        };
        assert!(matches!(
            model_params_from_rates(&p, ModelKind::MC),
            Err(Error::SlowRelaxation(_))
        ));
    }

    #[test]
    fn defaults_are_in_the_fast_relaxation_regime() {
        let out = model_params_from_rates(&DeviceParams::default(), ModelKind::MC).unwrap();
        assert!(out.params.r > 0.0 && out.params.r < 0.1);
        assert!(out.params.q > 0.0 && out.params.q < 0.5);
        assert!(out.p[0] < out.p[1] && out.p[1] <= out.p[2]);
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);
    }

    proptest! {
        #[test]
        fn monotone_in_temperature_and_conductance(
            t1 in 0.05f64..0.18, dt in 0.0f64..0.04, g in 3e-5f64..1e-4, dg in 0.0f64..1e-4,
        ) {
            let base = DeviceParams { temperature: t1, ..DeviceParams::default() };
            let hot = DeviceParams { temperature: t1 + dt, ..base.clone() };
            let a = model_params_from_rates(&base, ModelKind::MC).unwrap();
            let b = model_params_from_rates(&hot, ModelKind::MC).unwrap();
            for k in 0..3 {
                prop_assert!(b.p[k] >= a.p[k]);
            }
            let mut lo = base.clone();
            lo.g_t[2] = g;
            let mut hi = base.clone();
            hi.g_t[2] = g + dg;
            let a = model_params_from_rates(&lo, ModelKind::MC).unwrap();
            let b = model_params_from_rates(&hi, ModelKind::MC).unwrap();
            prop_assert!(b.p[2] >= a.p[2]);
        }

        #[test]
        fn q_grows_with_island_coupling(g in 0.0f64..1e-4, dg in 0.0f64..1e-4) {
            let a = DeviceParams { g_isis: g, ..DeviceParams::default() };
            let b = DeviceParams { g_isis: g + dg, ..DeviceParams::default() };
            let qa = model_params_from_rates(&a, ModelKind::MC).unwrap().params.q;
            let qb = model_params_from_rates(&b, ModelKind::MC).unwrap().params.q;
            prop_assert!(qb >= qa);
        }

        #[test]
        fn r_shrinks_with_longer_steps(tau in 1000.0f64..5000.0, extra in 0.0f64..5000.0) {
            let a = DeviceParams { tau, ..DeviceParams::default() };
            let b = DeviceParams { tau: tau + extra, ..DeviceParams::default() };
            let ra = model_params_from_rates(&a, ModelKind::MC).unwrap().params.r;
            let rb = model_params_from_rates(&b, ModelKind::MC).unwrap().params.r;
            prop_assert!(rb <= ra);
        }

        #[test]
        fn physical_range_round_trips(tau in 600.0f64..20000.0, t in 0.05f64..0.25, g in 0.0f64..3e-5) {
            let p = DeviceParams { tau, temperature: t, g_isis: g, ..DeviceParams::default() };
            let out = model_params_from_rates(&p, ModelKind::MC).unwrap();
            let probs = derive_event_probs(&out.params).unwrap();
            for k in 0..3 {
                prop_assert!((0.0..=1.0).contains(&probs.p_qp[k]));
                prop_assert!((0.0..=1.0).contains(&probs.p_pair[k]));
                prop_assert!((0.0..=1.0).contains(&probs.p_odd[k]));
            }
        }
    }
}
