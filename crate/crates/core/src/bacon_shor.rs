//! The distance-d Bacon-Shor subsystem code on a d×d grid of tetrons.
//!
//! Island `(row, col)` has index `row * d + col`. Gauge generators are listed
//! X-type first (horizontal neighbours, row-major), then Z-type (vertical
//! neighbours, row-major). Stabilizers are listed X-type first (column pairs
//! left to right), then Z-type (row pairs top to bottom).

use crate::error::{Error, Result};
use crate::frame::{BitMatrix, BitString, MajoranaString, TETRON_SITES};
use serde::Serialize;
use std::borrow::Cow;

/// Largest supported distance; syndromes are packed into a `u64`.
pub const MAX_DISTANCE: usize = 33;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LayoutKind {
    /// Pauli operators X = γ2γ3, Y = γ1γ3, Z = γ1γ2 on every island.
    Standard,
    /// Two-dot measurement geometry: XX uses γ2γ3 on the left island and γ1γ4
    /// on the right one, ZZ uses γ3γ4 on the upper island and γ1γ2 below.
    Geometric,
}

impl std::str::FromStr for LayoutKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(LayoutKind::Standard),
            "geometric" => Ok(LayoutKind::Geometric),
            _ => Err(Error::param("layout", s, "expected standard or geometric")),
        }
    }
}

impl std::fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LayoutKind::Standard => "standard",
            LayoutKind::Geometric => "geometric",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Local site mask of the representative on one island (bit `a` = γ_{a+1}).
    pub fn mask(self) -> u8 {
        match self {
            Pauli::X => 0b0110,
            Pauli::Y => 0b0101,
            Pauli::Z => 0b0011,
        }
    }
}

/// The single-qubit Pauli class of an even local mask, or `None` for the
/// identity class (0000 or 1111). Odd masks have no Pauli class.
pub fn pauli_class(mask: u8) -> Option<Option<Pauli>> {
    let m = mask & 0xF;
    if m.count_ones() % 2 == 1 {
        return None;
    }
    let canon = if m & 0b1000 != 0 { !m & 0xF } else { m };
    Some(match canon {
        0 => None,
        0b0110 => Some(Pauli::X),
        0b0101 => Some(Pauli::Y),
        0b0011 => Some(Pauli::Z),
        _ => unreachable!("weight-2 masks are covered above"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GaugeType {
    X,
    Z,
}

/// A two-island gauge generator and its measurement geometry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasuredPair {
    pub gauge: usize,
    pub kind: GaugeType,
    pub islands: [usize; 2],
    /// Measured local sites on each island.
    pub sites: [[usize; 2]; 2],
    /// Dot-connected MZM pairs as (site on islands[0], site on islands[1]).
    pub connected: [[usize; 2]; 2],
}

impl MeasuredPair {
    pub fn local_mask(&self, slot: usize) -> u8 {
        (1u8 << self.sites[slot][0]) | (1u8 << self.sites[slot][1])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleStep {
    pub pairs: Vec<MeasuredPair>,
    pub idle: Vec<usize>,
    /// Stabilizers completed in this step.
    pub stabilizers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasurementSchedule {
    pub steps: Vec<ScheduleStep>,
}

/// Stabilizer outcomes, X-type bits first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Syndrome {
    pub bits: u64,
    pub len: usize,
}

impl Syndrome {
    pub fn zero(len: usize) -> Self {
        Syndrome { bits: 0, len }
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.bits >> i) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.bits ^= 1 << i;
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }
}

#[derive(Clone, Debug)]
pub struct CodeLayout {
    d: usize,
    layout: LayoutKind,
    gauges: Vec<MeasuredPair>,
    gauge_matrix: BitMatrix,
    stab_gauge_matrix: BitMatrix,
    stab_supports: Vec<MajoranaString>,
    logical_matrix: BitMatrix,
    schedule: MeasurementSchedule,
    decoder_table: Option<Vec<MajoranaString>>,
}

pub fn build_code(d: usize, layout: LayoutKind) -> Result<CodeLayout> {
    CodeLayout::new(d, layout)
}

impl CodeLayout {
    pub fn new(d: usize, layout: LayoutKind) -> Result<Self> {
        if d < 3 || d % 2 == 0 || d > MAX_DISTANCE {
            return Err(Error::InvalidDistance(d));
        }
        let n_mzm = d * d * TETRON_SITES;
        let idx = |r: usize, c: usize| r * d + c;

        let mut gauges = Vec::with_capacity(2 * d * (d - 1));
        for r in 0..d {
            for c in 0..d - 1 {
                let (sites, connected) = match layout {
                    LayoutKind::Standard => ([[1, 2], [1, 2]], [[1, 1], [2, 2]]),
                    LayoutKind::Geometric => ([[1, 2], [0, 3]], [[1, 0], [2, 3]]),
                };
                gauges.push(MeasuredPair {
                    gauge: gauges.len(),
                    kind: GaugeType::X,
                    islands: [idx(r, c), idx(r, c + 1)],
                    sites,
                    connected,
                });
            }
        }
        for r in 0..d - 1 {
            for c in 0..d {
                let (sites, connected) = match layout {
                    LayoutKind::Standard => ([[0, 1], [0, 1]], [[0, 0], [1, 1]]),
                    LayoutKind::Geometric => ([[2, 3], [0, 1]], [[2, 0], [3, 1]]),
                };
                gauges.push(MeasuredPair {
                    gauge: gauges.len(),
                    kind: GaugeType::Z,
                    islands: [idx(r, c), idx(r + 1, c)],
                    sites,
                    connected,
                });
            }
        }

        let mut gauge_matrix = BitMatrix::new(n_mzm);
        for g in &gauges {
            let mut row = BitString::zeros(n_mzm);
            for slot in 0..2 {
                row.xor_field(g.islands[slot] * TETRON_SITES, g.local_mask(slot) as u64, TETRON_SITES);
            }
            gauge_matrix.push_row(row);
        }

        let n_x_gauges = d * (d - 1);
        let x_stab_gauges = |i: usize| (0..d).map(move |r| r * (d - 1) + i);
        let z_stab_gauges = |i: usize| (0..d).map(move |c| n_x_gauges + i * d + c);
        let mut stab_gauge_matrix = BitMatrix::new(gauges.len());
        let mut stab_supports = Vec::new();
        for i in 0..d - 1 {
            stab_gauge_matrix.push_row(BitString::from_indices(gauges.len(), x_stab_gauges(i)));
        }
        for i in 0..d - 1 {
            stab_gauge_matrix.push_row(BitString::from_indices(gauges.len(), z_stab_gauges(i)));
        }
        for row in stab_gauge_matrix.rows() {
            let mut support = BitString::zeros(n_mzm);
            for g in row.iter_ones() {
                support.xor_assign(gauge_matrix.row(g));
            }
            stab_supports.push(support);
        }

        let mut logical_matrix = BitMatrix::new(n_mzm);
        let mut x_bar = BitString::zeros(n_mzm);
        let mut z_bar = BitString::zeros(n_mzm);
        for k in 0..d {
            x_bar.xor_field(idx(k, 0) * TETRON_SITES, Pauli::X.mask() as u64, TETRON_SITES);
            z_bar.xor_field(idx(0, k) * TETRON_SITES, Pauli::Z.mask() as u64, TETRON_SITES);
        }
        logical_matrix.push_row(x_bar);
        logical_matrix.push_row(z_bar);

        let mut steps = Vec::with_capacity(4);
        for step in 0..4 {
            let parity = step % 2;
            let x_type = step < 2;
            let mut pairs = Vec::new();
            let mut stabilizers = Vec::new();
            let mut busy = vec![false; d * d];
            for i in (parity..d - 1).step_by(2) {
                let (stab, members): (usize, Vec<usize>) = if x_type {
                    (i, x_stab_gauges(i).collect())
                } else {
                    (d - 1 + i, z_stab_gauges(i).collect())
                };
                stabilizers.push(stab);
                for g in members {
                    for &j in &gauges[g].islands {
                        busy[j] = true;
                    }
                    pairs.push(gauges[g].clone());
                }
            }
            let idle = (0..d * d).filter(|&j| !busy[j]).collect();
            steps.push(ScheduleStep {
                pairs,
                idle,
                stabilizers,
            });
        }

        let mut code = CodeLayout {
            d,
            layout,
            gauges,
            gauge_matrix,
            stab_gauge_matrix,
            stab_supports,
            logical_matrix,
            schedule: MeasurementSchedule { steps },
            decoder_table: None,
        };
        if code.n_stabilizers() <= 16 {
            let table = (0..1u64 << code.n_stabilizers())
                .map(|bits| code.decode_direct(Syndrome { bits, len: code.n_stabilizers() }))
                .collect();
            code.decoder_table = Some(table);
        }
        Ok(code)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn layout(&self) -> LayoutKind {
        self.layout
    }

    pub fn n_islands(&self) -> usize {
        self.d * self.d
    }

    pub fn n_mzm(&self) -> usize {
        self.n_islands() * TETRON_SITES
    }

    pub fn n_gauges(&self) -> usize {
        self.gauges.len()
    }

    pub fn n_stabilizers(&self) -> usize {
        2 * (self.d - 1)
    }

    pub fn island(&self, row: usize, col: usize) -> usize {
        row * self.d + col
    }

    pub fn gauges(&self) -> &[MeasuredPair] {
        &self.gauges
    }

    pub fn gauge_matrix(&self) -> &BitMatrix {
        &self.gauge_matrix
    }

    pub fn stab_gauge_matrix(&self) -> &BitMatrix {
        &self.stab_gauge_matrix
    }

    /// Stabilizer supports expanded to MZM columns.
    pub fn stab_supports(&self) -> &[MajoranaString] {
        &self.stab_supports
    }

    pub fn logical_matrix(&self) -> &BitMatrix {
        &self.logical_matrix
    }

    pub fn schedule(&self) -> &MeasurementSchedule {
        &self.schedule
    }

    /// Stabilizer index that gauge `g` belongs to.
    pub fn stabilizer_of_gauge(&self, g: usize) -> usize {
        let d = self.d;
        let nx = d * (d - 1);
        if g < nx {
            g % (d - 1)
        } else {
            d - 1 + (g - nx) / d
        }
    }

    /// Single-island Pauli representative as a full-length string.
    pub fn pauli_string(&self, island: usize, p: Pauli) -> MajoranaString {
        let mut s = BitString::zeros(self.n_mzm());
        s.xor_field(island * TETRON_SITES, p.mask() as u64, TETRON_SITES);
        s
    }

    /// Noiseless syndrome of a frame.
    pub fn syndrome(&self, frame: &MajoranaString) -> Syndrome {
        let mut bits = 0u64;
        for (i, s) in self.stab_supports.iter().enumerate() {
            if s.and_parity(frame) {
                bits |= 1 << i;
            }
        }
        Syndrome {
            bits,
            len: self.n_stabilizers(),
        }
    }

    /// Stabilizer outcomes assembled from gauge outcomes.
    pub fn syndrome_from_gauges(&self, gauge_outcomes: &BitString) -> Result<Syndrome> {
        let s = self.stab_gauge_matrix.mat_vec_parity(gauge_outcomes)?;
        Ok(Syndrome {
            bits: s.words().first().copied().unwrap_or(0),
            len: self.n_stabilizers(),
        })
    }

    /// Lookup correction, borrowed from the precomputed table when present.
    pub fn correction(&self, s: Syndrome) -> Cow<'_, MajoranaString> {
        match &self.decoder_table {
            Some(t) => Cow::Borrowed(&t[s.bits as usize]),
            None => Cow::Owned(self.decode_direct(s)),
        }
    }

    fn decode_direct(&self, s: Syndrome) -> MajoranaString {
        let d = self.d;
        let mask = (1u64 << (d - 1)) - 1;
        let cols = decode_line(s.bits & mask, d);
        let rows = decode_line((s.bits >> (d - 1)) & mask, d);
        let mut out = BitString::zeros(self.n_mzm());
        for r in 0..d {
            if rows >> r & 1 == 1 {
                out.xor_field(self.island(r, 0) * TETRON_SITES, Pauli::X.mask() as u64, TETRON_SITES);
            }
        }
        for c in 0..d {
            if cols >> c & 1 == 1 {
                out.xor_field(self.island(0, c) * TETRON_SITES, Pauli::Z.mask() as u64, TETRON_SITES);
            }
        }
        out
    }
}

/// Minimum-weight line indicators `e` with `s_i = e_i ⊕ e_{i+1}`.
fn decode_line(s: u64, d: usize) -> u64 {
    let mut e = 0u64;
    let mut cur = 0u64;
    for i in 0..d - 1 {
        cur ^= (s >> i) & 1;
        e |= cur << (i + 1);
    }
    let full = (1u64 << d) - 1;
    if e.count_ones() as usize > d / 2 {
        e ^ full
    } else {
        e
    }
}

/// Lookup correction for a syndrome: X on the left-column qubit of each
/// flagged row, Z on the top-row qubit of each flagged column.
pub fn decode_syndrome(s: Syndrome, layout: &CodeLayout) -> MajoranaString {
    layout.correction(s).into_owned()
}

/// The last syndrome that repeats in two consecutive rounds, else the final round.
pub fn select_syndrome(rounds: &[Syndrome]) -> Syndrome {
    assert!(!rounds.is_empty(), "select_syndrome needs at least one round");
    for t in (1..rounds.len()).rev() {
        if rounds[t] == rounds[t - 1] {
            return rounds[t];
        }
    }
    rounds[rounds.len() - 1]
}

/// True when the residual anticommutes with a bare logical representative.
pub fn is_logical_failure(residual: &MajoranaString, layout: &CodeLayout) -> bool {
    layout
        .logical_matrix
        .rows()
        .iter()
        .any(|row| row.and_parity(residual))
}

/// JSON-friendly snapshot of a layout.
#[derive(Serialize)]
pub struct LayoutDump {
    pub d: usize,
    pub layout: LayoutKind,
    pub gauge_matrix: Vec<String>,
    pub stab_gauge_matrix: Vec<String>,
    pub logical_matrix: Vec<String>,
    pub schedule: MeasurementSchedule,
}

impl From<&CodeLayout> for LayoutDump {
    fn from(c: &CodeLayout) -> Self {
        let rows = |m: &BitMatrix| m.rows().iter().map(|r| r.to_bits_string()).collect();
        LayoutDump {
            d: c.d,
            layout: c.layout,
            gauge_matrix: rows(&c.gauge_matrix),
            stab_gauge_matrix: rows(&c.stab_gauge_matrix),
            logical_matrix: rows(&c.logical_matrix),
            schedule: c.schedule.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::overlap_parity;
    use proptest::prelude::*;

    fn layouts() -> [LayoutKind; 2] {
        [LayoutKind::Standard, LayoutKind::Geometric]
    }

    /// Rank of a set of GF(2) vectors by Gaussian elimination.
    fn rank(vectors: &[BitString]) -> usize {
        let mut basis: Vec<BitString> = Vec::new();
        for v in vectors {
            let mut v = v.clone();
            for b in &basis {
                let lead = b.iter_ones().next().unwrap();
                if v.get(lead) {
                    v.xor_assign(b);
                }
            }
            let lead = v.iter_ones().next();
            if let Some(lead) = lead {
                for b in basis.iter_mut() {
                    if b.get(lead) {
                        b.xor_assign(&v);
                    }
                }
                basis.push(v);
            }
        }
        basis.len()
    }

    fn in_gauge_group(code: &CodeLayout, s: &BitString) -> bool {
        let rows = code.gauge_matrix().rows().to_vec();
        let r = rank(&rows);
        let mut with = rows;
        with.push(s.clone());
        rank(&with) == r
    }

    #[test]
    fn rejects_bad_distances() {
        for d in [0, 1, 2, 4, 6, 35] {
            assert!(build_code(d, LayoutKind::Standard).is_err());
        }
    }

    #[test]
    fn counts_for_d3_and_d5() {
        let c3 = build_code(3, LayoutKind::Standard).unwrap();
        assert_eq!(c3.n_gauges(), 12);
        assert_eq!(c3.n_stabilizers(), 4);
        assert_eq!(c3.logical_matrix().n_rows(), 2);
        let c5 = build_code(5, LayoutKind::Standard).unwrap();
        assert_eq!(c5.n_gauges(), 40);
        assert_eq!(c5.n_stabilizers(), 8);
        for row in c5.stab_gauge_matrix().rows() {
            assert_eq!(row.count_ones(), 5);
        }
        for (i, row) in c5.stab_gauge_matrix().rows().iter().enumerate() {
            for g in row.iter_ones() {
                assert_eq!(c5.stabilizer_of_gauge(g), i);
            }
        }
    }

    #[test]
    fn commutation_tables() {
        for d in [3, 5] {
            for lk in layouts() {
                let code = build_code(d, lk).unwrap();
                let gm = code.gauge_matrix();
                for s in code.stab_supports() {
                    for g in gm.rows() {
                        assert!(!overlap_parity(s, g).unwrap());
                    }
                }
                let lm = code.logical_matrix();
                for l in lm.rows() {
                    for g in gm.rows() {
                        assert!(!overlap_parity(l, g).unwrap());
                    }
                    for s in code.stab_supports() {
                        assert!(!overlap_parity(s, l).unwrap());
                    }
                }
                assert!(overlap_parity(lm.row(0), lm.row(1)).unwrap());
                // The gauge group is non-abelian: horizontal and vertical
                // generators sharing an island anticommute.
                assert!(overlap_parity(gm.row(0), gm.row(d * (d - 1))).unwrap());
            }
        }
    }

    #[test]
    fn geometric_gauges_match_listed_quadruples() {
        let code = build_code(5, LayoutKind::Geometric).unwrap();
        let xx = &code.gauges()[0];
        let ones: Vec<usize> = code.gauge_matrix().row(0).iter_ones().collect();
        // γ_{0,2}γ_{0,3}γ_{1,1}γ_{1,4}
        assert_eq!(ones, vec![1, 2, 4, 7]);
        assert_eq!(xx.connected, [[1, 0], [2, 3]]);
        let zz_row = code.gauge_matrix().row(20);
        // γ_{0,3}γ_{0,4}γ_{5,1}γ_{5,2}
        assert_eq!(zz_row.iter_ones().collect::<Vec<_>>(), vec![2, 3, 20, 21]);
    }

    #[test]
    fn schedule_structure() {
        for d in [3, 5, 7] {
            let code = build_code(d, LayoutKind::Standard).unwrap();
            let mut seen = vec![0; code.n_gauges()];
            assert_eq!(code.schedule().steps.len(), 4);
            for step in &code.schedule().steps {
                let mut used = vec![false; d * d];
                for p in &step.pairs {
                    seen[p.gauge] += 1;
                    for &j in &p.islands {
                        assert!(!used[j], "island measured twice in one step");
                        used[j] = true;
                    }
                }
                for &j in &step.idle {
                    assert!(!used[j]);
                }
                assert_eq!(step.pairs.len() * 2 + step.idle.len(), d * d);
                if d == 5 {
                    assert_eq!(step.pairs.len(), 10);
                    assert_eq!(step.idle.len(), 5);
                }
            }
            assert!(seen.iter().all(|&n| n == 1));
        }
    }

    #[test]
    fn decoder_examples() {
        let code = build_code(5, LayoutKind::Standard).unwrap();
        assert!(decode_syndrome(Syndrome::zero(8), &code).is_zero());
        for r in 0..5 {
            for c in 0..5 {
                let e = code.pauli_string(code.island(r, c), Pauli::X);
                let mut res = e.clone();
                res.xor_assign(&decode_syndrome(code.syndrome(&e), &code));
                assert!(code.syndrome(&res).is_zero());
                assert!(!is_logical_failure(&res, &code));
                assert!(in_gauge_group(&code, &res));
            }
        }
        let mut e = BitString::zeros(code.n_mzm());
        for r in [0, 2, 4] {
            e.xor_assign(&code.pauli_string(code.island(r, 1), Pauli::X));
        }
        let corr = decode_syndrome(code.syndrome(&e), &code);
        // Rows {1, 3} have lower weight than rows {0, 2, 4}.
        let mut expected = code.pauli_string(code.island(1, 0), Pauli::X);
        expected.xor_assign(&code.pauli_string(code.island(3, 0), Pauli::X));
        assert_eq!(corr, expected);
        let mut res = e;
        res.xor_assign(&corr);
        assert!(is_logical_failure(&res, &code));
    }

    #[test]
    fn select_examples() {
        let s = |b| Syndrome { bits: b, len: 8 };
        let (a, b, c, d) = (s(1), s(2), s(3), s(4));
        assert_eq!(select_syndrome(&[a, a, b, c]), a);
        assert_eq!(select_syndrome(&[a, b, b, c]), b);
        assert_eq!(select_syndrome(&[a, b, c, c]), c);
        assert_eq!(select_syndrome(&[a, b, c, d]), d);
    }

    #[test]
    fn logical_failure_examples() {
        let code = build_code(5, LayoutKind::Standard).unwrap();
        for g in code.gauge_matrix().rows() {
            assert!(!is_logical_failure(g, &code));
        }
        let x_bar = code.logical_matrix().row(0).clone();
        assert!(is_logical_failure(&x_bar, &code));
        let mut dressed = x_bar;
        dressed.xor_assign(code.gauge_matrix().row(0));
        assert!(is_logical_failure(&dressed, &code));
    }

    #[test]
    fn all_weight_two_paulis_corrected_d5() {
        for lk in layouts() {
            let code = build_code(5, lk).unwrap();
            let n = code.n_islands();
            let singles: Vec<(usize, Pauli)> = (0..n)
                .flat_map(|j| Pauli::ALL.into_iter().map(move |p| (j, p)))
                .collect();
            let check = |e: &BitString| {
                let mut res = e.clone();
                res.xor_assign(&decode_syndrome(code.syndrome(e), &code));
                assert!(!is_logical_failure(&res, &code), "uncorrected {e:?}");
            };
            for (i, &(j1, p1)) in singles.iter().enumerate() {
                let e1 = code.pauli_string(j1, p1);
                check(&e1);
                for &(j2, p2) in &singles[i + 1..] {
                    if j2 == j1 {
                        continue;
                    }
                    let mut e = e1.clone();
                    e.xor_assign(&code.pauli_string(j2, p2));
                    check(&e);
                }
            }
        }
    }

    #[test]
    fn single_mzm_syndromes_look_like_paulis() {
        let code = build_code(5, LayoutKind::Standard).unwrap();
        let mut pauli_syndromes = vec![Syndrome::zero(8)];
        for j in 0..code.n_islands() {
            for p in Pauli::ALL {
                pauli_syndromes.push(code.syndrome(&code.pauli_string(j, p)));
            }
        }
        for site in 0..code.n_mzm() {
            let s = code.syndrome(&BitString::from_indices(code.n_mzm(), [site]));
            assert!(pauli_syndromes.contains(&s), "MZM {site}");
        }
    }

    #[test]
    fn d3_distance_is_three() {
        let code = build_code(3, LayoutKind::Standard).unwrap();
        let gm = code.gauge_matrix();
        let lm = code.logical_matrix();
        let mut bare = Vec::new();
        for combo in 1..4u32 {
            let mut l = BitString::zeros(code.n_mzm());
            for i in 0..2 {
                if combo >> i & 1 == 1 {
                    l.xor_assign(lm.row(i));
                }
            }
            bare.push(l);
        }
        let mut min_weight = usize::MAX;
        for l in &bare {
            for mask in 0..1u32 << gm.n_rows() {
                let mut s = l.clone();
                for g in 0..gm.n_rows() {
                    if mask >> g & 1 == 1 {
                        s.xor_assign(gm.row(g));
                    }
                }
                let w = (0..code.n_islands())
                    .filter(|&j| {
                        let m = s.field(j * 4, 4);
                        m != 0 && m != 0xF
                    })
                    .count();
                min_weight = min_weight.min(w);
            }
        }
        assert_eq!(min_weight, 3);
    }

    #[test]
    fn pauli_class_of_masks() {
        assert_eq!(pauli_class(0b0110), Some(Some(Pauli::X)));
        assert_eq!(pauli_class(0b1001), Some(Some(Pauli::X)));
        assert_eq!(pauli_class(0b1010), Some(Some(Pauli::Y)));
        assert_eq!(pauli_class(0b1100), Some(Some(Pauli::Z)));
        assert_eq!(pauli_class(0b1111), Some(None));
        assert_eq!(pauli_class(0b0001), None);
    }

    proptest! {
        #[test]
        fn select_is_idempotent_under_append(bits in proptest::collection::vec(0u64..4, 4)) {
            let rounds: Vec<Syndrome> = bits.iter().map(|&b| Syndrome { bits: b, len: 8 }).collect();
            let chosen = select_syndrome(&rounds);
            let mut extended = rounds.clone();
            extended.push(chosen);
            prop_assert_eq!(select_syndrome(&extended), chosen);
        }

        #[test]
        fn gauge_syndrome_matches_direct(sites in proptest::collection::vec(0usize..100, 0..10)) {
            let code = build_code(5, LayoutKind::Geometric).unwrap();
            let f = BitString::from_indices(100, sites);
            let gauges = code.gauge_matrix().mat_vec_parity(&f).unwrap();
            prop_assert_eq!(code.syndrome_from_gauges(&gauges).unwrap(), code.syndrome(&f));
        }
    }
}
