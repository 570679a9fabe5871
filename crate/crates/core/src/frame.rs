//! Bit-packed Majorana operator strings over GF(2).
//!
//! A string records which Majorana operators have been applied to the system,
//! one bit per MZM. Bits are packed little-endian: flat index
//! `island * sites_per_island + site` lives in word `flat / 64`, bit `flat % 64`.
//! Operator order only contributes a global phase, so XOR is the full algebra.

use crate::error::{Error, Result};
use smallvec::SmallVec;

/// MZMs per tetron island.
pub const TETRON_SITES: usize = 4;

/// Address of a single MZM: `site` counts from 0, so site 0 is γ_{j,1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MzmIndex {
    pub island: usize,
    pub site: usize,
}

impl MzmIndex {
    pub fn new(island: usize, site: usize) -> Self {
        MzmIndex { island, site }
    }

    pub fn flat(self, sites_per_island: usize) -> usize {
        debug_assert!(self.site < sites_per_island);
        self.island * sites_per_island + self.site
    }

    pub fn from_flat(flat: usize, sites_per_island: usize) -> Self {
        MzmIndex {
            island: flat / sites_per_island,
            site: flat % sites_per_island,
        }
    }
}

/// Fixed-length packed bit vector. Used for MZM strings, gauge outcome
/// vectors and island parities alike.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct BitString {
    words: SmallVec<[u64; 4]>,
    len: usize,
}

/// A product of Majorana operators, up to phase.
pub type MajoranaString = BitString;

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: SmallVec::from_elem(0, len.div_ceil(64)),
            len,
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut s = BitString::zeros(len);
        for i in indices {
            s.flip(i);
        }
        s
    }

    /// Parses a string of `0`/`1` characters, index 0 first.
    pub fn from_bits_str(bits: &str) -> Self {
        let chars: Vec<char> = bits.chars().filter(|c| !c.is_whitespace()).collect();
        let mut s = BitString::zeros(chars.len());
        for (i, c) in chars.iter().enumerate() {
            if *c == '1' {
                s.set(i, true);
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    /// XORs `bits` (low `width` bits used) into positions `offset..offset+width`.
    #[inline]
    pub fn xor_field(&mut self, offset: usize, bits: u64, width: usize) {
        debug_assert!(width < 64 && offset + width <= self.len);
        let bits = bits & ((1u64 << width) - 1);
        let (w, b) = (offset >> 6, offset & 63);
        self.words[w] ^= bits << b;
        if b + width > 64 {
            self.words[w + 1] ^= bits >> (64 - b);
        }
    }

    /// Reads `width` bits starting at `offset`.
    #[inline]
    pub fn field(&self, offset: usize, width: usize) -> u64 {
        debug_assert!(width < 64 && offset + width <= self.len);
        let (w, b) = (offset >> 6, offset & 63);
        let mut v = self.words[w] >> b;
        if b + width > 64 {
            v |= self.words[w + 1] << (64 - b);
        }
        v & ((1u64 << width) - 1)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    /// In-place XOR. Panics on length mismatch; see [`xor_accumulate`] for the
    /// checked form.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "bit string length mismatch");
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= *b;
        }
    }

    /// Parity of `|self AND other|` without any weight precondition.
    #[inline]
    pub fn and_parity(&self, other: &BitString) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(other.words.iter()) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    pub fn to_bits_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

/// Returns `frame ⊕ event`.
pub fn xor_accumulate(frame: &MajoranaString, event: &MajoranaString) -> Result<MajoranaString> {
    if frame.len() != event.len() {
        return Err(Error::LengthMismatch {
            left: frame.len(),
            right: event.len(),
        });
    }
    let mut out = frame.clone();
    out.xor_assign(event);
    Ok(out)
}

/// Commutation bit of `a` with the even-weight operator `b`:
/// `|supp(a) ∩ supp(b)| mod 2`.
pub fn overlap_parity(a: &MajoranaString, b: &MajoranaString) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let w = b.count_ones();
    if w % 2 == 1 {
        return Err(Error::OddWeightOperator { weight: w });
    }
    Ok(a.and_parity(b))
}

/// Dense GF(2) matrix stored as packed rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitString>,
    cols: usize,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        BitMatrix {
            rows: Vec::new(),
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::new(n);
        for i in 0..n {
            m.push_row(BitString::from_indices(n, [i]));
        }
        m
    }

    pub fn push_row(&mut self, row: BitString) {
        assert_eq!(row.len(), self.cols, "row length must equal column count");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[BitString] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitString {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    /// Row `i` of the result is the parity of `row_i AND v`.
    pub fn mat_vec_parity(&self, v: &BitString) -> Result<BitString> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: v.len(),
            });
        }
        let mut out = BitString::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.and_parity(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }
}

/// One parity bit per island, kept in step with a [`MajoranaString`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IslandParities {
    bits: BitString,
    sites_per_island: usize,
}

impl IslandParities {
    pub fn even(n_islands: usize, sites_per_island: usize) -> Self {
        IslandParities {
            bits: BitString::zeros(n_islands),
            sites_per_island,
        }
    }

    /// Recomputes parities from scratch.
    pub fn of(s: &MajoranaString, sites_per_island: usize) -> Self {
        let mut p = IslandParities::even(s.len() / sites_per_island, sites_per_island);
        p.apply(s);
        p
    }

    /// Updates parities for an applied event string. Cost is linear in the
    /// event weight.
    #[inline]
    pub fn apply(&mut self, event: &MajoranaString) {
        for i in event.iter_ones() {
            self.bits.flip(i / self.sites_per_island);
        }
    }

    #[inline]
    pub fn flip(&mut self, island: usize) {
        self.bits.flip(island);
    }

    #[inline]
    pub fn is_odd(&self, island: usize) -> bool {
        self.bits.get(island)
    }

    pub fn any_odd(&self) -> bool {
        !self.bits.is_zero()
    }

    pub fn odd_islands(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn n_islands(&self) -> usize {
        self.bits.len()
    }

    pub fn as_bits(&self) -> &BitString {
        &self.bits
    }
}

/// A Majorana string together with its cached island parities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    string: MajoranaString,
    parities: IslandParities,
}

impl Frame {
    pub fn new(n_islands: usize, sites_per_island: usize) -> Self {
        Frame {
            string: MajoranaString::zeros(n_islands * sites_per_island),
            parities: IslandParities::even(n_islands, sites_per_island),
        }
    }

    pub fn string(&self) -> &MajoranaString {
        &self.string
    }

    pub fn parities(&self) -> &IslandParities {
        &self.parities
    }

    pub fn apply(&mut self, event: &MajoranaString) {
        self.string.xor_assign(event);
        self.parities.apply(event);
        self.debug_check();
    }

    /// Applies the local site mask `mask` to `island`.
    #[inline]
    pub fn apply_local(&mut self, island: usize, mask: u8) {
        let spi = self.parities.sites_per_island;
        self.string
            .xor_field(island * spi, mask as u64, spi);
        if mask.count_ones() & 1 == 1 {
            self.parities.flip(island);
        }
    }

    pub fn reset(&mut self) {
        self.string.clear();
        self.parities.bits.clear();
    }

    /// Panics if the cached parities disagree with the string. Compiled only
    /// with debug assertions.
    #[inline]
    pub fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            let fresh = IslandParities::of(&self.string, self.parities.sites_per_island);
            assert_eq!(fresh, self.parities, "island parity cache out of sync");
        }
    }
}
